//! Diagnostics shared by validation, the linter, the parser, and the CLI.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "WARNING",
            Severity::Error => "ERROR",
        })
    }
}

/// Stable machine-readable diagnostic codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    Lex,
    Syntax,
    MissingField,
    DuplicateField,
    FieldNotAllowed,
    DuplicateId,
    DuplicateAnchor,
    DanglingPart,
    DanglingAnchor,
    DanglingStep,
    DanglingFlag,
    DanglingRegion,
    DanglingEntity,
    BadShape,
    DegenerateHull,
    BadPose,
    BadMass,
    SelfTarget,
    BadTolerance,
    BadTime,
    BadFriction,
    BadRegion,
    BadDifficulty,
    CycleOnlyDeadlock,
    UnreachableStep,
    UnusedPart,
    NoHint,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Lex => "E_LEX",
            Code::Syntax => "E_SYNTAX",
            Code::MissingField => "E_MISSING_FIELD",
            Code::DuplicateField => "E_DUPLICATE_FIELD",
            Code::FieldNotAllowed => "E_FIELD_NOT_ALLOWED",
            Code::DuplicateId => "E_DUPLICATE_ID",
            Code::DuplicateAnchor => "E_DUPLICATE_ANCHOR",
            Code::DanglingPart => "E_DANGLING_PART",
            Code::DanglingAnchor => "E_DANGLING_ANCHOR",
            Code::DanglingStep => "E_DANGLING_STEP",
            Code::DanglingFlag => "E_DANGLING_FLAG",
            Code::DanglingRegion => "E_DANGLING_REGION",
            Code::DanglingEntity => "E_DANGLING_ENTITY",
            Code::BadShape => "E_BAD_SHAPE",
            Code::DegenerateHull => "E_DEGENERATE_HULL",
            Code::BadPose => "E_BAD_POSE",
            Code::BadMass => "E_BAD_MASS",
            Code::SelfTarget => "E_SELF_TARGET",
            Code::BadTolerance => "E_BAD_TOLERANCE",
            Code::BadTime => "E_BAD_TIME",
            Code::BadFriction => "E_BAD_FRICTION",
            Code::BadRegion => "E_BAD_REGION",
            Code::BadDifficulty => "E_BAD_DIFFICULTY",
            Code::CycleOnlyDeadlock => "E_CYCLE_ONLY_DEADLOCK",
            Code::UnreachableStep => "W_UNREACHABLE_STEP",
            Code::UnusedPart => "W_UNUSED_PART",
            Code::NoHint => "W_NO_HINT",
        }
    }

    pub fn severity(self) -> Severity {
        if self.as_str().starts_with("W_") {
            Severity::Warning
        } else {
            Severity::Error
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Byte range in the source text. `line` and `column` are 1-based; column
/// counts characters, not bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

/// The scenario item a diagnostic is about.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Item {
    Scenario,
    Part(String),
    Step(String),
    Event(String),
    Region(String),
    Difficulty(String),
    Material(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Location {
    pub item: Item,
    /// Field name within the item, e.g. `"requires"`.
    pub field: Option<&'static str>,
    /// Referenced identifier, when the diagnostic is about one reference.
    pub reference: Option<String>,
}

impl Location {
    pub fn item(item: Item) -> Self {
        Location {
            item,
            field: None,
            reference: None,
        }
    }

    pub fn field(item: Item, field: &'static str) -> Self {
        Location {
            item,
            field: Some(field),
            reference: None,
        }
    }

    pub fn reference(item: Item, field: &'static str, reference: impl Into<String>) -> Self {
        Location {
            item,
            field: Some(field),
            reference: Some(reference.into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub location: Option<Location>,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: code.severity(),
            code,
            message: message.into(),
            location: None,
            span: None,
        }
    }

    pub fn at(mut self, location: Location) -> Self {
        self.location = Some(location);
        self
    }

    pub fn with_span(mut self, span: SourceSpan) -> Self {
        self.span = Some(span);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `SEVERITY CODE file:line:col message`
    pub fn render(&self, file: &str) -> String {
        let (line, col) = self.span.map(|s| (s.line, s.column)).unwrap_or((0, 0));
        format!(
            "{} {} {}:{}:{} {}",
            self.severity, self.code, file, line, col, self.message
        )
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
