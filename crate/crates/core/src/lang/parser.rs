//! Recursive-descent parser for `.itx` scenario files.
//!
//! Syntax errors inside an item block skip to the block's closing brace so
//! one pass can report several problems. Items that contained an error are
//! still kept (with defaults) to avoid cascades of dangling-reference
//! diagnostics, but any error-severity diagnostic suppresses the scenario.

use std::collections::HashMap;

use super::lexer::{Lexer, Tok, Token};
use crate::diag::{has_errors, Code, Diagnostic, Item, Location, SourceSpan};
use crate::math::{Pose, Vec3};
use crate::scene::{
    validate_scenario, Anchor, AnchorRef, ColliderShape, ConditionExpr, DifficultyLevel, EventAction,
    EventDef, MaterialPair, PartDef, Region, Scenario, StepDef, StepKind, Trigger, DEFAULT_DWELL,
};

/// Maximum nesting of parenthesized conditions.
const MAX_COND_DEPTH: usize = 64;

/// Source positions of scenario items, fields and references.
#[derive(Clone, Debug, Default)]
pub struct SpanTable {
    map: HashMap<Location, SourceSpan>,
    root: Option<SourceSpan>,
}

impl SpanTable {
    fn record(&mut self, loc: Location, span: SourceSpan) {
        self.map.entry(loc).or_insert(span);
    }

    /// Most specific recorded span for a location, falling back to the
    /// enclosing field, then item, then the scenario header.
    pub fn locate(&self, loc: &Location) -> Option<SourceSpan> {
        if let Some(s) = self.map.get(loc) {
            return Some(*s);
        }
        if loc.reference.is_some() {
            let field = Location {
                item: loc.item.clone(),
                field: loc.field,
                reference: None,
            };
            if let Some(s) = self.map.get(&field) {
                return Some(*s);
            }
        }
        if let Some(s) = self.map.get(&Location::item(loc.item.clone())) {
            return Some(*s);
        }
        self.root
    }

    /// Attaches spans to diagnostics that lack one.
    pub fn attach(&self, diags: &mut [Diagnostic]) {
        for d in diags.iter_mut().filter(|d| d.span.is_none()) {
            d.span = match &d.location {
                Some(loc) => self.locate(loc),
                None => self.root,
            };
        }
    }
}

#[derive(Debug)]
pub struct ParseResult {
    /// Present iff there are no error-severity diagnostics.
    pub scenario: Option<Scenario>,
    pub diagnostics: Vec<Diagnostic>,
    pub spans: SpanTable,
}

impl ParseResult {
    pub fn is_ok(&self) -> bool {
        self.scenario.is_some()
    }
}

/// Parses `.itx` source text into a validated scenario.
pub fn parse(text: &str) -> ParseResult {
    let (tokens, mut diagnostics) = Lexer::new(text).tokenize();
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        diags: Vec::new(),
        spans: SpanTable::default(),
        end: SourceSpan {
            offset: text.len(),
            line: 1,
            column: 1,
            length: 0,
        },
    };
    if let Some(last) = p.toks.last() {
        p.end = last.span;
    }
    let scenario = p.scenario();
    diagnostics.append(&mut p.diags);
    let mut spans = p.spans;
    if spans.root.is_none() {
        spans.root = Some(SourceSpan {
            offset: 0,
            line: 1,
            column: 1,
            length: 0,
        });
    }
    let scenario = match scenario {
        Some(s) if !has_errors(&diagnostics) => {
            let mut semantic = validate_scenario(&s);
            spans.attach(&mut semantic);
            diagnostics.extend(semantic);
            Some(s)
        }
        _ => None,
    };
    let scenario = if has_errors(&diagnostics) { None } else { scenario };
    ParseResult {
        scenario,
        diagnostics,
        spans,
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    spans: SpanTable,
    end: SourceSpan,
}

type PResult<T> = Result<T, ()>;

/// Collected fields of a step block before the kind-specific record is built.
#[derive(Default)]
struct StepFields {
    part: Option<String>,
    target_anchor: Option<AnchorRef>,
    target_part: Option<String>,
    tol: Option<(f64, f64)>,
    dwell: Option<f64>,
    requires: Option<ConditionExpr>,
    min_time: Option<f64>,
    par_time: Option<f64>,
    instruction: Option<String>,
    hint: Option<String>,
    tool: Option<String>,
    contact_time: Option<f64>,
    action_id: Option<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> &Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn err(&mut self, msg: impl Into<String>) {
        let span = self.span();
        self.diags.push(Diagnostic::new(Code::Syntax, msg).with_span(span));
    }

    fn expected<T>(&mut self, what: &str) -> PResult<T> {
        let found = self.peek().describe();
        self.err(format!("expected {what}, found {found}"));
        Err(())
    }

    fn expect(&mut self, t: Tok) -> PResult<SourceSpan> {
        if *self.peek() == t {
            Ok(self.advance().span)
        } else {
            self.expected(&t.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_kw(kw) {
            Ok(self.advance().span)
        } else {
            self.expected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        if let Tok::Ident(s) = self.peek() {
            let s = s.clone();
            let span = self.advance().span;
            Ok((s, span))
        } else {
            self.expected("identifier")
        }
    }

    fn number(&mut self) -> PResult<f64> {
        if let Tok::Number(v) = self.peek() {
            let v = *v;
            self.advance();
            Ok(v)
        } else {
            self.expected("number")
        }
    }

    fn string(&mut self) -> PResult<String> {
        if let Tok::Str(s) = self.peek() {
            let s = s.clone();
            self.advance();
            Ok(s)
        } else {
            self.expected("string")
        }
    }

    fn boolean(&mut self) -> PResult<bool> {
        match self.peek() {
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(true)
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(false)
            }
            _ => {
                self.expected("`true` or `false`")
            }
        }
    }

    fn vec3(&mut self) -> PResult<Vec3> {
        self.expect(Tok::LParen)?;
        let x = self.number()?;
        self.expect(Tok::Comma)?;
        let y = self.number()?;
        self.expect(Tok::Comma)?;
        let z = self.number()?;
        self.expect(Tok::RParen)?;
        Ok(Vec3::new(x, y, z))
    }

    fn pose(&mut self) -> PResult<Pose> {
        let position = self.vec3()?;
        self.keyword("rpy")?;
        let rpy = self.vec3()?;
        Ok(Pose::from_rpy(
            position,
            rpy.x.to_radians(),
            rpy.y.to_radians(),
            rpy.z.to_radians(),
        ))
    }

    /// Skips to just past the `}` closing the block whose `{` was consumed.
    fn recover_block(&mut self) {
        let mut depth = 1usize;
        while !self.at_eof() {
            match self.advance().tok {
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                _ => {}
            }
        }
    }

    /// Skips a malformed top-level item: up to a `;` or a balanced block.
    fn recover_item(&mut self) {
        while !self.at_eof() {
            match self.peek() {
                Tok::Semi => {
                    self.advance();
                    return;
                }
                Tok::LBrace => {
                    self.advance();
                    self.recover_block();
                    return;
                }
                Tok::RBrace => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn scenario(&mut self) -> Option<Scenario> {
        let head = self.span();
        if self.keyword("scenario").is_err() {
            return None;
        }
        self.spans.root = Some(head);
        self.spans.record(Location::item(Item::Scenario), head);
        let name = self.string().ok()?;
        self.expect(Tok::LBrace).ok()?;
        let mut s = Scenario::new(name);
        let mut env_seen = false;
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::Eof => {
                    self.err("unterminated scenario block, expected `}`");
                    break;
                }
                Tok::Ident(kw) => {
                    // items recover internally, so the result only matters to them
                    let _ = match kw.as_str() {
                        "part" => self.part(&mut s),
                        "step" => self.step(&mut s),
                        "event" => self.event(&mut s),
                        "region" => self.region(&mut s),
                        "difficulty" => self.difficulty(&mut s),
                        "material" => self.material(&mut s),
                        "environment" => {
                            if env_seen {
                                let span = self.span();
                                self.diags.push(
                                    Diagnostic::new(Code::DuplicateField, "environment declared more than once")
                                        .with_span(span),
                                );
                            }
                            env_seen = true;
                            self.environment(&mut s)
                        }
                        _ => {
                            let _: PResult<()> = self.expected("an item (part, step, event, region, difficulty, material)");
                            self.advance();
                            self.recover_item();
                            Ok(())
                        }
                    };
                }
                _ => {
                    let _: PResult<()> = self.expected("an item keyword");
                    self.advance();
                    self.recover_item();
                }
            }
        }
        if !self.at_eof() {
            self.err("unexpected content after the scenario block");
        }
        s.ensure_difficulty();
        Some(s)
    }

    fn environment(&mut self, s: &mut Scenario) -> PResult<()> {
        self.advance();
        let r = (|| {
            self.expect(Tok::Eq)?;
            let (env, _) = self.ident()?;
            self.expect(Tok::Semi)?;
            Ok(env)
        })();
        match r {
            Ok(env) => {
                s.environment = env;
                Ok(())
            }
            Err(()) => {
                self.recover_item();
                Err(())
            }
        }
    }

    /// Parses `{ field* }` for a block item, recovering on errors.
    fn block(&mut self, mut field: impl FnMut(&mut Self, String, SourceSpan) -> PResult<()>) -> bool {
        if self.expect(Tok::LBrace).is_err() {
            self.recover_item();
            return false;
        }
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    return true;
                }
                Tok::Ident(name) => {
                    let span = self.advance().span;
                    if field(self, name, span).is_err() {
                        self.recover_block();
                        return false;
                    }
                }
                Tok::Eof => {
                    let _: PResult<()> = self.expected("`}`");
                    return false;
                }
                _ => {
                    let _: PResult<()> = self.expected("a field name or `}`");
                    self.recover_block();
                    return false;
                }
            }
        }
    }

    fn dup(&mut self, seen: &mut Vec<String>, name: &str, span: SourceSpan) {
        if seen.iter().any(|n| n == name) {
            self.diags.push(
                Diagnostic::new(Code::DuplicateField, format!("field `{name}` given more than once")).with_span(span),
            );
        } else {
            seen.push(name.to_string());
        }
    }

    fn part(&mut self, s: &mut Scenario) -> PResult<()> {
        self.advance();
        let (id, id_span) = match self.ident() {
            Ok(x) => x,
            Err(()) => {
                self.recover_item();
                return Err(());
            }
        };
        let item = Item::Part(id.clone());
        self.spans.record(Location::item(item.clone()), id_span);
        let mut part = PartDef::new(id.clone(), ColliderShape::Sphere { radius: 1.0 }, 0.0, Pose::IDENTITY);
        let mut shape_seen = false;
        let mut seen = Vec::new();
        let ok = self.block(|p, name, span| {
            if name != "anchor" {
                p.dup(&mut seen, &name, span);
            }
            match name.as_str() {
                "shape" => {
                    p.expect(Tok::Eq)?;
                    part.shape = p.shape()?;
                    shape_seen = true;
                    p.spans.record(Location::field(item.clone(), "shape"), span);
                }
                "mass" => {
                    p.expect(Tok::Eq)?;
                    part.mass = p.number()?;
                    p.spans.record(Location::field(item.clone(), "mass"), span);
                }
                "pose" => {
                    p.expect(Tok::Eq)?;
                    part.initial_pose = p.pose()?;
                    p.spans.record(Location::field(item.clone(), "pose"), span);
                }
                "grabbable" => {
                    p.expect(Tok::Eq)?;
                    part.grabbable = p.boolean()?;
                }
                "material" => {
                    p.expect(Tok::Eq)?;
                    part.material = p.ident()?.0;
                }
                "anchor" => {
                    let (name, aspan) = p.ident()?;
                    p.expect(Tok::Eq)?;
                    let pose = p.pose()?;
                    p.spans.record(Location::reference(item.clone(), "anchor", name.clone()), aspan);
                    part.anchors.push(Anchor { name, pose });
                }
                other => {
                    p.err(format!("unknown part field `{other}`"));
                    return Err(());
                }
            }
            p.expect(Tok::Semi)?;
            Ok(())
        });
        if ok && !shape_seen {
            self.diags.push(
                Diagnostic::new(Code::MissingField, format!("part `{id}` has no shape")).with_span(id_span),
            );
        }
        s.parts.push(part);
        Ok(())
    }

    fn shape(&mut self) -> PResult<ColliderShape> {
        let (kind, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let shape = match kind.as_str() {
            "sphere" => ColliderShape::Sphere { radius: self.number()? },
            "box" => {
                let x = self.number()?;
                self.expect(Tok::Comma)?;
                let y = self.number()?;
                self.expect(Tok::Comma)?;
                let z = self.number()?;
                ColliderShape::Box {
                    half_extents: Vec3::new(x, y, z),
                }
            }
            "capsule" => {
                let radius = self.number()?;
                self.expect(Tok::Comma)?;
                let half_height = self.number()?;
                ColliderShape::Capsule { radius, half_height }
            }
            "hull" => {
                let mut vertices = vec![self.vec3()?];
                while *self.peek() == Tok::Comma {
                    self.advance();
                    vertices.push(self.vec3()?);
                }
                ColliderShape::ConvexHull { vertices }
            }
            other => {
                self.err(format!("unknown shape `{other}`"));
                return Err(());
            }
        };
        self.expect(Tok::RParen)?;
        Ok(shape)
    }

    fn step(&mut self, s: &mut Scenario) -> PResult<()> {
        self.advance();
        let header = (|| {
            let (id, span) = self.ident()?;
            self.expect(Tok::Colon)?;
            let (kind, kspan) = self.ident()?;
            if !matches!(kind.as_str(), "placing" | "action" | "tooluse") {
                self.diags.push(
                    Diagnostic::new(Code::Syntax, format!("unknown step kind `{kind}`, expected placing, action or tooluse"))
                        .with_span(kspan),
                );
                return Err(());
            }
            Ok((id, span, kind))
        })();
        let (id, id_span, kind) = match header {
            Ok(h) => h,
            Err(()) => {
                self.recover_item();
                return Err(());
            }
        };
        let item = Item::Step(id.clone());
        self.spans.record(Location::item(item.clone()), id_span);
        let mut f = StepFields::default();
        let mut seen = Vec::new();
        let kind_name = kind.clone();
        let ok = self.block(|p, name, span| {
            p.dup(&mut seen, &name, span);
            let allowed: &[&str] = match kind_name.as_str() {
                "placing" => &["part", "target", "tol", "dwell"],
                "action" => &["action_id"],
                _ => &["tool", "target", "contact_time"],
            };
            let common = ["requires", "min_time", "par_time", "instruction", "hint"];
            let known = [
                "part", "target", "tol", "dwell", "tool", "contact_time", "action_id",
            ];
            if !common.contains(&name.as_str()) && !allowed.contains(&name.as_str()) {
                if known.contains(&name.as_str()) {
                    p.diags.push(
                        Diagnostic::new(Code::FieldNotAllowed, format!("field `{name}` is not allowed on a {kind_name} step"))
                            .with_span(span),
                    );
                } else {
                    p.err(format!("unknown step field `{name}`"));
                    return Err(());
                }
            }
            p.expect(Tok::Eq)?;
            let field_name: &'static str = match name.as_str() {
                "part" => {
                    let (v, vs) = p.ident()?;
                    p.spans.record(Location::reference(item.clone(), "part", v.clone()), vs);
                    f.part = Some(v);
                    "part"
                }
                "target" => {
                    let start = p.span();
                    if p.is_kw("anchor") && matches!(p.toks.get(p.pos + 1).map(|t| &t.tok), Some(Tok::LParen)) {
                        p.advance();
                        p.expect(Tok::LParen)?;
                        let (part, _) = p.ident()?;
                        p.expect(Tok::Comma)?;
                        let (anchor, _) = p.ident()?;
                        p.expect(Tok::RParen)?;
                        p.spans.record(
                            Location::reference(item.clone(), "target", format!("{part}.{anchor}")),
                            start,
                        );
                        p.spans.record(Location::reference(item.clone(), "target", part.clone()), start);
                        f.target_anchor = Some(AnchorRef { part, anchor });
                    } else {
                        let (v, vs) = p.ident()?;
                        p.spans.record(Location::reference(item.clone(), "target", v.clone()), vs);
                        f.target_part = Some(v);
                    }
                    "target"
                }
                "tol" => {
                    p.keyword("pos")?;
                    let pos = p.number()?;
                    p.keyword("rot")?;
                    let rot = p.number()?;
                    p.keyword("deg")?;
                    f.tol = Some((pos, rot.to_radians()));
                    "tol"
                }
                "dwell" => {
                    f.dwell = Some(p.number()?);
                    "dwell"
                }
                "requires" => {
                    f.requires = Some(p.cond(&item, 0)?);
                    "requires"
                }
                "min_time" => {
                    f.min_time = Some(p.number()?);
                    "min_time"
                }
                "par_time" => {
                    f.par_time = Some(p.number()?);
                    "par_time"
                }
                "instruction" => {
                    f.instruction = Some(p.string()?);
                    "instruction"
                }
                "hint" => {
                    f.hint = Some(p.string()?);
                    "hint"
                }
                "tool" => {
                    let (v, vs) = p.ident()?;
                    p.spans.record(Location::reference(item.clone(), "tool", v.clone()), vs);
                    f.tool = Some(v);
                    "tool"
                }
                "contact_time" => {
                    f.contact_time = Some(p.number()?);
                    "contact_time"
                }
                "action_id" => {
                    f.action_id = Some(p.ident()?.0);
                    "action_id"
                }
                _ => unreachable!(),
            };
            p.spans.record(Location::field(item.clone(), field_name), span);
            p.expect(Tok::Semi)?;
            Ok(())
        });

        let mut missing = |what: &str| {
            if ok {
                self.diags.push(
                    Diagnostic::new(Code::MissingField, format!("step `{id}` is missing `{what}`")).with_span(id_span),
                );
            }
        };
        let kind = match kind.as_str() {
            "placing" => {
                if f.part.is_none() {
                    missing("part");
                }
                if f.target_anchor.is_none() {
                    missing("target = anchor(part, name)");
                }
                if f.tol.is_none() {
                    missing("tol");
                }
                let (pos_tol, rot_tol) = f.tol.unwrap_or((1.0, 1.0));
                StepKind::Placing {
                    part: f.part.unwrap_or_default(),
                    target: f.target_anchor.unwrap_or_else(|| AnchorRef::new("", "")),
                    pos_tol,
                    rot_tol,
                    dwell: f.dwell.unwrap_or(DEFAULT_DWELL),
                }
            }
            "action" => {
                if f.action_id.is_none() {
                    missing("action_id");
                }
                StepKind::Action {
                    action_id: f.action_id.unwrap_or_else(|| "_".into()),
                }
            }
            _ => {
                if f.tool.is_none() {
                    missing("tool");
                }
                if f.target_part.is_none() {
                    missing("target");
                }
                if f.contact_time.is_none() {
                    missing("contact_time");
                }
                StepKind::ToolUse {
                    tool: f.tool.unwrap_or_default(),
                    target: f.target_part.unwrap_or_default(),
                    contact_time: f.contact_time.unwrap_or(1.0),
                }
            }
        };
        if f.par_time.is_none() {
            missing("par_time");
        }
        s.steps.push(StepDef {
            id,
            kind,
            requires: f.requires.unwrap_or(ConditionExpr::Start),
            min_time: f.min_time.unwrap_or(0.0),
            par_time: f.par_time.unwrap_or(1.0),
            instruction: f.instruction.unwrap_or_default(),
            hint: f.hint.unwrap_or_default(),
        });
        Ok(())
    }

    fn cond(&mut self, item: &Item, depth: usize) -> PResult<ConditionExpr> {
        if depth > MAX_COND_DEPTH {
            self.err("condition nested too deeply");
            return Err(());
        }
        let mut terms = vec![self.and_expr(item, depth)?];
        while *self.peek() == Tok::OrOr {
            self.advance();
            terms.push(self.and_expr(item, depth)?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            ConditionExpr::Or(terms)
        })
    }

    fn and_expr(&mut self, item: &Item, depth: usize) -> PResult<ConditionExpr> {
        let mut terms = vec![self.unary(item, depth)?];
        while *self.peek() == Tok::AndAnd {
            self.advance();
            terms.push(self.unary(item, depth)?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            ConditionExpr::And(terms)
        })
    }

    fn unary(&mut self, item: &Item, depth: usize) -> PResult<ConditionExpr> {
        if depth > MAX_COND_DEPTH {
            self.err("condition nested too deeply");
            return Err(());
        }
        let start = self.span();
        match self.peek().clone() {
            Tok::Bang => {
                self.advance();
                Ok(ConditionExpr::not(self.unary(item, depth + 1)?))
            }
            Tok::LParen => {
                self.advance();
                let e = self.cond(item, depth + 1)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(kw) if kw == "start" => {
                self.advance();
                Ok(ConditionExpr::Start)
            }
            Tok::Ident(kw) if kw == "done" || kw == "flag" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let (name, _) = self.ident()?;
                let close = self.expect(Tok::RParen)?;
                let span = SourceSpan {
                    length: close.offset + close.length - start.offset,
                    ..start
                };
                self.spans
                    .record(Location::reference(item.clone(), "requires", name.clone()), span);
                Ok(if kw == "done" {
                    ConditionExpr::Done(name)
                } else {
                    ConditionExpr::Flag(name)
                })
            }
            _ => {
                self.expected("a condition (start, done(..), flag(..), !, or parentheses)")
            }
        }
    }

    fn event(&mut self, s: &mut Scenario) -> PResult<()> {
        self.advance();
        let (id, id_span) = match self.ident() {
            Ok(x) => x,
            Err(()) => {
                self.recover_item();
                return Err(());
            }
        };
        let item = Item::Event(id.clone());
        self.spans.record(Location::item(item.clone()), id_span);
        if self.expect(Tok::LBrace).is_err() {
            self.recover_item();
            return Err(());
        }
        let body = (|| {
            let wspan = self.keyword("when")?;
            self.spans.record(Location::field(item.clone(), "when"), wspan);
            self.expect(Tok::Eq)?;
            let trigger = self.trigger(&item)?;
            self.expect(Tok::Semi)?;
            let mut actions = Vec::new();
            if self.is_kw("do") {
                let dspan = self.advance().span;
                self.spans.record(Location::field(item.clone(), "do"), dspan);
                self.expect(Tok::Eq)?;
                actions.push(self.action(&item)?);
                while *self.peek() == Tok::Comma {
                    self.advance();
                    actions.push(self.action(&item)?);
                }
                self.expect(Tok::Semi)?;
            }
            self.expect(Tok::RBrace)?;
            Ok((trigger, actions))
        })();
        match body {
            Ok((trigger, actions)) => {
                s.events.push(EventDef { id, trigger, actions });
                Ok(())
            }
            Err(()) => {
                self.recover_block();
                Err(())
            }
        }
    }

    fn trigger(&mut self, item: &Item) -> PResult<Trigger> {
        let (kind, span) = self.ident()?;
        self.expect(Tok::LParen)?;
        let t = match kind.as_str() {
            "completed" | "started" => {
                let (step, _) = self.ident()?;
                self.spans.record(Location::reference(item.clone(), "when", step.clone()), span);
                if kind == "completed" {
                    Trigger::Completed { step }
                } else {
                    Trigger::Started { step }
                }
            }
            "entered" => {
                let (part, _) = self.ident()?;
                self.expect(Tok::Comma)?;
                let (region, _) = self.ident()?;
                self.spans.record(Location::reference(item.clone(), "when", part.clone()), span);
                self.spans.record(Location::reference(item.clone(), "when", region.clone()), span);
                Trigger::Entered { part, region }
            }
            "flag" => {
                let (flag, _) = self.ident()?;
                self.spans.record(Location::reference(item.clone(), "when", flag.clone()), span);
                Trigger::FlagSet { flag }
            }
            "time" => Trigger::TimeElapsed {
                seconds: self.number()?,
            },
            other => {
                self.diags.push(
                    Diagnostic::new(Code::Syntax, format!("unknown trigger `{other}`")).with_span(span),
                );
                return Err(());
            }
        };
        self.expect(Tok::RParen)?;
        Ok(t)
    }

    fn action(&mut self, item: &Item) -> PResult<EventAction> {
        let (kind, span) = self.ident()?;
        self.expect(Tok::LParen)?;
        let reference = |p: &mut Self, name: &str| {
            p.spans.record(Location::reference(item.clone(), "do", name.to_string()), span);
        };
        let a = match kind.as_str() {
            "weld" => {
                let (part, _) = self.ident()?;
                self.expect(Tok::Comma)?;
                let (target, _) = self.ident()?;
                self.expect(Tok::Dot)?;
                let (anchor, _) = self.ident()?;
                reference(self, &part);
                reference(self, &target);
                reference(self, &format!("{target}.{anchor}"));
                EventAction::Weld {
                    part,
                    target: AnchorRef { part: target, anchor },
                }
            }
            "unweld" | "activate" | "deactivate" | "set_flag" | "particles" => {
                let (name, _) = self.ident()?;
                reference(self, &name);
                match kind.as_str() {
                    "unweld" => EventAction::Unweld { part: name },
                    "activate" => EventAction::Activate { entity: name },
                    "deactivate" => EventAction::Deactivate { entity: name },
                    "set_flag" => EventAction::SetFlag { flag: name },
                    _ => EventAction::Particles { region: name },
                }
            }
            other => {
                self.diags.push(
                    Diagnostic::new(Code::Syntax, format!("unknown event action `{other}`")).with_span(span),
                );
                return Err(());
            }
        };
        self.expect(Tok::RParen)?;
        Ok(a)
    }

    fn region(&mut self, s: &mut Scenario) -> PResult<()> {
        self.advance();
        let r = (|| {
            let (id, span) = self.ident()?;
            let item = Item::Region(id.clone());
            self.spans.record(Location::item(item.clone()), span);
            self.expect(Tok::Eq)?;
            self.keyword("sphere")?;
            self.expect(Tok::LParen)?;
            let center = self.vec3()?;
            self.expect(Tok::Comma)?;
            let radius = self.number()?;
            self.expect(Tok::RParen)?;
            let mut parent = None;
            if self.is_kw("on") {
                let on = self.advance().span;
                let (pid, _) = self.ident()?;
                self.spans.record(Location::reference(item, "on", pid.clone()), on);
                parent = Some(pid);
            }
            self.expect(Tok::Semi)?;
            Ok(Region { id, center, radius, parent })
        })();
        match r {
            Ok(region) => {
                s.regions.push(region);
                Ok(())
            }
            Err(()) => {
                self.recover_item();
                Err(())
            }
        }
    }

    fn difficulty(&mut self, s: &mut Scenario) -> PResult<()> {
        self.advance();
        let (id, id_span) = match self.ident() {
            Ok(x) => x,
            Err(()) => {
                self.recover_item();
                return Err(());
            }
        };
        let item = Item::Difficulty(id.clone());
        self.spans.record(Location::item(item.clone()), id_span);
        let mut d = DifficultyLevel::injected_default();
        d.id = id;
        let mut seen = Vec::new();
        self.block(|p, name, span| {
            p.dup(&mut seen, &name, span);
            p.expect(Tok::Eq)?;
            match name.as_str() {
                "ghost" => d.ghost_enabled = p.boolean()?,
                "trajectory" => d.trajectory_enabled = p.boolean()?,
                "instructions" => d.instructions_enabled = p.boolean()?,
                "hint_penalty" => {
                    d.hint_penalty = p.number()?;
                    p.spans.record(Location::field(item.clone(), "hint_penalty"), span);
                }
                "par_time_scale" => {
                    d.par_time_scale = p.number()?;
                    p.spans.record(Location::field(item.clone(), "par_time_scale"), span);
                }
                other => {
                    p.err(format!("unknown difficulty field `{other}`"));
                    return Err(());
                }
            }
            p.expect(Tok::Semi)?;
            Ok(())
        });
        s.difficulties.push(d);
        Ok(())
    }

    fn material(&mut self, s: &mut Scenario) -> PResult<()> {
        let start = self.advance().span;
        let r = (|| {
            let (a, _) = self.ident()?;
            let (b, _) = self.ident()?;
            self.expect(Tok::Eq)?;
            let friction = self.number()?;
            self.expect(Tok::Semi)?;
            Ok(MaterialPair { a, b, friction })
        })();
        match r {
            Ok(m) => {
                self.spans
                    .record(Location::item(Item::Material(m.a.clone(), m.b.clone())), start);
                s.materials.push(m);
                Ok(())
            }
            Err(()) => {
                self.recover_item();
                Err(())
            }
        }
    }
}
