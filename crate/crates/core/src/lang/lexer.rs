use crate::diag::{Code, Diagnostic, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Dot,
    Eq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
            diagnostics: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, m: (usize, usize, usize)) -> SourceSpan {
        SourceSpan {
            offset: m.0,
            line: m.1,
            column: m.2,
            length: self.pos - m.0,
        }
    }

    fn error(&mut self, m: (usize, usize, usize), msg: impl Into<String>) {
        let span = self.span_from(m);
        self.diagnostics.push(Diagnostic::new(Code::Lex, msg).with_span(span));
    }

    fn skip_trivia(&mut self) {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let m = self.mark();
                    self.bump();
                    self.bump();
                    let mut closed = false;
                    while let Some(c) = self.bump() {
                        if c == '*' && self.peek() == Some('/') {
                            self.bump();
                            closed = true;
                            break;
                        }
                    }
                    if !closed {
                        self.error(m, "unterminated block comment");
                    }
                }
                _ => return,
            }
        }
    }

    pub fn tokenize(mut self) -> (Vec<Token>, Vec<Diagnostic>) {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let m = self.mark();
            let Some(c) = self.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    span: self.span_from(m),
                });
                break;
            };
            let tok = match c {
                '{' => self.single(Tok::LBrace),
                '}' => self.single(Tok::RBrace),
                '(' => self.single(Tok::LParen),
                ')' => self.single(Tok::RParen),
                ';' => self.single(Tok::Semi),
                ':' => self.single(Tok::Colon),
                ',' => self.single(Tok::Comma),
                '.' => self.single(Tok::Dot),
                '=' => self.single(Tok::Eq),
                '!' => self.single(Tok::Bang),
                '&' | '|' => {
                    self.bump();
                    if self.peek() == Some(c) {
                        self.bump();
                        Some(if c == '&' { Tok::AndAnd } else { Tok::OrOr })
                    } else {
                        self.error(m, format!("expected `{c}{c}`"));
                        None
                    }
                }
                '"' => self.string(m),
                '-' | '0'..='9' => self.number(m),
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                        self.bump();
                    }
                    Some(Tok::Ident(self.src[m.0..self.pos].to_string()))
                }
                other => {
                    self.bump();
                    self.error(m, format!("unexpected character `{}`", other.escape_debug()));
                    None
                }
            };
            if let Some(tok) = tok {
                out.push(Token {
                    tok,
                    span: self.span_from(m),
                });
            }
        }
        (out, self.diagnostics)
    }

    fn single(&mut self, t: Tok) -> Option<Tok> {
        self.bump();
        Some(t)
    }

    fn string(&mut self, m: (usize, usize, usize)) -> Option<Tok> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => {
                    self.error(m, "unterminated string");
                    return None;
                }
                Some('"') => return Some(Tok::Str(s)),
                Some('\\') => match self.bump() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some(other) => {
                        self.error(m, format!("invalid escape `\\{}`", other.escape_debug()));
                        s.push(other);
                    }
                    None => {
                        self.error(m, "unterminated string");
                        return None;
                    }
                },
                Some(c) => s.push(c),
            }
        }
    }

    // -?digits(.digits)?([eE][+-]?digits)?
    fn number(&mut self, m: (usize, usize, usize)) -> Option<Tok> {
        if self.peek() == Some('-') {
            self.bump();
        }
        let digits = |lx: &mut Self| {
            let start = lx.pos;
            while matches!(lx.peek(), Some('0'..='9')) {
                lx.bump();
            }
            lx.pos > start
        };
        if !digits(self) {
            self.error(m, "expected digits");
            return None;
        }
        if self.peek() == Some('.') && matches!(self.peek2(), Some('0'..='9')) {
            self.bump();
            digits(self);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let rest = &self.src[self.pos + 1..];
            let mut chars = rest.chars();
            let ok = match chars.next() {
                Some('0'..='9') => true,
                Some('+' | '-') => matches!(chars.next(), Some('0'..='9')),
                _ => false,
            };
            if ok {
                self.bump();
                if matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
                digits(self);
            }
        }
        let text = &self.src[m.0..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(Tok::Number(v)),
            _ => {
                self.error(m, format!("number `{text}` out of range"));
                None
            }
        }
    }
}
