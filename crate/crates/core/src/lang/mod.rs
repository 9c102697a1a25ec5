//! The `.itx` scenario language.
//!
//! ```text
//! scenario "demo" {
//!   part lens { shape = sphere(0.02); mass = 0.05; pose = (0, 0, 1) rpy(0, 0, 0); grabbable = true; }
//!   step place : placing { part = lens; target = anchor(head, seat); tol = pos 0.005 rot 5deg; par_time = 20; }
//! }
//! ```

mod dot;
mod format;
mod lexer;
mod lint;
mod parser;

pub use dot::export_graph_dot;
pub use format::{format_canonical, format_number};
pub use lexer::{Lexer, Tok, Token};
pub use lint::{lint, lint_source};
pub use parser::{parse, ParseResult, SpanTable};
