//! Lexing, parsing, printing and alpha-equivalence of `.jtx` sources.

mod alpha;
pub mod ast;
mod lexer;
mod parser;
mod printer;

pub use alpha::alpha_equivalent;
pub use ast::*;
pub use parser::parse;
pub use printer::{method_header, print_expr, print_generics, print_program, print_type};
