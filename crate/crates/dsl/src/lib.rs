//! Session language for datasets, views and composition expressions.
//!
//! ```text
//! load flights from "flights.csv" roles {delay: measure}
//! sfo = view(flights, filter: src = 'SFO', group: [date], agg: avg(delay), mark: bar)
//! oak = view(flights, filter: src = 'OAK', group: [date], agg: avg(delay), mark: bar)
//! d = sfo - oak
//! show d
//! ```

pub mod ast;
pub mod error;
pub mod lexer;
pub mod parser;
pub mod render;
pub mod session;

pub use ast::{print_script, Expr, Located, Statement, ViewDef};
pub use error::{DslError, ParseError, Result};
pub use parser::{parse, parse_expr, parse_predicate, parse_scalar};
pub use session::{Outcome, Session};
