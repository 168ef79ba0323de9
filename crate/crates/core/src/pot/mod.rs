//! Sandboxed interpreter for program-of-thought snippets.
//!
//! Model-written code is restricted to straight-line assignments over numbers,
//! strings and booleans. There are no calls, loops, imports or containers, so
//! evaluation cannot reach I/O; the answer is whatever `ans` holds at the end.

mod lexer;
mod parser;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use parser::{parse_program, BinaryOp, Expr, PotProgram, Statement};

/// Upper bound on executed statements.
pub const STATEMENT_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("name `{0}` is not defined")]
    Name(String),
    #[error("{0}")]
    Type(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("`ans` was never assigned")]
    MissingAns,
    #[error("program exceeds {STATEMENT_LIMIT} statements")]
    StatementLimit,
}

impl PotError {
    /// Short error class, as printed by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            PotError::Syntax { .. } => "SyntaxError",
            PotError::Name(_) => "NameError",
            PotError::Type(_) => "TypeError",
            PotError::DivisionByZero => "DivisionByZero",
            PotError::MissingAns => "MissingAns",
            PotError::StatementLimit => "StatementLimit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotValue {
    Number(f64),
    Text(String),
    Boolean(bool),
}

impl PotValue {
    fn kind(&self) -> &'static str {
        match self {
            PotValue::Number(_) => "number",
            PotValue::Text(_) => "str",
            PotValue::Boolean(_) => "bool",
        }
    }
}

impl fmt::Display for PotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

/// Final value of `ans` together with its rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct PotAnswer {
    pub value: PotValue,
    pub rendered: String,
}

/// Numbers keep at most 12 significant digits with no trailing zeros; booleans
/// print as `True`/`False`; text is verbatim.
pub fn render(value: &PotValue) -> String {
    match value {
        PotValue::Number(v) => render_number(*v),
        PotValue::Text(s) => s.clone(),
        PotValue::Boolean(true) => "True".to_owned(),
        PotValue::Boolean(false) => "False".to_owned(),
    }
}

fn render_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("scientific rendering parses");
    if rounded == 0.0 {
        // also folds -0
        return "0".into();
    }
    rounded.to_string()
}

/// Executes the program in a fresh environment and returns `ans`.
pub fn evaluate(program: &PotProgram) -> Result<PotAnswer, PotError> {
    let assignments: Vec<_> = program
        .statements
        .iter()
        .filter_map(|s| match s {
            Statement::Assign { name, value, .. } => Some((name, value)),
            _ => None,
        })
        .collect();
    if assignments.len() > STATEMENT_LIMIT {
        return Err(PotError::StatementLimit);
    }
    let mut env: HashMap<&str, PotValue> = HashMap::new();
    for (name, expr) in assignments {
        let value = eval_expr(expr, &env)?;
        env.insert(name.as_str(), value);
    }
    let value = env.remove("ans").ok_or(PotError::MissingAns)?;
    let rendered = render(&value);
    Ok(PotAnswer { value, rendered })
}

/// Parses and evaluates in one step.
pub fn run(source: &str) -> Result<PotAnswer, PotError> {
    evaluate(&parse_program(source)?)
}

fn eval_expr(expr: &Expr, env: &HashMap<&str, PotValue>) -> Result<PotValue, PotError> {
    match expr {
        Expr::Number(v) => Ok(PotValue::Number(*v)),
        Expr::Text(s) => Ok(PotValue::Text(s.clone())),
        Expr::Bool(b) => Ok(PotValue::Boolean(*b)),
        Expr::Name(n) => env.get(n.as_str()).cloned().ok_or_else(|| PotError::Name(n.clone())),
        Expr::Neg(inner) => match eval_expr(inner, env)? {
            PotValue::Number(v) => Ok(PotValue::Number(-v)),
            other => Err(PotError::Type(format!("bad operand type for unary -: {}", other.kind()))),
        },
        Expr::Binary(op, lhs, rhs) => {
            let a = eval_expr(lhs, env)?;
            let b = eval_expr(rhs, env)?;
            binary(*op, a, b)
        }
    }
}

fn binary(op: BinaryOp, a: PotValue, b: PotValue) -> Result<PotValue, PotError> {
    use BinaryOp::*;
    use PotValue::*;
    let mismatch = |a: &PotValue, b: &PotValue| {
        PotError::Type(format!("unsupported operand types for {op:?}: {} and {}", a.kind(), b.kind()))
    };
    match op {
        Add | Sub | Mul | Div => {
            let (Number(x), Number(y)) = (&a, &b) else {
                return Err(mismatch(&a, &b));
            };
            let (x, y) = (*x, *y);
            let v = match op {
                Add => x + y,
                Sub => x - y,
                Mul => x * y,
                _ => {
                    if y == 0.0 {
                        return Err(PotError::DivisionByZero);
                    }
                    x / y
                }
            };
            Ok(Number(v))
        }
        Lt | Gt | Le | Ge => {
            let ordering = match (&a, &b) {
                (Number(x), Number(y)) => x.partial_cmp(y),
                (Text(x), Text(y)) => Some(x.cmp(y)),
                _ => return Err(mismatch(&a, &b)),
            };
            let result = ordering.is_some_and(|o| match op {
                Lt => o.is_lt(),
                Gt => o.is_gt(),
                Le => o.is_le(),
                _ => o.is_ge(),
            });
            Ok(Boolean(result))
        }
        Eq | Ne => {
            let equal = match (&a, &b) {
                (Number(x), Number(y)) => x == y,
                (Text(x), Text(y)) => x == y,
                (Boolean(x), Boolean(y)) => x == y,
                _ => return Err(mismatch(&a, &b)),
            };
            Ok(Boolean(if op == Eq { equal } else { !equal }))
        }
    }
}
