//! Recursive-descent parser. Precedence from loosest to tightest: comparisons,
//! `+`/`-`, `*`/`/`, unary `-`. Every binary level is left-associative.

use super::lexer::{tokenize_line, Token};
use super::PotError;

/// Nesting beyond this is rejected rather than risking the native stack.
const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Text(String),
    Bool(bool),
    Name(String),
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Assign { line: usize, name: String, value: Expr },
    Comment(String),
    Blank,
}

/// Straight-line program: assignments, comments and blank lines in source
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct PotProgram {
    pub statements: Vec<Statement>,
}

impl PotProgram {
    pub fn assignments(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Assign { name, value, .. } => Some((name.as_str(), value)),
            _ => None,
        })
    }
}

pub fn parse_program(source: &str) -> Result<PotProgram, PotError> {
    let mut statements = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            statements.push(Statement::Blank);
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            statements.push(Statement::Comment(comment.to_owned()));
            continue;
        }
        let tokens = tokenize_line(raw, line)?;
        if tokens.is_empty() {
            statements.push(Statement::Blank);
            continue;
        }
        statements.push(parse_assignment(tokens, line)?);
    }
    Ok(PotProgram { statements })
}

fn parse_assignment(tokens: Vec<Token>, line: usize) -> Result<Statement, PotError> {
    let mut p = Parser { tokens, pos: 0, line, depth: 0 };
    let name = match p.next() {
        Some(Token::Name(n)) => n,
        Some(t) => return Err(p.error(format!("expected assignment, found {}", t.describe()))),
        None => return Err(p.error("expected assignment".into())),
    };
    match p.next() {
        Some(Token::Assign) => {}
        Some(t) => return Err(p.error(format!("expected `=` after `{name}`, found {}", t.describe()))),
        None => return Err(p.error(format!("expected `=` after `{name}`"))),
    }
    let value = p.comparison()?;
    if let Some(t) = p.peek() {
        return Err(p.error(format!("unexpected {}", t.describe())));
    }
    Ok(Statement::Assign { line, name, value })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn error(&self, message: String) -> PotError {
        PotError::Syntax { line: self.line, message }
    }

    fn enter(&mut self) -> Result<(), PotError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply".into()));
        }
        Ok(())
    }

    fn comparison(&mut self) -> Result<Expr, PotError> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(Token::Lt) => BinaryOp::Lt,
                Some(Token::Gt) => BinaryOp::Gt,
                Some(Token::Le) => BinaryOp::Le,
                Some(Token::Ge) => BinaryOp::Ge,
                Some(Token::EqEq) => BinaryOp::Eq,
                Some(Token::NotEq) => BinaryOp::Ne,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn additive(&mut self) -> Result<Expr, PotError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinaryOp::Add,
                Some(Token::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, PotError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinaryOp::Mul,
                Some(Token::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, PotError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, PotError> {
        match self.next() {
            Some(Token::Number(v)) => Ok(Expr::Number(v)),
            Some(Token::Text(s)) => Ok(Expr::Text(s)),
            Some(Token::True) => Ok(Expr::Bool(true)),
            Some(Token::False) => Ok(Expr::Bool(false)),
            Some(Token::Name(n)) => {
                if self.peek() == Some(&Token::LParen) {
                    return Err(self.error(format!("call to `{n}` is not supported")));
                }
                Ok(Expr::Name(n))
            }
            Some(Token::LParen) => {
                self.enter()?;
                let inner = self.comparison()?;
                self.depth -= 1;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    Some(t) => Err(self.error(format!("expected `)`, found {}", t.describe()))),
                    None => Err(self.error("expected `)`".into())),
                }
            }
            Some(t) => Err(self.error(format!("unexpected {}", t.describe()))),
            None => Err(self.error("unexpected end of line".into())),
        }
    }
}
