//! A small arithmetic expression language for dynamic attribute values.
//!
//! Behaviour attributes are usually plain constants, but an attribute element
//! can carry `Kind="Expression"` and hold a formula instead, so its value can
//! be driven by context variables (supplied on the command line or by a
//! scenario file). The grammar is deliberately tiny: numeric literals, named
//! variables, `+ - * /`, unary minus, parentheses and the functions
//! `min(a, b)`, `max(a, b)` and `clamp(x)`.
//!
//! Evaluation happens in two steps: [`Expression::evaluate_raw`] computes the
//! plain arithmetic result, and [`Expression::evaluate`] clamps it into the
//! unit interval, which is what the metric consumes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Binary arithmetic operators, lowest precedence first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// Built-in functions. `min`/`max` take two arguments, `clamp` takes one and
/// restricts it to the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Min,
    Max,
    Clamp,
}

impl Function {
    fn name(self) -> &'static str {
        match self {
            Function::Min => "min",
            Function::Max => "max",
            Function::Clamp => "clamp",
        }
    }

    fn arity(self) -> usize {
        match self {
            Function::Min | Function::Max => 2,
            Function::Clamp => 1,
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Literal(f64),
    Variable(String),
    Negate(Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    Call(Function, Vec<Expression>),
}

impl Expression {
    /// Parse expression text. See the module docs for the grammar.
    pub fn parse(text: &str) -> Result<Expression, ExpressionParseError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expression()?;
        match parser.peek() {
            Some(&(pos, _)) => Err(ExpressionParseError::new(pos, "unexpected trailing input")),
            None => Ok(expr),
        }
    }

    /// Every variable name the expression references.
    pub fn free_variables(&self) -> BTreeSet<&str> {
        let mut vars = BTreeSet::new();
        self.collect_variables(&mut vars);
        vars
    }

    fn collect_variables<'a>(&'a self, vars: &mut BTreeSet<&'a str>) {
        match self {
            Expression::Literal(_) => {}
            Expression::Variable(name) => {
                vars.insert(name.as_str());
            }
            Expression::Negate(inner) => inner.collect_variables(vars),
            Expression::Binary(_, lhs, rhs) => {
                lhs.collect_variables(vars);
                rhs.collect_variables(vars);
            }
            Expression::Call(_, args) => {
                for arg in args {
                    arg.collect_variables(vars);
                }
            }
        }
    }

    /// The raw arithmetic result, before any clamping.
    pub fn evaluate_raw(&self, ctx: &EvaluationContext) -> Result<f64, ExpressionEvalError> {
        let value = match self {
            Expression::Literal(value) => *value,
            Expression::Variable(name) => ctx
                .get(name)
                .ok_or_else(|| ExpressionEvalError::UnboundVariable(name.clone()))?,
            Expression::Negate(inner) => -inner.evaluate_raw(ctx)?,
            Expression::Binary(op, lhs, rhs) => {
                let lhs = lhs.evaluate_raw(ctx)?;
                let rhs = rhs.evaluate_raw(ctx)?;
                match op {
                    BinaryOp::Add => lhs + rhs,
                    BinaryOp::Sub => lhs - rhs,
                    BinaryOp::Mul => lhs * rhs,
                    BinaryOp::Div => {
                        if rhs == 0.0 {
                            return Err(ExpressionEvalError::DivisionByZero);
                        }
                        lhs / rhs
                    }
                }
            }
            Expression::Call(function, args) => {
                let mut values = Vec::with_capacity(args.len());
                for arg in args {
                    values.push(arg.evaluate_raw(ctx)?);
                }
                match function {
                    Function::Min => values[0].min(values[1]),
                    Function::Max => values[0].max(values[1]),
                    Function::Clamp => values[0].clamp(0.0, 1.0),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(ExpressionEvalError::NonFinite)
        }
    }

    /// Evaluate and clamp the result into `[0, 1]`.
    pub fn evaluate(&self, ctx: &EvaluationContext) -> Result<f64, ExpressionEvalError> {
        Ok(self.evaluate_raw(ctx)?.clamp(0.0, 1.0))
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min_precedence: u8) -> fmt::Result {
        match self {
            Expression::Literal(value) => write!(f, "{value}"),
            Expression::Variable(name) => write!(f, "{name}"),
            Expression::Negate(inner) => {
                if min_precedence > 3 {
                    write!(f, "(-")?;
                    inner.write(f, 3)?;
                    write!(f, ")")
                } else {
                    write!(f, "-")?;
                    inner.write(f, 3)
                }
            }
            Expression::Binary(op, lhs, rhs) => {
                let precedence = op.precedence();
                if precedence < min_precedence {
                    write!(f, "(")?;
                }
                lhs.write(f, precedence)?;
                write!(f, " {} ", op.symbol())?;
                // left-associative: the right operand binds tighter
                rhs.write(f, precedence + 1)?;
                if precedence < min_precedence {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expression::Call(function, args) => {
                write!(f, "{}(", function.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    arg.write(f, 0)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Pretty-prints with the fewest parentheses that still reparse to the same
/// tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

/// Variable bindings for expression evaluation. Unbound lookups are an error,
/// never a silent default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationContext {
    bindings: BTreeMap<String, f64>,
}

impl EvaluationContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.bindings.insert(name.into(), value);
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.bindings.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expression syntax error at offset {position}: {message}")]
pub struct ExpressionParseError {
    pub position: usize,
    pub message: String,
}

impl ExpressionParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        Self {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpressionEvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expression produced a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ExpressionParseError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                tokens.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                tokens.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                tokens.push((i, Token::Star));
                i += 1;
            }
            '/' => {
                tokens.push((i, Token::Slash));
                i += 1;
            }
            '(' => {
                tokens.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                tokens.push((i, Token::RParen));
                i += 1;
            }
            ',' => {
                tokens.push((i, Token::Comma));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent suffix, e.g. 1.5e-3
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let literal = &text[start..i];
                let value: f64 = literal.parse().map_err(|_| {
                    ExpressionParseError::new(start, format!("invalid number `{literal}`"))
                })?;
                tokens.push((start, Token::Number(value)));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_alphanumeric() || c == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                tokens.push((start, Token::Ident(text[start..i].to_string())));
            }
            other => {
                return Err(ExpressionParseError::new(
                    i,
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<(usize, Token)> {
        let token = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        token
    }

    fn end_position(&self) -> usize {
        self.tokens.last().map(|(p, _)| *p + 1).unwrap_or(0)
    }

    fn expect(&mut self, expected: &Token, what: &str) -> Result<(), ExpressionParseError> {
        match self.advance() {
            Some((_, token)) if &token == expected => Ok(()),
            Some((pos, _)) => Err(ExpressionParseError::new(pos, format!("expected {what}"))),
            None => Err(ExpressionParseError::new(
                self.end_position(),
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn expression(&mut self) -> Result<Expression, ExpressionParseError> {
        let mut lhs = self.term()?;
        while let Some((_, token)) = self.peek() {
            let op = match token {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression, ExpressionParseError> {
        let mut lhs = self.unary()?;
        while let Some((_, token)) = self.peek() {
            let op = match token {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expression, ExpressionParseError> {
        if matches!(self.peek(), Some((_, Token::Minus))) {
            self.advance();
            let inner = self.unary()?;
            return Ok(Expression::Negate(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expression, ExpressionParseError> {
        match self.advance() {
            Some((_, Token::Number(value))) => Ok(Expression::Literal(value)),
            Some((pos, Token::Ident(name))) => {
                if matches!(self.peek(), Some((_, Token::LParen))) {
                    self.call(pos, &name)
                } else {
                    Ok(Expression::Variable(name))
                }
            }
            Some((_, Token::LParen)) => {
                let inner = self.expression()?;
                self.expect(&Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some((pos, _)) => Err(ExpressionParseError::new(pos, "expected a value")),
            None => Err(ExpressionParseError::new(
                self.end_position(),
                "unexpected end of input",
            )),
        }
    }

    fn call(&mut self, pos: usize, name: &str) -> Result<Expression, ExpressionParseError> {
        let function = match name {
            "min" => Function::Min,
            "max" => Function::Max,
            "clamp" => Function::Clamp,
            other => {
                return Err(ExpressionParseError::new(
                    pos,
                    format!("unknown function `{other}`"),
                ));
            }
        };
        self.expect(&Token::LParen, "`(`")?;
        let mut args = vec![self.expression()?];
        while matches!(self.peek(), Some((_, Token::Comma))) {
            self.advance();
            args.push(self.expression()?);
        }
        self.expect(&Token::RParen, "`)`")?;
        if args.len() != function.arity() {
            return Err(ExpressionParseError::new(
                pos,
                format!(
                    "`{}` takes {} argument(s), found {}",
                    function.name(),
                    function.arity(),
                    args.len()
                ),
            ));
        }
        Ok(Expression::Call(function, args))
    }
}
