//! Arithmetic expressions over one free variable, used for the coefficient
//! functions `K(y)`, `p_j(y)` and the initial profile `phi(y)`.
//!
//! Grammar (no implicit multiplication, `^` right-associative, unary minus
//! binds tighter than `^` so `-y^2 == (-y)^2`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers: the free variable given to [`parse`], the constant `pi`, and
//! the functions `sin`, `cos`, `exp`, `log` (natural), `sqrt`, `abs`,
//! `pow(a, b)`. Numbers are nonnegative decimals with optional exponent;
//! negative values arise through unary minus.

use thiserror::Error;

/// Parse or evaluation failure. Offsets are byte positions into the source.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdent { offset: usize, name: String },
    #[error("`{name}` takes {expected} argument(s), found {found} (at byte {offset})")]
    Arity {
        offset: usize,
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

/// Expression tree. Parsed numbers are nonnegative; `Neg` carries signs.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Num(f64),
    Var(String),
    Pi,
    Neg(Box<ExprAst>),
    Bin(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Vec<ExprAst>),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), ExprError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(self.pos, format!("expected `{}`", ch as char)))
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut node = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            node = ExprAst::Bin(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut node = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            node = ExprAst::Bin(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(ExprAst::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.atom()?;
            return Ok(ExprAst::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let node = self.expr()?;
                self.expect(b')')?;
                Ok(node)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.syntax(self.pos, "expected number, identifier, or `(`")),
        }
    }

    fn number(&mut self) -> Result<ExprAst, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if let Some(&(b'e' | b'E')) = self.src.get(self.pos) {
            let mark = self.pos;
            self.pos += 1;
            if let Some(&(b'+' | b'-')) = self.src.get(self.pos) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `2e` with no digits: the `e` starts something else
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(ExprAst::Num)
            .map_err(|_| self.syntax(start, format!("invalid number `{text}`")))
    }

    fn ident(&mut self) -> Result<ExprAst, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if self.peek() == Some(b'(') {
            let func = Func::lookup(name).ok_or_else(|| ExprError::UnknownIdent {
                offset: start,
                name: name.to_string(),
            })?;
            self.pos += 1;
            let mut args = Vec::new();
            if self.peek() != Some(b')') {
                args.push(self.expr()?);
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    args.push(self.expr()?);
                }
            }
            self.expect(b')')?;
            if args.len() != func.arity() {
                return Err(ExprError::Arity {
                    offset: start,
                    name: func.name(),
                    expected: func.arity(),
                    found: args.len(),
                });
            }
            return Ok(ExprAst::Call(func, args));
        }
        if name == self.var {
            Ok(ExprAst::Var(name.to_string()))
        } else if name == "pi" {
            Ok(ExprAst::Pi)
        } else if Func::lookup(name).is_some() {
            Err(self.syntax(start, format!("function `{name}` requires arguments")))
        } else {
            Err(ExprError::UnknownIdent {
                offset: start,
                name: name.to_string(),
            })
        }
    }
}

/// Parses `source` with `free_var` as the single admissible variable name.
pub fn parse(source: &str, free_var: &str) -> Result<ExprAst, ExprError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        var: free_var,
    };
    let node = p.expr()?;
    if p.peek().is_some() {
        return Err(p.syntax(p.pos, "unexpected trailing input"));
    }
    Ok(node)
}

/// Evaluates `ast` at `value`. Pure: identical inputs give bit-identical
/// results. Any non-finite intermediate is reported as a domain error.
pub fn eval(ast: &ExprAst, value: f64) -> Result<f64, ExprError> {
    let v = match ast {
        ExprAst::Num(x) => *x,
        ExprAst::Var(_) => value,
        ExprAst::Pi => std::f64::consts::PI,
        ExprAst::Neg(inner) => -eval(inner, value)?,
        ExprAst::Bin(op, l, r) => {
            let a = eval(l, value)?;
            let b = eval(r, value)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(ExprError::Domain("division by zero".into()));
                    }
                    a / b
                }
                BinOp::Pow => pow_checked(a, b)?,
            }
        }
        ExprAst::Call(func, args) => {
            let a = eval(&args[0], value)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(ExprError::Domain(format!("log of non-positive value {a}")));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(ExprError::Domain(format!("sqrt of negative value {a}")));
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
                Func::Pow => pow_checked(a, eval(&args[1], value)?)?,
            }
        }
    };
    if !v.is_finite() {
        return Err(ExprError::Domain(format!("non-finite result {v}")));
    }
    Ok(v)
}

fn pow_checked(a: f64, b: f64) -> Result<f64, ExprError> {
    if a == 0.0 && b < 0.0 {
        return Err(ExprError::Domain("zero raised to a negative power".into()));
    }
    let v = a.powf(b);
    if v.is_nan() {
        return Err(ExprError::Domain(format!(
            "negative base {a} with non-integer exponent {b}"
        )));
    }
    Ok(v)
}

// Printing levels mirror the grammar: 0 expr, 1 term, 2 factor, 3 unary, 4 atom.
fn level(ast: &ExprAst) -> u8 {
    match ast {
        ExprAst::Bin(BinOp::Add | BinOp::Sub, ..) => 0,
        ExprAst::Bin(BinOp::Mul | BinOp::Div, ..) => 1,
        ExprAst::Bin(BinOp::Pow, ..) => 2,
        ExprAst::Neg(_) => 3,
        _ => 4,
    }
}

fn fmt_at(ast: &ExprAst, min_level: u8, out: &mut String) {
    if level(ast) < min_level {
        out.push('(');
        fmt_at(ast, 0, out);
        out.push(')');
        return;
    }
    match ast {
        ExprAst::Num(x) => {
            debug_assert!(*x >= 0.0 && x.is_finite());
            out.push_str(&format!("{x}"));
        }
        ExprAst::Var(name) => out.push_str(name),
        ExprAst::Pi => out.push_str("pi"),
        ExprAst::Neg(inner) => {
            out.push('-');
            fmt_at(inner, 4, out);
        }
        ExprAst::Bin(op, l, r) => {
            let (sym, ll, rl) = match op {
                BinOp::Add => (" + ", 0, 1),
                BinOp::Sub => (" - ", 0, 1),
                BinOp::Mul => ("*", 1, 2),
                BinOp::Div => ("/", 1, 2),
                BinOp::Pow => ("^", 3, 2),
            };
            fmt_at(l, ll, out);
            out.push_str(sym);
            fmt_at(r, rl, out);
        }
        ExprAst::Call(func, args) => {
            out.push_str(func.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                fmt_at(a, 0, out);
            }
            out.push(')');
        }
    }
}

/// Renders `ast` with minimal parentheses; `parse(&print(ast), var)` returns
/// a structurally equal tree for any tree produced by [`parse`].
pub fn print(ast: &ExprAst) -> String {
    let mut out = String::new();
    fmt_at(ast, 0, &mut out);
    out
}
