//! Recursive-descent parser for measurement expressions.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' int)?
//! atom   := number | 'x' | fn '(' expr ')' | '(' expr ')'
//! fn     := sin | cos | exp
//! ```
//!
//! `^` binds tighter than a leading minus, so `-x^2` is `-(x^2)`; exponents
//! are integer literals. Errors carry the byte offset of the offending token
//! and the set of tokens that would have been accepted there.

use super::ast::ExprAst;
use crate::error::{Error, Result};

const ATOM_TOKENS: [&str; 7] = ["number", "`x`", "`sin(`", "`cos(`", "`exp(`", "`(`", "`-`"];

pub(crate) fn parse_expr(text: &str) -> Result<ExprAst> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(Error::Parse {
            offset: p.pos,
            expected: vec!["`+`", "`-`", "`*`", "`/`", "end of input"],
        });
    }
    Ok(ast)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut node = self.term()?;
        loop {
            if self.eat(b'+') {
                node = ExprAst::Add(Box::new(node), Box::new(self.term()?));
            } else if self.eat(b'-') {
                node = ExprAst::Sub(Box::new(node), Box::new(self.term()?));
            } else {
                return Ok(node);
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut node = self.factor()?;
        loop {
            if self.eat(b'*') {
                node = ExprAst::Mul(Box::new(node), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                node = ExprAst::Div(Box::new(node), Box::new(self.factor()?));
            } else {
                return Ok(node);
            }
        }
    }

    fn factor(&mut self) -> Result<ExprAst> {
        if self.eat(b'-') {
            return Ok(ExprAst::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exponent = self.int_literal()?;
            return Ok(ExprAst::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst> {
        let c = self.peek().ok_or(Error::Parse {
            offset: self.pos,
            expected: ATOM_TOKENS.to_vec(),
        })?;
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return Err(Error::Parse {
                    offset: self.pos,
                    expected: vec!["`)`"],
                });
            }
            return Ok(inner);
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let ident = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
            if ident == "x" {
                return Ok(ExprAst::Var);
            }
            let func: fn(Box<ExprAst>) -> ExprAst = match ident {
                "sin" => ExprAst::Sin,
                "cos" => ExprAst::Cos,
                "exp" => ExprAst::Exp,
                _ => {
                    return Err(Error::Parse {
                        offset: start,
                        expected: vec!["`x`", "`sin`", "`cos`", "`exp`"],
                    })
                }
            };
            if !self.eat(b'(') {
                return Err(Error::Parse {
                    offset: self.pos,
                    expected: vec!["`(`"],
                });
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(Error::Parse {
                    offset: self.pos,
                    expected: vec!["`)`"],
                });
            }
            return Ok(func(Box::new(arg)));
        }
        Err(Error::Parse {
            offset: self.pos,
            expected: ATOM_TOKENS.to_vec(),
        })
    }

    fn number(&mut self) -> Result<ExprAst> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.bytes.len() && (self.bytes[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // not an exponent suffix; leave `e...` for the caller
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>().map(ExprAst::Const).map_err(|_| Error::Parse {
            offset: start,
            expected: vec!["number"],
        })
    }

    fn int_literal(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'-' {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(Error::Parse {
                offset: self.pos,
                expected: vec!["integer exponent"],
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<i32>()
            .map_err(|_| Error::Parse {
                offset: start,
                expected: vec!["integer exponent"],
            })
    }
}
