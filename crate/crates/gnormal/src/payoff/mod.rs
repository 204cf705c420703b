//! Measurement functions `phi` with exact second derivatives.
//!
//! The classical theory wants `phi` bounded and continuous, but the standard
//! test set includes the unbounded `x^2` and `x^3`; evaluation is confined
//! to `|x| <= N h` by the triangular lattice, so boundedness is left to the
//! caller. Built-ins carry closed-form second derivatives; parsed
//! expressions differentiate their syntax tree exactly.

mod ast;
pub(crate) mod parser;

pub use ast::{ExprAst, Jet2};

use crate::error::{Error, Result};

/// Where `phi''` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum D2Source {
    /// Closed form attached to a built-in.
    Analytic,
    /// Order-2 forward-mode differentiation of a parsed expression.
    AutomaticSecondDerivative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Builtin {
    Square,
    NegSquare,
    Sin3x,
    Cube,
}

#[derive(Clone, Debug)]
enum PayoffKind {
    Builtin(Builtin),
    Expr(ExprAst),
}

/// A measurement `phi` with evaluators for `phi(x)` and `phi''(x)`.
#[derive(Clone, Debug)]
pub struct Payoff {
    kind: PayoffKind,
    label: String,
}

impl Payoff {
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            PayoffKind::Builtin(Builtin::Square) => x * x,
            PayoffKind::Builtin(Builtin::NegSquare) => -(x * x),
            PayoffKind::Builtin(Builtin::Sin3x) => (3.0 * x).sin(),
            PayoffKind::Builtin(Builtin::Cube) => x * x * x,
            PayoffKind::Expr(ast) => ast.eval(x),
        }
    }

    pub fn eval_d2(&self, x: f64) -> f64 {
        match &self.kind {
            PayoffKind::Builtin(Builtin::Square) => 2.0,
            PayoffKind::Builtin(Builtin::NegSquare) => -2.0,
            PayoffKind::Builtin(Builtin::Sin3x) => -9.0 * (3.0 * x).sin(),
            PayoffKind::Builtin(Builtin::Cube) => 6.0 * x,
            PayoffKind::Expr(ast) => ast.eval_jet(x).d2,
        }
    }

    pub fn d2_source(&self) -> D2Source {
        match self.kind {
            PayoffKind::Builtin(_) => D2Source::Analytic,
            PayoffKind::Expr(_) => D2Source::AutomaticSecondDerivative,
        }
    }

    /// The builtin name or original expression text.
    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Looks up one of the named measurements: `square` (`x^2`), `neg_square`
/// (`-x^2`), `sin3x` (`sin(3x)`), `cube` (`x^3`).
pub fn builtin_payoff(name: &str) -> Result<Payoff> {
    let builtin = match name {
        "square" => Builtin::Square,
        "neg_square" => Builtin::NegSquare,
        "sin3x" => Builtin::Sin3x,
        "cube" => Builtin::Cube,
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    Ok(Payoff {
        kind: PayoffKind::Builtin(builtin),
        label: name.to_string(),
    })
}

/// Parses an expression in `x` (see the grammar in [`mod@parser`]).
pub fn parse_payoff(text: &str) -> Result<Payoff> {
    let ast = parser::parse_expr(text)?;
    Ok(Payoff {
        kind: PayoffKind::Expr(ast),
        label: text.to_string(),
    })
}

/// Resolves a CLI payoff spec: builtin names first, expressions otherwise.
pub fn payoff_from_spec(spec: &str) -> Result<Payoff> {
    match builtin_payoff(spec) {
        Ok(p) => Ok(p),
        Err(Error::UnknownBuiltin(_)) => parse_payoff(spec),
        Err(e) => Err(e),
    }
}
