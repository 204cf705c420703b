//! Expression trees in one variable and their exact second derivatives.
//!
//! Second derivatives come from order-2 forward-mode differentiation (a
//! truncated Taylor jet per node), never from finite differences: the flux
//! scheme's terminal condition is sign-sensitive near `phi'' = 0` and cannot
//! tolerate differencing noise.

/// Expression tree node. `Pow` exponents are integer constants, which keeps
/// parsed expressions twice differentiable away from poles.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprAst {
    Const(f64),
    /// The variable `x`.
    Var,
    Neg(Box<ExprAst>),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, i32),
    Sin(Box<ExprAst>),
    Cos(Box<ExprAst>),
    Exp(Box<ExprAst>),
}

/// Order-2 jet `(f, f', f'')` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    fn constant(c: f64) -> Self {
        Jet2 { v: c, d1: 0.0, d2: 0.0 }
    }

    fn variable(x: f64) -> Self {
        Jet2 { v: x, d1: 1.0, d2: 0.0 }
    }

    fn neg(self) -> Self {
        Jet2 { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }

    fn add(self, o: Self) -> Self {
        Jet2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }

    fn sub(self, o: Self) -> Self {
        Jet2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }

    fn mul(self, o: Self) -> Self {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }

    fn div(self, o: Self) -> Self {
        let v = self.v / o.v;
        let d1 = (self.d1 - v * o.d1) / o.v;
        let d2 = (self.d2 - 2.0 * d1 * o.d1 - v * o.d2) / o.v;
        Jet2 { v, d1, d2 }
    }

    fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Jet2::constant(1.0);
        }
        let kf = k as f64;
        let pm2 = self.v.powi(k - 2);
        let pm1 = pm2 * self.v;
        Jet2 {
            v: pm1 * self.v,
            d1: kf * pm1 * self.d1,
            d2: kf * (kf - 1.0) * pm2 * self.d1 * self.d1 + kf * pm1 * self.d2,
        }
    }

    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        Jet2 {
            v: s,
            d1: c * self.d1,
            d2: -s * self.d1 * self.d1 + c * self.d2,
        }
    }

    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        Jet2 {
            v: c,
            d1: -s * self.d1,
            d2: -c * self.d1 * self.d1 - s * self.d2,
        }
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        Jet2 {
            v: e,
            d1: e * self.d1,
            d2: e * (self.d1 * self.d1 + self.d2),
        }
    }
}

impl ExprAst {
    /// Plain value evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExprAst::Const(c) => *c,
            ExprAst::Var => x,
            ExprAst::Neg(a) => -a.eval(x),
            ExprAst::Add(a, b) => a.eval(x) + b.eval(x),
            ExprAst::Sub(a, b) => a.eval(x) - b.eval(x),
            ExprAst::Mul(a, b) => a.eval(x) * b.eval(x),
            ExprAst::Div(a, b) => a.eval(x) / b.eval(x),
            ExprAst::Pow(a, k) => {
                if *k == 0 {
                    1.0
                } else {
                    a.eval(x).powi(*k)
                }
            }
            ExprAst::Sin(a) => a.eval(x).sin(),
            ExprAst::Cos(a) => a.eval(x).cos(),
            ExprAst::Exp(a) => a.eval(x).exp(),
        }
    }

    /// Value together with first and second derivative at `x`.
    pub fn eval_jet(&self, x: f64) -> Jet2 {
        match self {
            ExprAst::Const(c) => Jet2::constant(*c),
            ExprAst::Var => Jet2::variable(x),
            ExprAst::Neg(a) => a.eval_jet(x).neg(),
            ExprAst::Add(a, b) => a.eval_jet(x).add(b.eval_jet(x)),
            ExprAst::Sub(a, b) => a.eval_jet(x).sub(b.eval_jet(x)),
            ExprAst::Mul(a, b) => a.eval_jet(x).mul(b.eval_jet(x)),
            ExprAst::Div(a, b) => a.eval_jet(x).div(b.eval_jet(x)),
            ExprAst::Pow(a, k) => a.eval_jet(x).powi(*k),
            ExprAst::Sin(a) => a.eval_jet(x).sin(),
            ExprAst::Cos(a) => a.eval_jet(x).cos(),
            ExprAst::Exp(a) => a.eval_jet(x).exp(),
        }
    }
}
