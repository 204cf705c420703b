//! Uncertainty parameters and the space-time mesh.
//!
//! The mesh always follows the parabolic rule `h = sigma_hi * sqrt(dt) * ratio`,
//! which pins the CFL number at exactly `1 / ratio^2`: `ratio >= 1` gives the
//! non-negativity bound `cfl <= 1`, and `ratio >= sqrt(2)` gives the stricter
//! `cfl <= 1/2` used by the flux-scheme monotonicity arguments.

use crate::error::{Error, Result};

/// Volatility-uncertainty interval `[sigma_lo^2, sigma_hi^2]` and horizon `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GParams {
    /// Lower variance bound (units of x^2 per unit time).
    pub sigma_lo_sq: f64,
    /// Upper variance bound.
    pub sigma_hi_sq: f64,
    /// Terminal time `T`.
    pub horizon: f64,
}

impl GParams {
    pub fn new(sigma_lo_sq: f64, sigma_hi_sq: f64, horizon: f64) -> Result<Self> {
        if !(sigma_lo_sq.is_finite() && sigma_hi_sq.is_finite() && horizon.is_finite()) {
            return Err(Error::InvalidParam("parameters must be finite".into()));
        }
        if sigma_lo_sq <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "sigma_lo_sq must be positive, got {sigma_lo_sq}"
            )));
        }
        if sigma_hi_sq < sigma_lo_sq {
            return Err(Error::InvalidParam(format!(
                "need sigma_lo_sq <= sigma_hi_sq, got [{sigma_lo_sq}, {sigma_hi_sq}]"
            )));
        }
        if horizon <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            sigma_lo_sq,
            sigma_hi_sq,
            horizon,
        })
    }
}

/// Uniform space-time mesh with `n_steps` levels of spacing `dt` and
/// spatial step `h`; node `(n, i)` sits at `(n * dt, i * h)`.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub params: GParams,
    pub n_steps: usize,
    pub dt: f64,
    pub h: f64,
    pub ratio: f64,
    /// CFL number `sigma_hi_sq * dt / h^2 = 1 / ratio^2` (exact by the mesh rule).
    pub cfl: f64,
    /// Whether the stricter bound `cfl <= 1/2` was requested.
    pub strict: bool,
}

/// Builds the mesh from the parabolic rule and rejects it when the active
/// CFL bound fails (`cfl <= 1`, or `cfl <= 1/2` with `strict`).
pub fn build_grid(params: GParams, n_steps: usize, ratio: f64, strict: bool) -> Result<Grid> {
    // Re-validate: Grid is constructible from any GParams value.
    let params = GParams::new(params.sigma_lo_sq, params.sigma_hi_sq, params.horizon)?;
    if n_steps == 0 {
        return Err(Error::InvalidParam("n_steps must be at least 1".into()));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "ratio must be positive, got {ratio}"
        )));
    }
    let dt = params.horizon / n_steps as f64;
    let h = (params.sigma_hi_sq * dt).sqrt() * ratio;
    let cfl = 1.0 / (ratio * ratio);
    let bound = if strict { 0.5 } else { 1.0 };
    if cfl > bound {
        return Err(Error::CflViolation { cfl, bound });
    }
    Ok(Grid {
        params,
        n_steps,
        dt,
        h,
        ratio,
        cfl,
        strict,
    })
}

impl Grid {
    /// Spatial coordinate of node index `i`.
    #[inline(always)]
    pub fn x(&self, i: i64) -> f64 {
        i as f64 * self.h
    }

    /// Time coordinate of level `n`.
    #[inline(always)]
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// Per-step jump probability `q = sigma_sq * dt / (2 h^2)` for one side
    /// of the trinomial transition row.
    #[inline(always)]
    pub fn jump_prob(&self, sigma_sq: f64) -> f64 {
        sigma_sq * self.dt / (2.0 * self.h * self.h)
    }

    pub fn cfl_bound(&self) -> f64 {
        if self.strict {
            0.5
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_params() -> GParams {
        GParams::new(0.04, 1.0, 1.0).unwrap()
    }

    #[test]
    fn mesh_rule_matches_reported_spacings() {
        // h = sigma_hi * sqrt(T/N) * ratio for the reference configuration.
        let g = build_grid(paper_params(), 100, 1.1, false).unwrap();
        assert!((g.h - 0.110000).abs() < 1e-6);
        assert!((g.cfl - 0.8264).abs() < 5e-5);
        let g = build_grid(paper_params(), 200, 1.1, false).unwrap();
        assert!((g.h - 0.077782).abs() < 1e-6);
        let g = build_grid(paper_params(), 400, 1.1, false).unwrap();
        assert!((g.h - 0.055000).abs() < 1e-6);
        let g = build_grid(paper_params(), 800, 1.1, false).unwrap();
        assert!((g.h - 0.038891).abs() < 1e-6);
    }

    #[test]
    fn cfl_is_exactly_inverse_ratio_squared() {
        for &(n, ratio) in &[(7usize, 1.0f64), (100, 1.1), (33, 1.75), (800, 2.0)] {
            let g = build_grid(paper_params(), n, ratio, false).unwrap();
            assert_eq!(g.cfl, 1.0 / (ratio * ratio));
            // The stored value agrees with its definition up to roundoff.
            let direct = g.params.sigma_hi_sq * g.dt / (g.h * g.h);
            assert!((g.cfl - direct).abs() <= 1e-14 * direct);
        }
    }

    #[test]
    fn subunit_ratio_violates_cfl() {
        let err = build_grid(paper_params(), 100, 0.9, false).unwrap_err();
        match err {
            Error::CflViolation { cfl, bound } => {
                assert!((cfl - 1.0 / 0.81).abs() < 1e-12);
                assert_eq!(bound, 1.0);
            }
            other => panic!("expected CflViolation, got {other:?}"),
        }
        // Error text is what the CLI surfaces on exit code 2.
        let msg = build_grid(paper_params(), 100, 0.9, false)
            .unwrap_err()
            .to_string();
        assert_eq!(msg, "CFL violated: 1.235 > 1");
    }

    #[test]
    fn strict_mode_needs_sqrt2_ratio() {
        assert!(build_grid(paper_params(), 100, 1.1, true).is_err());
        assert!(build_grid(paper_params(), 100, std::f64::consts::SQRT_2, true).is_ok());
        assert!(build_grid(paper_params(), 100, 1.5, true).is_ok());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!(
            GParams::new(0.0, 1.0, 1.0),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            GParams::new(2.0, 1.0, 1.0),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            GParams::new(0.04, 1.0, 0.0),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            build_grid(paper_params(), 0, 1.1, false),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            build_grid(paper_params(), 10, -1.0, false),
            Err(Error::InvalidParam(_))
        ));
    }
}
