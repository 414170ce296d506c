//! Mittag-Leffler function E_ν(z) = Σ_{n≥0} zⁿ / Γ(νn + 1) on the closed
//! negative real axis, for 0 < ν ≤ 1.
//!
//! Three regimes are used:
//!
//! * the Taylor series, for |z| up to `crossover_radius` and as long as the
//!   largest term stays small enough that cancellation costs at most a few
//!   digits;
//! * the algebraic asymptotic series
//!   E_ν(−x) ≈ Σ_{k≥1} (−1)^{k+1} x^{−k} / Γ(1 − νk), truncated before the
//!   first increasing term, for x ≥ 50·`crossover_radius`;
//! * in between, the spectral representation of the completely monotone
//!   function t ↦ E_ν(−t^ν),
//!
//!   E_ν(−x) = sin(νπ)/(νπ) ∫₀^∞ x·exp(−s^{1/ν}) / (s² + 2xs·cos νπ + x²) ds,
//!
//!   evaluated by adaptive Gauss-Kronrod with breakpoints at the Lorentzian
//!   peak. The integrand is positive, so there is no cancellation.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::quadrature::integrate;
use crate::specfun::gamma::{gamma, rgamma};

/// Evaluation policy for E_ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLefflerParams {
    pub nu: f64,
    pub series_terms_max: usize,
    pub asymptotic_terms: usize,
    pub crossover_radius: f64,
}

/// Which branch produced a value; exposed for seam tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Exact,
    Series,
    Integral,
    Asymptotic,
}

const SERIES_MAX_TERM: f64 = 1.0e3;

impl MittagLefflerParams {
    pub fn new(nu: f64) -> Result<Self> {
        Self {
            nu,
            series_terms_max: 400,
            asymptotic_terms: 80,
            crossover_radius: 5.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return domain(format!("Mittag-Leffler order nu={} outside (0,1]", self.nu));
        }
        if !(self.crossover_radius > 0.0) {
            return domain("crossover_radius must be positive");
        }
        if self.series_terms_max < 10 {
            return domain("series_terms_max must be at least 10");
        }
        if self.asymptotic_terms < 1 {
            return domain("asymptotic_terms must be positive");
        }
        Ok(self)
    }

    /// E_ν(z) for z ≤ 0.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if z.is_nan() {
            return domain("Mittag-Leffler argument is NaN");
        }
        if z > 0.0 {
            return domain(format!(
                "Mittag-Leffler argument z={z} > 0 is outside the supported region"
            ));
        }
        Ok(self.eval_neg(-z))
    }

    /// E_ν(−x) for x ≥ 0. Negative inputs are treated as zero.
    pub fn eval_neg(&self, x: f64) -> f64 {
        self.eval_neg_with_regime(x).0
    }

    pub fn eval_neg_with_regime(&self, x: f64) -> (f64, Regime) {
        if x <= 0.0 {
            return (1.0, Regime::Exact);
        }
        if x.is_infinite() {
            return (0.0, Regime::Exact);
        }
        if self.nu == 1.0 {
            return ((-x).exp(), Regime::Exact);
        }
        if x <= self.crossover_radius {
            if let Some(v) = self.series(x) {
                return (v, Regime::Series);
            }
        }
        if x >= 50.0 * self.crossover_radius {
            if let Some(v) = self.asymptotic(x) {
                return (v, Regime::Asymptotic);
            }
        }
        (self.spectral_integral(x), Regime::Integral)
    }

    /// Taylor series; `None` if cancellation or slow convergence would spoil
    /// the result.
    pub fn series(&self, x: f64) -> Option<f64> {
        let nu = self.nu;
        let ln_x = x.ln();
        let mut sum = 0.0;
        let mut max_term: f64 = 0.0;
        for n in 0..self.series_terms_max {
            let nf = n as f64;
            let ln_mag = nf * ln_x - libm::lgamma(nu * nf + 1.0);
            let mag = ln_mag.exp();
            max_term = max_term.max(mag);
            if max_term > SERIES_MAX_TERM {
                return None;
            }
            let term = if n % 2 == 0 { mag } else { -mag };
            sum += term;
            // Terms eventually decrease monotonically once νn+1 > x^{1/ν}.
            if n > 2 && mag < 1e-18 * sum.abs().max(1e-300) && nu * nf + 1.0 > x.powf(1.0 / nu) {
                return Some(sum);
            }
        }
        None
    }

    /// Asymptotic series truncated before the first increasing term; `None`
    /// if the smallest term is not negligible.
    pub fn asymptotic(&self, x: f64) -> Option<f64> {
        let nu = self.nu;
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        let mut inv_pow = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..=self.asymptotic_terms {
            inv_pow /= x;
            let kf = k as f64;
            let coef = rgamma(1.0 - nu * kf);
            let term = inv_pow * coef;
            let mag = term.abs();
            // Zero coefficients (νk an integer) carry no size information.
            if coef != 0.0 {
                if mag > prev {
                    break;
                }
                prev = mag;
            }
            last = mag;
            sum += if k % 2 == 1 { term } else { -term };
            if inv_pow < 1e-300 {
                break;
            }
        }
        if last.is_finite() && prev < 1e-16 {
            Some(sum)
        } else {
            None
        }
    }

    fn spectral_integral(&self, x: f64) -> f64 {
        let nu = self.nu;
        let c = (nu * PI).cos();
        let s_max = 42f64.powf(nu);
        let inv_nu = 1.0 / nu;
        let f = |s: f64| {
            if s <= 0.0 {
                return 1.0 / x;
            }
            let e = (-(s.ln() * inv_nu).exp()).exp();
            x * e / (s * s + 2.0 * x * s * c + x * x)
        };
        let mut breaks = vec![x, 1.0];
        if c < 0.0 {
            let peak = -x * c;
            let width = x * (nu * PI).sin();
            breaks.extend_from_slice(&[peak - 4.0 * width, peak, peak + 4.0 * width]);
        }
        let pref = (nu * PI).sin() / (nu * PI);
        let r = integrate(f, 0.0, s_max, &breaks, 1e-15 / pref.max(1e-300), 1e-14);
        pref * r.value
    }
}

/// E_ν(z), z ≤ 0, with the default evaluation policy.
pub fn mittag_leffler(nu: f64, z: f64) -> Result<f64> {
    MittagLefflerParams::new(nu)?.eval(z)
}

/// Leading algebraic tail of E_ν(−x): x^{−1}/Γ(1−ν).
pub fn mittag_leffler_tail(nu: f64, x: f64) -> f64 {
    1.0 / (x * gamma(1.0 - nu))
}
