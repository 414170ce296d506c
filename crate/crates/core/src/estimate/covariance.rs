//! Monte Carlo covariance experiments for the time-changed field.
//!
//! Each replication draws fresh Gaussian coefficients and fresh drivers.
//! Evaluations started from the same point share one walk and one clock;
//! evaluations started from different points use independent ones.

use std::fmt;
use std::str::FromStr;

use crate::diffusion::{sample_trd_position, walk_bias_bound, walk_through};
use crate::error::{argument, Error, Result};
use crate::estimate::mc::{estimate_mean, McEstimate};
use crate::fields::{
    cov_fractional_lag_integral, cov_markov_lag, cov_same_point, cov_two_points, evaluate_field,
    field_covariance_static, sample_coefficients, CovarianceQuery, PowerSpectrum,
};
use crate::sphgeom::SpherePoint;
use crate::subordinate::{sample_inverse_path, StableParams};

/// Which covariance is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// Cov(field at (x, t0), field at (x, t1)).
    SamePoint,
    /// Cov(field at (x, t1), field at (y, t2)), independent drivers.
    TwoPoint,
    /// Brownian case, Cov(field at (x, t1), field at (x, t2)).
    MarkovLag,
    /// Cov(field at (x, t1), field at (x, t2)) with a shared clock.
    FracLag,
    /// Cov(T(x), T(y)) without time change.
    Static,
}

impl Formula {
    pub const ALL: [Formula; 5] = [Self::SamePoint, Self::TwoPoint, Self::MarkovLag, Self::FracLag, Self::Static];

    pub fn name(&self) -> &'static str {
        match self {
            Self::SamePoint => "same-point",
            Self::TwoPoint => "two-point",
            Self::MarkovLag => "markov-lag",
            Self::FracLag => "frac-lag-integral",
            Self::Static => "static",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown covariance formula '{s}'")))
    }
}

/// A covariance experiment together with its discretization settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub formula: Formula,
    pub nu: f64,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub x: SpherePoint,
    pub y: SpherePoint,
    pub spectrum: PowerSpectrum,
    pub dt_internal: f64,
    pub grid_dt: f64,
}

impl Experiment {
    fn query(&self) -> CovarianceQuery {
        CovarianceQuery {
            nu: self.nu,
            t0: self.t0,
            t1: self.t1,
            t2: self.t2,
            x: self.x,
            y: self.y,
            spectrum: self.spectrum.clone(),
            l_max: self.spectrum.l_max(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.query().validate()?;
        if !(self.dt_internal > 0.0 && self.grid_dt > 0.0) {
            return argument("dt_internal and grid_dt must be positive");
        }
        match self.formula {
            Formula::MarkovLag if self.nu != 1.0 => argument("markov-lag requires nu=1"),
            Formula::FracLag if self.t1 <= self.t0 => argument("frac-lag-integral requires t1 > t0"),
            Formula::TwoPoint if self.x == self.y => argument("two-point requires distinct points"),
            _ => Ok(()),
        }
    }

    /// Closed-form value.
    pub fn analytic(&self) -> Result<f64> {
        self.validate()?;
        let q = self.query();
        match self.formula {
            Formula::SamePoint => cov_same_point(&q),
            Formula::TwoPoint => cov_two_points(&q),
            Formula::MarkovLag => cov_markov_lag(&self.spectrum, self.t1, self.t2, q.l_max),
            Formula::FracLag => {
                cov_fractional_lag_integral(&self.spectrum, self.nu, self.t1 - self.t0, self.t2 - self.t0, q.l_max, 4)
            }
            Formula::Static => Ok(field_covariance_static(&self.spectrum, &self.x, &self.y, q.l_max)),
        }
    }

    /// Bound on the discretization bias of the Monte Carlo estimator.
    pub fn bias_bound(&self) -> f64 {
        let c = self.spectrum.values();
        let per_degree = |l: usize| -> f64 {
            let walk = walk_bias_bound(l, self.dt_internal);
            let mu = (l * (l + 1)) as f64;
            match self.formula {
                Formula::Static => 0.0,
                Formula::SamePoint | Formula::MarkovLag => walk,
                Formula::TwoPoint => 2.0 * walk,
                Formula::FracLag if self.nu == 1.0 => walk,
                // each clock value overshoots by at most grid_dt, so the lag
                // moves by at most grid_dt either way
                Formula::FracLag => walk + (mu * self.grid_dt).exp_m1(),
            }
        };
        c.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(l, c)| (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * c * per_degree(l))
            .sum()
    }
}

/// Monte Carlo estimate of the experiment's covariance.
pub fn empirical_covariance(exp: &Experiment, n_paths: usize, seed: u64) -> Result<McEstimate> {
    exp.validate()?;
    if n_paths < 2 {
        return argument("empirical covariance needs at least 2 replications");
    }
    let stable = if exp.nu < 1.0 { Some(StableParams::new(exp.nu, seed, exp.grid_dt)?) } else { None };
    let e = exp;
    let est = estimate_mean(n_paths, seed, |rng| {
        let a = sample_coefficients(&e.spectrum, rng);
        let field = |p: &SpherePoint| evaluate_field(&a, p).expect("sampled coefficients are symmetric");
        let pos = |start: &SpherePoint, tau: f64, rng: &mut _| {
            sample_trd_position(start, e.nu, tau, e.dt_internal, rng).expect("validated parameters")
        };
        match e.formula {
            Formula::Static => field(&e.x) * field(&e.y),
            Formula::SamePoint => {
                let p = pos(&e.x, e.t1 - e.t0, rng);
                field(&e.x) * field(&p)
            }
            Formula::TwoPoint => {
                let p = pos(&e.x, e.t1 - e.t0, rng);
                let q = pos(&e.y, e.t2 - e.t0, rng);
                field(&p) * field(&q)
            }
            Formula::MarkovLag | Formula::FracLag => {
                let (a1, a2) = (e.t1 - e.t0, e.t2 - e.t0);
                let ops = match &stable {
                    None => vec![a1, a2],
                    Some(sp) => sample_inverse_path(sp, &[a1, a2], rng).expect("validated grid").l_values,
                };
                let pts = walk_through(&e.x, &ops, e.dt_internal, rng);
                field(&pts[0]) * field(&pts[1])
            }
        }
    });
    Ok(est)
}
