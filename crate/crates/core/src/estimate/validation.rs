//! Named batteries of analytic-versus-numerical checks.
//!
//! A suite runs its checks in a fixed order, each from its own seed derived
//! from the suite seed and the check name. Monte Carlo checks use the
//! tolerance z·stderr + bias bound with z ≥ 3 chosen for the whole family of
//! checks in the report, so shrinking the replication count to fit a time
//! budget widens the tolerance instead of loosening the criterion.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::diffusion::{
    chapman_kolmogorov_defect, harmonic_second_moment, sample_trd_position, walk_bias_bound, DensityParams,
    DensitySeries,
};
use crate::error::{Error, Result};
use crate::estimate::covariance::{empirical_covariance, Experiment, Formula};
use crate::estimate::dependence::{dependence_range_diagnostic, log_lags};
use crate::estimate::mc::{estimate_mean, estimate_means, McEstimate};
use crate::fields::{frac_lag_bracket, trd_equilibrium_cov, PowerSpectrum, SpectrumFamily};
use crate::rng::{derive_seed, substream};
use crate::specfun::{
    caputo_derivative_numeric, gamma, legendre_p, lm_index, spherical_harmonic, spherical_harmonics_upto,
    HarmonicIndex, MittagLefflerParams,
};
use crate::sphgeom::{build_quadrature, inner_product, SpherePoint};
use crate::subordinate::{sample_inverse_marginal, sample_stable_increment};
use crate::wigner::{gaunt_integral, orthogonality_sum, w3j, Orthogonality};

/// Smallest replication count a budget can shrink a Monte Carlo check to.
pub const MIN_REPLICATIONS: usize = 500;

/// One comparison. `pass` is true iff |estimate − analytic| ≤ tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub estimate: f64,
    pub analytic: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip)]
    spread: Option<(f64, f64)>,
}

impl Check {
    pub fn new(name: impl Into<String>, estimate: f64, analytic: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            estimate,
            analytic,
            tolerance,
            pass: (estimate - analytic).abs() <= tolerance,
            spread: None,
        }
    }

    /// Tolerance 3·stderr + bias; the multiplier may later be raised by
    /// [`widen_for_family`].
    pub fn monte_carlo(name: impl Into<String>, est: McEstimate, analytic: f64, bias: f64) -> Self {
        Self {
            spread: Some((est.stderr, bias)),
            ..Self::new(name, est.value, analytic, 3.0 * est.stderr + bias)
        }
    }

    fn with_multiplier(mut self, z: f64) -> Self {
        if let Some((se, bias)) = self.spread {
            self.tolerance = z * se + bias;
            self.pass = (self.estimate - self.analytic).abs() <= self.tolerance;
        }
        self
    }
}

/// Family-wise false alarm rate of the Monte Carlo checks in one report.
pub const FAMILY_ALPHA: f64 = 0.01;

/// Two-sided normal quantile z with P(|Z| > z) = p.
fn normal_two_sided_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if libm::erfc(mid / std::f64::consts::SQRT_2) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Raises the stderr multiplier of the Monte Carlo checks from 3 to the
/// Šidák bound that keeps the chance of any false failure among them at
/// [`FAMILY_ALPHA`].
pub fn widen_for_family(checks: Vec<Check>) -> Vec<Check> {
    let k = checks.iter().filter(|c| c.spread.is_some()).count();
    if k == 0 {
        return checks;
    }
    let per_check = 1.0 - (1.0 - FAMILY_ALPHA).powf(1.0 / k as f64);
    let z = normal_two_sided_quantile(per_check).max(3.0);
    checks.into_iter().map(|c| c.with_multiplier(z)).collect()
}

/// Outcome of a suite. Wall-clock time is kept out of the serialized form so
/// that reruns with the same seed serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Specfun,
    Wigner,
    SubordinatorLaws,
    DiffusionMarginals,
    CovarianceTheorems,
    DependenceRange,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Self::Specfun,
        Self::Wigner,
        Self::SubordinatorLaws,
        Self::DiffusionMarginals,
        Self::CovarianceTheorems,
        Self::DependenceRange,
        Self::All,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Specfun => "specfun",
            Self::Wigner => "wigner",
            Self::SubordinatorLaws => "subordinator-laws",
            Self::DiffusionMarginals => "diffusion-marginals",
            Self::CovarianceTheorems => "covariance-theorems",
            Self::DependenceRange => "dependence-range",
            Self::All => "all",
        }
    }

    /// Rough single-core runtime in seconds at full replication counts.
    fn nominal_cost(&self) -> f64 {
        match self {
            Self::Specfun | Self::Wigner | Self::DependenceRange => 0.0,
            Self::SubordinatorLaws => 1.0,
            Self::DiffusionMarginals => 15.0,
            Self::CovarianceTheorems => 10.0,
            Self::All => Self::ALL[..6].iter().map(Suite::nominal_cost).sum(),
        }
    }

    fn members(&self) -> Vec<Suite> {
        match self {
            Self::All => Self::ALL[..6].to_vec(),
            s => vec![*s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|x| x.name() == s).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(Suite::name).collect();
            Error::Argument(format!("unknown suite '{s}' (known: {})", known.join(", ")))
        })
    }
}

/// Seed and replication scale shared by the checks of one run.
struct Ctx {
    seed: u64,
    scale: f64,
}

impl Ctx {
    fn reps(&self, full: usize) -> usize {
        ((full as f64 * self.scale).ceil() as usize).clamp(MIN_REPLICATIONS.min(full), full)
    }

    fn seed(&self, label: &str) -> u64 {
        derive_seed(self.seed, label)
    }
}

/// Runs a named suite. `budget_s` caps the nominal runtime: replication
/// counts are scaled down by budget / nominal cost when the budget is short.
/// The scaling depends only on the arguments, never on measured time.
pub fn run_validation_suite(name: &str, seed: u64, budget_s: f64) -> Result<ValidationReport> {
    let suite: Suite = name.parse()?;
    if !(budget_s > 0.0) {
        return Err(Error::Argument(format!("budget must be positive, got {budget_s}")));
    }
    let start = Instant::now();
    let cost = suite.nominal_cost();
    let ctx = Ctx { seed, scale: if cost > 0.0 { (budget_s / cost).min(1.0) } else { 1.0 } };
    let mut checks = Vec::new();
    for member in suite.members() {
        let batch = match member {
            Suite::Specfun => specfun_checks(&ctx)?,
            Suite::Wigner => wigner_checks()?,
            Suite::SubordinatorLaws => subordinator_checks(&ctx)?,
            Suite::DiffusionMarginals => diffusion_checks(&ctx)?,
            Suite::CovarianceTheorems => covariance_checks(&ctx)?,
            Suite::DependenceRange => dependence_checks()?,
            Suite::All => unreachable!("All expands to its members"),
        };
        let prefix = if suite == Suite::All { format!("{}/", member.name()) } else { String::new() };
        checks.extend(batch.into_iter().map(|mut c| {
            c.name = format!("{prefix}{}", c.name);
            c
        }));
    }
    Ok(ValidationReport {
        suite: suite.name().into(),
        seed,
        checks: widen_for_family(checks),
        runtime: start.elapsed(),
    })
}

fn specfun_checks(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for nu in [0.3, 0.7, 1.0] {
        let ml = MittagLefflerParams::new(nu)?;
        out.push(Check::new(format!("ml-at-zero nu={nu}"), ml.eval(0.0)?, 1.0, 0.0));
    }
    let e1 = MittagLefflerParams::new(1.0)?;
    for x in [0.5, 2.0, 10.0, 20.0] {
        out.push(Check::new(format!("ml-order-one x={x}"), e1.eval(-x)?, (-x).exp(), 1e-10));
    }
    let half = MittagLefflerParams::new(0.5)?;
    for x in [1.0f64, 3.0, 8.0] {
        let exact = (x * x).exp() * libm::erfc(x);
        out.push(Check::new(format!("ml-half-order x={x}"), half.eval(-x)?, exact, 1e-9));
    }
    // largest violation of 0 ≤ E_ν(−x^ν) ≤ 1/(1+x^ν) over random points
    let mut rng = substream(ctx.seed("ml-bound"), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let nu = rng.random_range(0.01..1.0);
        let x: f64 = rng.random_range(0.0..50.0);
        let xn = x.powf(nu);
        let v = MittagLefflerParams::new(nu)?.eval_neg(xn);
        worst = worst.max(-v).max(v - 1.0 / (1.0 + xn));
    }
    out.push(Check::new("ml-bound", worst, 0.0, 1e-12));

    for (nu, mu, t) in [(0.3, 1.0, 0.5), (0.6, 2.0, 0.8), (0.8, 6.0, 1.5), (0.5, 0.5, 3.0)] {
        let ml = MittagLefflerParams::new(nu)?;
        let f = |s: f64| ml.eval_neg(mu * s.powf(nu));
        let d = caputo_derivative_numeric(f, nu, t, 64)?;
        out.push(Check::new(format!("caputo-eigenfunction nu={nu} mu={mu} t={t}"), d, -mu * f(t), 5e-4));
    }

    out.push(Check::new("legendre P2(0.5)", legendre_p(2, 0.5)?, -0.125, 1e-15));

    let l_max = 6;
    let grid = build_quadrature(12, 25)?;
    let n = (l_max + 1) * (l_max + 1);
    let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
    for (p, w) in &grid.nodes {
        let y = spherical_harmonics_upto(l_max, p.theta(), p.phi());
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] += y[i] * y[j].conj() * w;
            }
        }
    }
    let ortho = (0..n * n)
        .map(|k| (gram[k] - if k % (n + 1) == 0 { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    out.push(Check::new("harmonic-orthonormality l<=6", ortho, 0.0, 1e-10));

    let mut rng = substream(ctx.seed("addition-theorem"), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_point(&mut rng);
        let y = random_point(&mut rng);
        let yx = spherical_harmonics_upto(10, x.theta(), x.phi());
        let yy = spherical_harmonics_upto(10, y.theta(), y.phi());
        for l in 0..=10usize {
            let s: Complex64 = (-(l as i64)..=l as i64)
                .map(|m| yx[lm_index(l, m)] * yy[lm_index(l, m)].conj())
                .sum();
            let rhs = (2 * l + 1) as f64 / (4.0 * PI) * legendre_p(l, inner_product(&x, &y))?;
            worst = worst.max((s - rhs).norm());
        }
    }
    out.push(Check::new("addition-theorem l<=10", worst, 0.0, 1e-10));
    Ok(out)
}

fn random_point<R: Rng + ?Sized>(rng: &mut R) -> SpherePoint {
    let c: f64 = rng.random_range(-1.0..1.0);
    SpherePoint::wrapped(c.acos(), rng.random_range(0.0..2.0 * PI)).expect("finite angles")
}

fn wigner_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let relations = [
        Orthogonality::SumOverOrders { l1: 3, l2: 4, big_l: 5, big_m: 1, xi: 5, mu: 1 },
        Orthogonality::SumOverOrders { l1: 3, l2: 4, big_l: 5, big_m: 1, xi: 3, mu: 1 },
        Orthogonality::AlternatingDiagonal { l: 6, gamma: 0, kappa: 0 },
        Orthogonality::AlternatingDiagonal { l: 6, gamma: 4, kappa: 0 },
        Orthogonality::Completeness { l1: 4, l2: 5, m1: 2, m2: -3, mm1: 2, mm2: -3 },
        Orthogonality::Completeness { l1: 4, l2: 5, m1: 2, m2: -3, mm1: 1, mm2: -2 },
        Orthogonality::Normalization { l1: 7, l2: 5, l3: 4 },
        Orthogonality::Normalization { l1: 10, l2: 10, l3: 20 },
    ];
    for r in relations {
        out.push(Check::new(format!("{r:?}"), orthogonality_sum(r)?, r.expected(), 1e-12));
    }
    for l in 0..=6u32 {
        let exact = if l % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * f64::from(l) + 1.0).sqrt();
        out.push(Check::new(format!("3j ({l} {l} 0; 0 0 0)"), w3j(l, l, 0, 0, 0, 0)?, exact, 1e-14));
    }
    let grid = build_quadrature(10, 21)?;
    for (l, m) in [([1, 1, 2], [1, -1, 0]), ([2, 3, 3], [1, 1, -2]), ([2, 2, 4], [0, 0, 0]), ([3, 4, 5], [-2, 1, 1])] {
        let y = |k: usize, p: &SpherePoint| {
            spherical_harmonic(HarmonicIndex::new(l[k] as usize, m[k].into()).expect("valid order"), p.theta(), p.phi())
        };
        let quad: Complex64 = grid.nodes.iter().map(|(p, w)| y(0, p) * y(1, p) * y(2, p) * w).sum();
        let g = gaunt_integral(l[0], m[0], l[1], m[1], l[2], m[2])?;
        out.push(Check::new(format!("gaunt {l:?} {m:?}"), quad.re, g, 1e-9));
    }
    Ok(out)
}

fn subordinator_checks(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let n = ctx.reps(200_000);
    for nu in [0.3, 0.6, 0.9] {
        for s in [0.5, 2.0] {
            let name = format!("stable-laplace nu={nu} s={s}");
            let est = estimate_mean(n, ctx.seed(&name), |rng| {
                (-s * sample_stable_increment(nu, 1.0, rng).expect("valid order")).exp()
            });
            out.push(Check::monte_carlo(name, est, (-f64::powf(s, nu)).exp(), 0.0));
        }
        let t = 1.5;
        let ml = MittagLefflerParams::new(nu)?;
        let lam = 1.0;
        let name = format!("inverse-laplace nu={nu} t={t}");
        let est = estimate_mean(n, ctx.seed(&name), |rng| {
            (-lam * sample_inverse_marginal(nu, t, rng).expect("valid order")).exp()
        });
        out.push(Check::monte_carlo(name, est, ml.eval_neg(lam * f64::powf(t, nu)), 0.0));
        let name = format!("inverse-mean nu={nu} t={t}");
        let est = estimate_mean(n, ctx.seed(&name), |rng| sample_inverse_marginal(nu, t, rng).expect("valid order"));
        out.push(Check::monte_carlo(name, est, f64::powf(t, nu) / gamma(1.0 + nu), 0.0));
    }
    Ok(out)
}

fn diffusion_checks(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let dt = 1e-3;
    let n = ctx.reps(20_000);
    let north = SpherePoint::north_pole();
    let name = "bm-mean-cos t=0.5";
    let est = estimate_mean(n, ctx.seed(name), |rng| {
        sample_trd_position(&north, 1.0, 0.5, dt, rng).expect("valid step").to_vector().z
    });
    out.push(Check::monte_carlo(name, est, (-1.0f64).exp(), walk_bias_bound(1, dt)));

    let x = SpherePoint::new(1.1, 0.7)?;
    let tau = 1.0;
    let l_top = 3;
    let k = (l_top + 1) * (l_top + 1);
    for nu in [0.6, 1.0] {
        let ml = MittagLefflerParams::new(nu)?;
        let name = format!("harmonic-mean nu={nu}");
        let means = estimate_means(n, 2 * k, ctx.seed(&name), |rng, o| {
            let p = sample_trd_position(&x, nu, tau, dt, rng).expect("valid step");
            let y = spherical_harmonics_upto(l_top, p.theta(), p.phi());
            for (i, v) in y.iter().enumerate() {
                o[2 * i] = v.re;
                o[2 * i + 1] = v.im;
            }
        });
        let y0 = spherical_harmonics_upto(l_top, x.theta(), x.phi());
        for l in 1..=l_top {
            let relax = ml.eval_neg((l * (l + 1)) as f64 * tau.powf(nu));
            for m in -(l as i64)..=l as i64 {
                let i = lm_index(l, m);
                let target = y0[i] * relax;
                let bias = walk_bias_bound(l, dt) * y0[i].norm();
                out.push(Check::monte_carlo(format!("{name} l={l} m={m} re"), means[2 * i], target.re, bias));
                out.push(Check::monte_carlo(format!("{name} l={l} m={m} im"), means[2 * i + 1], target.im, bias));
            }
        }
    }

    let nu = 0.6;
    for l in 1..=2usize {
        for m in 0..=l as i64 {
            let name = format!("harmonic-second-moment nu={nu} l={l} m={m}");
            let idx = HarmonicIndex::new(l, m)?;
            let est = estimate_mean(n, ctx.seed(&name), |rng| {
                let p = sample_trd_position(&x, nu, tau, dt, rng).expect("valid step");
                spherical_harmonic(idx, p.theta(), p.phi()).norm_sqr()
            });
            // every degree γ ≤ 2l contributes at most (2l+1)/4π times its walk bias
            let bias = (0..=2 * l).step_by(2).map(|g| walk_bias_bound(g, dt)).sum::<f64>() * (2 * l + 1) as f64
                / (4.0 * PI);
            out.push(Check::monte_carlo(name, est, harmonic_second_moment(l, m, nu, tau, &x)?, bias));
        }
    }

    let grid = build_quadrature(40, 81)?;
    let x0 = SpherePoint::new(0.4, 1.0)?;
    let dens = DensitySeries::new(&DensityParams::new(0.7, 0.0)?.with_l_max(60), 0.3)?;
    let mass = grid.integrate(|p| dens.eval_cos(inner_product(p, &x0)));
    out.push(Check::new("density-normalization nu=0.7", mass, 1.0, 1e-8));

    let unit = DensityParams::new(1.0, 0.0)?;
    let defect = chapman_kolmogorov_defect([0.0, 0.5, 1.0], &x0, &x, &unit)?;
    out.push(Check::new("chapman-kolmogorov nu=1", defect, 0.0, 1e-10));
    Ok(out)
}

fn covariance_checks(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let spectrum = PowerSpectrum::parametric(SpectrumFamily::default(), 12)?;
    let x = SpherePoint::new(0.9, 0.4)?;
    let antipode = SpherePoint::wrapped(PI - x.theta(), x.phi() + PI)?;
    let base = Experiment {
        formula: Formula::Static,
        nu: 1.0,
        t0: 0.0,
        t1: 0.0,
        t2: 0.0,
        x,
        y: antipode,
        spectrum,
        dt_internal: 1e-3,
        grid_dt: 1e-3,
    };
    let mut experiments = vec![base.clone()];
    for nu in [0.6, 1.0] {
        experiments.push(Experiment { formula: Formula::SamePoint, nu, t1: 0.3, t2: 0.3, ..base.clone() });
        experiments.push(Experiment {
            formula: Formula::TwoPoint,
            nu,
            t1: 0.2,
            t2: 0.4,
            y: SpherePoint::new(1.3, 1.0)?,
            ..base.clone()
        });
        experiments.push(Experiment { formula: Formula::FracLag, nu, t1: 0.3, t2: 0.6, ..base.clone() });
    }
    experiments.push(Experiment { formula: Formula::MarkovLag, t1: 0.2, t2: 0.5, ..base.clone() });
    let n = ctx.reps(20_000);
    for e in &experiments {
        let name = format!("{} nu={} t=({},{},{})", e.formula, e.nu, e.t0, e.t1, e.t2);
        let est = empirical_covariance(e, n, ctx.seed(&name))?;
        out.push(Check::monte_carlo(name, est, e.analytic()?, e.bias_bound()));
    }
    Ok(out)
}

fn dependence_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let spectrum = PowerSpectrum::parametric(SpectrumFamily::default(), 20)?;
    let lags = log_lags(1e2, 1e4, 21);
    for nu in [0.3, 0.5, 0.8] {
        let d = dependence_range_diagnostic(nu, &spectrum, &lags)?;
        out.push(Check::new(format!("tail-exponent nu={nu}"), d.exponent, -nu, 0.05));
    }
    let mut sum = 0.0;
    for h in 1.. {
        let term = trd_equilibrium_cov(1.0, f64::from(h))?;
        sum += term;
        if term < 1e-20 {
            break;
        }
    }
    let e2 = 2.0f64.exp();
    out.push(Check::new("equilibrium-sum nu=1", sum, (1.0 / 3.0) / (e2 - 1.0), 1e-9));
    for (nu, l, t1) in [(0.6, 1usize, 1.0), (0.4, 2, 0.5)] {
        let ml = MittagLefflerParams::new(nu)?;
        let mu = (l * (l + 1)) as f64;
        let t2 = 1e3;
        let scaled = frac_lag_bracket(&ml, mu, t1, t2, 8) * f64::powf(t2, nu) * gamma(1.0 - nu);
        let limit = 1.0 / mu + f64::powf(t1, nu) / gamma(1.0 + nu);
        out.push(Check::new(format!("lag-bracket-asymptotic nu={nu} l={l}"), scaled, limit, 0.05 * limit));
    }
    Ok(out)
}
