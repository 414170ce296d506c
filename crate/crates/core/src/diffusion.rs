//! Brownian motion on S² with generator Δ, its inverse-stable time change,
//! and the transition density series of the time-changed process.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{argument, domain, Error, Result};
use crate::quadrature::integrate;
use crate::rng::substream;
use crate::specfun::harmonics::{spherical_harmonic, HarmonicIndex};
use crate::specfun::legendre::{legendre_table, legendre_unchecked};
use crate::specfun::mittag_leffler::MittagLefflerParams;
use crate::sphgeom::{exp_map, inner_product, SpherePoint};
use crate::subordinate::{check_time_grid, sample_inverse_marginal, sample_inverse_path, StableParams};
use crate::wigner::w3j;

/// Degree cap for adaptive truncation.
pub const L_MAX_CAP: usize = 512;
/// Tail tolerance targeted by adaptive truncation.
pub const TAIL_TOL: f64 = 1e-8;
/// Smallest admissible elapsed time for point-mass data when ν < 1.
pub const MIN_ELAPSED_FRACTIONAL: f64 = 1e-3;

fn mu(l: usize) -> f64 {
    (l * (l + 1)) as f64
}

/// Geodesic random walk on the embedded sphere.
#[derive(Debug, Clone)]
pub struct BmWalker {
    x: Vector3<f64>,
    time: f64,
}

impl BmWalker {
    pub fn new(x0: &SpherePoint) -> Self {
        Self { x: x0.to_vector(), time: 0.0 }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn position(&self) -> SpherePoint {
        SpherePoint::from_vector(&self.x)
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.x
    }

    fn step<R: Rng + ?Sized>(&mut self, h: f64, rng: &mut R) {
        let s = (2.0 * h).sqrt();
        let g = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ) * s;
        let v = g - self.x * g.dot(&self.x);
        self.x = exp_map(&self.x, &v);
    }

    /// Walks forward to `target` in steps of `dt`, landing on it exactly.
    pub fn advance_to<R: Rng + ?Sized>(&mut self, target: f64, dt: f64, rng: &mut R) {
        while target - self.time > dt {
            self.step(dt, rng);
            self.time += dt;
        }
        let rest = target - self.time;
        if rest > 0.0 {
            self.step(rest, rng);
        }
        self.time = self.time.max(target);
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return argument(format!("internal step dt={dt} must be positive"));
    }
    Ok(())
}

/// Brownian motion from `x0` at time 0, observed at `t_grid`.
pub fn simulate_sphere_bm<R: Rng + ?Sized>(
    x0: &SpherePoint,
    t_grid: &[f64],
    dt_internal: f64,
    rng: &mut R,
) -> Result<Vec<SpherePoint>> {
    check_dt(dt_internal)?;
    check_time_grid(t_grid)?;
    let mut w = BmWalker::new(x0);
    Ok(t_grid
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return *x0;
            }
            w.advance_to(t, dt_internal, rng);
            w.position()
        })
        .collect())
}

/// E[P_l(cos R)] for one walk step of length h.
pub fn walk_step_factor(l: usize, h: f64) -> f64 {
    if l == 0 || h == 0.0 {
        return 1.0;
    }
    // R² is exponential with mean 4h
    let f = |w: f64| legendre_unchecked(l, (4.0 * h * w).sqrt().cos()) * (-w).exp();
    integrate(f, 0.0, 60.0, &[1.0, 5.0], 1e-15, 1e-14).value
}

/// E[P_l(⟨x0, X_s⟩)] for the discrete walk with step `dt`.
pub fn walk_expectation(l: usize, s: f64, dt: f64) -> f64 {
    let n = (s / dt).floor();
    let rest = s - n * dt;
    walk_step_factor(l, dt).powf(n) * walk_step_factor(l, rest)
}

/// sup_s |E P_l(walk at s) − e^{−μ_l s}|, bounding the step bias of any
/// functional of degree l, whatever the (random) operational time.
pub fn walk_bias_bound(l: usize, dt: f64) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let m = mu(l);
    let lam = walk_step_factor(l, dt);
    let partial: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let r = dt * k as f64 / 8.0;
            (r, walk_step_factor(l, r))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut full = 1.0;
    for n in 0..2_000_000u64 {
        let s = n as f64 * dt;
        let exact = (-m * s).exp();
        for &(r, p) in &partial {
            worst = worst.max((full * p - exact * (-m * r).exp()).abs());
        }
        full *= lam;
        if full.abs() < 1e-17 && exact < 1e-17 {
            break;
        }
    }
    worst
}

/// Parameters of a time-changed walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrdParams {
    pub nu: f64,
    pub grid_dt: f64,
    pub dt_internal: f64,
}

impl TrdParams {
    pub fn new(nu: f64, grid_dt: f64, dt_internal: f64) -> Result<Self> {
        if !(nu > 0.0 && nu <= 1.0) {
            return domain(format!("nu={nu} outside (0,1]"));
        }
        check_dt(dt_internal)?;
        if !(grid_dt > 0.0) {
            return domain(format!("grid_dt={grid_dt} must be positive"));
        }
        Ok(Self { nu, grid_dt, dt_internal })
    }
}

/// One realization of the time-changed walk.
#[derive(Debug, Clone, PartialEq)]
pub struct TrdPath {
    pub t_grid: Vec<f64>,
    pub points: Vec<SpherePoint>,
    pub operational_times: Vec<f64>,
    pub nu: f64,
    pub seed: u64,
}

impl TrdPath {
    pub fn position_at(&self, t: f64) -> Result<SpherePoint> {
        self.t_grid
            .iter()
            .position(|&s| s == t)
            .map(|i| self.points[i])
            .ok_or_else(|| Error::Argument(format!("time {t} is not on the path grid")))
    }
}

/// Walks one Brownian path through the given nondecreasing operational times.
pub(crate) fn walk_through<R: Rng + ?Sized>(
    x0: &SpherePoint,
    op_times: &[f64],
    dt: f64,
    rng: &mut R,
) -> Vec<SpherePoint> {
    let mut w = BmWalker::new(x0);
    op_times
        .iter()
        .map(|&s| {
            if s <= 0.0 {
                return *x0;
            }
            w.advance_to(s, dt, rng);
            w.position()
        })
        .collect()
}

/// Time-changed walk started at `x0` at time `t_grid[0]`, driven by substream
/// `path_id` of `seed`.
pub fn simulate_trd(
    x0: &SpherePoint,
    t_grid: &[f64],
    params: &TrdParams,
    seed: u64,
    path_id: u64,
) -> Result<TrdPath> {
    check_time_grid(t_grid)?;
    let mut rng = substream(seed, path_id);
    let t0 = t_grid[0];
    let elapsed: Vec<f64> = t_grid.iter().map(|t| t - t0).collect();
    let op_times = if params.nu == 1.0 {
        elapsed
    } else {
        let sp = StableParams::new(params.nu, seed, params.grid_dt)?;
        sample_inverse_path(&sp, &elapsed, &mut rng)?.l_values
    };
    let points = walk_through(x0, &op_times, params.dt_internal, &mut rng);
    Ok(TrdPath {
        t_grid: t_grid.to_vec(),
        points,
        operational_times: op_times,
        nu: params.nu,
        seed,
    })
}

/// Position of the time-changed walk after elapsed time `tau`, using the
/// exact one-time law of the clock.
pub fn sample_trd_position<R: Rng + ?Sized>(
    x0: &SpherePoint,
    nu: f64,
    tau: f64,
    dt_internal: f64,
    rng: &mut R,
) -> Result<SpherePoint> {
    check_dt(dt_internal)?;
    if tau == 0.0 {
        return Ok(*x0);
    }
    let s = sample_inverse_marginal(nu, tau, rng)?;
    let mut w = BmWalker::new(x0);
    w.advance_to(s, dt_internal, rng);
    Ok(w.position())
}

/// Truncation degree choice for the density series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Adaptive,
    Fixed(usize),
}

/// Parameters of the transition density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityParams {
    pub nu: f64,
    pub truncation: Truncation,
    /// R_l; `None` means R_l ≡ 1 (point-mass initial data).
    pub r_coeffs: Option<Vec<f64>>,
    pub t0: f64,
}

impl DensityParams {
    pub fn new(nu: f64, t0: f64) -> Result<Self> {
        Self { nu, truncation: Truncation::Adaptive, r_coeffs: None, t0 }.validated()
    }

    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.truncation = Truncation::Fixed(l_max);
        self
    }

    pub fn with_r_coeffs(mut self, r: Vec<f64>) -> Result<Self> {
        self.r_coeffs = Some(r);
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return domain(format!("nu={} outside (0,1]", self.nu));
        }
        if !(self.t0 >= 0.0) || !self.t0.is_finite() {
            return domain(format!("t0={} must be finite and nonnegative", self.t0));
        }
        if let Some(r) = &self.r_coeffs {
            if r.first() != Some(&1.0) {
                return domain("R_0 must equal 1");
            }
            if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return domain("R_l must be finite and nonnegative");
            }
        }
        Ok(self)
    }

    fn r(&self, l: usize) -> f64 {
        match &self.r_coeffs {
            None => 1.0,
            Some(r) => r.get(l).copied().unwrap_or(0.0),
        }
    }

    fn r_sup_from(&self, l: usize) -> f64 {
        match &self.r_coeffs {
            None => 1.0,
            Some(r) => r.iter().skip(l).fold(0.0, |a: f64, &b| a.max(b)),
        }
    }

    fn max_degree(&self) -> usize {
        match &self.r_coeffs {
            Some(r) => r.len() - 1,
            None => usize::MAX,
        }
    }
}

/// Coefficients c_l = ((2l+1)/4π)·R_l·E_ν(−μ_l τ^ν) of the density at a fixed
/// elapsed time τ.
#[derive(Debug, Clone)]
pub struct DensitySeries {
    pub coeffs: Vec<f64>,
    pub relaxation: Vec<f64>,
    pub tail_estimate: f64,
}

fn relaxations(ml: &MittagLefflerParams, tau: f64, l_max: usize) -> Vec<f64> {
    let tn = tau.powf(ml.nu);
    (0..=l_max).map(|l| ml.eval_neg(mu(l) * tn)).collect()
}

impl DensitySeries {
    pub fn new(params: &DensityParams, t: f64) -> Result<Self> {
        let tau = t - params.t0;
        if !(tau > 0.0) {
            return domain(format!("t={t} must exceed t0={}", params.t0));
        }
        let ml = MittagLefflerParams::new(params.nu)?;
        let cap = L_MAX_CAP.min(params.max_degree());
        let (l_max, relax) = match params.truncation {
            Truncation::Fixed(l) => (l, relaxations(&ml, tau, l + 2)),
            Truncation::Adaptive => {
                if params.nu < 1.0 && params.r_coeffs.is_none() && tau < MIN_ELAPSED_FRACTIONAL {
                    return domain(format!(
                        "elapsed time {tau} below {MIN_ELAPSED_FRACTIONAL}: the point-mass series for nu<1 is not resolvable"
                    ));
                }
                let relax = relaxations(&ml, tau, cap + 2);
                let l = (0..=cap)
                    .find(|&l| tail_bound(params, &relax, l) < TAIL_TOL)
                    .unwrap_or(cap);
                (l, relax)
            }
        };
        let coeffs = (0..=l_max)
            .map(|l| (2 * l + 1) as f64 / (4.0 * PI) * params.r(l) * relax[l])
            .collect();
        let tail_estimate = tail_bound(params, &relax, l_max);
        Ok(Self { coeffs, relaxation: relax[..=l_max].to_vec(), tail_estimate })
    }

    pub fn l_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Density at cos of the angle to the start point.
    pub fn eval_cos(&self, c: f64) -> f64 {
        let p = legendre_table(self.l_max(), c.clamp(-1.0, 1.0));
        self.coeffs.iter().zip(&p).map(|(a, b)| a * b).sum()
    }

    /// P(cos d(x0, X) ≤ c).
    pub fn colatitude_cdf(&self, c: f64) -> f64 {
        let c = c.clamp(-1.0, 1.0);
        let p = legendre_table(self.l_max() + 1, c);
        let mut s = 0.5 * (c + 1.0);
        for l in 1..=self.l_max() {
            // 2π·c_l·∫P_l = c_l·2π/(2l+1)·(P_{l+1} − P_{l−1})
            let a = self.coeffs[l] * 2.0 * PI / (2 * l + 1) as f64;
            s += a * (p[l + 1] - p[l - 1]);
        }
        s.clamp(0.0, 1.0)
    }

    /// Inverse of [`Self::colatitude_cdf`] by bisection.
    pub fn colatitude_quantile(&self, q: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.colatitude_cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Geometric-tail estimate of Σ_{l>L} ((2l+1)/4π)·sup R·|E_ν(−μ_l τ^ν)|.
fn tail_bound(params: &DensityParams, relax: &[f64], l: usize) -> f64 {
    if l + 2 >= relax.len() {
        return f64::INFINITY;
    }
    let r_sup = params.r_sup_from(l + 1);
    if r_sup == 0.0 {
        return 0.0;
    }
    let term = |k: usize| (2 * k + 1) as f64 / (4.0 * PI) * r_sup * relax[k].abs();
    let (a, b) = (term(l + 1), term(l + 2));
    if a == 0.0 {
        return 0.0;
    }
    let ratio = b / a;
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        a / (1.0 - ratio)
    }
}

/// u_ν(x, t; x0, t0).
pub fn transition_density(x: &SpherePoint, t: f64, x0: &SpherePoint, params: &DensityParams) -> Result<f64> {
    Ok(DensitySeries::new(params, t)?.eval_cos(inner_product(x, x0)))
}

/// E_ν(−μ_l(t−t0)^ν)²·A_l(u0).
pub fn solution_angular_spectrum(l: usize, t: f64, params: &DensityParams, al_u0: f64) -> Result<f64> {
    let tau = t - params.t0;
    if !(tau > 0.0) {
        return domain(format!("t={t} must exceed t0={}", params.t0));
    }
    let e = MittagLefflerParams::new(params.nu)?.eval_neg(mu(l) * tau.powf(params.nu));
    Ok(e * e * al_u0)
}

/// u_ν(x2,t2;x0,t0) minus the two-step composition through time t1.
pub fn chapman_kolmogorov_defect(
    t: [f64; 3],
    x0: &SpherePoint,
    x2: &SpherePoint,
    params: &DensityParams,
) -> Result<f64> {
    let [t0, t1, t2] = t;
    if !(t0 < t1 && t1 < t2) {
        return argument(format!("times must satisfy t0<t1<t2, got {t0}, {t1}, {t2}"));
    }
    let p = DensityParams { t0, ..params.clone() };
    let full = DensitySeries::new(&p, t2)?;
    let l_max = full.l_max();
    let ml = MittagLefflerParams::new(p.nu)?;
    let e1 = relaxations(&ml, t1 - t0, l_max);
    let e2 = relaxations(&ml, t2 - t1, l_max);
    let pl = legendre_table(l_max, inner_product(x2, x0));
    let composed: f64 = (0..=l_max)
        .map(|l| (2 * l + 1) as f64 / (4.0 * PI) * p.r(l).powi(2) * e1[l] * e2[l] * pl[l])
        .sum();
    let direct: f64 = full.coeffs.iter().zip(&pl).map(|(a, b)| a * b).sum();
    Ok(direct - composed)
}

/// E[Y_lm(X_t) Y*_lm(X_t)] for the time-changed walk started at `x`, as the
/// finite Wigner series over degrees γ ≤ 2l (only κ = 0 survives).
pub fn harmonic_second_moment(l: usize, m: i64, nu: f64, tau: f64, x: &SpherePoint) -> Result<f64> {
    HarmonicIndex::new(l, m)?;
    let ml = MittagLefflerParams::new(nu)?;
    let lu = l as u32;
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mut s = 0.0;
    for g in (0..=2 * l).step_by(2) {
        let gu = g as u32;
        let coef = sign
            * (2 * l + 1) as f64
            * ((2 * g + 1) as f64 / (4.0 * PI)).sqrt()
            * w3j(gu, lu, lu, 0, 0, 0)?
            * w3j(gu, lu, lu, 0, m as i32, -(m as i32))?;
        let y = spherical_harmonic(HarmonicIndex::new(g, 0)?, x.theta(), x.phi()).re;
        s += coef * ml.eval_neg(mu(g) * tau.powf(nu)) * y;
    }
    Ok(s)
}
