//! Stable subordinator and its inverse.
//!
//! Increments of the ν-stable subordinator H, with E e^{−sH_t} = e^{−t s^ν},
//! are drawn with Kanter's representation. The inverse L_t = inf{τ: H_τ > t}
//! is sampled either from its exact one-time marginal (t/H_1)^ν or, when a
//! joint path is needed, by first-passage inversion of H simulated on an
//! operational-time grid.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{argument, domain, Result};

/// Stable index, master seed and operational grid step for path simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub nu: f64,
    pub seed: u64,
    pub grid_dt: f64,
}

impl StableParams {
    pub fn new(nu: f64, seed: u64, grid_dt: f64) -> Result<Self> {
        check_stable_index(nu)?;
        if !(grid_dt > 0.0) || !grid_dt.is_finite() {
            return domain(format!("grid_dt={grid_dt} must be positive"));
        }
        Ok(Self { nu, seed, grid_dt })
    }
}

/// Samples of L at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct InversePath {
    pub t_grid: Vec<f64>,
    pub l_values: Vec<f64>,
}

fn check_stable_index(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu < 1.0) {
        return domain(format!("stable index nu={nu} outside (0,1)"));
    }
    Ok(())
}

fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// H_1 for index ν, unchecked.
pub(crate) fn stable_unit<R: Rng + ?Sized>(nu: f64, rng: &mut R) -> f64 {
    let u = open_uniform(rng);
    let e: f64 = Exp1.sample(rng);
    let a = (nu * PI * u).sin() / (PI * u).sin().powf(1.0 / nu);
    let b = ((1.0 - nu) * PI * u).sin() / e;
    a * b.powf((1.0 - nu) / nu)
}

/// One increment of H over a duration `dt`.
pub fn sample_stable_increment<R: Rng + ?Sized>(nu: f64, dt: f64, rng: &mut R) -> Result<f64> {
    check_stable_index(nu)?;
    if !(dt > 0.0) {
        return domain(format!("duration dt={dt} must be positive"));
    }
    Ok(dt.powf(1.0 / nu) * stable_unit(nu, rng))
}

/// One draw of L_t from the exact marginal. For ν = 1, L_t = t.
pub fn sample_inverse_marginal<R: Rng + ?Sized>(nu: f64, t: f64, rng: &mut R) -> Result<f64> {
    if !(nu > 0.0 && nu <= 1.0) {
        return domain(format!("stable index nu={nu} outside (0,1]"));
    }
    if !(t > 0.0) {
        return domain(format!("time t={t} must be positive"));
    }
    if nu == 1.0 {
        return Ok(t);
    }
    Ok((t / stable_unit(nu, rng)).powf(nu))
}

/// Values H_{k·grid_dt}, k = 0..=n_steps.
pub fn sample_stable_path<R: Rng + ?Sized>(
    nu: f64,
    grid_dt: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_stable_index(nu)?;
    let step = grid_dt.powf(1.0 / nu);
    let mut acc = 0.0;
    let mut h = vec![0.0];
    h.extend((0..n_steps).map(|_| {
        acc += step * stable_unit(nu, rng);
        acc
    }));
    Ok(h)
}

pub(crate) fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return argument("time grid is empty");
    }
    if t_grid[0] < 0.0 || !t_grid.iter().all(|t| t.is_finite()) {
        return argument("time grid must be finite and nonnegative");
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return argument("time grid must be strictly increasing");
    }
    Ok(())
}

/// First-passage inversion of a simulated stable path. Each value exceeds
/// the true L_t by at most `grid_dt`.
pub fn sample_inverse_path<R: Rng + ?Sized>(
    params: &StableParams,
    t_grid: &[f64],
    rng: &mut R,
) -> Result<InversePath> {
    check_stable_index(params.nu)?;
    check_time_grid(t_grid)?;
    let step = params.grid_dt.powf(1.0 / params.nu);
    let mut l_values = Vec::with_capacity(t_grid.len());
    let mut h = 0.0;
    let mut k: u64 = 0;
    for &t in t_grid {
        if t == 0.0 {
            l_values.push(0.0);
            continue;
        }
        while h <= t {
            h += step * stable_unit(params.nu, rng);
            k += 1;
        }
        l_values.push(k as f64 * params.grid_dt);
    }
    Ok(InversePath {
        t_grid: t_grid.to_vec(),
        l_values,
    })
}
