//! Isotropic Gaussian fields on S², their composition with the
//! time-changed walk, and closed-form covariances.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::diffusion::TrdPath;
use crate::error::{argument, domain, Error, Result};
use crate::quadrature::integrate;
use crate::specfun::gamma::gamma;
use crate::specfun::harmonics::{lm_index, spherical_harmonics_upto};
use crate::specfun::legendre::legendre_table;
use crate::specfun::mittag_leffler::MittagLefflerParams;
use crate::sphgeom::{inner_product, SpherePoint};

fn mu(l: usize) -> f64 {
    (l * (l + 1)) as f64
}

fn weight(l: usize) -> f64 {
    (2 * l + 1) as f64 / (4.0 * PI)
}

/// C_l = A·(l+1)^{−α}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumFamily {
    pub amplitude: f64,
    pub alpha: f64,
}

impl Default for SpectrumFamily {
    fn default() -> Self {
        Self { amplitude: 1.0, alpha: 3.0 }
    }
}

/// Angular power spectrum C_0, ..., C_L.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    c: Vec<f64>,
    family: Option<SpectrumFamily>,
}

impl PowerSpectrum {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return argument("power spectrum needs at least C_0");
        }
        if let Some((l, v)) = c.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return domain(format!("C_{l}={v} must be finite and nonnegative"));
        }
        Ok(Self { c, family: None })
    }

    pub fn parametric(family: SpectrumFamily, l_max: usize) -> Result<Self> {
        if !(family.amplitude >= 0.0) || !family.alpha.is_finite() {
            return domain("spectrum amplitude must be nonnegative and alpha finite");
        }
        let c = (0..=l_max)
            .map(|l| family.amplitude * ((l + 1) as f64).powf(-family.alpha))
            .collect();
        Ok(Self { c, family: Some(family) })
    }

    /// C_l = c·δ_{l0}.
    pub fn monopole(c0: f64, l_max: usize) -> Result<Self> {
        let mut c = vec![0.0; l_max + 1];
        c[0] = c0;
        Self::new(c)
    }

    pub fn family(&self) -> Option<SpectrumFamily> {
        self.family
    }

    pub fn l_max(&self) -> usize {
        self.c.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }

    pub fn get(&self, l: usize) -> f64 {
        self.c.get(l).copied().unwrap_or(0.0)
    }

    /// Σ_l ((2l+1)/4π)·C_l.
    pub fn variance(&self) -> f64 {
        self.c.iter().enumerate().map(|(l, c)| weight(l) * c).sum()
    }

    /// Relative size of the omitted tail Σ_{l>L} (2l+1)C_l for a parametric
    /// family, by the integral test; infinite when α ≤ 2.
    pub fn tail_fraction(&self) -> Option<f64> {
        let f = self.family?;
        if f.alpha <= 2.0 {
            return Some(f64::INFINITY);
        }
        let n = (self.l_max() + 2) as f64;
        // Σ_{k≥n} (2k−1)A k^{−α} ≤ 2A n^{2−α}/(α−2) + A n^{1−α}
        let tail = f.amplitude * (2.0 * n.powf(2.0 - f.alpha) / (f.alpha - 2.0) + n.powf(1.0 - f.alpha));
        let partial: f64 = self.c.iter().enumerate().map(|(l, c)| (2 * l + 1) as f64 * c).sum();
        Some(tail / partial)
    }

    fn truncated(&self, l_max: usize) -> &[f64] {
        &self.c[..=l_max.min(self.l_max())]
    }
}

/// Triangular array a_lm, |m| ≤ l ≤ L, laid out by [`lm_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients {
    l_max: usize,
    a: Vec<Complex64>,
}

fn parity(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl HarmonicCoefficients {
    pub fn zeros(l_max: usize) -> Self {
        Self { l_max, a: vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)] }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.a[lm_index(l, m)]
    }

    /// Sets a_lm (m ≥ 0) and its partner a_{l,−m} = (−1)^m a*_lm. For m = 0
    /// the imaginary part is dropped.
    pub fn set(&mut self, l: usize, m: i64, value: Complex64) -> Result<()> {
        if l > self.l_max || m < 0 || m as usize > l {
            return argument(format!("coefficient index ({l},{m}) out of range"));
        }
        if m == 0 {
            self.a[lm_index(l, 0)] = Complex64::new(value.re, 0.0);
        } else {
            self.a[lm_index(l, m)] = value;
            self.a[lm_index(l, -m)] = parity(m) * value.conj();
        }
        Ok(())
    }

    /// Largest violation of the reality symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..=self.l_max {
            for m in 0..=(l as i64) {
                let d = self.get(l, -m) - parity(m) * self.get(l, m).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Gaussian coefficients with E|a_lm|² = C_l and the reality symmetry.
pub fn sample_coefficients<R: Rng + ?Sized>(spectrum: &PowerSpectrum, rng: &mut R) -> HarmonicCoefficients {
    let l_max = spectrum.l_max();
    let mut out = HarmonicCoefficients::zeros(l_max);
    for l in 0..=l_max {
        let c = spectrum.get(l);
        let g: f64 = rng.sample(StandardNormal);
        out.a[lm_index(l, 0)] = Complex64::new(g * c.sqrt(), 0.0);
        let s = (0.5 * c).sqrt();
        for m in 1..=(l as i64) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = Complex64::new(re * s, im * s);
            out.a[lm_index(l, m)] = v;
            out.a[lm_index(l, -m)] = parity(m) * v.conj();
        }
    }
    out
}

const IMAG_RESIDUAL_LIMIT: f64 = 1e-8;

/// Σ a_lm Y_lm(x).
pub fn evaluate_field(coeffs: &HarmonicCoefficients, x: &SpherePoint) -> Result<f64> {
    let y = spherical_harmonics_upto(coeffs.l_max, x.theta(), x.phi());
    let s: Complex64 = coeffs.a.iter().zip(&y).map(|(a, y)| a * y).sum();
    if s.im.abs() > IMAG_RESIDUAL_LIMIT {
        return Err(Error::Consistency(format!(
            "field sum has imaginary residual {:e}; coefficients violate the reality symmetry",
            s.im
        )));
    }
    Ok(s.re)
}

/// Field value at the position of the walk at grid time `t`.
pub fn evaluate_time_changed_field(coeffs: &HarmonicCoefficients, path: &TrdPath, t: f64) -> Result<f64> {
    evaluate_field(coeffs, &path.position_at(t)?)
}

/// Σ_l ((2l+1)/4π)·C_l·P_l(⟨x,y⟩).
pub fn field_covariance_static(spectrum: &PowerSpectrum, x: &SpherePoint, y: &SpherePoint, l_max: usize) -> f64 {
    covariance_kernel(spectrum.truncated(l_max), inner_product(x, y))
}

pub(crate) fn covariance_kernel(c: &[f64], cos: f64) -> f64 {
    let p = legendre_table(c.len() - 1, cos);
    c.iter().zip(&p).enumerate().map(|(l, (c, p))| weight(l) * c * p).sum()
}

/// Inputs of the space-time covariance formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceQuery {
    pub nu: f64,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub x: SpherePoint,
    pub y: SpherePoint,
    pub spectrum: PowerSpectrum,
    pub l_max: usize,
}

impl CovarianceQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return domain(format!("nu={} outside (0,1]", self.nu));
        }
        if !(self.t0 <= self.t1 && self.t1 <= self.t2) || !self.t0.is_finite() || !self.t2.is_finite() {
            return argument(format!(
                "times must satisfy t0<=t1<=t2, got {}, {}, {}",
                self.t0, self.t1, self.t2
            ));
        }
        Ok(())
    }

    fn relaxations(&self, tau: f64) -> Result<Vec<f64>> {
        let ml = MittagLefflerParams::new(self.nu)?;
        let tn = tau.powf(self.nu);
        Ok((0..=self.l_max.min(self.spectrum.l_max())).map(|l| ml.eval_neg(mu(l) * tn)).collect())
    }
}

/// Σ_l ((2l+1)/4π)·C_l·E_ν(−μ_l(t1−t0)^ν).
pub fn cov_same_point(q: &CovarianceQuery) -> Result<f64> {
    q.validate()?;
    let e = q.relaxations(q.t1 - q.t0)?;
    let c = q.spectrum.truncated(q.l_max);
    Ok(c.iter().zip(&e).enumerate().map(|(l, (c, e))| weight(l) * c * e).sum())
}

/// Σ_l ((2l+1)/4π)·C_l·E_ν(−μ_l T1^ν)·E_ν(−μ_l T2^ν)·P_l(⟨x,y⟩).
pub fn cov_two_points(q: &CovarianceQuery) -> Result<f64> {
    q.validate()?;
    if q.x == q.y {
        return argument("cov_two_points needs distinct points; use cov_same_point");
    }
    let e1 = q.relaxations(q.t1 - q.t0)?;
    let e2 = q.relaxations(q.t2 - q.t0)?;
    let c = q.spectrum.truncated(q.l_max);
    let p = legendre_table(c.len() - 1, inner_product(&q.x, &q.y));
    Ok((0..c.len()).map(|l| weight(l) * c[l] * e1[l] * e2[l] * p[l]).sum())
}

/// One term of [`cov_two_points`].
pub fn frequency_component_cov(
    l: usize,
    nu: f64,
    t: [f64; 3],
    x: &SpherePoint,
    y: &SpherePoint,
    spectrum: &PowerSpectrum,
) -> Result<f64> {
    let [t0, t1, t2] = t;
    let q = CovarianceQuery { nu, t0, t1, t2, x: *x, y: *y, spectrum: spectrum.clone(), l_max: l };
    q.validate()?;
    let ml = MittagLefflerParams::new(nu)?;
    let e = |tau: f64| ml.eval_neg(mu(l) * tau.powf(nu));
    let p = legendre_table(l, inner_product(x, y))[l];
    Ok(weight(l) * spectrum.get(l) * e(t1 - t0) * e(t2 - t0) * p)
}

/// Σ_l ((2l+1)/4π)·C_l·e^{−μ_l(t2−t1)}.
pub fn cov_markov_lag(spectrum: &PowerSpectrum, t1: f64, t2: f64, l_max: usize) -> Result<f64> {
    if !(t1 <= t2) {
        return argument(format!("times must satisfy t1<=t2, got {t1}, {t2}"));
    }
    let h = t2 - t1;
    Ok(spectrum
        .truncated(l_max)
        .iter()
        .enumerate()
        .map(|(l, c)| weight(l) * c * (-mu(l) * h).exp())
        .sum())
}

/// E[e^{−μ(L_{T2} − L_{T1})}] for the inverse ν-stable clock:
/// E_ν(−a) + (a/Γ(1+ν))·∫₀^{(T1/T2)^ν} E_ν(−a(1−u^{1/ν})^ν) du, a = μT2^ν.
pub fn frac_lag_bracket(ml: &MittagLefflerParams, mu_l: f64, t1: f64, t2: f64, panels: usize) -> f64 {
    let nu = ml.nu;
    let a = mu_l * t2.powf(nu);
    if a == 0.0 {
        return 1.0;
    }
    let upper = (t1 / t2).powf(nu);
    let f = |u: f64| ml.eval_neg(a * (1.0 - u.powf(1.0 / nu)).max(0.0).powf(nu));
    let n = panels.max(1);
    let breaks: Vec<f64> = (1..n).map(|k| upper * k as f64 / n as f64).collect();
    let r = integrate(f, 0.0, upper, &breaks, 1e-13, 1e-11);
    ml.eval_neg(a) + a / gamma(1.0 + nu) * r.value
}

/// Same-point covariance between times t0+T1 and t0+T2 of the time-changed
/// field, Σ_l ((2l+1)/4π)·C_l·E[e^{−μ_l(L_{T2} − L_{T1})}].
pub fn cov_fractional_lag_integral(
    spectrum: &PowerSpectrum,
    nu: f64,
    t1: f64,
    t2: f64,
    l_max: usize,
    quad_n: usize,
) -> Result<f64> {
    if !(t1 > 0.0 && t1 <= t2) || !t2.is_finite() {
        return argument(format!("need 0 < T1 <= T2, got T1={t1}, T2={t2}"));
    }
    let ml = MittagLefflerParams::new(nu)?;
    Ok(spectrum
        .truncated(l_max)
        .iter()
        .enumerate()
        .map(|(l, c)| if *c == 0.0 { 0.0 } else { weight(l) * c * frac_lag_bracket(&ml, mu(l), t1, t2, quad_n) })
        .sum())
}

/// (1/3)·E_ν(−2h^ν).
pub fn trd_equilibrium_cov(nu: f64, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return domain(format!("lag h={h} must be nonnegative"));
    }
    Ok(MittagLefflerParams::new(nu)?.eval_neg(2.0 * h.powf(nu)) / 3.0)
}

/// Partial Sobolev sum with a convergence diagnosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorm {
    pub value: f64,
    pub tail_estimate: f64,
    pub converged: bool,
}

/// Σ_l (2l+1)^{2s}·A_l over the supplied sequence.
pub fn sobolev_norm(a: &[f64], s: f64) -> Result<SobolevNorm> {
    if !(s >= 0.0) {
        return domain(format!("smoothness s={s} must be nonnegative"));
    }
    let terms: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(l, v)| ((2 * l + 1) as f64).powf(2.0 * s) * v)
        .collect();
    let value: f64 = terms.iter().sum();
    let n = terms.len();
    if n < 8 {
        return Ok(SobolevNorm { value, tail_estimate: 0.0, converged: true });
    }
    // Fit t_l ≈ K·(2l+1)^{−p} on the last half and bound the tail by the
    // integral test.
    let (l1, l2) = (n / 2, n - 1);
    let (t1, t2) = (terms[l1], terms[l2]);
    if t2 == 0.0 {
        return Ok(SobolevNorm { value, tail_estimate: 0.0, converged: true });
    }
    let (x1, x2) = ((2 * l1 + 1) as f64, (2 * l2 + 1) as f64);
    let p = (t1 / t2).ln() / (x2 / x1).ln();
    if p <= 1.0 {
        return Ok(SobolevNorm { value, tail_estimate: f64::INFINITY, converged: false });
    }
    // Σ_{l>L} K(2l+1)^{−p} ≈ (K/2)·(2L+2)^{1−p}/(p−1)
    let k = t2 * x2.powf(p);
    let tail = 0.5 * k * (x2 + 1.0).powf(1.0 - p) / (p - 1.0);
    Ok(SobolevNorm { value, tail_estimate: tail, converged: true })
}
