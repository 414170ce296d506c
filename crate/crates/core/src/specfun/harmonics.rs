//! Complex spherical harmonics Y_lm(θ, φ), orthonormal on the unit sphere,
//! with the Condon-Shortley phase.
//!
//! The normalized associated Legendre functions are built by the diagonal
//! seed Ñ_mm followed by the upward recurrence in l, carrying the
//! normalization along so nothing overflows at high degree.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{argument, Result};

/// Degree/order pair with |m| ≤ l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    l: usize,
    m: i64,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return argument(format!("harmonic order m={m} exceeds degree l={l}"));
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    /// Laplacian eigenvalue l(l+1).
    pub fn eigenvalue(&self) -> f64 {
        (self.l * (self.l + 1)) as f64
    }
}

/// Position of (l, m) in a flat table of all |m| ≤ l ≤ l_max.
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

fn sign(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Ñ_lm(cos θ) for l = m..=l_max at fixed order m ≥ 0.
fn normalized_column(l_max: usize, m: usize, x: f64, s: f64) -> Vec<f64> {
    let mut diag = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        diag *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    let mut col = Vec::with_capacity(l_max + 1 - m);
    col.push(diag);
    if l_max > m {
        col.push(x * (2.0 * m as f64 + 3.0).sqrt() * diag);
    }
    let mf = m as f64;
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let b = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
        let n = col.len();
        col.push(a * (x * col[n - 1] - b * col[n - 2]));
    }
    col
}

/// Y_lm(θ, φ).
pub fn spherical_harmonic(idx: HarmonicIndex, theta: f64, phi: f64) -> Complex64 {
    let m_abs = idx.m.unsigned_abs() as usize;
    let col = normalized_column(idx.l, m_abs, theta.cos(), theta.sin());
    let y = col[idx.l - m_abs] * Complex64::from_polar(1.0, m_abs as f64 * phi);
    if idx.m < 0 {
        sign(m_abs) * y.conj()
    } else {
        y
    }
}

/// All Y_lm(θ, φ) for l ≤ l_max, laid out by [`lm_index`].
pub fn spherical_harmonics_upto(l_max: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let (x, s) = (theta.cos(), theta.sin());
    let mut out = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)];
    for m in 0..=l_max {
        let col = normalized_column(l_max, m, x, s);
        let e = Complex64::from_polar(1.0, m as f64 * phi);
        for (k, v) in col.iter().enumerate() {
            let l = m + k;
            let y = *v * e;
            out[lm_index(l, m as i64)] = y;
            if m > 0 {
                out[lm_index(l, -(m as i64))] = sign(m) * y.conj();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::legendre::legendre_unchecked;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn y(l: usize, m: i64, t: f64, p: f64) -> Complex64 {
        spherical_harmonic(HarmonicIndex::new(l, m).unwrap(), t, p)
    }

    #[test]
    fn low_order_values() {
        let c = 1.0 / (4.0 * PI).sqrt();
        assert!((y(0, 0, 1.1, 2.0).re - c).abs() < 1e-15);
        let t = 0.8;
        assert!((y(1, 0, t, 0.3).re - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-15);
        let v = y(1, 1, PI / 2.0, 0.0);
        assert!((v.re + (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn index_validation() {
        assert!(HarmonicIndex::new(2, 3).is_err());
        assert!(HarmonicIndex::new(2, -2).is_ok());
        assert_eq!(HarmonicIndex::new(3, 1).unwrap().eigenvalue(), 12.0);
    }

    #[test]
    fn table_agrees_with_single_evaluation() {
        let tab = spherical_harmonics_upto(12, 0.9, 4.0);
        for l in 0..=12usize {
            for m in -(l as i64)..=(l as i64) {
                assert!((tab[lm_index(l, m)] - y(l, m, 0.9, 4.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn high_degree_stays_finite() {
        let v = y(400, 200, 0.3, 1.0);
        assert!(v.norm().is_finite());
        let v = y(150, 150, 1.2, 0.0);
        assert!(v.norm().is_finite() && v.norm() > 0.0);
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(l in 0usize..=10, mm in 0i64..=10, t in 0.0f64..=PI, p in 0.0f64..(2.0 * PI)) {
            let m = mm.min(l as i64);
            let lhs = y(l, m, t, p).conj();
            let rhs = sign(m as usize) * y(l, -m, t, p);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn addition_theorem(l in 0usize..=10, t1 in 0.0f64..=PI, p1 in 0.0f64..TAU, t2 in 0.0f64..=PI, p2 in 0.0f64..TAU) {
            let a = spherical_harmonics_upto(l, t1, p1);
            let b = spherical_harmonics_upto(l, t2, p2);
            let sum: Complex64 = (-(l as i64)..=(l as i64))
                .map(|m| a[lm_index(l, m)] * b[lm_index(l, m)].conj())
                .sum();
            let cosg = (t1.cos() * t2.cos() + t1.sin() * t2.sin() * (p1 - p2).cos()).clamp(-1.0, 1.0);
            let rhs = (2.0 * l as f64 + 1.0) / (4.0 * PI) * legendre_unchecked(l, cosg);
            prop_assert!((sum.re - rhs).abs() < 1e-10 && sum.im.abs() < 1e-10);
        }
    }
}
