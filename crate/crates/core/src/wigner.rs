//! Wigner 3j symbols, Clebsch-Gordan coefficients and Gaunt integrals.
//!
//! Symbols are evaluated with the Racah single sum over log-factorials.
//! Selection-rule failures return exactly zero.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{argument, Error, Result};

/// Largest degree accepted by the floating-point evaluator.
pub const MAX_DEGREE: u32 = 100;

const LN_FACT_LEN: usize = 3 * MAX_DEGREE as usize + 2;

fn ln_fact(n: i64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        (0..LN_FACT_LEN)
            .map(|k| if k < 2 { 0.0 } else { libm::lgamma(k as f64 + 1.0) })
            .collect()
    });
    t[n as usize]
}

fn parity(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Degrees and orders of a 3j symbol, with |m_i| ≤ l_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wigner3jIndex {
    pub l: [u32; 3],
    pub m: [i32; 3],
}

impl Wigner3jIndex {
    pub fn new(l: [u32; 3], m: [i32; 3]) -> Result<Self> {
        for i in 0..3 {
            if m[i].unsigned_abs() > l[i] {
                return argument(format!("order m{}={} exceeds degree l{}={}", i + 1, m[i], i + 1, l[i]));
            }
        }
        Ok(Self { l, m })
    }

    /// Triangle inequality and zero total projection.
    pub fn satisfies_selection_rules(&self) -> bool {
        let [a, b, c] = self.l.map(i64::from);
        self.m.iter().map(|&x| i64::from(x)).sum::<i64>() == 0 && c <= a + b && c >= (a - b).abs()
    }
}

/// The 3j symbol (l1 l2 l3; m1 m2 m3).
pub fn wigner_3j(idx: Wigner3jIndex) -> Result<f64> {
    if let Some(&big) = idx.l.iter().find(|&&l| l > MAX_DEGREE) {
        return Err(Error::Range(format!(
            "3j degree {big} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if !idx.satisfies_selection_rules() {
        return Ok(0.0);
    }
    let [j1, j2, j3] = idx.l.map(i64::from);
    let [m1, m2, m3] = idx.m.map(i64::from);
    if m1 == 0 && m2 == 0 && (j1 + j2 + j3) % 2 == 1 {
        return Ok(0.0);
    }
    let ln_pref = 0.5
        * (ln_fact(j1 + j2 - j3) + ln_fact(j1 - j2 + j3) + ln_fact(-j1 + j2 + j3)
            - ln_fact(j1 + j2 + j3 + 1)
            + ln_fact(j1 + m1)
            + ln_fact(j1 - m1)
            + ln_fact(j2 + m2)
            + ln_fact(j2 - m2)
            + ln_fact(j3 + m3)
            + ln_fact(j3 - m3));
    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let sum: f64 = (k_min..=k_max)
        .map(|k| {
            let ln_den = ln_fact(k)
                + ln_fact(j3 - j2 + k + m1)
                + ln_fact(j3 - j1 + k - m2)
                + ln_fact(j1 + j2 - j3 - k)
                + ln_fact(j1 - k - m1)
                + ln_fact(j2 - k + m2);
            parity(k) * (ln_pref - ln_den).exp()
        })
        .sum();
    Ok(parity(j1 - j2 - m3) * sum)
}

/// Shorthand for [`wigner_3j`] on raw integers. Out-of-range orders give 0.
pub fn w3j(l1: u32, l2: u32, l3: u32, m1: i32, m2: i32, m3: i32) -> Result<f64> {
    match Wigner3jIndex::new([l1, l2, l3], [m1, m2, m3]) {
        Ok(idx) => wigner_3j(idx),
        Err(_) => Ok(0.0),
    }
}

/// Clebsch-Gordan coefficient ⟨l1 m1 l2 m2 | l3 m3⟩, where `idx.m[2]` is the
/// coupled projection.
pub fn clebsch_gordan(idx: Wigner3jIndex) -> Result<f64> {
    let [l1, l2, l3] = idx.l;
    let [m1, m2, m3] = idx.m;
    let phase = parity(i64::from(l1) - i64::from(l2) + i64::from(m3));
    Ok(phase * (2.0 * f64::from(l3) + 1.0).sqrt() * w3j(l1, l2, l3, m1, m2, -m3)?)
}

/// ∫ Y_{l1m1} Y_{l2m2} Y_{l3m3} over the unit sphere.
pub fn gaunt_integral(l1: u32, m1: i32, l2: u32, m2: i32, l3: u32, m3: i32) -> Result<f64> {
    Wigner3jIndex::new([l1, l2, l3], [m1, m2, m3])?;
    let zero = w3j(l1, l2, l3, 0, 0, 0)?;
    if zero == 0.0 {
        return Ok(0.0);
    }
    let dims = [l1, l2, l3].iter().map(|&l| 2.0 * f64::from(l) + 1.0).product::<f64>();
    Ok((dims / (4.0 * PI)).sqrt() * zero * w3j(l1, l2, l3, m1, m2, m3)?)
}

/// Left-hand sides of the four orthogonality relations of 3j symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orthogonality {
    /// Σ_{m1,m2} (l1 l2 L; m1 m2 M)(l1 l2 ξ; m1 m2 μ) = δ_{Lξ}δ_{Mμ}/(2L+1)
    SumOverOrders { l1: u32, l2: u32, big_l: u32, big_m: i32, xi: u32, mu: i32 },
    /// Σ_m (−1)^{l−m} (l l γ; m −m κ) = δ_{γ0}δ_{κ0}√(2l+1)
    AlternatingDiagonal { l: u32, gamma: u32, kappa: i32 },
    /// Σ_{l,m} (2l+1)(l1 l2 l; m1 m2 m)(l1 l2 l; M1 M2 m) = δ_{m1M1}δ_{m2M2}
    Completeness { l1: u32, l2: u32, m1: i32, m2: i32, mm1: i32, mm2: i32 },
    /// Σ_{m1,m2,m3} (l1 l2 l3; m1 m2 m3)² = 1
    Normalization { l1: u32, l2: u32, l3: u32 },
}

fn orders(l: u32) -> impl Iterator<Item = i32> {
    let l = l as i32;
    -l..=l
}

fn triangle(a: u32, b: u32, c: u32) -> bool {
    c <= a + b && c >= a.abs_diff(b)
}

impl Orthogonality {
    /// Direct summation of the left-hand side.
    pub fn sum(&self) -> Result<f64> {
        let mut acc = 0.0;
        match *self {
            Self::SumOverOrders { l1, l2, big_l, big_m, xi, mu } => {
                for m1 in orders(l1) {
                    for m2 in orders(l2) {
                        acc += w3j(l1, l2, big_l, m1, m2, big_m)? * w3j(l1, l2, xi, m1, m2, mu)?;
                    }
                }
            }
            Self::AlternatingDiagonal { l, gamma, kappa } => {
                for m in orders(l) {
                    acc += parity(i64::from(l) - i64::from(m)) * w3j(l, l, gamma, m, -m, kappa)?;
                }
            }
            Self::Completeness { l1, l2, m1, m2, mm1, mm2 } => {
                for l in l1.abs_diff(l2)..=(l1 + l2) {
                    for m in orders(l) {
                        acc += (2.0 * f64::from(l) + 1.0)
                            * w3j(l1, l2, l, m1, m2, m)?
                            * w3j(l1, l2, l, mm1, mm2, m)?;
                    }
                }
            }
            Self::Normalization { l1, l2, l3 } => {
                for m1 in orders(l1) {
                    for m2 in orders(l2) {
                        acc += w3j(l1, l2, l3, m1, m2, -m1 - m2)?.powi(2);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Right-hand side of the relation.
    pub fn expected(&self) -> f64 {
        let delta = |c: bool| if c { 1.0 } else { 0.0 };
        match *self {
            Self::SumOverOrders { l1, l2, big_l, big_m, xi, mu } => {
                let live = triangle(l1, l2, big_l) && big_m.unsigned_abs() <= big_l;
                delta(live && big_l == xi && big_m == mu) / (2.0 * f64::from(big_l) + 1.0)
            }
            Self::AlternatingDiagonal { l, gamma, kappa } => {
                delta(gamma == 0 && kappa == 0) * (2.0 * f64::from(l) + 1.0).sqrt()
            }
            Self::Completeness { l1, l2, m1, m2, mm1, mm2 } => {
                let live = m1.unsigned_abs() <= l1 && m2.unsigned_abs() <= l2;
                delta(live && m1 == mm1 && m2 == mm2)
            }
            Self::Normalization { l1, l2, l3 } => delta(triangle(l1, l2, l3)),
        }
    }
}

/// Left-hand side of an orthogonality relation.
pub fn orthogonality_sum(kind: Orthogonality) -> Result<f64> {
    kind.sum()
}
