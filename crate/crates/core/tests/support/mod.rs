//! Independent oracles in exact arithmetic.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

/// Wigner 3j symbol from the Racah closed form, as sign·√(A)·|S| with A and
/// S exact rationals. Rounding happens once, in the final square root.
pub fn exact_3j(l: [i64; 3], m: [i64; 3]) -> f64 {
    let [j1, j2, j3] = l;
    let [m1, m2, m3] = m;
    if m1 + m2 + m3 != 0 || j3 > j1 + j2 || j3 < (j1 - j2).abs() || m.iter().zip(&l).any(|(m, l)| m.abs() > *l) {
        return 0.0;
    }
    let triangle = ratio(
        factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3),
        factorial(j1 + j2 + j3 + 1),
    );
    let orders = factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j3 + m3)
        * factorial(j3 - m3);
    let a = triangle * ratio(orders, BigInt::one());
    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut s = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(j1 + j2 - j3 - k)
            * factorial(j1 - m1 - k)
            * factorial(j2 + m2 - k)
            * factorial(j3 - j2 + m1 + k)
            * factorial(j3 - j1 - m2 + k);
        let term = ratio(BigInt::one(), den);
        s = if k % 2 == 0 { s + term } else { s - term };
    }
    if s.is_zero() {
        return 0.0;
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sign = if s.is_negative() { -phase } else { phase };
    let square = a * s.clone() * s;
    sign * square.to_f64().expect("finite").sqrt()
}

/// P_l(x) from the explicit sum 2^{-l} Σ_k (−1)^k C(l,k) C(2l−2k,l) x^{l−2k},
/// evaluated exactly at the binary value of x.
pub fn legendre_exact(l: i64, x: f64) -> f64 {
    let xr = BigRational::from_float(x).expect("finite x");
    let binom = |n: i64, k: i64| factorial(n) / (factorial(k) * factorial(n - k));
    let mut sum = BigRational::zero();
    for k in 0..=l / 2 {
        let c = binom(l, k) * binom(2 * l - 2 * k, l);
        let mut p = BigRational::one();
        for _ in 0..(l - 2 * k) {
            p *= &xr;
        }
        let term = ratio(c, BigInt::one()) * p;
        sum = if k % 2 == 0 { sum + term } else { sum - term };
    }
    (sum / ratio(BigInt::from(2).pow(l as u32), BigInt::one())).to_f64().expect("finite")
}

/// E_{1/2}(−1) = Σ_{n<200} (−1)^n/Γ(n/2+1), summed exactly in two rational
/// parts: even n give Σ 1/k!, odd n give −Σ 4^{k+1}(k+1)!/((2k+2)!·√π).
pub fn ml_half_at_minus_one() -> f64 {
    let mut even = BigRational::zero();
    let mut odd = BigRational::zero();
    for k in 0..100i64 {
        even += ratio(BigInt::one(), factorial(k));
        odd += ratio(BigInt::from(4).pow((k + 1) as u32) * factorial(k + 1), factorial(2 * k + 2));
    }
    even.to_f64().unwrap() - odd.to_f64().unwrap() / std::f64::consts::PI.sqrt()
}

/// Mean of samples and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
