//! Legendre polynomials by the Bonnet recurrence.

use crate::error::{domain, Result};

/// P_l(x) for |x| ≤ 1.
pub fn legendre_p(l: usize, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(legendre_unchecked(l, x))
}

/// P_0(x), ..., P_{l_max}(x).
pub fn legendre_p_all(l_max: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    Ok(legendre_table(l_max, x))
}

fn check_arg(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 1.0 {
        return domain(format!("Legendre argument x={x} outside [-1,1]"));
    }
    Ok(())
}

pub(crate) fn legendre_unchecked(l: usize, x: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

pub(crate) fn legendre_table(l_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(1.0);
    if l_max >= 1 {
        out.push(x);
    }
    for k in 2..=l_max {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn low_degrees() {
        assert_eq!(legendre_p(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_p(1, 0.3).unwrap(), 0.3);
        assert!((legendre_p(2, 0.5).unwrap() + 0.125).abs() < 1e-15);
        // P_3 = (5x³ − 3x)/2
        let x: f64 = -0.7;
        assert!((legendre_p(3, x).unwrap() - 0.5 * (5.0 * x.powi(3) - 3.0 * x)).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert!(legendre_p(3, 1.0 + 1e-12).is_err());
        assert!(legendre_p_all(3, f64::NAN).is_err());
    }

    #[test]
    fn table_matches_pointwise() {
        let t = legendre_p_all(40, 0.37).unwrap();
        for (l, v) in t.iter().enumerate() {
            assert!((v - legendre_p(l, 0.37).unwrap()).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn unit_at_one_and_bounded(l in 0usize..300, x in -1.0f64..=1.0) {
            prop_assert!((legendre_p(l, 1.0).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!(legendre_p(l, x).unwrap().abs() <= 1.0 + 1e-12);
            let parity = if l % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((legendre_p(l, -x).unwrap() - parity * legendre_p(l, x).unwrap()).abs() < 1e-12);
        }
    }
}
