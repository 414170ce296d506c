//! Empirical angular power spectrum from field values on a product grid.

use num_complex::Complex64;

use crate::error::{argument, Result};
use crate::specfun::{lm_index, spherical_harmonics_upto};
use crate::sphgeom::QuadratureGrid;

/// Â_l = Σ_m |â_lm|², with â_lm the grid quadrature of T·conj(Y_lm).
///
/// `values` follows the node order of `grid` (rings of constant θ, φ
/// innermost). The field is assumed real, so negative orders are recovered
/// from the positive ones.
pub fn estimate_power_spectrum(values: &[f64], grid: &QuadratureGrid, l_max: usize) -> Result<Vec<f64>> {
    if grid.degree < 2 * l_max {
        return argument(format!(
            "quadrature grid is exact to degree {}, need at least {} for l_max={l_max}",
            grid.degree,
            2 * l_max
        ));
    }
    if values.len() != grid.nodes.len() {
        return argument(format!("expected {} field values, got {}", grid.nodes.len(), values.len()));
    }
    let n_phi = grid.phis.len();
    let twiddle: Vec<Vec<Complex64>> = (0..=l_max)
        .map(|m| grid.phis.iter().map(|&p| Complex64::from_polar(1.0, -(m as f64) * p)).collect())
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 2) / 2];
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    for ((ring, &theta), w) in values.chunks(n_phi).zip(&grid.thetas).zip(grid.ring_weights()) {
        let ylm = spherical_harmonics_upto(l_max, theta, 0.0);
        for (m, tw) in twiddle.iter().enumerate() {
            let s: Complex64 = ring.iter().zip(tw).map(|(v, e)| e * v).sum::<Complex64>() * w;
            for l in m..=l_max {
                a[tri(l, m)] += s * ylm[lm_index(l, m as i64)].re;
            }
        }
    }
    Ok((0..=l_max)
        .map(|l| {
            (0..=l)
                .map(|m| {
                    let p = a[tri(l, m)].norm_sqr();
                    if m == 0 { p } else { 2.0 * p }
                })
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::mc::estimate_means;
    use crate::fields::{evaluate_field, sample_coefficients, HarmonicCoefficients, PowerSpectrum, SpectrumFamily};
    use crate::rng::substream;
    use crate::sphgeom::build_quadrature;

    fn sample_on(grid: &QuadratureGrid, a: &HarmonicCoefficients) -> Vec<f64> {
        grid.nodes.iter().map(|(p, _)| evaluate_field(a, p).unwrap()).collect()
    }

    #[test]
    fn single_mode() {
        let grid = build_quadrature(12, 25).unwrap();
        let mut a = HarmonicCoefficients::zeros(5);
        a.set(2, 1, Complex64::new(1.0, 0.0)).unwrap();
        let s = estimate_power_spectrum(&sample_on(&grid, &a), &grid, 5).unwrap();
        for (l, v) in s.iter().enumerate() {
            let expect = if l == 2 { 2.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-9, "l={l}: {v}");
        }
    }

    #[test]
    fn zero_field_and_grid_checks() {
        let grid = build_quadrature(8, 17).unwrap();
        let s = estimate_power_spectrum(&vec![0.0; grid.nodes.len()], &grid, 4).unwrap();
        assert!(s.iter().all(|v| *v == 0.0));
        assert!(estimate_power_spectrum(&vec![0.0; grid.nodes.len()], &grid, 9).is_err());
        assert!(estimate_power_spectrum(&[0.0; 3], &grid, 4).is_err());
    }

    #[test]
    fn parseval_for_band_limited_fields() {
        let grid = build_quadrature(16, 33).unwrap();
        let spec = PowerSpectrum::parametric(SpectrumFamily::default(), 8).unwrap();
        let a = sample_coefficients(&spec, &mut substream(3, 0));
        let v = sample_on(&grid, &a);
        let s = estimate_power_spectrum(&v, &grid, 8).unwrap();
        let energy: f64 = grid.nodes.iter().zip(&v).map(|((_, w), t)| w * t * t).sum();
        assert!((s.iter().sum::<f64>() - energy).abs() < 1e-8);
    }

    #[test]
    fn mean_spectrum_matches_power_spectrum() {
        let l_max = 6;
        let grid = build_quadrature(8, 17).unwrap();
        let spec = PowerSpectrum::parametric(SpectrumFamily::default(), l_max).unwrap();
        let est = estimate_means(1000, l_max + 1, 11, |rng, out| {
            let a = sample_coefficients(&spec, rng);
            let s = estimate_power_spectrum(&sample_on(&grid, &a), &grid, l_max).unwrap();
            for (l, (o, v)) in out.iter_mut().zip(s).enumerate() {
                *o = v / (2 * l + 1) as f64;
            }
        });
        for (l, e) in est.iter().enumerate() {
            assert!(e.covers(spec.get(l), 0.0), "l={l}: {e:?} vs {}", spec.get(l));
        }
    }
}
