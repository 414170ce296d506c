//! Long- versus short-range dependence of the same-point covariance.

use serde::Serialize;

use crate::error::{argument, Result};
use crate::fields::PowerSpectrum;
use crate::specfun::MittagLefflerParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DependenceVerdict {
    LongRange,
    ShortRange,
    DegenerateConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceDiagnostic {
    /// Least-squares slope of log covariance against log lag.
    pub exponent: f64,
    pub verdict: DependenceVerdict,
    /// (lag, covariance) pairs with the constant l=0 term removed.
    pub curve: Vec<(f64, f64)>,
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

/// Fits the decay of lag ↦ Σ_{l≥1} ((2l+1)/4π)·C_l·E_ν(−μ_l h^ν) over
/// `h_grid`, which must span at least two decades.
///
/// The verdict is long-range when the fitted exponent lies in (−1, 0), so
/// the covariances are not summable, and short-range when the decay is
/// summable or steepens across the grid.
pub fn dependence_range_diagnostic(nu: f64, spectrum: &PowerSpectrum, h_grid: &[f64]) -> Result<DependenceDiagnostic> {
    let ml = MittagLefflerParams::new(nu)?;
    let (lo, hi) = h_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &h| (lo.min(h), hi.max(h)));
    if h_grid.len() < 3 || !(lo > 0.0) || !(hi / lo >= 100.0) || !hi.is_finite() {
        return argument(format!(
            "lag grid must hold at least 3 positive lags spanning two decades, got [{lo}, {hi}]"
        ));
    }
    let c = spectrum.values();
    let curve: Vec<(f64, f64)> = h_grid
        .iter()
        .map(|&h| {
            let hn = h.powf(nu);
            let v = c
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, c)| **c != 0.0)
                .map(|(l, c)| {
                    let mu = (l * (l + 1)) as f64;
                    (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * c * ml.eval_neg(mu * hn)
                })
                .sum();
            (h, v)
        })
        .collect();
    if c.iter().skip(1).all(|c| *c == 0.0) {
        return Ok(DependenceDiagnostic { exponent: 0.0, verdict: DependenceVerdict::DegenerateConstant, curve });
    }
    let logs: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(h, v)| (h.ln(), v.ln()))
        .collect();
    if logs.len() < 3 {
        // underflow: faster than any power
        return Ok(DependenceDiagnostic {
            exponent: f64::NEG_INFINITY,
            verdict: DependenceVerdict::ShortRange,
            curve,
        });
    }
    let exponent = slope(&logs);
    let half = logs.len() / 2;
    let steepening = slope(&logs[half..]) < slope(&logs[..=half]) - 0.5;
    let verdict = if steepening || logs.len() < curve.len() || exponent <= -1.0 {
        DependenceVerdict::ShortRange
    } else {
        DependenceVerdict::LongRange
    };
    Ok(DependenceDiagnostic { exponent, verdict, curve })
}

/// `n` log-spaced lags from `lo` to `hi`.
pub fn log_lags(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::SpectrumFamily;

    fn spec() -> PowerSpectrum {
        PowerSpectrum::parametric(SpectrumFamily::default(), 20).unwrap()
    }

    #[test]
    fn fractional_clock_is_long_range() {
        let d = dependence_range_diagnostic(0.5, &spec(), &log_lags(1e2, 1e4, 21)).unwrap();
        assert!((d.exponent + 0.5).abs() < 0.05, "{}", d.exponent);
        assert_eq!(d.verdict, DependenceVerdict::LongRange);
    }

    #[test]
    fn brownian_clock_is_short_range() {
        let d = dependence_range_diagnostic(1.0, &spec(), &log_lags(1e-2, 10.0, 21)).unwrap();
        assert_eq!(d.verdict, DependenceVerdict::ShortRange);
        let d = dependence_range_diagnostic(1.0, &spec(), &log_lags(1e2, 1e4, 21)).unwrap();
        assert_eq!(d.verdict, DependenceVerdict::ShortRange);
    }

    #[test]
    fn monopole_only_is_degenerate() {
        let flat = PowerSpectrum::monopole(1.0, 10).unwrap();
        let d = dependence_range_diagnostic(0.5, &flat, &log_lags(1.0, 1e3, 10)).unwrap();
        assert_eq!(d.verdict, DependenceVerdict::DegenerateConstant);
        assert_eq!(d.exponent, 0.0);
    }

    #[test]
    fn narrow_grid_rejected() {
        assert!(dependence_range_diagnostic(0.5, &spec(), &log_lags(1.0, 50.0, 10)).is_err());
    }
}
