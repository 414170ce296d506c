//! Acceptance gate: one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance`; pass criterion numbers after `--`
//! to run a subset. Criteria listed in `UNATTAINABLE` are still run and
//! reported, but do not fail the process.

mod support;

use std::f64::consts::{E, PI};
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use trdsphere::diffusion::{
    chapman_kolmogorov_defect, sample_trd_position, walk_bias_bound, BmWalker, DensityParams, DensitySeries,
};
use trdsphere::estimate::{
    dependence_range_diagnostic, empirical_covariance, estimate_mean, estimate_means, log_lags, Experiment, Formula,
    McEstimate,
};
use trdsphere::fields::{frac_lag_bracket, trd_equilibrium_cov, PowerSpectrum, SpectrumFamily};
use trdsphere::rng::substream;
use trdsphere::specfun::{
    caputo_derivative_numeric, gamma, lm_index, spherical_harmonics_upto,
    MittagLefflerParams,
};
use trdsphere::sphgeom::{build_quadrature, inner_product, SpherePoint};
use trdsphere::subordinate::{sample_inverse_marginal, sample_stable_increment};
use trdsphere::wigner::{gaunt_integral, orthogonality_sum, w3j, Orthogonality};

use support::{exact_3j, legendre_exact, ml_half_at_minus_one};

/// Criteria that cannot be met as stated, with the reason.
const UNATTAINABLE: &[(u32, &str)] = &[(
    7,
    "|u - 1/4pi| decays like tau^-nu, about 1e-3 at tau=50 for nu=0.7, and the point-mass series diverges at x0",
)];

/// Result of one sub-check.
struct Sub {
    label: String,
    pass: bool,
    detail: String,
}

fn sub(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Sub {
    Sub { label: label.into(), pass, detail: detail.into() }
}

/// MC sub-check at 3·stderr + bias.
fn mc_sub(label: impl Into<String>, est: McEstimate, target: f64, bias: f64) -> Sub {
    let dev = (est.value - target).abs();
    let tol = 3.0 * est.stderr + bias;
    sub(label, dev <= tol, format!("|{:.6} - {:.6}| = {dev:.2e} vs {tol:.2e}", est.value, target))
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn random_point<R: Rng>(rng: &mut R) -> SpherePoint {
    let c: f64 = rng.random_range(-1.0..1.0);
    SpherePoint::wrapped(c.acos(), rng.random_range(0.0..2.0 * PI)).unwrap()
}

fn c1_mittag_leffler() -> Vec<Sub> {
    let mut out = Vec::new();
    let zero_ok = [0.05, 0.3, 0.5, 0.7, 0.95, 1.0]
        .iter()
        .all(|&nu| MittagLefflerParams::new(nu).unwrap().eval(0.0).unwrap() == 1.0);
    out.push(sub("E(0)=1 exactly", zero_ok, ""));

    let e1 = MittagLefflerParams::new(1.0).unwrap();
    let dev = max_abs((0..=2000).map(|k| {
        let x = k as f64 * 0.01;
        (e1.eval(-x).unwrap() - (-x).exp()).abs()
    }));
    out.push(sub("|E_1(-x) - exp(-x)| on [0,20]", dev < 1e-10, format!("max {dev:.2e}")));

    let mut rng = substream(101, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let nu = rng.random_range(1e-3..1.0);
        let x: f64 = rng.random_range(0.0..50.0);
        let xn = x.powf(nu);
        let v = MittagLefflerParams::new(nu).unwrap().eval_neg(xn);
        worst = worst.max(-v).max(v - 1.0 / (1.0 + xn));
    }
    out.push(sub("0 <= E(-x^nu) <= 1/(1+x^nu) at 200 points", worst <= 0.0, format!("worst violation {worst:.2e}")));

    let v = MittagLefflerParams::new(0.5).unwrap().eval(-1.0).unwrap();
    let oracle = ml_half_at_minus_one();
    // e·erfc(1), computed with mpmath at 50 digits
    let frozen = 0.427_583_576_155_807;
    let dev = (v - oracle).abs().max((v - frozen).abs());
    out.push(sub("E_1/2(-1) vs exact series", dev < 1e-9 && (v - E * libm::erfc(1.0)).abs() < 1e-9, format!("{dev:.2e}")));
    out
}

fn c2_caputo() -> Vec<Sub> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for nu in [0.3, 0.5, 0.7, 0.9] {
        let ml = MittagLefflerParams::new(nu).unwrap();
        for (mu, t) in [(1.0, 0.5), (2.0, 1.0), (6.0, 2.0)] {
            let f = |s: f64| ml.eval_neg(mu * s.powf(nu));
            let d = caputo_derivative_numeric(f, nu, t, 64).unwrap();
            worst = worst.max((d + mu * f(t)).abs());
            n += 1;
        }
    }
    vec![sub(format!("Caputo eigenfunction, {n} combinations"), worst < 5e-4, format!("max error {worst:.2e}"))]
}

fn c3_harmonics() -> Vec<Sub> {
    let mut out = Vec::new();
    let grid = build_quadrature(16, 33).unwrap();
    let l_max = 10;
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
    let dev = max_abs((0..n * n).map(|k| (gram[k] - if k % (n + 1) == 0 { 1.0 } else { 0.0 }).norm()));
    out.push(sub("orthonormality l<=10", dev < 1e-10, format!("max {dev:.2e}")));

    let mut rng = substream(103, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (x, y) = (random_point(&mut rng), random_point(&mut rng));
        let (yx, yy) = (spherical_harmonics_upto(20, x.theta(), x.phi()), spherical_harmonics_upto(20, y.theta(), y.phi()));
        for l in 0..=20usize {
            let s: Complex64 = (-(l as i64)..=l as i64).map(|m| yx[lm_index(l, m)] * yy[lm_index(l, m)].conj()).sum();
            let rhs = (2 * l + 1) as f64 / (4.0 * PI) * legendre_exact(l as i64, inner_product(&x, &y));
            worst = worst.max((s - rhs).norm());
        }
    }
    out.push(sub("addition theorem, 50 pairs, l<=20", worst < 1e-10, format!("max {worst:.2e}")));

    let kernel = |l: usize, a: &SpherePoint, b: &SpherePoint| {
        (2 * l + 1) as f64 / (4.0 * PI) * legendre_exact(l as i64, inner_product(a, b))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (x, y) = (random_point(&mut rng), random_point(&mut rng));
        for l in 0..=6 {
            let lhs = grid.integrate(|z| kernel(l, &x, z) * kernel(l, z, &y));
            worst = worst.max((lhs - kernel(l, &x, &y)).abs());
        }
    }
    out.push(sub("reproducing kernel l<=6", worst < 1e-9, format!("max {worst:.2e}")));
    out
}

fn c4_wigner() -> Vec<Sub> {
    let mut out = Vec::new();
    let (mut worst, mut count) = (0.0f64, 0usize);
    for l1 in 0..=10i64 {
        for l2 in 0..=10i64 {
            for l3 in (l1 - l2).abs()..=(l1 + l2).min(10) {
                for m1 in -l1..=l1 {
                    for m2 in -l2..=l2 {
                        let m3 = -m1 - m2;
                        if m3.abs() > l3 {
                            continue;
                        }
                        let f = w3j(l1 as u32, l2 as u32, l3 as u32, m1 as i32, m2 as i32, m3 as i32).unwrap();
                        worst = worst.max((f - exact_3j([l1, l2, l3], [m1, m2, m3])).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    out.push(sub(format!("exact vs float, {count} symbols l<=10"), worst < 1e-12, format!("max {worst:.2e}")));

    let mut worst: f64 = 0.0;
    for l1 in 0..=6u32 {
        for l2 in 0..=6u32 {
            for big_l in 0..=12u32 {
                for xi in [big_l, big_l.saturating_sub(1), big_l + 2] {
                    for big_m in [0i32, 1, -2] {
                        let r = Orthogonality::SumOverOrders { l1, l2, big_l, big_m, xi, mu: big_m };
                        worst = worst.max((orthogonality_sum(r).unwrap() - r.expected()).abs());
                    }
                }
                let r = Orthogonality::Normalization { l1, l2, l3: big_l };
                worst = worst.max((orthogonality_sum(r).unwrap() - r.expected()).abs());
            }
            for m1 in -(l1 as i32)..=l1 as i32 {
                for m2 in -(l2 as i32)..=l2 as i32 {
                    for (mm1, mm2) in [(m1, m2), (m1, -m2), (-m1, m2)] {
                        let r = Orthogonality::Completeness { l1, l2, m1, m2, mm1, mm2 };
                        worst = worst.max((orthogonality_sum(r).unwrap() - r.expected()).abs());
                    }
                }
            }
        }
        for gamma in 0..=12u32 {
            for kappa in [0i32, 1] {
                let r = Orthogonality::AlternatingDiagonal { l: l1, gamma, kappa };
                worst = worst.max((orthogonality_sum(r).unwrap() - r.expected()).abs());
            }
        }
    }
    out.push(sub("four orthogonality relations", worst < 1e-12, format!("max {worst:.2e}")));

    let grid = build_quadrature(10, 21).unwrap();
    let ys: Vec<Vec<Complex64>> = grid.nodes.iter().map(|(p, _)| spherical_harmonics_upto(5, p.theta(), p.phi())).collect();
    let mut worst: f64 = 0.0;
    for l1 in 0..=5usize {
        for l2 in 0..=5usize {
            for l3 in 0..=5usize {
                for m1 in -(l1 as i64)..=l1 as i64 {
                    for m2 in -(l2 as i64)..=l2 as i64 {
                        let m3 = -m1 - m2;
                        if m3.unsigned_abs() as usize > l3 {
                            continue;
                        }
                        let (i, j, k) = (lm_index(l1, m1), lm_index(l2, m2), lm_index(l3, m3));
                        let q: Complex64 =
                            grid.nodes.iter().zip(&ys).map(|((_, w), y)| y[i] * y[j] * y[k] * w).sum();
                        let g = gaunt_integral(l1 as u32, m1 as i32, l2 as u32, m2 as i32, l3 as u32, m3 as i32).unwrap();
                        worst = worst.max((q.re - g).abs()).max(q.im.abs());
                    }
                }
            }
        }
    }
    out.push(sub("Gaunt vs quadrature l<=5", worst < 1e-9, format!("max {worst:.2e}")));
    out
}

fn c5_subordinator() -> Vec<Sub> {
    let mut out = Vec::new();
    let n = 1_000_000;
    let mut seed = 500;
    for nu in [0.3, 0.6, 0.9] {
        for s in [0.5, 1.0, 2.0] {
            seed += 1;
            let est = estimate_mean(n, seed, |rng| (-s * sample_stable_increment(nu, 1.0, rng).unwrap()).exp());
            out.push(mc_sub(format!("E exp(-s h_1) nu={nu} s={s}"), est, (-f64::powf(s, nu)).exp(), 0.0));
        }
    }
    for nu in [0.3, 0.6, 0.9] {
        let ml = MittagLefflerParams::new(nu).unwrap();
        for (lam, t) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)] {
            seed += 1;
            let est = estimate_mean(n, seed, |rng| (-lam * sample_inverse_marginal(nu, t, rng).unwrap()).exp());
            out.push(mc_sub(format!("E exp(-lam L_t) nu={nu} lam={lam} t={t}"), est, ml.eval_neg(lam * f64::powf(t, nu)), 0.0));
        }
        seed += 1;
        let est = estimate_mean(n, seed, |rng| sample_inverse_marginal(nu, 1.5, rng).unwrap());
        out.push(mc_sub(format!("E L_t nu={nu} t=1.5"), est, 1.5f64.powf(nu) / gamma(1.0 + nu), 0.0));
    }
    out
}

fn c6_sphere_bm() -> Vec<Sub> {
    let mut out = Vec::new();
    let times = [0.1, 0.2, 0.3, 0.4, 0.5];
    let dt = 1e-4;
    let north = SpherePoint::north_pole();
    let means = estimate_means(100_000, times.len(), 601, |rng, o| {
        let mut w = BmWalker::new(&north);
        for (slot, &t) in o.iter_mut().zip(&times) {
            w.advance_to(t, dt, rng);
            *slot = w.vector().z;
        }
    });
    // least-squares slope of −log E cos θ_t against t
    let ys: Vec<f64> = means.iter().map(|m| -m.value.ln()).collect();
    let tm = times.iter().sum::<f64>() / times.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let rate = times.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum::<f64>()
        / times.iter().map(|t| (t - tm).powi(2)).sum::<f64>();
    out.push(sub("fitted decay rate of E P_1", (rate / 2.0 - 1.0).abs() < 0.02, format!("rate {rate:.5}")));

    let x = SpherePoint::new(1.1, 0.7).unwrap();
    let tau = 1.0;
    let dt = 1e-3;
    for (nu, seed) in [(0.6, 602), (1.0, 603)] {
        let ml = MittagLefflerParams::new(nu).unwrap();
        let k = 16;
        let means = estimate_means(100_000, 2 * k, seed, |rng, o| {
            let p = sample_trd_position(&x, nu, tau, dt, rng).unwrap();
            for (i, v) in spherical_harmonics_upto(3, p.theta(), p.phi()).iter().enumerate() {
                o[2 * i] = v.re;
                o[2 * i + 1] = v.im;
            }
        });
        let y0 = spherical_harmonics_upto(3, x.theta(), x.phi());
        let mut subs = Vec::new();
        for l in 1..=3usize {
            let relax = ml.eval_neg((l * (l + 1)) as f64 * tau.powf(nu));
            for m in -(l as i64)..=l as i64 {
                let i = lm_index(l, m);
                let target = y0[i] * relax;
                let bias = walk_bias_bound(l, dt) * y0[i].norm();
                subs.push(mc_sub(format!("l={l} m={m} re"), means[2 * i], target.re, bias));
                if m != 0 {
                    subs.push(mc_sub(format!("l={l} m={m} im"), means[2 * i + 1], target.im, bias));
                }
            }
        }
        let failed: Vec<String> = subs.iter().filter(|s| !s.pass).map(|s| format!("{} {}", s.label, s.detail)).collect();
        out.push(sub(
            format!("E Y_lm(X_t) = E_nu(-mu_l t^nu) Y_lm(x), l<=3, nu={nu}"),
            failed.is_empty(),
            if failed.is_empty() { format!("{} comparisons", subs.len()) } else { failed.join("; ") },
        ));
    }
    out
}

fn c7_density() -> Vec<Sub> {
    let mut out = Vec::new();
    let grid = build_quadrature(64, 129).unwrap();
    let x0 = SpherePoint::new(0.4, 1.0).unwrap();
    let p = DensityParams::new(0.7, 0.0).unwrap().with_l_max(60);
    let s = DensitySeries::new(&p, 0.3).unwrap();
    let mass = grid.integrate(|x| s.eval_cos(inner_product(x, &x0)));
    out.push(sub("normalization nu=0.7 tau=0.3 l_max=60", (mass - 1.0).abs() < 1e-8, format!("|mass-1| {:.2e}", (mass - 1.0).abs())));

    let p = DensityParams::new(0.7, 0.0).unwrap();
    let s = DensitySeries::new(&p, 50.0).unwrap();
    let dev = max_abs(grid.nodes.iter().map(|(x, _)| (s.eval_cos(inner_product(x, &x0)) - 1.0 / (4.0 * PI)).abs()));
    out.push(sub(
        "max |u - 1/4pi| < 1e-6 at tau=50, nu=0.7",
        dev < 1e-6,
        format!("max deviation {dev:.2e} (l_max {}, tail {:.1e})", s.l_max(), s.tail_estimate),
    ));

    let x2 = SpherePoint::new(1.3, 2.0).unwrap();
    let unit = DensityParams::new(1.0, 0.0).unwrap();
    let d = chapman_kolmogorov_defect([0.0, 0.5, 1.0], &x0, &x2, &unit).unwrap();
    out.push(sub("CK defect nu=1, R=1 is 0", d.abs() < 1e-10, format!("{d:.2e}")));
    let frac = DensityParams::new(0.6, 0.0).unwrap();
    let d = chapman_kolmogorov_defect([0.0, 0.5, 1.0], &x0, &x0, &frac).unwrap();
    out.push(sub("CK defect nu=0.6, x2=x0 > 1e-3", d > 1e-3, format!("{d:.3e}")));
    let mut r = vec![1.0; 200];
    r[1] = 0.5;
    let broken = DensityParams::new(1.0, 0.0).unwrap().with_r_coeffs(r).unwrap();
    let d = chapman_kolmogorov_defect([0.0, 0.5, 1.0], &x0, &x2, &broken).unwrap();
    out.push(sub("CK defect nu=1, R_1=0.5 nonzero", d.abs() > 1e-10, format!("{d:.3e}")));
    out
}

fn c8_covariance() -> Vec<Sub> {
    let spectrum = PowerSpectrum::parametric(SpectrumFamily::default(), 20).unwrap();
    let x = SpherePoint::new(0.9, 0.4).unwrap();
    let y = SpherePoint::new(1.6, 2.1).unwrap();
    let base = Experiment {
        formula: Formula::SamePoint,
        nu: 1.0,
        t0: 0.0,
        t1: 0.0,
        t2: 0.0,
        x,
        y,
        spectrum,
        dt_internal: 1e-3,
        grid_dt: 2.5e-4,
    };
    let mut runs = Vec::new();
    for nu in [0.6, 1.0] {
        for (t0, t1) in [(0.0, 0.1), (0.0, 0.5), (1.0, 2.0)] {
            runs.push(Experiment { formula: Formula::SamePoint, nu, t0, t1, t2: t1, ..base.clone() });
        }
        for (t0, t1, t2) in [(0.0, 0.1, 0.3), (0.0, 0.5, 0.5), (0.5, 1.0, 2.0)] {
            runs.push(Experiment { formula: Formula::TwoPoint, nu, t0, t1, t2, ..base.clone() });
        }
        for (t1, t2) in [(0.1, 0.3), (0.3, 0.6), (0.5, 1.0)] {
            runs.push(Experiment { formula: Formula::FracLag, nu, t1, t2, ..base.clone() });
        }
    }
    for (t1, t2) in [(0.1, 0.2), (0.3, 0.8), (1.0, 1.5)] {
        runs.push(Experiment { formula: Formula::MarkovLag, t1, t2, ..base.clone() });
    }
    runs.iter()
        .enumerate()
        .map(|(k, e)| {
            let est = empirical_covariance(e, 100_000, 800 + k as u64).unwrap();
            mc_sub(
                format!("{} nu={} t=({},{},{})", e.formula, e.nu, e.t0, e.t1, e.t2),
                est,
                e.analytic().unwrap(),
                e.bias_bound(),
            )
        })
        .collect()
}

fn c9_dependence() -> Vec<Sub> {
    let mut out = Vec::new();
    let spectrum = PowerSpectrum::parametric(SpectrumFamily::default(), 20).unwrap();
    let lags = log_lags(1e2, 1e4, 41);
    for nu in [0.3, 0.5, 0.8] {
        let d = dependence_range_diagnostic(nu, &spectrum, &lags).unwrap();
        out.push(sub(format!("tail exponent nu={nu}"), (d.exponent + nu).abs() <= 0.05, format!("{:.4}", d.exponent)));
    }
    let mut sum = 0.0;
    for h in 1..200 {
        sum += trd_equilibrium_cov(1.0, f64::from(h)).unwrap();
    }
    let target = (1.0 / 3.0) / (E * E - 1.0);
    out.push(sub("equilibrium sum nu=1", (sum - target).abs() < 1e-9, format!("{sum:.12} vs {target:.12}")));
    let t2 = 1e3;
    let t1 = 1.0;
    for nu in [0.3, 0.5, 0.8] {
        let ml = MittagLefflerParams::new(nu).unwrap();
        for l in [1usize, 2] {
            let mu = (l * (l + 1)) as f64;
            let scaled = frac_lag_bracket(&ml, mu, t1, t2, 8) * t2.powf(nu) * gamma(1.0 - nu);
            let limit = 1.0 / mu + t1.powf(nu) / gamma(1.0 + nu);
            let rel = (scaled / limit - 1.0).abs();
            out.push(sub(format!("lag bracket asymptotic nu={nu} l={l}"), rel < 0.05, format!("relative error {rel:.3}")));
        }
    }
    out
}

fn c10_reproducibility() -> Vec<Sub> {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    let mut detail = String::new();
    for k in 0..2 {
        let path = dir.path().join(format!("report{k}.json"));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_trdsphere"))
            .args(["validate", "--suite", "all", "--seed", "42", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        detail.push_str(&format!("run {k}: exit {:?} in {:.0} s; ", status.code(), start.elapsed().as_secs_f64()));
        outputs.push(std::fs::read(&path).unwrap_or_default());
    }
    let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
    vec![sub("validate --suite all --seed 42 twice, byte-identical", same, detail)]
}

type Criterion = (u32, &'static str, fn() -> Vec<Sub>, f64);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "Mittag-Leffler", c1_mittag_leffler, 5.0),
        (2, "Caputo eigenfunction", c2_caputo, 30.0),
        (3, "harmonic identities", c3_harmonics, 20.0),
        (4, "Wigner symbols", c4_wigner, 60.0),
        (5, "subordinator laws", c5_subordinator, 180.0),
        (6, "sphere BM calibration", c6_sphere_bm, 300.0),
        (7, "density normalization and limits", c7_density, 60.0),
        (8, "covariance theorems", c8_covariance, 600.0),
        (9, "dependence range", c9_dependence, 60.0),
        (10, "reproducibility", c10_reproducibility, 1200.0),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut hard_failures = 0;
    for (id, name, run, limit_s) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let subs = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = subs.iter().all(|s| s.pass) && secs <= limit_s;
        for s in &subs {
            println!("    [{}] {}: {}", if s.pass { "ok" } else { "FAIL" }, s.label, s.detail);
        }
        let note = match UNATTAINABLE.iter().find(|(c, _)| *c == id) {
            Some((_, why)) if !pass => format!(" (known unattainable: {why})"),
            _ => String::new(),
        };
        println!(
            "criterion {id:>2} {name}: {} ({secs:.1} s, limit {limit_s:.0} s){note}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass && note.is_empty() {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        println!("{hard_failures} criterion/criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
