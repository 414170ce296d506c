//! Subcommand handlers.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::output::{pretty, write_meta, write_output, Cell, RunMeta, Sink, Table};
use super::*;
use crate::diffusion::{sample_trd_position, simulate_trd, DensityParams, DensitySeries, TrdParams};
use crate::estimate::{empirical_covariance, run_validation_suite, Experiment};
use crate::fields::{evaluate_field, sample_coefficients, PowerSpectrum, SpectrumFamily};
use crate::rng::substream;
use crate::specfun::MittagLefflerParams;
use crate::sphgeom::{build_quadrature, inner_product, SpherePoint};
use crate::subordinate::{sample_inverse_path, StableParams};
use crate::wigner::w3j;

/// Parameters to echo into the metadata sidecar.
pub struct Echo {
    pub command: String,
    pub parameters: Map<String, Value>,
}

impl Echo {
    fn meta(self, seed: Option<u64>, extra: Map<String, Value>) -> RunMeta {
        RunMeta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            parameters: self.parameters,
            seed,
            extra,
        }
    }
}

fn range(param: &'static str, bound: &'static str, value: impl ToString) -> CliError {
    CliError::Range { param, bound, value: value.to_string() }
}

fn check_nu(nu: f64) -> Result<(), CliError> {
    if nu > 0.0 && nu <= 1.0 {
        Ok(())
    } else {
        Err(range("nu", "(0,1]", nu))
    }
}

fn check_positive(param: &'static str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(range(param, "(0,inf)", v))
    }
}

fn check_count(param: &'static str, n: usize) -> Result<(), CliError> {
    if n >= 1 {
        Ok(())
    } else {
        Err(range(param, "[1,inf)", n))
    }
}

fn point(theta_name: &'static str, theta: f64, phi_name: &'static str, phi: f64) -> Result<SpherePoint, CliError> {
    if !(0.0..=PI).contains(&theta) {
        return Err(range(theta_name, "[0,pi]", theta));
    }
    if !phi.is_finite() {
        return Err(range(phi_name, "finite reals", phi));
    }
    Ok(SpherePoint::wrapped(theta, phi)?)
}

fn grid_sizes(g: &[usize]) -> Result<(usize, usize), CliError> {
    match g {
        [a, b] if *a >= 1 && *b >= 1 => Ok((*a, *b)),
        _ => Err(range("grid", "two positive sizes n_theta,n_phi", format!("{g:?}"))),
    }
}

fn time_grid(t0: f64, t_grid: &[f64]) -> Result<Vec<f64>, CliError> {
    let ok = !t_grid.is_empty()
        && t0 >= 0.0
        && t_grid.iter().all(|t| t.is_finite() && *t >= t0)
        && t_grid.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(range("t-grid", "strictly increasing times >= t0 >= 0", format!("{t_grid:?}")));
    }
    let mut g = Vec::with_capacity(t_grid.len() + 1);
    if t_grid[0] > t0 {
        g.push(t0);
    }
    g.extend_from_slice(t_grid);
    Ok(g)
}

fn spectrum(s: &SpectrumArgs) -> Result<PowerSpectrum, CliError> {
    check_positive("amplitude", s.amplitude)?;
    if !(s.alpha > 2.0) {
        return Err(range("alpha", "(2,inf)", s.alpha));
    }
    Ok(PowerSpectrum::parametric(SpectrumFamily { amplitude: s.amplitude, alpha: s.alpha }, s.l_max)?)
}

fn emit(table: &Table, out: &OutputArgs, meta: RunMeta) -> Result<(), CliError> {
    let sink = Sink { path: out.out.clone() };
    write_output(table, out.format, &sink)?;
    write_meta(&sink, &meta)
}

pub fn dispatch(cmd: &Command, echo: Echo) -> Result<(), CliError> {
    match cmd {
        Command::Ml(a) => ml(a, echo),
        Command::Wigner3j(a) => wigner(a, echo),
        Command::Simulate(SimulateCommand::Subordinator(a)) => subordinator(a, echo),
        Command::Simulate(SimulateCommand::Trd(a)) => trd(a, echo),
        Command::Density(a) => density(a, echo),
        Command::Sample(SampleCommand::Field(a)) => field(a, echo),
        Command::Covariance(CovarianceCommand::Analytic(a)) => covariance_analytic(a, echo),
        Command::Covariance(CovarianceCommand::Empirical(a)) => covariance_empirical(a, echo),
        Command::Validate(a) => validate(a, echo),
    }
}

fn ml(a: &MlArgs, echo: Echo) -> Result<(), CliError> {
    check_nu(a.nu)?;
    let p = MittagLefflerParams::new(a.nu)?;
    let mut t = Table::new(&["nu", "z", "value"]);
    for &z in &a.z {
        if !(z <= 0.0) {
            return Err(range("z", "(-inf,0]", z));
        }
        t.push(vec![a.nu.into(), z.into(), p.eval(z)?.into()]);
    }
    emit(&t, &a.output, echo.meta(None, Map::new()))
}

fn wigner(a: &WignerArgs, echo: Echo) -> Result<(), CliError> {
    let v = w3j(a.l1, a.l2, a.l3, a.m1, a.m2, a.m3)?;
    let mut t = Table::new(&["l1", "l2", "l3", "m1", "m2", "m3", "value"]);
    let ints = [a.l1 as i64, a.l2 as i64, a.l3 as i64, a.m1 as i64, a.m2 as i64, a.m3 as i64];
    t.push(ints.iter().map(|&i| Cell::Int(i)).chain([Cell::Real(v)]).collect());
    emit(&t, &a.output, echo.meta(None, Map::new()))
}

fn subordinator(a: &SubordinatorArgs, echo: Echo) -> Result<(), CliError> {
    if !(a.nu > 0.0 && a.nu < 1.0) {
        return Err(range("nu", "(0,1)", a.nu));
    }
    check_positive("grid-dt", a.grid_dt)?;
    check_count("paths", a.paths)?;
    let grid = time_grid(0.0, &a.t_grid)?;
    let params = StableParams::new(a.nu, a.seed, a.grid_dt)?;
    let paths = (0..a.paths as u64)
        .into_par_iter()
        .map(|id| sample_inverse_path(&params, &grid, &mut substream(a.seed, id)))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut t = Table::new(&["path_id", "t", "inverse_time"]);
    for (id, p) in paths.iter().enumerate() {
        for (time, l) in p.t_grid.iter().zip(&p.l_values) {
            t.push(vec![id.into(), (*time).into(), (*l).into()]);
        }
    }
    emit(&t, &a.output, echo.meta(Some(a.seed), Map::new()))
}

fn trd(a: &TrdArgs, echo: Echo) -> Result<(), CliError> {
    check_nu(a.nu)?;
    check_positive("dt", a.dt)?;
    check_positive("grid-dt", a.grid_dt)?;
    check_count("paths", a.paths)?;
    let x0 = point("x0-theta", a.x0_theta, "x0-phi", a.x0_phi)?;
    let grid = time_grid(a.t0, &a.t_grid)?;
    let params = TrdParams::new(a.nu, a.grid_dt, a.dt)?;
    let paths = (0..a.paths as u64)
        .into_par_iter()
        .map(|id| simulate_trd(&x0, &grid, &params, a.seed, id))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut t = Table::new(&["path_id", "t", "theta", "phi"]);
    for (id, p) in paths.iter().enumerate() {
        for (time, x) in p.t_grid.iter().zip(&p.points) {
            t.push(vec![id.into(), (*time).into(), x.theta().into(), x.phi().into()]);
        }
    }
    emit(&t, &a.output, echo.meta(Some(a.seed), Map::new()))
}

fn density(a: &DensityArgs, echo: Echo) -> Result<(), CliError> {
    check_nu(a.nu)?;
    if !(a.t0 >= 0.0 && a.t0.is_finite()) {
        return Err(range("t0", "[0,inf)", a.t0));
    }
    if !(a.t > a.t0 && a.t.is_finite()) {
        return Err(range("t", "(t0,inf)", a.t));
    }
    let x0 = point("x0-theta", a.x0_theta, "x0-phi", a.x0_phi)?;
    let (nt, np) = grid_sizes(&a.grid)?;
    let mut params = DensityParams::new(a.nu, a.t0)?;
    if a.l_max != "auto" {
        let l: usize = a.l_max.parse().map_err(|_| range("l-max", "a nonnegative integer or auto", &a.l_max))?;
        params = params.with_l_max(l);
    }
    let series = DensitySeries::new(&params, a.t)?;
    let grid = build_quadrature(nt, np)?;
    let mut t = Table::new(&["theta", "phi", "u"]);
    for (x, _) in &grid.nodes {
        // truncation can leave tiny negative values; they are clamped here only
        let u = series.eval_cos(inner_product(x, &x0)).max(0.0);
        t.push(vec![x.theta().into(), x.phi().into(), u.into()]);
    }
    let mut extra = Map::new();
    extra.insert("l_max_used".into(), json!(series.l_max()));
    extra.insert("tail_estimate".into(), json!(series.tail_estimate));
    emit(&t, &a.output, echo.meta(None, extra))
}

fn field(a: &FieldArgs, echo: Echo) -> Result<(), CliError> {
    check_nu(a.nu)?;
    check_positive("dt", a.dt)?;
    if !(a.t >= 0.0 && a.t.is_finite()) {
        return Err(range("t", "[0,inf)", a.t));
    }
    let (nt, np) = grid_sizes(&a.grid)?;
    let spec = spectrum(&a.spectrum)?;
    let coeffs = sample_coefficients(&spec, &mut substream(a.seed, 0));
    let grid = build_quadrature(nt, np)?;
    let values = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(k, (x, _))| {
            // each node drives its own diffusion
            let mut rng = substream(a.seed, 1 + k as u64);
            let p = sample_trd_position(x, a.nu, a.t, a.dt, &mut rng)?;
            evaluate_field(&coeffs, &p)
        })
        .collect::<crate::Result<Vec<f64>>>()?;
    let mut t = Table::new(&["theta", "phi", "value"]);
    for ((x, _), v) in grid.nodes.iter().zip(values) {
        t.push(vec![x.theta().into(), x.phi().into(), v.into()]);
    }
    emit(&t, &a.output, echo.meta(Some(a.seed), Map::new()))
}

fn experiment(a: &CovarianceArgs, dt: f64, grid_dt: f64) -> Result<Experiment, CliError> {
    check_nu(a.nu)?;
    if !(a.t0 >= 0.0 && a.t0 <= a.t1 && a.t1 <= a.t2 && a.t2.is_finite()) {
        return Err(range("t0,t1,t2", "0 <= t0 <= t1 <= t2 < inf", format!("{},{},{}", a.t0, a.t1, a.t2)));
    }
    Ok(Experiment {
        formula: a.formula()?,
        nu: a.nu,
        t0: a.t0,
        t1: a.t1,
        t2: a.t2,
        x: point("x-theta", a.x_theta, "x-phi", a.x_phi)?,
        y: point("y-theta", a.y_theta, "y-phi", a.y_phi)?,
        spectrum: spectrum(&a.spectrum)?,
        dt_internal: dt,
        grid_dt,
    })
}

const COV_COLUMNS: [&str; 5] = ["formula", "nu", "t0", "t1", "t2"];

fn cov_prefix(e: &Experiment) -> Vec<Cell> {
    vec![e.formula.name().into(), e.nu.into(), e.t0.into(), e.t1.into(), e.t2.into()]
}

fn covariance_analytic(a: &CovarianceArgs, echo: Echo) -> Result<(), CliError> {
    let e = experiment(a, 1e-3, 1e-3)?;
    let mut t = Table::new(&[&COV_COLUMNS[..], &["value"]].concat());
    let mut row = cov_prefix(&e);
    row.push(e.analytic()?.into());
    t.push(row);
    emit(&t, &a.output, echo.meta(None, Map::new()))
}

fn covariance_empirical(a: &EmpiricalArgs, echo: Echo) -> Result<(), CliError> {
    check_positive("dt", a.dt)?;
    check_positive("grid-dt", a.grid_dt)?;
    if a.paths < 2 {
        return Err(range("paths", "[2,inf)", a.paths));
    }
    let e = experiment(&a.covariance, a.dt, a.grid_dt)?;
    let est = empirical_covariance(&e, a.paths, a.seed)?;
    let columns = [&COV_COLUMNS[..], &["estimate", "stderr", "n", "analytic", "bias_bound"]].concat();
    let mut t = Table::new(&columns);
    let mut row = cov_prefix(&e);
    row.extend([est.value.into(), est.stderr.into(), est.n.into(), e.analytic()?.into(), e.bias_bound().into()]);
    t.push(row);
    emit(&t, &a.covariance.output, echo.meta(Some(a.seed), Map::new()))
}

fn validate(a: &ValidateArgs, echo: Echo) -> Result<(), CliError> {
    check_positive("budget", a.budget)?;
    let report = run_validation_suite(&a.suite, a.seed, a.budget)?;
    let sink = Sink { path: a.out.clone() };
    sink.write_bytes(pretty(&report).as_bytes())?;
    let failed = report.failures().count();
    let mut extra = Map::new();
    extra.insert("runtime_s".into(), json!(report.runtime.as_secs_f64()));
    extra.insert("checks".into(), json!(report.checks.len()));
    extra.insert("failed".into(), json!(failed));
    write_meta(&sink, &echo.meta(Some(a.seed), extra))?;
    for c in report.failures() {
        eprintln!("FAIL {}: estimate {} analytic {} tolerance {}", c.name, c.estimate, c.analytic, c.tolerance);
    }
    eprintln!(
        "{}: {} checks, {} failed, {:.1} s",
        report.suite,
        report.checks.len(),
        failed,
        report.runtime.as_secs_f64()
    );
    if failed > 0 {
        Err(CliError::SuiteFailed(failed))
    } else {
        Ok(())
    }
}
