//! Mode dispatch and artifact writing.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use dysonlab::correlators::{
    brute_force_z, free_energy_leading, ginibre_girko_z, phi_phi_connected_cf,
    two_trace_connected_cf, CorrelatorError, HarmonicPolynomial, ObservableReport,
};
use dysonlab::equilibrium::{schwarz_residual, solve_droplet, unit_node, EquilibriumError, LaurentMap, SOLVER_TOLERANCE};
use dysonlab::growth::{detect_cusp, evolve, fit_critical_exponent, GrowthError, GrowthStatus};
use dysonlab::loggas::{
    connected_two_trace, density_estimate, loop_residual, run_chains, ChainStats, Observables,
    SamplerConfig, SamplerError,
};
use dysonlab::{Complex64, Grid2D};
use thiserror::Error;

use crate::config::{Mode, ScenarioConfig};
use crate::report::{Check, Report};
use crate::svg::{emit_svg, Polyline, SvgError, SvgStyle};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error(transparent)]
    Svg(#[from] SvgError),
}

const SCHWARZ_TOLERANCE: f64 = 1e-6;
const AREA_TOLERANCE: f64 = 1e-6;
const MOMENT_DRIFT_TOLERANCE: f64 = 1e-5;
const PARTITION_TOLERANCE: f64 = 1e-5;
const SIGMAS: f64 = 3.0;

/// Runs the scenario and writes its artifacts. Errors are recorded in the
/// returned report (which is written too) rather than propagated.
pub fn run(cfg: &ScenarioConfig) -> Report {
    let mut report = Report::new(cfg.mode);
    if let Some(s) = &cfg.sampler {
        report.seed = Some(s.seed);
        report.replicas = Some(s.replicas);
    }
    let mut out = Artifacts { dir: &cfg.out_dir, files: Vec::new() };
    let result = fs::create_dir_all(&cfg.out_dir)
        .map_err(|source| RunError::Io {
            path: cfg.out_dir.display().to_string(),
            source,
        })
        .and_then(|_| match cfg.mode {
            Mode::Droplet => droplet(cfg, &mut report, &mut out),
            Mode::Grow => grow(cfg, &mut report, &mut out),
            Mode::Sample => sample(cfg, &mut report, &mut out),
            Mode::Verify => verify(cfg, &mut report),
            Mode::Correlators => correlators(cfg, &mut report),
        });
    if let Err(e) = result {
        log::error!("{e}");
        report.fail(e.to_string());
    }
    report.files = out.files;
    report.files.push("report.json".into());
    report.finish();
    report
}

/// Writes `report.json` (and nothing else) into `dir`.
pub fn write_report(dir: &Path, report: &Report) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json())
}

struct Artifacts<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Artifacts<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let io = |source| RunError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut f = fs::File::create(&path).map_err(io)?;
        f.write_all(contents.as_bytes()).map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), RunError> {
        let mut s = header.join(",");
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn boundary(&mut self, map: &LaurentMap, t: f64, m: usize) -> Result<(), RunError> {
        let rows = (0..m).map(|j| {
            let w = unit_node(j, m);
            let z = map.eval(w);
            vec![2.0 * PI * j as f64 / m as f64, z.re, z.im, map.deriv(w).norm()]
        });
        self.csv(&boundary_file(t), &["theta", "x", "y", "abs_dz"], rows)
    }
}

pub fn boundary_file(t: f64) -> String {
    format!("boundary_{t:.6}.csv")
}

fn droplet(cfg: &ScenarioConfig, report: &mut Report, out: &mut Artifacts) -> Result<(), RunError> {
    let spec = &cfg.spec;
    let sol = solve_droplet(spec)?;
    let target_area = PI * spec.beta() * spec.t();
    report.check(Check::absolute("solver_residual", sol.residual, 0.0, SOLVER_TOLERANCE));
    report.check(Check::absolute("schwarz_residual", schwarz_residual(&sol.map, spec), 0.0, SCHWARZ_TOLERANCE));
    report.check(Check::relative("area", sol.area, target_area, AREA_TOLERANCE));
    report.quantity("conformal_radius", sol.map.r());
    report.quantity("min_abs_dz", detect_cusp(&sol.map).0);
    let boundary = sol.map.boundary(cfg.boundary_nodes);
    let radii = boundary.iter().map(|z| (z - sol.map.coeff(0)).norm());
    let (lo, hi) = radii.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    report.quantity("max_radius", hi);
    report.quantity("min_radius", lo);
    if cfg.csv {
        out.boundary(&sol.map, spec.t(), cfg.boundary_nodes)?;
    }
    if cfg.svg {
        let line = Polyline {
            label: format!("t = {}", spec.t()),
            points: boundary,
        };
        out.write("boundary.svg", &emit_svg(&[line], &SvgStyle::default())?)?;
    }
    Ok(())
}

fn grow(cfg: &ScenarioConfig, report: &mut Report, out: &mut Artifacts) -> Result<(), RunError> {
    let spec = &cfg.spec;
    let growth = cfg.growth.as_ref().expect("validated: grow has a growth section");
    let traj = evolve(spec, growth)?;
    report.check(Check::absolute("area_law", traj.max_area_error(), 0.0, AREA_TOLERANCE));
    let drift = traj
        .samples
        .iter()
        .flat_map(|s| {
            s.moments.iter().enumerate().map(|(k, m)| {
                let want = spec.coeffs().get(k).copied().unwrap_or_default();
                (m - want).norm()
            })
        })
        .fold(0.0, f64::max);
    report.check(Check::absolute("moment_drift", drift, 0.0, MOMENT_DRIFT_TOLERANCE));
    report.quantity("t_final", traj.last().t);
    report.quantity("samples", traj.samples.len() as f64);
    if let GrowthStatus::Cusp { t_lo, t_hi } = traj.status {
        report.quantity("t_critical_lo", t_lo);
        report.quantity("t_critical_hi", t_hi);
        match fit_critical_exponent(&traj) {
            Ok(fit) => {
                report.check(Check::absolute("critical_exponent", fit.slope, 0.5, 0.05));
                report.quantity("critical_exponent_stderr", fit.stderr);
            }
            Err(e) => log::warn!("no exponent fit: {e}"),
        }
    }

    if cfg.csv {
        let k = traj.samples[0].moments.len();
        let mut header = vec!["t".to_string(), "r".into(), "area".into(), "min_dz".into()];
        for j in 1..=k {
            header.push(format!("t{j}_achieved_re"));
            header.push(format!("t{j}_achieved_im"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = traj.samples.iter().map(|s| {
            let mut row = vec![s.t, s.robin_radius, s.area, s.min_boundary_dz];
            row.extend(s.moments.iter().flat_map(|m| [m.re, m.im]));
            row
        });
        out.csv("trajectory.csv", &header, rows)?;
    }

    // evenly spaced in t (near a cusp the samples crowd together)
    let (first, last) = (traj.samples[0].t, traj.last().t);
    let mut picks: Vec<usize> = (0..cfg.snapshots)
        .map(|j| {
            let want = if cfg.snapshots == 1 {
                last
            } else {
                first + (last - first) * j as f64 / (cfg.snapshots - 1) as f64
            };
            traj.samples.partition_point(|s| s.t < want).min(traj.samples.len() - 1)
        })
        .collect();
    picks.dedup_by_key(|i| boundary_file(traj.samples[*i].t));
    let mut lines = Vec::new();
    for &i in &picks {
        let s = &traj.samples[i];
        if cfg.csv {
            out.boundary(&s.map, s.t, cfg.boundary_nodes)?;
        }
        lines.push(Polyline {
            label: format!("t = {:.4}", s.t),
            points: s.map.boundary(cfg.boundary_nodes),
        });
    }
    if cfg.svg {
        out.write("boundary.svg", &emit_svg(&lines, &SvgStyle::default())?)?;
    }
    Ok(())
}

fn sampler_of(cfg: &ScenarioConfig) -> &SamplerConfig {
    cfg.sampler.as_ref().expect("validated: sampling modes have a sampler")
}

fn loop_checks(report: &mut Report, stats: &ChainStats) {
    for (k, l) in loop_residual(stats).iter().enumerate() {
        report.check(Check::complex_sigma(format!("loop_equation_{k}"), &l.estimate, 0.0, SIGMAS));
        if l.unreliable {
            log::warn!("loop probe {} had particles nearby in {:.1}% of samples", l.probe, 100.0 * l.close_fraction);
        }
    }
}

fn sample(cfg: &ScenarioConfig, report: &mut Report, out: &mut Artifacts) -> Result<(), RunError> {
    let spec = &cfg.spec;
    let grid = Grid2D::covering_disk(spec.cutoff_radius(), cfg.density_bins);
    let obs = Observables::default()
        .with_density(grid)
        .with_loop_probes(cfg.loop_probes.clone(), cfg.loop_epsilon);
    let stats = run_chains(spec, sampler_of(cfg), &obs)?;
    report.quantity("acceptance", stats.acceptance());
    report.quantity("measurements", stats.samples() as f64);
    if let Some(rho) = density_estimate(&stats) {
        report.check(Check::relative("density_normalization", rho.integral(), spec.t(), 1e-9));
        if cfg.csv {
            let rows = rho.cells().map(|(_, _, z, v)| vec![z.re, z.im, v]);
            out.csv("density.csv", &["x", "y", "rho"], rows)?;
        }
    }
    loop_checks(report, &stats);
    Ok(())
}

fn verify(cfg: &ScenarioConfig, report: &mut Report) -> Result<(), RunError> {
    let spec = &cfg.spec;
    let n = spec.particles();
    let coeffs = spec.coeffs();
    if spec.beta() == 1.0 && coeffs.len() <= 2 && n <= 3 {
        let t2 = coeffs.get(1).copied().unwrap_or_default();
        let exact = ginibre_girko_z(n, spec.hbar(), coeffs[0], t2)?;
        let quad = brute_force_z(n, spec)?;
        report.check(Check::relative("partition_function", quad, exact, PARTITION_TOLERANCE));
    } else {
        log::info!("no exact partition function for this spec; checking the loop equation only");
    }
    let obs = Observables::default().with_loop_probes(cfg.loop_probes.clone(), cfg.loop_epsilon);
    let stats = run_chains(spec, sampler_of(cfg), &obs)?;
    report.quantity("acceptance", stats.acceptance());
    loop_checks(report, &stats);
    Ok(())
}

fn correlators(cfg: &ScenarioConfig, report: &mut Report) -> Result<(), RunError> {
    let spec = &cfg.spec;
    let sol = solve_droplet(spec)?;
    report.quantity("conformal_radius", sol.map.r());
    match free_energy_leading(&sol, spec.beta()) {
        Ok(f) => report.quantity("free_energy_leading", f),
        Err(e) => log::warn!("no leading free energy: {e}"),
    }
    let mut obs = Observables::default()
        .with_trace("re_z", |z| Complex64::new(z.re, 0.0))
        .with_trace("im_z", |z| Complex64::new(z.im, 0.0));
    for (k, (a, b)) in cfg.phi_pairs.iter().enumerate() {
        obs = obs.with_phi(format!("phi_a{k}"), *a, spec).with_phi(format!("phi_b{k}"), *b, spec);
    }
    let stats = run_chains(spec, sampler_of(cfg), &obs)?;
    report.quantity("acceptance", stats.acceptance());

    for (name, f) in [("re_z", HarmonicPolynomial::re_z()), ("im_z", HarmonicPolynomial::im_z())] {
        let closed = two_trace_connected_cf(&sol, &f, &f)?;
        let est = connected_two_trace(&stats, name, name)?;
        let r = ObservableReport::new(format!("two_trace_{name}"), closed, est.value.re, est.error_re, SIGMAS);
        report.check(Check::from(&r));
    }
    for (k, (a, b)) in cfg.phi_pairs.iter().enumerate() {
        let closed = phi_phi_connected_cf(&sol.map, *a, *b, spec.hbar(), spec.beta())?;
        let est = connected_two_trace(&stats, &format!("phi_a{k}"), &format!("phi_b{k}"))?;
        let r = ObservableReport::new(format!("phi_phi_{k}"), closed, est.value.re, est.error_re, SIGMAS);
        report.check(Check::from(&r));
    }
    Ok(())
}
