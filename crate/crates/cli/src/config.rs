//! Scenario files: TOML with one section per subsystem. Every section
//! rejects unknown keys and all cross-field constraints are checked here,
//! before anything runs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dysonlab::growth::{EvolveConfig, GrowthMethod};
use dysonlab::loggas::SamplerConfig;
use dysonlab::{Complex64, PotentialSpec};
use serde::{Deserialize, Deserializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config is for mode {file}, but {cli} was requested")]
    ModeMismatch { file: Mode, cli: Mode },
    #[error("[{section}] {message}")]
    Invalid { section: &'static str, message: String },
}

fn invalid(section: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        section,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sample,
    Droplet,
    Grow,
    Verify,
    Correlators,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sample => "sample",
            Mode::Droplet => "droplet",
            Mode::Grow => "grow",
            Mode::Verify => "verify",
            Mode::Correlators => "correlators",
        }
    }

    fn samples(self) -> bool {
        matches!(self, Mode::Sample | Mode::Verify | Mode::Correlators)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A complex number written as `"re,im"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexValue(pub Complex64);

impl FromStr for ComplexValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (re, im) = s
            .split_once(',')
            .ok_or_else(|| format!("expected \"re,im\", got {s:?}"))?;
        let part = |p: &str| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad number {p:?} in {s:?}"))
        };
        Ok(Self(Complex64::new(part(re)?, part(im)?)))
    }
}

impl<'de> Deserialize<'de> for ComplexValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    mode: Option<Mode>,
    potential: PotentialSection,
    sampler: Option<SamplerSection>,
    growth: Option<GrowthSection>,
    #[serde(default)]
    probes: ProbeSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialSection {
    #[serde(default = "one")]
    beta: f64,
    #[serde(default = "one")]
    t: f64,
    /// `t_1, t_2, ...`
    coeffs: Vec<ComplexValue>,
    n: Option<usize>,
    hbar: Option<f64>,
    cutoff: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplerSection {
    seed: Option<u64>,
    replicas: Option<usize>,
    burn_in_sweeps: Option<usize>,
    measure_sweeps: Option<usize>,
    proposal_scale: Option<f64>,
    thin: Option<usize>,
    auto_tune: Option<bool>,
    density_bins: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthSection {
    t0: f64,
    t1: f64,
    dt: f64,
    #[serde(default = "law_integration")]
    method: MethodName,
    #[serde(default = "ten")]
    snapshots: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MethodName {
    LawIntegration,
    MomentResolve,
}

fn law_integration() -> MethodName {
    MethodName::LawIntegration
}

fn ten() -> usize {
    10
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeSection {
    #[serde(rename = "loop")]
    loop_probes: Option<Vec<ComplexValue>>,
    loop_epsilon: Option<f64>,
    phi: Option<Vec<[ComplexValue; 2]>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    formats: Option<Vec<Format>>,
    boundary_nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_OUT_DIR: &str = "dysonlab-out";
const DEFAULT_DENSITY_BINS: usize = 128;
const DEFAULT_LOOP_EPSILON: f64 = 0.05;

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub spec: PotentialSpec,
    /// Present for the sampling modes.
    pub sampler: Option<SamplerConfig>,
    pub density_bins: usize,
    pub growth: Option<EvolveConfig>,
    pub snapshots: usize,
    pub loop_probes: Vec<Complex64>,
    pub loop_epsilon: f64,
    pub phi_pairs: Vec<(Complex64, Complex64)>,
    pub out_dir: PathBuf,
    pub csv: bool,
    pub svg: bool,
    pub boundary_nodes: usize,
}

impl ScenarioConfig {
    pub fn load(path: &std::path::Path, mode: Mode, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, mode, overrides)
    }

    pub fn parse(text: &str, mode: Mode, overrides: &Overrides) -> Result<Self, ConfigError> {
        let file: ScenarioFile = toml::from_str(text)?;
        if let Some(m) = file.mode {
            if m != mode {
                return Err(ConfigError::ModeMismatch { file: m, cli: mode });
            }
        }
        let spec = build_spec(&file.potential, mode)?;

        let sampler = if mode.samples() {
            Some(build_sampler(file.sampler.as_ref(), &spec, overrides.seed)?)
        } else if file.sampler.is_some() {
            return Err(invalid("sampler", format!("mode {mode} does not sample")));
        } else {
            None
        };
        let density_bins = file
            .sampler
            .as_ref()
            .and_then(|s| s.density_bins)
            .unwrap_or(DEFAULT_DENSITY_BINS);
        if density_bins == 0 {
            return Err(invalid("sampler", "density_bins must be positive"));
        }

        let (growth, snapshots) = match (&file.growth, mode) {
            (Some(g), Mode::Grow) => {
                let method = match g.method {
                    MethodName::LawIntegration => GrowthMethod::LawIntegration,
                    MethodName::MomentResolve => GrowthMethod::MomentResolve,
                };
                if !(g.t0 > 0.0 && g.t1 > g.t0 && g.dt > 0.0 && g.dt.is_finite()) {
                    return Err(invalid("growth", "need 0 < t0 < t1 and dt > 0"));
                }
                if g.dt > g.t1 - g.t0 {
                    return Err(invalid("growth", "dt exceeds t1 - t0"));
                }
                if g.snapshots == 0 {
                    return Err(invalid("growth", "snapshots must be positive"));
                }
                (
                    Some(EvolveConfig {
                        t0: g.t0,
                        t1: g.t1,
                        dt: g.dt,
                        method,
                    }),
                    g.snapshots,
                )
            }
            (None, Mode::Grow) => return Err(invalid("growth", "mode grow needs a [growth] section")),
            (Some(_), _) => return Err(invalid("growth", format!("mode {mode} does not grow"))),
            (None, _) => (None, 0),
        };

        let loop_probes = match &file.probes.loop_probes {
            Some(p) => p.iter().map(|c| c.0).collect(),
            None => dysonlab::loggas::Observables::default_loop_probes(&spec, 8),
        };
        let loop_epsilon = file.probes.loop_epsilon.unwrap_or(DEFAULT_LOOP_EPSILON);
        if !(loop_epsilon > 0.0 && loop_epsilon.is_finite()) {
            return Err(invalid("probes", "loop_epsilon must be positive"));
        }
        let phi_pairs: Vec<(Complex64, Complex64)> = match &file.probes.phi {
            Some(p) => p.iter().map(|[a, b]| (a.0, b.0)).collect(),
            None => {
                let half = Complex64::new(2.0 * spec.hbar().sqrt(), 0.0);
                vec![(half, -half)]
            }
        };
        if phi_pairs.iter().any(|(a, b)| a == b) {
            return Err(invalid("probes", "phi pairs need two distinct points"));
        }

        let formats = file.output.formats.clone().unwrap_or_else(|| vec![Format::Csv]);
        let boundary_nodes = file.output.boundary_nodes.unwrap_or(512);
        if boundary_nodes < 8 {
            return Err(invalid("output", "boundary_nodes must be at least 8"));
        }
        let out_dir = overrides
            .out
            .clone()
            .or_else(|| file.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

        Ok(Self {
            mode,
            spec,
            sampler,
            density_bins,
            growth,
            snapshots,
            loop_probes,
            loop_epsilon,
            phi_pairs,
            out_dir,
            csv: formats.contains(&Format::Csv),
            svg: formats.contains(&Format::Svg),
            boundary_nodes,
        })
    }
}

fn build_spec(p: &PotentialSection, mode: Mode) -> Result<PotentialSpec, ConfigError> {
    let coeffs: Vec<Complex64> = p.coeffs.iter().map(|c| c.0).collect();
    let err = |e: dysonlab::PotentialError| invalid("potential", e.to_string());
    let spec = match (p.n, p.hbar) {
        (Some(_), Some(_)) => return Err(invalid("potential", "give either n or hbar, not both")),
        (Some(n), None) => PotentialSpec::with_particles(p.beta, p.t, n, coeffs).map_err(err)?,
        (None, Some(h)) if !mode.samples() => PotentialSpec::new(p.beta, h, p.t, coeffs).map_err(err)?,
        (None, _) if mode.samples() => {
            return Err(invalid("potential", format!("mode {mode} needs the particle number n")))
        }
        // hbar only matters for sampling; pick N = 100
        (None, _) => PotentialSpec::new(p.beta, p.t / 100.0, p.t, coeffs).map_err(err)?,
    };
    let spec = match p.cutoff {
        Some(r) => spec.with_cutoff(r).map_err(err)?,
        None => spec,
    };
    if mode.samples() {
        spec.check_confinement().map_err(err)?;
    }
    Ok(spec)
}

fn build_sampler(
    s: Option<&SamplerSection>,
    spec: &PotentialSpec,
    seed: Option<u64>,
) -> Result<SamplerConfig, ConfigError> {
    let empty = SamplerSection::default();
    let s = s.unwrap_or(&empty);
    let base = SamplerConfig::for_spec(spec, seed.or(s.seed).unwrap_or(0));
    let cfg = SamplerConfig {
        replicas: s.replicas.unwrap_or(base.replicas),
        burn_in_sweeps: s.burn_in_sweeps.unwrap_or(base.burn_in_sweeps),
        measure_sweeps: s.measure_sweeps.unwrap_or(base.measure_sweeps),
        proposal_scale: s.proposal_scale.unwrap_or(base.proposal_scale),
        thin: s.thin.unwrap_or(base.thin),
        auto_tune: s.auto_tune.unwrap_or(base.auto_tune),
        ..base
    };
    cfg.validate(spec).map_err(|e| invalid("sampler", e.to_string()))?;
    Ok(cfg)
}
