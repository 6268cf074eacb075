//! Command-line front end.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::averaged::{pav_quadrature_oracle, pav_table};
use crate::config::{config_hash, parse_config, parse_polarization, ExperimentConfig};
use crate::correlation::{
    fringe_visibility, landscape, linspace, polarization_scan, rate, rate_polarization_insensitive,
    DetectionEvent, LandscapeGrid, MeanTime,
};
use crate::error::{Error, Result};
use crate::network::{check_unitary, parse_matrix_json, Interferometer, NetworkSpec};
use crate::output::{grid_artifact, pav_artifact, Format, Metadata, OutputArtifact, Payload};
use crate::permanent::{permanent_with, Method};
use crate::sampling::{empirical_check, Sampler, SamplerConfig};
use crate::types::{JonesVector, PortSample};

#[derive(Debug, Parser)]
#[command(
    name = "mbci",
    version,
    about = "Multiboson correlation interferometry simulator"
)]
pub struct Cli {
    /// Output format; CSV by default, JSON lines for `sample`.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Permanent of an interferometer matrix.
    Permanent(PermanentArgs),
    /// N-fold detection rate at given times and polarizations.
    Rate(RateArgs),
    /// Three-photon landscape over (τ21, τ32).
    Landscape(LandscapeArgs),
    /// Equal-time polarization correlation scan over (α, β).
    Polscan(PolscanArgs),
    /// Averaged probabilities of all collision-free output samples.
    Pav(PavArgs),
    /// Exact samples of complete detection events.
    Sample(SampleArgs),
    /// Validate a config and report its diagnostics.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ryser,
    Naive,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct MatrixSource {
    /// Named builder: beamsplitter, tritter_fig2a, fourier:M, haar:M:seed.
    #[arg(long)]
    pub builder: Option<String>,
    /// JSON file holding [[[re, im], ...], ...].
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PermanentArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long, value_enum, default_value_t = MethodArg::Ryser)]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    pub config: PathBuf,
    /// Detection times, one per port, in units of 1/Δω_ref.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub times: Vec<f64>,
    /// Detected polarizations, one per port; summed over the config basis if omitted.
    #[arg(long, value_delimiter = ',')]
    pub pols: Option<Vec<String>>,
    /// 1-based output ports; defaults to the config's.
    #[arg(long, value_delimiter = ',')]
    pub ports: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    pub config: PathBuf,
    /// Half-width of both relative-time axes.
    #[arg(long, default_value_t = 6.0)]
    pub range: f64,
    #[arg(long, default_value_t = 241)]
    pub steps: usize,
    /// `marginal` or `fixed:<t>`.
    #[arg(long, default_value = "marginal", allow_hyphen_values = true)]
    pub mean_time: String,
    #[arg(long, value_delimiter = ',')]
    pub ports: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct PolscanArgs {
    pub config: PathBuf,
    /// Points per angle axis over [0, π].
    #[arg(long, default_value_t = 181)]
    pub steps: usize,
    /// Common detection time; defaults to the centre of the photon arrivals.
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<f64>,
    /// Polarization projected by the first detector.
    #[arg(long, default_value = "H")]
    pub trigger: String,
    #[arg(long, value_delimiter = ',')]
    pub ports: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct PavArgs {
    pub config: PathBuf,
    /// Add a column from direct time quadrature (N ≤ 3).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append a χ² test of the output-sample frequencies to the metadata.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub max_rejections: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub config: PathBuf,
}

fn outputs_for(cfg: &ExperimentConfig, ports: &Option<Vec<usize>>) -> Result<PortSample> {
    match ports {
        Some(p) => PortSample::from_one_based(p, cfg.network.modes()),
        None => cfg.default_outputs(),
    }
}

fn metadata(command: &str, cfg: &ExperimentConfig, units: &str) -> Metadata {
    Metadata::new(command, &cfg.hash, units).note("network", &cfg.network_spec)
}

fn labels(p: &PortSample) -> String {
    p.one_based()
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Executes one command and returns its artifact.
pub fn run(cli: &Cli) -> Result<OutputArtifact> {
    match &cli.command {
        Command::Permanent(a) => run_permanent(a),
        Command::Rate(a) => run_rate(a),
        Command::Landscape(a) => run_landscape(a),
        Command::Polscan(a) => run_polscan(a),
        Command::Pav(a) => run_pav(a),
        Command::Sample(a) => run_sample(a),
        Command::Check(a) => run_check(a),
    }
}

fn run_permanent(a: &PermanentArgs) -> Result<OutputArtifact> {
    let (label, hash, u) = match (&a.source.builder, &a.source.matrix) {
        (Some(b), _) => {
            let spec: NetworkSpec = b.parse()?;
            let u = Interferometer::from_spec(&spec, Path::new("."), 1e-10)?;
            (
                spec.to_string(),
                config_hash(spec.to_string().as_bytes()),
                u.matrix().clone(),
            )
        }
        (None, Some(path)) => {
            let bytes = std::fs::read(path)?;
            let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse(e.to_string()))?;
            (
                path.display().to_string(),
                config_hash(&bytes),
                parse_matrix_json(&text)?,
            )
        }
        (None, None) => {
            return Err(Error::Validation(
                "one of --builder or --matrix is required".into(),
            ))
        }
    };
    let method = match a.method {
        MethodArg::Ryser => Method::Ryser,
        MethodArg::Naive => Method::Naive,
    };
    let start = Instant::now();
    let r = permanent_with(u.view(), method)?;
    eprintln!(
        "permanent: n = {}, {} in {:.3?}",
        r.n,
        r.method,
        start.elapsed()
    );
    Ok(OutputArtifact {
        metadata: Metadata::new("permanent", &hash, "dimensionless").note("matrix", label),
        payload: Payload::Scalar(vec![
            ("re".into(), json!(r.value.re)),
            ("im".into(), json!(r.value.im)),
            ("abs".into(), json!(r.value.norm())),
            ("abs_sqr".into(), json!(r.value.norm_sqr())),
            ("n".into(), json!(r.n)),
            ("method".into(), json!(r.method.to_string())),
        ]),
    })
}

fn run_rate(a: &RateArgs) -> Result<OutputArtifact> {
    let cfg = parse_config(&a.config)?;
    let exp = cfg.experiment()?;
    let outputs = outputs_for(&cfg, &a.ports)?;
    if a.times.len() != outputs.len() {
        return Err(Error::Validation(format!(
            "--times: {} values for {} ports",
            a.times.len(),
            outputs.len()
        )));
    }
    // times and polarizations are given in the order the ports were listed
    let listed: Vec<usize> = match &a.ports {
        Some(p) => p.clone(),
        None => outputs.one_based(),
    };
    let mut order: Vec<usize> = (0..listed.len()).collect();
    order.sort_by_key(|&i| listed[i]);
    let times: Vec<f64> = order.iter().map(|&i| a.times[i]).collect();
    let units = format!("delta_omega_ref^{}", outputs.len());
    let (value, mode) = match &a.pols {
        Some(pols) => {
            if pols.len() != outputs.len() {
                return Err(Error::Validation(format!(
                    "--pols: {} values for {} ports",
                    pols.len(),
                    outputs.len()
                )));
            }
            let pols = order
                .iter()
                .map(|&i| parse_polarization(&pols[i]))
                .collect::<Result<Vec<JonesVector>>>()?;
            (
                rate(&exp, &DetectionEvent::new(outputs.clone(), times, pols)?)?,
                "resolved",
            )
        }
        None => (
            rate_polarization_insensitive(&exp, &outputs, &times, &cfg.basis)?,
            "polarization-summed",
        ),
    };
    Ok(OutputArtifact {
        metadata: metadata("rate", &cfg, &units)
            .note("ports", labels(&outputs))
            .note("polarization", mode),
        payload: Payload::Scalar(vec![("rate".into(), json!(value))]),
    })
}

fn run_landscape(a: &LandscapeArgs) -> Result<OutputArtifact> {
    let cfg = parse_config(&a.config)?;
    let exp = cfg.experiment()?;
    let outputs = outputs_for(&cfg, &a.ports)?;
    if !(a.range.is_finite() && a.range > 0.0) || a.steps < 2 {
        return Err(Error::Validation(
            "--range must be positive and --steps at least 2".into(),
        ));
    }
    let mode: MeanTime = a.mean_time.parse()?;
    let grid = landscape(
        &exp,
        &outputs,
        &LandscapeGrid::symmetric(a.range, a.steps),
        &mode,
        &cfg.basis,
    )?;
    let (i, j) = grid.nearest(0.0, 0.0);
    let units = if matches!(mode, MeanTime::Fixed(_)) {
        "delta_omega_ref^3"
    } else {
        "delta_omega_ref^2"
    };
    let meta = metadata("landscape", &cfg, units)
        .note("ports", labels(&outputs))
        .note("mean_time", &a.mean_time)
        .note_f64("max", grid.max())
        .note_f64("center_over_max", grid.get(i, j) / grid.max());
    Ok(grid_artifact(meta, grid))
}

fn run_polscan(a: &PolscanArgs) -> Result<OutputArtifact> {
    let cfg = parse_config(&a.config)?;
    let exp = cfg.experiment()?;
    let outputs = outputs_for(&cfg, &a.ports)?;
    if a.steps < 2 {
        return Err(Error::Validation("--steps must be at least 2".into()));
    }
    let trigger = parse_polarization(&a.trigger)?;
    let t = a.time.unwrap_or_else(|| exp.time_window(0.0).0);
    let angles = linspace(0.0, std::f64::consts::PI, a.steps);
    let grid = polarization_scan(&exp, &outputs, t, &trigger, &angles, &angles)?;
    let meta = metadata("polscan", &cfg, "delta_omega_ref^3")
        .note("ports", labels(&outputs))
        .note_f64("time", t)
        .note("trigger", &a.trigger)
        .note_f64("visibility", fringe_visibility(&grid.values));
    Ok(grid_artifact(meta, grid))
}

fn run_pav(a: &PavArgs) -> Result<OutputArtifact> {
    let cfg = parse_config(&a.config)?;
    let exp = cfg.experiment()?;
    let g = exp.gram(&cfg.tolerances)?;
    let table = pav_table(&cfg.network, &cfg.inputs, &g)?;
    let oracle = if a.oracle {
        Some(
            table
                .entries
                .iter()
                .map(|(d, _)| pav_quadrature_oracle(&exp, d, &cfg.basis, &cfg.tolerances))
                .collect::<Result<Vec<f64>>>()?,
        )
    } else {
        None
    };
    Ok(pav_artifact(
        metadata("pav", &cfg, "probability"),
        &table,
        oracle.as_deref(),
    ))
}

fn run_sample(a: &SampleArgs) -> Result<OutputArtifact> {
    let cfg = parse_config(&a.config)?;
    let mut sc = SamplerConfig::new(cfg.experiment()?, a.seed);
    sc.basis = cfg.basis;
    sc.tolerances = cfg.tolerances;
    if let Some(m) = a.max_rejections {
        sc.max_rejections_per_sample = m;
    }
    let sampler = Sampler::new(sc)?;
    let start = Instant::now();
    let batch = sampler.sample_batch(a.count)?;
    eprintln!(
        "sample: {} events, acceptance {:.4}, {:.3?}",
        a.count,
        batch.acceptance_rate(),
        start.elapsed()
    );
    let mut meta = metadata("sample", &cfg, "delta_omega_ref^-1 (times)")
        .note("seed", a.seed)
        .note("count", a.count)
        .note_f64("collision_free_mass", sampler.collision_free_mass())
        .note("proposals", batch.proposals);
    if a.check {
        let r = empirical_check(&batch, sampler.table())?;
        meta = meta
            .note_f64("chi2", r.statistic)
            .note("chi2_dof", r.dof)
            .note_f64("chi2_p_value", r.p_value);
    }
    Ok(OutputArtifact {
        metadata: meta,
        payload: Payload::Events(batch.events),
    })
}

fn run_check(a: &CheckArgs) -> Result<OutputArtifact> {
    let cfg = parse_config(&a.config)?;
    let exp = cfg.experiment()?;
    let unitarity = check_unitary(cfg.network.matrix().view(), cfg.tolerances.unitarity_tol)?;
    let g = exp.gram(&cfg.tolerances)?;
    let g_min = g.min_eigenvalue();
    let mut items = vec![
        ("modes".to_string(), json!(cfg.network.modes())),
        ("photons".into(), json!(exp.photon_count())),
        ("inputs".into(), json!(labels(&cfg.inputs))),
        ("outputs".into(), json!(labels(&cfg.default_outputs()?))),
        ("delta_t".into(), json!(cfg.delta_t)),
        ("unitarity_deviation".into(), json!(unitarity.max_deviation)),
        ("gram_min_eigenvalue".into(), json!(g_min)),
    ];
    for i in 0..g.size() {
        for j in i + 1..g.size() {
            items.push((
                format!("overlap_abs_{}_{}", i + 1, j + 1),
                json!(g.get(i, j).norm()),
            ));
        }
    }
    Ok(OutputArtifact {
        metadata: metadata("check", &cfg, "mixed"),
        payload: Payload::Scalar(items),
    })
}

/// Exit status for an error: 2 for invalid input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

/// Runs the command and writes its artifact to `--out` or stdout.
pub fn execute(cli: &Cli) -> Result<()> {
    let art = run(cli)?;
    let format = cli.format.unwrap_or(match cli.command {
        Command::Sample(_) => Format::Json,
        _ => Format::Csv,
    });
    let text = art.render(format);
    match &cli.out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
