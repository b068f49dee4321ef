//! Command-line surface: config resolution, experiment drivers, artifacts and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::airy::{airy_zeros, leading_constant, omega, AiryError, Branch};
use crate::cusp::{billiard, CuspConfig, CuspError, CuspModel, PhaseSpacePoint};
use crate::gallery::{strichartz_quotient, FrequencyWindow, GalleryError, QuotientConfig, TransverseFlow};
use crate::normlab::{
    counterexample_report, lr_norm, region_norms, CounterexampleReport, NormError, NormRegionSpec, ReportError,
    ReportOptions, Verdict,
};
use crate::oscillatory::{gamma_curve, DispersionCurve, FlowKind, OscError, WAVE_MODE};
use crate::params::{make_params, ParamError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("verdict unreliable: {0}")]
    Unreliable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Unreliable(_) => 4,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        }
    )*};
}
numeric_from!(AiryError, CuspError, GalleryError, NormError, OscError, ParamError, ReportError, serde_json::Error);

#[derive(Debug, Parser)]
#[command(name = "strichlab", version, about = "Strichartz-loss experiments near gliding rays")]
pub struct Cli {
    /// JSON config; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub h_min: Option<f64>,
    #[arg(long, global = true)]
    pub h_max: Option<f64>,
    #[arg(long, global = true)]
    pub h_steps: Option<usize>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Space exponents, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowArg {
    Schrodinger,
    Wave,
}

impl From<FlowArg> for FlowKind {
    fn from(f: FlowArg) -> Self {
        match f {
            FlowArg::Schrodinger => FlowKind::Schrodinger,
            FlowArg::Wave => FlowKind::Wave,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positive zeros ω_k of Ai(-ω).
    Airy {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Dispersive amplitudes γ over an h and λ sweep.
    Dispersion {
        #[arg(long, value_enum)]
        flow: Option<FlowArg>,
        /// Transverse mode index.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        lambda_min: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        lambda_steps: Option<usize>,
    },
    /// Strichartz quotient of coherent gallery data.
    Gallery {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        flow: Option<FlowArg>,
    },
    /// Cusp norms, boundary residuals and the counterexample verdict.
    Cusp {
        /// Time samples per reflection period.
        #[arg(long)]
        t_resolution: Option<usize>,
    },
    /// Iterates of the billiard ball map.
    Billiard {
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, value_enum, default_value = "plus")]
        sign: SignArg,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Counterexample verdicts with exponent metadata.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Airy { .. } => "airy",
            Command::Dispersion { .. } => "dispersion",
            Command::Gallery { .. } => "gallery",
            Command::Cusp { .. } => "cusp",
            Command::Billiard { .. } => "billiard",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HRange {
    pub h_min: f64,
    pub h_max: f64,
    pub h_steps: usize,
}

impl HRange {
    fn new(h_min: f64, h_max: f64, h_steps: usize) -> Self {
        Self { h_min, h_max, h_steps }
    }

    /// Geometric grid from h_max down to h_min.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let HRange { h_min, h_max, h_steps } = *self;
        if !(h_min > 0.0 && h_min <= h_max && h_max <= 1.0) {
            return Err(CliError::Usage(format!("need 0 < h-min <= h-max <= 1, got [{h_min}, {h_max}]")));
        }
        if h_steps == 0 {
            return Err(CliError::Usage("h-steps must be positive".into()));
        }
        if h_steps == 1 {
            return Ok(vec![h_max]);
        }
        let ratio = (h_min / h_max).ln() / (h_steps - 1) as f64;
        Ok((0..h_steps).map(|i| h_max * (ratio * i as f64).exp()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoreSection {
    pub epsilon: Option<f64>,
    pub c0: f64,
}

impl Default for CoreSection {
    fn default() -> Self {
        Self { epsilon: None, c0: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AirySection {
    pub count: usize,
}

impl Default for AirySection {
    fn default() -> Self {
        Self { count: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorySection {
    pub flow: FlowArg,
    pub k: usize,
    pub h: HRange,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
}

impl Default for OscillatorySection {
    fn default() -> Self {
        Self {
            flow: FlowArg::Wave,
            k: WAVE_MODE,
            h: HRange::new(1e-4, 1e-2, 3),
            lambda_min: 30.0,
            lambda_max: 3000.0,
            lambda_steps: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GallerySection {
    pub flow: FlowArg,
    pub k: usize,
    pub h: HRange,
    pub r: f64,
    /// Sharp admissible q when absent.
    pub q: Option<f64>,
    pub time_samples: usize,
}

impl Default for GallerySection {
    fn default() -> Self {
        Self {
            flow: FlowArg::Schrodinger,
            k: 0,
            h: HRange::new(2f64.powi(-16), 2f64.powi(-8), 9),
            r: 6.0,
            q: None,
            time_samples: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CuspSection {
    pub h: HRange,
    pub t_resolution: usize,
    /// Inner region edge in units of h^{2/3}.
    pub inner_m: f64,
    pub model: CuspConfig,
}

impl Default for CuspSection {
    fn default() -> Self {
        Self { h: HRange::new(2f64.powi(-14), 2f64.powi(-10), 3), t_resolution: 64, inner_m: 2.0, model: CuspConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormlabSection {
    pub r: Vec<f64>,
    pub h: HRange,
}

impl Default for NormlabSection {
    fn default() -> Self {
        Self { r: vec![6.0], h: HRange::new(2f64.powi(-22), 2f64.powi(-10), 4) }
    }
}

/// Resolved configuration; one section per module.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub core: CoreSection,
    pub airy: AirySection,
    pub oscillatory: OscillatorySection,
    pub gallery: GallerySection,
    pub cusp: CuspSection,
    pub normlab: NormlabSection,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Apply command-line overrides for the selected command.
    pub fn resolve(mut self, cli: &Cli) -> Result<Self, CliError> {
        if let Some(s) = cli.seed {
            self.seed = s;
        }
        if let Some(e) = cli.epsilon {
            self.core.epsilon = Some(e);
        }
        let range = match &cli.command {
            Command::Dispersion { .. } => Some(&mut self.oscillatory.h),
            Command::Gallery { .. } => Some(&mut self.gallery.h),
            Command::Cusp { .. } => Some(&mut self.cusp.h),
            Command::Report => Some(&mut self.normlab.h),
            _ => None,
        };
        if let Some(range) = range {
            range.h_min = cli.h_min.unwrap_or(range.h_min);
            range.h_max = cli.h_max.unwrap_or(range.h_max);
            range.h_steps = cli.h_steps.unwrap_or(range.h_steps);
        }
        match &cli.command {
            Command::Airy { count } => {
                if let Some(c) = count {
                    self.airy.count = *c;
                }
            }
            Command::Dispersion { flow, k, lambda_min, lambda_max, lambda_steps } => {
                let o = &mut self.oscillatory;
                if let Some(f) = flow {
                    o.flow = *f;
                    if k.is_none() && *f == FlowArg::Schrodinger {
                        o.k = 0;
                    }
                }
                o.k = k.unwrap_or(o.k);
                o.lambda_min = lambda_min.unwrap_or(o.lambda_min);
                o.lambda_max = lambda_max.unwrap_or(o.lambda_max);
                o.lambda_steps = lambda_steps.unwrap_or(o.lambda_steps);
            }
            Command::Gallery { k, flow } => {
                let g = &mut self.gallery;
                g.k = k.unwrap_or(g.k);
                g.flow = flow.unwrap_or(g.flow);
                if let Some(r) = cli.r.as_ref().and_then(|v| v.first()) {
                    g.r = *r;
                }
                if cli.q.is_some() {
                    g.q = cli.q;
                }
            }
            Command::Cusp { t_resolution } => {
                self.cusp.t_resolution = t_resolution.unwrap_or(self.cusp.t_resolution);
                self.apply_r(cli)?;
            }
            Command::Report => self.apply_r(cli)?,
            Command::Billiard { .. } => {}
        }
        Ok(self)
    }

    fn apply_r(&mut self, cli: &Cli) -> Result<(), CliError> {
        if cli.q.is_some() {
            return Err(CliError::Usage("--q is fixed by r (sharp wave pair) for cusp runs".into()));
        }
        if let Some(r) = &cli.r {
            self.normlab.r = r.clone();
        }
        if self.normlab.r.is_empty() {
            return Err(CliError::Usage("empty r list".into()));
        }
        Ok(())
    }

    fn epsilon(&self) -> Result<f64, CliError> {
        self.core.epsilon.ok_or_else(|| CliError::Usage("--epsilon is required (or core.epsilon in the config)".into()))
    }

    pub fn hash(&self) -> Result<String, CliError> {
        let text = serde_json::to_string(self)?;
        Ok(format!("{:x}", Sha256::digest(text.as_bytes())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    /// Wall seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub command: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

/// Collects artifacts of one run; writes the manifest last.
struct Run {
    out: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

impl Run {
    fn new(out: &Path, command: &str, config: RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(out)?;
        let mut versions = BTreeMap::new();
        versions.insert("strichlab".into(), env!("CARGO_PKG_VERSION").into());
        versions.insert("config-schema".into(), "1".into());
        let manifest = RunManifest {
            config_hash: config.hash()?,
            seed: config.seed,
            versions,
            timings: BTreeMap::new(),
            command: command.into(),
            config,
            outputs: vec![],
            metadata: BTreeMap::new(),
        };
        Ok(Self { out: out.to_path_buf(), manifest, clock: Instant::now() })
    }

    fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.manifest.timings.insert(name.into(), (now - self.clock).as_secs_f64());
        self.clock = now;
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        fs::write(self.out.join(name), contents)?;
        self.manifest.outputs.push(name.into());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(mut self) -> Result<RunManifest, CliError> {
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(self.out.join("manifest.json"), text)?;
        self.manifest.outputs.push("manifest.json".into());
        Ok(self.manifest)
    }
}

/// Parse-free entry point; the binary maps the error to an exit code.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.resolve(cli)?;
    let mut run = Run::new(&cli.out, cli.command.name(), cfg.clone())?;
    let mut unreliable = None;
    match &cli.command {
        Command::Airy { .. } => cmd_airy(&cfg, &mut run)?,
        Command::Dispersion { .. } => cmd_dispersion(&cfg, &mut run)?,
        Command::Gallery { .. } => unreliable = cmd_gallery(&cfg, &mut run)?,
        Command::Cusp { .. } => unreliable = cmd_cusp(&cfg, &mut run)?,
        Command::Billiard { y, t, eta, tau, sign, n } => {
            let p = PhaseSpacePoint { y: *y, t: *t, eta: *eta, tau: *tau };
            let sign = match sign {
                SignArg::Plus => Branch::Plus,
                SignArg::Minus => Branch::Minus,
            };
            cmd_billiard(p, sign, *n, &mut run)?
        }
        Command::Report => unreliable = cmd_report(&cfg, &mut run)?,
    }
    let manifest = run.finish()?;
    match unreliable {
        Some(why) => Err(CliError::Unreliable(why)),
        None => Ok(manifest),
    }
}

fn cmd_airy(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    if cfg.airy.count == 0 {
        return Err(CliError::Usage("count must be positive".into()));
    }
    let zeros = airy_zeros(cfg.airy.count)?;
    run.stage("zeros");
    run.write("airy_zeros.csv", &zeros.to_csv())?;
    run.manifest.metadata.insert("airy_leading_constant".into(), leading_constant().into());
    Ok(())
}

#[derive(Serialize)]
struct DispersionFit {
    flow: FlowKind,
    d: u32,
    k: usize,
    omega: f64,
    lambda_exponent: Option<f64>,
    h_exponent: Option<f64>,
    samples: usize,
}

fn cmd_dispersion(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let o = &cfg.oscillatory;
    if !(o.lambda_min > 0.0 && o.lambda_min <= o.lambda_max) || o.lambda_steps == 0 {
        return Err(CliError::Usage(format!(
            "empty lambda range [{}, {}] with {} steps",
            o.lambda_min, o.lambda_max, o.lambda_steps
        )));
    }
    let lambdas: Vec<f64> = if o.lambda_steps == 1 {
        vec![o.lambda_min]
    } else {
        let step = (o.lambda_max / o.lambda_min).ln() / (o.lambda_steps - 1) as f64;
        (0..o.lambda_steps).map(|i| o.lambda_min * (step * i as f64).exp()).collect()
    };
    let om = omega(o.k);
    let curves = o
        .h
        .values()?
        .into_iter()
        .map(|h| {
            let flow = match o.flow {
                FlowArg::Schrodinger => TransverseFlow::schrodinger(om, h),
                FlowArg::Wave => TransverseFlow::halfwave(om, h),
            };
            gamma_curve(flow, &FrequencyWindow::dispersion(), &lambdas)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let joint = DispersionCurve::merge(&curves).ok_or_else(|| CliError::Usage("no h values".into()))?;
    run.stage("gamma");
    run.write("dispersion.csv", &joint.to_csv())?;
    let fit = DispersionFit {
        flow: joint.flow,
        d: joint.d,
        k: o.k,
        omega: om,
        lambda_exponent: joint.fitted_lambda_exponent,
        h_exponent: joint.fitted_h_exponent,
        samples: joint.samples.len(),
    };
    run.write_json("dispersion_fit.json", &fit)
}

fn sharp_q(kind: FlowKind, r: f64) -> Result<f64, CliError> {
    // 1/q = α(1/2 - 1/r), α = 1 (Schrödinger) or 1/2 (wave), d = 2
    let alpha = match kind {
        FlowKind::Schrodinger => 1.0,
        FlowKind::Wave => 0.5,
    };
    let iq = alpha * (0.5 - 1.0 / r);
    if !(iq > 0.0) {
        return Err(CliError::Usage(format!("no finite sharp q for r = {r}; pass --q")));
    }
    Ok(1.0 / iq)
}

fn cmd_gallery(cfg: &RunConfig, run: &mut Run) -> Result<Option<String>, CliError> {
    let g = &cfg.gallery;
    let kind: FlowKind = g.flow.into();
    let q = match g.q {
        Some(q) => q,
        None => sharp_q(kind, g.r)?,
    };
    let qc = QuotientConfig { k: g.k, time_samples: g.time_samples, ..QuotientConfig::default() };
    let scan = strichartz_quotient(kind, &qc, q, g.r, &g.h.values()?)?;
    run.stage("quotient");
    run.write("gallery.csv", &scan.to_csv())?;
    run.write_json("gallery_fit.json", &scan)?;
    Ok((!scan.reliable).then(|| "gallery grid checks failed".to_string()))
}

#[derive(Serialize)]
struct ResidualEntry {
    h: f64,
    lambda: f64,
    n_reflections: u32,
    ratio: Option<f64>,
    clip: Option<f64>,
    dirichlet: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct VerdictJson {
    r: f64,
    q: f64,
    epsilon: f64,
    beta: f64,
    fitted_exponent: Option<f64>,
    stderr: Option<f64>,
    verdict: Option<Verdict>,
}

impl From<&CounterexampleReport> for VerdictJson {
    fn from(r: &CounterexampleReport) -> Self {
        Self {
            r: r.r,
            q: r.q,
            epsilon: r.epsilon,
            beta: r.beta,
            fitted_exponent: r.fitted_exponent,
            stderr: r.stderr,
            verdict: r.verdict,
        }
    }
}

fn verdict_runs(cfg: &RunConfig, epsilon: f64, hs: &[f64]) -> Result<Vec<CounterexampleReport>, CliError> {
    let opts = ReportOptions {
        c0: cfg.core.c0,
        samples_per_period: cfg.cusp.t_resolution,
        cusp: cfg.cusp.model,
        ..ReportOptions::default()
    };
    Ok(cfg.normlab.r.iter().map(|&r| counterexample_report(r, epsilon, hs, &opts)).collect::<Result<_, _>>()?)
}

fn unreliable_of(reports: &[CounterexampleReport]) -> Option<String> {
    let bad: Vec<String> =
        reports.iter().filter(|r| r.verdict == Some(Verdict::Unreliable)).map(|r| format!("r = {}", r.r)).collect();
    (!bad.is_empty()).then(|| bad.join(", "))
}

fn cmd_cusp(cfg: &RunConfig, run: &mut Run) -> Result<Option<String>, CliError> {
    let epsilon = cfg.epsilon()?;
    let hs = cfg.cusp.h.values()?;
    if cfg.cusp.t_resolution < 2 {
        return Err(CliError::Usage("t-resolution must be at least 2".into()));
    }
    let mut csv = String::from("h,n,t,r,region,norm\n");
    let mut residuals = vec![];
    for &h in &hs {
        let params = make_params(h, epsilon, cfg.core.c0)?;
        let model = CuspModel::new(&params, &cfg.cusp.model)?;
        let regions = NormRegionSpec::new(cfg.cusp.inner_m, params.a, h, params.a)?;
        let dt = params.period() / cfg.cusp.t_resolution as f64;
        let nt = (1.0 / dt).floor() as usize + 1;
        for i in 0..nt {
            let t = i as f64 * dt;
            for n in (0..=params.n_reflections).filter(|&n| model.is_alive(n, t)) {
                let f = model.field(n, t)?;
                for &r in &cfg.normlab.r {
                    match region_norms(&f, &regions, r) {
                        Ok(rn) => {
                            for (name, v) in
                                [("inner", rn.inner), ("middle", rn.middle), ("outer", rn.outer), ("total", rn.total)]
                            {
                                csv.push_str(&format!("{h:e},{n},{t:.10e},{r},{name},{v:.10e}\n"));
                            }
                        }
                        Err(NormError::EmptyRegion(_)) => {
                            csv.push_str(&format!("{h:e},{n},{t:.10e},{r},total,{:.10e}\n", lr_norm(&f, r)?));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        let mut entry = ResidualEntry {
            h,
            lambda: params.lambda,
            n_reflections: params.n_reflections,
            ratio: None,
            clip: None,
            dirichlet: None,
            error: None,
        };
        match model.residual_profile(0, 65) {
            Ok(p) => {
                entry.ratio = Some(p.ratio);
                entry.clip = Some(p.clip);
            }
            Err(e) => entry.error = Some(e.to_string()),
        }
        match crate::cusp::dirichlet_residual(&params, &cfg.cusp.model, 33) {
            Ok(d) => entry.dirichlet = Some(d),
            Err(e) => entry.error = Some(e.to_string()),
        }
        residuals.push(entry);
    }
    run.stage("norms");
    run.write("cusp_norms.csv", &csv)?;
    run.write_json("boundary_residual.json", &residuals)?;
    let reports = verdict_runs(cfg, epsilon, &hs)?;
    run.stage("verdict");
    let verdicts: Vec<VerdictJson> = reports.iter().map(VerdictJson::from).collect();
    run.write_json("verdict.json", &verdicts)?;
    Ok(unreliable_of(&reports))
}

#[derive(Serialize)]
struct ExponentCheck {
    r: f64,
    delta: f64,
    /// 1 - δ - 2(1/2 - 1/r), the exact-solution comparison exponent.
    exact_solution: f64,
    /// 1/3 + 5/(3r) - 1 - δ/4.
    cusp: f64,
    /// The first is larger, so its power of h is the smaller one.
    holds: bool,
}

#[derive(Serialize)]
struct ReportJson {
    verdicts: Vec<VerdictJson>,
    reports: Vec<CounterexampleReport>,
    exponent_checks: Vec<ExponentCheck>,
}

fn cmd_report(cfg: &RunConfig, run: &mut Run) -> Result<Option<String>, CliError> {
    let epsilon = cfg.epsilon()?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CliError::Usage(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let hs = cfg.normlab.h.values()?;
    let reports = verdict_runs(cfg, epsilon, &hs)?;
    run.stage("verdict");
    let delta = (1.0 - epsilon) / 2.0;
    let exponent_checks = cfg
        .normlab
        .r
        .iter()
        .map(|&r| {
            let exact_solution = 1.0 - delta - 2.0 * (0.5 - 1.0 / r);
            let cusp = 1.0 / 3.0 + 5.0 / (3.0 * r) - 1.0 - delta / 4.0;
            ExponentCheck { r, delta, exact_solution, cusp, holds: exact_solution > cusp }
        })
        .collect();
    let out = ReportJson { verdicts: reports.iter().map(VerdictJson::from).collect(), reports, exponent_checks };
    run.write_json("report.json", &out)?;
    Ok(unreliable_of(&out.reports))
}

fn cmd_billiard(p: PhaseSpacePoint, sign: Branch, n: u32, run: &mut Run) -> Result<(), CliError> {
    let mut csv = String::from("step,y,t,eta,tau\n");
    let mut q = p;
    csv.push_str(&format!("0,{:.15e},{:.15e},{:.15e},{:.15e}\n", q.y, q.t, q.eta, q.tau));
    for i in 1..=n {
        q = billiard(&q, sign)?;
        csv.push_str(&format!("{i},{:.15e},{:.15e},{:.15e},{:.15e}\n", q.y, q.t, q.eta, q.tau));
    }
    run.stage("iterate");
    run.write("billiard.csv", &csv)
}
