//! Seeded Monte-Carlo campaigns.
//!
//! A campaign expands its config into pixels (one model each), runs `trials`
//! independent trials per pixel and every requested algorithm on each trial.
//! Each trial is a pure function of `(master_seed, pixel, trial)`, so results
//! do not depend on scheduling and any single trial can be replayed alone.
//!
//! Config example:
//!
//! ```json
//! {
//!   "kind": "phase-grid",
//!   "base": {"n": 100, "layers": {"4": {"a": 128, "b": 72}}},
//!   "points": [[128, 72], [130, 74]],
//!   "trials": 30,
//!   "algorithms": ["adjacency"],
//!   "master_seed": 1
//! }
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::format_layer_triple;
use crate::model::{contract, sample_hsbm, LabelVector, LayerParams, ModelSpec};
use crate::sdp::{algorithm3_sdp, SdpOptions};
use crate::spectral::{algorithm1_adjacency, algorithm2_laplacian, Algorithm, SpectralOptions};
use crate::thresholds::divergences;

pub const CSV_HEADER: &str = "kind,n,m_set,a,b,extra_layer,trial,seed,algorithm,mismatch,exact,d_gh,d_sdp,wall_ms";

/// Sentinel written for `log(mean mismatch) / log(n)` when the mean is zero.
pub const NEG_INF: &str = "neg_inf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    PhaseGrid,
    ErrorCurve,
    SizeSweep,
    Aggregation,
}

impl CampaignKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CampaignKind::PhaseGrid => "phase-grid",
            CampaignKind::ErrorCurve => "error-curve",
            CampaignKind::SizeSweep => "size-sweep",
            CampaignKind::Aggregation => "aggregation",
        }
    }
}

/// Algorithms a campaign may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignAlgorithm {
    Adjacency,
    Laplacian,
    Sdp,
}

impl CampaignAlgorithm {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            CampaignAlgorithm::Adjacency => Algorithm::AdjacencySpectral,
            CampaignAlgorithm::Laplacian => Algorithm::LaplacianSpectral,
            CampaignAlgorithm::Sdp => Algorithm::Sdp,
        }
    }

    fn tag(&self) -> u64 {
        match self {
            CampaignAlgorithm::Adjacency => 1,
            CampaignAlgorithm::Laplacian => 2,
            CampaignAlgorithm::Sdp => 3,
        }
    }
}

/// The extra layer of an aggregation campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtraLayer {
    pub m: usize,
    pub a: f64,
    pub b: f64,
}

/// Solver overrides; anything omitted keeps the library default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub power_tol: Option<f64>,
    pub power_max_iter: Option<usize>,
    pub sdp_tol: Option<f64>,
    pub sdp_max_iter: Option<usize>,
}

impl SolverSettings {
    fn spectral(&self) -> SpectralOptions {
        let mut o = SpectralOptions::default();
        if let Some(t) = self.power_tol {
            o.tol = t;
        }
        if let Some(k) = self.power_max_iter {
            o.max_iter = k;
        }
        o
    }

    fn sdp(&self) -> SdpOptions {
        let mut o = SdpOptions::default();
        if let Some(t) = self.sdp_tol {
            o.tol = t;
        }
        if let Some(k) = self.sdp_max_iter {
            o.max_iter = k;
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: CampaignKind,
    pub base: ModelSpec,
    /// Arity whose `(a, b)` is swept. May be omitted when `base` has one layer.
    #[serde(default)]
    pub sweep_m: Option<usize>,
    /// Explicit `(a, b)` pixels (phase-grid, aggregation).
    #[serde(default)]
    pub points: Option<Vec<(f64, f64)>>,
    /// Grid axes; pixels are the product with `a` varying slowest.
    #[serde(default)]
    pub a_values: Option<Vec<f64>>,
    #[serde(default)]
    pub b_values: Option<Vec<f64>>,
    /// Fixed `b` of an error curve.
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub n_values: Option<Vec<usize>>,
    #[serde(default)]
    pub extra_layer: Option<ExtraLayer>,
    pub trials: usize,
    pub algorithms: Vec<CampaignAlgorithm>,
    pub master_seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Record wall-clock times. Off by default because timings would make the
    /// CSV differ between otherwise identical runs.
    #[serde(default)]
    pub timing: bool,
}

/// One model of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct Pixel {
    pub index: usize,
    /// Model without the extra layer.
    pub spec: ModelSpec,
    pub a: f64,
    pub b: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.algorithms.is_empty() {
            return invalid("algorithms must not be empty");
        }
        let mut algs = self.algorithms.clone();
        algs.sort();
        algs.dedup();
        if algs.len() != self.algorithms.len() {
            return invalid("algorithms must not repeat");
        }
        if (self.kind == CampaignKind::Aggregation) != self.extra_layer.is_some() {
            return invalid("extra_layer is required for aggregation campaigns and only allowed there");
        }
        if let Some(e) = self.extra_layer {
            if self.base.layers().contains_key(&e.m) {
                return invalid(format!("extra layer arity {} already in the base model", e.m));
            }
            self.base.with_layer(e.m, LayerParams::Scaled { a: e.a, b: e.b })?;
        }
        for (name, v) in [("a_values", &self.a_values), ("b_values", &self.b_values)] {
            if matches!(v, Some(v) if v.is_empty()) {
                return invalid(format!("{name} must not be empty"));
            }
        }
        if matches!(&self.points, Some(p) if p.is_empty()) {
            return invalid("points must not be empty");
        }
        if matches!(&self.n_values, Some(v) if v.is_empty()) {
            return invalid("n_values must not be empty");
        }
        self.pixels().map(|_| ())
    }

    fn swept_arity(&self) -> Result<usize> {
        match self.sweep_m {
            Some(m) => Ok(m),
            None => {
                let arities: Vec<usize> = self.base.arities().collect();
                match arities.as_slice() {
                    [m] => Ok(*m),
                    _ => invalid("sweep_m is required when the base model has several layers"),
                }
            }
        }
    }

    fn pixel(&self, index: usize, spec: ModelSpec, m: usize) -> Result<Pixel> {
        let (a, b) = spec.intensities(m)?;
        Ok(Pixel { index, spec, a, b })
    }

    /// Expands the sweep into pixels, in output order.
    pub fn pixels(&self) -> Result<Vec<Pixel>> {
        let m = self.swept_arity()?;
        let with_ab = |(a, b): (f64, f64)| self.base.with_layer(m, LayerParams::Scaled { a, b });
        let specs: Vec<ModelSpec> = match self.kind {
            CampaignKind::PhaseGrid | CampaignKind::Aggregation => {
                if self.b.is_some() || self.n_values.is_some() {
                    return invalid("grid campaigns take points or a_values/b_values only");
                }
                match (&self.points, &self.a_values, &self.b_values) {
                    (Some(points), None, None) => points.iter().map(|&p| with_ab(p)).collect::<Result<_>>()?,
                    (None, Some(av), Some(bv)) => av
                        .iter()
                        .flat_map(|&a| bv.iter().map(move |&b| (a, b)))
                        .map(with_ab)
                        .collect::<Result<_>>()?,
                    (None, None, None) => {
                        if !self.base.layers().contains_key(&m) {
                            return invalid(format!("arity {m} is not part of the base model"));
                        }
                        vec![self.base.clone()]
                    }
                    _ => return invalid("give either points or both a_values and b_values"),
                }
            }
            CampaignKind::ErrorCurve => {
                if self.points.is_some() || self.b_values.is_some() || self.n_values.is_some() {
                    return invalid("error curves take a_values and b only");
                }
                let Some(av) = &self.a_values else {
                    return invalid("error curves need a_values");
                };
                let b = match self.b {
                    Some(b) => b,
                    None => self.base.intensities(m)?.1,
                };
                av.iter().map(|&a| with_ab((a, b))).collect::<Result<_>>()?
            }
            CampaignKind::SizeSweep => {
                if self.points.is_some() || self.a_values.is_some() || self.b_values.is_some() || self.b.is_some() {
                    return invalid("size sweeps take n_values only");
                }
                let Some(nv) = &self.n_values else {
                    return invalid("size sweeps need n_values");
                };
                if !self.base.layers().contains_key(&m) {
                    return invalid(format!("arity {m} is not part of the base model"));
                }
                nv.iter().map(|&n| self.base.with_n(n)).collect::<Result<_>>()?
            }
        };
        specs
            .into_iter()
            .enumerate()
            .map(|(i, spec)| self.pixel(i, spec, m))
            .collect()
    }

    fn extra_tag(&self, variant: usize) -> String {
        match (variant, self.extra_layer) {
            (1, Some(e)) => format_layer_triple(e.m, e.a, e.b),
            _ => "none".to_string(),
        }
    }

    fn variants(&self) -> usize {
        if self.extra_layer.is_some() {
            2
        } else {
            1
        }
    }

    fn variant_spec(&self, pixel: &Pixel, variant: usize) -> Result<ModelSpec> {
        match (variant, self.extra_layer) {
            (1, Some(e)) => pixel.spec.with_layer(e.m, LayerParams::Scaled { a: e.a, b: e.b }),
            _ => Ok(pixel.spec.clone()),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// SplitMix-style hash of `(master, pixel, trial, tag)`.
///
/// Tag 0 is the trial's sampling seed; algorithm tags seed solver randomness.
pub fn derive_seed(master: u64, pixel: u64, trial: u64, tag: u64) -> u64 {
    let mut h = splitmix64(master);
    for x in [pixel, trial, tag] {
        h = splitmix64(h ^ x);
    }
    h
}

/// Random streams within one trial's seed.
const LABEL_STREAM: u64 = 0;
const EDGE_STREAM: u64 = 1;

/// One row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub kind: CampaignKind,
    pub pixel: usize,
    /// 0 for the base model, 1 with the extra layer.
    pub variant: usize,
    pub n: usize,
    pub m_set: String,
    pub a: f64,
    pub b: f64,
    pub extra_layer: String,
    pub trial: usize,
    pub seed: u64,
    pub algorithm: CampaignAlgorithm,
    /// NaN when the algorithm failed on this trial.
    pub mismatch: f64,
    pub exact: bool,
    pub converged: bool,
    pub d_gh: f64,
    pub d_sdp: f64,
    pub wall_ms: f64,
}

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind.as_str(),
            self.n,
            self.m_set,
            self.a,
            self.b,
            self.extra_layer,
            self.trial,
            self.seed,
            self.algorithm.algorithm().as_str(),
            self.mismatch,
            self.exact,
            self.d_gh,
            self.d_sdp,
            self.wall_ms
        )
    }
}

/// Divergences of a model; infinite when some layer has `q = 0 < p`.
fn point_divergences(spec: &ModelSpec) -> (f64, f64) {
    let degenerate = spec.arities().any(|m| {
        let (a, b) = spec.intensities(m).expect("arity present");
        b == 0.0 && a > 0.0
    });
    if degenerate {
        return (f64::INFINITY, f64::INFINITY);
    }
    match divergences(spec) {
        Ok(r) => (r.d_gh, r.d_sdp),
        Err(e) => {
            warn!("divergences unavailable for this point: {e}");
            (f64::NAN, f64::NAN)
        }
    }
}

struct Job<'a> {
    pixel: &'a Pixel,
    variant: usize,
    spec: ModelSpec,
    extra: String,
    d_gh: f64,
    d_sdp: f64,
}

fn run_trial(cfg: &ExperimentConfig, job: &Job, trial: usize) -> Result<Vec<TrialRecord>> {
    let pixel = job.pixel;
    let seed = derive_seed(cfg.master_seed, pixel.index as u64, trial as u64, 0);
    let n = job.spec.n();

    // Labels come from a stream shared by both variants; edges use a
    // per-variant stream, so paired runs see the same communities.
    let mut label_rng = ChaCha8Rng::seed_from_u64(seed);
    label_rng.set_stream(LABEL_STREAM);
    let sigma = LabelVector::sample(n, &mut label_rng)?;
    let mut edge_rng = ChaCha8Rng::seed_from_u64(seed);
    edge_rng.set_stream(EDGE_STREAM + job.variant as u64);
    let h = sample_hsbm(&job.spec, &sigma, &mut edge_rng)?;
    let adj = contract(&h);

    let mut out = Vec::with_capacity(cfg.algorithms.len());
    for &alg in &cfg.algorithms {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, pixel.index as u64, trial as u64, alg.tag()));
        let start = Instant::now();
        let result = match alg {
            CampaignAlgorithm::Adjacency => algorithm1_adjacency(&adj, &cfg.solver.spectral(), &mut rng),
            CampaignAlgorithm::Laplacian => algorithm2_laplacian(&adj, &cfg.solver.spectral(), &mut rng),
            CampaignAlgorithm::Sdp => algorithm3_sdp(&adj, &cfg.solver.sdp()),
        }
        .and_then(|r| r.with_truth(&sigma));
        let wall_ms = if cfg.timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        let (mismatch, exact, converged) = match result {
            Ok(r) => (r.mismatch.unwrap_or(f64::NAN), r.exact.unwrap_or(false), r.converged),
            Err(e) => {
                warn!(
                    "pixel {} trial {trial} {}: {e}",
                    pixel.index,
                    alg.algorithm().as_str()
                );
                (f64::NAN, false, false)
            }
        };
        out.push(TrialRecord {
            kind: cfg.kind,
            pixel: pixel.index,
            variant: job.variant,
            n,
            m_set: job.spec.arity_tag(),
            a: pixel.a,
            b: pixel.b,
            extra_layer: job.extra.clone(),
            trial,
            seed,
            algorithm: alg,
            mismatch,
            exact,
            converged,
            d_gh: job.d_gh,
            d_sdp: job.d_sdp,
            wall_ms,
        });
    }
    Ok(out)
}

/// Runs a campaign. `threads = None` uses rayon's default pool.
///
/// Records come back sorted by `(pixel, variant, trial, algorithm)`.
pub fn run_campaign(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let pixels = cfg.pixels()?;
    let mut jobs = Vec::new();
    for pixel in &pixels {
        for variant in 0..cfg.variants() {
            let spec = cfg.variant_spec(pixel, variant)?;
            let (d_gh, d_sdp) = point_divergences(&spec);
            jobs.push(Job {
                pixel,
                variant,
                spec,
                extra: cfg.extra_tag(variant),
                d_gh,
                d_sdp,
            });
        }
    }
    let tasks: Vec<(&Job, usize)> = jobs
        .iter()
        .flat_map(|j| (0..cfg.trials).map(move |t| (j, t)))
        .collect();
    info!(
        "{} campaign: {} pixels, {} trials each, {} tasks",
        cfg.kind.as_str(),
        pixels.len(),
        cfg.trials,
        tasks.len()
    );

    let work = || -> Result<Vec<TrialRecord>> {
        let chunks: Vec<Vec<TrialRecord>> = tasks
            .par_iter()
            .map(|&(job, t)| run_trial(cfg, job, t))
            .collect::<Result<_>>()?;
        Ok(chunks.into_iter().flatten().collect())
    };
    let mut records = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    records.sort_by_key(|r| (r.pixel, r.variant, r.trial, r.algorithm));
    Ok(records)
}

fn run_kind(cfg: &ExperimentConfig, kind: CampaignKind) -> Result<Vec<TrialRecord>> {
    if cfg.kind != kind {
        return invalid(format!("expected a {} config, got {}", kind.as_str(), cfg.kind.as_str()));
    }
    run_campaign(cfg, None)
}

pub fn run_phase_grid(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_kind(cfg, CampaignKind::PhaseGrid)
}

pub fn run_error_curve(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_kind(cfg, CampaignKind::ErrorCurve)
}

pub fn run_size_sweep(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_kind(cfg, CampaignKind::SizeSweep)
}

pub fn run_aggregation(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_kind(cfg, CampaignKind::Aggregation)
}

pub fn write_csv<W: Write>(records: &[TrialRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn csv_string(records: &[TrialRecord]) -> String {
    let mut s = String::new();
    writeln!(s, "{CSV_HEADER}").unwrap();
    for r in records {
        writeln!(s, "{}", r.csv_row()).unwrap();
    }
    s
}

/// `log(mean mismatch) / log(n)`, or the `neg_inf` sentinel at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RescaledMismatch {
    Value(f64),
    NegInf,
}

impl RescaledMismatch {
    pub fn new(mean: f64, n: usize) -> Self {
        if mean == 0.0 {
            RescaledMismatch::NegInf
        } else {
            RescaledMismatch::Value(mean.ln() / (n as f64).ln())
        }
    }
}

impl Serialize for RescaledMismatch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RescaledMismatch::Value(v) => s.serialize_f64(*v),
            RescaledMismatch::NegInf => s.serialize_str(NEG_INF),
        }
    }
}

/// Aggregates of one `(pixel, variant, algorithm)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PixelSummary {
    pub pixel: usize,
    pub n: usize,
    pub m_set: String,
    pub a: f64,
    pub b: f64,
    pub extra_layer: String,
    pub algorithm: &'static str,
    pub trials: usize,
    pub successes: usize,
    /// Trials where the algorithm returned an error; excluded from the means.
    pub failures: usize,
    pub mean_mismatch: f64,
    /// Sample standard deviation; 0 when only one trial contributes.
    pub std_mismatch: f64,
    pub rescaled_mismatch: RescaledMismatch,
    pub d_gh: f64,
    pub d_sdp: f64,
}

/// Success counts of an aggregation pixel without and with the extra layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedCount {
    pub pixel: usize,
    pub a: f64,
    pub b: f64,
    pub algorithm: &'static str,
    pub single: usize,
    pub with_layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub kind: CampaignKind,
    pub master_seed: u64,
    pub trials: usize,
    pub pixels: Vec<PixelSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub paired: Vec<PairedCount>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

/// Per-pixel aggregates. `records` must be sorted as returned by
/// [`run_campaign`].
pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> CampaignSummary {
    let mut pixels = Vec::new();
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.pixel, r.variant, r.algorithm, r.trial));
    let mut i = 0;
    while i < sorted.len() {
        let key = (sorted[i].pixel, sorted[i].variant, sorted[i].algorithm);
        let mut j = i;
        while j < sorted.len() && (sorted[j].pixel, sorted[j].variant, sorted[j].algorithm) == key {
            j += 1;
        }
        let group = &sorted[i..j];
        let first = group[0];
        let ok: Vec<f64> = group.iter().map(|r| r.mismatch).filter(|x| !x.is_nan()).collect();
        let (mean, std) = mean_std(&ok);
        pixels.push(PixelSummary {
            pixel: first.pixel,
            n: first.n,
            m_set: first.m_set.clone(),
            a: first.a,
            b: first.b,
            extra_layer: first.extra_layer.clone(),
            algorithm: first.algorithm.algorithm().as_str(),
            trials: group.len(),
            successes: group.iter().filter(|r| r.exact).count(),
            failures: group.len() - ok.len(),
            mean_mismatch: mean,
            std_mismatch: std,
            rescaled_mismatch: RescaledMismatch::new(mean, first.n),
            d_gh: first.d_gh,
            d_sdp: first.d_sdp,
        });
        i = j;
    }

    let mut paired = Vec::new();
    if cfg.extra_layer.is_some() {
        for s in pixels.iter().filter(|s| s.extra_layer == "none") {
            if let Some(w) = pixels
                .iter()
                .find(|w| w.pixel == s.pixel && w.algorithm == s.algorithm && w.extra_layer != "none")
            {
                paired.push(PairedCount {
                    pixel: s.pixel,
                    a: s.a,
                    b: s.b,
                    algorithm: s.algorithm,
                    single: s.successes,
                    with_layer: w.successes,
                });
            }
        }
    }
    CampaignSummary {
        kind: cfg.kind,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        pixels,
        paired,
    }
}

/// Writes `results.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_outputs(cfg: &ExperimentConfig, records: &[TrialRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), csv_string(records))?;
    let mut summary = serde_json::to_string_pretty(&summarize(cfg, records))?;
    summary.push('\n');
    fs::write(dir.join("summary.json"), summary)?;
    Ok(())
}
