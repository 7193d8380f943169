//! System-identification experiments: config, presets, Monte Carlo runs and
//! the files they emit.
//!
//! Each trial draws one input and one noise realization and feeds the same
//! `(x(k), d(k))` pairs to every algorithm variant. The trial seed `s` seeds
//! the input stream directly and the noise stream with
//! `s ^ NOISE_SEED_MASK`, so the two never share a generator state.
//!
//! Output layout under the output directory:
//!
//! ```text
//! config.json                      resolved config
//! summary.csv                      one row per (trial, variant)
//! comparison.csv                   per-variant aggregates over trials
//! trial_<seed>/input.csv           x(k), single column
//! trial_<seed>/noise.csv           n(k), single column
//! trial_<seed>/<variant>/trace.csv per-iteration ledger
//! trial_<seed>/<variant>/{l,r,wtilde_sq}.csv   (k, value) curves
//! trial_<seed>/<variant>/summary.txt           key=value verdict
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{self, AdaptiveFilter, DsVnlms, ThresholdMode, ThresholdPolicy, Vnlms};
use crate::robustness::{self, fmt_f64, AggregateVerdict, IterationRecord, Ledger, RunVerdict};
use crate::signals::{
    self, Channel, InputProcess, KernelTerm, NoiseProcess, NoiseSpec, SignalSpec,
};
use crate::volterra::{KernelVector, VolterraConfig, DEFAULT_REGULARIZATION};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ITERATIONS: usize = 2500;
pub const NOISE_SEED_MASK: u64 = 0x9E37_79B9_7F4A_7C15;
/// Overrides the output directory of `run` when set.
pub const OUTPUT_DIR_ENV: &str = "DSVNLMS_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpec {
    /// The four-term second-order channel of [`signals::reference_channel`].
    Reference,
    Custom {
        order: usize,
        memory: usize,
        terms: Vec<KernelTerm>,
    },
    /// JSON file holding a `custom` channel body.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    order: usize,
    memory: usize,
    terms: Vec<KernelTerm>,
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<Channel> {
        match self {
            ChannelSpec::Reference => Ok(signals::reference_channel()),
            ChannelSpec::Custom {
                order,
                memory,
                terms,
            } => Channel::from_terms(
                VolterraConfig::new(*order, *memory, DEFAULT_REGULARIZATION)?,
                terms,
            ),
            ChannelSpec::File { path } => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let body: ChannelFile = serde_json::from_str(&text)?;
                ChannelSpec::Custom {
                    order: body.order,
                    memory: body.memory,
                    terms: body.terms,
                }
                .resolve()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmKind {
    DsVnlms { threshold: ThresholdPolicy },
    Vnlms { mu: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    /// Variant label, also its output directory name.
    pub name: String,
    #[serde(flatten)]
    pub kind: AlgorithmKind,
}

impl AlgorithmSpec {
    pub fn ds_vnlms(name: &str, threshold: ThresholdPolicy) -> Self {
        Self {
            name: name.into(),
            kind: AlgorithmKind::DsVnlms { threshold },
        }
    }

    pub fn vnlms(name: &str, mu: f64) -> Self {
        Self {
            name: name.into(),
            kind: AlgorithmKind::Vnlms { mu },
        }
    }

    fn build(&self, config: VolterraConfig) -> Result<Box<dyn AdaptiveFilter + Send>> {
        Ok(match self.kind {
            AlgorithmKind::DsVnlms { threshold } => Box::new(DsVnlms::new(config, threshold)?),
            AlgorithmKind::Vnlms { mu } => Box::new(Vnlms::new(config, mu)?),
        })
    }

    /// Nominal τ of a fixed threshold against Gaussian noise.
    fn tau(&self, noise: &NoiseProcess) -> Option<f64> {
        match (self.kind, noise) {
            (AlgorithmKind::DsVnlms { threshold }, NoiseProcess::Gaussian { variance }) => {
                threshold.tau(*variance).filter(|t| *t > 0.0)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSpec {
    /// Trial `i` uses seed `base + i`.
    Base(u64),
    List(Vec<u64>),
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_trials() -> usize {
    1
}

fn default_seeds() -> SeedSpec {
    SeedSpec::Base(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub name: String,
    pub volterra: VolterraConfig,
    pub channel: ChannelSpec,
    pub input: InputProcess,
    pub noise: NoiseProcess,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seeds")]
    pub seeds: SeedSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Expected update rate per variant, listed next to the observed one in
    /// `comparison.csv`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reference_update_rates: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Reads a config file; a relative channel file path is taken relative
    /// to the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        if let ChannelSpec::File { path: channel } = &mut config.channel {
            if channel.is_relative() {
                if let Some(dir) = path.parent() {
                    *channel = dir.join(&*channel);
                }
            }
        }
        Ok(config)
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seeds {
            SeedSpec::Base(base) => (0..self.trials as u64)
                .map(|i| base.wrapping_add(i))
                .collect(),
            SeedSpec::List(list) => list.iter().copied().take(self.trials).collect(),
        }
    }

    /// Checks every field and reports all offending ones at once.
    pub fn validate(&self) -> Result<Channel> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if self.iterations == 0 {
            problems.push("iterations: must be at least 1".into());
        }
        if self.trials == 0 {
            problems.push("trials: must be at least 1".into());
        }
        if let SeedSpec::List(list) = &self.seeds {
            if list.len() < self.trials {
                problems.push(format!(
                    "seeds: {} listed for {} trials",
                    list.len(),
                    self.trials
                ));
            }
            if list.iter().collect::<BTreeSet<_>>().len() != list.len() {
                problems.push("seeds: duplicate seed".into());
            }
        }
        if let Err(e) = SignalSpec::from(self.input).validate() {
            problems.push(format!("input: {e}"));
        }
        if let Err(e) = NoiseSpec::from(self.noise).validate() {
            problems.push(format!("noise: {e}"));
        }
        if self.algorithms.is_empty() {
            problems.push("algorithms: at least one variant required".into());
        }
        let mut names = BTreeSet::new();
        for a in &self.algorithms {
            let safe = !a.name.is_empty()
                && a.name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
                && a.name != "."
                && a.name != "..";
            if !safe {
                problems.push(format!(
                    "algorithms.name: `{}` is not a plain file name",
                    a.name
                ));
            }
            if !names.insert(a.name.as_str()) {
                problems.push(format!("algorithms.name: duplicate `{}`", a.name));
            }
            let check = match a.kind {
                AlgorithmKind::DsVnlms { threshold } => threshold.validate(),
                AlgorithmKind::Vnlms { mu } => filters::validate_step_size(mu),
            };
            if let Err(e) = check {
                problems.push(format!("algorithms.{}: {e}", a.name));
            }
        }
        let channel = match self.channel.resolve() {
            Ok(ch) => {
                if let Err(e) = ch.embed(&self.volterra) {
                    problems.push(format!("channel: does not fit the filter layout: {e}"));
                }
                Some(ch)
            }
            Err(e) => {
                problems.push(format!("channel: {e}"));
                None
            }
        };
        match channel {
            Some(ch) if problems.is_empty() => Ok(ch),
            _ => Err(Error::Validation(problems)),
        }
    }
}

impl From<InputProcess> for SignalSpec {
    fn from(process: InputProcess) -> Self {
        SignalSpec { process, seed: 0 }
    }
}

impl From<NoiseProcess> for NoiseSpec {
    fn from(process: NoiseProcess) -> Self {
        NoiseSpec { process, seed: 0 }
    }
}

/// One variant on one realization.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub name: String,
    pub ledger: Ledger,
    pub verdict: RunVerdict,
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub seed: u64,
    pub input: Vec<f64>,
    pub noise: Vec<f64>,
    pub variants: Vec<VariantRun>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRun>,
}

fn run_variant(
    spec: &AlgorithmSpec,
    config: &ExperimentConfig,
    w_star: &KernelVector,
    input: &[f64],
    noise: &[f64],
    desired: &[f64],
) -> Result<VariantRun> {
    let mut filter = spec.build(config.volterra)?;
    let mut ledger = Ledger::new(w_star.clone(), filter.state().weights())?;
    for ((&x, &d), &n) in input.iter().zip(desired).zip(noise) {
        let transient = filter.is_transient();
        let w_before = filter.state().weights().clone();
        let outcome = filter.process(x, d)?;
        let state = filter.state();
        ledger.observe(
            &w_before,
            state.weights(),
            &state.regressor(),
            &outcome,
            n,
            transient,
        )?;
    }
    Ok(VariantRun {
        name: spec.name.clone(),
        verdict: ledger.verdict(spec.tau(&config.noise)),
        ledger,
    })
}

fn run_trial(
    config: &ExperimentConfig,
    channel: &Channel,
    w_star: &KernelVector,
    seed: u64,
) -> Result<TrialRun> {
    let input = signals::generate_input(
        &SignalSpec::from(config.input).with_seed(seed),
        config.iterations,
    )?;
    let noise = signals::generate_noise(
        &NoiseSpec::from(config.noise).with_seed(seed ^ NOISE_SEED_MASK),
        config.iterations,
    )?;
    let desired = signals::desired_signal(channel, &input, &noise)?;
    let variants = config
        .algorithms
        .iter()
        .map(|a| run_variant(a, config, w_star, &input, &noise, &desired))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRun {
        seed,
        input,
        noise,
        variants,
    })
}

/// Runs every trial in memory. Trials run in parallel; results keep seed order.
pub fn simulate(config: &ExperimentConfig) -> Result<ExperimentRun> {
    let channel = config.validate()?;
    let w_star = channel.embed(&config.volterra)?;
    let trials = config
        .seeds()
        .into_par_iter()
        .map(|seed| run_trial(config, &channel, &w_star, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentRun {
        config: config.clone(),
        trials,
    })
}

/// Per-variant aggregates over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub name: String,
    pub aggregate: AggregateVerdict,
    pub reference_update_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSummary {
    pub experiment: String,
    pub variants: Vec<VariantSummary>,
}

impl ExperimentRun {
    pub fn verdicts(&self, variant: &str) -> Vec<RunVerdict> {
        self.trials
            .iter()
            .flat_map(|t| t.variants.iter().filter(|v| v.name == variant))
            .map(|v| v.verdict.clone())
            .collect()
    }

    pub fn comparison(&self) -> ComparisonSummary {
        ComparisonSummary {
            experiment: self.config.name.clone(),
            variants: self
                .config
                .algorithms
                .iter()
                .map(|a| VariantSummary {
                    name: a.name.clone(),
                    aggregate: robustness::aggregate(&self.verdicts(&a.name)),
                    reference_update_rate: self.config.reference_update_rates.get(&a.name).copied(),
                })
                .collect(),
        }
    }
}

/// Runs all variants of `config` on shared realizations and summarizes them
/// side by side.
pub fn compare_algorithms(config: &ExperimentConfig) -> Result<ComparisonSummary> {
    Ok(simulate(config)?.comparison())
}

/// Simulates and writes every output file under `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentRun> {
    let run = simulate(config)?;
    write_outputs(&run, out_dir)?;
    Ok(run)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_column(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for v in values {
        writeln!(w, "{}", fmt_f64(*v)).map_err(io)?;
    }
    finish(w, path)
}

/// Two-column `(k, value)` curve file.
pub fn write_curve(path: &Path, values: impl IntoIterator<Item = f64>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "k,value").map_err(io)?;
    for (k, v) in values.into_iter().enumerate() {
        writeln!(w, "{k},{}", fmt_f64(v)).map_err(io)?;
    }
    finish(w, path)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn verdict_text(v: &RunVerdict) -> String {
    v.key_values()
        .into_iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
}

fn write_variant(dir: &Path, run: &VariantRun) -> Result<()> {
    mkdir(dir)?;
    let records: &[IterationRecord] = run.ledger.records();
    let trace = dir.join("trace.csv");
    let w = create(&trace)?;
    robustness::write_trace(records, w)?;
    write_curve(&dir.join("l.csv"), records.iter().map(|r| r.lhs))?;
    write_curve(&dir.join("r.csv"), records.iter().map(|r| r.rhs))?;
    write_curve(&dir.join("wtilde_sq.csv"), run.ledger.wtilde_sq_curve())?;
    write_text(&dir.join("summary.txt"), &verdict_text(&run.verdict))
}

pub fn write_outputs(run: &ExperimentRun, out_dir: &Path) -> Result<()> {
    mkdir(out_dir)?;
    write_text(&out_dir.join("config.json"), &run.config.to_json())?;
    for trial in &run.trials {
        let dir = out_dir.join(format!("trial_{}", trial.seed));
        mkdir(&dir)?;
        write_column(&dir.join("input.csv"), "x", &trial.input)?;
        write_column(&dir.join("noise.csv"), "n", &trial.noise)?;
        for v in &trial.variants {
            write_variant(&dir.join(&v.name), v)?;
        }
    }

    let path = out_dir.join("summary.csv");
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    let mut header = vec!["seed", "variant"];
    if let Some(v) = run.trials.first().and_then(|t| t.variants.first()) {
        header.extend(v.verdict.key_values().iter().map(|(k, _)| *k));
    }
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for trial in &run.trials {
        for v in &trial.variants {
            let values: Vec<String> = v.verdict.key_values().into_iter().map(|(_, v)| v).collect();
            writeln!(w, "{},{},{}", trial.seed, v.name, values.join(",")).map_err(io)?;
        }
    }
    finish(w, &path)?;

    write_text(
        &out_dir.join("comparison.csv"),
        &comparison_csv(&run.comparison()),
    )
}

pub fn comparison_csv(summary: &ComparisonSummary) -> String {
    let mut out = String::from(
        "variant,runs,total_iterations,update_count,mean_update_rate,reference_update_rate,\
         local_violations,global_violations,conditional_violations,decomposition_violations,\
         increase_count,mean_increase_fraction,max_global_ratio,mean_wtilde_sq_final\n",
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
    for v in &summary.variants {
        let a = &v.aggregate;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            v.name,
            a.runs,
            a.total_iterations,
            a.update_count,
            fmt_f64(a.mean_update_rate),
            opt(v.reference_update_rate),
            a.local_violations,
            a.global_violations,
            a.conditional_violations,
            a.decomposition_violations,
            a.increase_count,
            fmt_f64(a.mean_increase_fraction),
            opt(a.max_global_ratio),
            fmt_f64(a.mean_wtilde_sq_final),
        ));
    }
    out
}

pub const SIGMA_N_SQ: f64 = 0.01;
pub const KNOWN_NOISE_BOUND: f64 = 0.1;
pub const PRESET_TRIALS: usize = 10;

pub const PRESET_NAMES: [&str; 8] = [
    "wgn-tau5",
    "ar1-tau5",
    "wgn-tau2",
    "ar1-tau2",
    "wgn-compare",
    "wgn-bounded",
    "ar1-compare",
    "ar1-bounded",
];

pub const VARIANT_DS_FIXED_TAU5: &str = "ds_fixed_tau5";
pub const VARIANT_DS_FIXED_TAU2: &str = "ds_fixed_tau2";
pub const VARIANT_DS_KNOWN_BOUND: &str = "ds_known_bound";
pub const VARIANT_DS_TIME_VARYING: &str = "ds_time_varying";
pub const VARIANT_VNLMS_FAST: &str = "vnlms_mu0.8";
pub const VARIANT_VNLMS_SLOW: &str = "vnlms_mu0.3";

fn white_input() -> InputProcess {
    InputProcess::WhiteGaussian { variance: 1.0 }
}

fn ar1_input() -> InputProcess {
    InputProcess::Ar1 {
        coefficient: 0.95,
        variance: 1.0,
    }
}

fn base_preset(
    name: &str,
    input: InputProcess,
    noise: NoiseProcess,
    algorithms: Vec<AlgorithmSpec>,
) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        volterra: VolterraConfig::new(3, 3, DEFAULT_REGULARIZATION).expect("static layout"),
        channel: ChannelSpec::Reference,
        input,
        noise,
        algorithms,
        iterations: DEFAULT_ITERATIONS,
        trials: PRESET_TRIALS,
        seeds: SeedSpec::Base(1),
        output_dir: None,
        reference_update_rates: BTreeMap::new(),
    }
}

fn gaussian_noise() -> NoiseProcess {
    NoiseProcess::Gaussian {
        variance: SIGMA_N_SQ,
    }
}

fn known_bound_variant() -> AlgorithmSpec {
    let gamma = filters::gamma_for_known_bound(KNOWN_NOISE_BOUND).expect("positive bound");
    AlgorithmSpec::ds_vnlms(VARIANT_DS_KNOWN_BOUND, ThresholdPolicy::fixed(gamma))
}

/// Built-in scenarios: filter order 3 and memory 3, δ = 1e-9, null
/// initialization, σₙ² = 0.01, 2500 iterations, 10 trials from seed 1.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let tau5 = || {
        AlgorithmSpec::ds_vnlms(
            VARIANT_DS_FIXED_TAU5,
            ThresholdPolicy::fixed_tau(5.0, SIGMA_N_SQ),
        )
    };
    let tau2 = || {
        AlgorithmSpec::ds_vnlms(
            VARIANT_DS_FIXED_TAU2,
            ThresholdPolicy::fixed_tau(2.0, SIGMA_N_SQ),
        )
    };
    let comparison = |name: &str, input: InputProcess, rates: [f64; 2]| {
        let mut c = base_preset(
            name,
            input,
            gaussian_noise(),
            vec![
                AlgorithmSpec::vnlms(VARIANT_VNLMS_FAST, 0.8),
                AlgorithmSpec::vnlms(VARIANT_VNLMS_SLOW, 0.3),
                tau5(),
                AlgorithmSpec::ds_vnlms(
                    VARIANT_DS_TIME_VARYING,
                    ThresholdPolicy::time_varying(5.0, 9.0, SIGMA_N_SQ),
                ),
            ],
        );
        c.reference_update_rates = BTreeMap::from([
            (VARIANT_DS_FIXED_TAU5.to_string(), rates[0]),
            (VARIANT_DS_TIME_VARYING.to_string(), rates[1]),
        ]);
        c
    };
    let bounded = |name: &str, input: InputProcess, rate: f64| {
        let mut c = base_preset(
            name,
            input,
            NoiseProcess::UniformBounded {
                bound: KNOWN_NOISE_BOUND,
            },
            vec![known_bound_variant()],
        );
        c.reference_update_rates = BTreeMap::from([(VARIANT_DS_KNOWN_BOUND.to_string(), rate)]);
        c
    };
    Ok(match name {
        "wgn-tau5" => base_preset(name, white_input(), gaussian_noise(), vec![tau5()]),
        "ar1-tau5" => base_preset(name, ar1_input(), gaussian_noise(), vec![tau5()]),
        "wgn-tau2" => base_preset(name, white_input(), gaussian_noise(), vec![tau2()]),
        "ar1-tau2" => base_preset(name, ar1_input(), gaussian_noise(), vec![tau2()]),
        "wgn-compare" => comparison(name, white_input(), [0.05, 0.017]),
        "ar1-compare" => comparison(name, ar1_input(), [0.049, 0.014]),
        "wgn-bounded" => bounded(name, white_input(), 0.014),
        "ar1-bounded" => bounded(name, ar1_input(), 0.011),
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

/// One-line description of a preset for listings.
pub fn describe(config: &ExperimentConfig) -> String {
    let input = match config.input {
        InputProcess::WhiteGaussian { .. } => "white Gaussian input",
        InputProcess::Ar1 { .. } => "AR(1) input",
    };
    let noise = match config.noise {
        NoiseProcess::Gaussian { variance } => format!("Gaussian noise var {variance}"),
        NoiseProcess::UniformBounded { bound } => format!("uniform noise |n| <= {bound}"),
    };
    let variants: Vec<String> = config
        .algorithms
        .iter()
        .map(|a| match a.kind {
            AlgorithmKind::Vnlms { mu } => format!("{} (mu={mu})", a.name),
            AlgorithmKind::DsVnlms { threshold } => match threshold.mode {
                ThresholdMode::Fixed { gamma } => format!("{} (gamma={gamma:.4})", a.name),
                ThresholdMode::TimeVarying {
                    tau_transient,
                    tau_steady,
                    ..
                } => format!("{} (tau {tau_transient}/{tau_steady})", a.name),
            },
        })
        .collect();
    format!("{input}, {noise}; {}", variants.join(", "))
}
