//! Per-iteration robustness ledger and the checks run against it.
//!
//! With `w̃(k) = w* − w(k)`, `ẽ(k) = w̃ᵀ(k)x(k)` and `c(k) = μ̄(k)/α(k)`, every
//! DS-VNLMS iteration satisfies either
//!
//! ```text
//! ‖w̃(k+1)‖² = ‖w̃(k)‖²                                  (no update)
//! ‖w̃(k+1)‖² + c(k) ẽ²(k) < ‖w̃(k)‖² + c(k) n²(k)          (update)
//! ```
//!
//! The two sides of the update inequality are stored as `lhs` (l(k)) and
//! `rhs` (r(k)). Summing over `0..K` gives the global energy ratio
//!
//! ```text
//! (‖w̃(K)‖² + Σ_up c ẽ²) / (‖w̃(0)‖² + Σ_up c n²) < 1.
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::StepOutcome;
use crate::special;
use crate::volterra::{KernelVector, Regressor};

/// Relative slack on the strict local and global inequalities.
pub const STRICT_SLACK: f64 = 1e-10;
/// Relative tolerance on the identities (no-update equality, `e = ẽ + n`).
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u64,
    pub e: f64,
    pub e_tilde: f64,
    pub n: f64,
    #[serde(with = "flag")]
    pub updated: bool,
    pub mu_bar: f64,
    pub alpha: f64,
    pub gamma_used: f64,
    pub wtilde_sq_before: f64,
    pub wtilde_sq_after: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl IterationRecord {
    /// `μ̄/α` on updated iterations, zero otherwise.
    pub fn gain(&self) -> f64 {
        if self.updated {
            self.mu_bar / self.alpha
        } else {
            0.0
        }
    }
}

mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!(
                "updated flag must be 0 or 1, got {other}"
            ))),
        }
    }
}

/// Builds the ledger row for iteration `k` from the weights around the step.
///
/// `x` is the regressor the step used and `n` the noise sample injected into
/// `d(k)`; both are simulation-only knowledge.
pub fn record_iteration(
    k: u64,
    w_star: &KernelVector,
    w_before: &KernelVector,
    w_after: &KernelVector,
    x: &Regressor,
    outcome: &StepOutcome,
    n: f64,
) -> Result<IterationRecord> {
    for len in [w_before.len(), w_after.len(), x.len()] {
        if len != w_star.len() {
            return Err(Error::DimensionMismatch {
                expected: w_star.len(),
                found: len,
            });
        }
    }
    let e_tilde: f64 = w_star
        .as_slice()
        .iter()
        .zip(w_before.as_slice())
        .zip(x.as_slice())
        .map(|((s, w), x)| (s - w) * x)
        .sum();
    let wtilde_sq_before = w_star.distance_sq(w_before)?;
    let wtilde_sq_after = w_star.distance_sq(w_after)?;
    let mut record = IterationRecord {
        k,
        e: outcome.e,
        e_tilde,
        n,
        updated: outcome.updated,
        mu_bar: outcome.mu_bar,
        alpha: outcome.alpha,
        gamma_used: outcome.gamma_used,
        wtilde_sq_before,
        wtilde_sq_after,
        lhs: wtilde_sq_after,
        rhs: wtilde_sq_before,
    };
    let c = record.gain();
    if record.updated {
        record.lhs += c * e_tilde * e_tilde;
        record.rhs += c * n * n;
    }
    Ok(record)
}

/// Local inequality (update) or equality (no update) for one record.
pub fn check_local(record: &IterationRecord) -> bool {
    if record.updated {
        record.lhs < record.rhs + STRICT_SLACK * record.rhs.max(1.0)
    } else {
        (record.lhs - record.rhs).abs() <= IDENTITY_TOL * record.rhs.abs()
    }
}

/// `e = ẽ + n` up to rounding relative to `magnitude` (typically the larger
/// of `|d(k)|` and `|ŷ(k)|`, the operands whose difference produced `e`).
pub fn check_decomposition(record: &IterationRecord, magnitude: f64) -> bool {
    let scale = magnitude.max(record.e.abs()).max(1.0);
    (record.e - record.e_tilde - record.n).abs() <= IDENTITY_TOL * scale
}

/// `lhs` and `rhs` agree with the columns they are built from.
pub fn check_consistency(record: &IterationRecord) -> bool {
    let c = record.gain();
    let (lhs, rhs) = if record.updated {
        (
            record.wtilde_sq_after + c * record.e_tilde * record.e_tilde,
            record.wtilde_sq_before + c * record.n * record.n,
        )
    } else {
        (record.wtilde_sq_after, record.wtilde_sq_before)
    };
    let close = |a: f64, b: f64| (a - b).abs() <= IDENTITY_TOL * a.abs().max(b.abs());
    close(lhs, record.lhs) && close(rhs, record.rhs)
}

/// Improvement is guaranteed on updates where `ẽ² >= n²`.
pub fn check_conditional_improvement(record: &IterationRecord) -> bool {
    !(record.updated
        && record.e_tilde * record.e_tilde >= record.n * record.n
        && record.wtilde_sq_after >= record.wtilde_sq_before)
}

/// Running sums of the global energy ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalRatio {
    initial: f64,
    current: f64,
    error_energy: f64,
    noise_energy: f64,
    updates: usize,
}

impl GlobalRatio {
    pub fn new(wtilde_sq_initial: f64) -> Self {
        Self {
            initial: wtilde_sq_initial,
            current: wtilde_sq_initial,
            error_energy: 0.0,
            noise_energy: 0.0,
            updates: 0,
        }
    }

    pub fn push(&mut self, record: &IterationRecord) {
        self.current = record.wtilde_sq_after;
        if record.updated {
            let c = record.gain();
            self.error_energy += c * record.e_tilde * record.e_tilde;
            self.noise_energy += c * record.n * record.n;
            self.updates += 1;
        }
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn numerator(&self) -> f64 {
        self.current + self.error_energy
    }

    pub fn denominator(&self) -> f64 {
        self.initial + self.noise_energy
    }

    pub fn value(&self) -> Result<f64> {
        let den = self.denominator();
        if den == 0.0 {
            return Err(Error::UndefinedRatio);
        }
        Ok(self.numerator() / den)
    }

    /// `None` while no update has happened (the bound is vacuous).
    pub fn holds(&self) -> Option<bool> {
        if self.updates == 0 {
            return None;
        }
        Some(match self.value() {
            Ok(r) => r < 1.0 + STRICT_SLACK,
            Err(_) => true,
        })
    }
}

/// Global energy ratio after the records `0..K`; sums run over updated
/// iterations only.
pub fn global_ratio(records: &[IterationRecord], wtilde_sq_initial: f64) -> Result<f64> {
    let mut ratio = GlobalRatio::new(wtilde_sq_initial);
    records.iter().for_each(|r| ratio.push(r));
    ratio.value()
}

/// Iterations `k` whose prefix ratio (records `0..=k`, at least one update)
/// is not below one.
pub fn global_prefix_violations(records: &[IterationRecord], wtilde_sq_initial: f64) -> Vec<u64> {
    let mut ratio = GlobalRatio::new(wtilde_sq_initial);
    records
        .iter()
        .filter_map(|r| {
            ratio.push(r);
            (ratio.holds() == Some(false)).then_some(r.k)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MonotonicityStats {
    pub increase_count: usize,
    pub increases_in_transient: usize,
    pub iterations: usize,
}

impl MonotonicityStats {
    pub fn increase_fraction(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.increase_count as f64 / self.iterations as f64
        }
    }
}

/// Counts iterations with `‖w̃(k+1)‖² > ‖w̃(k)‖²`. `transient` holds the
/// detector label of each record, when available.
pub fn monotonicity_stats(
    records: &[IterationRecord],
    transient: Option<&[bool]>,
) -> MonotonicityStats {
    let mut stats = MonotonicityStats {
        iterations: records.len(),
        ..Default::default()
    };
    for (i, r) in records.iter().enumerate() {
        if r.wtilde_sq_after > r.wtilde_sq_before {
            stats.increase_count += 1;
            if transient.and_then(|t| t.get(i)).copied().unwrap_or(false) {
                stats.increases_in_transient += 1;
            }
        }
    }
    stats
}

/// `erfc(sqrt(τ/2))`: the probability that a zero-mean Gaussian error with
/// variance σₙ² exceeds `γ̄ = sqrt(τ σₙ²)` in magnitude.
pub fn erfc_bound(tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tau must be positive, got {tau}"
        )));
    }
    Ok(special::erfc((tau / 2.0).sqrt()))
}

/// Summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub total_iterations: usize,
    pub update_count: usize,
    pub update_rate: f64,
    pub local_violations: usize,
    /// Final global ratio; `None` when no update happened.
    pub global_ratio: Option<f64>,
    pub global_violations: usize,
    pub conditional_violations: usize,
    pub decomposition_violations: usize,
    pub increase_count: usize,
    pub increase_fraction: f64,
    pub increases_in_transient: usize,
    /// `erfc(sqrt(τ/2))` for the nominal τ of a fixed threshold.
    pub erfc_bound: Option<f64>,
    pub wtilde_sq_initial: f64,
    pub wtilde_sq_final: f64,
}

impl RunVerdict {
    /// Every checked property held.
    pub fn is_clean(&self) -> bool {
        self.local_violations == 0
            && self.global_violations == 0
            && self.conditional_violations == 0
            && self.decomposition_violations == 0
    }

    /// Flat `key=value` pairs in a fixed order.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
        vec![
            ("total_iterations", self.total_iterations.to_string()),
            ("update_count", self.update_count.to_string()),
            ("update_rate", fmt_f64(self.update_rate)),
            ("local_violations", self.local_violations.to_string()),
            ("global_ratio", opt(self.global_ratio)),
            ("global_violations", self.global_violations.to_string()),
            (
                "conditional_violations",
                self.conditional_violations.to_string(),
            ),
            (
                "decomposition_violations",
                self.decomposition_violations.to_string(),
            ),
            ("increase_count", self.increase_count.to_string()),
            ("increase_fraction", fmt_f64(self.increase_fraction)),
            (
                "increases_in_transient",
                self.increases_in_transient.to_string(),
            ),
            ("erfc_bound", opt(self.erfc_bound)),
            ("wtilde_sq_initial", fmt_f64(self.wtilde_sq_initial)),
            ("wtilde_sq_final", fmt_f64(self.wtilde_sq_final)),
        ]
    }
}

/// Lossless rendering with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Order-independent merge of run verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateVerdict {
    pub runs: usize,
    pub total_iterations: usize,
    pub update_count: usize,
    pub local_violations: usize,
    pub global_violations: usize,
    pub conditional_violations: usize,
    pub decomposition_violations: usize,
    pub increase_count: usize,
    pub max_global_ratio: Option<f64>,
    pub mean_update_rate: f64,
    pub mean_increase_fraction: f64,
    pub mean_wtilde_sq_final: f64,
}

fn sorted_mean(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn aggregate(verdicts: &[RunVerdict]) -> AggregateVerdict {
    let sum = |f: fn(&RunVerdict) -> usize| verdicts.iter().map(f).sum::<usize>();
    AggregateVerdict {
        runs: verdicts.len(),
        total_iterations: sum(|v| v.total_iterations),
        update_count: sum(|v| v.update_count),
        local_violations: sum(|v| v.local_violations),
        global_violations: sum(|v| v.global_violations),
        conditional_violations: sum(|v| v.conditional_violations),
        decomposition_violations: sum(|v| v.decomposition_violations),
        increase_count: sum(|v| v.increase_count),
        max_global_ratio: verdicts
            .iter()
            .filter_map(|v| v.global_ratio)
            .max_by(f64::total_cmp),
        mean_update_rate: sorted_mean(verdicts.iter().map(|v| v.update_rate).collect()),
        mean_increase_fraction: sorted_mean(verdicts.iter().map(|v| v.increase_fraction).collect()),
        mean_wtilde_sq_final: sorted_mean(verdicts.iter().map(|v| v.wtilde_sq_final).collect()),
    }
}

/// Append-only ledger bound to one run.
#[derive(Debug, Clone)]
pub struct Ledger {
    w_star: KernelVector,
    wtilde_sq_initial: f64,
    records: Vec<IterationRecord>,
    transient: Vec<bool>,
    ratio: GlobalRatio,
    global_violations: usize,
    decomposition_violations: usize,
}

impl Ledger {
    pub fn new(w_star: KernelVector, w_initial: &KernelVector) -> Result<Self> {
        let wtilde_sq_initial = w_star.distance_sq(w_initial)?;
        Ok(Self {
            w_star,
            wtilde_sq_initial,
            records: Vec::new(),
            transient: Vec::new(),
            ratio: GlobalRatio::new(wtilde_sq_initial),
            global_violations: 0,
            decomposition_violations: 0,
        })
    }

    /// Appends iteration `k = len()`. `transient` is the detector label in
    /// force when the step ran.
    pub fn observe(
        &mut self,
        w_before: &KernelVector,
        w_after: &KernelVector,
        x: &Regressor,
        outcome: &StepOutcome,
        n: f64,
        transient: bool,
    ) -> Result<&IterationRecord> {
        let k = self.records.len() as u64;
        let record = record_iteration(k, &self.w_star, w_before, w_after, x, outcome, n)?;
        let d = outcome.e + outcome.y_hat;
        if !check_decomposition(&record, d.abs().max(outcome.y_hat.abs())) {
            self.decomposition_violations += 1;
        }
        self.ratio.push(&record);
        if self.ratio.holds() == Some(false) {
            self.global_violations += 1;
        }
        self.records.push(record);
        self.transient.push(transient);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn transient_flags(&self) -> &[bool] {
        &self.transient
    }

    pub fn wtilde_sq_initial(&self) -> f64 {
        self.wtilde_sq_initial
    }

    /// ‖w̃(k)‖² for `k = 0..=K`.
    pub fn wtilde_sq_curve(&self) -> Vec<f64> {
        std::iter::once(self.wtilde_sq_initial)
            .chain(self.records.iter().map(|r| r.wtilde_sq_after))
            .collect()
    }

    /// Summarizes the run; `tau` is the nominal τ of a fixed threshold.
    pub fn verdict(&self, tau: Option<f64>) -> RunVerdict {
        let total = self.records.len();
        let update_count = self.records.iter().filter(|r| r.updated).count();
        let mono = monotonicity_stats(&self.records, Some(&self.transient));
        RunVerdict {
            total_iterations: total,
            update_count,
            update_rate: if total == 0 {
                0.0
            } else {
                update_count as f64 / total as f64
            },
            local_violations: self.records.iter().filter(|r| !check_local(r)).count(),
            global_ratio: if update_count == 0 {
                None
            } else {
                self.ratio.value().ok()
            },
            global_violations: self.global_violations,
            conditional_violations: self
                .records
                .iter()
                .filter(|r| !check_conditional_improvement(r))
                .count(),
            decomposition_violations: self.decomposition_violations,
            increase_count: mono.increase_count,
            increase_fraction: mono.increase_fraction(),
            increases_in_transient: mono.increases_in_transient,
            erfc_bound: tau.and_then(|t| erfc_bound(t).ok()),
            wtilde_sq_initial: self.wtilde_sq_initial,
            wtilde_sq_final: self
                .records
                .last()
                .map_or(self.wtilde_sq_initial, |r| r.wtilde_sq_after),
        }
    }
}

pub const TRACE_COLUMNS: [&str; 12] = [
    "k",
    "e",
    "e_tilde",
    "n",
    "updated",
    "mu_bar",
    "alpha",
    "gamma_used",
    "wtilde_sq_before",
    "wtilde_sq_after",
    "lhs",
    "rhs",
];

/// Writes the per-iteration trace as CSV (header row, LF line endings,
/// floats with 17 significant digits).
pub fn write_trace<W: Write>(records: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.e),
            fmt_f64(r.e_tilde),
            fmt_f64(r.n),
            u8::from(r.updated).to_string(),
            fmt_f64(r.mu_bar),
            fmt_f64(r.alpha),
            fmt_f64(r.gamma_used),
            fmt_f64(r.wtilde_sq_before),
            fmt_f64(r.wtilde_sq_after),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<IterationRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(Error::MalformedTrace {
            line: 1,
            reason: format!("expected header {}", TRACE_COLUMNS.join(",")),
        });
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::MalformedTrace {
                line: i + 2,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Findings of re-verifying a stored trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceCheck {
    pub rows: usize,
    pub local_violations: Vec<u64>,
    pub global_violations: Vec<u64>,
    pub consistency_violations: Vec<u64>,
    pub final_ratio: Option<f64>,
}

impl TraceCheck {
    pub fn passed(&self) -> bool {
        self.local_violations.is_empty()
            && self.global_violations.is_empty()
            && self.consistency_violations.is_empty()
    }
}

/// Re-verifies the local and global inequalities on a stored trace, using
/// `‖w̃(0)‖²` from the first row.
pub fn check_trace(records: &[IterationRecord]) -> TraceCheck {
    let initial = records.first().map_or(0.0, |r| r.wtilde_sq_before);
    let pick = |pred: fn(&IterationRecord) -> bool| {
        records
            .iter()
            .filter(|r| !pred(r))
            .map(|r| r.k)
            .collect::<Vec<_>>()
    };
    let updates = records.iter().any(|r| r.updated);
    TraceCheck {
        rows: records.len(),
        local_violations: pick(check_local),
        global_violations: global_prefix_violations(records, initial),
        consistency_violations: pick(check_consistency),
        final_ratio: if updates {
            global_ratio(records, initial).ok()
        } else {
            None
        },
    }
}
