//! Triangular Volterra regressor and kernel layout.
//!
//! A truncated Volterra series of order `P` over a delay line of `N + 1` taps
//! becomes linear in its parameters once every monomial
//! `x(k - l1) * ... * x(k - lp)` with `l1 <= ... <= lp` is stacked into a
//! regressor vector. The constant term is never represented.
//!
//! Layout: blocks by ascending order `p`; inside a block, lag tuples in
//! lexicographic order. For `P = 2, N = 1` this gives
//!
//! ```text
//! 0: x(k)   1: x(k-1)   2: x(k)^2   3: x(k)x(k-1)   4: x(k-1)^2
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regularization used by the reference experiments.
pub const DEFAULT_REGULARIZATION: f64 = 1e-9;

/// Exact binomial coefficient, `None` on overflow of `usize`.
pub(crate) fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) is divisible by i at every step
        acc = acc.checked_mul(n as u128 - k as u128 + i)? / i;
    }
    usize::try_from(acc).ok()
}

/// Number of nondecreasing lag tuples of length `len` whose first lag is
/// at least `lo`, with lags bounded by `memory`.
fn completions(memory: usize, lo: usize, len: usize) -> usize {
    binomial(memory - lo + len, len).expect("bounded by the validated dimension")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct VolterraConfig {
    order: usize,
    memory: usize,
    regularization: f64,
    dimension: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    order: usize,
    memory: usize,
    #[serde(default = "default_regularization")]
    regularization: f64,
}

fn default_regularization() -> f64 {
    DEFAULT_REGULARIZATION
}

impl TryFrom<RawConfig> for VolterraConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        VolterraConfig::new(raw.order, raw.memory, raw.regularization)
    }
}

impl From<VolterraConfig> for RawConfig {
    fn from(c: VolterraConfig) -> Self {
        RawConfig {
            order: c.order,
            memory: c.memory,
            regularization: c.regularization,
        }
    }
}

impl VolterraConfig {
    /// Validates `order >= 1`, `regularization > 0` and that the regressor
    /// dimension is representable.
    pub fn new(order: usize, memory: usize, regularization: f64) -> Result<Self> {
        if !(regularization.is_finite() && regularization > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "regularization must be positive and finite, got {regularization}"
            )));
        }
        Self::build(order, memory, regularization)
    }

    /// Layout with `δ = 0`. The normalization `xᵀx + δ` then vanishes on an
    /// all-zero delay line, and filter steps on such a regressor fail.
    pub fn unregularized(order: usize, memory: usize) -> Result<Self> {
        Self::build(order, memory, 0.0)
    }

    fn build(order: usize, memory: usize, regularization: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidConfig(
                "volterra order must be at least 1".into(),
            ));
        }
        let overflow = || Error::DimensionOverflow { order, memory };
        let mut dimension = 0usize;
        for p in 1..=order {
            let n = memory.checked_add(p).ok_or_else(overflow)?;
            let block = binomial(n, p).ok_or_else(overflow)?;
            dimension = dimension.checked_add(block).ok_or_else(overflow)?;
        }
        Ok(Self {
            order,
            memory,
            regularization,
            dimension,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Number of taps in the delay line, `N + 1`.
    pub fn taps(&self) -> usize {
        self.memory + 1
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn with_regularization(self, regularization: f64) -> Result<Self> {
        Self::new(self.order, self.memory, regularization)
    }

    /// Size of the order-`p` block, `C(N + p, p)`.
    pub fn block_len(&self, p: usize) -> usize {
        if p == 0 || p > self.order {
            return 0;
        }
        completions(self.memory, 0, p)
    }

    /// Position of the first order-`p` term.
    pub fn block_offset(&self, p: usize) -> usize {
        (1..p).map(|q| self.block_len(q)).sum()
    }

    /// All terms in canonical order.
    pub fn terms(&self) -> Terms {
        Terms {
            memory: self.memory,
            max_order: self.order,
            next: Some(vec![0]),
        }
    }
}

/// Σ_{p=1..P} C(N+p, p).
pub fn total_dimension(config: &VolterraConfig) -> usize {
    config.dimension
}

/// A Volterra monomial identified by its nondecreasing lag tuple; the order is
/// the tuple length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermIndex {
    lags: Vec<usize>,
}

impl TermIndex {
    pub fn new(lags: Vec<usize>) -> Result<Self> {
        let term = Self { lags };
        if term.lags.is_empty() {
            return Err(term.invalid("order must be at least 1"));
        }
        if term.lags.windows(2).any(|w| w[0] > w[1]) {
            return Err(term.invalid("lags must be nondecreasing"));
        }
        Ok(term)
    }

    pub fn order(&self) -> usize {
        self.lags.len()
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidTerm {
            order: self.lags.len(),
            lags: self.lags.clone(),
            reason: reason.into(),
        }
    }

    fn validate(&self, config: &VolterraConfig) -> Result<()> {
        if self.order() > config.order {
            return Err(self.invalid(format!("order exceeds P = {}", config.order)));
        }
        if let Some(&l) = self.lags.iter().find(|&&l| l > config.memory) {
            return Err(self.invalid(format!("lag {l} exceeds N = {}", config.memory)));
        }
        Ok(())
    }
}

impl fmt::Display for TermIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.lags.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *l == 0 {
                f.write_str("x(k)")?;
            } else {
                write!(f, "x(k-{l})")?;
            }
        }
        Ok(())
    }
}

/// Iterator over the canonical term sequence.
pub struct Terms {
    memory: usize,
    max_order: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for Terms {
    type Item = TermIndex;

    fn next(&mut self) -> Option<TermIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        match succ.iter().rposition(|&l| l < self.memory) {
            Some(i) => {
                let v = succ[i] + 1;
                succ[i..].iter_mut().for_each(|l| *l = v);
                self.next = Some(succ);
            }
            None if succ.len() < self.max_order => {
                self.next = Some(vec![0; succ.len() + 1]);
            }
            None => {}
        }
        Some(TermIndex { lags: current })
    }
}

/// Canonical flat index of `term`.
pub fn position_of(term: &TermIndex, config: &VolterraConfig) -> Result<usize> {
    term.validate(config)?;
    let p = term.order();
    let mut rank = config.block_offset(p);
    let mut lo = 0;
    for (i, &lag) in term.lags.iter().enumerate() {
        let rest = p - i - 1;
        rank += (lo..lag)
            .map(|v| completions(config.memory, v, rest))
            .sum::<usize>();
        lo = lag;
    }
    Ok(rank)
}

/// Inverse of [`position_of`].
pub fn term_at(position: usize, config: &VolterraConfig) -> Result<TermIndex> {
    if position >= config.dimension {
        return Err(Error::PositionOutOfRange {
            position,
            dimension: config.dimension,
        });
    }
    let mut rank = position;
    let mut p = 1;
    while rank >= config.block_len(p) {
        rank -= config.block_len(p);
        p += 1;
    }
    let mut lags = Vec::with_capacity(p);
    let mut lo = 0;
    for i in 0..p {
        let rest = p - i - 1;
        let mut v = lo;
        loop {
            let count = completions(config.memory, v, rest);
            if rank < count {
                break;
            }
            rank -= count;
            v += 1;
        }
        lags.push(v);
        lo = v;
    }
    Ok(TermIndex { lags })
}

/// The expanded input vector x(k).
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor(Vec<f64>);

impl Regressor {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// xᵀx
    pub fn energy(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Stacked Volterra coefficients, same layout as [`Regressor`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KernelVector(Vec<f64>);

impl KernelVector {
    pub fn zeros(config: &VolterraConfig) -> Self {
        Self(vec![0.0; config.dimension])
    }

    pub fn from_vec(config: &VolterraConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != config.dimension {
            return Err(Error::DimensionMismatch {
                expected: config.dimension,
                found: values.len(),
            });
        }
        Ok(Self(values))
    }

    /// Builds a kernel from `(term, coefficient)` pairs; unlisted terms are zero.
    pub fn from_terms<'a>(
        config: &VolterraConfig,
        terms: impl IntoIterator<Item = (&'a TermIndex, f64)>,
    ) -> Result<Self> {
        let mut w = Self::zeros(config);
        for (term, value) in terms {
            w.0[position_of(term, config)?] = value;
        }
        Ok(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// ‖self − other‖²
    pub fn distance_sq(&self, other: &KernelVector) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Expands `delay_line = [x(k), x(k-1), ..., x(k-N)]` into x(k).
///
/// Each order-`p` block is built from the order-`(p-1)` block: terms whose
/// first lag is `l` are `x(k-l)` times the suffix of the previous block that
/// starts at its first tuple with leading lag `l`.
pub fn expand(delay_line: &[f64], config: &VolterraConfig) -> Result<Regressor> {
    check_len(config.taps(), delay_line.len())?;
    let n = config.memory;
    let mut out = Vec::with_capacity(config.dimension);
    out.extend_from_slice(delay_line);
    let mut prev_start = 0;
    for p in 2..=config.order {
        let block_start = out.len();
        let mut skip = 0;
        for (l1, &x) in delay_line.iter().enumerate() {
            for j in prev_start + skip..block_start {
                let v = x * out[j];
                out.push(v);
            }
            // (p-1)-tuples whose first lag is exactly l1
            skip += completions(n, l1, p - 2);
        }
        prev_start = block_start;
    }
    debug_assert_eq!(out.len(), config.dimension);
    Ok(Regressor(out))
}

/// wᵀx
pub fn predict(w: &KernelVector, x: &Regressor) -> Result<f64> {
    check_len(w.len(), x.len())?;
    Ok(dot(&w.0, &x.0))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}
