//! Streaming Volterra NLMS update laws.
//!
//! Both filters share the normalization `α(k) = xᵀ(k)x(k) + δ` and the
//! update direction `e(k)x(k)`:
//!
//! * VNLMS: `w(k+1) = w(k) + (μ/α) e x`, every sample.
//! * DS-VNLMS: `w(k+1) = w(k) + (μ̄/α) e x` only when `|e| > γ̄`, with
//!   `μ̄ = 1 − γ̄/|e|`. Otherwise `w` is left untouched.
//!
//! The threshold `γ̄` is either fixed or switched between
//! `sqrt(τ_transient σₙ²)` and `sqrt(τ_steady σₙ²)` by counting updates in a
//! sliding window of the last `E` iterations.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::DelayLine;
use crate::volterra::{self, KernelVector, Regressor, VolterraConfig};

/// Adaptive Volterra filter state: `w(k)`, the delay line and the iteration count.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    config: VolterraConfig,
    w: KernelVector,
    delay: DelayLine,
    k: u64,
}

impl FilterState {
    /// `w(0) = 0`, zero-primed delay line.
    pub fn new(config: VolterraConfig) -> Self {
        Self {
            w: KernelVector::zeros(&config),
            delay: DelayLine::new(config.taps()),
            config,
            k: 0,
        }
    }

    pub fn with_weights(config: VolterraConfig, w: KernelVector) -> Result<Self> {
        if w.len() != volterra::total_dimension(&config) {
            return Err(Error::DimensionMismatch {
                expected: volterra::total_dimension(&config),
                found: w.len(),
            });
        }
        Ok(Self {
            w,
            ..Self::new(config)
        })
    }

    pub fn config(&self) -> &VolterraConfig {
        &self.config
    }

    pub fn weights(&self) -> &KernelVector {
        &self.w
    }

    pub fn delay_line(&self) -> &[f64] {
        self.delay.as_slice()
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    /// x(k) for the current delay line.
    pub fn regressor(&self) -> Regressor {
        volterra::expand(self.delay.as_slice(), &self.config).expect("delay line sized by config")
    }
}

/// Shifts `x_new` into lag 0.
pub fn push_sample(state: &mut FilterState, x_new: f64) -> Result<()> {
    if !x_new.is_finite() {
        return Err(Error::NonFinite {
            what: "input sample",
        });
    }
    state.delay.push(x_new);
    Ok(())
}

/// Telemetry of one filter iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// a-priori error `d(k) − wᵀ(k)x(k)`
    pub e: f64,
    pub updated: bool,
    /// `μ̄(k)` for DS-VNLMS (0 when not updated), `μ` for VNLMS
    pub mu_bar: f64,
    /// `xᵀx + δ`
    pub alpha: f64,
    pub gamma_used: f64,
    pub y_hat: f64,
}

struct Prepared {
    x: Regressor,
    y_hat: f64,
    e: f64,
    alpha: f64,
}

fn prepare(state: &FilterState, d: f64) -> Result<Prepared> {
    if !d.is_finite() {
        return Err(Error::NonFinite {
            what: "desired sample",
        });
    }
    let x = state.regressor();
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "regressor" });
    }
    let y_hat = volterra::dot(state.w.as_slice(), x.as_slice());
    let alpha = x.energy() + state.config.regularization();
    if !(alpha > 0.0 && alpha.is_finite() && y_hat.is_finite()) {
        return Err(Error::NonFinite {
            what: "normalization",
        });
    }
    Ok(Prepared {
        e: d - y_hat,
        x,
        y_hat,
        alpha,
    })
}

fn apply(state: &mut FilterState, x: &Regressor, gain: f64) {
    for (w, x) in state.w.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *w += gain * x;
    }
}

/// One DS-VNLMS iteration with threshold `gamma`. The delay line must already
/// hold x(k). On error nothing is modified.
pub fn ds_vnlms_step(state: &mut FilterState, d: f64, gamma: f64) -> Result<StepOutcome> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold must be finite and nonnegative, got {gamma}"
        )));
    }
    let Prepared { x, y_hat, e, alpha } = prepare(state, d)?;
    let updated = e.abs() > gamma;
    let mu_bar = if updated {
        let mu_bar = 1.0 - gamma / e.abs();
        apply(state, &x, mu_bar / alpha * e);
        mu_bar
    } else {
        0.0
    };
    state.k += 1;
    Ok(StepOutcome {
        e,
        updated,
        mu_bar,
        alpha,
        gamma_used: gamma,
        y_hat,
    })
}

/// Rejects step sizes outside the NLMS stability range `(0, 2)`.
pub fn validate_step_size(mu: f64) -> Result<()> {
    if mu > 0.0 && mu < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "VNLMS step size must lie in (0, 2), got {mu}"
        )))
    }
}

/// One conventional VNLMS iteration with constant step size `mu`.
pub fn vnlms_step(state: &mut FilterState, d: f64, mu: f64) -> Result<StepOutcome> {
    validate_step_size(mu)?;
    let Prepared { x, y_hat, e, alpha } = prepare(state, d)?;
    apply(state, &x, mu / alpha * e);
    state.k += 1;
    Ok(StepOutcome {
        e,
        updated: true,
        mu_bar: mu,
        alpha,
        gamma_used: 0.0,
        y_hat,
    })
}

/// Smallest threshold giving a nonincreasing `‖w̃(k)‖²` when `|n(k)| <= bound`.
pub fn gamma_for_known_bound(bound: f64) -> Result<f64> {
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise bound must be positive and finite, got {bound}"
        )));
    }
    Ok(2.0 * bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdMode {
    Fixed {
        gamma: f64,
    },
    /// `γ̄(k) = sqrt(τ(k) σₙ²)`
    TimeVarying {
        tau_transient: f64,
        tau_steady: f64,
        sigma_n_sq: f64,
    },
}

pub const DEFAULT_WINDOW_LENGTH: usize = 20;
pub const DEFAULT_STEADY_UPDATE_THRESHOLD: usize = 5;

fn default_window_length() -> usize {
    DEFAULT_WINDOW_LENGTH
}

fn default_steady_update_threshold() -> usize {
    DEFAULT_STEADY_UPDATE_THRESHOLD
}

/// Threshold rule plus the transient detector.
///
/// The detector runs in both modes: it selects `τ(k)` in time-varying mode and
/// labels iterations as transient or steady-state for the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    #[serde(flatten)]
    pub mode: ThresholdMode,
    /// `E`
    #[serde(default = "default_window_length")]
    pub window_length: usize,
    /// Fewer updates than this in a full window means steady state.
    #[serde(default = "default_steady_update_threshold")]
    pub steady_update_threshold: usize,
}

impl ThresholdPolicy {
    pub fn fixed(gamma: f64) -> Self {
        Self {
            mode: ThresholdMode::Fixed { gamma },
            window_length: DEFAULT_WINDOW_LENGTH,
            steady_update_threshold: DEFAULT_STEADY_UPDATE_THRESHOLD,
        }
    }

    /// `γ̄ = sqrt(τ σₙ²)`
    pub fn fixed_tau(tau: f64, sigma_n_sq: f64) -> Self {
        Self::fixed((tau * sigma_n_sq).sqrt())
    }

    pub fn time_varying(tau_transient: f64, tau_steady: f64, sigma_n_sq: f64) -> Self {
        Self {
            mode: ThresholdMode::TimeVarying {
                tau_transient,
                tau_steady,
                sigma_n_sq,
            },
            window_length: DEFAULT_WINDOW_LENGTH,
            steady_update_threshold: DEFAULT_STEADY_UPDATE_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        match self.mode {
            ThresholdMode::Fixed { gamma } => {
                if !(gamma.is_finite() && gamma >= 0.0) {
                    problems.push(format!("gamma must be finite and nonnegative, got {gamma}"));
                }
            }
            ThresholdMode::TimeVarying {
                tau_transient,
                tau_steady,
                sigma_n_sq,
            } => {
                if !(1.0..=5.0).contains(&tau_transient) {
                    problems.push(format!(
                        "tau_transient must lie in [1, 5], got {tau_transient}"
                    ));
                }
                if !(5.0..=9.0).contains(&tau_steady) {
                    problems.push(format!("tau_steady must lie in [5, 9], got {tau_steady}"));
                }
                if !(sigma_n_sq.is_finite() && sigma_n_sq > 0.0) {
                    problems.push(format!("sigma_n_sq must be positive, got {sigma_n_sq}"));
                }
            }
        }
        if self.window_length == 0 {
            problems.push("window_length must be at least 1".into());
        }
        if self.steady_update_threshold == 0 || self.steady_update_threshold > self.window_length {
            problems.push(format!(
                "steady_update_threshold must lie in [1, window_length], got {}",
                self.steady_update_threshold
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    /// Nominal `τ` of a fixed threshold relative to `sigma_n_sq`.
    pub fn tau(&self, sigma_n_sq: f64) -> Option<f64> {
        match self.mode {
            ThresholdMode::Fixed { gamma } => Some(gamma * gamma / sigma_n_sq),
            ThresholdMode::TimeVarying { .. } => None,
        }
    }
}

fn transient_from_counts(policy: &ThresholdPolicy, filled: usize, updates: usize) -> bool {
    filled < policy.window_length || updates >= policy.steady_update_threshold
}

fn gamma_for_phase(policy: &ThresholdPolicy, transient: bool) -> f64 {
    match policy.mode {
        ThresholdMode::Fixed { gamma } => gamma,
        ThresholdMode::TimeVarying {
            tau_transient,
            tau_steady,
            sigma_n_sq,
        } => {
            let tau = if transient { tau_transient } else { tau_steady };
            (tau * sigma_n_sq).sqrt()
        }
    }
}

/// Transient unless a full window holds fewer than `steady_update_threshold`
/// updates. Only the last `E` flags of `update_history` (oldest first) count.
pub fn is_transient(policy: &ThresholdPolicy, update_history: &[bool]) -> bool {
    let window = &update_history[update_history.len().saturating_sub(policy.window_length)..];
    transient_from_counts(policy, window.len(), window.iter().filter(|&&u| u).count())
}

/// `γ̄` in force given the most recent update flags (oldest first).
pub fn current_gamma(policy: &ThresholdPolicy, update_history: &[bool]) -> f64 {
    gamma_for_phase(policy, is_transient(policy, update_history))
}

/// Policy plus the sliding window of the last `E` update flags.
#[derive(Debug, Clone)]
pub struct ThresholdTracker {
    policy: ThresholdPolicy,
    window: VecDeque<bool>,
    updates_in_window: usize,
}

impl ThresholdTracker {
    pub fn new(policy: ThresholdPolicy) -> Result<Self> {
        policy.validate()?;
        Ok(Self {
            window: VecDeque::with_capacity(policy.window_length),
            updates_in_window: 0,
            policy,
        })
    }

    pub fn policy(&self) -> &ThresholdPolicy {
        &self.policy
    }

    pub fn window(&self) -> impl Iterator<Item = bool> + '_ {
        self.window.iter().copied()
    }

    pub fn gamma(&self) -> f64 {
        gamma_for_phase(&self.policy, self.is_transient())
    }

    pub fn is_transient(&self) -> bool {
        transient_from_counts(&self.policy, self.window.len(), self.updates_in_window)
    }

    pub fn record(&mut self, updated: bool) {
        if self.window.len() == self.policy.window_length && self.window.pop_front() == Some(true) {
            self.updates_in_window -= 1;
        }
        self.window.push_back(updated);
        self.updates_in_window += usize::from(updated);
    }
}

/// A filter that consumes `(x(k), d(k))` pairs.
pub trait AdaptiveFilter {
    fn state(&self) -> &FilterState;

    /// Pushes `x` into the delay line and adapts towards `d`.
    fn process(&mut self, x: f64, d: f64) -> Result<StepOutcome>;

    /// Whether the detector currently reports the transient period.
    fn is_transient(&self) -> bool;
}

#[derive(Debug, Clone)]
pub struct DsVnlms {
    state: FilterState,
    tracker: ThresholdTracker,
}

impl DsVnlms {
    pub fn new(config: VolterraConfig, policy: ThresholdPolicy) -> Result<Self> {
        Ok(Self {
            state: FilterState::new(config),
            tracker: ThresholdTracker::new(policy)?,
        })
    }

    pub fn tracker(&self) -> &ThresholdTracker {
        &self.tracker
    }
}

fn check_pair(x: f64, d: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "input sample",
        });
    }
    if !d.is_finite() {
        return Err(Error::NonFinite {
            what: "desired sample",
        });
    }
    Ok(())
}

impl AdaptiveFilter for DsVnlms {
    fn state(&self) -> &FilterState {
        &self.state
    }

    fn process(&mut self, x: f64, d: f64) -> Result<StepOutcome> {
        check_pair(x, d)?;
        push_sample(&mut self.state, x)?;
        let out = ds_vnlms_step(&mut self.state, d, self.tracker.gamma())?;
        self.tracker.record(out.updated);
        Ok(out)
    }

    fn is_transient(&self) -> bool {
        self.tracker.is_transient()
    }
}

#[derive(Debug, Clone)]
pub struct Vnlms {
    state: FilterState,
    mu: f64,
}

impl Vnlms {
    pub fn new(config: VolterraConfig, mu: f64) -> Result<Self> {
        validate_step_size(mu)?;
        Ok(Self {
            state: FilterState::new(config),
            mu,
        })
    }

    pub fn step_size(&self) -> f64 {
        self.mu
    }
}

impl AdaptiveFilter for Vnlms {
    fn state(&self) -> &FilterState {
        &self.state
    }

    fn process(&mut self, x: f64, d: f64) -> Result<StepOutcome> {
        check_pair(x, d)?;
        push_sample(&mut self.state, x)?;
        vnlms_step(&mut self.state, d, self.mu)
    }

    /// VNLMS updates on every sample; it never leaves the transient regime.
    fn is_transient(&self) -> bool {
        true
    }
}
