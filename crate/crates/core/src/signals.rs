//! Input processes, measurement noise and the reference nonlinear channel.
//!
//! Every random stream is a xoshiro256++ generator seeded through
//! `seed_from_u64` (SplitMix64 expansion of the 64-bit seed). Uniform
//! deviates on `[0, 1)` take the top 53 bits of each output word,
//! `(next_u64() >> 11) * 2^-53`. Gaussian deviates use the Box-Muller
//! transform on a pair `(u1, u2)`, with `u1` mapped to `(0, 1]`:
//!
//! ```text
//! r = sqrt(-2 ln(1 - u1)),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
//! ```
//!
//! `z0` is returned first and `z1` on the next draw.

use std::f64::consts::TAU;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volterra::{self, KernelVector, TermIndex, VolterraConfig};

/// Seeded source of uniform and standard normal deviates.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputProcess {
    /// i.i.d. zero-mean Gaussian with the given variance.
    WhiteGaussian { variance: f64 },
    /// `x(k) = a x(k-1) + m(k)`, `m` white Gaussian with the given variance,
    /// started from `x(-1) = 0`.
    Ar1 { coefficient: f64, variance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub process: InputProcess,
    #[serde(default)]
    pub seed: u64,
}

impl SignalSpec {
    pub fn white_gaussian(variance: f64, seed: u64) -> Self {
        Self {
            process: InputProcess::WhiteGaussian { variance },
            seed,
        }
    }

    pub fn ar1(coefficient: f64, variance: f64, seed: u64) -> Self {
        Self {
            process: InputProcess::Ar1 {
                coefficient,
                variance,
            },
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let variance = match self.process {
            InputProcess::WhiteGaussian { variance } => variance,
            InputProcess::Ar1 {
                coefficient,
                variance,
            } => {
                if coefficient.is_nan() || coefficient.abs() >= 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "AR(1) coefficient must lie in (-1, 1), got {coefficient}"
                    )));
                }
                variance
            }
        };
        positive("input variance", variance)
    }

    pub fn generator(&self) -> Result<InputGenerator> {
        self.validate()?;
        Ok(InputGenerator {
            process: self.process,
            stream: SampleStream::new(self.seed),
            state: 0.0,
        })
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

/// Endless input stream.
#[derive(Debug, Clone)]
pub struct InputGenerator {
    process: InputProcess,
    stream: SampleStream,
    state: f64,
}

impl Iterator for InputGenerator {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(match self.process {
            InputProcess::WhiteGaussian { variance } => variance.sqrt() * self.stream.gaussian(),
            InputProcess::Ar1 {
                coefficient,
                variance,
            } => {
                self.state = coefficient * self.state + variance.sqrt() * self.stream.gaussian();
                self.state
            }
        })
    }
}

pub fn generate_input(spec: &SignalSpec, length: usize) -> Result<Vec<f64>> {
    Ok(spec.generator()?.take(length).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseProcess {
    Gaussian {
        variance: f64,
    },
    /// Uniform on `[-bound, bound]`.
    UniformBounded {
        bound: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub process: NoiseProcess,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(variance: f64, seed: u64) -> Self {
        Self {
            process: NoiseProcess::Gaussian { variance },
            seed,
        }
    }

    pub fn uniform_bounded(bound: f64, seed: u64) -> Self {
        Self {
            process: NoiseProcess::UniformBounded { bound },
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// σₙ²; `C²/3` for the bounded uniform law.
    pub fn variance(&self) -> f64 {
        match self.process {
            NoiseProcess::Gaussian { variance } => variance,
            NoiseProcess::UniformBounded { bound } => bound * bound / 3.0,
        }
    }

    /// Hard amplitude bound `C`, if the law has one.
    pub fn bound(&self) -> Option<f64> {
        match self.process {
            NoiseProcess::Gaussian { .. } => None,
            NoiseProcess::UniformBounded { bound } => Some(bound),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.process {
            NoiseProcess::Gaussian { variance } => positive("noise variance", variance),
            NoiseProcess::UniformBounded { bound } => positive("noise bound", bound),
        }
    }

    pub fn generator(&self) -> Result<NoiseGenerator> {
        self.validate()?;
        Ok(NoiseGenerator {
            process: self.process,
            stream: SampleStream::new(self.seed),
        })
    }
}

#[derive(Debug, Clone)]
pub struct NoiseGenerator {
    process: NoiseProcess,
    stream: SampleStream,
}

impl Iterator for NoiseGenerator {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(match self.process {
            NoiseProcess::Gaussian { variance } => variance.sqrt() * self.stream.gaussian(),
            NoiseProcess::UniformBounded { bound } => {
                (bound * (2.0 * self.stream.uniform() - 1.0)).clamp(-bound, bound)
            }
        })
    }
}

pub fn generate_noise(spec: &NoiseSpec, length: usize) -> Result<Vec<f64>> {
    Ok(spec.generator()?.take(length).collect())
}

/// Shift register `[x(k), x(k-1), ..., x(k-N)]`, zero-primed.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine(Vec<f64>);

impl DelayLine {
    pub fn new(taps: usize) -> Self {
        Self(vec![0.0; taps])
    }

    pub fn push(&mut self, x: f64) {
        self.0.rotate_right(1);
        self.0[0] = x;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One nonzero kernel coefficient, as written in channel files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub lags: Vec<usize>,
    pub value: f64,
}

/// The unknown system `w*` together with its own layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    config: VolterraConfig,
    kernel: KernelVector,
}

impl Channel {
    pub fn new(config: VolterraConfig, kernel: KernelVector) -> Result<Self> {
        if kernel.len() != volterra::total_dimension(&config) {
            return Err(Error::DimensionMismatch {
                expected: volterra::total_dimension(&config),
                found: kernel.len(),
            });
        }
        Ok(Self { config, kernel })
    }

    pub fn from_terms(config: VolterraConfig, terms: &[KernelTerm]) -> Result<Self> {
        let indexed = terms
            .iter()
            .map(|t| Ok((TermIndex::new(t.lags.clone())?, t.value)))
            .collect::<Result<Vec<_>>>()?;
        let kernel = KernelVector::from_terms(&config, indexed.iter().map(|(t, v)| (t, *v)))?;
        Self::new(config, kernel)
    }

    pub fn config(&self) -> &VolterraConfig {
        &self.config
    }

    pub fn kernel(&self) -> &KernelVector {
        &self.kernel
    }

    pub fn nonzero_terms(&self) -> Vec<KernelTerm> {
        self.config
            .terms()
            .zip(self.kernel.as_slice())
            .filter(|(_, v)| **v != 0.0)
            .map(|(t, v)| KernelTerm {
                lags: t.lags().to_vec(),
                value: *v,
            })
            .collect()
    }

    /// Re-expresses `w*` in a (larger) filter layout so `w* − w(k)` is defined.
    pub fn embed(&self, target: &VolterraConfig) -> Result<KernelVector> {
        let mut w = KernelVector::zeros(target);
        for (term, &v) in self.config.terms().zip(self.kernel.as_slice()) {
            if v == 0.0 {
                continue;
            }
            let pos = volterra::position_of(&term, target)?;
            w.as_mut_slice()[pos] = v;
        }
        Ok(w)
    }
}

/// `d(k) = -0.76 x(k) + 0.5 x²(k) + 2 x(k) x(k-2) - 0.5 x²(k-3) + n(k)`.
pub fn reference_channel() -> Channel {
    let config =
        VolterraConfig::new(2, 3, volterra::DEFAULT_REGULARIZATION).expect("static channel layout");
    let terms = [
        KernelTerm {
            lags: vec![0],
            value: -0.76,
        },
        KernelTerm {
            lags: vec![0, 0],
            value: 0.5,
        },
        KernelTerm {
            lags: vec![0, 2],
            value: 2.0,
        },
        KernelTerm {
            lags: vec![3, 3],
            value: -0.5,
        },
    ];
    Channel::from_terms(config, &terms).expect("static channel terms")
}

/// `d(k) = w*ᵀ x(k) + n(k)` with a zero-primed delay line.
pub fn desired_signal(channel: &Channel, input: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
    if input.len() != noise.len() {
        return Err(Error::DimensionMismatch {
            expected: input.len(),
            found: noise.len(),
        });
    }
    let mut line = DelayLine::new(channel.config.taps());
    input
        .iter()
        .zip(noise)
        .map(|(&x, &n)| {
            line.push(x);
            let x = volterra::expand(line.as_slice(), &channel.config)?;
            Ok(volterra::predict(&channel.kernel, &x)? + n)
        })
        .collect()
}
