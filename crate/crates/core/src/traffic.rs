//! Popularity laws and per-object request processes.
//!
//! A traffic scenario is a [`Popularity`] (how requests split across the
//! catalog) combined with a [`Traffic`] model (the total request rate and the
//! shape of each object's inter-request times). Object `m` receives requests
//! at rate `λ_m = Λ p_m`, where `Λ` is the total rate.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stats::neumaier_sum;
use crate::Error;

/// Request probabilities over a catalog, sorted from most to least popular.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity {
    probabilities: Vec<f64>,
    alpha: Option<f64>,
}

impl Popularity {
    /// Zipf law: `p_i ∝ i^{-alpha}` for `i = 1..=catalog_size`.
    pub fn zipf(alpha: f64, catalog_size: usize) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(invalid(format!("zipf exponent must be finite and >= 0, got {alpha}")));
        }
        if catalog_size == 0 {
            return Err(invalid("catalog size must be at least 1"));
        }
        let weights: Vec<f64> = (1..=catalog_size).map(|i| (i as f64).powf(-alpha)).collect();
        // Summing from the tail keeps the small terms from being swallowed.
        let norm = neumaier_sum(weights.iter().rev().copied());
        let probabilities = weights.into_iter().map(|w| w / norm).collect();
        Ok(Self {
            probabilities,
            alpha: Some(alpha),
        })
    }

    /// Builds a popularity law from arbitrary non-negative weights. The
    /// weights are normalized and sorted in non-increasing order.
    pub fn from_weights(weights: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut weights: Vec<f64> = weights.into_iter().collect();
        if weights.is_empty() {
            return Err(invalid("popularity needs at least one object"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(invalid(format!("popularity weights must be finite and >= 0, got {w}")));
        }
        weights.sort_by(|a, b| b.total_cmp(a));
        let norm = neumaier_sum(weights.iter().rev().copied());
        if norm <= 0.0 {
            return Err(invalid("popularity weights sum to zero"));
        }
        Ok(Self {
            probabilities: weights.into_iter().map(|w| w / norm).collect(),
            alpha: None,
        })
    }

    pub fn catalog_size(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Probability of object `rank` (0-based; rank 0 is the most popular).
    pub fn probability(&self, rank: usize) -> f64 {
        self.probabilities[rank]
    }

    /// The Zipf exponent, when the law was built by [`Popularity::zipf`].
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }
}

/// Shape of the per-object inter-request times, shared by all objects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficModel {
    /// Independent reference model: per-object Poisson streams.
    Irm,
    /// Two-branch hyperexponential inter-request times with branch rates
    /// `zλ` and `λ/z`.
    Hyperexp { z: f64 },
}

/// A traffic model together with the aggregate request rate `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traffic {
    pub model: TrafficModel,
    pub total_rate: f64,
}

impl Traffic {
    pub fn irm() -> Self {
        Self {
            model: TrafficModel::Irm,
            total_rate: 1.0,
        }
    }

    pub fn hyperexp(z: f64) -> Result<Self> {
        if !z.is_finite() || z < 1.0 {
            return Err(invalid(format!("hyperexponential z must be >= 1, got {z}")));
        }
        Ok(Self {
            model: TrafficModel::Hyperexp { z },
            total_rate: 1.0,
        })
    }

    pub fn with_total_rate(mut self, total_rate: f64) -> Result<Self> {
        if !total_rate.is_finite() || total_rate <= 0.0 {
            return Err(invalid(format!("total rate must be > 0, got {total_rate}")));
        }
        self.total_rate = total_rate;
        Ok(self)
    }

    /// Whether per-object arrivals are Poisson, so that arrivals see time
    /// averages.
    pub fn is_poisson(&self) -> bool {
        match self.model {
            TrafficModel::Irm => true,
            TrafficModel::Hyperexp { z } => z == 1.0,
        }
    }

    /// The request process of an object with request rate `rate`.
    pub fn process(&self, rate: f64) -> RequestProcess {
        match self.model {
            TrafficModel::Irm => RequestProcess::Poisson { rate },
            TrafficModel::Hyperexp { z } if z == 1.0 => RequestProcess::Poisson { rate },
            TrafficModel::Hyperexp { z } => RequestProcess::Hyperexp2 { rate, z },
        }
    }

    /// Per-object request processes for a catalog.
    pub fn processes(&self, popularity: &Popularity) -> Vec<RequestProcess> {
        popularity
            .probabilities()
            .iter()
            .map(|p| self.process(self.total_rate * p))
            .collect()
    }

    pub fn describe(&self) -> String {
        match self.model {
            TrafficModel::Irm => "irm".to_string(),
            TrafficModel::Hyperexp { z } => format!("hyperexp(z={z})"),
        }
    }
}

/// Renewal process of requests for one object.
///
/// `rate` is always the mean request rate `λ`; the hyperexponential variant
/// picks the fast branch (rate `zλ`) with probability `z/(1+z)`, which keeps
/// the mean inter-request time at exactly `1/λ` for every `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RequestProcess {
    Poisson { rate: f64 },
    Hyperexp2 { rate: f64, z: f64 },
}

impl RequestProcess {
    pub fn poisson(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self::Poisson { rate })
    }

    /// Hyperexponential process; `z = 1` gives a Poisson process.
    pub fn hyperexp2(rate: f64, z: f64) -> Result<Self> {
        check_rate(rate)?;
        if !z.is_finite() || z < 1.0 {
            return Err(invalid(format!("hyperexponential z must be >= 1, got {z}")));
        }
        if z == 1.0 {
            Ok(Self::Poisson { rate })
        } else {
            Ok(Self::Hyperexp2 { rate, z })
        }
    }

    pub fn rate(&self) -> f64 {
        match *self {
            Self::Poisson { rate } | Self::Hyperexp2 { rate, .. } => rate,
        }
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.rate()
    }

    pub fn is_poisson(&self) -> bool {
        matches!(self, Self::Poisson { .. })
    }

    /// Probability of taking the fast branch.
    pub fn branch_prob(&self) -> f64 {
        match *self {
            Self::Poisson { .. } => 1.0,
            Self::Hyperexp2 { z, .. } => z / (1.0 + z),
        }
    }

    /// `(weight, rate)` of each exponential branch.
    pub fn branches(&self) -> [(f64, f64); 2] {
        match *self {
            Self::Poisson { rate } => [(1.0, rate), (0.0, rate)],
            Self::Hyperexp2 { rate, z } => {
                let p = z / (1.0 + z);
                [(p, z * rate), (1.0 - p, rate / z)]
            }
        }
    }

    /// `P(R > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        self.branches()
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, mu)| w * (-mu * t).exp())
            .sum()
    }

    /// Inter-request time cdf `F_R(t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Poisson { rate } => -(-rate * t).exp_m1(),
            Self::Hyperexp2 { .. } => self
                .branches()
                .iter()
                .map(|(w, mu)| w * -(-mu * t).exp_m1())
                .sum(),
        }
    }

    /// `(F_R(t), age_cdf(t))` sharing the exponentials.
    pub fn cdf_and_age(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        match *self {
            Self::Poisson { rate } => {
                let f = -(-rate * t).exp_m1();
                (f, f)
            }
            Self::Hyperexp2 { rate, .. } => {
                let mut f = 0.0;
                let mut age = 0.0;
                for (w, mu) in self.branches() {
                    let g = -(-mu * t).exp_m1();
                    f += w * g;
                    age += rate * w / mu * g;
                }
                (f, age)
            }
        }
    }

    /// Cdf of the age since the last request, `λ ∫_0^t (1 - F_R(u)) du`.
    pub fn age_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let lambda = self.rate();
        match *self {
            Self::Poisson { rate } => -(-rate * t).exp_m1(),
            Self::Hyperexp2 { .. } => self
                .branches()
                .iter()
                .map(|(w, mu)| lambda * w / mu * -(-mu * t).exp_m1())
                .sum(),
        }
    }

    /// Moment generating function `E[e^{sR}]`; `s` must lie below every
    /// branch rate.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        let smallest = self
            .branches()
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(_, mu)| *mu)
            .fold(f64::INFINITY, f64::min);
        if s >= smallest {
            return Err(Error::MgfPole { s, rate: smallest });
        }
        Ok(self
            .branches()
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, mu)| w * mu / (mu - s))
            .sum())
    }

    /// Partial first moment `E[R; R <= t]`.
    pub fn partial_mean(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.branches()
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, mu)| {
                let x = mu * t;
                // (1 - e^{-x}(1 + x)) / mu, written to stay accurate for small x.
                w * (-(-x).exp_m1() - x * (-x).exp()) / mu
            })
            .sum()
    }

    /// Squared coefficient of variation of the inter-request time.
    pub fn scv(&self) -> f64 {
        let second: f64 = self
            .branches()
            .iter()
            .map(|(w, mu)| 2.0 * w / (mu * mu))
            .sum();
        let mean = self.mean();
        second / (mean * mean) - 1.0
    }

    /// Draws one inter-request time.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = rng.sample(Exp1);
        match *self {
            Self::Poisson { rate } => e / rate,
            Self::Hyperexp2 { rate, z } => {
                if rng.gen::<f64>() < z / (1.0 + z) {
                    e / (z * rate)
                } else {
                    e * z / rate
                }
            }
        }
    }

    /// Draws the time to the next request seen from a random instant
    /// (the stationary forward recurrence time).
    pub fn sample_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = rng.sample(Exp1);
        match *self {
            Self::Poisson { rate } => e / rate,
            Self::Hyperexp2 { rate, z } => {
                // Branch weights tilted by the branch means: p/(zλ) vs (1-p)z/λ,
                // which for p = z/(1+z) gives 1/(1+z) on the fast branch.
                let fast = 1.0 / (1.0 + z);
                if rng.gen::<f64>() < fast {
                    e / (z * rate)
                } else {
                    e * z / rate
                }
            }
        }
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(invalid(format!("request rate must be > 0, got {rate}")));
    }
    Ok(())
}
