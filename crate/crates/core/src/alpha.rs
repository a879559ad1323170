// Copyright 2026 The AWAIRE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! The ALPHA test supermartingale for one requirement, sampling without
//! replacement, with the truncated-shrinkage estimate of the alternative
//! mean.
//!
//! For draws `X_1, X_2, ...` from a population of `B` values in `[0, 1]` the
//! null hypothesis is that the population mean is at most `mu0`. Before draw
//! `j` the null mean of what remains is
//!
//! ```text
//!     mu_j = (B * mu0 - sum_{i<j} X_i) / (B - j + 1)
//! ```
//!
//! and the process is multiplied by
//!
//! ```text
//!     e_j = 1 + (X_j / mu_j - 1) * (eta_j - mu_j) / (1 - mu_j)
//! ```
//!
//! which is the usual ALPHA term rearranged so that `X_j = mu_j` gives
//! exactly one. The estimate `eta_j` shrinks the running mean towards `eta0`
//! with weight `d` and is kept in `(mu_j, 1]`.
//!
//! Everything is accumulated as a natural log. Two boundary regimes leave
//! the formula:
//!
//! * once the observed sum exceeds `B * mu0` the null is impossible and the
//!   state saturates at `+inf`;
//! * once `mu_j >= 1` no remaining draws can contradict the null and every
//!   later term is exactly one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tuning for one ALPHA process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlphaConfig {
    /// Null mean bound.
    pub mu0: f64,
    /// Prior guess of the alternative mean.
    pub eta0: f64,
    /// Weight of `eta0`, in pseudo-observations.
    pub d: u32,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig {
            mu0: 0.5,
            eta0: 0.52,
            d: 50,
        }
    }
}

impl AlphaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 > 0.0 && self.mu0 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mu0 must lie in (0, 1), got {}",
                self.mu0
            )));
        }
        if !(self.eta0 > self.mu0 && self.eta0 <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eta0 must lie in (mu0, 1] = ({}, 1], got {}",
                self.mu0, self.eta0
            )));
        }
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be positive".into()));
        }
        Ok(())
    }

    pub fn with_eta0(self, eta0: f64) -> Self {
        AlphaConfig { eta0, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Active,
    /// `mu_j >= 1`: every further term is one.
    Frozen,
    /// Observed sum exceeds `B * mu0`: the null is false.
    Saturated,
}

/// The outcome of one draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaStep {
    pub term: f64,
    pub log_term: f64,
}

impl AlphaStep {
    const SATURATED: AlphaStep = AlphaStep {
        term: f64::INFINITY,
        log_term: f64::INFINITY,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaState {
    config: AlphaConfig,
    population: usize,
    null_total: f64,
    draws: usize,
    running_sum: f64,
    log_m: f64,
    regime: Regime,
}

impl AlphaState {
    pub fn new(population: usize, config: AlphaConfig) -> Result<Self> {
        config.validate()?;
        if population == 0 {
            return Err(Error::InvalidConfig("population must be non-empty".into()));
        }
        Ok(AlphaState {
            config,
            population,
            null_total: population as f64 * config.mu0,
            draws: 0,
            running_sum: 0.0,
            log_m: 0.0,
            regime: Regime::Active,
        })
    }

    pub fn config(&self) -> &AlphaConfig {
        &self.config
    }

    pub fn population(&self) -> usize {
        self.population
    }

    /// Number of draws observed so far, `j - 1`.
    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn running_sum(&self) -> f64 {
        self.running_sum
    }

    /// `ln M_{j-1}`.
    pub fn log_m(&self) -> f64 {
        self.log_m
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn is_saturated(&self) -> bool {
        self.regime == Regime::Saturated
    }

    /// Null mean of the values not yet drawn; `None` once the population is
    /// exhausted.
    pub fn null_mean(&self) -> Option<f64> {
        (self.draws < self.population)
            .then(|| (self.null_total - self.running_sum) / (self.population - self.draws) as f64)
    }

    /// Truncated-shrinkage estimate `eta_j` for the next draw, given the
    /// current null mean `mu`.
    pub fn shrinkage_eta_at(&self, mu: f64) -> f64 {
        let AlphaConfig { mu0, eta0, d } = self.config;
        let weight = d as f64 + self.draws as f64;
        let shrunk = (d as f64 * eta0 + self.running_sum) / weight;
        let epsilon = (eta0 - mu0) / (2.0 * weight.sqrt());
        shrunk.max(mu + epsilon).min(1.0)
    }

    /// `eta_j` for the next draw. Only meaningful while `0 < mu_j < 1`.
    pub fn shrinkage_eta(&self) -> f64 {
        self.shrinkage_eta_at(self.null_mean().unwrap_or(self.config.mu0))
    }

    /// Folds in one assorter value.
    pub fn step(&mut self, x: f64) -> Result<AlphaStep> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::ValueOutOfRange(x));
        }
        if self.draws >= self.population {
            return Err(Error::PopulationExhausted(self.population));
        }
        let term = match self.regime {
            Regime::Saturated => 1.0,
            Regime::Frozen => 1.0,
            Regime::Active => {
                let mu = self.null_mean().expect("checked above");
                if mu >= 1.0 {
                    self.regime = Regime::Frozen;
                    1.0
                } else if mu <= 0.0 {
                    // mu == 0: only zeros remain under the null. A positive
                    // value saturates below.
                    1.0
                } else {
                    let eta = self.shrinkage_eta_at(mu);
                    (1.0 + (x / mu - 1.0) * (eta - mu) / (1.0 - mu)).max(0.0)
                }
            }
        };
        self.running_sum += x;
        self.draws += 1;
        if self.regime == Regime::Saturated || self.running_sum > self.null_total {
            self.regime = Regime::Saturated;
            self.log_m = f64::INFINITY;
            return Ok(AlphaStep::SATURATED);
        }
        let log_term = term.ln();
        self.log_m += log_term;
        Ok(AlphaStep { term, log_term })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(population: usize) -> AlphaState {
        AlphaState::new(population, AlphaConfig::default()).unwrap()
    }

    #[test]
    fn initial_state() {
        let s = state(100);
        assert_eq!(s.log_m(), 0.0);
        assert_eq!(s.draws(), 0);
        assert_eq!(s.null_mean(), Some(0.5));
        assert_eq!(s.regime(), Regime::Active);
        assert!(AlphaState::new(1, AlphaConfig::default()).is_ok());
        assert!(AlphaState::new(0, AlphaConfig::default()).is_err());
        let bad = AlphaConfig::default().with_eta0(0.5);
        assert!(matches!(
            AlphaState::new(100, bad),
            Err(Error::InvalidConfig(_))
        ));
        assert!(AlphaConfig {
            d: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AlphaConfig::default().with_eta0(1.0).validate().is_ok());
        assert!(AlphaConfig::default().with_eta0(1.01).validate().is_err());
    }

    #[test]
    fn first_eta_is_prior() {
        let s = state(10_000);
        let epsilon = 0.02 / (2.0 * 50f64.sqrt());
        assert!((epsilon - 0.001414).abs() < 1e-6);
        assert_eq!(s.shrinkage_eta(), 0.52);
    }

    #[test]
    fn eta_truncates_at_one() {
        // The shrunk mean never exceeds one, but the floor mu_j + epsilon can.
        let mut s = AlphaState::new(
            100,
            AlphaConfig {
                d: 1,
                eta0: 1.0,
                mu0: 0.5,
            },
        )
        .unwrap();
        for _ in 0..49 {
            s.step(0.0).unwrap();
        }
        let mu = s.null_mean().unwrap();
        assert!(mu + 0.5 / (2.0 * 50f64.sqrt()) > 1.0);
        assert_eq!(s.shrinkage_eta(), 1.0);
    }

    #[test]
    fn eta_floor_above_null_mean() {
        let mut s = state(10_000);
        for _ in 0..200 {
            s.step(0.0).unwrap();
        }
        let mu = s.null_mean().unwrap();
        let epsilon = 0.02 / (2.0 * 250f64.sqrt());
        assert_eq!(s.shrinkage_eta(), mu + epsilon);
        assert!(s.shrinkage_eta() > mu);
    }

    #[test]
    fn first_step_terms() {
        let mut s = state(1_000_000);
        let step = s.step(1.0).unwrap();
        assert!((step.term - 1.04).abs() < 1e-12);
        let mut s = state(1_000_000);
        let step = s.step(0.0).unwrap();
        assert!((step.term - 0.96).abs() < 1e-12);
        assert_eq!(s.log_m(), step.term.ln());
    }

    #[test]
    fn value_at_null_mean_is_neutral() {
        let mut s = state(1_000);
        for x in [1.0, 0.0, 0.5, 1.0, 1.0] {
            s.step(x).unwrap();
        }
        let mu = s.null_mean().unwrap();
        let before = s.log_m();
        let step = s.step(mu).unwrap();
        assert_eq!(step.term, 1.0);
        assert_eq!(s.log_m(), before);
    }

    #[test]
    fn null_mean_update() {
        let mut s = state(100);
        for x in [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0] {
            s.step(x).unwrap();
        }
        let mu = s.null_mean().unwrap();
        assert!((mu - 43.0 / 90.0).abs() < 1e-15);
        assert!((mu - 0.4778).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = state(1);
        assert_eq!(s.step(1.5), Err(Error::ValueOutOfRange(1.5)));
        assert!(s.step(f64::NAN).is_err());
        s.step(0.0).unwrap();
        assert_eq!(s.step(0.0), Err(Error::PopulationExhausted(1)));
    }

    #[test]
    fn saturates_when_sum_exceeds_null_total() {
        let mut s = state(10);
        for _ in 0..5 {
            assert!(s.step(1.0).unwrap().term.is_finite());
        }
        // Sum 5 equals B * mu0: null mean of the rest is zero.
        assert_eq!(s.null_mean(), Some(0.0));
        assert!(!s.is_saturated());
        assert_eq!(s.step(0.0).unwrap().term, 1.0);
        let step = s.step(0.5).unwrap();
        assert_eq!(step.log_term, f64::INFINITY);
        assert!(s.is_saturated());
        assert_eq!(s.log_m(), f64::INFINITY);
        assert_eq!(s.step(0.0).unwrap().log_term, f64::INFINITY);
    }

    #[test]
    fn freezes_when_null_cannot_be_contradicted() {
        let mut s = state(10);
        for _ in 0..6 {
            s.step(0.0).unwrap();
        }
        // (5 - 0) / 4 >= 1
        assert!(s.null_mean().unwrap() >= 1.0);
        let before = s.log_m();
        for x in [0.0, 1.0, 0.5, 1.0] {
            assert_eq!(s.step(x).unwrap().term, 1.0);
        }
        assert_eq!(s.regime(), Regime::Frozen);
        assert_eq!(s.log_m(), before);
    }

    #[test]
    fn zero_term_sends_log_to_minus_infinity() {
        let mut s = AlphaState::new(
            1_000,
            AlphaConfig {
                d: 1,
                eta0: 1.0,
                mu0: 0.5,
            },
        )
        .unwrap();
        s.step(1.0).unwrap();
        let step = s.step(0.0).unwrap();
        assert_eq!(step.term, 0.0);
        assert_eq!(s.log_m(), f64::NEG_INFINITY);
        s.step(1.0).unwrap();
        assert_eq!(s.log_m(), f64::NEG_INFINITY);
    }

    fn values() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![Just(0.0), Just(0.5), Just(1.0)], 1..200)
    }

    proptest! {
        #[test]
        fn terms_are_nonnegative(xs in values(), d in 1u32..600, eta0 in 0.501f64..1.0) {
            let mut s = AlphaState::new(xs.len(), AlphaConfig { d, eta0, mu0: 0.5 }).unwrap();
            for &x in &xs {
                let step = s.step(x).unwrap();
                prop_assert!(step.term >= 0.0);
                prop_assert!(!s.log_m().is_nan());
            }
        }

        #[test]
        fn saturation_is_sound(xs in values()) {
            let mut s = state(xs.len());
            let mut sum = 0.0;
            for &x in &xs {
                s.step(x).unwrap();
                sum += x;
                prop_assert_eq!(s.is_saturated(), sum > 0.5 * xs.len() as f64);
            }
        }

        #[test]
        fn term_increases_with_the_draw(
            xs in values(),
            extra in 1usize..400,
            a in 0.0f64..=1.0,
            b in 0.0f64..=1.0,
        ) {
            // Under any population mean at or below mu_j the expected term is
            // then at most one, which is what makes mu0 = 1/2 cover the whole
            // composite null.
            let mut s = AlphaState::new(xs.len() + extra, AlphaConfig::default()).unwrap();
            for &x in &xs {
                s.step(x).unwrap();
            }
            let (lo, hi) = (a.min(b), a.max(b));
            let mut s_lo = s.clone();
            let mut s_hi = s;
            prop_assert!(s_lo.step(lo).unwrap().term <= s_hi.step(hi).unwrap().term);
        }

        #[test]
        fn positive_draws_favour_smaller_null_mean(
            n in 1usize..50,
            mu_lo in 0.3f64..0.5,
            gap in 0.0f64..0.1,
        ) {
            // A vote against the requirement (x = 1) is stronger evidence
            // against a smaller null mean.
            let config = |mu0| AlphaConfig { mu0, eta0: 0.7, d: 50 };
            let mut lo = AlphaState::new(10_000, config(mu_lo)).unwrap();
            let mut hi = AlphaState::new(10_000, config(mu_lo + gap)).unwrap();
            for _ in 0..n {
                lo.step(1.0).unwrap();
                hi.step(1.0).unwrap();
                prop_assert!(hi.log_m() <= lo.log_m() + 1e-12);
            }
        }
    }

    #[test]
    fn zero_draw_is_not_monotone_in_null_mean() {
        // The term for x = 0 is (1 - eta) / (1 - mu), increasing in mu, so
        // M_j is not pointwise decreasing in mu0.
        let config = |mu0| AlphaConfig {
            mu0,
            eta0: 0.7,
            d: 50,
        };
        let mut lo = AlphaState::new(1, config(0.3)).unwrap();
        let mut hi = AlphaState::new(1, config(0.4)).unwrap();
        let lo = lo.step(0.0).unwrap().term;
        let hi = hi.step(0.0).unwrap().term;
        assert!((lo - 0.3 / 0.7).abs() < 1e-12);
        assert!((hi - 0.3 / 0.6).abs() < 1e-12);
        assert!(hi > lo);
    }
}
