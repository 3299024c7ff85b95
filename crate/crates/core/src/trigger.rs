//! Event trigger for re-identification: re-fit only when the windowed RMSE
//! of one-step prediction errors exceeds a threshold.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::thermal::RcParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriggerError {
    #[error("trigger window not yet full: {have} of {need} residuals")]
    Warmup { have: usize, need: usize },
    #[error("invalid trigger config: {0}")]
    InvalidConfig(String),
    #[error("non-finite residual {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig {
    /// Threshold on the RMSE, K.
    pub rho: f64,
    /// Window length, steps.
    pub n_t: usize,
}

impl TriggerConfig {
    pub fn new(rho: f64, n_t: usize) -> Result<Self, TriggerError> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(TriggerError::InvalidConfig(format!("rho must be > 0, got {rho}")));
        }
        if n_t == 0 {
            return Err(TriggerError::InvalidConfig("n_t must be >= 1".into()));
        }
        Ok(TriggerConfig { rho, n_t })
    }
}

/// Root mean square of the last `n_t` residuals.
pub fn trigger_rmse(buffer: &[f64], n_t: usize) -> Result<f64, TriggerError> {
    if n_t == 0 {
        return Err(TriggerError::InvalidConfig("n_t must be >= 1".into()));
    }
    if buffer.len() < n_t {
        return Err(TriggerError::Warmup {
            have: buffer.len(),
            need: n_t,
        });
    }
    let tail = &buffer[buffer.len() - n_t..];
    Ok((tail.iter().map(|e| e * e).sum::<f64>() / n_t as f64).sqrt())
}

/// `true` iff `rmse > rho` (strict).
pub fn evaluate(rmse: f64, cfg: &TriggerConfig) -> bool {
    rmse > cfg.rho
}

/// Event-triggered parameter update.
pub fn update_theta(gamma: bool, theta_star: &RcParams, theta_prev: &RcParams) -> RcParams {
    if gamma {
        *theta_star
    } else {
        *theta_prev
    }
}

/// Ring buffer of the most recent residuals plus the last decision.
#[derive(Debug, Clone)]
pub struct TriggerState {
    cfg: TriggerConfig,
    buffer: VecDeque<f64>,
    last_gamma: bool,
}

impl TriggerState {
    pub fn new(cfg: TriggerConfig) -> Self {
        TriggerState {
            cfg,
            buffer: VecDeque::with_capacity(cfg.n_t),
            last_gamma: false,
        }
    }

    pub fn config(&self) -> &TriggerConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buffer.len() == self.cfg.n_t
    }

    pub fn last_gamma(&self) -> bool {
        self.last_gamma
    }

    pub fn push(&mut self, residual: f64) -> Result<(), TriggerError> {
        if !residual.is_finite() {
            return Err(TriggerError::NonFinite(residual));
        }
        if self.buffer.len() == self.cfg.n_t {
            self.buffer.pop_front();
        }
        self.buffer.push_back(residual);
        Ok(())
    }

    /// Replaces the contents with residuals recomputed against new
    /// parameters, oldest first. Only the newest `n_t` are kept.
    pub fn refill(&mut self, residuals: &[f64]) -> Result<(), TriggerError> {
        if let Some(bad) = residuals.iter().find(|e| !e.is_finite()) {
            return Err(TriggerError::NonFinite(*bad));
        }
        self.buffer.clear();
        let start = residuals.len().saturating_sub(self.cfg.n_t);
        self.buffer.extend(&residuals[start..]);
        Ok(())
    }

    pub fn rmse(&self) -> Result<f64, TriggerError> {
        if !self.is_full() {
            return Err(TriggerError::Warmup {
                have: self.buffer.len(),
                need: self.cfg.n_t,
            });
        }
        let (a, b) = self.buffer.as_slices();
        let ss: f64 = a.iter().chain(b).map(|e| e * e).sum();
        Ok((ss / self.cfg.n_t as f64).sqrt())
    }

    /// Evaluates the trigger on the current buffer and records the decision.
    pub fn decide(&mut self) -> Result<(f64, bool), TriggerError> {
        let rmse = self.rmse()?;
        self.last_gamma = evaluate(rmse, &self.cfg);
        Ok((rmse, self.last_gamma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rmse_examples() {
        assert!((trigger_rmse(&[0.2; 8], 8).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(trigger_rmse(&[0.0; 8], 8).unwrap(), 0.0);
        // sqrt((0.09 + 0.16) / 4)
        assert!((trigger_rmse(&[0.3, -0.4, 0.0, 0.0], 4).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(
            trigger_rmse(&[0.1, 0.2], 4),
            Err(TriggerError::Warmup { have: 2, need: 4 })
        );
    }

    #[test]
    fn evaluate_is_strict() {
        let cfg = TriggerConfig::new(0.1, 4).unwrap();
        assert!(evaluate(0.2, &cfg));
        assert!(!evaluate(0.1, &cfg));
        assert!(!evaluate(0.0, &cfg));
    }

    #[test]
    fn update_selects() {
        let a = RcParams::new(1.0, 2.0, 3.0).unwrap();
        let b = RcParams::new(4.0, 5.0, 6.0).unwrap();
        assert_eq!(update_theta(true, &a, &b), a);
        assert_eq!(update_theta(false, &a, &b), b);
        assert_eq!(update_theta(true, &b, &b), b);
    }

    #[test]
    fn config_validation() {
        assert!(TriggerConfig::new(0.0, 1).is_err());
        assert!(TriggerConfig::new(0.1, 0).is_err());
    }

    #[test]
    fn state_ring_buffer() {
        let mut s = TriggerState::new(TriggerConfig::new(0.1, 3).unwrap());
        assert!(matches!(s.decide(), Err(TriggerError::Warmup { .. })));
        for e in [1.0, 0.0, 0.0, 0.0] {
            s.push(e).unwrap();
        }
        assert_eq!(s.len(), 3);
        let (rmse, gamma) = s.decide().unwrap();
        assert_eq!(rmse, 0.0);
        assert!(!gamma);
        assert!(s.push(f64::NAN).is_err());
        s.refill(&[0.5, 0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(s.is_full());
        assert!(s.decide().unwrap().1);
        assert!(s.last_gamma());
    }

    proptest! {
        #[test]
        fn lowering_rho_never_untriggers(
            buf in prop::collection::vec(-1.0..1.0f64, 1..50),
            rho in 0.001..1.0f64, lower in 0.0..1.0f64,
        ) {
            let n = buf.len();
            let rmse = trigger_rmse(&buf, n).unwrap();
            let hi = TriggerConfig::new(rho, n).unwrap();
            let lo = TriggerConfig::new(rho * (1.0 - lower).max(1e-6), n).unwrap();
            if evaluate(rmse, &hi) {
                prop_assert!(evaluate(rmse, &lo));
            }
        }

        #[test]
        fn state_matches_slice_rmse(buf in prop::collection::vec(-1.0..1.0f64, 5..40), n_t in 1usize..5) {
            let mut s = TriggerState::new(TriggerConfig::new(0.1, n_t).unwrap());
            for e in &buf {
                s.push(*e).unwrap();
            }
            let a = s.rmse().unwrap();
            let b = trigger_rmse(&buf, n_t).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
