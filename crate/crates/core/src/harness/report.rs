//! Side-by-side comparison of two runs of the same scenario.

use serde::{Deserialize, Serialize};

use super::{ControllerKind, HarnessError, LoopMetrics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSummary {
    pub controller: ControllerKind,
    pub cost: f64,
    pub comfort_violation_kh: f64,
    pub cost_after_warmup: f64,
    pub comfort_violation_kh_after_warmup: f64,
    pub energy_kwh: f64,
}

impl From<&LoopMetrics> for ControllerSummary {
    fn from(m: &LoopMetrics) -> Self {
        ControllerSummary {
            controller: m.controller,
            cost: m.total_cost,
            comfort_violation_kh: m.comfort_violation_kh,
            cost_after_warmup: m.total_cost_after_warmup,
            comfort_violation_kh_after_warmup: m.comfort_violation_kh_after_warmup,
            energy_kwh: m.energy_kwh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scenario: String,
    pub fingerprint: String,
    pub baseline: ControllerSummary,
    pub candidate: ControllerSummary,
    /// `100 · (baseline − candidate) / baseline` over the whole run.
    pub cost_reduction_pct: f64,
    /// Same, excluding the identification warmup.
    pub cost_reduction_after_warmup_pct: f64,
    /// Candidate minus baseline, K·h.
    pub violation_delta_kh: f64,
    pub si_eligible_steps: usize,
    pub si_activations: usize,
    pub si_saved_pct: f64,
}

fn reduction(base: f64, cand: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        100.0 * (base - cand) / base
    }
}

/// Compares two runs. The RBC run is the baseline; if both used the same
/// controller, `a` is.
pub fn compare(a: &LoopMetrics, b: &LoopMetrics) -> Result<Comparison, HarnessError> {
    if a.fingerprint != b.fingerprint {
        return Err(HarnessError::Incomparable(format!(
            "scenario fingerprints differ ({} vs {})",
            &a.fingerprint[..a.fingerprint.len().min(12)],
            &b.fingerprint[..b.fingerprint.len().min(12)]
        )));
    }
    let (base, cand) = if b.controller == ControllerKind::Rbc && a.controller != ControllerKind::Rbc {
        (b, a)
    } else {
        (a, b)
    };
    Ok(Comparison {
        scenario: cand.scenario.clone(),
        fingerprint: cand.fingerprint.clone(),
        baseline: base.into(),
        candidate: cand.into(),
        cost_reduction_pct: reduction(base.total_cost, cand.total_cost),
        cost_reduction_after_warmup_pct: reduction(base.total_cost_after_warmup, cand.total_cost_after_warmup),
        violation_delta_kh: cand.comfort_violation_kh - base.comfort_violation_kh,
        si_eligible_steps: cand.si_eligible_steps,
        si_activations: cand.si_activations,
        si_saved_pct: 100.0 * cand.si_saved_fraction,
    })
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "scenario {} ({})",
            self.scenario,
            &self.fingerprint[..12.min(self.fingerprint.len())]
        )?;
        writeln!(
            f,
            "{:<10} {:>12} {:>14} {:>12}",
            "controller", "cost", "violation K·h", "energy kWh"
        )?;
        for s in [&self.baseline, &self.candidate] {
            writeln!(
                f,
                "{:<10} {:>12.3} {:>14.3} {:>12.2}",
                s.controller.to_string(),
                s.cost,
                s.comfort_violation_kh,
                s.energy_kwh
            )?;
        }
        writeln!(
            f,
            "cost reduction {:.2}% ({:.2}% after warmup), violation delta {:+.3} K·h",
            self.cost_reduction_pct, self.cost_reduction_after_warmup_pct, self.violation_delta_kh
        )?;
        write!(
            f,
            "identification ran {} of {} eligible steps ({:.1}% saved)",
            self.si_activations, self.si_eligible_steps, self.si_saved_pct
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::RcParams;

    fn metrics(c: ControllerKind, cost: f64, fp: &str) -> LoopMetrics {
        LoopMetrics {
            scenario: "s".into(),
            fingerprint: fp.into(),
            controller: c,
            steps: 10,
            dt: 300.0,
            warmup_steps: 2,
            total_cost: cost,
            comfort_violation_kh: 1.0,
            total_cost_after_warmup: cost / 2.0,
            comfort_violation_kh_after_warmup: 0.5,
            max_violation_k: 0.1,
            energy_kwh: 3.0,
            si_eligible_steps: 8,
            trigger_fires: 2,
            si_activations: 2,
            si_failures: 0,
            si_saved_fraction: 0.75,
            mpc_solves: 10,
            mpc_fallbacks: 0,
            final_theta: RcParams::new(1.0, 1.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn baseline_is_rbc() {
        let mpc = metrics(ControllerKind::Mpc, 80.0, "abc");
        let rbc = metrics(ControllerKind::Rbc, 100.0, "abc");
        for c in [compare(&mpc, &rbc).unwrap(), compare(&rbc, &mpc).unwrap()] {
            assert_eq!(c.baseline.controller, ControllerKind::Rbc);
            assert!((c.cost_reduction_pct - 20.0).abs() < 1e-12);
            assert_eq!(c.si_saved_pct, 75.0);
        }
        assert!(compare(&mpc, &metrics(ControllerKind::Rbc, 1.0, "xyz")).is_err());
    }
}
