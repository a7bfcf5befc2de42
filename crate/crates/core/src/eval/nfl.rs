use serde::{Deserialize, Serialize};

use super::EvalError;

/// A general model with loss `eps0` everywhere against a specialist with
/// loss `eps1` on a region of prior mass `p` and `eps2` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NflScenario {
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub p: f64,
}

impl NflScenario {
    /// Requires all four values in `[0, 1]` and `eps1 < eps0 < eps2`.
    pub fn new(eps0: f64, eps1: f64, eps2: f64, p: f64) -> Result<Self, EvalError> {
        for (name, v) in [("eps0", eps0), ("eps1", eps1), ("eps2", eps2), ("p", p)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(EvalError::InvalidScenario(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(eps1 < eps0 && eps0 < eps2) {
            return Err(EvalError::InvalidScenario(format!(
                "need eps1 < eps0 < eps2, got {eps1}, {eps0}, {eps2}"
            )));
        }
        Ok(Self { eps0, eps1, eps2, p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NflOutcome {
    pub risk_general: f64,
    pub risk_special: f64,
    pub advantageous: bool,
    pub p_threshold: f64,
}

pub fn specialization_advantage(s: &NflScenario) -> NflOutcome {
    let risk_special = s.p * s.eps1 + (1.0 - s.p) * s.eps2;
    let p_threshold = (s.eps0 - s.eps2) / (s.eps1 - s.eps2);
    NflOutcome {
        risk_general: s.eps0,
        risk_special,
        advantageous: s.p > p_threshold,
        p_threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_scenario() {
        let o = specialization_advantage(&NflScenario::new(0.3, 0.1, 0.5, 0.6).unwrap());
        assert!((o.p_threshold - 0.5).abs() < 1e-12);
        assert!((o.risk_special - 0.26).abs() < 1e-12);
        assert_eq!(o.risk_general, 0.3);
        assert!(o.advantageous);
    }

    #[test]
    fn threshold_itself_is_not_advantageous() {
        let base = NflScenario::new(0.3, 0.1, 0.5, 0.0).unwrap();
        let t = specialization_advantage(&base).p_threshold;
        let at = NflScenario { p: t, ..base };
        assert!(!specialization_advantage(&at).advantageous);
    }

    #[test]
    fn hypothesis_violations() {
        assert!(NflScenario::new(0.3, 0.4, 0.4, 0.5).is_err());
        assert!(NflScenario::new(0.3, 0.3, 0.5, 0.5).is_err());
        assert!(NflScenario::new(0.6, 0.1, 0.5, 0.5).is_err());
        assert!(NflScenario::new(0.3, 0.1, 0.5, 1.2).is_err());
    }

    proptest! {
        #[test]
        fn advantage_iff_lower_risk(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, p in 0.0f64..=1.0) {
            let mut e = [a, b, c];
            e.sort_by(f64::total_cmp);
            if let Ok(s) = NflScenario::new(e[1], e[0], e[2], p) {
                let o = specialization_advantage(&s);
                prop_assert_eq!(o.advantageous, o.risk_special < o.risk_general);
            }
        }
    }
}
