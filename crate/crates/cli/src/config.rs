//! Run configuration: a JSON document whose keys mirror the design and
//! scenario parameters. Command-line flags override file values.

use std::path::Path;

use nicr_core::design::{DesignParams, SizingMethod};
use nicr_core::power::{Hypothesis, PowerScenario};
use nicr_core::simgen::GenScenario;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const DEFAULT_SEED: u64 = 20_240_901;
pub const DEFAULT_REPLICATIONS: usize = 1000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda01: Option<f64>,
    pub k1: Option<f64>,
    pub lambda2: Option<f64>,
    pub k2: Option<f64>,
    pub q01: Option<f64>,
    pub phi: Option<f64>,
    pub tf: Option<f64>,
    pub r: Option<f64>,
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
    pub alpha: Option<f64>,
    pub power: Option<f64>,
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub hypothesis: Option<Hypothesis>,
    pub mode: Option<SizingMethod>,
    /// Explicit group sizes for `simulate` and `power`.
    pub n0: Option<usize>,
    pub n1: Option<usize>,
}

fn required<T: Copy>(key: &'static str, v: Option<T>) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::config(format!("missing required key `{key}`")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self, Failure> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Fill the keys that have conventional defaults.
    pub fn with_defaults(mut self) -> Self {
        self.phi.get_or_insert(0.0);
        self.delta1.get_or_insert(1.0);
        self.alpha.get_or_insert(0.05);
        self.power.get_or_insert(0.8);
        self.p0.get_or_insert(0.5);
        self.p1.get_or_insert(0.5);
        self.seed.get_or_insert(DEFAULT_SEED);
        self.replications.get_or_insert(DEFAULT_REPLICATIONS);
        self.hypothesis.get_or_insert(Hypothesis::Alt);
        self.mode.get_or_insert(SizingMethod::Sdh);
        self
    }

    pub fn design_params(&self) -> Result<DesignParams, Failure> {
        let params = DesignParams {
            lambda01: required("lambda01", self.lambda01)?,
            k1: required("k1", self.k1)?,
            lambda2: required("lambda2", self.lambda2)?,
            k2: required("k2", self.k2)?,
            q01: required("q01", self.q01)?,
            phi: required("phi", self.phi)?,
            tf: required("tf", self.tf)?,
            r: required("r", self.r)?,
            delta0: required("delta0", self.delta0)?,
            delta1: required("delta1", self.delta1)?,
            alpha: required("alpha", self.alpha)?,
            power: required("power", self.power)?,
            p0: required("p0", self.p0)?,
            p1: required("p1", self.p1)?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn group_sizes(&self) -> Result<Option<(usize, usize)>, Failure> {
        match (self.n0, self.n1) {
            (Some(n0), Some(n1)) => Ok(Some((n0, n1))),
            (None, None) => Ok(None),
            (Some(_), None) => Err(Failure::config("`n0` given without `n1`".into())),
            (None, Some(_)) => Err(Failure::config("`n1` given without `n0`".into())),
        }
    }

    /// Data-generating coefficient: `ln delta1` under ALT, `ln delta0` under NULL.
    pub fn true_b(&self) -> Result<f64, Failure> {
        let delta = match required("hypothesis", self.hypothesis)? {
            Hypothesis::Alt => required("delta1", self.delta1)?,
            Hypothesis::Null => required("delta0", self.delta0)?,
        };
        if !(delta > 0.0) {
            return Err(Failure::config(format!("hazard ratio must be positive, got {delta}")));
        }
        Ok(delta.ln())
    }

    pub fn gen_scenario(&self, n0: usize, n1: usize) -> Result<GenScenario, Failure> {
        let scen = GenScenario {
            lambda01: required("lambda01", self.lambda01)?,
            k1: required("k1", self.k1)?,
            lambda2: required("lambda2", self.lambda2)?,
            k2: required("k2", self.k2)?,
            q01: required("q01", self.q01)?,
            phi: required("phi", self.phi)?,
            tf: required("tf", self.tf)?,
            r: required("r", self.r)?,
            b: self.true_b()?,
            n0,
            n1,
            seed: required("seed", self.seed)?,
        };
        scen.validate()?;
        Ok(scen)
    }

    pub fn power_scenario(&self) -> Result<PowerScenario, Failure> {
        let d = self.design_params()?;
        let scen = PowerScenario {
            lambda01: d.lambda01,
            k1: d.k1,
            lambda2: d.lambda2,
            k2: d.k2,
            q01: d.q01,
            phi: d.phi,
            tf: d.tf,
            r: d.r,
            delta0: d.delta0,
            delta1: d.delta1,
            alpha: d.alpha,
            target_power: d.power,
            p0: d.p0,
            p1: d.p1,
            replications: required("replications", self.replications)?,
            hypothesis: required("hypothesis", self.hypothesis)?,
            n_override: self.group_sizes()?,
        };
        scen.validate()?;
        Ok(scen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse(r#"{"lambda01": 1.0, "lamda2": 0.5}"#).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("lamda2"), "{}", err.message);
    }

    #[test]
    fn missing_keys_are_named() {
        let cfg = RunConfig::parse(r#"{"lambda01": 1.0, "k1": 1.0}"#).unwrap().with_defaults();
        let err = cfg.design_params().unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("`lambda2`"), "{}", err.message);
    }

    #[test]
    fn echoed_config_round_trips() {
        let text = r#"{"lambda01":0.073,"k1":1,"lambda2":0.021,"k2":1,"q01":0.737,"tf":7.5,"r":12,
            "delta0":1.5,"power":0.85,"mode":"single-event","hypothesis":"NULL","n0":3,"n1":4}"#;
        let cfg = RunConfig::parse(text).unwrap().with_defaults();
        assert_eq!(cfg.mode, Some(SizingMethod::SingleEvent));
        let echoed = cfg.to_json();
        assert_eq!(RunConfig::parse(&echoed).unwrap(), cfg);
        assert_eq!(RunConfig::parse(&echoed).unwrap().to_json(), echoed);
    }

    #[test]
    fn hypothesis_picks_the_coefficient() {
        let mut cfg = RunConfig {
            delta0: Some(1.3),
            ..Default::default()
        }
        .with_defaults();
        assert_eq!(cfg.true_b().unwrap(), 0.0);
        cfg.hypothesis = Some(Hypothesis::Null);
        assert_eq!(cfg.true_b().unwrap(), 1.3f64.ln());
    }

    #[test]
    fn half_specified_sizes_are_an_error() {
        let cfg = RunConfig {
            n0: Some(5),
            ..Default::default()
        };
        assert_eq!(cfg.group_sizes().unwrap_err().code, 2);
    }
}
