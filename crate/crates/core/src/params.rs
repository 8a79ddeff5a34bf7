//! Scenario configuration.
//!
//! Every field is a JSON key. Omitted keys take the defaults of the
//! reference two-PU setup (`xi_init = beta_init = 0.99`, `delta = epsilon =
//! 0.05`, `alpha = 4`, 5 dB primary / 25 dB secondary transmit SNR, unit
//! weights, `r_su_req = 0.1`, `T = C = 1`, `tau = 0.5`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the primary-side knowledge of the relay hop is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SnrKnowledge {
    /// Every transmitter knows its instantaneous link SNRs.
    #[default]
    Complete,
    /// Primary transmitters only know the average gain of the ST to PR hop
    /// and work with the expected rate over its fading.
    Partial,
}

/// Closed form used for the equivalent SNR of the relayed path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AfFormula {
    /// `x / (x + 1)` with `x = g1 * g2` (always below one).
    #[default]
    Paper,
    /// `g1 * g2 / (g1 + g2 + 1)`.
    Standard,
}

/// Source of each primary pair's minimum rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PuReqMode {
    /// Rate of the unassisted direct link `T log2(1 + Γ_dir)`.
    #[default]
    DirectRate,
    /// Values taken from `r_pu_req`.
    Explicit,
}

/// Whether a primary transmitter carries one concession state for all of
/// its offers or one per secondary pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ConcessionScope {
    /// One `(ξ_ℓ, β_ℓ)` shared by all of PU `ℓ`'s offers.
    PerPu,
    /// A separate `(ξ_{ℓ,q}, β_{ℓ,q})` for every SU the PU deals with.
    #[default]
    PerPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub l_pu: usize,
    pub l_su: usize,
    pub gamma_pu_db: f64,
    pub gamma_su_db: f64,
    pub alpha: f64,
    pub t_frame: f64,
    pub capital_c: f64,
    pub c_bar: f64,
    pub k_bar: f64,
    pub r_su_req: f64,
    pub pu_req_mode: PuReqMode,
    /// Per-PU requirements, read only when `pu_req_mode = explicit`.
    pub r_pu_req: Vec<f64>,
    pub xi_init: f64,
    pub beta_init: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub snr_knowledge: SnrKnowledge,
    pub af_formula: AfFormula,
    pub partial_expectation_samples: usize,
    /// Draw the ST to SR fading once per (SU, band) pair; `false` collapses
    /// it to a single draw per SU.
    pub su_channel_per_band: bool,
    pub concession_scope: ConcessionScope,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            l_pu: 2,
            l_su: 6,
            gamma_pu_db: 5.0,
            gamma_su_db: 25.0,
            alpha: 4.0,
            t_frame: 1.0,
            capital_c: 1.0,
            c_bar: 1.0,
            k_bar: 1.0,
            r_su_req: 0.1,
            pu_req_mode: PuReqMode::DirectRate,
            r_pu_req: Vec::new(),
            xi_init: 0.99,
            beta_init: 0.99,
            delta: 0.05,
            epsilon: 0.05,
            tau: 0.5,
            snr_knowledge: SnrKnowledge::Complete,
            af_formula: AfFormula::Paper,
            partial_expectation_samples: 4096,
            su_channel_per_band: true,
            concession_scope: ConcessionScope::PerPair,
            seed: 1,
        }
    }
}

impl ScenarioParams {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: Self = serde_json::from_str(&text).map_err(|source| Error::Config {
            path: path.to_path_buf(),
            source,
        })?;
        params.validate()?;
        Ok(params)
    }

    pub fn gamma_pu(&self) -> f64 {
        db_to_linear(self.gamma_pu_db)
    }

    pub fn gamma_su(&self) -> f64 {
        db_to_linear(self.gamma_su_db)
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("{v} is not finite")))
            }
        }
        for (field, v) in [
            ("gamma_pu_db", self.gamma_pu_db),
            ("gamma_su_db", self.gamma_su_db),
            ("alpha", self.alpha),
            ("t_frame", self.t_frame),
            ("capital_c", self.capital_c),
            ("c_bar", self.c_bar),
            ("k_bar", self.k_bar),
            ("r_su_req", self.r_su_req),
            ("xi_init", self.xi_init),
            ("beta_init", self.beta_init),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("tau", self.tau),
        ] {
            finite(field, v)?;
        }
        if self.l_pu == 0 {
            return Err(Error::invalid("l_pu", "need at least one primary pair"));
        }
        if self.l_su == 0 {
            return Err(Error::invalid("l_su", "need at least one secondary pair"));
        }
        if !(self.xi_init > 0.0 && self.xi_init <= 1.0) {
            return Err(Error::invalid("xi_init", "must lie in (0, 1]"));
        }
        if !(self.beta_init > 0.0 && self.beta_init <= 1.0) {
            return Err(Error::invalid("beta_init", "must lie in (0, 1]"));
        }
        if !(self.delta > 0.0 && self.delta <= self.xi_init) {
            return Err(Error::invalid("delta", "must lie in (0, xi_init]"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= self.beta_init) {
            return Err(Error::invalid("epsilon", "must lie in (0, beta_init]"));
        }
        if self.alpha <= 0.0 {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if self.t_frame <= 0.0 {
            return Err(Error::invalid("t_frame", "must be positive"));
        }
        for (field, v) in [
            ("capital_c", self.capital_c),
            ("c_bar", self.c_bar),
            ("k_bar", self.k_bar),
            ("r_su_req", self.r_su_req),
        ] {
            if v < 0.0 {
                return Err(Error::invalid(field, "must be non-negative"));
            }
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid("tau", "must lie in (0, 1)"));
        }
        if self.pu_req_mode == PuReqMode::Explicit {
            if self.r_pu_req.len() != self.l_pu {
                return Err(Error::invalid(
                    "r_pu_req",
                    format!("expected {} values, got {}", self.l_pu, self.r_pu_req.len()),
                ));
            }
            if self.r_pu_req.iter().any(|r| !r.is_finite() || *r < 0.0) {
                return Err(Error::invalid("r_pu_req", "values must be finite and >= 0"));
            }
        }
        if self.snr_knowledge == SnrKnowledge::Partial && self.partial_expectation_samples == 0 {
            return Err(Error::ZeroSamples);
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
