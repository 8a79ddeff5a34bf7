//! Link SNRs, rates, utilities and per-pair feasibility thresholds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AfFormula, ScenarioParams};
use crate::topology::{Distances, Fading, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSnrs {
    /// `[ℓ]` SNR of the direct PT to PR link.
    pub gamma_dir: Vec<f64>,
    /// `[ℓ][q]`
    pub gamma_pt_st: Matrix,
    /// `[ℓ][q]`
    pub gamma_st_pr: Matrix,
    /// `[ℓ][q]` equivalent SNR of the relayed path.
    pub gamma_relay: Matrix,
    /// `[q][ℓ]` SNR at SR_q in the band of PU ℓ.
    pub gamma_sr: Matrix,
    /// `[ℓ][q]` average ST to PR gain `γ_ST / d^α`, known under partial knowledge.
    pub mean_st_pr: Matrix,
    pub af_formula: AfFormula,
}

impl LinkSnrs {
    pub fn l_pu(&self) -> usize {
        self.gamma_dir.len()
    }

    pub fn l_su(&self) -> usize {
        self.gamma_sr.len()
    }
}

/// `log2(1 + x)` computed through `ln_1p`.
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

pub fn relay_snr(g1: f64, g2: f64, formula: AfFormula) -> f64 {
    match formula {
        AfFormula::Paper => {
            let x = g1 * g2;
            x / (x + 1.0)
        }
        AfFormula::Standard => g1 * g2 / (g1 + g2 + 1.0),
    }
}

fn path_snr(tx_snr: f64, h2: f64, d: f64, alpha: f64) -> f64 {
    tx_snr * h2 / d.powf(alpha)
}

pub fn compute_snrs(params: &ScenarioParams, fading: &Fading, dist: &Distances) -> Result<LinkSnrs> {
    let (g_pu, g_su, alpha) = (params.gamma_pu(), params.gamma_su(), params.alpha);
    let l_pu = fading.h2_pt_pr.len();
    let l_su = fading.h2_st_sr.len();

    let all_finite = fading.h2_pt_pr.iter().chain(fading.h2_pt_st.iter().flatten())
        .chain(fading.h2_st_pr.iter().flatten())
        .chain(fading.h2_st_sr.iter().flatten())
        .all(|h| h.is_finite() && *h >= 0.0);
    if !all_finite {
        return Err(Error::NonFinite("fading"));
    }
    let dist_ok = dist.pt_pr.iter().chain(dist.pt_st.iter().flatten())
        .chain(dist.st_pr.iter().flatten())
        .chain(&dist.st_sr)
        .all(|d| d.is_finite() && *d > 0.0);
    if !dist_ok {
        return Err(Error::NonFinite("distances"));
    }

    let gamma_dir: Vec<f64> = (0..l_pu)
        .map(|l| path_snr(g_pu, fading.h2_pt_pr[l], dist.pt_pr[l], alpha))
        .collect();
    let gamma_pt_st: Matrix = (0..l_pu)
        .map(|l| (0..l_su).map(|q| path_snr(g_pu, fading.h2_pt_st[l][q], dist.pt_st[l][q], alpha)).collect())
        .collect();
    let mean_st_pr: Matrix = (0..l_pu)
        .map(|l| (0..l_su).map(|q| path_snr(g_su, 1.0, dist.st_pr[l][q], alpha)).collect())
        .collect();
    let gamma_st_pr: Matrix = (0..l_pu)
        .map(|l| (0..l_su).map(|q| mean_st_pr[l][q] * fading.h2_st_pr[l][q]).collect())
        .collect();
    let gamma_relay: Matrix = (0..l_pu)
        .map(|l| {
            (0..l_su)
                .map(|q| relay_snr(gamma_pt_st[l][q], gamma_st_pr[l][q], params.af_formula))
                .collect()
        })
        .collect();
    let gamma_sr: Matrix = (0..l_su)
        .map(|q| (0..l_pu).map(|l| path_snr(g_su, fading.h2_st_sr[q][l], dist.st_sr[q], alpha)).collect())
        .collect();

    let snrs = LinkSnrs {
        gamma_dir,
        gamma_pt_st,
        gamma_st_pr,
        gamma_relay,
        gamma_sr,
        mean_st_pr,
        af_formula: params.af_formula,
    };
    let finite = snrs.gamma_dir.iter()
        .chain(snrs.gamma_relay.iter().flatten())
        .chain(snrs.gamma_sr.iter().flatten())
        .all(|g| g.is_finite());
    if finite {
        Ok(snrs)
    } else {
        Err(Error::NonFinite("link SNRs"))
    }
}

/// Spectral efficiency `log2(1 + Γ_dir + Γ_relay)` of the cooperative link.
pub fn pu_efficiency(snrs: &LinkSnrs, l: usize, q: usize) -> f64 {
    log2_1p(snrs.gamma_dir[l] + snrs.gamma_relay[l][q])
}

pub fn su_efficiency(snrs: &LinkSnrs, q: usize, l: usize) -> f64 {
    log2_1p(snrs.gamma_sr[q][l])
}

/// Rate of PU `ℓ` relayed by SU `q` at time-slot number `beta`.
pub fn rate_pu(snrs: &LinkSnrs, params: &ScenarioParams, l: usize, q: usize, beta: f64) -> f64 {
    beta * params.t_frame * params.tau * pu_efficiency(snrs, l, q)
}

pub fn rate_su(snrs: &LinkSnrs, params: &ScenarioParams, q: usize, l: usize, beta: f64) -> f64 {
    (1.0 - beta) * params.t_frame * su_efficiency(snrs, q, l)
}

pub fn utility_pu(rate: f64, xi: f64, params: &ScenarioParams) -> f64 {
    rate + params.c_bar * xi * params.capital_c
}

pub fn utility_su(rate: f64, xi: f64, params: &ScenarioParams) -> f64 {
    rate - params.k_bar * xi * params.capital_c
}

pub fn direct_rate(snrs: &LinkSnrs, params: &ScenarioParams, l: usize) -> f64 {
    params.t_frame * log2_1p(snrs.gamma_dir[l])
}

/// Seed of the expectation substream for pair `(ℓ, q)`.
fn pair_stream(seed: u64, l: usize, q: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((l as u64) << 32) | q as u64);
    rng
}

/// Estimate of `E[log2(1 + Γ_dir + Γ_relay)]` over the ST to PR fading,
/// holding `Γ_dir` and `Γ_{PT-ST}` at their instantaneous values.
///
/// Uses one jittered draw per equal-probability stratum of the
/// exponential distribution.
pub fn expected_pu_efficiency(
    snrs: &LinkSnrs,
    l: usize,
    q: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let mut rng = pair_stream(seed, l, q);
    let n = samples as f64;
    let (g_dir, g1, mean2) = (snrs.gamma_dir[l], snrs.gamma_pt_st[l][q], snrs.mean_st_pr[l][q]);
    let total: f64 = (0..samples)
        .map(|i| {
            let u = (i as f64 + rng.gen::<f64>()) / n;
            let h2 = -(1.0 - u).max(f64::MIN_POSITIVE).ln();
            log2_1p(g_dir + relay_snr(g1, mean2 * h2, snrs.af_formula))
        })
        .sum();
    Ok(total / n)
}

pub fn expected_rate_pu(
    snrs: &LinkSnrs,
    params: &ScenarioParams,
    l: usize,
    q: usize,
    beta: f64,
    seed: u64,
) -> Result<f64> {
    let eff = expected_pu_efficiency(snrs, l, q, params.partial_expectation_samples, seed)?;
    Ok(beta * params.t_frame * params.tau * eff)
}

/// Feasibility window of one (PU, SU) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairThresholds {
    /// Smallest β meeting the PU requirement (may exceed one).
    pub beta_min: f64,
    /// Largest β meeting the SU requirement, clamped to `[0, 1]`.
    pub beta_max: f64,
    pub feasible: bool,
    /// Cached `T log2(1 + Γ_SR)` used by [`PairThresholds::xi_cap`].
    su_frame_rate: f64,
    k_c: f64,
}

impl PairThresholds {
    /// `pu_rate_per_beta` is `T τ log2(1 + Γ_dir + Γ_relay)` under whatever
    /// knowledge model is in force.
    pub fn new(
        pu_rate_per_beta: f64,
        su_frame_rate: f64,
        r_pu_req: f64,
        r_su_req: f64,
        k_c: f64,
    ) -> Self {
        let beta_min = if r_pu_req <= 0.0 {
            0.0
        } else if pu_rate_per_beta > 0.0 {
            r_pu_req / pu_rate_per_beta
        } else {
            f64::INFINITY
        };
        let raw_beta_max = if r_su_req <= 0.0 {
            1.0
        } else if su_frame_rate > 0.0 {
            1.0 - r_su_req / su_frame_rate
        } else {
            f64::NEG_INFINITY
        };
        let feasible = raw_beta_max >= 0.0 && beta_min <= raw_beta_max.min(1.0);
        let beta_max = raw_beta_max.clamp(0.0, 1.0);
        Self {
            beta_min,
            beta_max,
            feasible,
            su_frame_rate,
            k_c,
        }
    }

    /// Largest price number keeping the SU utility non-negative at `beta`.
    pub fn xi_cap(&self, beta: f64) -> f64 {
        if self.k_c <= 0.0 {
            1.0
        } else {
            ((1.0 - beta) * self.su_frame_rate / self.k_c).min(1.0)
        }
    }
}

pub fn pair_thresholds(
    snrs: &LinkSnrs,
    params: &ScenarioParams,
    l: usize,
    q: usize,
    r_pu_req: f64,
    r_su_req: f64,
) -> PairThresholds {
    PairThresholds::new(
        params.t_frame * params.tau * pu_efficiency(snrs, l, q),
        params.t_frame * su_efficiency(snrs, q, l),
        r_pu_req,
        r_su_req,
        params.k_bar * params.capital_c,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_link(g_dir: f64, g1: f64, g2: f64, g_sr: f64) -> LinkSnrs {
        LinkSnrs {
            gamma_dir: vec![g_dir],
            gamma_pt_st: vec![vec![g1]],
            gamma_st_pr: vec![vec![g2]],
            gamma_relay: vec![vec![relay_snr(g1, g2, AfFormula::Paper)]],
            gamma_sr: vec![vec![g_sr]],
            mean_st_pr: vec![vec![g2]],
            af_formula: AfFormula::Paper,
        }
    }

    #[test]
    fn direct_snr_at_reference_point() {
        // 10^0.5 / 2^4
        let params = ScenarioParams::default();
        let fading = Fading {
            h2_pt_pr: vec![1.0],
            h2_pt_st: vec![vec![1.0]],
            h2_st_pr: vec![vec![1.0]],
            h2_st_sr: vec![vec![1.0]],
        };
        let dist = Distances {
            pt_pr: vec![2.0],
            pt_st: vec![vec![1.0]],
            st_pr: vec![vec![1.0]],
            st_sr: vec![1.0],
        };
        let s = compute_snrs(&params, &fading, &dist).unwrap();
        assert_relative_eq!(s.gamma_dir[0], 0.197_642_353_760_524, max_relative = 1e-12);
        assert_relative_eq!(s.gamma_sr[0][0], 316.227_766_016_838, max_relative = 1e-12);
    }

    #[test]
    fn relay_formulas() {
        for f in [AfFormula::Paper, AfFormula::Standard] {
            assert_eq!(relay_snr(0.0, 7.0, f), 0.0);
        }
        assert_relative_eq!(relay_snr(10.0, 10.0, AfFormula::Paper), 100.0 / 101.0);
        assert_relative_eq!(relay_snr(10.0, 10.0, AfFormula::Standard), 100.0 / 21.0);
    }

    #[test]
    fn non_finite_fading_is_rejected() {
        let params = ScenarioParams::default();
        let fading = Fading {
            h2_pt_pr: vec![f64::NAN],
            h2_pt_st: vec![vec![1.0]],
            h2_st_pr: vec![vec![1.0]],
            h2_st_sr: vec![vec![1.0]],
        };
        let dist = Distances {
            pt_pr: vec![2.0],
            pt_st: vec![vec![1.0]],
            st_pr: vec![vec![1.0]],
            st_sr: vec![1.0],
        };
        assert!(compute_snrs(&params, &fading, &dist).is_err());
    }

    #[test]
    fn rates_and_utilities() {
        let params = ScenarioParams::default();
        let s = single_link(0.197_642_353_760_524, 10.0, 10.0, 316.227_766_016_838);
        assert_eq!(rate_pu(&s, &params, 0, 0, 0.0), 0.0);
        assert_relative_eq!(rate_pu(&s, &params, 0, 0, 0.5), 0.282_360_547_944_626, max_relative = 1e-12);
        assert_relative_eq!(
            rate_pu(&s, &params, 0, 0, 0.4),
            2.0 * rate_pu(&s, &params, 0, 0, 0.2),
            max_relative = 1e-14
        );
        assert_eq!(rate_su(&s, &params, 0, 0, 1.0), 0.0);
        let r_su = rate_su(&s, &params, 0, 0, 0.5);
        assert_relative_eq!(r_su, 4.154_687_620_606_403, max_relative = 1e-12);
        assert_relative_eq!(utility_su(r_su, 0.5, &params), r_su - 0.5);
        assert_eq!(utility_pu(1.25, 0.0, &params), 1.25);
        assert_relative_eq!(direct_rate(&s, &params, 0), 0.260_197_147_283_697, max_relative = 1e-12);
    }

    #[test]
    fn thresholds() {
        let params = ScenarioParams::default();
        let s = single_link(0.197_642_353_760_524, 10.0, 10.0, 316.227_766_016_838);
        let req = direct_rate(&s, &params, 0);
        let th = pair_thresholds(&s, &params, 0, 0, req, 0.1);
        assert_relative_eq!(th.beta_min, 0.460_753_368_658_862, max_relative = 1e-12);
        // rounded inputs: R_req = 0.26021, log2 term = 1.12941
        let rounded = PairThresholds::new(0.5 * 1.129_41, 10.0, 0.260_21, 0.1, 1.0);
        assert_relative_eq!(rounded.beta_min, 0.460_789_261_649_888, max_relative = 1e-12);
        assert_relative_eq!(rate_pu(&s, &params, 0, 0, th.beta_min), req, max_relative = 1e-12);
        assert!(th.feasible);
        let vacuous = pair_thresholds(&s, &params, 0, 0, req, 0.0);
        assert_eq!(vacuous.beta_max, 1.0);

        let dead = single_link(0.2, 10.0, 10.0, 0.0);
        assert!(!pair_thresholds(&dead, &params, 0, 0, req, 0.1).feasible);
        let weak = pair_thresholds(&s, &params, 0, 0, 10.0, 0.1);
        assert!(weak.beta_min > weak.beta_max && !weak.feasible);
    }

    #[test]
    fn xi_cap_tracks_su_budget() {
        let th = PairThresholds::new(1.0, 4.0, 0.1, 0.1, 2.0);
        assert_relative_eq!(th.xi_cap(0.75), 0.5);
        assert_eq!(th.xi_cap(0.0), 1.0);
        let free = PairThresholds::new(1.0, 4.0, 0.1, 0.1, 0.0);
        assert_eq!(free.xi_cap(0.99), 1.0);
    }

    #[test]
    fn expected_rate_limits() {
        let params = ScenarioParams {
            partial_expectation_samples: 2000,
            ..Default::default()
        };
        let s = single_link(0.2, 5.0, 1e-12, 100.0);
        assert_eq!(expected_rate_pu(&s, &params, 0, 0, 0.0, 9).unwrap(), 0.0);
        let far = expected_rate_pu(&s, &params, 0, 0, 0.8, 9).unwrap();
        assert_relative_eq!(far, 0.8 * 0.5 * log2_1p(0.2), max_relative = 1e-9);
        assert!(matches!(
            expected_pu_efficiency(&s, 0, 0, 0, 1),
            Err(Error::ZeroSamples)
        ));
    }
}
