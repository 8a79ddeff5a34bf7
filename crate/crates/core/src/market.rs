//! The per-trial view shared by the negotiation engine, the baselines and
//! the verifiers: link rates under a knowledge model, requirements and the
//! allocation grid.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::OfferGrid;
use crate::params::{PuReqMode, ScenarioParams, SnrKnowledge};
use crate::radio::{self, PairThresholds};
use crate::topology::{ChannelRealization, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirements {
    pub pu: Vec<f64>,
    pub su: Vec<f64>,
}

impl Requirements {
    pub fn from_params(params: &ScenarioParams, realization: &ChannelRealization) -> Self {
        let pu = match params.pu_req_mode {
            PuReqMode::DirectRate => (0..realization.l_pu())
                .map(|l| radio::direct_rate(&realization.snr, params, l))
                .collect(),
            PuReqMode::Explicit => params.r_pu_req.clone(),
        };
        Self {
            pu,
            su: vec![params.r_su_req; realization.l_su()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Market {
    pub knowledge: SnrKnowledge,
    /// `[ℓ][q]` PU rate per unit β under the knowledge model.
    pub pu_rate_per_beta: Matrix,
    /// `[ℓ][q]` PU rate per unit β from the realized channels.
    pub pu_rate_per_beta_realized: Matrix,
    /// `[q][ℓ]` SU rate with the whole frame, `T log2(1 + Γ_SR)`.
    pub su_frame_rate: Matrix,
    pub req: Requirements,
    pub grid: OfferGrid,
    pub c_bar: f64,
    pub k_bar: f64,
    pub capital_c: f64,
}

impl Market {
    pub fn new(params: &ScenarioParams, realization: &ChannelRealization) -> Result<Self> {
        Self::with_knowledge(params, realization, params.snr_knowledge)
    }

    pub fn with_knowledge(
        params: &ScenarioParams,
        realization: &ChannelRealization,
        knowledge: SnrKnowledge,
    ) -> Result<Self> {
        let snr = &realization.snr;
        let (l_pu, l_su) = (snr.l_pu(), snr.l_su());
        let scale = params.t_frame * params.tau;
        let realized: Matrix = (0..l_pu)
            .map(|l| (0..l_su).map(|q| scale * radio::pu_efficiency(snr, l, q)).collect())
            .collect();
        let known = match knowledge {
            SnrKnowledge::Complete => realized.clone(),
            SnrKnowledge::Partial => (0..l_pu)
                .map(|l| {
                    (0..l_su)
                        .map(|q| {
                            radio::expected_pu_efficiency(
                                snr,
                                l,
                                q,
                                params.partial_expectation_samples,
                                realization.expectation_seed,
                            )
                            .map(|e| scale * e)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Matrix>>()?,
        };
        let su_frame_rate = (0..l_su)
            .map(|q| (0..l_pu).map(|l| params.t_frame * radio::su_efficiency(snr, q, l)).collect())
            .collect();
        Ok(Self {
            knowledge,
            pu_rate_per_beta: known,
            pu_rate_per_beta_realized: realized,
            su_frame_rate,
            req: Requirements::from_params(params, realization),
            grid: OfferGrid::from_params(params),
            c_bar: params.c_bar,
            k_bar: params.k_bar,
            capital_c: params.capital_c,
        })
    }

    /// Builds a market directly from per-pair rate coefficients. Realized
    /// and known PU rates coincide.
    pub fn from_rates(
        params: &ScenarioParams,
        pu_rate_per_beta: Matrix,
        su_frame_rate: Matrix,
        req: Requirements,
    ) -> Self {
        Self {
            knowledge: SnrKnowledge::Complete,
            pu_rate_per_beta_realized: pu_rate_per_beta.clone(),
            pu_rate_per_beta,
            su_frame_rate,
            req,
            grid: OfferGrid::from_params(params),
            c_bar: params.c_bar,
            k_bar: params.k_bar,
            capital_c: params.capital_c,
        }
    }

    pub fn l_pu(&self) -> usize {
        self.pu_rate_per_beta.len()
    }

    pub fn l_su(&self) -> usize {
        self.su_frame_rate.len()
    }

    pub fn rate_pu(&self, l: usize, q: usize, beta: f64) -> f64 {
        beta * self.pu_rate_per_beta[l][q]
    }

    pub fn realized_rate_pu(&self, l: usize, q: usize, beta: f64) -> f64 {
        beta * self.pu_rate_per_beta_realized[l][q]
    }

    pub fn rate_su(&self, q: usize, l: usize, beta: f64) -> f64 {
        (1.0 - beta) * self.su_frame_rate[q][l]
    }

    pub fn money_pu(&self, xi: f64) -> f64 {
        self.c_bar * xi * self.capital_c
    }

    pub fn money_su(&self, xi: f64) -> f64 {
        self.k_bar * xi * self.capital_c
    }

    pub fn utility_pu(&self, l: usize, q: usize, xi: f64, beta: f64) -> f64 {
        self.rate_pu(l, q, beta) + self.money_pu(xi)
    }

    pub fn realized_utility_pu(&self, l: usize, q: usize, xi: f64, beta: f64) -> f64 {
        self.realized_rate_pu(l, q, beta) + self.money_pu(xi)
    }

    pub fn utility_su(&self, q: usize, l: usize, xi: f64, beta: f64) -> f64 {
        self.rate_su(q, l, beta) - self.money_su(xi)
    }

    /// PU-side rate condition.
    pub fn pu_accepts(&self, l: usize, q: usize, beta: f64) -> bool {
        self.rate_pu(l, q, beta) >= self.req.pu[l]
    }

    /// SU-side rate and non-negative utility conditions.
    pub fn su_accepts(&self, q: usize, l: usize, xi: f64, beta: f64) -> bool {
        self.rate_su(q, l, beta) >= self.req.su[q] && self.utility_su(q, l, xi, beta) >= 0.0
    }

    /// Both sides' individual conditions plus the box constraints.
    pub fn pair_feasible(&self, l: usize, q: usize, xi: f64, beta: f64) -> bool {
        (0.0..=1.0).contains(&xi)
            && (0.0..=1.0).contains(&beta)
            && self.pu_accepts(l, q, beta)
            && self.su_accepts(q, l, xi, beta)
    }

    pub fn thresholds(&self, l: usize, q: usize) -> PairThresholds {
        PairThresholds::new(
            self.pu_rate_per_beta[l][q],
            self.su_frame_rate[q][l],
            self.req.pu[l],
            self.req.su[q],
            self.k_bar * self.capital_c,
        )
    }

    /// Sub-market over the listed PUs and SUs, re-indexed in list order.
    pub fn restrict(&self, pus: &[usize], sus: &[usize]) -> Self {
        let pick = |m: &Matrix, rows: &[usize], cols: &[usize]| -> Matrix {
            rows.iter()
                .map(|&r| cols.iter().map(|&c| m[r][c]).collect())
                .collect()
        };
        Self {
            knowledge: self.knowledge,
            pu_rate_per_beta: pick(&self.pu_rate_per_beta, pus, sus),
            pu_rate_per_beta_realized: pick(&self.pu_rate_per_beta_realized, pus, sus),
            su_frame_rate: pick(&self.su_frame_rate, sus, pus),
            req: Requirements {
                pu: pus.iter().map(|&l| self.req.pu[l]).collect(),
                su: sus.iter().map(|&q| self.req.su[q]).collect(),
            },
            grid: self.grid,
            c_bar: self.c_bar,
            k_bar: self.k_bar,
            capital_c: self.capital_c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::realize;

    #[test]
    fn complete_market_matches_radio_functions() {
        let params = ScenarioParams::default();
        let r = realize(&params, 4).unwrap();
        let m = Market::new(&params, &r).unwrap();
        for l in 0..2 {
            for q in 0..6 {
                let a = m.rate_pu(l, q, 0.7);
                let b = radio::rate_pu(&r.snr, &params, l, q, 0.7);
                assert!((a - b).abs() < 1e-15);
                let a = m.rate_su(q, l, 0.3);
                let b = radio::rate_su(&r.snr, &params, q, l, 0.3);
                assert!((a - b).abs() < 1e-15);
            }
            assert_eq!(m.req.pu[l], radio::direct_rate(&r.snr, &params, l));
        }
    }

    #[test]
    fn partial_market_keeps_realized_rates() {
        let params = ScenarioParams {
            snr_knowledge: SnrKnowledge::Partial,
            partial_expectation_samples: 256,
            ..Default::default()
        };
        let r = realize(&params, 4).unwrap();
        let m = Market::new(&params, &r).unwrap();
        let c = Market::with_knowledge(&params, &r, SnrKnowledge::Complete).unwrap();
        assert_eq!(m.pu_rate_per_beta_realized, c.pu_rate_per_beta);
        assert_ne!(m.pu_rate_per_beta, c.pu_rate_per_beta);
    }

    #[test]
    fn restriction_reindexes() {
        let params = ScenarioParams::default();
        let r = realize(&params, 8).unwrap();
        let m = Market::new(&params, &r).unwrap();
        let sub = m.restrict(&[1], &[4, 2]);
        assert_eq!(sub.l_pu(), 1);
        assert_eq!(sub.l_su(), 2);
        assert_eq!(sub.pu_rate_per_beta[0][0], m.pu_rate_per_beta[1][4]);
        assert_eq!(sub.su_frame_rate[1][0], m.su_frame_rate[2][1]);
        assert_eq!(sub.req.pu[0], m.req.pu[1]);
    }
}
