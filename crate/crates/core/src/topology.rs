//! User placement and block-fading channel draws for one trial.
//!
//! Primary transmitters sit on the left edge of the `[-1, 1]²` square with
//! their receivers directly opposite on the right edge, so every direct link
//! has length 2. Secondary transmitters and receivers are uniform in the
//! inner square `[-0.5, 0.5]²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::ScenarioParams;
use crate::radio::{self, LinkSnrs};

pub type Matrix = Vec<Vec<f64>>;

/// Points closer than this are redrawn.
pub const MIN_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub pt_pos: Vec<Point>,
    pub pr_pos: Vec<Point>,
    pub st_pos: Vec<Point>,
    pub sr_pos: Vec<Point>,
}

/// Squared fading magnitudes, all exponential with unit mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fading {
    /// `[ℓ]`
    pub h2_pt_pr: Vec<f64>,
    /// `[ℓ][q]`
    pub h2_pt_st: Matrix,
    /// `[ℓ][q]`
    pub h2_st_pr: Matrix,
    /// `[q][ℓ]`: the SU link in the band of PU `ℓ`.
    pub h2_st_sr: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub pt_pr: Vec<f64>,
    pub pt_st: Matrix,
    pub st_pr: Matrix,
    pub st_sr: Vec<f64>,
}

impl Distances {
    pub fn from_placement(p: &Placement) -> Self {
        let pt_pr = p
            .pt_pos
            .iter()
            .zip(&p.pr_pos)
            .map(|(a, b)| a.distance(b))
            .collect();
        let pt_st = p
            .pt_pos
            .iter()
            .map(|pt| p.st_pos.iter().map(|st| pt.distance(st)).collect())
            .collect();
        let st_pr = p
            .pr_pos
            .iter()
            .map(|pr| p.st_pos.iter().map(|st| st.distance(pr)).collect())
            .collect();
        let st_sr = p
            .st_pos
            .iter()
            .zip(&p.sr_pos)
            .map(|(a, b)| a.distance(b))
            .collect();
        Self {
            pt_pr,
            pt_st,
            st_pr,
            st_sr,
        }
    }
}

/// Everything random about one trial, plus the SNRs derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub placement: Placement,
    pub fading: Fading,
    pub distances: Distances,
    pub snr: LinkSnrs,
    /// Seed of the substreams used for partial-knowledge expectations.
    pub expectation_seed: u64,
}

impl ChannelRealization {
    pub fn l_pu(&self) -> usize {
        self.fading.h2_pt_pr.len()
    }

    pub fn l_su(&self) -> usize {
        self.fading.h2_st_sr.len()
    }
}

fn uniform_point<R: Rng + ?Sized>(rng: &mut R, half_side: f64) -> Point {
    Point::new(
        rng.gen_range(-half_side..=half_side),
        rng.gen_range(-half_side..=half_side),
    )
}

pub fn place_users<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Placement {
    let mut pt_pos = Vec::with_capacity(params.l_pu);
    let mut pr_pos = Vec::with_capacity(params.l_pu);
    for _ in 0..params.l_pu {
        let y = rng.gen_range(-1.0..=1.0);
        pt_pos.push(Point::new(-1.0, y));
        pr_pos.push(Point::new(1.0, y));
    }
    let mut st_pos = Vec::with_capacity(params.l_su);
    let mut sr_pos = Vec::with_capacity(params.l_su);
    for _ in 0..params.l_su {
        loop {
            let st = uniform_point(rng, 0.5);
            let sr = uniform_point(rng, 0.5);
            if st.distance(&sr) >= MIN_DISTANCE {
                st_pos.push(st);
                sr_pos.push(sr);
                break;
            }
        }
    }
    Placement {
        pt_pos,
        pr_pos,
        st_pos,
        sr_pos,
    }
}

/// One draw of `|h|²` for `h ~ CN(0, 1)`.
pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // gen() is in [0, 1); 1 - u is in (0, 1].
    let u: f64 = 1.0 - rng.gen::<f64>();
    -u.ln()
}

pub fn draw_channels<R: Rng + ?Sized>(
    params: &ScenarioParams,
    placement: Placement,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let (l_pu, l_su) = (placement.pt_pos.len(), placement.st_pos.len());
    let h2_pt_pr = (0..l_pu).map(|_| exp1(rng)).collect();
    let h2_pt_st = (0..l_pu)
        .map(|_| (0..l_su).map(|_| exp1(rng)).collect())
        .collect();
    let h2_st_pr = (0..l_pu)
        .map(|_| (0..l_su).map(|_| exp1(rng)).collect())
        .collect();
    let h2_st_sr = (0..l_su)
        .map(|_| {
            if params.su_channel_per_band {
                (0..l_pu).map(|_| exp1(rng)).collect()
            } else {
                vec![exp1(rng); l_pu]
            }
        })
        .collect();
    let fading = Fading {
        h2_pt_pr,
        h2_pt_st,
        h2_st_pr,
        h2_st_sr,
    };
    let distances = Distances::from_placement(&placement);
    let snr = radio::compute_snrs(params, &fading, &distances)?;
    let expectation_seed = rng.gen();
    Ok(ChannelRealization {
        placement,
        fading,
        distances,
        snr,
        expectation_seed,
    })
}

/// Placement and channels for one trial seed.
pub fn realize(params: &ScenarioParams, seed: u64) -> Result<ChannelRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let placement = place_users(params, &mut rng);
    draw_channels(params, placement, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn direct_links_have_length_two() {
        let params = ScenarioParams::default();
        let p = place_users(&params, &mut rng(3));
        assert_eq!(p.pt_pos.len(), 2);
        for d in Distances::from_placement(&p).pt_pr {
            assert_eq!(d, 2.0);
        }
    }

    #[test]
    fn secondary_users_stay_in_inner_square() {
        let params = ScenarioParams {
            l_su: 50,
            ..Default::default()
        };
        for seed in 0..20 {
            let p = place_users(&params, &mut rng(seed));
            for pt in p.st_pos.iter().chain(&p.sr_pos) {
                assert!(pt.x.abs() <= 0.5 && pt.y.abs() <= 0.5);
            }
            let d = Distances::from_placement(&p);
            assert!(d.pt_st.iter().flatten().all(|&x| x >= 0.5));
            assert!(d.st_pr.iter().flatten().all(|&x| x >= 0.5));
        }
    }

    #[test]
    fn seeded_realization_is_deterministic() {
        let params = ScenarioParams::default();
        assert_eq!(realize(&params, 11).unwrap(), realize(&params, 11).unwrap());
        assert_ne!(realize(&params, 11).unwrap(), realize(&params, 12).unwrap());
    }

    #[test]
    fn fading_has_unit_mean() {
        let mut r = rng(5);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| exp1(&mut r)).collect();
        assert!(draws.iter().all(|&x| x >= 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn st_x_coordinate_is_centered() {
        let params = ScenarioParams {
            l_su: 1000,
            ..Default::default()
        };
        let mut sum = 0.0;
        let mut n = 0;
        for seed in 0..100 {
            let p = place_users(&params, &mut rng(seed));
            sum += p.st_pos.iter().map(|s| s.x).sum::<f64>();
            n += p.st_pos.len();
        }
        assert!((sum / n as f64).abs() < 0.01);
    }

    #[test]
    fn collapsed_su_channel_repeats_across_bands() {
        let params = ScenarioParams {
            su_channel_per_band: false,
            ..Default::default()
        };
        let r = realize(&params, 2).unwrap();
        for row in &r.fading.h2_st_sr {
            assert!(row.iter().all(|&h| h == row[0]));
        }
    }
}
