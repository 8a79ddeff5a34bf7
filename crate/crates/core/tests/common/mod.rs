//! Shared helpers for the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use relay_match::{Market, Requirements, ScenarioParams};

/// Market with rate coefficients drawn uniformly from plausible ranges.
pub fn random_market(rng: &mut ChaCha8Rng, l_pu: usize, l_su: usize, params: &ScenarioParams) -> Market {
    let pu = (0..l_pu).map(|_| (0..l_su).map(|_| rng.gen_range(0.2..1.2)).collect()).collect();
    let su = (0..l_su).map(|_| (0..l_pu).map(|_| rng.gen_range(2.0..25.0)).collect()).collect();
    let req = Requirements {
        pu: (0..l_pu).map(|_| rng.gen_range(0.05..0.6)).collect(),
        su: vec![params.r_su_req; l_su],
    };
    Market::from_rates(params, pu, su, req)
}

/// Best PU utility of pair `(l, q)` by grid search with successive zooming.
///
/// The price is parametrized as a fraction `t` of its largest admissible
/// value at each β, so the feasible set is a rectangle in `(β, t)`. The
/// first pass uses an `n × n` grid; later passes zoom on the incumbent.
/// Returns `(utility, xi, beta)` or `None` when the pair is infeasible.
pub fn grid_search_pair(m: &Market, l: usize, q: usize, n: usize) -> Option<(f64, f64, f64)> {
    let a = m.pu_rate_per_beta[l][q];
    let s = m.su_frame_rate[q][l];
    let kc = m.k_bar * m.capital_c;
    let lo = if a > 0.0 { (m.req.pu[l] / a).max(0.0) } else { f64::INFINITY };
    let hi = if s > 0.0 { (1.0 - m.req.su[q] / s).min(1.0) } else { f64::NEG_INFINITY };
    if lo > hi {
        return None;
    }
    let cap = |beta: f64| if kc > 0.0 { ((1.0 - beta) * s / kc).min(1.0) } else { 1.0 };
    let value = |beta: f64, t: f64| {
        let xi = t * cap(beta);
        (beta * a + m.c_bar * xi * m.capital_c, xi)
    };
    let (mut b0, mut b1, mut t0, mut t1) = (lo, hi, 0.0, 1.0);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    let mut size = n;
    for _ in 0..8 {
        let (hb, ht) = ((b1 - b0) / size as f64, (t1 - t0) / size as f64);
        for i in 0..=size {
            let beta = b0 + hb * i as f64;
            for j in 0..=size {
                let t = t0 + ht * j as f64;
                let (u, xi) = value(beta, t);
                if u > best.0 {
                    best = (u, xi, beta, t);
                }
            }
        }
        let (_, _, bb, bt) = best;
        b0 = (bb - 2.0 * hb).max(lo);
        b1 = (bb + 2.0 * hb).min(hi);
        t0 = (bt - 2.0 * ht).max(0.0);
        t1 = (bt + 2.0 * ht).min(1.0);
        size = 40;
    }
    Some((best.0, best.1, best.2))
}
