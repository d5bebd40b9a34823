#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use spinor_pairs::model::{CondensateGeometry, ModelParams, MomentumVector};

pub type V = MomentumVector<f64>;

/// Monte Carlo estimate with its one-sigma error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// ∫d³q′ |ρ̄(q+q′)|² δ(Δ) by brute force in three dimensions.
///
/// k = q + q′ is drawn from the normalized |ρ̄(k)|², a Gaussian with
/// per-axis std √2/σ_i, so the integral becomes Z·E[δ_ε(Δ)]. The delta is a
/// Gaussian of width ε; the O(ε²) bias is removed by Richardson
/// extrapolation between ε and ε/2 on the same samples.
pub fn gain_monte_carlo(
    geom: &CondensateGeometry<f64>,
    params: &ModelParams<f64>,
    q: &V,
    samples: usize,
    seed: u64,
) -> Estimate {
    let (sz, sp) = (geom.sigma_z(), geom.sigma_perp());
    let z_norm = (4.0 * std::f64::consts::PI).powf(1.5) / (sz * sp * sp);
    let two_delta = 2.0 * params.detuning();
    let mismatch = |k: &V| {
        let qp = *k - *q;
        0.5 * (q.norm_sqr() + qp.norm_sqr()) - two_delta
    };

    let pilot = draw(geom, 4096, seed ^ 0x5eed);
    let spread = {
        let d: Vec<f64> = pilot.iter().map(&mismatch).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64).sqrt()
    };
    let eps = 0.05 * spread;

    const CHUNK: usize = 1 << 16;
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(samples - c * CHUNK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for k in draw(geom, n, seed.wrapping_add(c as u64)) {
                let d = mismatch(&k);
                let f = (4.0 * gaussian_delta(d, eps / 2.0) - gaussian_delta(d, eps)) / 3.0;
                s += f;
                s2 += f * f;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Estimate {
        value: z_norm * mean,
        std_err: z_norm * (var / n).sqrt(),
    }
}

fn gaussian_delta(x: f64, eps: f64) -> f64 {
    (-0.5 * (x / eps).powi(2)).exp() / (eps * (2.0 * std::f64::consts::PI).sqrt())
}

fn draw(geom: &CondensateGeometry<f64>, n: usize, seed: u64) -> Vec<V> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perp = Normal::new(0.0, 2f64.sqrt() / geom.sigma_perp()).unwrap();
    let along = Normal::new(0.0, 2f64.sqrt() / geom.sigma_z()).unwrap();
    (0..n)
        .map(|_| {
            V::new(
                perp.sample(&mut rng),
                perp.sample(&mut rng),
                along.sample(&mut rng),
            )
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from [lo, hi).
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Uniform point inside the ball of radius r.
pub fn in_ball(rng: &mut ChaCha8Rng, r: f64) -> V {
    loop {
        let v = V::new(
            uniform(rng, -r, r),
            uniform(rng, -r, r),
            uniform(rng, -r, r),
        );
        if v.norm() <= r {
            return v;
        }
    }
}

/// Linearly spaced angles in radians from 0 to 90 degrees inclusive.
pub fn quarter_circle(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64)
        .collect()
}
