#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use teamlmi::linalg::{Mat, Vector};
use teamlmi::{BlockGain, Partition, TeamProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn_mat(rng: &mut impl Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn randn_vec(rng: &mut impl Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// `players` players, each with 1..=2 inputs and 1..=2 measurements.
pub fn random_partition(rng: &mut impl Rng, players: usize) -> Partition {
    let m = (0..players).map(|_| rng.random_range(1..=2)).collect();
    let p = (0..players).map(|_| rng.random_range(1..=2)).collect();
    Partition::new(m, p).unwrap()
}

/// Random cost `LLᵀ + 0.1·diag(0, I)` (PSD with `Quu ≻ 0`) and random
/// signaling of size `d_scale`.
pub fn random_team_with(rng: &mut impl Rng, q: usize, partition: Partition, d_scale: f64) -> TeamProblem {
    let (m, p) = (partition.m(), partition.p());
    let l = randn_mat(rng, q + m, q + m);
    let mut full = &l * l.transpose();
    for i in q..q + m {
        full[(i, i)] += 0.1;
    }
    TeamProblem::new(
        full.view((0, 0), (q, q)).into_owned(),
        full.view((0, q), (q, m)).into_owned(),
        full.view((q, q), (m, m)).into_owned(),
        randn_mat(rng, p, m) * d_scale,
        randn_mat(rng, p, q),
        partition,
    )
    .unwrap()
}

/// 1..=3 players, 1..=4 nature components.
pub fn random_team(rng: &mut impl Rng) -> TeamProblem {
    let players = rng.random_range(1..=3);
    let q = rng.random_range(1..=4);
    let part = random_partition(rng, players);
    random_team_with(rng, q, part, 1.0)
}

pub fn random_gain(rng: &mut impl Rng, partition: &Partition, scale: f64) -> BlockGain {
    let entries: Vec<f64> = (0..partition.gain_entries())
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    BlockGain::from_entries(partition, &entries).unwrap()
}

pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
}
