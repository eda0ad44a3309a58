mod common;

use common::*;
use proptest::prelude::*;
use teamlmi::corpus;
use teamlmi::linalg::{self, Mat, Vector};
use teamlmi::oracle::{self, achieved_gamma, point_ratio, sample_ratio, worst_case_witness, ClosedLoopPencil};
use teamlmi::{BlockGain, Partition};

#[test]
fn monte_carlo_lower_bound_brackets_pencil_value() {
    let mut r = rng(2024);
    let part = Partition::scalar(3).unwrap();
    let team = random_team_with(&mut r, 2, part, 0.5);
    let prob = team.to_gamma_form();
    let gain = random_gain(&mut r, &prob.partition, 0.3);
    let exact = achieved_gamma(&prob, &gain).unwrap();

    let mut sampled = f64::NEG_INFINITY;
    for _ in 0..100_000 {
        let x = randn_vec(&mut r, prob.n()).normalize();
        sampled = sampled.max(point_ratio(&prob, &gain, &x).unwrap());
    }
    assert!(exact >= sampled, "pencil {exact} below a sampled ratio {sampled}");
    assert!(exact <= sampled * (1.0 + 1e-6) + 0.05, "pencil {exact}, best sample {sampled}");
}

#[test]
fn disturbance_coordinates_never_beat_pencil() {
    let mut r = rng(7);
    for _ in 0..20 {
        let team = random_team(&mut r);
        let gain = random_gain(&mut r, &team.partition, 0.5);
        if !oracle::well_posed(&team, &gain) {
            continue;
        }
        let exact = achieved_gamma(&team.to_gamma_form(), &gain).unwrap();
        for _ in 0..500 {
            let w = randn_vec(&mut r, team.q());
            let v = randn_vec(&mut r, team.p());
            let s = sample_ratio(&team, &gain, &w, &v).unwrap();
            assert!(s <= exact + 1e-9 * exact.abs().max(1.0), "{s} > {exact}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witness_round_trips_through_sample_ratio(seed in any::<u64>()) {
        let mut r = rng(seed);
        let team = random_team(&mut r);
        let gain = random_gain(&mut r, &team.partition, 0.5);
        prop_assume!(oracle::well_posed(&team, &gain));
        let wit = worst_case_witness(&team, &gain).unwrap();
        let back = sample_ratio(&team, &gain, &wit.w, &wit.v).unwrap();
        prop_assert!(rel_close(back, wit.ratio, 1e-8), "{} vs {}", back, wit.ratio);
        prop_assert!(rel_close(wit.ratio, achieved_gamma(&team.to_gamma_form(), &gain).unwrap(), 1e-12));
    }

    #[test]
    fn zero_padding_leaves_value_unchanged(seed in any::<u64>(), extra in 1usize..3) {
        let mut r = rng(seed);
        let prob = random_team(&mut r).to_gamma_form();
        let gain = random_gain(&mut r, &prob.partition, 0.5);
        let pencil = ClosedLoopPencil::new(&prob, &gain).unwrap();
        let n = pencil.gj.nrows();
        let pad = |a: &Mat| {
            let mut out = Mat::zeros(n + extra, n + extra);
            linalg::put_block(&mut out, 0, 0, a);
            out
        };
        let base = pencil.max_ratio().value();
        let padded = linalg::pencil_max(&pad(&pencil.gj), &pad(&pencil.gf)).value();
        prop_assert!(rel_close(base, padded, 1e-10));
    }

    #[test]
    fn scaling_cost_scales_value(seed in any::<u64>(), alpha in 0.1f64..10.0) {
        let mut r = rng(seed);
        let prob = random_team(&mut r).to_gamma_form();
        let gain = random_gain(&mut r, &prob.partition, 0.5);
        let mut scaled = prob.clone();
        scaled.q_form *= alpha;
        let a = achieved_gamma(&prob, &gain).unwrap();
        let b = achieved_gamma(&scaled, &gain).unwrap();
        prop_assert!(rel_close(b, alpha * a, 1e-9));
    }
}

#[test]
fn witsenhausen_samples_respect_reported_value() {
    let gain = BlockGain::scalar(&[-0.9001, 0.0896]);
    let mut r = rng(1);
    for _ in 0..10_000 {
        let nature = randn_vec(&mut r, 2);
        let (num, den) = corpus::witsenhausen_simulate(0.1, &gain, nature[0], nature[1]);
        assert!(num / den <= 0.0901 + 1e-3);
    }
}

#[test]
fn witsenhausen_simulation_matches_gamma_form() {
    let prob = corpus::witsenhausen(1.0).unwrap();
    let mut r = rng(5);
    for _ in 0..100 {
        let gain = random_gain(&mut r, &prob.partition, 1.0);
        let nature = randn_vec(&mut r, 2);
        let (num, den) = corpus::witsenhausen_simulate(1.0, &gain, nature[0], nature[1]);
        let k = gain.entries();
        let y = Vector::from_vec(vec![nature[0], nature[0] * (1.0 + k[0]) + nature[1]]);
        assert!(rel_close(point_ratio(&prob, &gain, &y).unwrap(), num / den, 1e-10));
        let (x0, w) = corpus::witsenhausen_nature(&gain, &y);
        assert!(rel_close(x0, nature[0], 1e-12) && rel_close(w, nature[1], 1e-12));
    }
}

#[test]
fn relay_sample_ratio_matches_recursion() {
    let team = corpus::multistage(3).unwrap();
    let mut r = rng(9);
    for _ in 0..100 {
        let gain = random_gain(&mut r, &team.partition, 1.0);
        let w = randn_vec(&mut r, 1);
        let v = randn_vec(&mut r, 3);
        let (num, den) = corpus::multistage_simulate(&gain, w[0], v.as_slice());
        let s = sample_ratio(&team, &gain, &w, &v).unwrap();
        assert!(rel_close(s, num / den, 1e-10), "{s} vs {}", num / den);
    }
}

#[test]
fn relay_value_matches_simulated_supremum() {
    let team = corpus::multistage(4).unwrap();
    let mut r = rng(13);
    let gain = random_gain(&mut r, &team.partition, 0.5);
    let exact = achieved_gamma(&team.to_gamma_form(), &gain).unwrap();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..100_000 {
        let nature = randn_vec(&mut r, 5);
        let (num, den) = corpus::multistage_simulate(&gain, nature[0], &nature.as_slice()[1..]);
        best = best.max(num / den);
    }
    assert!(best <= exact + 1e-9);
    assert!((exact - best).abs() <= 0.05, "pencil {exact}, simulated sup {best}");
}
