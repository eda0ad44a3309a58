mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use teamlmi::lift::{lift_dynamic, simulate, DynamicProblem};
use teamlmi::linalg::Mat;
use teamlmi::oracle::{self, closed_loop_terms};
use teamlmi::{corpus, BlockGain};

fn random_dynamic(r: &mut impl Rng) -> DynamicProblem {
    let nx = r.random_range(1..=3);
    let players = r.random_range(1..=2);
    let input_sizes: Vec<usize> = (0..players).map(|_| r.random_range(1..=2)).collect();
    let mu: usize = input_sizes.iter().sum();
    let c = (0..players)
        .map(|_| {
            let pi = r.random_range(1..=2);
            randn_mat(r, pi, nx)
        })
        .collect();
    let l = randn_mat(r, nx + mu, nx + mu);
    let mut s = &l * l.transpose();
    for i in nx..nx + mu {
        s[(i, i)] += 0.1;
    }
    let s = (&s + s.transpose()) * 0.5;
    DynamicProblem::new(
        randn_mat(r, nx, nx) * 0.7,
        randn_mat(r, nx, mu),
        c,
        input_sizes,
        s,
        r.random_range(1..=4),
        r.random_bool(0.5),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lifted_quadratic_forms_match_time_domain(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dynp = random_dynamic(&mut r);
        let team = lift_dynamic(&dynp).unwrap();
        for _ in 0..10 {
            let gain = random_gain(&mut r, &team.partition, 1.0);
            let w = randn_vec(&mut r, team.q());
            let v = randn_vec(&mut r, team.p());
            let (cost, den) = simulate(&dynp, &gain, &w, &v);
            let (num, den2) = closed_loop_terms(&team, &gain, &w, &v).unwrap();
            prop_assert!(rel_close(cost, num, 1e-9), "{} vs {}", cost, num);
            prop_assert!(rel_close(den, den2, 1e-12));
        }
    }

    #[test]
    fn lifted_signaling_is_strictly_causal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dynp = random_dynamic(&mut r);
        let team = lift_dynamic(&dynp).unwrap();
        let p_stage: usize = dynp.c.iter().map(|c| c.nrows()).sum();
        let mu = dynp.input_dim();
        for t in 0..dynp.horizon {
            for s in t..dynp.horizon {
                let blk = team.d.view((p_stage * t, mu * s), (p_stage, mu));
                prop_assert!(blk.iter().all(|&x| x == 0.0), "stage {} sees decision of stage {}", t, s);
            }
        }
        for _ in 0..5 {
            let gain = random_gain(&mut r, &team.partition, 10.0);
            prop_assert!(oracle::well_posed(&team, &gain));
        }
    }
}

#[test]
fn relay_lift_has_unit_subdiagonal() {
    let team = lift_dynamic(&corpus::multistage_dynamic(3).unwrap()).unwrap();
    assert_eq!(team.d, Mat::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
}

#[test]
fn relay_static_form_matches_recursion_on_100_draws() {
    let team = corpus::multistage(3).unwrap();
    let mut r = rng(99);
    for _ in 0..100 {
        let gain = random_gain(&mut r, &team.partition, 1.5);
        let w = randn_vec(&mut r, 1);
        let v = randn_vec(&mut r, 3);
        let (sim_num, sim_den) = corpus::multistage_simulate(&gain, w[0], v.as_slice());
        let (num, den) = closed_loop_terms(&team, &gain, &w, &v).unwrap();
        assert!(rel_close(sim_num, num, 1e-9) && rel_close(sim_den, den, 1e-9));
    }
}

#[test]
fn single_stage_has_no_signaling() {
    let mut r = rng(4);
    for _ in 0..10 {
        let mut dynp = random_dynamic(&mut r);
        dynp.horizon = 1;
        let team = lift_dynamic(&dynp).unwrap();
        assert!(team.d.iter().all(|&x| x == 0.0));
        assert_eq!(team.gamma_bar().unwrap(), f64::INFINITY);
        let zero = BlockGain::zeros(&team.partition);
        assert!(oracle::well_posed(&team, &zero));
    }
}
