mod common;

use common::*;
use proptest::prelude::*;
use teamlmi::linalg::{self, Mat, SymEigen, Vector};
use teamlmi::model::{validate_problem, ModelError, Violation};
use teamlmi::{Partition, TeamProblem};

/// `λ_max(DᵀD, Quu)` through the symmetric square root of `Quu`, which is a
/// different factorization from the one used by `gamma_bar`.
fn signaling_ratio(prob: &TeamProblem) -> f64 {
    let eig = SymEigen::new(&prob.quu);
    let inv_sqrt = &eig.vectors * Mat::from_diagonal(&eig.values.map(|l| 1.0 / l.sqrt())) * eig.vectors.transpose();
    let dtd = prob.d.transpose() * &prob.d;
    linalg::lambda_max(&linalg::symmetrize(&(&inv_sqrt * dtd * &inv_sqrt)))
}

fn permute_players(prob: &TeamProblem, order: &[usize]) -> TeamProblem {
    let part = &prob.partition;
    let offs = part.offsets();
    let (mut u_idx, mut y_idx) = (vec![], vec![]);
    for &i in order {
        u_idx.extend(offs[i].0..offs[i].0 + part.m_sizes()[i]);
        y_idx.extend(offs[i].1..offs[i].1 + part.p_sizes()[i]);
    }
    let pick = |a: &Mat, rows: &[usize], cols: &[usize]| Mat::from_fn(rows.len(), cols.len(), |r, c| a[(rows[r], cols[c])]);
    let all_w: Vec<usize> = (0..prob.q()).collect();
    TeamProblem::new(
        prob.qww.clone(),
        pick(&prob.qwu, &all_w, &u_idx),
        pick(&prob.quu, &u_idx, &u_idx),
        pick(&prob.d, &y_idx, &u_idx),
        pick(&prob.e, &y_idx, &all_w),
        Partition::new(
            order.iter().map(|&i| part.m_sizes()[i]).collect(),
            order.iter().map(|&i| part.p_sizes()[i]).collect(),
        )
        .unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_form_reproduces_cost_and_disturbance_energy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let prob = random_team(&mut r);
        let g = prob.to_gamma_form();
        for _ in 0..100 {
            let w = randn_vec(&mut r, prob.q());
            let y = randn_vec(&mut r, prob.p());
            let u = randn_vec(&mut r, prob.m());
            let x = Vector::from_iterator(w.len() + y.len(), w.iter().chain(y.iter()).copied());
            let v = &y - &prob.d * &u - &prob.e * &w;
            let f = v.norm_squared() + w.norm_squared();
            prop_assert!(rel_close(g.denominator(&x, &u), f, 1e-10));
            prop_assert!(rel_close(g.numerator(&x, &u), prob.cost(&w, &u), 1e-10));
        }
    }

    #[test]
    fn gamma_bar_inverts_signaling_ratio(seed in any::<u64>()) {
        let mut r = rng(seed);
        let prob = random_team(&mut r);
        let gb = prob.gamma_bar().unwrap();
        prop_assert!(rel_close(gb * signaling_ratio(&prob), 1.0, 1e-10));
        let via_form = prob.to_gamma_form().gamma_bar().unwrap();
        prop_assert!(rel_close(gb, via_form, 1e-10));
    }

    #[test]
    fn gamma_bar_scaling(seed in any::<u64>(), alpha in 0.1f64..10.0, beta in 0.1f64..10.0) {
        let mut r = rng(seed);
        let prob = random_team(&mut r);
        let gb = prob.gamma_bar().unwrap();
        let mut scaled = prob.clone();
        scaled.quu *= alpha;
        scaled.qwu *= alpha;
        scaled.qww *= alpha;
        prop_assert!(rel_close(scaled.gamma_bar().unwrap(), alpha * gb, 1e-10));
        let mut louder = prob.clone();
        louder.d *= beta;
        prop_assert!(rel_close(louder.gamma_bar().unwrap(), gb / (beta * beta), 1e-10));
    }

    #[test]
    fn gamma_bar_ignores_player_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let part = random_partition(&mut r, 3);
        let prob = random_team_with(&mut r, 2, part, 1.0);
        let gb = prob.gamma_bar().unwrap();
        for order in [[2, 0, 1], [1, 2, 0], [2, 1, 0]] {
            prop_assert!(rel_close(permute_players(&prob, &order).gamma_bar().unwrap(), gb, 1e-10));
        }
    }
}

#[test]
fn no_signaling_means_infinite_ceiling() {
    let mut r = rng(3);
    let part = random_partition(&mut r, 2);
    let prob = random_team_with(&mut r, 2, part, 0.0);
    assert_eq!(prob.gamma_bar().unwrap(), f64::INFINITY);
}

#[test]
fn indefinite_quu_is_named() {
    let one = Mat::from_element(1, 1, 1.0);
    let err = TeamProblem::new(
        one.clone(),
        Mat::zeros(1, 1),
        Mat::from_element(1, 1, -1.0),
        one.clone(),
        one,
        Partition::scalar(1).unwrap(),
    )
    .unwrap_err();
    let ModelError::Invalid(v) = &err else { panic!("{err}") };
    assert!(v.iter().any(|x| matches!(x, Violation::QuuNotPd { .. })));
    assert!(err.to_string().contains("Quu not positive definite"), "{err}");
}

#[test]
fn definiteness_violations_are_reported_together() {
    let raw = TeamProblem {
        qww: Mat::identity(2, 2),
        qwu: Mat::zeros(2, 1),
        quu: Mat::from_element(1, 1, -1.0),
        d: Mat::zeros(1, 1),
        e: Mat::zeros(1, 2),
        partition: Partition::scalar(1).unwrap(),
    };
    let v = validate_problem(&raw);
    assert!(v.iter().any(|x| matches!(x, Violation::QuuNotPd { .. })));
    assert!(v.iter().any(|x| matches!(x, Violation::CostNotPsd { .. })));

    let skew = TeamProblem {
        qww: Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
        ..raw
    };
    assert!(matches!(validate_problem(&skew)[..], [Violation::NotSymmetric { name: "Qww", .. }]));
}
