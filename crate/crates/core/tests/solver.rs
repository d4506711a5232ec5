//! Loss, diffusion statistics and the three block updates.

mod common;

use common::*;
use proptest::prelude::*;
use uvds_core::baseline::linear_regression;
use uvds_core::graph::build_graphset;
use uvds_core::linalg::{center_columns, column_l21, orthogonality_defect, solve};
use uvds_core::solver::{
    diffusion_stats, diffusion_weights, fit, loss, p_step, q_gradient, q_objective, q_step, v_step,
    v_step_uncentered,
};
use uvds_core::zsl::synthesize;
use uvds_core::{AttributeLevel, Dataset, DiffusionStats, Matrix, ModelParams, SolverConfig};

fn dataset(n: usize, d: usize, m: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let labels: Vec<i64> = (0..n).map(|i| 1 + (i % 3) as i64).collect();
    Dataset::new(random(n, d, &mut r), random(n, m, &mut r), &labels, AttributeLevel::ImageLevel).unwrap()
}

fn random_params(ds: &Dataset, seed: u64) -> ModelParams {
    let mut r = rng(seed);
    let (n, d, m) = (ds.len(), ds.feature_dim(), ds.attribute_dim());
    ModelParams {
        p: random(m, d, &mut r),
        q: random_orthogonal(d, &mut r),
        v: center_columns(&random(n, d, &mut r)).unwrap().0,
    }
}

fn pairwise_sum(w: &Matrix, v: &Matrix) -> f64 {
    let n = v.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d2: f64 = v.row(i).iter().zip(v.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            s += d2 * w[(i, j)];
        }
    }
    0.5 * s
}

#[test]
fn loss_zero_on_perfect_fit() {
    let x = center_columns(&random(9, 3, &mut rng(1))).unwrap().0;
    let ds = Dataset::new(x.clone(), x, &[1, 1, 1, 2, 2, 2, 3, 3, 3], AttributeLevel::ImageLevel).unwrap();
    let gs = build_graphset(&ds, 3).unwrap();
    let params = ModelParams::initial(&ds).unwrap();
    let cfg = SolverConfig {
        lambda: 0.0,
        beta: 0.0,
        ..SolverConfig::default()
    };
    assert!(loss(&ds, &gs, &params, &cfg).unwrap().abs() < 1e-20);
}

#[test]
fn loss_without_diffusion_matches_loop() {
    let ds = dataset(10, 4, 3, 2);
    let gs = build_graphset(&ds, 3).unwrap();
    let params = random_params(&ds, 3);
    let cfg = SolverConfig {
        lambda: 0.7,
        beta: 0.0,
        alpha: 1.5,
        ..SolverConfig::default()
    };
    let (n, d, m) = (10, 4, 3);
    let mut fx = 0.0;
    let mut fa = 0.0;
    for i in 0..n {
        for j in 0..d {
            let vq: f64 = (0..d).map(|k| params.v[(i, k)] * params.q[(k, j)]).sum();
            fx += (ds.features[(i, j)] - vq).powi(2);
            let ap: f64 = (0..m).map(|k| ds.attributes[(i, k)] * params.p[(k, j)]).sum();
            fa += (params.v[(i, j)] - ap).powi(2);
        }
    }
    let oracle = fx + 1.5 * fa + 0.7 * pairwise_sum(&gs.w_mean, &params.v);
    let j = loss(&ds, &gs, &params, &cfg).unwrap();
    assert!((j - oracle).abs() <= 1e-10 * oracle.abs());
}

#[test]
fn loss_diffusion_only() {
    let mut r = rng(4);
    let ds = Dataset::new(Matrix::zeros(6, 3), random(6, 2, &mut r), &[1, 1, 2, 2, 3, 3], AttributeLevel::ImageLevel).unwrap();
    let gs = build_graphset(&ds, 2).unwrap();
    let params = ModelParams {
        p: Matrix::zeros(2, 3),
        q: random_orthogonal(3, &mut r),
        v: random(6, 3, &mut r),
    };
    let cfg = SolverConfig {
        lambda: 0.0,
        beta: 0.4,
        ..SolverConfig::default()
    };
    let vq = params.v.matmul(&params.q).unwrap();
    // the attribute term reduces to α‖V‖² with P = 0
    let oracle = vq.frobenius_sq() + params.v.frobenius_sq() - 0.4 * column_l21(&vq).unwrap();
    let j = loss(&ds, &gs, &params, &cfg).unwrap();
    assert!((j - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
}

#[test]
fn diffusion_weight_cases() {
    let v = Matrix::from_fn(4, 2, |_, j| if j == 0 { 1.0 } else { 0.0 });
    let e = diffusion_weights(&v, &Matrix::identity(2), 1e-10).unwrap();
    assert_eq!(e[(0, 0)], 0.5);
    assert!((e[(1, 1)] - 1.0 / (2.0 * 1e-10)).abs() <= 1e-6 * e[(1, 1)]);
    assert_eq!(e[(0, 1)], 0.0);

    let v = random(7, 3, &mut rng(5));
    let e = diffusion_weights(&v, &Matrix::identity(3), 1e-10).unwrap();
    for d in 0..3 {
        let pi = ((0..7).map(|i| v[(i, d)] * v[(i, d)]).sum::<f64>() / 7.0).sqrt();
        let expected = 1.0 / (7f64.sqrt() * pi);
        assert!((e[(d, d)] - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn v_step_closed_form_without_regularisers() {
    let ds = dataset(9, 3, 2, 6);
    let gs = build_graphset(&ds, 3).unwrap();
    let mut params = random_params(&ds, 7);
    params.q = Matrix::identity(3);
    let cfg = SolverConfig {
        lambda: 0.0,
        beta: 0.0,
        gamma: 0.0,
        ..SolverConfig::default()
    };
    let v = v_step_uncentered(&ds, &gs, &params, &cfg).unwrap();
    let expected = ds.features.add(&ds.attributes.matmul(&params.p).unwrap()).unwrap().scale(0.5);
    assert!(rel_diff(&v, &expected) < 1e-12);
}

#[test]
fn v_step_stationarity_and_centering() {
    let ds = dataset(12, 4, 3, 8);
    let gs = build_graphset(&ds, 3).unwrap();
    let params = random_params(&ds, 9);
    let cfg = SolverConfig {
        lambda: 0.5,
        beta: 0.3,
        gamma: 1.0,
        alpha: 1.2,
        ..SolverConfig::default()
    };
    let e = diffusion_weights(&params.v, &params.q, cfg.eps_pi).unwrap();
    let q = &params.q;
    let mut right = q.matmul_t(q).unwrap().scale(2.0);
    right.axpy(2.0 * cfg.alpha, &Matrix::identity(4)).unwrap();
    right.axpy(-cfg.beta, &q.matmul(&e).unwrap().matmul_t(q).unwrap()).unwrap();
    let mut left = gs.laplacian.scale(2.0 * cfg.lambda);
    left = left.add(&Matrix::from_fn(12, 12, |_, _| cfg.gamma)).unwrap();
    let mut rhs = ds.features.matmul_t(q).unwrap().scale(2.0);
    rhs.axpy(2.0 * cfg.alpha, &ds.attributes.matmul(&params.p).unwrap()).unwrap();

    let v = v_step_uncentered(&ds, &gs, &params, &cfg).unwrap();
    let resid = v.matmul(&right).unwrap().add(&left.matmul(&v).unwrap()).unwrap().sub(&rhs).unwrap();
    assert!(resid.frobenius() <= 1e-7 * rhs.frobenius());

    let centred = v_step(&ds, &gs, &params, &cfg).unwrap();
    for d in 0..4 {
        let s: f64 = (0..12).map(|i| centred[(i, d)]).sum();
        assert!(s.abs() <= 1e-9 * 12.0);
    }
}

#[test]
fn q_gradient_trivial_cases() {
    let mut r = rng(10);
    let x = random(6, 3, &mut r);
    let q = random_orthogonal(3, &mut r);
    assert_eq!(q_gradient(&Matrix::zeros(6, 3), &q, &x, 0.5, 1e-10).unwrap(), Matrix::zeros(3, 3));
    let g = q_gradient(&x, &Matrix::identity(3), &x, 0.0, 1e-10).unwrap();
    assert!(g.frobenius() < 1e-14);
}

#[test]
fn q_step_keeps_stationary_point() {
    let mut r = rng(11);
    let q0 = random_orthogonal(3, &mut r);
    let out = q_step(&Matrix::zeros(5, 3), &q0, &random(5, 3, &mut r), &SolverConfig::default()).unwrap();
    assert_eq!(out.q, q0);
}

#[test]
fn p_step_cases() {
    let mut r = rng(12);
    let v = random(5, 3, &mut r);
    assert!(rel_diff(&p_step(&Matrix::identity(5), &v).unwrap(), &v) < 1e-14);
    let o = random_orthogonal(5, &mut r);
    let a = Matrix::from_fn(5, 2, |i, j| o[(i, j)]);
    assert!(rel_diff(&p_step(&a, &v).unwrap(), &a.t_matmul(&v).unwrap()) < 1e-12);
    let a = random(5, 2, &mut r);
    assert!(p_step(&a, &v).unwrap().sub(&normal_equations(&a, &v)).unwrap().frobenius() <= 1e-9);
}

#[test]
fn zero_iterations_return_initialisation() {
    let ds = dataset(10, 3, 2, 13);
    let gs = build_graphset(&ds, 3).unwrap();
    let cfg = SolverConfig {
        outer_iters: 0,
        ..SolverConfig::default()
    };
    let res = fit(&ds, &gs, &cfg).unwrap();
    assert_eq!(res.params, ModelParams::initial(&ds).unwrap());
    assert_eq!(res.params.q, Matrix::identity(3));
    assert_eq!(res.params.v, ds.features);
    assert_eq!(res.loss_trace.len(), 1);
}

#[test]
fn plain_factorisation_matches_regression() {
    let mut r = rng(14);
    let attributes = center_columns(&random(6, 3, &mut r)).unwrap().0;
    let ds = Dataset::new(random(6, 4, &mut r), attributes, &[1, 1, 2, 2, 3, 3], AttributeLevel::ImageLevel).unwrap();
    let gs = build_graphset(&ds, 2).unwrap();
    let cfg = SolverConfig {
        lambda: 0.0,
        beta: 0.0,
        gamma: 0.0,
        ..SolverConfig::default()
    };
    let res = fit(&ds, &gs, &cfg).unwrap();
    let unseen = random(2, 3, &mut r);
    let ours = synthesize(&unseen, &res.params).unwrap();
    let baseline = synthesize(&unseen, &linear_regression(&ds, 0.0).unwrap()).unwrap();
    assert!(ours.sub(&baseline).unwrap().frobenius() <= 1e-6);
}

#[test]
fn diffusion_stats_cases() {
    let equal = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
    assert_eq!(DiffusionStats::of(&equal).pi_variance, 0.0);

    let x = Matrix::from_rows(&[vec![1.0, 3.0], vec![-1.0, -3.0]]).unwrap();
    let s = DiffusionStats::of(&x);
    assert_eq!(s.pi, vec![1.0, 3.0]);
    assert_eq!(s.pi_variance, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gradient_matches_finite_differences(n in 5usize..=20, d in 1usize..=8, beta in 0.0f64..2.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = random(n, d, &mut r);
        let x = random(n, d, &mut r);
        let q = random_orthogonal(d, &mut r);
        let g = q_gradient(&v, &q, &x, beta, 1e-10).unwrap();
        let h = 1e-6;
        let mut fd = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut plus = q.clone();
                plus[(i, j)] += h;
                let mut minus = q.clone();
                minus[(i, j)] -= h;
                let f = |m: &Matrix| q_objective(&v, m, &x, beta, 1e-10).unwrap();
                fd[(i, j)] = (f(&plus) - f(&minus)) / (2.0 * h);
            }
        }
        prop_assert!(fd.sub(&g).unwrap().frobenius() <= 1e-5 * g.frobenius().max(1e-8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cayley_factor_is_orthogonal(d in 1usize..=10, tau in 0.0f64..50.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random(d, d, &mut r);
        let phi = a.sub(&a.transpose()).unwrap();
        let mut plus = phi.scale(0.5 * tau);
        let mut minus = phi.scale(-0.5 * tau);
        for i in 0..d {
            plus[(i, i)] += 1.0;
            minus[(i, i)] += 1.0;
        }
        let h = solve(&plus, &minus).unwrap();
        prop_assert!(orthogonality_defect(&h) <= 1e-10);
        let q = random_orthogonal(d, &mut r);
        prop_assert!(orthogonality_defect(&h.matmul(&q).unwrap()) <= 1e-10);
    }

    #[test]
    fn q_step_is_orthogonal_and_monotone(n in 4usize..=20, d in 1usize..=8, beta in 0.0f64..3.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = random(n, d, &mut r);
        let x = random(n, d, &mut r);
        let q0 = random_orthogonal(d, &mut r);
        let cfg = SolverConfig { beta, ..SolverConfig::default() };
        let out = q_step(&v, &q0, &x, &cfg).unwrap();
        prop_assert!(orthogonality_defect(&out.q) <= 1e-8);
        let before = q_objective(&v, &q0, &x, beta, cfg.eps_pi).unwrap();
        let after = q_objective(&v, &out.q, &x, beta, cfg.eps_pi).unwrap();
        prop_assert!(after <= before + 1e-12 * before.abs());
    }

    #[test]
    fn p_step_beats_perturbations(n in 4usize..=15, m in 1usize..=3, d in 1usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random(n, m, &mut r);
        let v = random(n, d, &mut r);
        let p = p_step(&a, &v).unwrap();
        let cost = |p: &Matrix| v.sub(&a.matmul(p).unwrap()).unwrap().frobenius_sq();
        let best = cost(&p);
        for _ in 0..100 {
            let mut other = p.clone();
            other.axpy(1e-3, &random(m, d, &mut r)).unwrap();
            prop_assert!(best <= cost(&other));
        }
    }

    #[test]
    fn variance_identities(n in 2usize..=30, d in 1usize..=10, seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = center_columns(&random(n, d, &mut r)).unwrap().0;
        let q = random_orthogonal(d, &mut r);
        let s = diffusion_stats(&v, &q).unwrap();
        let base = diffusion_stats(&v, &Matrix::identity(d)).unwrap();
        let sum_sigma: f64 = s.sigma.iter().sum();
        prop_assert!((s.gamma_total - n as f64 * sum_sigma).abs() <= 1e-9 * s.gamma_total);
        prop_assert!((s.gamma_total - base.gamma_total).abs() <= 1e-9 * base.gamma_total);
        prop_assert!((v.frobenius_sq() - v.matmul(&q).unwrap().frobenius_sq()).abs() <= 1e-9 * v.frobenius_sq());
        let df = d as f64;
        let sum_pi: f64 = s.pi.iter().sum();
        let identity = s.epsilon() / df - sum_pi * sum_pi / (df * df);
        prop_assert!(s.pi_variance >= 0.0);
        prop_assert!((s.pi_variance - identity).abs() <= 1e-9 * s.epsilon().max(1e-12));
        let l21 = column_l21(&v.matmul(&q).unwrap()).unwrap();
        prop_assert!((sum_pi - l21 / (n as f64).sqrt()).abs() <= 1e-9 * sum_pi.max(1e-12));
    }
}
