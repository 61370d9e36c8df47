use langevin_gauss::linalg::{mat_exp, solve_lyapunov_kron, solve_lyapunov_quadrature, sym_eigen, Matrix};
use langevin_gauss::model::{builtin, gibbs_for_problem, gibbs_from_potential, GridSpec};
use langevin_gauss::sde::{ou_exact_sample, ou_marginal, NoiseStream};
use langevin_gauss::stats::mean_se;
use langevin_gauss::transport::{
    exp_moment_estimate, w2_empirical_vs_gaussian, w2_gaussian_closed_form, GaussianMeasure, PointCloud,
};

fn random_instance(s: &mut NoiseStream, n: usize) -> (Matrix, Matrix) {
    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * s.normal();
            b[(i, j)] = s.normal();
        }
    }
    let lo = sym_eigen(&a.symmetric_part()).unwrap().min();
    for i in 0..n {
        a[(i, i)] += 0.3 - lo.min(0.0);
    }
    let q = &(&b * &b.transpose()) + &Matrix::identity(n).scale(0.05);
    (a, q)
}

#[test]
fn lyapunov_routes_agree_on_random_3x3() {
    let mut s = NoiseStream::new(31, 0);
    for k in 0..50 {
        let (a, q) = random_instance(&mut s, 3);
        let kron = solve_lyapunov_kron(&a, &q).unwrap();
        let quad = solve_lyapunov_quadrature(&a, &q, 1e-12).unwrap();
        let gap = (&kron.sigma_inf - &quad.sigma_inf).max_abs();
        assert!(gap <= 1e-7, "instance {k}: gap {gap:e}");
        // residual of A S + S A^T = Q
        let r = &(&(&a * &kron.sigma_inf) + &(&kron.sigma_inf * &a.transpose())) - &q;
        assert!(r.fro_norm() <= 1e-10 * q.fro_norm().max(1.0));
        assert!(sym_eigen(&kron.sigma_inf).unwrap().min() > 0.0);
    }
}

#[test]
fn expm_matches_eigen_route_on_symmetric_matrices() {
    let mut s = NoiseStream::new(5, 0);
    for _ in 0..20 {
        let mut m = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..=i {
                let v = s.normal();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let direct = mat_exp(&m, 0.7).unwrap();
        let eig = sym_eigen(&m).unwrap().reconstruct_with(|l| (0.7 * l).exp());
        assert!((&direct - &eig).max_abs() <= 1e-11 * eig.max_abs().max(1.0));
    }
}

#[test]
fn gaussian_closed_form_against_samples() {
    let a = GaussianMeasure::centered(Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.5]]).unwrap()).unwrap();
    let b = GaussianMeasure::new(vec![0.4, -0.2], Matrix::from_diag(&[0.8, 0.9])).unwrap();
    let exact = w2_gaussian_closed_form(&a, &b).unwrap();
    let cloud = b.sample(400, 3).unwrap();
    let est = w2_empirical_vs_gaussian(&cloud_snapshot(cloud), &a, 9).unwrap();
    assert!(
        (est.value - exact).abs() <= 4.0 * est.resample_sd + 0.05,
        "{} vs {exact}",
        est.value
    );
}

fn cloud_snapshot(samples: PointCloud) -> langevin_gauss::EnsembleSnapshot {
    let n = samples.n();
    langevin_gauss::EnsembleSnapshot {
        time: 0.0,
        samples,
        path_ids: (0..n as u64).collect(),
        problem: "sampled".into(),
        epsilon: 1.0,
        blown_up: 0,
    }
}

#[test]
fn mgf_quadrature_oracle() {
    // N(0, v) as the Gibbs law of V(x) = x^2 / 2 at temperature 2 v
    let v = 0.5;
    let table = gibbs_from_potential(|x| Ok(0.5 * x * x), 2.0 * v, GridSpec::new(-12.0, 12.0, 20_000)).unwrap();
    let g = GaussianMeasure::centered(Matrix::scalar(v)).unwrap();
    let cloud = g.sample(100_000, 17).unwrap();
    for lambda in [0.1, 0.25, 0.5] {
        let exact = (1.0 - 2.0 * lambda * v).powf(-0.5);
        let quad = table.expect(|x| (lambda * x * x).exp());
        assert!((quad - exact).abs() <= 1e-8, "quadrature {quad} vs {exact}");
        let mc = exp_moment_estimate(&cloud, lambda);
        assert!((mc.mean - exact).abs() <= 4.0 * mc.se, "lambda {lambda}: {} +- {} vs {exact}", mc.mean, mc.se);
    }
}

#[test]
fn gibbs_oracle_of_linear_problem_is_gaussian() {
    let spec = builtin("linear1d", &[]).unwrap();
    for eps in [0.4, 0.1, 0.025] {
        let t = gibbs_for_problem(&spec, eps, None).unwrap();
        assert!((t.total_mass() - 1.0).abs() < 1e-10);
        assert!((t.variance() - eps / 2.0).abs() < 1e-10 * eps);
        assert!(t.wasserstein_rescaled_to_gaussian(2.0, eps, 0.5).unwrap() < 1e-6);
    }
}

#[test]
fn ou_exact_draws_match_marginal() {
    let a = Matrix::from_rows(&[vec![1.0, -2.0], vec![2.0, 1.0]]).unwrap();
    let s = Matrix::identity(2);
    let x0 = [1.0, -1.0];
    let g = ou_marginal(&a, &s, 0.3, 0.8, &x0).unwrap();
    let snap = ou_exact_sample(&a, &s, 0.3, 0.8, &x0, 50_000, 4).unwrap();
    for k in 0..2 {
        let xs: Vec<f64> = snap.samples.points().map(|p| p[k]).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - g.mean[k]).abs() <= 4.0 * se);
    }
    // long-time marginal is N(0, eps Sigma)
    let far = ou_marginal(&a, &s, 0.3, 40.0, &x0).unwrap();
    let sig = solve_lyapunov_kron(&a, &(&s * &s.transpose())).unwrap().sigma_inf.scale(0.3);
    let limit = GaussianMeasure::centered(sig).unwrap();
    assert!(w2_gaussian_closed_form(&far, &limit).unwrap() < 1e-10);
}
