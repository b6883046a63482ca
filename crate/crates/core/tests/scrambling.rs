use mereo::scrambling::*;
use mereo::algebra::AlgebraSpec;
use mereo::opspace::Operator;
use mereo::Error;
use mereo::exec::Exec;
use mereo::models::{build_tfim, HamiltonianModel, TfimParams};
use mereo::opspace::{C64, haar_unitary, identity, kron, pauli, random_hermitian, Axis, RngStream};
use approx::assert_abs_diff_eq;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng(label: &str) -> RngStream {
    RngStream::new(2024, label)
}

/// Random Hermitian with spectral norm 1.
fn unit_norm_model(d: usize, r: &mut RngStream) -> HamiltonianModel {
    let h = random_hermitian(d, r);
    let m = HamiltonianModel::custom(h.clone()).unwrap();
    HamiltonianModel::custom(h * real(1.0 / m.norm())).unwrap()
}

fn bipartition(n: usize, left: &[usize], r: &mut RngStream) -> AlgebraSpec {
    AlgebraSpec::factor_bipartition(n, left, haar_unitary(1 << n, r).unwrap()).unwrap()
}

#[test]
fn sigma_s_examples() {
    let mut r = rng("sigma-s");
    let w = haar_unitary(4, &mut r).unwrap();
    let alg = AlgebraSpec::maximal_abelian(2, w.clone()).unwrap();
    let diag = Operator::from_diagonal(&nalgebra::DVector::from_vec(
        [0.3, -1.0, 2.0, 0.5].map(real).to_vec(),
    ));
    assert!(sigma_s(&alg, &(&w * diag * w.adjoint())).unwrap() < 1e-14);

    let one = AlgebraSpec::maximal_abelian(1, identity(2)).unwrap();
    assert_abs_diff_eq!(sigma_s(&one, &pauli(Axis::X)).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
    assert!(matches!(sigma_s(&one, &(pauli(Axis::X) * I)), Err(Error::NotHermitian(_))));
    assert!(sigma_s(&one, &identity(4)).is_err());
}

use mereo::opspace::I;

#[test]
fn otoc_vanishes_at_t0_and_for_h_in_algebra() {
    let mut r = rng("otoc-zero");
    let alg = bipartition(2, &[0], &mut r);
    let m = unit_norm_model(4, &mut r);
    let est = otoc_mc(&alg, &m, 0.0, 64, &r.substream("t0"), Exec::Sequential).unwrap();
    assert!(est.mean < 1e-28, "{}", est.mean);

    let h_a = alg.embed_algebra_element(&[random_hermitian(2, &mut r)]).unwrap();
    let m = HamiltonianModel::custom(h_a).unwrap();
    let curve = otoc_curve(&alg, &m, &[0.5, 3.0, 40.0], 64, &r.substream("ha"), Exec::Sequential).unwrap();
    for e in curve {
        assert!(e.mean < 1e-26, "t={} mean={}", e.t, e.mean);
    }
}

#[test]
fn otoc_bounds_and_error_scaling() {
    let mut r = rng("otoc-bounds");
    let alg = bipartition(3, &[0], &mut r);
    let m = unit_norm_model(8, &mut r);
    let small = otoc_mc(&alg, &m, 2.0, 256, &r.substream("s"), Exec::Parallel).unwrap();
    let large = otoc_mc(&alg, &m, 2.0, 1024, &r.substream("l"), Exec::Parallel).unwrap();
    for e in [&small, &large] {
        assert!(e.mean >= -3.0 * e.std_error && e.mean <= 2.0 + 3.0 * e.std_error);
    }
    let ratio = small.std_error / large.std_error;
    assert!((ratio - 2.0).abs() < 0.6, "stderr ratio {ratio}");
}

#[test]
fn otoc_is_deterministic_and_schedule_independent() {
    let mut r = rng("otoc-det");
    let alg = bipartition(2, &[1], &mut r);
    let m = unit_norm_model(4, &mut r);
    let s = r.substream("draws");
    let a = otoc_mc(&alg, &m, 1.3, 100, &s, Exec::Sequential).unwrap();
    let b = otoc_mc(&alg, &m, 1.3, 100, &s, Exec::Parallel).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert!(otoc_mc(&alg, &m, 1.0, 0, &s, Exec::Sequential).is_err());
}

#[test]
fn short_time_coefficient_matches_sigma_s() {
    let mut r = rng("short-time");
    for trial in 0..3 {
        let alg = bipartition(3, &[trial % 3], &mut r);
        let m = unit_norm_model(8, &mut r);
        let fit = short_time_fit(&alg, &m, 512, &r.indexed(trial), Exec::Parallel).unwrap();
        assert!(fit.z_score() < 3.0, "trial {trial}: {fit:?}");
    }
}

#[test]
fn gram_product_and_bell_eigenbases() {
    let alg = AlgebraSpec::factor_bipartition(2, &[0], identity(4)).unwrap();
    let diag = HamiltonianModel::custom(Operator::from_diagonal(&nalgebra::DVector::from_vec(
        [0.1, 0.5, -0.7, 1.3].map(real).to_vec(),
    )))
    .unwrap();
    let g = gram_matrices(&alg, &diag, &identity(4)).unwrap();
    for side in [Side::Algebra, Side::Commutant] {
        for p in g.purities(side) {
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-14);
        }
    }
    // R1 diagonal = purity / dim of the other side.
    assert_abs_diff_eq!(g.r1(Side::Algebra)[(0, 0)], 0.5, epsilon = 1e-14);

    // Eigenstates of σ^xσ^x + ½σ^zσ^z are the Bell states.
    let xx = kron(&pauli(Axis::X), &pauli(Axis::X));
    let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z));
    let bell = HamiltonianModel::custom(xx + zz * real(0.5)).unwrap();
    let g = gram_matrices(&alg, &bell, &identity(4)).unwrap();
    for side in [Side::Algebra, Side::Commutant] {
        for p in g.purities(side) {
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-14);
        }
    }
    let abelian = AlgebraSpec::maximal_abelian(2, identity(4)).unwrap();
    assert!(matches!(gram_matrices(&abelian, &bell, &identity(4)), Err(Error::NotFactor(_))));
}

#[test]
fn gram_matrices_symmetric_psd() {
    let mut r = rng("gram-psd");
    let alg = bipartition(4, &[0, 1], &mut r);
    let m = unit_norm_model(16, &mut r);
    let v = haar_unitary(16, &mut r).unwrap();
    let g = gram_matrices(&alg, &m, &v).unwrap();
    for side in [Side::Algebra, Side::Commutant] {
        let r1 = g.r1(side);
        assert!((&r1 - r1.transpose()).amax() < 1e-15);
        let ev = r1.clone().symmetric_eigen().eigenvalues;
        assert!(ev.min() > -1e-10);
        for p in g.purities(side) {
            assert!(p > 0.0 && p <= 1.0 + 1e-12);
        }
    }
    // Bipartite identity: dim_A · R0^{A′} = dim_B · ... both are Gram matrices of ρ^A.
    let lhs = g.r0(Side::Commutant) * g.dim_a as f64;
    let rhs = g.r1(Side::Algebra) * g.dim_b as f64;
    assert!((lhs - rhs).amax() < 1e-14);
}

#[test]
fn gram_invariant_under_eigenvector_phases() {
    let mut r = rng("gram-phase");
    let alg = bipartition(3, &[0], &mut r);
    let m = unit_norm_model(8, &mut r);
    let phases = Operator::from_diagonal(&nalgebra::DVector::from_fn(8, |_, _| {
        C64::from_polar(1.0, r.uniform(0.0, 6.28))
    }));
    // Re-phasing the eigenvectors equals V → V·(V_e Φ V_e†).
    let ve = &m.spectrum().vectors;
    let rephase = ve * phases * ve.adjoint();
    let a = gram_matrices(&alg, &m, &identity(8)).unwrap();
    let b = gram_matrices(&alg, &m, &rephase).unwrap();
    assert!((&a.gram_a - &b.gram_a).amax() < 1e-14);
    assert!((&a.gram_b - &b.gram_b).amax() < 1e-14);
}

#[test]
fn nrc_fast_route_matches_projection_route() {
    let mut r = rng("nrc-general");
    for (n, left) in [(2usize, vec![0usize]), (3, vec![1]), (3, vec![0, 2])] {
        let alg = bipartition(n, &left, &mut r);
        let m = unit_norm_model(1 << n, &mut r);
        let v = haar_unitary(1 << n, &mut r).unwrap();
        let fast = sigma_l_nrc(&alg, &m, &v).unwrap().value;
        let general = sigma_l_nrc_general(&alg, &m, &v).unwrap();
        assert!((fast - general).abs() < 1e-12, "{fast} vs {general}");
        assert!((0.0..=1.0).contains(&fast));
        let [r0_a, r1_a, r0_c, r1_c] = r_matrices_general(&alg, &m, &v).unwrap();
        let g = gram_matrices(&alg, &m, &v).unwrap();
        for (got, want) in [
            (r0_a, g.r0(Side::Algebra)),
            (r1_a, g.r1(Side::Algebra)),
            (r0_c, g.r0(Side::Commutant)),
            (r1_c, g.r1(Side::Commutant)),
        ] {
            assert!((got - want).amax() < 1e-13);
        }
    }
}

#[test]
fn nrc_product_eigenbasis_value() {
    // Product eigenstates |a⟩|b⟩: G^A_kl = δ(a_k, a_l) and G^B_kl = δ(b_k, b_l).
    for (n, left) in [(2usize, vec![0usize]), (3, vec![0]), (3, vec![0, 1])] {
        let d = 1 << n;
        let alg = AlgebraSpec::factor_bipartition(n, &left, identity(d)).unwrap();
        let diag: Vec<C64> = (0..d).map(|i| real((i as f64 * 0.37).sin() + i as f64)).collect();
        let m = HamiltonianModel::custom(Operator::from_diagonal(&nalgebra::DVector::from_vec(diag))).unwrap();
        let oracle = sigma_l_nrc_general(&alg, &m, &identity(d)).unwrap();
        let (da, db) = alg.factor_dims().unwrap();
        let counted = 1.0 - (da + db - 1) as f64 / d as f64;
        assert_abs_diff_eq!(oracle, counted, epsilon = 1e-13);
        assert_abs_diff_eq!(sigma_l_nrc(&alg, &m, &identity(d)).unwrap().value, counted, epsilon = 1e-13);
    }
}

#[test]
fn nrc_matches_time_average_d4() {
    let mut r = rng("nrc-time");
    let alg = bipartition(2, &[0], &mut r);
    let m = unit_norm_model(4, &mut r);
    let nrc = sigma_l_nrc(&alg, &m, &identity(4)).unwrap();
    assert!(nrc.resonances.is_generic());
    let avg = otoc_time_average(&alg, &m, 1e3, 2000, 8192, &r.substream("avg"), Exec::Parallel).unwrap();
    assert!((nrc.value - avg.mean).abs() <= avg.std_error + 5e-3, "{} vs {avg:?}", nrc.value);
}

#[test]
fn closed_form_trapezoid_matches_pointwise_sum() {
    let mut r = rng("trapezoid");
    for (n, left, horizon, points) in [(2usize, vec![0usize], 40.0, 80usize), (3, vec![1], 25.0, 60), (3, vec![0, 2], 7.0, 3)] {
        let d = 1 << n;
        let alg = bipartition(n, &left, &mut r);
        let m = unit_norm_model(d, &mut r);
        let s = r.substream("draws");
        let times: Vec<f64> = (0..=points).map(|j| horizon * j as f64 / points as f64).collect();
        let curve = otoc_curve(&alg, &m, &times, 64, &s, Exec::Sequential).unwrap();
        let inner: f64 = curve[1..points].iter().map(|c| c.mean).sum();
        let pointwise = (inner + 0.5 * (curve[0].mean + curve[points].mean)) / points as f64;
        let avg = otoc_time_average(&alg, &m, horizon, points, 64, &s, Exec::Sequential).unwrap();
        assert_abs_diff_eq!(avg.mean, pointwise, epsilon = 1e-12);
    }
}

#[test]
fn covariance_under_simultaneous_rotation() {
    let mut r = rng("covariance");
    for _ in 0..5 {
        let alg = bipartition(3, &[0], &mut r);
        let m = unit_norm_model(8, &mut r);
        let u = haar_unitary(8, &mut r).unwrap();
        let moved = alg.conjugate(&u).unwrap();
        let pulled = m.conjugated(&u.adjoint()).unwrap();
        let a = sigma_s(&moved, m.operator()).unwrap();
        let b = sigma_s(&alg, pulled.operator()).unwrap();
        assert!((a - b).abs() < 1e-10);
        let la = sigma_l_nrc(&moved, &m, &identity(8)).unwrap().value;
        let lb = sigma_l_nrc(&alg, &pulled, &identity(8)).unwrap().value;
        let lc = sigma_l_nrc(&alg, &m, &u.adjoint()).unwrap().value;
        assert!((la - lb).abs() < 1e-10 && (la - lc).abs() < 1e-10);
    }
}

#[test]
fn resonance_diagnostics() {
    let mut r = rng("resonance");
    let generic = unit_norm_model(8, &mut r);
    assert!(resonance_check(&generic, 1e-8).is_generic());

    let tfim = build_tfim(&TfimParams::clean(4, 1.05, 0.0)).unwrap();
    let rep = resonance_check(&tfim, 1e-8);
    assert!(rep.resonances > 0);
    assert!(!rep.worst.is_empty() && rep.worst.len() <= 10);
    assert!(rep.worst.windows(2).all(|w| w[0].delta <= w[1].delta));

    let d = 6;
    let ladder = HamiltonianModel::custom(Operator::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| {
        real(i as f64)
    })))
    .unwrap();
    let rep = resonance_check(&ladder, 1e-8);
    // Gap g occurs d − g times; every pair of equal gaps is a resonance.
    let expect: usize = (1..d).map(|g| (d - g) * (d - g - 1) / 2).sum();
    assert_eq!(rep.resonances, expect);
    assert_eq!(rep.n_gaps, d * (d - 1) / 2);
    assert_eq!(rep.degeneracies, 0);

    let degenerate = build_tfim(&TfimParams::clean(2, 0.0, 0.0)).unwrap();
    assert_eq!(resonance_check(&degenerate, 1e-8).degeneracies, 2);
}

#[test]
fn antithetic_partner_has_equal_value() {
    let mut r = rng("antithetic");
    let alg = bipartition(3, &[0], &mut r);
    let m = unit_norm_model(8, &mut r);
    let xs = [haar_unitary(2, &mut r).unwrap()];
    let ys = [haar_unitary(4, &mut r).unwrap()];
    let x = alg.embed_algebra_element(&xs).unwrap();
    let y = alg.embed_commutant_element(&ys).unwrap();
    let u = m.spectrum().apply_fn(|e| C64::from_polar(1.0, -0.7 * e));
    let z = &u * y * u.adjoint();
    let g = |x: &Operator| mereo::opspace::commutator(x, &z).norm_squared();
    assert!((g(&x) - g(&x.adjoint())).abs() < 1e-12);
}
