use mereo::algebra::*;
use mereo::opspace::{Operator, C64};
use mereo::Error;
use mereo::opspace::{
    haar_unitary, hs_inner, identity, kron, max_abs_diff, pauli, pauli_string, random_hermitian,
    unitary_exp, Axis, RngStream, I,
};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn rng(label: &str) -> RngStream {
    RngStream::new(99, label)
}

fn random_op(d: usize, r: &mut RngStream) -> Operator {
    Operator::from_fn(d, d, |_, _| r.complex_normal())
}

/// Zoo of block structures: abelian, balanced and unbalanced factors,
/// collinear and non-collinear multi-block algebras.
fn zoo(r: &mut RngStream) -> Vec<AlgebraSpec> {
    let structures: Vec<Vec<Block>> = vec![
        vec![Block::new(1, 1); 4],
        vec![Block::new(2, 2)],
        vec![Block::new(2, 4)],
        vec![Block::new(4, 2)],
        vec![Block::new(2, 2), Block::new(2, 2)],
        vec![Block::new(1, 2), Block::new(2, 1)],
        vec![Block::new(1, 1), Block::new(2, 3)],
    ];
    structures
        .into_iter()
        .map(|b| {
            let d = b.iter().map(Block::dim).sum();
            AlgebraSpec::new(b, haar_unitary(d, r).unwrap()).unwrap()
        })
        .collect()
}

#[test]
fn dimension_counts() {
    let mut r = rng("dims");
    for alg in zoo(&mut r) {
        assert_eq!(alg.algebra_basis().len(), alg.dim_algebra());
        assert_eq!(alg.commutant_basis().len(), alg.dim_commutant());
        let d = alg.dim();
        let total: usize = alg.blocks().iter().map(Block::dim).sum();
        assert_eq!(total, d);
    }
}

#[test]
fn collinear_flag() {
    let id = |d| identity(d);
    assert!(AlgebraSpec::new(vec![Block::new(1, 1); 4], id(4)).unwrap().is_collinear());
    assert!(AlgebraSpec::new(vec![Block::new(2, 4)], id(8)).unwrap().is_collinear());
    assert!(AlgebraSpec::new(vec![Block::new(1, 2), Block::new(2, 4)], id(10)).unwrap().is_collinear());
    assert!(!AlgebraSpec::new(vec![Block::new(1, 2), Block::new(2, 1)], id(4)).unwrap().is_collinear());
}

#[test]
fn construction_errors() {
    assert!(matches!(
        AlgebraSpec::new(vec![Block::new(2, 2)], identity(3)),
        Err(Error::InvalidBlocks(_))
    ));
    let mut bad = identity(4);
    bad[(0, 0)] = C64::new(2.0, 0.0);
    assert!(matches!(AlgebraSpec::maximal_abelian(2, bad), Err(Error::NotUnitary(_))));
    assert!(AlgebraSpec::factor_bipartition(2, &[], identity(4)).is_err());
    assert!(AlgebraSpec::factor_bipartition(2, &[0, 1], identity(4)).is_err());
    assert!(AlgebraSpec::factor_bipartition(2, &[2], identity(4)).is_err());
}

#[test]
fn maximal_abelian_single_qubit() {
    let alg = AlgebraSpec::maximal_abelian(1, identity(2)).unwrap();
    let p = alg.projection(ProjectionKind::OntoAlgebra);
    assert!(max_abs_diff(&p.apply(&pauli(Axis::Z)).unwrap(), &pauli(Axis::Z)) < 1e-15);
    assert!(p.apply(&pauli(Axis::X)).unwrap().norm() < 1e-15);
    assert!(p.apply(&pauli(Axis::Y)).unwrap().norm() < 1e-15);
    assert!(max_abs_diff(&p.apply(&identity(2)).unwrap(), &identity(2)) < 1e-15);
    // self-commutant
    let pc = alg.projection(ProjectionKind::OntoCommutant);
    let x = random_op(2, &mut rng("abel1"));
    assert!(max_abs_diff(&p.apply(&x).unwrap(), &pc.apply(&x).unwrap()) < 1e-15);
}

#[test]
fn maximal_abelian_projects_to_frame_diagonal() {
    let mut r = rng("abel-diag");
    let w = haar_unitary(8, &mut r).unwrap();
    let alg = AlgebraSpec::maximal_abelian(3, w.clone()).unwrap();
    let h = random_hermitian(8, &mut r);
    // Expand in the rotated matrix units |w_i⟩⟨w_j| and keep i = j.
    let mut oracle = Operator::zeros(8, 8);
    for i in 0..8 {
        let wi = w.column(i);
        let unit = &wi * wi.adjoint();
        let coeff = hs_inner(&unit, &h).unwrap();
        oracle += unit * coeff;
    }
    let got = alg.projection(ProjectionKind::OntoAlgebra).apply(&h).unwrap();
    assert!(max_abs_diff(&got, &oracle) < 1e-13);
}

#[test]
fn factor_bipartition_conditional_expectation() {
    let alg = AlgebraSpec::factor_bipartition(2, &[0], identity(4)).unwrap();
    assert_eq!(alg.factor_dims().unwrap(), (2, 2));
    assert_eq!(alg.dim_algebra() * alg.dim_commutant(), 16);
    assert!(alg.is_collinear() && alg.center_dim() == 1);
    let p = alg.projection(ProjectionKind::OntoAlgebra);
    let paulis = [identity(2), pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z)];
    for x in &paulis {
        for y in &paulis {
            let got = p.apply(&kron(x, y)).unwrap();
            let expect = kron(&(x * (y.trace() * 0.5)), &identity(2));
            assert!(max_abs_diff(&got, &expect) < 1e-15);
        }
    }
    let xx = pauli_string(2, &[(0, Axis::X), (1, Axis::X)]).unwrap();
    let sum = alg.projection(ProjectionKind::OntoSum).apply(&xx).unwrap();
    assert!(sum.norm() < 1e-15);
}

#[test]
fn factor_bipartition_non_contiguous_sites() {
    // A = qubits {0, 2} of three; P_A(Z0 X1 Y2) = 0 and P_A(Z0 Y2) = Z0 Y2.
    let alg = AlgebraSpec::factor_bipartition(3, &[0, 2], identity(8)).unwrap();
    assert_eq!(alg.factor_dims().unwrap(), (4, 2));
    let p = alg.projection(ProjectionKind::OntoAlgebra);
    let zy = pauli_string(3, &[(0, Axis::Z), (2, Axis::Y)]).unwrap();
    let zxy = pauli_string(3, &[(0, Axis::Z), (1, Axis::X), (2, Axis::Y)]).unwrap();
    assert!(max_abs_diff(&p.apply(&zy).unwrap(), &zy) < 1e-15);
    assert!(p.apply(&zxy).unwrap().norm() < 1e-15);
    let x1 = pauli_string(3, &[(1, Axis::X)]).unwrap();
    let pc = alg.projection(ProjectionKind::OntoCommutant);
    assert!(max_abs_diff(&pc.apply(&x1).unwrap(), &x1) < 1e-15);
}

#[test]
fn embedded_elements_commute() {
    let mut r = rng("embed");
    for alg in zoo(&mut r) {
        let xs: Vec<Operator> = alg.blocks().iter().map(|b| random_op(b.size, &mut r)).collect();
        let ys: Vec<Operator> = alg.blocks().iter().map(|b| random_op(b.mult, &mut r)).collect();
        let x = alg.embed_algebra_element(&xs).unwrap();
        let y = alg.embed_commutant_element(&ys).unwrap();
        assert!((&x * &y - &y * &x).norm() < 1e-12);
        let pa = alg.projection(ProjectionKind::OntoAlgebra);
        assert!(max_abs_diff(&pa.apply(&x).unwrap(), &x) < 1e-12);
    }
}

#[test]
fn conjugation() {
    let mut r = rng("conj");
    let alg = AlgebraSpec::factor_bipartition(2, &[0], haar_unitary(4, &mut r).unwrap()).unwrap();
    let same = alg.conjugate(&identity(4)).unwrap();
    assert!(same.approx_eq(&alg));

    // A unitary generated by the commutant fixes the algebra.
    let k = alg.embed_commutant_element(&[random_hermitian(2, &mut r)]).unwrap();
    let u = unitary_exp(&(k * I)).unwrap();
    let moved = alg.conjugate(&u).unwrap();
    assert!(distance(&alg, &moved).unwrap() < 1e-12);
    let other = AlgebraSpec::factor_bipartition(2, &[0], haar_unitary(4, &mut r).unwrap()).unwrap();
    assert!((distance(&alg, &other).unwrap() - distance(&moved, &other).unwrap()).abs() < 1e-12);

    // Ad u ∘ Ad u† restores P.
    let w = haar_unitary(4, &mut r).unwrap();
    let back = alg.conjugate(&w).unwrap().conjugate(&w.adjoint()).unwrap();
    let x = random_op(4, &mut r);
    let p0 = alg.projection(ProjectionKind::OntoAlgebra).apply(&x).unwrap();
    let p1 = back.projection(ProjectionKind::OntoAlgebra).apply(&x).unwrap();
    assert!(max_abs_diff(&p0, &p1) < 1e-10);

    // P_{Ad u(A)} = Ad u ∘ P_A ∘ Ad u†.
    let moved = alg.conjugate(&w).unwrap();
    let lhs = moved.projection(ProjectionKind::OntoAlgebra).apply(&x).unwrap();
    let rhs = &w * alg.projection(ProjectionKind::OntoAlgebra).apply(&(w.adjoint() * &x * &w)).unwrap() * w.adjoint();
    assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    assert!(alg.conjugate(&identity(2)).is_err());
}

#[test]
fn projection_properties_on_zoo() {
    let mut r = rng("proj-props");
    for alg in zoo(&mut r) {
        let d = alg.dim();
        for kind in [
            ProjectionKind::OntoAlgebra,
            ProjectionKind::OntoCommutant,
            ProjectionKind::OntoSum,
            ProjectionKind::Complement,
        ] {
            let p = alg.projection(kind);
            let x = random_op(d, &mut r);
            let y = random_op(d, &mut r);
            let px = p.apply(&x).unwrap();
            // idempotent
            assert!(max_abs_diff(&p.apply(&px).unwrap(), &px) < 1e-10, "{kind:?}");
            // orthogonal
            assert!(hs_inner(&(&x - &px), &px).unwrap().norm() < 1e-10, "{kind:?}");
            // self-adjoint
            let lhs = hs_inner(&px, &y).unwrap();
            let rhs = hs_inner(&x, &p.apply(&y).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "{kind:?}");
        }
        for kind in [ProjectionKind::OntoAlgebra, ProjectionKind::OntoCommutant] {
            let p = alg.projection(kind);
            assert!(max_abs_diff(&p.apply(&identity(d)).unwrap(), &identity(d)) < 1e-12);
            let kraus = p.kraus().unwrap();
            let completeness = kraus.iter().fold(Operator::zeros(d, d), |acc, k| acc + k.adjoint() * k);
            assert!(max_abs_diff(&completeness, &identity(d)) < 1e-12);
            let x = random_op(d, &mut r);
            let kraus_sum = kraus.iter().fold(Operator::zeros(d, d), |acc, k| acc + k * &x * k.adjoint());
            assert!(max_abs_diff(&kraus_sum, &p.apply(&x).unwrap()) < 1e-12, "{kind:?}");
        }
        assert!(alg.projection(ProjectionKind::Complement).kraus().is_none());
    }
}

#[test]
fn sum_projection_identities() {
    let mut r = rng("sum");
    for alg in zoo(&mut r) {
        let d = alg.dim();
        let x = random_op(d, &mut r);
        let pa = alg.projection(ProjectionKind::OntoAlgebra);
        let pc = alg.projection(ProjectionKind::OntoCommutant);
        let via_formula = pa.apply(&x).unwrap() + pc.apply(&x).unwrap()
            - pa.apply(&pc.apply(&x).unwrap()).unwrap();
        let sum = alg.projection(ProjectionKind::OntoSum).apply(&x).unwrap();
        assert!(max_abs_diff(&via_formula, &sum) < 1e-12);
        let q = alg.projection(ProjectionKind::Complement).apply(&x).unwrap();
        assert_abs_diff_eq!(x.norm_squared(), sum.norm_squared() + q.norm_squared(), epsilon = 1e-10);

        // Gram–Schmidt oracle: explicit basis of A + A′.
        let mut basis = alg.algebra_basis();
        basis.extend(alg.commutant_basis());
        let proj = span_projector(&basis).unwrap();
        let vx = nalgebra::DVector::from_column_slice(x.as_slice());
        let projected = proj * vx;
        let oracle = Operator::from_column_slice(d, d, projected.as_slice());
        assert!(max_abs_diff(&oracle, &sum) < 1e-10);
    }
}

#[test]
fn complement_annihilates_algebra_elements() {
    let alg = AlgebraSpec::maximal_abelian(2, identity(4)).unwrap();
    let h = pauli_string(2, &[(0, Axis::Z)]).unwrap() + pauli_string(2, &[(0, Axis::Z), (1, Axis::Z)]).unwrap();
    let q = alg.projection(ProjectionKind::Complement).apply(&h).unwrap();
    assert!(q.norm() < 1e-15);
    assert!(alg.projection(ProjectionKind::OntoAlgebra).apply(&identity(2)).is_err());
}

#[test]
fn commutant_bruteforce_examples() {
    let abel = AlgebraSpec::maximal_abelian(2, haar_unitary(4, &mut rng("cb")).unwrap()).unwrap();
    let comm = commutant_bruteforce(&abel).unwrap();
    assert_eq!(comm.len(), 4);
    let a = span_projector(&abel.algebra_basis()).unwrap();
    assert!((span_projector(&comm).unwrap() - a).norm() < 1e-8);

    let fac = AlgebraSpec::factor_bipartition(2, &[0], identity(4)).unwrap();
    let comm = commutant_bruteforce(&fac).unwrap();
    assert_eq!(comm.len(), 4);
    let expect: Vec<Operator> = [Axis::X, Axis::Y, Axis::Z]
        .iter()
        .map(|&ax| kron(&identity(2), &pauli(ax)))
        .chain(std::iter::once(identity(4)))
        .collect();
    assert!((span_projector(&comm).unwrap() - span_projector(&expect).unwrap()).norm() < 1e-8);
}

#[test]
fn double_commutant_restores_algebra() {
    let mut r = rng("double");
    for alg in zoo(&mut r) {
        let comm = commutant_bruteforce(&alg).unwrap();
        assert_eq!(comm.len(), alg.dim_commutant());
        let back = commutant_of_span(&comm, alg.dim()).unwrap();
        let pa = span_projector(&alg.algebra_basis()).unwrap();
        assert!((span_projector(&back).unwrap() - pa).norm() < 1e-8, "{:?}", alg.blocks());
    }
    assert!(commutant_of_span(&[], 17).is_err());
}

#[test]
fn choi_examples() {
    let full = AlgebraSpec::new(vec![Block::new(1, 3)], identity(3)).unwrap();
    let rho = choi(&full.projection(ProjectionKind::OntoAlgebra)).unwrap();
    let phi = nalgebra::DVector::from_fn(9, |i, _| {
        if i % 4 == 0 { C64::new(1.0 / 3f64.sqrt(), 0.0) } else { ZERO_C }
    });
    assert!(max_abs_diff(&rho.rho, &(&phi * phi.adjoint())) < 1e-15);

    // Diagonal conditional expectation on one qubit: ρ = ½(|00⟩⟨00| + |11⟩⟨11|).
    let abel = AlgebraSpec::maximal_abelian(1, identity(2)).unwrap();
    let rho = choi(&abel.projection(ProjectionKind::OntoAlgebra)).unwrap();
    let mut expect = Operator::zeros(4, 4);
    expect[(0, 0)] = C64::new(0.5, 0.0);
    expect[(3, 3)] = C64::new(0.5, 0.0);
    assert!(max_abs_diff(&rho.rho, &expect) < 1e-15);
    let spec = mereo::opspace::eig_hermitian(&rho.rho).unwrap();
    assert_abs_diff_eq!(spec.values[2], 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(spec.values[3], 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(spec.values[1], 0.0, epsilon = 1e-14);

    assert!(matches!(
        choi(&abel.projection(ProjectionKind::Complement)),
        Err(Error::WrongKind { .. })
    ));
}

const ZERO_C: C64 = C64::new(0.0, 0.0);

#[test]
fn choi_state_invariants_and_purity() {
    let mut r = rng("choi-inv");
    for alg in zoo(&mut r) {
        let d = alg.dim();
        let rho = choi(&alg.projection(ProjectionKind::OntoAlgebra)).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        assert!(mereo::opspace::hermiticity_defect(&rho.rho) < 1e-14);
        assert!(rho.min_eigenvalue().unwrap() > -1e-10);
        // Purity equals Σ_J d_J²/n_J²/... in general; dim A/d² for collinear.
        let kraus_purity = {
            // Tr ρ² = d^{-2} ‖P‖²_HS = d^{-2} dim A (orthogonal projector rank).
            alg.dim_algebra() as f64 / (d * d) as f64
        };
        assert_abs_diff_eq!(rho.purity(), kraus_purity, epsilon = 1e-12);
    }
}

#[test]
fn distance_routes_agree() {
    let mut r = rng("dist-routes");
    for alg in zoo(&mut r) {
        let other = alg.conjugate(&haar_unitary(alg.dim(), &mut r).unwrap()).unwrap();
        let fast = distance(&alg, &other).unwrap();
        let via_choi = distance_choi(&alg, &other).unwrap();
        let via_superop = distance_superoperator(&alg, &other).unwrap();
        assert!((fast - via_choi).abs() < 1e-10, "{:?}", alg.blocks());
        assert!((via_superop - via_choi).abs() < 1e-10);
        assert_abs_diff_eq!(distance(&alg, &alg).unwrap(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn distance_of_rotated_abelian_qubit() {
    // Two diagonal algebras related by exp(iθσ^y/2) on one qubit.
    let base = AlgebraSpec::maximal_abelian(1, identity(2)).unwrap();
    for theta in [0.1, 0.7, 1.3] {
        let u = unitary_exp(&(pauli(Axis::Y) * C64::new(0.0, theta / 2.0))).unwrap();
        let moved = base.conjugate(&u).unwrap();
        let fast = distance(&base, &moved).unwrap();
        assert!((fast - distance_choi(&base, &moved).unwrap()).abs() < 1e-12);
        assert!((fast - distance_superoperator(&base, &moved).unwrap()).abs() < 1e-12);
        // Closed form: P_θ differs from P_0 only on span{σ^x, σ^z}; D² = sin²θ/2.
        assert_abs_diff_eq!(fast.powi(2), theta.sin().powi(2) / 2.0, epsilon = 1e-12);
    }
}

#[test]
fn distance_metric_properties() {
    let mut r = rng("dist-metric");
    for _ in 0..10 {
        let make = |r: &mut RngStream| {
            AlgebraSpec::factor_bipartition(2, &[0], haar_unitary(4, r).unwrap()).unwrap()
        };
        let (a, b, c) = (make(&mut r), make(&mut r), make(&mut r));
        let ab = distance(&a, &b).unwrap();
        assert_eq!(ab.to_bits(), distance(&b, &a).unwrap().to_bits());
        assert!(ab <= distance(&a, &c).unwrap() + distance(&c, &b).unwrap() + 1e-12);
        // Simultaneous conjugation.
        let u = haar_unitary(4, &mut r).unwrap();
        let moved = distance(&a.conjugate(&u).unwrap(), &b.conjugate(&u).unwrap()).unwrap();
        assert!((moved - ab).abs() < 1e-12);
        // Trace-norm bound.
        let ra = choi(&a.projection(ProjectionKind::OntoAlgebra)).unwrap().rho;
        let rb = choi(&b.projection(ProjectionKind::OntoAlgebra)).unwrap().rho;
        let diff = mereo::opspace::eig_hermitian(&(ra - rb)).unwrap();
        let trace_norm: f64 = diff.values.iter().map(|v| v.abs()).sum();
        assert!(ab <= trace_norm + 1e-12);
    }
    let a = AlgebraSpec::maximal_abelian(2, identity(4)).unwrap();
    let b = AlgebraSpec::factor_bipartition(2, &[0], identity(4)).unwrap();
    assert!(matches!(distance(&a, &b), Err(Error::Incompatible(_))));
}

#[test]
fn distance_matches_operator_entanglement() {
    let mut r = rng("opent");
    for (n, left) in [(2usize, vec![0usize]), (3, vec![0]), (3, vec![0, 1]), (4, vec![0, 1])] {
        let d = 1 << n;
        let a = AlgebraSpec::factor_bipartition(n, &left, identity(d)).unwrap();
        let (da, db) = a.factor_dims().unwrap();
        for _ in 0..3 {
            let u = haar_unitary(d, &mut r).unwrap();
            let b = a.conjugate(&u).unwrap();
            let rel = a.frame().adjoint() * b.frame();
            let ent = operator_entanglement(&rel, db, da).unwrap();
            let d2 = distance(&a, &b).unwrap().powi(2);
            assert!((d2 - 2.0 * ent / (db * db) as f64).abs() < 1e-12, "n={n}");
        }
    }
    // Product unitaries carry no operator entanglement.
    let p = kron(&haar_unitary(2, &mut r).unwrap(), &haar_unitary(4, &mut r).unwrap());
    assert!(operator_entanglement(&p, 2, 4).unwrap().abs() < 1e-12);
    assert!(operator_entanglement(&p, 2, 2).is_err());
}

#[test]
fn metric_element_vanishes_on_sum_space() {
    let mut r = rng("metric-zero");
    let alg = AlgebraSpec::factor_bipartition(2, &[0], haar_unitary(4, &mut r).unwrap()).unwrap();
    let a = alg.embed_algebra_element(&[random_hermitian(2, &mut r)]).unwrap();
    let c = alg.embed_commutant_element(&[random_hermitian(2, &mut r)]).unwrap();
    let k = (&a + &c + a.adjoint() + c.adjoint()) * C64::new(0.5, 0.0);
    assert!(metric_element(&alg, &k).unwrap() < 1e-24);
}

#[test]
fn metric_element_abelian_product_rotation() {
    // K = ½ Σ dθ σ^y with all dθ equal: Q(K) = K, ds² = 2^{-N} Σ dθ².
    for n in 1..=3 {
        let d = 1 << n;
        let alg = AlgebraSpec::maximal_abelian(n, identity(d)).unwrap();
        let dtheta = 0.3;
        let k = (0..n).fold(Operator::zeros(d, d), |acc, i| {
            acc + pauli_string(n, &[(i, Axis::Y)]).unwrap() * C64::new(0.5 * dtheta, 0.0)
        });
        let q = alg.projection(ProjectionKind::Complement).apply(&k).unwrap();
        assert!(max_abs_diff(&q, &k) < 1e-15);
        let ds2 = metric_element(&alg, &k).unwrap();
        assert_abs_diff_eq!(ds2, (n as f64) * dtheta * dtheta / d as f64, epsilon = 1e-14);
        assert_abs_diff_eq!(alg.kappa(), alg.balanced_kappa(), epsilon = 1e-15);
    }
}

fn fd_metric(alg: &AlgebraSpec, k: &Operator, eps: f64) -> f64 {
    let u = unitary_exp(&(k * C64::new(0.0, eps))).unwrap();
    distance(alg, &alg.conjugate(&u).unwrap()).unwrap().powi(2) / (eps * eps)
}

#[test]
fn metric_element_matches_finite_difference() {
    let mut r = rng("metric-fd");
    for alg in zoo(&mut r).into_iter().filter(|a| a.is_collinear()) {
        let k = random_hermitian(alg.dim(), &mut r);
        let exact = metric_element(&alg, &k).unwrap();
        // Richardson extrapolation of the O(ε²) error.
        let (e1, e2) = (fd_metric(&alg, &k, 2e-3), fd_metric(&alg, &k, 1e-3));
        let fd = (4.0 * e2 - e1) / 3.0;
        assert!(((fd - exact) / exact).abs() < 1e-5, "{:?}: {fd} vs {exact}", alg.blocks());
    }
}

#[test]
fn metric_element_refuses_non_collinear() {
    let alg = AlgebraSpec::new(vec![Block::new(1, 2), Block::new(2, 1)], identity(4)).unwrap();
    assert!(matches!(metric_element(&alg, &identity(4)), Err(Error::NotCollinear)));
    let fac = AlgebraSpec::factor_bipartition(2, &[0], identity(4)).unwrap();
    let mut k = identity(4);
    k[(0, 1)] = C64::new(1.0, 0.0);
    assert!(matches!(metric_element(&fac, &k), Err(Error::NotHermitian(_))));
}

#[test]
fn json_schema_roundtrip() {
    let alg = AlgebraSpec::factor_bipartition(2, &[1], haar_unitary(4, &mut rng("json")).unwrap()).unwrap();
    let text = serde_json::to_string(&alg).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["dim"], 4);
    assert_eq!(v["blocks"], serde_json::json!([[2, 2]]));
    assert_eq!(v["frame"].as_array().unwrap().len(), 32);
    let back: AlgebraSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back.frame(), alg.frame());
    assert_eq!(back.blocks(), alg.blocks());

    let bad = r#"{"dim":2,"blocks":[[1,1],[1,1]],"frame":[1,0,0,0,0,0,1,0],"extra":1}"#;
    assert!(serde_json::from_str::<AlgebraSpec>(bad).is_err());
    let nonunitary = r#"{"dim":2,"blocks":[[1,1],[1,1]],"frame":[2,0,0,0,0,0,1,0]}"#;
    assert!(serde_json::from_str::<AlgebraSpec>(nonunitary).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn conjugation_covariance_of_projection(seed in 0u64..10_000) {
        let mut r = RngStream::new(seed, "prop-conj");
        let alg = AlgebraSpec::new(vec![Block::new(1, 2), Block::new(2, 1)], haar_unitary(4, &mut r).unwrap()).unwrap();
        let u = haar_unitary(4, &mut r).unwrap();
        let x = random_op(4, &mut r);
        let lhs = alg.conjugate(&u).unwrap().projection(ProjectionKind::Complement).apply(&x).unwrap();
        let rhs = &u * alg.projection(ProjectionKind::Complement).apply(&(u.adjoint() * &x * &u)).unwrap() * u.adjoint();
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }
}
