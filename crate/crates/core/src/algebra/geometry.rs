use super::projection::{average_multiplicity, choi};
use super::{AlgebraSpec, ProjectionKind};
use crate::error::{Error, Result};
use crate::opspace::{self, Operator, C64, HERMITIAN_TOL, ONE, ZERO};

fn check_compatible(a: &AlgebraSpec, b: &AlgebraSpec) -> Result<()> {
    if !a.same_type(b) {
        return Err(Error::Incompatible(format!(
            "block structures {:?} and {:?} differ",
            a.blocks(),
            b.blocks()
        )));
    }
    Ok(())
}

/// D(A, B) = d^{-1} ‖P_A − P_B‖_HS.
///
/// Evaluated as ‖P_A − P_B‖² = ‖(1−P_B)P_A‖² + ‖(1−P_A)P_B‖², each term a
/// sum of residuals of an orthonormal basis of one algebra after projecting
/// onto the other. No subtraction of nearly equal totals happens, so small
/// distances keep full relative precision. Symmetric bit-for-bit.
pub fn distance(a: &AlgebraSpec, b: &AlgebraSpec) -> Result<f64> {
    check_compatible(a, b)?;
    if a.frame() == b.frame() {
        return Ok(0.0);
    }
    let total = basis_residual(a, b) + basis_residual(b, a);
    Ok(total.sqrt() / a.dim() as f64)
}

/// Σ_α ‖(1 − P_B) ẽ_α‖² over the orthonormal basis ẽ_α of A, computed in
/// B's frame basis.
fn basis_residual(a: &AlgebraSpec, b: &AlgebraSpec) -> f64 {
    let d = a.dim();
    let m = b.frame().adjoint() * a.frame();
    let mut total = 0.0;
    let mut y = Operator::zeros(d, d);
    for (blk, &o) in a.blocks().iter().zip(a.offsets()) {
        let scale = C64::new(1.0 / (blk.mult as f64).sqrt(), 0.0);
        for l in 0..blk.size {
            for k in 0..blk.size {
                y.fill(ZERO);
                for c in 0..blk.mult {
                    let i = o + c * blk.size + l;
                    let j = o + c * blk.size + k;
                    y.gerc(scale, &m.column(i), &m.column(j), ONE);
                }
                let p = average_multiplicity(b, &y);
                total += (&y - p).norm_squared();
            }
        }
    }
    total
}

/// ‖ρ_A − ρ_B‖₂ on Choi states. Materializes d²×d² matrices.
pub fn distance_choi(a: &AlgebraSpec, b: &AlgebraSpec) -> Result<f64> {
    check_compatible(a, b)?;
    let ra = choi(&a.projection(ProjectionKind::OntoAlgebra))?;
    let rb = choi(&b.projection(ProjectionKind::OntoAlgebra))?;
    Ok((ra.rho - rb.rho).norm())
}

/// d^{-1}‖P_A − P_B‖_HS from dense superoperator matrices.
pub fn distance_superoperator(a: &AlgebraSpec, b: &AlgebraSpec) -> Result<f64> {
    check_compatible(a, b)?;
    let pa = a.projection(ProjectionKind::OntoAlgebra).to_superoperator()?;
    let pb = b.projection(ProjectionKind::OntoAlgebra).to_superoperator()?;
    Ok((pa - pb).norm() / a.dim() as f64)
}

impl AlgebraSpec {
    /// Metric prefactor κ with ds² = κ² ‖Q(K)‖₂² for collinear algebras:
    /// κ = 2 / sqrt(d · dim A′). Equals 2/dim A′ when dim A = dim A′.
    pub fn kappa(&self) -> f64 {
        2.0 / ((self.dim() * self.dim_commutant()) as f64).sqrt()
    }

    /// The balanced-case prefactor 2/dim A′.
    pub fn balanced_kappa(&self) -> f64 {
        2.0 / self.dim_commutant() as f64
    }
}

/// Squared line element κ² ‖Q(K)‖₂² along the generator K = −i dU U†.
///
/// Only collinear algebras are accepted; the identity fails in general
/// outside that class.
pub fn metric_element(alg: &AlgebraSpec, k: &Operator) -> Result<f64> {
    if !alg.is_collinear() {
        return Err(Error::NotCollinear);
    }
    let defect = opspace::hermiticity_defect(k);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let q = alg.projection(ProjectionKind::Complement).apply(k)?;
    Ok(alg.kappa().powi(2) * q.norm_squared())
}

/// Maximum dimension accepted by the brute-force commutant routines.
pub const BRUTEFORCE_MAX_DIM: usize = 16;

/// Orthonormal basis of {X : [X, g] = 0 for all g in `gens`} from the null
/// space of Σ_g L_g†L_g, L_g = vec ↦ vec([·, g]).
pub fn commutant_of_span(gens: &[Operator], dim: usize) -> Result<Vec<Operator>> {
    if dim > BRUTEFORCE_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "brute-force commutant limited to d ≤ {BRUTEFORCE_MAX_DIM}, got {dim}"
        )));
    }
    let big = dim * dim;
    let id = opspace::identity(dim);
    let mut gram = Operator::zeros(big, big);
    for g in gens {
        if g.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.nrows(),
            });
        }
        let gt = g.transpose();
        let gc = g.conjugate();
        let gd = g.adjoint();
        gram += (&gc * &gt).kronecker(&id);
        gram -= gc.kronecker(g);
        gram -= gt.kronecker(&gd);
        gram += id.kronecker(&(&gd * g));
    }
    let spec = opspace::eig_hermitian(&((&gram + gram.adjoint()) * C64::new(0.5, 0.0)))?;
    let scale = spec.values.last().copied().unwrap_or(1.0).max(1.0);
    Ok((0..big)
        .filter(|&i| spec.values[i] < 1e-9 * scale)
        .map(|i| unvec(&spec.vectors.column(i).into_owned(), dim))
        .collect())
}

/// Commutant of an algebra by null-space computation over its basis (d ≤ 16).
pub fn commutant_bruteforce(alg: &AlgebraSpec) -> Result<Vec<Operator>> {
    commutant_of_span(&alg.algebra_orthonormal_basis(), alg.dim())
}

fn unvec(v: &nalgebra::DVector<C64>, d: usize) -> Operator {
    Operator::from_fn(d, d, |i, j| v[j * d + i])
}

fn vec_op(x: &Operator) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(x.as_slice())
}

/// Orthogonal projector on C^{d²} onto span(`ops`) (column-major vec).
pub fn span_projector(ops: &[Operator]) -> Result<Operator> {
    let d = ops.first().map(|o| o.nrows()).unwrap_or(0);
    let big = d * d;
    let mut frame = Operator::zeros(big, big);
    for o in ops {
        let v = vec_op(o);
        frame += &v * v.adjoint();
    }
    let spec = opspace::eig_hermitian(&((&frame + frame.adjoint()) * C64::new(0.5, 0.0)))?;
    let scale = spec.values.last().copied().unwrap_or(1.0).max(1e-300);
    let mut proj = Operator::zeros(big, big);
    for (i, &val) in spec.values.iter().enumerate() {
        if val > 1e-9 * scale {
            let v = spec.vectors.column(i);
            proj += &v * v.adjoint();
        }
    }
    Ok(proj)
}

/// Normalized operator entanglement E(U) = 1 − Σ_i s_i⁴ / d² of a unitary on
/// C^{d_first} ⊗ C^{d_second}, from the operator Schmidt coefficients s_i
/// (singular values of the realigned matrix, Σ s_i² = d).
pub fn operator_entanglement(u: &Operator, d_first: usize, d_second: usize) -> Result<f64> {
    let d = d_first * d_second;
    if u.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.nrows(),
        });
    }
    let realigned = Operator::from_fn(d_first * d_first, d_second * d_second, |r, c| {
        let (a, a2) = (r / d_first, r % d_first);
        let (b, b2) = (c / d_second, c % d_second);
        u[(a * d_second + b, a2 * d_second + b2)]
    });
    let s = realigned.singular_values();
    let quartic: f64 = s.iter().map(|x| x.powi(4)).sum();
    Ok(1.0 - quartic / (d * d) as f64)
}
