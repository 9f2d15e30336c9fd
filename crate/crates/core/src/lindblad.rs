//! Liouvillian superoperator, steady state and time propagation.
//!
//! Density matrices are vectorized by column stacking, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ladder::{check_square, hermiticity_deviation, ComplexMatrix};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-9;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;
pub const NULL_SPACE_TOL: f64 = 1e-9;

/// Hermitian, unit-trace, positive-semidefinite state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates the density-matrix invariants. Nothing is clamped.
    pub fn try_new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch {
                expected: m.nrows(),
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let herm = hermiticity_deviation(&m);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr - Complex64::from(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let min_eig = min_eigenvalue(&m);
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self(m))
    }

    /// Pure state |k⟩⟨k|.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::from(1.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.0[(k, k)].re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }

    /// Tr[op ρ].
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        expectation(op, &self.0)
    }
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::from(0.5);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Tr[A B] without forming the product.
pub fn expectation(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::from(0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn vectorize(m: &ComplexMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<Complex64>, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// A ρ A† − ½(A†A ρ + ρ A†A).
pub fn dissipator_apply(a: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(a, a.nrows())?;
    check_square(rho, a.nrows())?;
    let ad = a.adjoint();
    let ada = &ad * a;
    let anti = &ada * rho + rho * &ada;
    Ok(a * rho * ad - anti * Complex64::from(0.5))
}

/// Matrix representation of a Liouvillian acting on column-stacked density
/// matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: DMatrix<Complex64>,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Applies the superoperator to an arbitrary (not necessarily physical) matrix.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_square(x, self.dim)?;
        Ok(unvectorize(&(&self.matrix * vectorize(x)), self.dim))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// ‖L vec(ρ)‖.
    pub fn residual(&self, rho: &ComplexMatrix) -> f64 {
        (&self.matrix * vectorize(rho)).norm()
    }

    /// Spectrum of the superoperator, from the diagonal of its complex Schur
    /// form (L need not be diagonalizable).
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let schur = Schur::try_new(self.matrix.clone(), f64::EPSILON, 100_000)
            .ok_or(Error::NoConvergence("Schur iteration"))?;
        let (_, t) = schur.unpack();
        Ok(t.diagonal().iter().copied().collect())
    }
}

/// Builds ρ ↦ −i[H,ρ] + Σ rateᵢ 𝒟[Aᵢ, ρ].
pub fn liouvillian_matrix(
    h: &ComplexMatrix,
    collapse: &[(f64, ComplexMatrix)],
) -> Result<Superoperator> {
    let d = h.nrows();
    check_square(h, d)?;
    let id = ComplexMatrix::identity(d, d);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * minus_i;
    for (rate, a) in collapse {
        if !rate.is_finite() || *rate < 0.0 {
            return Err(Error::InvalidRate(*rate));
        }
        check_square(a, d)?;
        let ada = a.adjoint() * a;
        let term = a.conjugate().kronecker(a)
            - (id.kronecker(&ada) + ada.transpose().kronecker(&id)) * Complex64::from(0.5);
        l += term * Complex64::from(*rate);
    }
    Ok(Superoperator { dim: d, matrix: l })
}

/// Null vector of L: right-singular vector of the smallest singular value,
/// Hermitized and trace-normalized.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let svd = SVD::new(l.matrix.clone(), false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap());
    let sigma_max = sv[order[sv.len() - 1]];
    let tolerance = NULL_SPACE_TOL * sigma_max;
    if sv.len() > 1 && sv[order[1]] <= tolerance {
        return Err(Error::NonUniqueSteadyState {
            second: sv[order[1]],
            tolerance,
        });
    }
    let null: DVector<Complex64> = v_t.row(order[0]).adjoint();
    let mut rho = unvectorize(&null, l.dim);
    rho = (&rho + rho.adjoint()) * Complex64::from(0.5);
    let tr = rho.trace();
    rho /= tr;
    let residual = l.residual(&rho);
    if residual > STEADY_RESIDUAL_TOL * l.frobenius_norm() {
        return Err(Error::StaleState { residual });
    }
    DensityMatrix::try_new(rho)
}

/// exp(L t) as a dense matrix.
pub fn propagator(l: &Superoperator, t: f64) -> Result<DMatrix<Complex64>> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidTime(t));
    }
    Ok((&l.matrix * Complex64::from(t)).exp())
}

/// unvec(exp(L t) vec(X)) for any operator X.
pub fn evolve_operator(l: &Superoperator, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_square(x, l.dim)?;
    let p = propagator(l, t)?;
    Ok(unvectorize(&(p * vectorize(x)), l.dim))
}

pub fn propagate(l: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    DensityMatrix::try_new(evolve_operator(l, rho0.matrix(), t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{hamiltonian, lowering_operator, LadderParams};
    use crate::units::mhz_to_angular;

    fn paper_params(n: usize, omega_mhz: f64, delta_mhz: f64) -> LadderParams {
        LadderParams::new(
            n,
            mhz_to_angular(-233.0),
            mhz_to_angular(delta_mhz),
            mhz_to_angular(omega_mhz),
            mhz_to_angular(2.5),
        )
        .unwrap()
    }

    fn build(p: &LadderParams) -> Superoperator {
        let h = hamiltonian(p).unwrap();
        liouvillian_matrix(&h, &[(p.gamma, lowering_operator(p.n_levels).unwrap())]).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn dissipator_two_level_decay() {
        let a = lowering_operator(2).unwrap();
        let rho = DensityMatrix::basis(2, 1).into_inner();
        let out = dissipator_apply(&a, &rho).unwrap();
        let g = DensityMatrix::basis(2, 0).into_inner();
        assert!(close(&out, &(g - rho), 1e-15));
    }

    #[test]
    fn dissipator_three_level_f_decay() {
        let a = lowering_operator(3).unwrap();
        let f = DensityMatrix::basis(3, 2).into_inner();
        let e = DensityMatrix::basis(3, 1).into_inner();
        let out = dissipator_apply(&a, &f).unwrap();
        let expected = (e - &f) * Complex64::from(2.0);
        assert!(close(&out, &expected, 1e-14));
    }

    #[test]
    fn dissipator_linear_and_traceless() {
        let a = lowering_operator(4).unwrap();
        let zero = ComplexMatrix::zeros(4, 4);
        assert!(close(&dissipator_apply(&a, &zero).unwrap(), &zero, 0.0));
        let rho =
            ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new(i as f64 + 0.3, j as f64 - 1.0));
        assert!(dissipator_apply(&a, &rho).unwrap().trace().norm() < 1e-12 * rho.norm());
    }

    #[test]
    fn dissipator_shape_error() {
        let a = lowering_operator(3).unwrap();
        let rho = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            dissipator_apply(&a, &rho),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn empty_liouvillian_is_zero() {
        let l = liouvillian_matrix(&ComplexMatrix::zeros(3, 3), &[]).unwrap();
        assert!(l.matrix().iter().all(|z| *z == Complex64::from(0.0)));
    }

    #[test]
    fn negative_rate_rejected() {
        let b = lowering_operator(2).unwrap();
        assert!(matches!(
            liouvillian_matrix(&ComplexMatrix::zeros(2, 2), &[(-1.0, b)]),
            Err(Error::InvalidRate(_))
        ));
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let gamma = 3.0;
        let l = liouvillian_matrix(
            &ComplexMatrix::zeros(2, 2),
            &[(gamma, lowering_operator(2).unwrap())],
        )
        .unwrap();
        let mut re: Vec<f64> = l.eigenvalues().unwrap().iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-gamma, -gamma / 2.0, -gamma / 2.0, 0.0];
        for (a, b) in re.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{re:?}");
        }
    }

    #[test]
    fn superoperator_matches_direct_action() {
        let p = paper_params(3, 40.0, 3.0);
        let l = build(&p);
        let h = hamiltonian(&p).unwrap();
        let b = lowering_operator(3).unwrap();
        let x = ComplexMatrix::from_fn(3, 3, |i, j| {
            Complex64::new(0.1 * i as f64, 0.2 * j as f64 - 0.1)
        });
        let comm = (&h * &x - &x * &h) * Complex64::new(0.0, -1.0);
        let direct = comm + dissipator_apply(&b, &x).unwrap() * Complex64::from(p.gamma);
        let via = l.apply(&x).unwrap();
        assert!(close(&via, &direct, 1e-12 * l.frobenius_norm()));
        assert!(via.trace().norm() < 1e-10 * x.norm() * l.frobenius_norm());
    }

    #[test]
    fn undriven_steady_state_is_ground() {
        for n in 2..=4 {
            let l = build(&paper_params(n, 0.0, 0.0));
            let rho = steady_state(&l).unwrap();
            assert!(close(
                rho.matrix(),
                DensityMatrix::basis(n, 0).matrix(),
                1e-10
            ));
        }
    }

    #[test]
    fn saturated_two_level_emitter() {
        // resonant g–e drive: δ = −α/2
        let p = paper_params(2, 500.0, 116.5);
        let rho = steady_state(&build(&p)).unwrap();
        let pops = rho.populations();
        assert!(
            (pops[0] - 0.5).abs() < 1e-4 && (pops[1] - 0.5).abs() < 1e-4,
            "{pops:?}"
        );
    }

    #[test]
    fn steady_state_residual_and_invariants() {
        let l = build(&paper_params(4, 60.0, -2.0));
        let rho = steady_state(&l).unwrap();
        assert!(l.residual(rho.matrix()) <= STEADY_RESIDUAL_TOL * l.frobenius_norm());
        assert!(rho.min_eigenvalue() >= POSITIVITY_TOL);
    }

    #[test]
    fn degenerate_null_space_reported() {
        let l = liouvillian_matrix(&ComplexMatrix::zeros(2, 2), &[]).unwrap();
        assert!(matches!(
            steady_state(&l),
            Err(Error::NonUniqueSteadyState { .. })
        ));
    }

    #[test]
    fn zero_time_is_identity() {
        let l = build(&paper_params(3, 40.0, 0.0));
        let rho0 = DensityMatrix::basis(3, 2);
        let out = propagate(&l, &rho0, 0.0).unwrap();
        assert!(close(out.matrix(), rho0.matrix(), 1e-15));
    }

    #[test]
    fn negative_time_rejected() {
        let l = build(&paper_params(3, 40.0, 0.0));
        assert!(matches!(
            propagate(&l, &DensityMatrix::basis(3, 0), -1e-9),
            Err(Error::InvalidTime(_))
        ));
    }

    #[test]
    fn exponential_decay_law() {
        let p = paper_params(2, 0.0, 0.0);
        let l = build(&p);
        for k in [0.1, 0.5, 1.0, 3.0, 7.0] {
            let t = k / p.gamma;
            let rho = propagate(&l, &DensityMatrix::basis(2, 1), t).unwrap();
            assert!((rho.populations()[1] - (-p.gamma * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn long_time_limit_matches_null_space() {
        let p = paper_params(3, 40.0, 0.0);
        let l = build(&p);
        let st = steady_state(&l).unwrap();
        let late = propagate(&l, &DensityMatrix::basis(3, 1), 50.0 / p.gamma).unwrap();
        assert!(close(late.matrix(), st.matrix(), 1e-6));
    }

    #[test]
    fn invalid_density_matrices() {
        let mut m = ComplexMatrix::identity(2, 2);
        assert!(DensityMatrix::try_new(m.clone()).is_err()); // trace 2
        m[(1, 1)] = Complex64::from(0.0);
        m[(0, 1)] = Complex64::new(0.0, 0.3);
        assert!(DensityMatrix::try_new(m.clone()).is_err()); // not Hermitian
        let neg = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from(1.1),
            Complex64::from(-0.1),
        ]));
        assert!(DensityMatrix::try_new(neg).is_err());
    }
}
