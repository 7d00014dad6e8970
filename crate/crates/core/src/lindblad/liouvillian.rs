//! Lindblad superoperator assembly.
//!
//! L[rho] = -i 2pi [H, rho] + sum_k ( C_k rho C_k+ - 1/2 {C_k+ C_k, rho} )
//!
//! with H in Hz and jump operators C_k in sqrt(1/s), so L is in 1/s. In the
//! column-major vectorisation vec(A rho B) = (B^T kron A) vec(rho), giving
//!
//! L = -i 2pi (I kron H - H^T kron I)
//!     + sum_k [ conj(C_k) kron C_k
//!               - 1/2 I kron (C_k+ C_k) - 1/2 (C_k+ C_k)^T kron I ].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DensityMatrix, Hamiltonian, LindbladError};

/// A full Lindblad jump operator C (the rate is folded in: C = sqrt(rate) A).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOp {
    pub op: DMatrix<Complex64>,
}

impl JumpOp {
    pub fn from_op(op: DMatrix<Complex64>, rate: f64) -> Self {
        assert!(rate >= 0.0, "jump rate must be non-negative");
        JumpOp { op: op * Complex64::new(rate.sqrt(), 0.0) }
    }

    /// sqrt(rate) |to><from|.
    pub fn lowering(dim: usize, to: usize, from: usize, rate: f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(to, from)] = Complex64::new(1.0, 0.0);
        JumpOp::from_op(m, rate)
    }

    /// sqrt(kappa) diag(weights): pure dephasing. A coherence rho_ij decays
    /// at kappa/2 (w_i - w_j)^2.
    pub fn dephasing_weights(weights: &DVector<f64>, kappa: f64) -> Self {
        let n = weights.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(weights[i], 0.0);
        }
        JumpOp::from_op(m, kappa)
    }
}

/// A decay channel between two basis states, in the form used by the
/// reduced models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayChannel {
    pub from_state: usize,
    pub to_state: usize,
    /// 1/s.
    pub rate: f64,
}

impl DecayChannel {
    pub fn into_jump(self, dim: usize) -> Result<JumpOp, LindbladError> {
        if self.rate < 0.0 {
            return Err(LindbladError::NegativeRate { what: "decay", rate: self.rate });
        }
        Ok(JumpOp::lowering(dim, self.to_state, self.from_state, self.rate))
    }
}

/// Pure dephasing of the coherence between two states at `rate` (1/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dephasing {
    pub state_a: usize,
    pub state_b: usize,
    pub rate: f64,
}

impl Dephasing {
    pub fn into_jump(self, dim: usize) -> Result<JumpOp, LindbladError> {
        if self.rate < 0.0 {
            return Err(LindbladError::NegativeRate { what: "dephasing", rate: self.rate });
        }
        let mut w = DVector::zeros(dim);
        w[self.state_a] = 0.5;
        w[self.state_b] = -0.5;
        // kappa/2 (w_a - w_b)^2 = rate  =>  kappa = 2 rate
        Ok(JumpOp::dephasing_weights(&w, 2.0 * self.rate))
    }
}

/// The Lindblad generator as a dense matrix over vectorised density
/// matrices, in 1/s.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub matrix: DMatrix<Complex64>,
    pub dim: usize,
}

impl Liouvillian {
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = rho.vectorise();
        DensityMatrix::from_vector(&(&self.matrix * v))
    }

    /// Largest absolute entry; the natural rate scale of the generator.
    pub fn scale(&self) -> f64 {
        self.matrix.camax().max(f64::MIN_POSITIVE)
    }
}

/// Superoperator of the coherent part, -i 2pi (I kron H - H^T kron I).
pub fn coherent_superop(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = h.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let comm = id.kronecker(h) - h.transpose().kronecker(&id);
    comm * Complex64::new(0.0, -2.0 * std::f64::consts::PI)
}

/// Superoperator of the dissipative part of a set of jump operators.
pub fn dissipator_superop(jumps: &[JumpOp], dim: usize) -> Result<DMatrix<Complex64>, LindbladError> {
    let n2 = dim * dim;
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let mut d = DMatrix::<Complex64>::zeros(n2, n2);
    for j in jumps {
        if j.op.nrows() != dim || j.op.ncols() != dim {
            return Err(LindbladError::BasisMismatch { got: j.op.nrows(), expected: dim });
        }
        let cdag_c = j.op.adjoint() * &j.op;
        d += j.op.conjugate().kronecker(&j.op);
        d -= id.kronecker(&cdag_c).map(|z| z * 0.5);
        d -= cdag_c.transpose().kronecker(&id).map(|z| z * 0.5);
    }
    Ok(d)
}

pub fn build_liouvillian(h: &Hamiltonian, jumps: &[JumpOp]) -> Result<Liouvillian, LindbladError> {
    let dim = h.matrix.nrows();
    let matrix = coherent_superop(&h.matrix) + dissipator_superop(jumps, dim)?;
    Ok(Liouvillian { matrix, dim })
}

/// Build from parts; used by the scan engine to reuse the (constant)
/// dissipator across grid points.
pub fn liouvillian_from_parts(
    h: &DMatrix<Complex64>,
    dissipator: &DMatrix<Complex64>,
) -> Liouvillian {
    Liouvillian { matrix: coherent_superop(h) + dissipator, dim: h.nrows() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::hamiltonian::{Basis, BasisState};
    use crate::atomic::half::Half;
    use crate::atomic::LevelName;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        (&a + a.adjoint()).map(|z| z * 0.5)
    }

    fn toy_liouvillian(n: usize, rng: &mut impl Rng) -> Liouvillian {
        let h = random_hermitian(n, rng) * Complex64::new(1e6, 0.0);
        let basis = Basis {
            states: (0..n)
                .map(|_| BasisState { level: LevelName::S12, m: Half(1) })
                .collect(),
        };
        let jumps = vec![
            JumpOp::lowering(n, 0, 1, 1e5 * rng.gen::<f64>()),
            JumpOp::lowering(n, 0, n - 1, 1e4 * rng.gen::<f64>()),
            Dephasing { state_a: 0, state_b: 1, rate: 1e3 }.into_jump(n).unwrap(),
        ];
        build_liouvillian(&Hamiltonian { matrix: h, basis }, &jumps).unwrap()
    }

    #[test]
    fn trace_preservation_and_hermiticity_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = 2 + trial % 4;
            let l = toy_liouvillian(n, &mut rng);
            let rho = DensityMatrix::new(random_hermitian(n, &mut rng));
            let out = l.apply(&rho);
            // Tr L[rho] = 0
            assert!(
                out.trace().norm() <= 1e-12 * l.scale(),
                "trace leak {}",
                out.trace().norm()
            );
            // L[rho]+ = L[rho+] for Hermitian rho
            let defect = (&out.matrix - out.matrix.adjoint()).camax();
            assert!(defect <= 1e-12 * l.scale(), "hermiticity defect {defect}");
        }
    }

    #[test]
    fn dephasing_rate_normalisation() {
        // two-level system, pure dephasing only: rho_01(t) = exp(-rate t)
        let n = 2;
        let rate = 5e4;
        let jump = Dephasing { state_a: 0, state_b: 1, rate }.into_jump(n).unwrap();
        let d = dissipator_superop(&[jump], n).unwrap();
        // column-major index of rho_01 is (0,1) -> 1 * 2 + 0 = 2
        let decay = d[(2, 2)].re;
        approx::assert_relative_eq!(decay, -rate, max_relative = 1e-12);
    }

    #[test]
    fn rejects_negative_rates() {
        assert!(DecayChannel { from_state: 1, to_state: 0, rate: -1.0 }.into_jump(2).is_err());
        assert!(Dephasing { state_a: 0, state_b: 1, rate: -0.1 }.into_jump(2).is_err());
    }
}
