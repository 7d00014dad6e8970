//! Steady-state solver: the kernel of the Liouvillian under the unit-trace
//! constraint.
//!
//! Fast path: replace the (redundant) last diagonal-element row of the
//! scaled generator by the trace functional and LU-solve the square system.
//! Trace preservation makes the diagonal rows linearly dependent, so the
//! replacement loses no information. A pivot-ratio check guards against a
//! silently singular system; suspicious solves fall back to an SVD that
//! either resolves the kernel or reports its dimension. A degenerate kernel
//! (a decoupled manifold) is always an error, never an arbitrary pick.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DensityMatrix, LindbladError, Liouvillian};

/// Residual tolerance ||L_scaled vec(rho)|| for an accepted solution.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Pivot-ratio threshold below which the LU solution is distrusted.
const PIVOT_TOL: f64 = 1e-11;

/// Relative singular-value threshold separating the kernel from slow
/// physical modes.
const NULL_TOL: f64 = 1e-12;

pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix, LindbladError> {
    let n = l.dim;
    let n2 = n * n;
    let scale = l.scale();
    let lhat = l.matrix.map(|z| z / scale);

    if let Some(rho) = lu_path(&lhat, n) {
        let residual = residual_norm(&lhat, &rho);
        if residual < RESIDUAL_TOL {
            return Ok(rho);
        }
    }
    svd_path(&lhat, n2)
}

/// Square solve with the last diagonal row replaced by the trace row.
fn lu_path(lhat: &DMatrix<Complex64>, n: usize) -> Option<DensityMatrix> {
    let n2 = n * n;
    let last = n2 - 1;
    let mut m = lhat.clone();
    for col in 0..n2 {
        m[(last, col)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..n {
        m[(last, i * n + i)] = Complex64::new(1.0, 0.0);
    }
    let mut b = DVector::<Complex64>::zeros(n2);
    b[last] = Complex64::new(1.0, 0.0);

    let lu = m.lu();
    let diag = lu.u().diagonal();
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for d in diag.iter() {
        dmin = dmin.min(d.norm());
        dmax = dmax.max(d.norm());
    }
    if dmax == 0.0 || dmin / dmax < PIVOT_TOL {
        return None;
    }
    let sol = lu.solve(&b)?;
    Some(DensityMatrix::from_vector(&sol).symmetrised())
}

fn residual_norm(lhat: &DMatrix<Complex64>, rho: &DensityMatrix) -> f64 {
    (lhat * rho.vectorise()).norm()
}

/// Full SVD of the scaled generator: resolves the kernel dimension and
/// solves through the null vector when it is unique.
fn svd_path(
    lhat: &DMatrix<Complex64>,
    n2: usize,
) -> Result<DensityMatrix, LindbladError> {
    let svd = lhat.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let tol = smax * NULL_TOL * (n2 as f64).sqrt();
    let null_indices: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol)
        .collect();
    if null_indices.len() > 1 {
        return Err(LindbladError::DegenerateKernel { kernel_dim: null_indices.len() });
    }
    // with exactly one (or, numerically, zero) vector below threshold, the
    // smallest singular vector is the kernel candidate
    let idx = (0..svd.singular_values.len())
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .expect("non-empty spectrum");
    let v = v_t.row(idx).adjoint();
    let cand = DensityMatrix::from_vector(&DVector::from_column_slice(v.as_slice()));
    let trace = cand.trace();
    if trace.norm() < 1e-8 {
        // a traceless stationary direction signals an unresolved or
        // degenerate kernel
        return Err(LindbladError::DegenerateKernel { kernel_dim: 2 });
    }
    let rho = DensityMatrix::new(cand.matrix.map(|z| z / trace)).symmetrised();
    let residual = residual_norm(lhat, &rho);
    if residual < RESIDUAL_TOL {
        Ok(rho)
    } else {
        Err(LindbladError::ResidualTooLarge { residual, tolerance: RESIDUAL_TOL })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::TransitionLabel;
    use crate::lindblad::{
        build_liouvillian, LaserField, LaserTriple, Model, Rates, SystemParams,
    };
    use approx::assert_relative_eq;

    fn lasers(db: f64, dr: f64, dc: f64, rb: f64, rr: f64, rc: f64) -> LaserTriple {
        let mut b = LaserField::new(TransitionLabel::B, db, rb);
        let mut r = LaserField::new(TransitionLabel::R, dr, rr);
        let mut c = LaserField::new(TransitionLabel::C, dc, rc);
        b.direction = [1.0, 0.0, 0.0];
        r.direction = [1.0, 0.0, 0.0];
        c.direction = [1.0, 0.0, 0.0];
        LaserTriple { b, r, c }
    }

    fn params(l: LaserTriple, model: Model) -> SystemParams {
        SystemParams {
            model,
            lasers: l,
            b_field: 0.0,
            rates: Rates::default(),
            detection: Default::default(),
        }
    }

    #[test]
    fn two_level_steady_state_matches_closed_form() {
        // driven two-level system: optical Bloch steady state
        // P population = (W^2/4) / (D^2 + G^2/4 + W^2/2) in angular units
        use crate::lindblad::hamiltonian::{Basis, BasisState};
        use crate::atomic::half::Half;
        use crate::atomic::LevelName;
        use num_complex::Complex64;

        for (delta, omega) in [(0.0, 5e6), (-10e6, 8e6), (20e6, 3e6), (3e6, 20e6)] {
            let gamma = crate::constants::gamma_p();
            let mut h = nalgebra::DMatrix::<Complex64>::zeros(2, 2);
            h[(1, 1)] = Complex64::new(-delta, 0.0);
            h[(0, 1)] = Complex64::new(omega / 2.0, 0.0);
            h[(1, 0)] = Complex64::new(omega / 2.0, 0.0);
            let basis = Basis {
                states: vec![
                    BasisState { level: LevelName::S12, m: Half(-1) },
                    BasisState { level: LevelName::P12, m: Half(-1) },
                ],
            };
            let jumps = vec![crate::lindblad::JumpOp::lowering(2, 0, 1, gamma)];
            let l = build_liouvillian(
                &crate::lindblad::Hamiltonian { matrix: h, basis },
                &jumps,
            )
            .unwrap();
            let rho = steady_state(&l).unwrap();
            let w = 2.0 * std::f64::consts::PI * omega;
            let d = 2.0 * std::f64::consts::PI * delta;
            let expected = (w * w / 4.0) / (d * d + gamma * gamma / 4.0 + w * w / 2.0);
            assert_relative_eq!(rho.population(1), expected, max_relative = 1e-8);
            rho.validate().unwrap();
        }
    }

    #[test]
    fn three_level_lambda_matches_eigendecomposition_oracle() {
        // B and R on, C off: the S-P-D Lambda system. Independent oracle:
        // textbook elementwise Lindblad builder + null space of L^+ L via
        // Hermitian eigendecomposition.
        use num_complex::Complex64;
        let (db, dr, rb, rr) = (-12e6, -3e6, 6e6, 2.5e6);
        let gamma = crate::constants::gamma_p();
        let beta = crate::constants::branching_beta();

        let p = params(lasers(db, dr, 0.0, rb, rr, 0.0), Model::four_level());
        // drop the decoupled D5/2 state: build the 3-level system directly
        let tau = 2.0 * std::f64::consts::PI;
        let h = nalgebra::DMatrix::<Complex64>::from_fn(3, 3, |i, j| {
            let v = match (i, j) {
                (1, 1) => -db,
                (2, 2) => dr - db,
                (0, 1) | (1, 0) => rb / 2.0,
                (1, 2) | (2, 1) => rr / 2.0,
                _ => 0.0,
            };
            Complex64::new(v, 0.0)
        });
        let jumps = vec![
            crate::lindblad::JumpOp::lowering(3, 0, 1, (1.0 - beta) * gamma),
            crate::lindblad::JumpOp::lowering(3, 2, 1, beta * gamma),
        ];
        let basis = crate::lindblad::hamiltonian::Basis {
            states: p.basis().states[..3].to_vec(),
        };
        let l = build_liouvillian(&crate::lindblad::Hamiltonian { matrix: h.clone(), basis }, &jumps).unwrap();
        let rho = steady_state(&l).unwrap();

        // oracle: assemble L elementwise from the master equation and find
        // the kernel of L^+ L
        let n = 3usize;
        let c_ops = [
            (((1.0 - beta) * gamma).sqrt(), 0usize, 1usize),
            ((beta * gamma).sqrt(), 2usize, 1usize),
        ];
        let idx = |r: usize, c: usize| c * n + r; // column-major
        let mut lmat = nalgebra::DMatrix::<Complex64>::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    // -i 2pi (H_ac rho_cb - rho_ac H_cb)
                    let hac = h[(a, c)] * Complex64::new(0.0, -tau);
                    lmat[(idx(a, b), idx(c, b))] += hac;
                    let hcb = h[(c, b)] * Complex64::new(0.0, tau);
                    lmat[(idx(a, b), idx(a, c))] += hcb;
                }
            }
        }
        for &(amp, to, from) in &c_ops {
            let r = amp * amp;
            // C rho C+ term
            lmat[(idx(to, to), idx(from, from))] += Complex64::new(r, 0.0);
            // anticommutator terms: C+C = r |from><from|
            for b in 0..n {
                lmat[(idx(from, b), idx(from, b))] += Complex64::new(-r / 2.0, 0.0);
                lmat[(idx(b, from), idx(b, from))] += Complex64::new(-r / 2.0, 0.0);
            }
        }
        let scale = lmat.camax();
        let lhat = lmat.map(|z| z / scale);
        let gram = lhat.adjoint() * &lhat;
        let eig = nalgebra::SymmetricEigen::new(gram);
        let (kmin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let v = eig.eigenvectors.column(kmin);
        let rho_oracle = DensityMatrix::from_vector(&nalgebra::DVector::from_column_slice(v.as_slice()));
        let tr = rho_oracle.trace();
        let rho_oracle = DensityMatrix::new(rho_oracle.matrix.map(|z| z / tr)).symmetrised();

        let diff = (&rho.matrix - &rho_oracle.matrix).camax();
        assert!(diff < 1e-9, "solver vs oracle difference {diff}");
    }

    #[test]
    fn optical_pumping_dead_end_without_repumper() {
        // cooling laser only: all population ends in D3/2
        let p = params(
            lasers(-20e6, 0.0, 0.0, 10e6, 0.0, 0.0),
            Model::four_level(),
        );
        let rho = steady_state(&p.liouvillian(None).unwrap()).unwrap();
        assert!(rho.population(2) > 1.0 - 1e-5, "D population {}", rho.population(2));
        let fluo = crate::lindblad::fluorescence(&rho, &p.basis(), &p.rates, &p.detection);
        assert_relative_eq!(fluo, p.detection.background, max_relative = 1e-4);
    }

    #[test]
    fn branching_ratio_in_decay() {
        // start in P, no drive: populations split (1-beta) : beta
        let p = params(lasers(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), Model::four_level());
        let rates = Rates { metastable_decay: false, ..Rates::default() };
        let h = p.hamiltonian(None).unwrap();
        let jumps = crate::lindblad::hamiltonian::decay_ops(&p.model, &h.basis, &rates).unwrap();
        let l = build_liouvillian(&h, &jumps).unwrap();
        let rho0 = DensityMatrix::pure(4, 1);
        let t = 30.0 / rates.gamma_p;
        let rho = crate::lindblad::evolve::evolve(&rho0, &l, t, &Default::default()).unwrap();
        assert_relative_eq!(rho.population(0), 1.0 - rates.beta, max_relative = 1e-6);
        assert_relative_eq!(rho.population(2), rates.beta, max_relative = 1e-6);
    }

    #[test]
    fn degenerate_kernel_is_reported() {
        // 14-state system without metastable decay: the undriven D5/2
        // m = +-1/2 sublevels are fully decoupled
        let p = params(
            lasers(-20e6, 0.0, 5e6, 8e6, 2e6, 0.2e6),
            Model::zeeman14(),
        );
        let rates = Rates { metastable_decay: false, ..Rates::default() };
        let p = SystemParams { rates, ..p };
        let err = steady_state(&p.liouvillian(None).unwrap()).unwrap_err();
        assert!(
            matches!(err, LindbladError::DegenerateKernel { kernel_dim } if kernel_dim >= 2),
            "got {err}"
        );
    }

    #[test]
    fn zeeman14_steady_state_is_unique_with_metastable_decay() {
        let p = params(
            lasers(-20e6, 1e6, 5e6, 8e6, 2e6, 0.2e6),
            Model::zeeman14(),
        );
        let rho = steady_state(&p.liouvillian(None).unwrap()).unwrap();
        rho.validate().unwrap();
    }
}
