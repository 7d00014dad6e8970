//! Rotating-frame Hamiltonian builders for the reduced 4-level and
//! Zeeman-resolved 14-state bases.
//!
//! Diagonal (Hz): S(m): z_S(m); P(m): -Delta_B + z_P(m);
//! D3/2(m): Delta_R - Delta_B + z_D(m); D5/2(m): -Delta_C + z_Q(m),
//! with z the sublevel Zeeman shifts. Couplings are Omega/2 times the
//! Clebsch-Gordan amplitude of the component relative to the strongest
//! sigma component, so the configured Rabi frequency is the one of the
//! strongest line. With a velocity given, each detuning is replaced by
//! Delta_i - k_i . v.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use crate::atomic::angmom::clebsch_gordan;
use crate::atomic::half::Half;
use crate::atomic::{self, LevelName};

use super::{LaserTriple, LindbladError, Model, Rates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub level: LevelName,
    pub m: Half,
}

/// Ordered basis of the model; the index of a state in `states` is its
/// matrix index everywhere in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub states: Vec<BasisState>,
}

impl Basis {
    pub fn for_model(model: &Model) -> Basis {
        match model {
            Model::FourLevel { line } => {
                let line = line
                    .as_ref()
                    .and_then(|l| atomic::line_by_label(*l))
                    .unwrap_or_else(|| atomic::relative_couplings()[0].clone());
                Basis {
                    states: vec![
                        BasisState { level: LevelName::S12, m: line.mj_s12 },
                        BasisState { level: LevelName::P12, m: line.mj_p12 },
                        BasisState { level: LevelName::D32, m: line.mj_d32 },
                        BasisState { level: LevelName::D52, m: line.mj_d52 },
                    ],
                }
            }
            Model::Zeeman14 { .. } => {
                let mut states = Vec::with_capacity(14);
                for (level, j) in [
                    (LevelName::S12, 1),
                    (LevelName::P12, 1),
                    (LevelName::D32, 3),
                    (LevelName::D52, 5),
                ] {
                    let mut tm = -j;
                    while tm <= j {
                        states.push(BasisState { level, m: Half(tm) });
                        tm += 2;
                    }
                }
                Basis { states }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, level: LevelName, m: Half) -> Option<usize> {
        self.states.iter().position(|s| s.level == level && s.m == m)
    }

    pub fn indices_of(&self, level: LevelName) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.level == level)
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    /// Matrix entries in Hz.
    pub matrix: DMatrix<Complex64>,
    pub basis: Basis,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Effective detunings including the first-order Doppler shift.
fn effective_detunings(lasers: &LaserTriple, velocity: Option<Vector3<f64>>) -> (f64, f64, f64) {
    let v = velocity.unwrap_or_else(Vector3::zeros);
    (
        lasers.b.detuning - lasers.b.doppler_shift(v),
        lasers.r.detuning - lasers.r.doppler_shift(v),
        lasers.c.detuning - lasers.c.doppler_shift(v),
    )
}

fn check_lasers(lasers: &LaserTriple) -> Result<(), LindbladError> {
    for l in [&lasers.b, &lasers.r, &lasers.c] {
        if l.rabi < 0.0 {
            return Err(LindbladError::NegativeRate { what: "Rabi frequency", rate: l.rabi });
        }
        if l.linewidth < 0.0 {
            return Err(LindbladError::NegativeRate { what: "laser linewidth", rate: l.linewidth });
        }
    }
    Ok(())
}

pub fn build_hamiltonian(
    model: &Model,
    lasers: &LaserTriple,
    b_field: f64,
    velocity: Option<Vector3<f64>>,
) -> Result<Hamiltonian, LindbladError> {
    check_lasers(lasers)?;
    let basis = Basis::for_model(model);
    let (db, dr, dc) = effective_detunings(lasers, velocity);
    let matrix = match model {
        Model::FourLevel { line } => {
            let mut h = DMatrix::zeros(4, 4);
            let (rel_r, rel_c, zeeman) = match line.as_ref().and_then(|l| atomic::line_by_label(*l)) {
                Some(l) => {
                    let z = |lvl: LevelName, m: Half| super::sublevel_shift(lvl, m, b_field);
                    (
                        l.rel_rabi_r,
                        l.rel_rabi_c,
                        [
                            z(LevelName::S12, l.mj_s12),
                            z(LevelName::P12, l.mj_p12),
                            z(LevelName::D32, l.mj_d32),
                            z(LevelName::D52, l.mj_d52),
                        ],
                    )
                }
                None => (1.0, 1.0, [0.0; 4]),
            };
            h[(0, 0)] = re(zeeman[0]);
            h[(1, 1)] = re(-db + zeeman[1]);
            h[(2, 2)] = re(dr - db + zeeman[2]);
            h[(3, 3)] = re(-dc + zeeman[3]);
            let couple = |h: &mut DMatrix<Complex64>, i: usize, j: usize, v: f64| {
                h[(i, j)] = re(v);
                h[(j, i)] = re(v);
            };
            couple(&mut h, 0, 1, lasers.b.rabi / 2.0);
            couple(&mut h, 1, 2, lasers.r.rabi * rel_r / 2.0);
            couple(&mut h, 0, 3, lasers.c.rabi * rel_c / 2.0);
            h
        }
        Model::Zeeman14 { pi_admixture, restrict_to_line } => {
            let n = basis.dim();
            let mut h = DMatrix::zeros(n, n);
            for (i, s) in basis.states.iter().enumerate() {
                let z = super::sublevel_shift(s.level, s.m, b_field);
                let base = match s.level {
                    LevelName::S12 => 0.0,
                    LevelName::P12 => -db,
                    LevelName::D32 => dr - db,
                    LevelName::D52 => -dc,
                };
                h[(i, i)] = re(base + z);
            }
            let allowed: Option<[usize; 4]> = restrict_to_line
                .as_ref()
                .and_then(|l| atomic::line_by_label(*l))
                .map(|l| {
                    [
                        basis.index_of(LevelName::S12, l.mj_s12).unwrap(),
                        basis.index_of(LevelName::P12, l.mj_p12).unwrap(),
                        basis.index_of(LevelName::D32, l.mj_d32).unwrap(),
                        basis.index_of(LevelName::D52, l.mj_d52).unwrap(),
                    ]
                });
            let keep = |i: usize, j: usize| match &allowed {
                Some(set) => set.contains(&i) && set.contains(&j),
                None => true,
            };
            for (q, amp, lower, upper, k, rabi, cg_max) in coupling_table(lasers, *pi_admixture) {
                for i in basis.indices_of(lower) {
                    let mg = basis.states[i].m;
                    let me = mg + Half::from_int(q);
                    if let Some(j) = basis.index_of(upper, me) {
                        if !keep(i, j) {
                            continue;
                        }
                        let cg = clebsch_gordan(
                            level_j(lower),
                            mg,
                            Half::from_int(k),
                            Half::from_int(q),
                            level_j(upper),
                            me,
                        );
                        let v = rabi / 2.0 * amp * cg / cg_max;
                        if v != 0.0 {
                            h[(i, j)] += re(v);
                            h[(j, i)] += re(v);
                        }
                    }
                }
            }
            h
        }
    };
    Ok(Hamiltonian { matrix, basis })
}

fn level_j(level: LevelName) -> Half {
    atomic::Level::get(level).j
}

/// (q, relative field amplitude, lower level, upper level, photon rank,
/// Rabi frequency, CG normalisation) for every coupling component.
fn coupling_table(
    lasers: &LaserTriple,
    pi_admixture: f64,
) -> Vec<(i32, f64, LevelName, LevelName, i32, f64, f64)> {
    // strongest sigma components used as normalisation
    let cg_b = clebsch_gordan(Half(1), Half(-1), Half(2), Half(2), Half(1), Half(1)).abs();
    let cg_r = clebsch_gordan(Half(3), Half(-3), Half(2), Half(2), Half(1), Half(-1)).abs();
    let cg_c = clebsch_gordan(Half(1), Half(1), Half(4), Half(4), Half(5), Half(5)).abs();
    let mut table = vec![
        (1, 1.0, LevelName::S12, LevelName::P12, 1, lasers.b.rabi, cg_b),
        (-1, 1.0, LevelName::S12, LevelName::P12, 1, lasers.b.rabi, cg_b),
        (1, 1.0, LevelName::D32, LevelName::P12, 1, lasers.r.rabi, cg_r),
        (-1, 1.0, LevelName::D32, LevelName::P12, 1, lasers.r.rabi, cg_r),
        (2, 1.0, LevelName::S12, LevelName::D52, 2, lasers.c.rabi, cg_c),
        (-2, 1.0, LevelName::S12, LevelName::D52, 2, lasers.c.rabi, cg_c),
    ];
    if pi_admixture != 0.0 {
        table.push((0, pi_admixture, LevelName::D32, LevelName::P12, 1, lasers.r.rabi, cg_r));
    }
    table
}

/// Radiative decay jump operators for the model.
pub fn decay_ops(
    model: &Model,
    basis: &Basis,
    rates: &Rates,
) -> Result<Vec<super::JumpOp>, LindbladError> {
    for (what, rate) in [
        ("gamma_p", rates.gamma_p),
        ("gamma_d32", rates.gamma_d32),
        ("gamma_d52", rates.gamma_d52),
    ] {
        if rate < 0.0 {
            return Err(LindbladError::NegativeRate { what, rate });
        }
    }
    let beta = rates.beta;
    let mut ops = Vec::new();
    match model {
        Model::FourLevel { .. } => {
            let mut push = |from: usize, to: usize, rate: f64| {
                ops.push(super::JumpOp::lowering(basis.dim(), to, from, rate));
            };
            push(1, 0, (1.0 - beta) * rates.gamma_p);
            push(1, 2, beta * rates.gamma_p);
            if rates.metastable_decay {
                push(2, 0, rates.gamma_d32);
                push(3, 0, rates.gamma_d52);
            }
        }
        Model::Zeeman14 { restrict_to_line, .. } => {
            match restrict_to_line.as_ref().and_then(|l| atomic::line_by_label(*l)) {
                Some(l) => {
                    // decay renormalised into the four path states, making the
                    // restricted system an exact 4-level model
                    let s = basis.index_of(LevelName::S12, l.mj_s12).unwrap();
                    let p = basis.index_of(LevelName::P12, l.mj_p12).unwrap();
                    let d = basis.index_of(LevelName::D32, l.mj_d32).unwrap();
                    let q = basis.index_of(LevelName::D52, l.mj_d52).unwrap();
                    ops.push(super::JumpOp::lowering(basis.dim(), s, p, (1.0 - beta) * rates.gamma_p));
                    ops.push(super::JumpOp::lowering(basis.dim(), d, p, beta * rates.gamma_p));
                    if rates.metastable_decay {
                        ops.push(super::JumpOp::lowering(basis.dim(), s, d, rates.gamma_d32));
                        ops.push(super::JumpOp::lowering(basis.dim(), s, q, rates.gamma_d52));
                    }
                }
                None => {
                    ops.extend(collective_decay(basis, LevelName::P12, LevelName::S12, 1, (1.0 - beta) * rates.gamma_p));
                    ops.extend(collective_decay(basis, LevelName::P12, LevelName::D32, 1, beta * rates.gamma_p));
                    if rates.metastable_decay {
                        ops.extend(collective_decay(basis, LevelName::D32, LevelName::S12, 2, rates.gamma_d32));
                        ops.extend(collective_decay(basis, LevelName::D52, LevelName::S12, 2, rates.gamma_d52));
                    }
                }
            }
        }
    }
    Ok(ops)
}

/// One jump operator per emitted polarisation q:
/// C_q = sqrt(rate) * sum_me <jg (me-q); k q | je me> |g, me-q><e, me|.
/// The CG completeness relation makes the total decay rate of every excited
/// sublevel equal to `rate`.
fn collective_decay(
    basis: &Basis,
    excited: LevelName,
    ground: LevelName,
    rank: i32,
    rate: f64,
) -> Vec<super::JumpOp> {
    let n = basis.dim();
    let je = level_j(excited);
    let jg = level_j(ground);
    let mut ops = Vec::new();
    for q in -rank..=rank {
        let mut op = DMatrix::<Complex64>::zeros(n, n);
        let mut nonzero = false;
        for e in basis.indices_of(excited) {
            let me = basis.states[e].m;
            let mg = me - Half::from_int(q);
            if let Some(g) = basis.index_of(ground, mg) {
                let cg = clebsch_gordan(jg, mg, Half::from_int(rank), Half::from_int(q), je, me);
                if cg != 0.0 {
                    op[(g, e)] = re(cg);
                    nonzero = true;
                }
            }
        }
        if nonzero && rate > 0.0 {
            ops.push(super::JumpOp::from_op(op, rate));
        }
    }
    ops
}

/// Pure-dephasing jump operators modelling laser phase diffusion. The frame
/// phase of P1/2 and D3/2 carries the B-laser phase, D3/2 subtracts the
/// R-laser phase and D5/2 carries the C-laser phase; white frequency noise
/// of laser i with Lorentzian FWHM dnu_i therefore dephases the coherences
/// it drives at pi * dnu_i.
pub fn laser_dephasing_ops(
    basis: &Basis,
    lasers: &LaserTriple,
) -> Result<Vec<super::JumpOp>, LindbladError> {
    check_lasers(lasers)?;
    let n = basis.dim();
    let manifold_weights = [
        (lasers.b.linewidth, vec![(LevelName::P12, 1.0), (LevelName::D32, 1.0)]),
        (lasers.r.linewidth, vec![(LevelName::D32, -1.0)]),
        (lasers.c.linewidth, vec![(LevelName::D52, 1.0)]),
    ];
    let mut ops = Vec::new();
    for (linewidth, weights) in manifold_weights {
        if linewidth == 0.0 {
            continue;
        }
        let kappa = 2.0 * std::f64::consts::PI * linewidth;
        let mut w = nalgebra::DVector::<f64>::zeros(n);
        for (level, weight) in weights {
            for i in basis.indices_of(level) {
                w[i] = weight;
            }
        }
        ops.push(super::JumpOp::dephasing_weights(&w, kappa));
    }
    Ok(ops)
}
