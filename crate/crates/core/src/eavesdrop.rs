//! Eavesdropping traces left in the verification string.
//!
//! Two attacks are modelled: intercept-resend on BB84 single qubits, and a
//! Bell measurement on the wrong pair of particles of two Bell pairs, which
//! swaps the entanglement and shows up as wrong Bell outcomes at the receiver.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, PureState};
use crate::states::{make_bell, make_decoy_state, BellLabel, DecoyScheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// Eve's measurement outcome and what the receiver then sees.
#[derive(Clone, Debug, PartialEq)]
pub struct EveBranch {
    pub outcome: BellLabel,
    pub probability: f64,
    /// Detection probability conditioned on this outcome.
    pub detection: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackOutcome {
    pub detection_probability: f64,
    pub outcome_distribution: BTreeMap<String, f64>,
    pub method: Method,
    /// Per-outcome breakdown of Eve's measurement; empty for BB84 attacks.
    pub eve_branches: Vec<EveBranch>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EveStrategy {
    Absent,
    InterceptResend,
}

// BB84 kets as integer vectors with a squared-norm denominator, so every
// probability is a dyadic rational and the enumeration is exact in f64.
#[derive(Clone, Copy)]
struct IntKet {
    amps: [i64; 2],
    norm_sq: i64,
}

const KET_0: IntKet = IntKet { amps: [1, 0], norm_sq: 1 };
const KET_1: IntKet = IntKet { amps: [0, 1], norm_sq: 1 };
const KET_PLUS: IntKet = IntKet { amps: [1, 1], norm_sq: 2 };
const KET_MINUS: IntKet = IntKet { amps: [1, -1], norm_sq: 2 };

const Z_BASIS: [IntKet; 2] = [KET_0, KET_1];
const X_BASIS: [IntKet; 2] = [KET_PLUS, KET_MINUS];

fn overlap_prob(a: &IntKet, b: &IntKet) -> f64 {
    let ip = a.amps[0] * b.amps[0] + a.amps[1] * b.amps[1];
    (ip * ip) as f64 / (a.norm_sq * b.norm_sq) as f64
}

/// `(basis, index in basis)` for the four sender preparations.
const PREPARATIONS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

fn basis(b: usize) -> &'static [IntKet; 2] {
    if b == 0 {
        &Z_BASIS
    } else {
        &X_BASIS
    }
}

fn bb84_distribution(mismatch: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("match".to_string(), 1.0 - mismatch),
        ("mismatch".to_string(), mismatch),
    ])
}

/// Intercept-resend on BB84, enumerated exactly over the sender's four states,
/// Eve's two bases and her outcomes, restricted to rounds where the receiver
/// measures in the preparation basis.
pub fn intercept_resend_bb84() -> AttackOutcome {
    intercept_resend_bb84_with(EveStrategy::InterceptResend)
}

pub fn intercept_resend_bb84_with(strategy: EveStrategy) -> AttackOutcome {
    let mut mismatch = 0.0;
    for &(sb, si) in &PREPARATIONS {
        let sent = basis(sb)[si];
        // What reaches the receiver: (probability, ket).
        let arrivals: Vec<(f64, IntKet)> = match strategy {
            EveStrategy::Absent => vec![(1.0, sent)],
            EveStrategy::InterceptResend => (0..2)
                .flat_map(|eb| {
                    basis(eb)
                        .iter()
                        .map(move |e| (0.5 * overlap_prob(e, &sent), *e))
                })
                .collect(),
        };
        for (p, ket) in arrivals {
            for (ri, r) in basis(sb).iter().enumerate() {
                if ri != si {
                    mismatch += 0.25 * p * overlap_prob(r, &ket);
                }
            }
        }
    }
    AttackOutcome {
        detection_probability: mismatch,
        outcome_distribution: bb84_distribution(mismatch),
        method: Method::Exact,
        eve_branches: Vec::new(),
    }
}

/// Monte Carlo version of `intercept_resend_bb84`, reproducible for a given seed.
pub fn intercept_resend_bb84_mc(strategy: EveStrategy, trials: u64, seed: u64) -> Result<AttackOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0u64;
    for _ in 0..trials {
        let (sb, si) = PREPARATIONS[rng.random_range(0..4)];
        let sent = basis(sb)[si];
        let arrived = match strategy {
            EveStrategy::Absent => sent,
            EveStrategy::InterceptResend => {
                let eve_basis = basis(rng.random_range(0..2));
                let p0 = overlap_prob(&eve_basis[0], &sent);
                if rng.random::<f64>() < p0 {
                    eve_basis[0]
                } else {
                    eve_basis[1]
                }
            }
        };
        let p_same = overlap_prob(&basis(sb)[si], &arrived);
        if rng.random::<f64>() >= p_same {
            mismatches += 1;
        }
    }
    let freq = mismatches as f64 / trials as f64;
    Ok(AttackOutcome {
        detection_probability: freq,
        outcome_distribution: bb84_distribution(freq),
        method: Method::MonteCarlo { trials, seed },
        eve_branches: Vec::new(),
    })
}

/// Lifts a two-qubit operator onto qubits `(qa, qb)` of an `n`-qubit register.
/// Qubits are 0-based with qubit 0 the most significant bit; `qa` is the
/// operator's first factor.
pub(crate) fn embed_two_qubit(op: &ComplexMatrix, qa: usize, qb: usize, n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let mask = (1usize << (n - 1 - qa)) | (1usize << (n - 1 - qb));
    let mut out = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        for y in 0..dim {
            if x & !mask != y & !mask {
                continue;
            }
            let local_x = (bit(x, qa) << 1) | bit(x, qb);
            let local_y = (bit(y, qa) << 1) | bit(y, qb);
            out[(x, y)] = op[(local_x, local_y)];
        }
    }
    out
}

fn projector(state: &PureState) -> ComplexMatrix {
    state.density().into_matrix()
}

fn outcome_key(a: BellLabel, b: BellLabel) -> String {
    format!("{a},{b}")
}

/// Eve performs a Bell measurement on qubits `eve_pair` (1-based, as in the
/// particle numbering `(1,2)(3,4)` of the prepared `bell ⊗ bell`); the
/// receiver then Bell-measures pairs (1,2) and (3,4). Detection is any
/// receiver outcome other than `(bell, bell)`.
pub fn wrong_pair_bell_attack(bell: BellLabel, eve_pair: (usize, usize)) -> Result<AttackOutcome> {
    let (a, b) = eve_pair;
    if a == b || !(1..=4).contains(&a) || !(1..=4).contains(&b) {
        return Err(Error::InvalidArgument(format!(
            "invalid qubit pair ({a},{b}); expected two distinct indices in 1..=4"
        )));
    }
    let (qa, qb) = (a.min(b) - 1, a.max(b) - 1);
    let prepared = make_decoy_state(&DecoyScheme::GvBell(bell))?;

    let receiver_basis: Vec<(BellLabel, BellLabel, PureState)> = BellLabel::ALL
        .iter()
        .flat_map(|&x| BellLabel::ALL.iter().map(move |&y| (x, y)))
        .map(|(x, y)| {
            let ket = make_bell(x).tensor(&make_bell(y))?;
            Ok((x, y, ket))
        })
        .collect::<Result<_>>()?;

    let mut joint: BTreeMap<String, f64> = receiver_basis
        .iter()
        .map(|(x, y, _)| (outcome_key(*x, *y), 0.0))
        .collect();
    let mut branches = Vec::with_capacity(4);

    for eve in BellLabel::ALL {
        let op = embed_two_qubit(&projector(&make_bell(eve)), qa, qb, 4);
        let projected = prepared.apply_unnormalized(&op)?;
        let p_eve: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
        if p_eve < 1e-15 {
            branches.push(EveBranch {
                outcome: eve,
                probability: 0.0,
                detection: 0.0,
            });
            continue;
        }
        let post = PureState::normalized(projected)?;
        let mut undetected = 0.0;
        for (x, y, ket) in &receiver_basis {
            let p = ket.inner(&post)?.norm_sqr();
            *joint.get_mut(&outcome_key(*x, *y)).expect("key present") += p_eve * p;
            if *x == bell && *y == bell {
                undetected = p;
            }
        }
        branches.push(EveBranch {
            outcome: eve,
            probability: p_eve,
            detection: 1.0 - undetected,
        });
    }

    let detection_probability = 1.0 - joint[&outcome_key(bell, bell)];
    Ok(AttackOutcome {
        detection_probability,
        outcome_distribution: joint,
        method: Method::Exact,
        eve_branches: branches,
    })
}

/// Samples Eve's and the receiver's outcomes from the exact branch distributions.
pub fn wrong_pair_bell_attack_mc(
    bell: BellLabel,
    eve_pair: (usize, usize),
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let exact = wrong_pair_bell_attack(bell, eve_pair)?;
    let outcomes: Vec<(&String, f64)> = exact
        .outcome_distribution
        .iter()
        .map(|(k, &p)| (k, p))
        .collect();
    let mut counts = vec![0u64; outcomes.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut u: f64 = rng.random();
        let mut pick = outcomes.len() - 1;
        for (i, (_, p)) in outcomes.iter().enumerate() {
            if u < *p {
                pick = i;
                break;
            }
            u -= p;
        }
        counts[pick] += 1;
    }
    let dist: BTreeMap<String, f64> = outcomes
        .iter()
        .zip(&counts)
        .map(|((k, _), &c)| ((*k).clone(), c as f64 / trials as f64))
        .collect();
    let key = outcome_key(bell, bell);
    Ok(AttackOutcome {
        detection_probability: 1.0 - dist[&key],
        outcome_distribution: dist,
        method: Method::MonteCarlo { trials, seed },
        eve_branches: exact.eve_branches,
    })
}
