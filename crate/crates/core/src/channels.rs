//! The four noise channels and how they act on n-qubit density matrices.
//!
//! Amplitude and phase damping act independently and identically on every
//! qubit through a Kraus sum. Collective dephasing and collective rotation
//! apply the same single-qubit unitary to every qubit at once.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    conjugate_apply, conjugate_matrix, tensor_all, ComplexMatrix, DensityMatrix, ONE, TOL, ZERO,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseFamily {
    AmplitudeDamping,
    PhaseDamping,
    CollectiveDephasing,
    CollectiveRotation,
}

impl NoiseFamily {
    pub const ALL: [NoiseFamily; 4] = [
        Self::AmplitudeDamping,
        Self::PhaseDamping,
        Self::CollectiveDephasing,
        Self::CollectiveRotation,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::AmplitudeDamping => "ad",
            Self::PhaseDamping => "pd",
            Self::CollectiveDephasing => "cd",
            Self::CollectiveRotation => "cr",
        }
    }

    /// Natural parameter interval: `[0, 1]` for damping rates, `[0, 2π]` for angles.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            Self::AmplitudeDamping | Self::PhaseDamping => (0.0, 1.0),
            Self::CollectiveDephasing | Self::CollectiveRotation => (0.0, TAU),
        }
    }

    pub fn is_collective(self) -> bool {
        matches!(self, Self::CollectiveDephasing | Self::CollectiveRotation)
    }

    pub fn with_parameter(self, value: f64) -> Result<NoiseModel> {
        match self {
            Self::AmplitudeDamping => NoiseModel::amplitude_damping(value),
            Self::PhaseDamping => NoiseModel::phase_damping(value),
            Self::CollectiveDephasing => Ok(NoiseModel::CollectiveDephasing { phi: value }),
            Self::CollectiveRotation => Ok(NoiseModel::CollectiveRotation { theta: value }),
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ad" => Ok(Self::AmplitudeDamping),
            "pd" => Ok(Self::PhaseDamping),
            "cd" => Ok(Self::CollectiveDephasing),
            "cr" => Ok(Self::CollectiveRotation),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

/// A noise family together with its parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    AmplitudeDamping { eta: f64 },
    PhaseDamping { eta: f64 },
    /// Phase angle in radians; any real value.
    CollectiveDephasing { phi: f64 },
    /// Rotation angle in radians; any real value.
    CollectiveRotation { theta: f64 },
}

fn check_rate(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ParameterOutOfRange { name, value })
    }
}

impl NoiseModel {
    pub fn amplitude_damping(eta: f64) -> Result<Self> {
        check_rate("eta_A", eta).map(|eta| Self::AmplitudeDamping { eta })
    }

    pub fn phase_damping(eta: f64) -> Result<Self> {
        check_rate("eta_P", eta).map(|eta| Self::PhaseDamping { eta })
    }

    pub fn family(&self) -> NoiseFamily {
        match self {
            Self::AmplitudeDamping { .. } => NoiseFamily::AmplitudeDamping,
            Self::PhaseDamping { .. } => NoiseFamily::PhaseDamping,
            Self::CollectiveDephasing { .. } => NoiseFamily::CollectiveDephasing,
            Self::CollectiveRotation { .. } => NoiseFamily::CollectiveRotation,
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            Self::AmplitudeDamping { eta } | Self::PhaseDamping { eta } => eta,
            Self::CollectiveDephasing { phi } => phi,
            Self::CollectiveRotation { theta } => theta,
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family(), self.parameter())
    }
}

/// Single-qubit Kraus operators satisfying `Σ Eᵢ†Eᵢ = I₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    name: String,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Fails if any operator is not 2×2 or the set is incomplete.
    pub fn new(name: impl Into<String>, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidArgument("empty Kraus set".into()));
        }
        for op in &operators {
            if op.rows() != 2 || op.cols() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    actual: op.rows() * op.cols(),
                });
            }
        }
        let ch = Self {
            name: name.into(),
            operators,
        };
        let err = ch.completeness_error();
        if err >= TOL {
            return Err(Error::InvalidArgument(format!(
                "Kraus operators incomplete (deviation {err:e})"
            )));
        }
        Ok(ch)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Max-abs deviation of `Σ Eᵢ†Eᵢ` from `I₂`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .map(|e| e.dagger().matmul(e).expect("2x2 operators"))
            .fold(ComplexMatrix::zeros(2, 2), |acc, m| {
                acc.add(&m).expect("same shape")
            });
        sum.max_abs_diff(&ComplexMatrix::identity(2))
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Amplitude damping: `E₀ = diag(1, √(1−η))`, `E₁ = √η |0⟩⟨1|`.
pub fn kraus_ad(eta: f64) -> Result<KrausChannel> {
    let eta = check_rate("eta_A", eta)?;
    let e0 = ComplexMatrix::diagonal(&[ONE, real((1.0 - eta).sqrt())]);
    let mut e1 = ComplexMatrix::zeros(2, 2);
    e1[(0, 1)] = real(eta.sqrt());
    KrausChannel::new("ad", vec![e0, e1])
}

/// Phase damping: `E₀ = √(1−η) I`, `E₁ = √η |0⟩⟨0|`, `E₂ = √η |1⟩⟨1|`.
pub fn kraus_pd(eta: f64) -> Result<KrausChannel> {
    let eta = check_rate("eta_P", eta)?;
    let keep = real((1.0 - eta).sqrt());
    let hit = real(eta.sqrt());
    let e0 = ComplexMatrix::diagonal(&[keep, keep]);
    let e1 = ComplexMatrix::diagonal(&[hit, ZERO]);
    let e2 = ComplexMatrix::diagonal(&[ZERO, hit]);
    KrausChannel::new("pd", vec![e0, e1, e2])
}

/// Collective-dephasing phase gate `diag(1, e^{iφ})`.
pub fn unitary_cd(phi: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[ONE, Complex64::from_polar(1.0, phi)])
}

/// Collective-rotation matrix `[[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn unitary_cr(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]])
}

/// Applies the same Kraus channel independently to each qubit.
///
/// Sums `K ρ K†` over all `mⁿ` operator strings `K = E_{i₁} ⊗ ⋯ ⊗ E_{iₙ}`.
pub fn apply_kraus_channel(rho: &DensityMatrix, ch: &KrausChannel) -> DensityMatrix {
    let n = rho.n_qubits();
    let ops = ch.operators();
    let m = ops.len();
    let zero_op: Vec<bool> = ops
        .iter()
        .map(|e| e.as_slice().iter().all(|&z| z == ZERO))
        .collect();
    let dim = rho.dim();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    let mut index = vec![0usize; n];
    let total = m.pow(n as u32);
    for _ in 0..total {
        if !index.iter().any(|&i| zero_op[i]) {
            let k = tensor_all(index.iter().map(|&i| &ops[i]));
            let term = conjugate_matrix(&k, rho.matrix()).expect("operator matches state size");
            acc = acc.add(&term).expect("same shape");
        }
        // Odometer increment over the multi-index, last qubit fastest.
        for slot in index.iter_mut().rev() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    DensityMatrix::from_matrix_unchecked(n, acc)
}

/// `U^{⊗n} ρ U^{†⊗n}`; `u` must be a 2×2 unitary.
pub fn apply_collective(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: u.rows() * u.cols(),
        });
    }
    let deviation = u.unitarity_error();
    if deviation >= TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let full = tensor_all(std::iter::repeat_n(u, rho.n_qubits()));
    conjugate_apply(&full, rho)
}

/// Dispatches to the Kraus sum or the collective unitary as appropriate.
pub fn apply_noise(rho: &DensityMatrix, noise: &NoiseModel) -> Result<DensityMatrix> {
    match *noise {
        NoiseModel::AmplitudeDamping { eta } => Ok(apply_kraus_channel(rho, &kraus_ad(eta)?)),
        NoiseModel::PhaseDamping { eta } => Ok(apply_kraus_channel(rho, &kraus_pd(eta)?)),
        NoiseModel::CollectiveDephasing { phi } => apply_collective(rho, &unitary_cd(phi)),
        NoiseModel::CollectiveRotation { theta } => apply_collective(rho, &unitary_cr(theta)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PureState;
    use crate::states::{make_bell, make_single, BellLabel, Bb84Label};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    #[test]
    fn ad_endpoints_and_midpoint() {
        let ch = kraus_ad(0.0).unwrap();
        assert!(ch.operators()[0].approx_eq(&ComplexMatrix::identity(2), TOL));
        assert!(ch.operators()[1].approx_eq(&ComplexMatrix::zeros(2, 2), TOL));

        let ch = kraus_ad(1.0).unwrap();
        let e0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let e1 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(ch.operators()[0].approx_eq(&e0, TOL));
        assert!(ch.operators()[1].approx_eq(&e1, TOL));

        let ch = kraus_ad(0.5).unwrap();
        assert!((ch.operators()[0][(1, 1)].re - FRAC_1_SQRT_2).abs() < TOL);
        assert!((ch.operators()[1][(0, 1)].re - FRAC_1_SQRT_2).abs() < TOL);
    }

    #[test]
    fn pd_endpoints_and_completeness() {
        let ch = kraus_pd(0.0).unwrap();
        assert!(ch.operators()[0].approx_eq(&ComplexMatrix::identity(2), TOL));
        let ch = kraus_pd(1.0).unwrap();
        assert!(ch.operators()[0].approx_eq(&ComplexMatrix::zeros(2, 2), TOL));
        assert!(ch.operators()[1][(0, 0)] == ONE && ch.operators()[2][(1, 1)] == ONE);
        assert!(kraus_pd(0.37).unwrap().completeness_error() < TOL);
    }

    #[test]
    fn rates_outside_unit_interval_are_rejected() {
        for bad in [-0.01, 1.01, f64::NAN] {
            assert!(kraus_ad(bad).is_err());
            assert!(kraus_pd(bad).is_err());
            assert!(NoiseModel::amplitude_damping(bad).is_err());
            assert!(NoiseModel::phase_damping(bad).is_err());
        }
    }

    #[test]
    fn incomplete_kraus_set_is_rejected() {
        let half = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(KrausChannel::new("bad", vec![half]).is_err());
        assert!(KrausChannel::new("bad", vec![]).is_err());
    }

    #[test]
    fn collective_unitaries() {
        assert!(unitary_cd(0.0).approx_eq(&ComplexMatrix::identity(2), TOL));
        let z = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(unitary_cd(PI).approx_eq(&z, TOL));
        assert!(unitary_cd(1.3).is_unitary());

        assert!(unitary_cr(0.0).approx_eq(&ComplexMatrix::identity(2), TOL));
        let quarter = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(unitary_cr(FRAC_PI_2).approx_eq(&quarter, TOL));
        let round = unitary_cr(0.8).matmul(&unitary_cr(-0.8)).unwrap();
        assert!(round.approx_eq(&ComplexMatrix::identity(2), TOL));
    }

    #[test]
    fn ad_on_excited_state() {
        let eta = 0.3;
        let rho = make_single(Bb84Label::One).density();
        let out = apply_kraus_channel(&rho, &kraus_ad(eta).unwrap());
        let expected = ComplexMatrix::from_real_rows(&[&[eta, 0.0], &[0.0, 1.0 - eta]]);
        assert!(out.matrix().approx_eq(&expected, TOL));
    }

    #[test]
    fn pd_on_plus_state() {
        let eta = 0.4;
        let rho = make_single(Bb84Label::Plus).density();
        let out = apply_kraus_channel(&rho, &kraus_pd(eta).unwrap());
        let off = (1.0 - eta) / 2.0;
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, off], &[off, 0.5]]);
        assert!(out.matrix().approx_eq(&expected, TOL));
    }

    #[test]
    fn identity_channels_on_maximally_mixed() {
        for n in 1..=4 {
            let rho = DensityMatrix::maximally_mixed(n).unwrap();
            let out = apply_kraus_channel(&rho, &kraus_ad(0.0).unwrap());
            assert!(out.matrix().approx_eq(rho.matrix(), TOL));
            let out = apply_kraus_channel(&rho, &kraus_pd(0.0).unwrap());
            assert!(out.matrix().approx_eq(rho.matrix(), TOL));
        }
    }

    #[test]
    fn collective_rotation_leaves_psi_plus_alone() {
        let rho = make_bell(BellLabel::PsiPlus).density();
        for theta in [0.1, 0.7, 2.0, 5.5] {
            let out = apply_collective(&rho, &unitary_cr(theta)).unwrap();
            assert!(out.matrix().approx_eq(rho.matrix(), TOL), "θ = {theta}");
        }
    }

    #[test]
    fn collective_rotation_on_psi_minus() {
        let psi = make_bell(BellLabel::PsiMinus);
        for theta in [0.1, 0.7, 2.0] {
            let out = apply_collective(&psi.density(), &unitary_cr(theta)).unwrap();
            let f = out.expectation(&psi).unwrap().re;
            assert!((f - (2.0 * theta).cos().powi(2)).abs() < TOL);
        }
    }

    #[test]
    fn collective_rejects_non_unitary() {
        let rho = PureState::basis(2, 1).unwrap().density();
        let not_unitary = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            apply_collective(&rho, &not_unitary),
            Err(Error::NotUnitary { .. })
        ));
        assert!(apply_collective(&rho, &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn phase_composition() {
        let rho = PureState::normalized(vec![
            ONE,
            Complex64::new(0.3, -0.2),
            Complex64::new(-0.5, 0.1),
            Complex64::new(0.0, 0.9),
        ])
        .unwrap()
        .density();
        let (a, b) = (0.4, 1.9);
        let stepwise = apply_collective(
            &apply_collective(&rho, &unitary_cd(a)).unwrap(),
            &unitary_cd(b),
        )
        .unwrap();
        let direct = apply_collective(&rho, &unitary_cd(a + b)).unwrap();
        assert!(stepwise.matrix().approx_eq(direct.matrix(), TOL));
    }

    #[test]
    fn family_parsing_and_ranges() {
        for fam in NoiseFamily::ALL {
            assert_eq!(fam.tag().parse::<NoiseFamily>().unwrap(), fam);
        }
        assert!("gad".parse::<NoiseFamily>().is_err());
        assert_eq!(NoiseFamily::CollectiveRotation.default_range(), (0.0, TAU));
        assert!(NoiseFamily::AmplitudeDamping.with_parameter(2.0).is_err());
        assert!(NoiseFamily::CollectiveDephasing.with_parameter(-7.0).is_ok());
    }
}
