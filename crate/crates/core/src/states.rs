//! Decoy-state constructors.
//!
//! **Bell labels follow the parallel/anti-parallel convention used throughout
//! this crate, which is swapped relative to the common textbook one:**
//!
//! * `ψ± = (|00⟩ ± |11⟩)/√2` (parallel spins)
//! * `φ± = (|01⟩ ± |10⟩)/√2` (anti-parallel spins)
//!
//! All fidelity cells and scheme names are keyed to these labels.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{PureState, ZERO};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-qubit preparation used by the BB84 check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bb84Label {
    Zero,
    One,
    Plus,
    Minus,
}

impl Bb84Label {
    pub const ALL: [Bb84Label; 4] = [Self::Zero, Self::One, Self::Plus, Self::Minus];

    pub fn symbol(self) -> char {
        match self {
            Self::Zero => '0',
            Self::One => '1',
            Self::Plus => '+',
            Self::Minus => '-',
        }
    }

    /// True for the computational basis, false for the diagonal one.
    pub fn is_computational(self) -> bool {
        matches!(self, Self::Zero | Self::One)
    }
}

impl FromStr for Bb84Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" => Ok(Self::Zero),
            "1" => Ok(Self::One),
            "+" => Ok(Self::Plus),
            "-" | "−" => Ok(Self::Minus),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Bb84Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Bell-state label. See the module docs for the (non-standard) convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellLabel {
    /// (|00⟩ + |11⟩)/√2
    PsiPlus,
    /// (|00⟩ − |11⟩)/√2
    PsiMinus,
    /// (|01⟩ + |10⟩)/√2
    PhiPlus,
    /// (|01⟩ − |10⟩)/√2
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        Self::PsiPlus,
        Self::PsiMinus,
        Self::PhiPlus,
        Self::PhiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PsiPlus => "psi+",
            Self::PsiMinus => "psi-",
            Self::PhiPlus => "phi+",
            Self::PhiMinus => "phi-",
        }
    }

    /// Parallel-spin states (ψ±) have even parity.
    pub fn is_parallel(self) -> bool {
        matches!(self, Self::PsiPlus | Self::PsiMinus)
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi+" | "ψ+" | "ψ⁺" => Ok(Self::PsiPlus),
            "psi-" | "ψ-" | "ψ⁻" => Ok(Self::PsiMinus),
            "phi+" | "φ+" | "φ⁺" => Ok(Self::PhiPlus),
            "phi-" | "φ-" | "φ⁻" => Ok(Self::PhiMinus),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which verification string is sent.
///
/// Entangled schemes and BB84 products occupy four qubits so they are compared
/// on equal footing; the W state is the 3-qubit exception.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoyScheme {
    /// One specific string of four BB84 single qubits.
    Bb84Product([Bb84Label; 4]),
    /// Uniform average over all 256 four-qubit BB84 strings.
    Bb84Average,
    /// Two copies of the same Bell pair.
    GvBell(BellLabel),
    /// Four-qubit cluster state.
    Cluster,
    /// Three-qubit W state.
    WState,
}

impl DecoyScheme {
    /// The schemes that have a fidelity cell in the reference table.
    pub fn table_schemes() -> Vec<DecoyScheme> {
        let mut v = vec![Self::Bb84Average];
        v.extend(BellLabel::ALL.into_iter().map(Self::GvBell));
        v.push(Self::Cluster);
        v
    }

    /// Every 4-tuple of BB84 labels, in lexicographic order of `Bb84Label::ALL`.
    pub fn all_bb84_products() -> impl Iterator<Item = DecoyScheme> {
        (0..256usize).map(|k| {
            let pick = |shift: usize| Bb84Label::ALL[(k >> shift) & 3];
            Self::Bb84Product([pick(6), pick(4), pick(2), pick(0)])
        })
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::WState => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for DecoyScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bb84Product(labels) => {
                f.write_str("bb84:")?;
                for l in labels {
                    write!(f, "{l}")?;
                }
                Ok(())
            }
            Self::Bb84Average => f.write_str("bb84"),
            Self::GvBell(label) => f.write_str(label.name()),
            Self::Cluster => f.write_str("cluster"),
            Self::WState => f.write_str("w3"),
        }
    }
}

impl FromStr for DecoyScheme {
    type Err = Error;

    /// Accepts `bb84`, `bb84:<4 labels>` (e.g. `bb84:01+-`), a Bell label,
    /// `cluster`, or `w3`/`w`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "bb84" | "bb84-avg" => return Ok(Self::Bb84Average),
            "cluster" => return Ok(Self::Cluster),
            "w" | "w3" => return Ok(Self::WState),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("bb84:") {
            let labels = rest
                .chars()
                .map(|c| c.to_string().parse::<Bb84Label>())
                .collect::<Result<Vec<_>>>()?;
            let labels: [Bb84Label; 4] = labels
                .try_into()
                .map_err(|_| Error::UnknownLabel(s.to_string()))?;
            return Ok(Self::Bb84Product(labels));
        }
        s.parse::<BellLabel>()
            .map(Self::GvBell)
            .map_err(|_| Error::UnknownLabel(s.to_string()))
    }
}

pub fn make_single(label: Bb84Label) -> PureState {
    let amps = match label {
        Bb84Label::Zero => [1.0, 0.0],
        Bb84Label::One => [0.0, 1.0],
        Bb84Label::Plus => [H, H],
        Bb84Label::Minus => [H, -H],
    };
    PureState::from_real(&amps).expect("basis states are normalized")
}

pub fn make_bell(label: BellLabel) -> PureState {
    let amps = match label {
        BellLabel::PsiPlus => [H, 0.0, 0.0, H],
        BellLabel::PsiMinus => [H, 0.0, 0.0, -H],
        BellLabel::PhiPlus => [0.0, H, H, 0.0],
        BellLabel::PhiMinus => [0.0, H, -H, 0.0],
    };
    PureState::from_real(&amps).expect("Bell states are normalized")
}

/// (|0000⟩ + |0011⟩ + |1100⟩ − |1111⟩)/2
pub fn make_cluster() -> PureState {
    let mut amps = [0.0; 16];
    amps[0b0000] = 0.5;
    amps[0b0011] = 0.5;
    amps[0b1100] = 0.5;
    amps[0b1111] = -0.5;
    PureState::from_real(&amps).expect("cluster state is normalized")
}

/// (|001⟩ + |010⟩ + |100⟩)/√3. Only `n = 3` is supported.
pub fn make_w(n: usize) -> Result<PureState> {
    if n != 3 {
        return Err(Error::UnsupportedQubits(n));
    }
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut amps = vec![ZERO; 8];
    for bit in 0..n {
        amps[1 << bit] = a;
    }
    PureState::normalized(amps)
}

pub fn make_decoy_state(scheme: &DecoyScheme) -> Result<PureState> {
    match *scheme {
        DecoyScheme::Bb84Product(labels) => {
            let mut state = make_single(labels[0]);
            for &l in &labels[1..] {
                state = state.tensor(&make_single(l))?;
            }
            Ok(state)
        }
        DecoyScheme::Bb84Average => Err(Error::AverageOnly),
        DecoyScheme::GvBell(label) => {
            let pair = make_bell(label);
            pair.tensor(&pair)
        }
        DecoyScheme::Cluster => Ok(make_cluster()),
        DecoyScheme::WState => make_w(3),
    }
}
