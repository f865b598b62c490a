//! Noise-channel simulation for decoy-qubit eavesdropping checks.
//!
//! Decoy strings built from BB84 single qubits, pairs of Bell states, the
//! four-qubit cluster state or the three-qubit W state are sent through
//! amplitude damping, phase damping, collective dephasing or collective
//! rotation noise. The crate computes the resulting fidelity by brute-force
//! density-matrix simulation, checks it against closed-form expressions, and
//! ranks the schemes per channel.
//!
//! ```
//! use decoy_noise::{fidelity, NoiseModel, DecoyScheme, BellLabel};
//!
//! let noise = NoiseModel::CollectiveRotation { theta: 0.4 };
//! let f = fidelity::simulate_fidelity(&DecoyScheme::GvBell(BellLabel::PhiMinus), &noise).unwrap();
//! assert!((f - 1.0).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod channels;
pub mod cli;
pub mod eavesdrop;
pub mod error;
pub mod fidelity;
pub mod linalg;
pub mod states;

pub use channels::{NoiseFamily, NoiseModel};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, PureState};
pub use states::{Bb84Label, BellLabel, DecoyScheme};
