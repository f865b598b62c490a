//! Fidelity of a received state against the prepared decoy, plus the
//! closed-form table and the harness that checks one against the other.
//!
//! The fidelity used throughout is `F = ⟨ψ|ρ|ψ⟩`, which for a pure reference
//! state equals the square of the conventional `Tr√(σ^½ ρ σ^½)`.

use std::thread;

use crate::channels::{apply_noise, NoiseFamily, NoiseModel};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, PureState, TOL};
use crate::states::{make_decoy_state, BellLabel, DecoyScheme};

/// Simulated fidelities of one scheme over a parameter grid, with the
/// closed-form curve when one exists.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityReport {
    pub scheme: DecoyScheme,
    pub noise: NoiseFamily,
    pub grid: Vec<f64>,
    pub simulated: Vec<f64>,
    /// `None` for schemes without a table cell (the W state).
    pub closed_form: Option<Vec<f64>>,
    /// `max |simulated − closed_form|` over the grid.
    pub max_abs_deviation: Option<f64>,
}

impl FidelityReport {
    pub(crate) fn new(
        scheme: DecoyScheme,
        noise: NoiseFamily,
        grid: Vec<f64>,
        simulated: Vec<f64>,
        closed_form: Option<Vec<f64>>,
    ) -> Self {
        let max_abs_deviation = closed_form.as_ref().map(|cf| {
            simulated
                .iter()
                .zip(cf)
                .map(|(s, c)| (s - c).abs())
                .fold(0.0, f64::max)
        });
        Self {
            scheme,
            noise,
            grid,
            simulated,
            closed_form,
            max_abs_deviation,
        }
    }
}

/// `⟨ψ|ρ|ψ⟩`. Errors if the imaginary part exceeds 1e-12.
pub fn fidelity(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    let value = rho.expectation(psi)?;
    if value.im.abs() >= TOL {
        return Err(Error::ImaginaryFidelity(value.im));
    }
    Ok(value.re)
}

/// `Tr√(σ^½ ρ σ^½)` with `σ = |ψ⟩⟨ψ|`, evaluated through the eigenvalues of
/// `σ ρ σ` (a pure `σ` is its own square root).
pub fn conventional_fidelity(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: psi.dim(),
        });
    }
    let sigma = psi.density();
    let inner = sigma.matrix().matmul(rho.matrix())?.matmul(sigma.matrix())?;
    let eigenvalues = inner.hermitian_eigenvalues()?;
    // Rounding leaves ~1e-17 eigenvalues on the null space, and their square
    // roots would swamp the result; treat them as exact zeros.
    let largest = eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-14 * largest.max(1.0);
    Ok(eigenvalues
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| l.sqrt())
        .sum())
}

/// Prepares the scheme's state, sends it through the channel and returns `F`.
pub fn simulate_fidelity(scheme: &DecoyScheme, noise: &NoiseModel) -> Result<f64> {
    let psi = make_decoy_state(scheme)?;
    let received = apply_noise(&psi.density(), noise)?;
    fidelity(&psi, &received)
}

/// Mean of `simulate_fidelity` over all 256 four-qubit BB84 strings.
pub fn bb84_average_fidelity(noise: &NoiseModel) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for scheme in DecoyScheme::all_bb84_products() {
        sum += simulate_fidelity(&scheme, noise)?;
        count += 1;
    }
    Ok(sum / count as f64)
}

/// Simulated fidelity for any scheme, averaging when the scheme is the BB84 average.
pub fn scheme_fidelity(scheme: &DecoyScheme, noise: &NoiseModel) -> Result<f64> {
    match scheme {
        DecoyScheme::Bb84Average => bb84_average_fidelity(noise),
        _ => simulate_fidelity(scheme, noise),
    }
}

/// Closed-form table value for a (scheme, noise) cell.
///
/// Merged table cells are expanded as follows: under phase damping every
/// entangled scheme shares `(2−2η+η²)²/4`; under collective rotation ψ⁻ and φ⁺
/// share `cos⁴2θ`.
pub fn closed_form(scheme: &DecoyScheme, noise: &NoiseModel) -> Result<f64> {
    use BellLabel::*;
    use NoiseModel::*;

    let shared_pair = |eta: f64| (2.0 - 2.0 * eta + eta * eta).powi(2) / 4.0;

    let value = match (*scheme, *noise) {
        (DecoyScheme::Bb84Average, AmplitudeDamping { eta }) => {
            (3.0 + (1.0 - eta).sqrt() - eta).powi(4) / 256.0
        }
        (DecoyScheme::Bb84Average, PhaseDamping { eta }) => (eta - 4.0).powi(4) / 256.0,
        (DecoyScheme::Bb84Average, CollectiveDephasing { phi }) => {
            (3.0 + phi.cos()).powi(4) / 256.0
        }
        (DecoyScheme::Bb84Average, CollectiveRotation { theta }) => theta.cos().powi(8),

        (DecoyScheme::GvBell(PsiPlus | PsiMinus), AmplitudeDamping { eta }) => shared_pair(eta),
        (DecoyScheme::GvBell(PhiPlus | PhiMinus), AmplitudeDamping { eta }) => (eta - 1.0).powi(2),
        (DecoyScheme::GvBell(_) | DecoyScheme::Cluster, PhaseDamping { eta }) => shared_pair(eta),
        (DecoyScheme::GvBell(PsiPlus | PsiMinus) | DecoyScheme::Cluster, CollectiveDephasing { phi }) => {
            phi.cos().powi(4)
        }
        (DecoyScheme::GvBell(PhiPlus | PhiMinus), CollectiveDephasing { .. }) => 1.0,
        (DecoyScheme::GvBell(PsiPlus | PhiMinus), CollectiveRotation { .. }) => 1.0,
        (DecoyScheme::GvBell(PsiMinus | PhiPlus), CollectiveRotation { theta }) => {
            (2.0 * theta).cos().powi(4)
        }

        (DecoyScheme::Cluster, AmplitudeDamping { eta }) => {
            (4.0 - 8.0 * eta + 6.0 * eta.powi(2) - 2.0 * eta.powi(3) + eta.powi(4)) / 4.0
        }
        (DecoyScheme::Cluster, CollectiveRotation { theta }) => theta.cos().powi(8),

        (DecoyScheme::WState | DecoyScheme::Bb84Product(_), _) => {
            return Err(Error::NoClosedForm(scheme.to_string()));
        }
    };
    Ok(value)
}

/// Every (scheme, noise family) pair that has a closed-form entry.
pub fn table_cells() -> Vec<(DecoyScheme, NoiseFamily)> {
    DecoyScheme::table_schemes()
        .into_iter()
        .flat_map(|s| NoiseFamily::ALL.into_iter().map(move |f| (s, f)))
        .collect()
}

/// `points` evenly spaced values from `start` to `end`, both included.
pub fn uniform_grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::GridTooSmall);
    }
    let step = (end - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { end } else { start + step * i as f64 })
        .collect())
}

/// Compares simulation with the closed forms on every table cell.
pub fn verify_table(grid_size: usize) -> Result<Vec<FidelityReport>> {
    verify_table_with(grid_size, closed_form)
}

/// `verify_table` against an arbitrary closed-form evaluator. Cells are
/// evaluated on separate threads; the output order follows `table_cells()`.
pub fn verify_table_with<F>(grid_size: usize, closed: F) -> Result<Vec<FidelityReport>>
where
    F: Fn(&DecoyScheme, &NoiseModel) -> Result<f64> + Sync,
{
    if grid_size < 2 {
        return Err(Error::GridTooSmall);
    }
    let cells = table_cells();
    let closed = &closed;
    thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&(scheme, family)| {
                scope.spawn(move || -> Result<FidelityReport> {
                    let (lo, hi) = family.default_range();
                    let grid = uniform_grid(lo, hi, grid_size)?;
                    let mut simulated = Vec::with_capacity(grid.len());
                    let mut expected = Vec::with_capacity(grid.len());
                    for &p in &grid {
                        let noise = family.with_parameter(p)?;
                        simulated.push(scheme_fidelity(&scheme, &noise)?);
                        expected.push(closed(&scheme, &noise)?);
                    }
                    Ok(FidelityReport::new(
                        scheme,
                        family,
                        grid,
                        simulated,
                        Some(expected),
                    ))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification worker panicked"))
            .collect()
    })
}
