//! Parameter sweeps, crossover search, decoherence-free detection and ranking.

use std::thread;

use crate::channels::{NoiseFamily, NoiseModel};
use crate::error::{Error, Result};
use crate::fidelity::{closed_form, scheme_fidelity, uniform_grid, FidelityReport};
use crate::states::{BellLabel, DecoyScheme};

/// Fidelities closer than this are reported as a tie.
pub const TIE_TOL: f64 = 1e-9;
/// Absolute tolerance on the crossover location.
pub const CROSSOVER_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub schemes: Vec<DecoyScheme>,
    pub family: NoiseFamily,
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl SweepSpec {
    /// Sweep over the family's natural range.
    pub fn over_default_range(schemes: Vec<DecoyScheme>, family: NoiseFamily, points: usize) -> Self {
        let (start, end) = family.default_range();
        Self {
            schemes,
            family,
            start,
            end,
            points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::GridTooSmall);
        }
        if !(self.start < self.end) {
            return Err(Error::InvalidRange {
                start: self.start,
                end: self.end,
            });
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidArgument("no schemes to sweep".into()));
        }
        Ok(())
    }
}

/// One report per scheme, in input order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<FidelityReport>> {
    spec.validate()?;
    let grid = uniform_grid(spec.start, spec.end, spec.points)?;
    let noises = grid
        .iter()
        .map(|&p| spec.family.with_parameter(p))
        .collect::<Result<Vec<_>>>()?;

    spec.schemes
        .iter()
        .map(|scheme| {
            let simulated = evaluate_parallel(scheme, &noises)?;
            let closed = match noises
                .iter()
                .map(|n| closed_form(scheme, n))
                .collect::<Result<Vec<_>>>()
            {
                Ok(values) => Some(values),
                Err(Error::NoClosedForm(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(FidelityReport::new(
                *scheme,
                spec.family,
                grid.clone(),
                simulated,
                closed,
            ))
        })
        .collect()
}

fn evaluate_parallel(scheme: &DecoyScheme, noises: &[NoiseModel]) -> Result<Vec<f64>> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = noises.len().div_ceil(workers).max(1);
    thread::scope(|scope| {
        let handles: Vec<_> = noises
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|n| scheme_fidelity(scheme, n))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(noises.len());
        for h in handles {
            out.extend(h.join().expect("sweep worker panicked")?);
        }
        Ok(out)
    })
}

/// Parameter in `[lo, hi]` where the fidelities of `a` and `b` cross, by bisection.
pub fn find_crossover(
    a: &DecoyScheme,
    b: &DecoyScheme,
    family: NoiseFamily,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::InvalidRange { start: lo, end: hi });
    }
    let gap = |p: f64| -> Result<f64> {
        let noise = family.with_parameter(p)?;
        Ok(scheme_fidelity(a, &noise)? - scheme_fidelity(b, &noise)?)
    };

    let (mut lo, mut hi) = (lo, hi);
    let mut g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if g_lo == 0.0 && g_hi != 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 && g_lo != 0.0 {
        return Ok(hi);
    }
    if !(g_lo.signum() * g_hi.signum() < 0.0) {
        return Err(Error::NoCrossover { lo, hi });
    }

    while hi - lo > CROSSOVER_TOL {
        let mid = 0.5 * (lo + hi);
        let g_mid = gap(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// True iff the fidelity stays within `tol` of 1 at `samples` evenly spaced
/// parameters over the family's natural range.
pub fn is_decoherence_free(
    scheme: &DecoyScheme,
    family: NoiseFamily,
    samples: usize,
    tol: f64,
) -> Result<bool> {
    if samples < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 samples, got {samples}"
        )));
    }
    let (lo, hi) = family.default_range();
    for p in uniform_grid(lo, hi, samples)? {
        let f = scheme_fidelity(scheme, &family.with_parameter(p)?)?;
        if (f - 1.0).abs() >= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    pub noise: NoiseModel,
    /// Descending by fidelity.
    pub ordered: Vec<(DecoyScheme, f64)>,
    /// Consecutive runs of `ordered` whose fidelities differ by less than `TIE_TOL`.
    pub ties: Vec<Vec<DecoyScheme>>,
}

impl Ranking {
    pub fn top(&self) -> &[DecoyScheme] {
        &self.ties[0]
    }
}

/// The schemes `recommend` compares by default.
pub fn default_candidates() -> Vec<DecoyScheme> {
    let mut v = vec![DecoyScheme::Bb84Average];
    v.extend(BellLabel::ALL.into_iter().map(DecoyScheme::GvBell));
    v.push(DecoyScheme::Cluster);
    v
}

/// Ranks the BB84 average, the four Bell-pair schemes and the cluster state.
pub fn recommend(noise: &NoiseModel) -> Result<Ranking> {
    recommend_among(noise, &default_candidates())
}

/// Ranks the given schemes by simulated fidelity. The result does not depend
/// on the order of `schemes`.
pub fn recommend_among(noise: &NoiseModel, schemes: &[DecoyScheme]) -> Result<Ranking> {
    if schemes.is_empty() {
        return Err(Error::InvalidArgument("no schemes to rank".into()));
    }
    let mut ordered = schemes
        .iter()
        .map(|s| scheme_fidelity(s, noise).map(|f| (*s, f)))
        .collect::<Result<Vec<_>>>()?;
    ordered.sort_by(|(sa, fa), (sb, fb)| fb.total_cmp(fa).then(sa.cmp(sb)));
    ordered.dedup_by_key(|(s, _)| *s);

    let mut ties: Vec<Vec<DecoyScheme>> = Vec::new();
    let mut head = f64::NAN;
    for &(scheme, f) in &ordered {
        match ties.last_mut() {
            Some(group) if head - f < TIE_TOL => group.push(scheme),
            _ => {
                ties.push(vec![scheme]);
                head = f;
            }
        }
    }
    Ok(Ranking {
        noise: *noise,
        ordered,
        ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    const PSI_P: DecoyScheme = DecoyScheme::GvBell(BellLabel::PsiPlus);
    const PSI_M: DecoyScheme = DecoyScheme::GvBell(BellLabel::PsiMinus);
    const PHI_P: DecoyScheme = DecoyScheme::GvBell(BellLabel::PhiPlus);
    const PHI_M: DecoyScheme = DecoyScheme::GvBell(BellLabel::PhiMinus);

    #[test]
    fn sweep_rejects_bad_specs() {
        let spec = SweepSpec::over_default_range(vec![PSI_P], NoiseFamily::PhaseDamping, 1);
        assert_eq!(sweep(&spec), Err(Error::GridTooSmall));
        let mut spec = SweepSpec::over_default_range(vec![PSI_P], NoiseFamily::PhaseDamping, 5);
        spec.end = spec.start;
        assert!(matches!(sweep(&spec), Err(Error::InvalidRange { .. })));
        spec.end = 1.0;
        spec.schemes.clear();
        assert!(sweep(&spec).is_err());
    }

    #[test]
    fn cd_sweep_hits_zero_at_quarter_turn() {
        // 5 points over [0, 2π] land exactly on π/2.
        let spec = SweepSpec::over_default_range(
            vec![PSI_P, DecoyScheme::Cluster],
            NoiseFamily::CollectiveDephasing,
            5,
        );
        let reports = sweep(&spec).unwrap();
        for r in &reports {
            assert!((r.grid[1] - FRAC_PI_2).abs() < 1e-15);
            assert!(r.simulated[1].abs() < 1e-12);
            assert!(r.max_abs_deviation.unwrap() < 1e-12);
        }
    }

    #[test]
    fn sweep_without_closed_form() {
        let spec = SweepSpec::over_default_range(
            vec![DecoyScheme::WState],
            NoiseFamily::AmplitudeDamping,
            3,
        );
        let r = &sweep(&spec).unwrap()[0];
        assert!(r.closed_form.is_none() && r.max_abs_deviation.is_none());
        assert_eq!(r.simulated.len(), 3);
    }

    #[test]
    fn crossover_errors() {
        assert!(matches!(
            find_crossover(&PHI_M, &PHI_M, NoiseFamily::CollectiveRotation, 0.0, PI),
            Err(Error::NoCrossover { .. })
        ));
        assert!(find_crossover(&PHI_M, &PSI_M, NoiseFamily::CollectiveRotation, 1.0, 1.0).is_err());
    }

    #[test]
    fn decoherence_free_examples() {
        let cd = NoiseFamily::CollectiveDephasing;
        let cr = NoiseFamily::CollectiveRotation;
        assert!(is_decoherence_free(&PHI_M, cd, 16, 1e-12).unwrap());
        assert!(is_decoherence_free(&PHI_M, cr, 16, 1e-12).unwrap());
        assert!(is_decoherence_free(&PSI_P, cr, 16, 1e-12).unwrap());
        assert!(is_decoherence_free(&DecoyScheme::WState, cd, 16, 1e-12).unwrap());
        assert!(!is_decoherence_free(&PSI_P, cd, 16, 1e-12).unwrap());
        assert!(!is_decoherence_free(&PHI_P, NoiseFamily::AmplitudeDamping, 8, 1e-12).unwrap());
        assert!(is_decoherence_free(&PHI_M, cd, 4, 1e-12).is_err());
    }

    #[test]
    fn recommend_cr() {
        let r = recommend(&NoiseModel::CollectiveRotation { theta: 0.7 }).unwrap();
        let mut top = r.top().to_vec();
        top.sort();
        assert_eq!(top, vec![PSI_P, PHI_M]);
        assert!((r.ordered[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recommend_pd() {
        let r = recommend(&NoiseModel::PhaseDamping { eta: 0.5 }).unwrap();
        assert_eq!(r.top(), &[DecoyScheme::Bb84Average]);
        assert!((r.ordered[0].1 - 3.5f64.powi(4) / 256.0).abs() < 1e-12);
        assert_eq!(r.ties.len(), 2);
        assert_eq!(r.ties[1].len(), 5);
        assert!((r.ordered[1].1 - 1.25f64.powi(2) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn recommend_ad_high_rate() {
        let r = recommend(&NoiseModel::AmplitudeDamping { eta: 0.9 }).unwrap();
        let mut top = r.top().to_vec();
        top.sort();
        assert_eq!(top, vec![PSI_P, PSI_M]);
        let pos = |s| r.ordered.iter().position(|(x, _)| *x == s).unwrap();
        assert!(pos(DecoyScheme::Bb84Average) > pos(PSI_M));
    }

    #[test]
    fn recommend_is_order_independent() {
        let noise = NoiseModel::CollectiveDephasing { phi: 2.2 };
        let mut schemes = default_candidates();
        schemes.push(DecoyScheme::WState);
        let a = recommend_among(&noise, &schemes).unwrap();
        schemes.reverse();
        schemes.swap(1, 4);
        let b = recommend_among(&noise, &schemes).unwrap();
        assert_eq!(a, b);
        assert!(a.top().contains(&DecoyScheme::WState));
        assert!(recommend_among(&noise, &[]).is_err());
    }

    #[test]
    fn default_range_is_full_turn_for_angles() {
        let spec = SweepSpec::over_default_range(vec![PHI_P], NoiseFamily::CollectiveRotation, 3);
        assert_eq!(spec.end, TAU);
    }
}
