//! Pulse-timing sensitivity: accumulative timing error, fidelity curves,
//! tolerance thresholds, and the 1/N precision scaling.
//!
//! The error model dilates every interval by the same ε, so the k-th pulse
//! fires k·ε late — the worst case for the transfer cascade. The reference
//! state is the ε = 0 propagation, not the abstract target, and the curve
//! abscissa is the dimensionless J₁ε.

use crate::chain::{build_network_hamiltonian, SingleExcitationState};
use crate::dynamics::{fidelity, Propagator};
use crate::error::{Error, Result};
use crate::states::ProfileFamily;
use crate::synthesis::{synthesize, SiteProbabilityProfile, SynthesisSchedule};

/// Apply the accumulative timing error: every interval tₖ ↦ tₖ + ε.
pub fn perturbed_intervals(schedule: &SynthesisSchedule, epsilon: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(schedule.intervals().len());
    for (i, &t) in schedule.intervals().iter().enumerate() {
        let shifted = t + epsilon;
        // ε = 0 must reproduce the schedule exactly, including collapsed
        // intervals of prefix-absorbing profiles.
        if shifted < 0.0 || (shifted == 0.0 && epsilon != 0.0) {
            return Err(Error::NonPositiveInterval {
                index: i + 1,
                value: shifted,
            });
        }
        out.push(shifted);
    }
    Ok(out)
}

/// Fidelity versus scaled timing error J₁ε for one target profile.
#[derive(Debug, Clone)]
pub struct FidelityCurve {
    pub label: String,
    pub n: usize,
    /// (J₁ε, fidelity) samples, strictly increasing in the first component.
    pub points: Vec<(f64, f64)>,
}

/// Everything needed to evaluate one grid point of a sweep; immutable and
/// shareable across parallel workers. The eigendecomposition is computed
/// once per context.
pub struct SweepContext {
    schedule: SynthesisSchedule,
    propagator: Propagator,
    initial: SingleExcitationState,
    ideal: SingleExcitationState,
}

impl SweepContext {
    pub fn new(profile: &SiteProbabilityProfile, j1: f64) -> Result<Self> {
        let schedule = synthesize(profile, j1)?;
        let h = build_network_hamiltonian(schedule.couplings(), schedule.size())?;
        let propagator = Propagator::new(&h)?;
        let initial = SingleExcitationState::basis_state(schedule.size(), 1)?;
        let ideal = propagator.run_pulsed(schedule.intervals(), true, &initial)?;
        Ok(Self {
            schedule,
            propagator,
            initial,
            ideal,
        })
    }

    pub fn schedule(&self) -> &SynthesisSchedule {
        &self.schedule
    }

    /// Fidelity of the perturbed evolution against the ideal one, at scaled
    /// error J₁ε.
    pub fn fidelity_at(&self, eps_scaled: f64) -> Result<f64> {
        let epsilon = eps_scaled / self.schedule.j1();
        let intervals = perturbed_intervals(&self.schedule, epsilon)?;
        let state = self
            .propagator
            .run_pulsed(&intervals, true, &self.initial)?;
        fidelity(&self.ideal, &state)
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidGrid("grid must start at 0".into()));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidGrid(
                "grid must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Evaluate the fidelity curve over `grid` (values of J₁ε, sorted, starting
/// at 0). Deterministic; grid points are independent.
pub fn fidelity_curve(
    profile: &SiteProbabilityProfile,
    j1: f64,
    grid: &[f64],
    label: impl Into<String>,
) -> Result<FidelityCurve> {
    validate_grid(grid)?;
    let ctx = SweepContext::new(profile, j1)?;
    let points = grid
        .iter()
        .map(|&eps| ctx.fidelity_at(eps).map(|f| (eps, f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityCurve {
        label: label.into(),
        n: profile.size().n(),
        points,
    })
}

/// A tolerance threshold ε*: the scaled error where fidelity first reaches
/// `f_star`. `unbounded` marks curves that never drop below the level
/// within the sampled range, in which case `eps_star` is the grid maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub eps_star: f64,
    pub unbounded: bool,
}

/// Locate the first crossing of `f_star` along the curve and refine it by
/// bisection on the piecewise-linear interpolant to relative precision
/// 1e-3. Non-monotone curves report the first crossing.
pub fn tolerance_threshold(curve: &FidelityCurve, f_star: f64) -> Result<Threshold> {
    if !(f_star > 0.0 && f_star < 1.0) {
        return Err(Error::InvalidFidelityLevel(f_star));
    }
    let pts = &curve.points;
    if pts.is_empty() {
        return Err(Error::InvalidGrid("curve has no points".into()));
    }
    let Some(hit) = pts.iter().position(|&(_, f)| f < f_star) else {
        return Ok(Threshold {
            eps_star: pts.last().unwrap().0,
            unbounded: true,
        });
    };
    if hit == 0 {
        return Ok(Threshold {
            eps_star: pts[0].0,
            unbounded: false,
        });
    }
    let (x0, f0) = pts[hit - 1];
    let (x1, f1) = pts[hit];
    let interp = |x: f64| f0 + (f1 - f0) * (x - x0) / (x1 - x0);
    let (mut lo, mut hi) = (x0, x1);
    while hi - lo > 1e-3 * hi.max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if interp(mid) >= f_star {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        eps_star: 0.5 * (lo + hi),
        unbounded: false,
    })
}

/// Thresholds for several fidelity levels on one curve; higher levels give
/// tighter tolerances.
pub fn thresholds_for_levels(
    curve: &FidelityCurve,
    levels: &[f64],
) -> Result<Vec<(f64, Threshold)>> {
    levels
        .iter()
        .map(|&f| tolerance_threshold(curve, f).map(|t| (f, t)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub n: usize,
    pub eps_star: f64,
    pub n_times_eps_star: f64,
    pub unbounded: bool,
}

/// Precision-scaling summary across chain sizes: if ε* ∝ 1/N, the products
/// N·ε* are flat and their max/min ratio stays near 1.
#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub f_star: f64,
    pub rows: Vec<ScalingRow>,
    pub product_ratio: f64,
}

/// Span of the per-N sweep grid in units of J₁ε·N: each size is swept over
/// [0, SCALING_GRID_SPAN/N], which comfortably brackets the 0.99 threshold
/// for both stock families.
pub const SCALING_GRID_SPAN: f64 = 0.5;

pub fn scaling_grid(n: usize, steps: usize) -> Vec<f64> {
    let max = SCALING_GRID_SPAN / n as f64;
    (0..=steps)
        .map(|i| max * i as f64 / steps as f64)
        .collect()
}

/// Compute ε*(N) for each size in `n_list` and report the N·ε* products.
pub fn scaling_analysis(
    family: ProfileFamily,
    n_list: &[usize],
    j1: f64,
    f_star: f64,
    steps: usize,
) -> Result<SensitivityReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidGrid("empty size list".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidGrid("steps must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let profile = family.profile(n)?;
        let grid = scaling_grid(n, steps);
        let curve = fidelity_curve(&profile, j1, &grid, family.label())?;
        let th = tolerance_threshold(&curve, f_star)?;
        rows.push(ScalingRow {
            n,
            eps_star: th.eps_star,
            n_times_eps_star: n as f64 * th.eps_star,
            unbounded: th.unbounded,
        });
    }
    let products: Vec<f64> = rows.iter().map(|r| r.n_times_eps_star).collect();
    let max = products.iter().cloned().fold(f64::MIN, f64::max);
    let min = products.iter().cloned().fold(f64::MAX, f64::min);
    Ok(SensitivityReport {
        f_star,
        rows,
        product_ratio: max / min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::w_state_profile;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perturbation_shifts_every_interval() {
        let p = w_state_profile(3).unwrap();
        let s = synthesize(&p, 1.0).unwrap();
        let shifted = perturbed_intervals(&s, 0.1).unwrap();
        for (a, b) in shifted.iter().zip(s.intervals()) {
            assert_abs_diff_eq!(a - b, 0.1, epsilon = 1e-15);
        }
        let same = perturbed_intervals(&s, 0.0).unwrap();
        assert_eq!(same, s.intervals());
        // Cumulative pulse times shift by (ε, 2ε, ...).
        let eps = 0.05;
        let shifted = perturbed_intervals(&s, eps).unwrap();
        let mut cum_orig = 0.0;
        let mut cum_new = 0.0;
        for (k, (a, b)) in shifted.iter().zip(s.intervals()).enumerate() {
            cum_new += a;
            cum_orig += b;
            assert_abs_diff_eq!(cum_new - cum_orig, (k + 1) as f64 * eps, epsilon = 1e-12);
        }
        // Too negative: some interval would go nonpositive.
        let huge = -(s.intervals().iter().cloned().fold(f64::MAX, f64::min) + 1e-9);
        assert!(perturbed_intervals(&s, huge).is_err());
    }

    #[test]
    fn curve_starts_at_unit_fidelity() {
        let p = w_state_profile(4).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.002).collect();
        let curve = fidelity_curve(&p, 1.0, &grid, "w").unwrap();
        assert_eq!(curve.points.len(), 11);
        assert_abs_diff_eq!(curve.points[0].1, 1.0, epsilon = 1e-10);
        // Larger timing error degrades fidelity overall.
        assert!(curve.points.last().unwrap().1 < curve.points[0].1);
    }

    #[test]
    fn grid_validation() {
        let p = w_state_profile(2).unwrap();
        assert!(fidelity_curve(&p, 1.0, &[], "w").is_err());
        assert!(fidelity_curve(&p, 1.0, &[0.1, 0.2], "w").is_err());
        assert!(fidelity_curve(&p, 1.0, &[0.0, 0.2, 0.1], "w").is_err());
        assert!(fidelity_curve(&p, 1.0, &[0.0, 0.0], "w").is_err());
    }

    #[test]
    fn threshold_on_synthetic_curve() {
        let curve = FidelityCurve {
            label: "synthetic".into(),
            n: 2,
            points: vec![(0.0, 1.0), (0.01, 0.99), (0.02, 0.96)],
        };
        let th = tolerance_threshold(&curve, 0.99).unwrap();
        assert!(!th.unbounded);
        assert_abs_diff_eq!(th.eps_star, 0.01, epsilon = 1e-5 + 0.01 * 1e-3);

        let th = tolerance_threshold(&curve, 0.5).unwrap();
        assert!(th.unbounded);
        assert_abs_diff_eq!(th.eps_star, 0.02, epsilon = 1e-15);

        assert!(tolerance_threshold(&curve, 0.0).is_err());
        assert!(tolerance_threshold(&curve, 1.0).is_err());
    }

    #[test]
    fn threshold_interpolates_between_points() {
        let curve = FidelityCurve {
            label: "synthetic".into(),
            n: 2,
            points: vec![(0.0, 1.0), (0.02, 0.98)],
        };
        // Linear crossing of 0.99 sits at the midpoint.
        let th = tolerance_threshold(&curve, 0.99).unwrap();
        assert_abs_diff_eq!(th.eps_star, 0.01, epsilon = 0.02 * 1e-3);
    }

    #[test]
    fn levels_give_decreasing_tolerances() {
        let p = w_state_profile(6).unwrap();
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.002).collect();
        let curve = fidelity_curve(&p, 1.0, &grid, "w").unwrap();
        let ths = thresholds_for_levels(&curve, &[0.90, 0.95, 0.99]).unwrap();
        assert!(ths[0].1.eps_star >= ths[1].1.eps_star);
        assert!(ths[1].1.eps_star >= ths[2].1.eps_star);
    }

    #[test]
    fn single_size_scaling_has_unit_ratio() {
        let report = scaling_analysis(ProfileFamily::W, &[6], 1.0, 0.99, 60).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_abs_diff_eq!(report.product_ratio, 1.0, epsilon = 1e-12);
        assert!(!report.rows[0].unbounded);
    }
}
