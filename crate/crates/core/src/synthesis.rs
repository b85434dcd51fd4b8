//! Exact inverse problem: from a target probability profile to coupling
//! strengths, pulse intervals, and phase corrections.
//!
//! Working in the virtual-chain picture, every chain k is characterized by
//! two rotation angles: the departure angle θₖ = 2Jₖ(τₖ − τₖ₊₁) fixing how
//! much amplitude is deposited versus transmitted, and the settling angle
//! 2Jₖτₖ₊₁ fixing how the deposited amplitude splits between the chain's
//! two ends. Both are determined by the target probabilities alone; the
//! branch integers are pinned to mₖ = 0 and nₖ = N, which keeps every
//! Jₖ/J₁ inside (e^{−1/2}, e) and every interval nonnegative.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::chain::{ChainSize, CouplingProfile, SingleExcitationState};
use crate::dynamics;
use crate::error::{Error, Result};

/// Probabilities below this are treated as exactly zero when selecting
/// the degenerate branch (0/0 ratios must resolve deterministically).
pub const ZERO_TOL: f64 = 1e-12;

/// Ratios may stray outside [0, 1] by at most this much before the input
/// is considered invalid rather than noisy.
const RATIO_TOL: f64 = 1e-9;

const PROFILE_SUM_TOL: f64 = 1e-10;

const MAGNITUDE_TOL: f64 = 1e-8;

fn validate_entries(values: &[f64]) -> Result<f64> {
    if values.is_empty() || values.len() % 2 != 0 {
        return Err(Error::OddLength(values.len()));
    }
    let mut sum = 0.0;
    for (i, &p) in values.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::NegativeEntry {
                index: i + 1,
                value: p,
            });
        }
        sum += p;
    }
    Ok(sum)
}

/// Probabilities P₁..P₂N on the physical network sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteProbabilityProfile {
    values: Vec<f64>,
}

impl SiteProbabilityProfile {
    /// Entries must be nonnegative and sum to 1 within 1e-10; the stored
    /// profile is rescaled to sum exactly 1.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(values, PROFILE_SUM_TOL)
    }

    pub(crate) fn with_tolerance(mut values: Vec<f64>, tol: f64) -> Result<Self> {
        let sum = validate_entries(&values)?;
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotNormalized { sum, tol });
        }
        for v in &mut values {
            *v /= sum;
        }
        Ok(Self { values })
    }

    pub fn size(&self) -> ChainSize {
        ChainSize::new(self.values.len() / 2).expect("validated nonempty")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Probabilities q₁..q₂N on the virtual two-site chains: chain k holds
/// (q₂ₖ₋₁, q₂ₖ).
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualProbabilityProfile {
    values: Vec<f64>,
}

impl VirtualProbabilityProfile {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        let sum = validate_entries(&values)?;
        if (sum - 1.0).abs() > PROFILE_SUM_TOL {
            return Err(Error::NotNormalized {
                sum,
                tol: PROFILE_SUM_TOL,
            });
        }
        // The plus branch always receives the larger share of an interior
        // pair; anything else cannot come from a site profile.
        let n = values.len() / 2;
        for k in 1..n {
            let plus = values[2 * k - 1];
            let minus = values[2 * k];
            if plus + ZERO_TOL < minus {
                return Err(Error::PairOrdering {
                    pair: k,
                    plus,
                    minus,
                });
            }
        }
        for v in &mut values {
            *v /= sum;
        }
        Ok(Self { values })
    }

    pub fn size(&self) -> ChainSize {
        ChainSize::new(self.values.len() / 2).expect("validated nonempty")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Map site probabilities to virtual-chain probabilities.
///
/// Boundaries carry over unchanged (sites 1 and 2N are bare); each interior
/// pair splits as (P₂ₖ + P₂ₖ₊₁)/2 ± √(P₂ₖP₂ₖ₊₁), plus branch first.
pub fn site_to_virtual_probabilities(
    p: &SiteProbabilityProfile,
) -> Result<VirtualProbabilityProfile> {
    let values = p.values();
    let n = p.size().n();
    let mut q = vec![0.0; values.len()];
    q[0] = values[0];
    q[values.len() - 1] = values[values.len() - 1];
    for k in 1..n {
        let a = values[2 * k - 1]; // P_{2k}
        let b = values[2 * k]; // P_{2k+1}
        // (√a ± √b)²/2 equals mean ± geometric mean but does not cancel
        // catastrophically when the pair is nearly balanced.
        let (sa, sb) = (a.sqrt(), b.sqrt());
        q[2 * k - 1] = 0.5 * (sa + sb).powi(2);
        q[2 * k] = 0.5 * (sa - sb).powi(2);
    }
    VirtualProbabilityProfile::new(q)
}

/// Map virtual-chain probabilities back to site probabilities; exact
/// inverse of [`site_to_virtual_probabilities`] on its image.
pub fn virtual_to_site_probabilities(
    q: &VirtualProbabilityProfile,
) -> Result<SiteProbabilityProfile> {
    let values = q.values();
    let n = q.size().n();
    let mut p = vec![0.0; values.len()];
    p[0] = values[0];
    p[values.len() - 1] = values[values.len() - 1];
    for k in 1..n {
        let plus = values[2 * k - 1].sqrt();
        let minus = values[2 * k].sqrt();
        p[2 * k - 1] = 0.5 * (plus + minus).powi(2);
        p[2 * k] = 0.5 * (plus - minus).powi(2);
    }
    SiteProbabilityProfile::new(p)
}

/// Residual weights A₀..A_N: Aₖ² is the probability not yet deposited after
/// chain k, Σ_{i>2k} qᵢ. Time independent despite the sin-product definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualWeights {
    values: Vec<f64>,
}

impl ResidualWeights {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Suffix sums S₀..S_N with Sₖ = Σ_{i>2k} qᵢ, taken back to front so each is
/// an exact partial sum of the stored probabilities; S₀ is pinned to 1 and
/// S_N to 0.
fn residual_squares(q: &VirtualProbabilityProfile) -> Vec<f64> {
    let n = q.size().n();
    let values = q.values();
    let mut suffix = vec![0.0; n + 1];
    for k in (1..n).rev() {
        suffix[k] = suffix[k + 1] + values[2 * k] + values[2 * k + 1];
    }
    suffix[0] = 1.0;
    suffix
}

pub fn residual_weights(q: &VirtualProbabilityProfile) -> ResidualWeights {
    let values = residual_squares(q)
        .into_iter()
        .map(|s| s.max(0.0).sqrt())
        .collect();
    ResidualWeights { values }
}

/// Complete pulse schedule: couplings, intervals between pulses, tail times
/// τₖ = Σ_{i≥k} tᵢ (with τ_{N+1} = t_N), and the final local phase layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSchedule {
    size: ChainSize,
    j1: f64,
    couplings: CouplingProfile,
    intervals: Vec<f64>,
    tails: Vec<f64>,
    phases: Vec<f64>,
}

impl SynthesisSchedule {
    /// Assemble and validate a schedule from raw parts (used by the file
    /// reader and by tests that construct schedules directly).
    pub fn from_parts(
        j1: f64,
        couplings: Vec<f64>,
        intervals: Vec<f64>,
        tails: Vec<f64>,
        phases: Vec<f64>,
    ) -> Result<Self> {
        let couplings = CouplingProfile::new(couplings)?;
        let size = couplings.size();
        let n = size.n();
        if j1 <= 0.0 || !j1.is_finite() {
            return Err(Error::NonPositiveScale(j1));
        }
        if intervals.len() != n {
            return Err(Error::InvalidSchedule(format!(
                "expected {n} intervals, got {}",
                intervals.len()
            )));
        }
        if tails.len() != n + 1 {
            return Err(Error::InvalidSchedule(format!(
                "expected {} tail times, got {}",
                n + 1,
                tails.len()
            )));
        }
        if phases.len() != 2 * n {
            return Err(Error::InvalidSchedule(format!(
                "expected {} phases, got {}",
                2 * n,
                phases.len()
            )));
        }
        for (i, &t) in intervals.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidSchedule(format!(
                    "interval t_{} = {t} must be nonnegative",
                    i + 1
                )));
            }
        }
        let scale = tails[0].abs().max(1.0);
        for k in 0..n.saturating_sub(1) {
            let dev = (tails[k] - tails[k + 1] - intervals[k]).abs();
            if dev > 1e-9 * scale {
                return Err(Error::InvalidSchedule(format!(
                    "tail times inconsistent with intervals at k = {}",
                    k + 1
                )));
            }
        }
        if (tails[n] - tails[n - 1]).abs() > 1e-9 * scale
            || (tails[n] - intervals[n - 1]).abs() > 1e-9 * scale
        {
            return Err(Error::InvalidSchedule(
                "final tail time must equal the last interval".into(),
            ));
        }
        Ok(Self {
            size,
            j1,
            couplings,
            intervals,
            tails,
            phases,
        })
    }

    pub fn size(&self) -> ChainSize {
        self.size
    }

    /// The free overall scale J₁; all times are in units of 1/J₁.
    pub fn j1(&self) -> f64 {
        self.j1
    }

    pub fn couplings(&self) -> &CouplingProfile {
        &self.couplings
    }

    /// Intervals t₁..t_N between consecutive pulses.
    pub fn intervals(&self) -> &[f64] {
        &self.intervals
    }

    /// Tail times τ₁..τ_{N+1}.
    pub fn tails(&self) -> &[f64] {
        &self.tails
    }

    /// Final phase layer φ₁..φ₂N, in [0, 2π).
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn with_phases(mut self, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != self.size.sites() {
            return Err(Error::DimensionMismatch {
                left: phases.len(),
                right: self.size.sites(),
            });
        }
        self.phases = phases;
        Ok(self)
    }

    /// Total duration Σtₖ = τ₁.
    pub fn total_time(&self) -> f64 {
        self.tails[0]
    }
}

fn clamped_arccos_sqrt(ratio: f64, chain: usize) -> Result<f64> {
    if !ratio.is_finite() || ratio < -RATIO_TOL || ratio > 1.0 + RATIO_TOL {
        return Err(Error::RatioOutOfRange {
            chain,
            value: ratio,
        });
    }
    Ok(ratio.clamp(0.0, 1.0).sqrt().acos())
}

/// Solve for the schedule generating virtual probabilities `q`, given the
/// free scale `j1`.
///
/// Per chain k the settling angle is 2Jₖτₖ₊₁ = Nπ + arccos √(q₂ₖ₋₁/(q₂ₖ₋₁+q₂ₖ))
/// and the departure angle is θₖ = arccos √((q₂ₖ₋₁+q₂ₖ)/Aₖ₋₁²); both
/// together give 2Jₖτₖ, which determines Jₖ from the previous tail time and
/// the next tail time in turn. Empty chains (pair sum below tolerance) take
/// θₖ = π/2 and settling angle Nπ, which passes all residual amplitude
/// through; once the residual weight Aₖ₋₁ itself vanishes every later chain
/// does the same. The final departure angle θ_N is identically zero —
/// anything beyond 1e-8 signals a corrupted profile.
pub fn solve_schedule(
    q: &VirtualProbabilityProfile,
    j1: f64,
) -> Result<SynthesisSchedule> {
    if j1 <= 0.0 || !j1.is_finite() {
        return Err(Error::NonPositiveScale(j1));
    }
    let n = q.size().n();
    let values = q.values();
    // Aₖ₋₁² as exact partial sums: the final ratio (q₂N₋₁+q₂N)/A_{N−1}² must
    // come out bit-exactly 1, which squaring a rounded square root would
    // spoil.
    let residuals_sq = residual_squares(q);
    let n_pi = n as f64 * PI;

    let mut beta = vec![0.0; n]; // settling angle minus Nπ
    let mut theta = vec![0.0; n]; // departure angle
    for k in 1..=n {
        let q_left = values[2 * k - 2];
        let q_right = values[2 * k - 1];
        let pair = q_left + q_right;
        let a_sq = residuals_sq[k - 1];
        if a_sq <= ZERO_TOL || pair <= ZERO_TOL {
            beta[k - 1] = 0.0;
            theta[k - 1] = if k < n { FRAC_PI_2 } else { 0.0 };
        } else {
            beta[k - 1] = clamped_arccos_sqrt(q_left / pair, k)?;
            theta[k - 1] = clamped_arccos_sqrt(pair / a_sq, k)?;
        }
    }
    // The last chain absorbs whatever remains, so its departure rotation
    // must vanish.
    if theta[n - 1].abs() > 1e-8 {
        return Err(Error::InconsistentTail { theta: theta[n - 1] });
    }
    theta[n - 1] = 0.0;

    let mut couplings = vec![0.0; n];
    let mut intervals = vec![0.0; n];
    let mut tails = vec![0.0; n + 1];
    tails[0] = (n_pi + beta[0] + theta[0]) / (2.0 * j1);
    let mut j_k = j1;
    for k in 0..n {
        let settle = n_pi + beta[k];
        if k > 0 {
            j_k = (settle + theta[k]) / (2.0 * tails[k]);
        }
        couplings[k] = j_k;
        tails[k + 1] = settle / (2.0 * j_k);
        if k + 1 < n {
            intervals[k] = theta[k] / (2.0 * j_k);
        }
    }
    intervals[n - 1] = tails[n];

    let couplings = CouplingProfile::new(couplings)?;
    Ok(SynthesisSchedule {
        size: q.size(),
        j1,
        couplings,
        intervals,
        tails,
        phases: vec![0.0; 2 * n],
    })
}

/// Verdict of the coupling-magnitude bounds for a synthesized schedule.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub ratios: Vec<f64>,
    pub pass: bool,
}

/// Check that every Jₖ/J₁ obeys the per-k product bounds
/// (1 + 1/(2N))^{−(k−1)} ≤ Jₖ/J₁ ≤ (1 + 1/N)^{k−1}, and hence stays inside
/// (e^{−1/2}, e): no exponential growth or decay along the chain.
pub fn coupling_bounds_check(schedule: &SynthesisSchedule) -> BoundsReport {
    let n = schedule.size().n() as f64;
    let ratios = schedule.couplings().ratios();
    let upper_base = 1.0 + 1.0 / n;
    let lower_base = 1.0 / (1.0 + 1.0 / (2.0 * n));
    let slack = 1e-12;
    let mut pass = true;
    for (k, &r) in ratios.iter().enumerate() {
        let upper = upper_base.powi(k as i32);
        let lower = lower_base.powi(k as i32);
        if r > upper * (1.0 + slack) || r < lower * (1.0 - slack) {
            pass = false;
        }
        if r >= std::f64::consts::E || r <= (-0.5f64).exp() {
            pass = false;
        }
    }
    BoundsReport { ratios, pass }
}

/// Per-site phases mapping `generated` onto `target`: φⱼ = arg(targetⱼ) −
/// arg(generatedⱼ) wherever the target has support, 0 elsewhere, wrapped to
/// [0, 2π). The two states must agree in magnitude site by site.
pub fn phase_corrections(
    target: &SingleExcitationState,
    generated: &SingleExcitationState,
) -> Result<Vec<f64>> {
    let t = target.amplitudes();
    let g = generated.amplitudes();
    if t.len() != g.len() {
        return Err(Error::DimensionMismatch {
            left: t.len(),
            right: g.len(),
        });
    }
    let tau = 2.0 * PI;
    let mut phases = Vec::with_capacity(t.len());
    for (site, (tj, gj)) in t.iter().zip(g).enumerate() {
        let (mt, mg) = (tj.norm(), gj.norm());
        if (mt - mg).abs() > MAGNITUDE_TOL {
            return Err(Error::MagnitudeMismatch {
                site: site + 1,
                target: mt,
                generated: mg,
            });
        }
        let phi = if mt > ZERO_TOL {
            (tj.arg() - gj.arg()).rem_euclid(tau)
        } else {
            0.0
        };
        // rem_euclid can round up to exactly 2π for tiny negative inputs.
        phases.push(if phi >= tau { 0.0 } else { phi });
    }
    Ok(phases)
}

/// Full pipeline: site profile → virtual profile → schedule → phase layer.
///
/// The stored phases map the generated state onto the canonical target with
/// real, nonnegative amplitudes √Pⱼ. Each interior pair must carry at least
/// as much weight on its even site as on its odd site: the pair map forgets
/// the order (both orders give the same virtual profile), and the generated
/// state always realizes the descending one.
pub fn synthesize(profile: &SiteProbabilityProfile, j1: f64) -> Result<SynthesisSchedule> {
    let values = profile.values();
    for k in 1..profile.size().n() {
        let (even, odd) = (values[2 * k - 1], values[2 * k]);
        if even + ZERO_TOL < odd {
            return Err(Error::PairNotGenerable {
                even_site: 2 * k,
                even,
                odd,
            });
        }
    }
    let q = site_to_virtual_probabilities(profile)?;
    let schedule = solve_schedule(&q, j1)?;
    let generated = dynamics::evolve_virtual_closed_form(&schedule)?;
    let target = target_state(profile)?;
    let phases = phase_corrections(&target, &generated)?;
    schedule.with_phases(phases)
}

/// The canonical target for a probability profile: amplitudes √Pⱼ, all real
/// and nonnegative. Signs and phases of other targets belong to the phase
/// layer.
pub fn target_state(profile: &SiteProbabilityProfile) -> Result<SingleExcitationState> {
    let amps = profile
        .values()
        .iter()
        .map(|&p| Complex64::new(p.sqrt(), 0.0))
        .collect();
    SingleExcitationState::from_amplitudes(amps)
}
