//! Two independent evolution engines: the closed-form virtual-chain model
//! and dense propagation of the full network with interleaved pulses.
//!
//! Agreement between the two to ~1e-9 is the central cross-check of the
//! whole artifact; tests never compare either engine against itself.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::{
    apply_pulse, build_network_hamiltonian, virtual_basis_transform, ChainSize, CouplingProfile,
    NetworkHamiltonian, SingleExcitationState,
};
use crate::error::{Error, Result};
use crate::synthesis::SynthesisSchedule;

/// Rotation of a two-site chain with coupling J over time t:
/// (a, b) ↦ (cos(Jt)·a − i·sin(Jt)·b, −i·sin(Jt)·a + cos(Jt)·b).
pub fn two_site_rotation(
    j: f64,
    t: f64,
    amps: (Complex64, Complex64),
) -> (Complex64, Complex64) {
    let (c, s) = ((j * t).cos(), (j * t).sin());
    let mis = Complex64::new(0.0, -s);
    (c * amps.0 + mis * amps.1, mis * amps.0 + c * amps.1)
}

/// Spectral decomposition of a network Hamiltonian, reusable across many
/// evolution intervals: decompose once, exponentiate eigenvalues per call.
#[derive(Debug, Clone)]
pub struct Propagator {
    size: ChainSize,
    eigenvalues: DVector<f64>,
    // Eigenvector matrix, stored complex so products with states need no
    // per-call conversion.
    vectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &NetworkHamiltonian) -> Result<Self> {
        let dim = h.matrix().nrows();
        let eig = nalgebra::linalg::SymmetricEigen::try_new(
            h.matrix().clone(),
            f64::EPSILON,
            100 * dim.max(16),
        )
        .ok_or(Error::EigenFailure { dim })?;
        let vectors = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        Ok(Self {
            size: h.size(),
            eigenvalues: eig.eigenvalues,
            vectors,
        })
    }

    pub fn size(&self) -> ChainSize {
        self.size
    }

    /// The unitary e^{−iHt} as a dense matrix.
    pub fn evolution(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues
                .iter()
                .map(|&lambda| Complex64::from_polar(1.0, -lambda * t)),
        );
        &self.vectors * DMatrix::from_diagonal(&phases) * self.vectors.adjoint()
    }

    fn evolve_amps(&self, amps: &mut DVector<Complex64>, t: f64) {
        let mut coeffs = self.vectors.ad_mul(&*amps);
        for (c, &lambda) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -lambda * t);
        }
        *amps = &self.vectors * coeffs;
    }

    /// Evolve a state for time t under the free dynamics.
    pub fn evolve(&self, state: &SingleExcitationState, t: f64) -> SingleExcitationState {
        let mut amps = DVector::from_column_slice(state.amplitudes());
        self.evolve_amps(&mut amps, t);
        SingleExcitationState::from_parts_unchecked(self.size, amps.as_slice().to_vec())
    }

    /// Run the pulse-interleaved sequence: free evolution over each interval
    /// with a Z pulse on site 2k+1 after interval k (no pulse after the
    /// last). With `pulses` false the pulses are skipped and the dynamics
    /// stays confined to the initial virtual chain.
    pub fn run_pulsed(
        &self,
        intervals: &[f64],
        pulses: bool,
        initial: &SingleExcitationState,
    ) -> Result<SingleExcitationState> {
        let n = self.size.n();
        if intervals.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: intervals.len(),
            });
        }
        if initial.size() != self.size {
            return Err(Error::DimensionMismatch {
                left: initial.size().sites(),
                right: self.size.sites(),
            });
        }
        let mut amps = DVector::from_column_slice(initial.amplitudes());
        for (k, &t) in intervals.iter().enumerate() {
            self.evolve_amps(&mut amps, t);
            if pulses && k + 1 < n {
                apply_pulse(amps.as_mut_slice(), 2 * (k + 1) + 1);
            }
        }
        Ok(SingleExcitationState::from_parts_unchecked(
            self.size,
            amps.as_slice().to_vec(),
        ))
    }
}

/// e^{−iHt} via full spectral decomposition of the real symmetric H.
pub fn expm_symmetric(h: &NetworkHamiltonian, t: f64) -> Result<DMatrix<Complex64>> {
    Ok(Propagator::new(h)?.evolution(t))
}

/// Dense propagation of the full network: build H, then alternate free
/// evolutions over `intervals` with Z pulses at the interval boundaries.
pub fn propagate_full(
    j: &CouplingProfile,
    intervals: &[f64],
    pulses: bool,
    initial: &SingleExcitationState,
) -> Result<SingleExcitationState> {
    let h = build_network_hamiltonian(j, j.size())?;
    Propagator::new(&h)?.run_pulsed(intervals, pulses, initial)
}

/// Closed-form evolution in the virtual-chain picture.
///
/// Chain k ends up with amplitude (−i)^{k−1}·Aₖ₋₁·cos θₖ·cos(2Jₖτₖ₊₁) on its
/// left site and (−i)^k·Aₖ₋₁·cos θₖ·sin(2Jₖτₖ₊₁) on its right site, where
/// θₖ = 2Jₖ(τₖ − τₖ₊₁) and Aₖ₋₁ = Π_{i<k} sin(2Jᵢtᵢ) — all read straight
/// off the schedule, independent of how it was synthesized. The phase
/// layer is not applied here.
pub fn evolve_virtual_closed_form(schedule: &SynthesisSchedule) -> Result<SingleExcitationState> {
    let n = schedule.size().n();
    let js = schedule.couplings().values();
    let tails = schedule.tails();
    let intervals = schedule.intervals();

    let mut virt = DVector::<Complex64>::zeros(2 * n);
    // Powers of (−i) cycle with period 4.
    let cycle = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let mut residual = 1.0; // A_{k−1}
    for k in 0..n {
        let theta = 2.0 * js[k] * (tails[k] - tails[k + 1]);
        let settle = 2.0 * js[k] * tails[k + 1];
        let weight = residual * theta.cos();
        virt[2 * k] = cycle[k % 4] * weight * settle.cos();
        virt[2 * k + 1] = cycle[(k + 1) % 4] * weight * settle.sin();
        residual *= (2.0 * js[k] * intervals[k]).sin();
    }

    let t = virtual_basis_transform(schedule.size()).map(|x| Complex64::new(x, 0.0));
    let site = t.transpose() * virt;
    SingleExcitationState::from_amplitudes(site.as_slice().to_vec())
}

/// Squared overlap |⟨a|b⟩|².
pub fn fidelity(a: &SingleExcitationState, b: &SingleExcitationState) -> Result<f64> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch {
            left: a.size().sites(),
            right: b.size().sites(),
        });
    }
    let overlap: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    // Rounding in the dot product can push the overlap of two unit vectors
    // a few ulp past 1.
    Ok(overlap.norm_sqr().min(1.0))
}

/// One sampled point of an evolution trace.
#[derive(Debug, Clone)]
pub struct TraceSample {
    pub time: f64,
    pub probabilities: Vec<f64>,
}

/// Per-site probability trace of the pulsed evolution, sampled uniformly
/// within each interval (pulses fire at the interval boundaries). The
/// first row is the initial state at t = 0.
pub fn sample_evolution(
    j: &CouplingProfile,
    intervals: &[f64],
    samples_per_interval: usize,
    initial: &SingleExcitationState,
) -> Result<Vec<TraceSample>> {
    if samples_per_interval == 0 {
        return Err(Error::InvalidGrid(
            "samples_per_interval must be at least 1".into(),
        ));
    }
    let n = j.size().n();
    if intervals.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: intervals.len(),
        });
    }
    let h = build_network_hamiltonian(j, j.size())?;
    let prop = Propagator::new(&h)?;

    let mut out = Vec::with_capacity(1 + n * samples_per_interval);
    out.push(TraceSample {
        time: 0.0,
        probabilities: initial.probabilities(),
    });
    let mut amps = DVector::from_column_slice(initial.amplitudes());
    let mut elapsed = 0.0;
    for (k, &t) in intervals.iter().enumerate() {
        let dt = t / samples_per_interval as f64;
        for s in 1..=samples_per_interval {
            prop.evolve_amps(&mut amps, dt);
            out.push(TraceSample {
                time: elapsed + dt * s as f64,
                probabilities: amps.iter().map(|a| a.norm_sqr()).collect(),
            });
        }
        elapsed += t;
        if k + 1 < n {
            apply_pulse(amps.as_mut_slice(), 2 * (k + 1) + 1);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{site_to_virtual_probabilities, solve_schedule, SiteProbabilityProfile};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn w2_schedule() -> SynthesisSchedule {
        let p = SiteProbabilityProfile::new(vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        let q = site_to_virtual_probabilities(&p).unwrap();
        solve_schedule(&q, 1.0).unwrap()
    }

    #[test]
    fn two_site_rotation_examples() {
        let one = Complex64::ONE;
        let (a, b) = two_site_rotation(0.8, 0.0, (one, Complex64::ZERO));
        assert_eq!((a, b), (one, Complex64::ZERO));

        let (a, b) = two_site_rotation(1.0, PI / 2.0, (one, Complex64::ZERO));
        assert_abs_diff_eq!(a.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.im, -1.0, epsilon = 1e-15);

        let (a, b) = two_site_rotation(
            0.7,
            1.3,
            (Complex64::new(0.3, 0.4), Complex64::new(-0.5, 0.2)),
        );
        let norm = a.norm_sqr() + b.norm_sqr();
        assert_abs_diff_eq!(norm, 0.09 + 0.16 + 0.25 + 0.04, epsilon = 1e-14);
    }

    #[test]
    fn expm_identity_at_zero_time() {
        let j = CouplingProfile::new(vec![1.0, 0.5, 2.0]).unwrap();
        let h = build_network_hamiltonian(&j, j.size()).unwrap();
        let u = expm_symmetric(&h, 0.0).unwrap();
        let dev = (u - DMatrix::<Complex64>::identity(6, 6))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-13);
    }

    #[test]
    fn expm_two_site_closed_form() {
        let j = CouplingProfile::new(vec![0.6]).unwrap();
        let h = build_network_hamiltonian(&j, j.size()).unwrap();
        for t in [0.3, 1.7, 5.0] {
            let u = expm_symmetric(&h, t).unwrap();
            let (c, s) = ((1.2 * t).cos(), (1.2 * t).sin());
            assert_abs_diff_eq!(u[(0, 0)].re, c, epsilon = 1e-13);
            assert_abs_diff_eq!(u[(0, 1)].im, -s, epsilon = 1e-13);
            assert_abs_diff_eq!(u[(1, 0)].im, -s, epsilon = 1e-13);
            assert_abs_diff_eq!(u[(1, 1)].re, c, epsilon = 1e-13);
        }
    }

    #[test]
    fn expm_is_unitary() {
        let j = CouplingProfile::new(vec![1.1, 0.4, 0.9, 1.7]).unwrap();
        let h = build_network_hamiltonian(&j, j.size()).unwrap();
        let u = expm_symmetric(&h, 2.31).unwrap();
        let gram = &u * u.adjoint();
        let dev = (gram - DMatrix::<Complex64>::identity(8, 8))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn closed_form_n1_transfer() {
        let s = SynthesisSchedule::from_parts(
            1.0,
            vec![1.0],
            vec![0.75 * PI],
            vec![0.75 * PI, 0.75 * PI],
            vec![0.0, 0.0],
        )
        .unwrap();
        let state = evolve_virtual_closed_form(&s).unwrap();
        assert_abs_diff_eq!(state.amplitudes()[0].norm(), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(state.amplitudes()[1].re, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(state.amplitudes()[1].im, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn closed_form_w2_amplitudes() {
        let state = evolve_virtual_closed_form(&w2_schedule()).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let amps = state.amplitudes();
        assert_abs_diff_eq!(amps[0].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[1].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[1].im, -inv, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[2].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[3].re, -inv, epsilon = 1e-12);
        assert_abs_diff_eq!(amps[3].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_trivial_schedule() {
        let s = SynthesisSchedule::from_parts(
            1.0,
            vec![1.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0; 6],
        )
        .unwrap();
        let state = evolve_virtual_closed_form(&s).unwrap();
        assert_abs_diff_eq!(state.amplitudes()[0].re, 1.0, epsilon = 1e-14);
        for a in &state.amplitudes()[1..] {
            assert_abs_diff_eq!(a.norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn engines_agree_on_w2() {
        let s = w2_schedule();
        let closed = evolve_virtual_closed_form(&s).unwrap();
        let initial = SingleExcitationState::basis_state(s.size(), 1).unwrap();
        let dense = propagate_full(s.couplings(), s.intervals(), true, &initial).unwrap();
        for (a, b) in closed.amplitudes().iter().zip(dense.amplitudes()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-10);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn propagate_zero_times_is_identity() {
        let j = CouplingProfile::new(vec![1.0, 2.0]).unwrap();
        let initial = SingleExcitationState::basis_state(j.size(), 2).unwrap();
        let out = propagate_full(&j, &[0.0, 0.0], true, &initial).unwrap();
        for (a, b) in out.amplitudes().iter().zip(initial.amplitudes()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn propagate_n1_transfer() {
        let j = CouplingProfile::new(vec![1.0]).unwrap();
        let initial = SingleExcitationState::basis_state(j.size(), 1).unwrap();
        let out = propagate_full(&j, &[0.75 * PI], true, &initial).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[1].im, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn fidelity_examples() {
        let s2 = ChainSize::new(1).unwrap();
        let e1 = SingleExcitationState::basis_state(s2, 1).unwrap();
        let e2 = SingleExcitationState::basis_state(s2, 2).unwrap();
        assert_abs_diff_eq!(fidelity(&e1, &e1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&e1, &e2).unwrap(), 0.0, epsilon = 1e-15);

        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus = SingleExcitationState::from_amplitudes(vec![
            Complex64::new(inv, 0.0),
            Complex64::new(inv, 0.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(fidelity(&e1, &plus).unwrap(), 0.5, epsilon = 1e-14);

        let bigger = SingleExcitationState::basis_state(ChainSize::new(2).unwrap(), 1).unwrap();
        assert!(fidelity(&e1, &bigger).is_err());
    }

    #[test]
    fn trace_endpoints_match_propagation() {
        let s = w2_schedule();
        let initial = SingleExcitationState::basis_state(s.size(), 1).unwrap();
        let trace = sample_evolution(s.couplings(), s.intervals(), 1, &initial).unwrap();
        assert_eq!(trace.len(), 3);

        let total: f64 = s.intervals().iter().sum();
        assert_abs_diff_eq!(trace.last().unwrap().time, total, epsilon = 1e-12);

        let fin = propagate_full(s.couplings(), s.intervals(), true, &initial).unwrap();
        for (p, q) in trace.last().unwrap().probabilities.iter().zip(fin.probabilities()) {
            assert_abs_diff_eq!(p, &q, epsilon = 1e-12);
        }
        // W target: probabilities (0, ½, 0, ½) at the end of the sequence.
        let final_probs = &trace.last().unwrap().probabilities;
        assert_abs_diff_eq!(final_probs[1], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(final_probs[3], 0.5, epsilon = 1e-10);

        for row in &trace {
            let sum: f64 = row.probabilities.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
        }
    }
}
