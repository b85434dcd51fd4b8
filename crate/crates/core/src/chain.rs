//! Network topology and the single-excitation-sector operators.
//!
//! The network is a quasi-one-dimensional ladder of 2N sites whose
//! single-excitation Hamiltonian decomposes, in the ± pair basis, into N
//! independent two-site chains with off-diagonal element exactly 2Jₖ.
//! The two end couplings carry a factor √2 relative to the edge labels:
//! the boundary identifications (site 1 and site 2N are bare sites, not ±
//! superpositions) force it, and it is the unique choice that makes every
//! virtual block come out as [[0, 2Jₖ], [2Jₖ, 0]].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of virtual two-site chains; the physical network has 2N sites,
/// indexed 1..=2N on all public interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSize {
    n: usize,
}

impl ChainSize {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyChain);
        }
        Ok(Self { n })
    }

    /// Number of virtual chains N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of physical sites, 2N.
    pub fn sites(&self) -> usize {
        2 * self.n
    }
}

/// Engineered XX coupling strengths J₁..J_N, one per virtual chain.
/// Units of energy with ħ = 1, so J·t is dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    values: Vec<f64>,
}

impl CouplingProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyChain);
        }
        for (i, &j) in values.iter().enumerate() {
            if j <= 0.0 || !j.is_finite() {
                return Err(Error::NonPositiveCoupling {
                    index: i + 1,
                    value: j,
                });
            }
        }
        Ok(Self { values })
    }

    pub fn size(&self) -> ChainSize {
        ChainSize { n: self.values.len() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Ratios Jₖ/J₁.
    pub fn ratios(&self) -> Vec<f64> {
        let j1 = self.values[0];
        self.values.iter().map(|j| j / j1).collect()
    }
}

/// The 2N×2N single-excitation-sector Hamiltonian matrix.
#[derive(Debug, Clone)]
pub struct NetworkHamiltonian {
    size: ChainSize,
    matrix: DMatrix<f64>,
}

impl NetworkHamiltonian {
    pub fn size(&self) -> ChainSize {
        self.size
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Build the single-excitation Hamiltonian for coupling profile `j`.
///
/// Entry pattern (1-based sites): boundary couplings √2·J₁ on (1,2), (1,3)
/// and √2·J_N on (2N−2, 2N), −√2·J_N on (2N−1, 2N); each interior block
/// k = 2..N−1 contributes +Jₖ on (2k−2, 2k), (2k−2, 2k+1) and −Jₖ on
/// (2k−1, 2k), (2k−1, 2k+1). For N = 1 the network collapses to two sites
/// with off-diagonal 2J₁. Diagonal is zero throughout.
pub fn build_network_hamiltonian(
    j: &CouplingProfile,
    size: ChainSize,
) -> Result<NetworkHamiltonian> {
    if j.values().len() != size.n() {
        return Err(Error::LengthMismatch {
            expected: size.n(),
            actual: j.values().len(),
        });
    }
    let n = size.n();
    let dim = size.sites();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let js = j.values();

    if n == 1 {
        h[(0, 1)] = 2.0 * js[0];
        h[(1, 0)] = 2.0 * js[0];
        return Ok(NetworkHamiltonian { size, matrix: h });
    }

    let root2 = std::f64::consts::SQRT_2;
    // Left boundary: |1⟩ couples to the + combination of sites (2, 3).
    h[(0, 1)] = root2 * js[0];
    h[(0, 2)] = root2 * js[0];
    // Interior blocks: pair (2k−2, 2k−1) couples to pair (2k, 2k+1).
    for k in 2..n {
        let a = 2 * k - 3; // site 2k−2
        let b = 2 * k - 2; // site 2k−1
        let c = 2 * k - 1; // site 2k
        let d = 2 * k; // site 2k+1
        h[(a, c)] = js[k - 1];
        h[(a, d)] = js[k - 1];
        h[(b, c)] = -js[k - 1];
        h[(b, d)] = -js[k - 1];
    }
    // Right boundary: the − combination of (2N−2, 2N−1) couples to |2N⟩.
    h[(2 * n - 3, 2 * n - 1)] = root2 * js[n - 1];
    h[(2 * n - 2, 2 * n - 1)] = -root2 * js[n - 1];

    // Symmetrize the strictly-upper pattern written above.
    for r in 0..dim {
        for c in (r + 1)..dim {
            h[(c, r)] = h[(r, c)];
        }
    }
    Ok(NetworkHamiltonian { size, matrix: h })
}

/// Orthogonal change of basis from physical sites to the virtual-chain
/// ordering.
///
/// Rows, in order: e₁, then (e₂ₖ + e₂ₖ₊₁)/√2 and (e₂ₖ − e₂ₖ₊₁)/√2 for each
/// interior pair k = 1..N−1, then e₂N. Chain k occupies rows (2k−1, 2k),
/// so T·H·Tᵀ is block diagonal with blocks [[0, 2Jₖ], [2Jₖ, 0]].
pub fn virtual_basis_transform(size: ChainSize) -> DMatrix<f64> {
    let n = size.n();
    let dim = size.sites();
    let mut t = DMatrix::<f64>::zeros(dim, dim);
    let inv_root2 = std::f64::consts::FRAC_1_SQRT_2;
    t[(0, 0)] = 1.0;
    for k in 1..n {
        // Sites 2k, 2k+1 are 0-based columns 2k−1, 2k.
        t[(2 * k - 1, 2 * k - 1)] = inv_root2;
        t[(2 * k - 1, 2 * k)] = inv_root2;
        t[(2 * k, 2 * k - 1)] = inv_root2;
        t[(2 * k, 2 * k)] = -inv_root2;
    }
    t[(dim - 1, dim - 1)] = 1.0;
    t
}

/// The single-site Z gate restricted to the single-excitation sector:
/// diagonal with −1 at `site` (1-based) and +1 elsewhere. The overall
/// phase from spectator qubits cancels in every fidelity and is dropped.
pub fn pulse_operator(site: usize, size: ChainSize) -> Result<DMatrix<f64>> {
    let dim = size.sites();
    if site == 0 || site > dim {
        return Err(Error::SiteOutOfRange { site, max: dim });
    }
    let mut z = DMatrix::<f64>::identity(dim, dim);
    z[(site - 1, site - 1)] = -1.0;
    Ok(z)
}

/// Apply `pulse_operator(site)` in place: negate one amplitude.
pub(crate) fn apply_pulse(amps: &mut [Complex64], site: usize) {
    amps[site - 1] = -amps[site - 1];
}

const STATE_NORM_TOL: f64 = 1e-6;

/// A normalized state in the single-excitation sector, stored as 2N complex
/// site-basis amplitudes.
#[derive(Debug, Clone)]
pub struct SingleExcitationState {
    size: ChainSize,
    amplitudes: Vec<Complex64>,
}

impl SingleExcitationState {
    /// Construct from site-basis amplitudes. The squared norm must be 1
    /// within 1e-6; the stored amplitudes are rescaled to unit norm exactly.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || len % 2 != 0 {
            return Err(Error::OddLength(len));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::StateNotNormalized {
                norm_sq,
                tol: STATE_NORM_TOL,
            });
        }
        let scale = 1.0 / norm_sq.sqrt();
        let amplitudes = amplitudes.into_iter().map(|a| a * scale).collect();
        Ok(Self {
            size: ChainSize { n: len / 2 },
            amplitudes,
        })
    }

    /// The excitation localized on one site (1-based).
    pub fn basis_state(size: ChainSize, site: usize) -> Result<Self> {
        let dim = size.sites();
        if site == 0 || site > dim {
            return Err(Error::SiteOutOfRange { site, max: dim });
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[site - 1] = Complex64::ONE;
        Ok(Self { size, amplitudes })
    }

    pub fn size(&self) -> ChainSize {
        self.size
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Per-site probabilities |ψⱼ|².
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Apply a local phase layer e^{iφⱼ} per site.
    pub fn apply_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                left: phases.len(),
                right: self.amplitudes.len(),
            });
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(phases)
            .map(|(a, &phi)| a * Complex64::from_polar(1.0, phi))
            .collect();
        Ok(Self {
            size: self.size,
            amplitudes,
        })
    }

    /// Repackage amplitudes coming out of a unitary evolution, squeezing
    /// out the ~1e-15 norm drift the propagator accumulates.
    pub(crate) fn from_parts_unchecked(size: ChainSize, mut amplitudes: Vec<Complex64>) -> Self {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let scale = 1.0 / norm_sq.sqrt();
        for a in &mut amplitudes {
            *a *= scale;
        }
        Self { size, amplitudes }
    }
}
