//! Target-state profile generators.
//!
//! The stock profiles live on the even-numbered leg of the ladder; the odd
//! sites act as ancillas and carry no probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::synthesis::SiteProbabilityProfile;

/// Equal weight 1/N on every even site, zero on odd sites.
pub fn w_state_profile(n: usize) -> Result<SiteProbabilityProfile> {
    if n == 0 {
        return Err(Error::EmptyChain);
    }
    let mut p = vec![0.0; 2 * n];
    for k in 0..n {
        p[2 * k + 1] = 1.0 / n as f64;
    }
    SiteProbabilityProfile::new(p)
}

/// Gaussian weights exp(−(k − (N+1)/2)²/2σ²) on even sites, renormalized so
/// the discrete profile sums to 1 (the continuous 1/√(2πσ²) factor does not
/// normalize the discrete sum).
pub fn gaussian_state_profile(n: usize, sigma: f64) -> Result<SiteProbabilityProfile> {
    if n == 0 {
        return Err(Error::EmptyChain);
    }
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::Parse(format!("sigma must be positive, got {sigma}")));
    }
    let center = (n as f64 + 1.0) / 2.0;
    let mut p = vec![0.0; 2 * n];
    let mut sum = 0.0;
    for k in 1..=n {
        let d = k as f64 - center;
        let w = (-d * d / (2.0 * sigma * sigma)).exp();
        p[2 * k - 1] = w;
        sum += w;
    }
    for v in &mut p {
        *v /= sum;
    }
    SiteProbabilityProfile::new(p)
}

/// Probability that [`random_profile`] zeroes out a block of consecutive
/// sites, creating an empty virtual chain downstream.
pub const ZERO_BLOCK_PROBABILITY: f64 = 0.25;

/// Deterministic random profile for property tests. Entries are uniform
/// draws normalized to sum 1; with probability [`ZERO_BLOCK_PROBABILITY`]
/// (and N ≥ 3) a run of four consecutive sites is zeroed so the degenerate
/// empty-chain branch gets exercised. Interior pairs are put in descending
/// order, the canonical form every generated state realizes (the pair map
/// is blind to the order, so this loses no coverage).
pub fn random_profile(
    n: usize,
    seed: u64,
    even_support_only: bool,
) -> Result<SiteProbabilityProfile> {
    if n == 0 {
        return Err(Error::EmptyChain);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
    if even_support_only {
        for k in 0..n {
            p[2 * k] = 0.0;
        }
    }
    for k in 1..n {
        if p[2 * k - 1] < p[2 * k] {
            p.swap(2 * k - 1, 2 * k);
        }
    }
    if n >= 3 && rng.random::<f64>() < ZERO_BLOCK_PROBABILITY {
        // Zero sites 2k..2k+3 (1-based) for a random interior k; the pair
        // map then yields two consecutive zero virtual probabilities.
        let k = rng.random_range(1..n - 1);
        for idx in (2 * k - 1)..(2 * k + 3).min(2 * n) {
            p[idx] = 0.0;
        }
    }
    // Keep the profile synthesizable even if the zero block wiped most of
    // the weight.
    let sum: f64 = p.iter().sum();
    if sum <= 0.0 {
        p[2 * n - 1] = 1.0;
    }
    let sum: f64 = p.iter().sum();
    for v in &mut p {
        *v /= sum;
    }
    SiteProbabilityProfile::new(p)
}

/// Read a profile from a file in the formats accepted by
/// [`crate::formats::parse_profile`]: one probability per line or a single
/// comma-separated line, `#` comments allowed. The sum may deviate from 1
/// by at most 1e-6 and is renormalized exactly.
pub fn custom_profile_from_file(path: impl AsRef<std::path::Path>) -> Result<SiteProbabilityProfile> {
    let text = std::fs::read_to_string(path)?;
    crate::formats::parse_profile(&text)
}

/// Families of target profiles indexed by chain size, used by scaling
/// sweeps and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileFamily {
    W,
    Gaussian { sigma: f64 },
}

impl ProfileFamily {
    pub fn profile(&self, n: usize) -> Result<SiteProbabilityProfile> {
        match self {
            ProfileFamily::W => w_state_profile(n),
            ProfileFamily::Gaussian { sigma } => gaussian_state_profile(n, *sigma),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProfileFamily::W => "w".into(),
            ProfileFamily::Gaussian { sigma } => format!("gaussian(sigma={sigma})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn w_profiles() {
        let p = w_state_profile(2).unwrap();
        assert_eq!(p.values(), &[0.0, 0.5, 0.0, 0.5]);

        let p = w_state_profile(10).unwrap();
        for k in 0..10 {
            assert_eq!(p.values()[2 * k], 0.0);
            assert_abs_diff_eq!(p.values()[2 * k + 1], 0.1, epsilon = 1e-15);
        }
        let sum: f64 = p.values().iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);

        assert!(w_state_profile(0).is_err());
    }

    #[test]
    fn gaussian_peak_matches_direct_sum() {
        // Independent evaluation: sum the weights directly and divide.
        let n = 10;
        let weights: Vec<f64> = (1..=n)
            .map(|k| {
                let d = k as f64 - 5.5;
                (-d * d / 2.0).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let expected_peak = weights[4] / total; // site 10 ↔ k = 5

        let p = gaussian_state_profile(n, 1.0).unwrap();
        assert_abs_diff_eq!(p.values()[9], expected_peak, epsilon = 1e-14);
        assert_abs_diff_eq!(p.values()[11], expected_peak, epsilon = 1e-14);
        assert_abs_diff_eq!(p.values()[9], 0.35206, epsilon = 5e-5);
        assert!(gaussian_state_profile(10, 0.0).is_err());
        assert!(gaussian_state_profile(10, -1.0).is_err());
    }

    #[test]
    fn wide_gaussian_approaches_w() {
        let w = w_state_profile(8).unwrap();
        let mut last = f64::INFINITY;
        for sigma in [10.0, 100.0, 1000.0] {
            let g = gaussian_state_profile(8, sigma).unwrap();
            let dev = g
                .values()
                .iter()
                .zip(w.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < last, "sigma={sigma}: {dev} !< {last}");
            last = dev;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn random_profile_deterministic() {
        let a = random_profile(7, 42, false).unwrap();
        let b = random_profile(7, 42, false).unwrap();
        assert_eq!(a.values(), b.values());
        let c = random_profile(7, 43, false).unwrap();
        assert_ne!(a.values(), c.values());
        let sum: f64 = a.values().iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_profile_even_support() {
        for seed in 0..20 {
            let p = random_profile(6, seed, true).unwrap();
            for k in 0..6 {
                assert_eq!(p.values()[2 * k], 0.0, "seed {seed}");
            }
        }
    }

    #[test]
    fn random_profile_pairs_are_canonical() {
        for seed in 0..50 {
            let p = random_profile(9, seed, false).unwrap();
            for k in 1..9 {
                assert!(p.values()[2 * k - 1] >= p.values()[2 * k], "seed {seed}");
            }
        }
    }

    #[test]
    fn random_profile_hits_zero_blocks() {
        let mut hits = 0;
        for seed in 0..200 {
            let p = random_profile(8, seed, false).unwrap();
            let has_block = p
                .values()
                .windows(4)
                .any(|w| w.iter().all(|&x| x == 0.0));
            if has_block {
                hits += 1;
            }
        }
        // ~25% draw rate; demanding a broad window keeps the test stable.
        assert!((20..=80).contains(&hits), "zero-block hits: {hits}");
    }
}
