//! The two-mode collective basis |ψ_n^N⟩ and the named states built on it.
//!
//! For symmetric coupling (g2/g1 = 1) every N-phonon manifold of the two-mode
//! Fock space carries an orthonormal basis ordered by the bright index n:
//! n = N is the maximally bright state |B^N⟩ (coupling enhanced to √(2N)·g)
//! and n = 0 the perfectly dark state |D^N⟩ (no coupling at all). The basis
//! coefficients are
//!
//! ```text
//! |ψ_n^N⟩ = Σ_m C_{m,n}^N |m, N−m⟩
//! C_{m,n}^N = √(n!(N−n)!/2^N) Σ_q (−1)^{m−q} √(m!(N−m)!)
//!             / [q!(n−q)!(m−q)!(N−n−m+q)!]
//! ```
//!
//! with the summation index running over max(0, n+m−N) ≤ q ≤ min(n, m), the
//! unique range keeping every factorial argument non-negative. The inner sum
//! is evaluated in exact integer arithmetic (it is a Krawtchouk-type integer),
//! so orthonormality holds to machine precision.
//!
//! Equivalently, |ψ_n^N⟩ is the Fock state |n⟩_b|N−n⟩_d of the normal modes
//! b = (a₁+a₂)/√2 and d = (a₂−a₁)/√2; the independent ladder-based
//! construction in [`crate::verify`] uses that route to cross-check this one.

use std::collections::BTreeMap;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::hilbert::{displacement, Level, PureState, SpaceConfig};
use crate::{Error, Result};

/// Largest total phonon number supported by the exact coefficient evaluation.
pub const MAX_TOTAL_PHONONS: usize = 34;

/// Residual tolerance for truncated coherent-state construction.
pub const COHERENT_RESIDUAL_TOL: f64 = 1e-6;

/// Label of a collective basis state |ψ_n^N⟩.
///
/// `total` is the total phonon number N, `bright` the bright index n with
/// 0 ≤ n ≤ N; n = N labels the maximally bright state and n = 0 the perfectly
/// dark one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CollectiveIndex {
    #[serde(rename = "N")]
    pub total: usize,
    #[serde(rename = "n")]
    pub bright: usize,
}

impl CollectiveIndex {
    pub fn new(total: usize, bright: usize) -> Result<Self> {
        if bright > total {
            return Err(Error::InvalidArgument(format!(
                "bright index {bright} exceeds total phonon number {total}"
            )));
        }
        Ok(CollectiveIndex { total, bright })
    }
}

/// Amplitudes of a motional state in the collective basis, plus the norm of
/// the component outside the truncated N range.
#[derive(Debug, Clone)]
pub struct CollectiveDecomposition {
    pub entries: BTreeMap<CollectiveIndex, C64>,
    pub residual: f64,
}

impl CollectiveDecomposition {
    /// Amplitude on |ψ_n^N⟩ (zero if absent).
    pub fn amplitude(&self, total: usize, bright: usize) -> C64 {
        self.entries.get(&CollectiveIndex { total, bright }).copied().unwrap_or(C64::ZERO)
    }

    /// |amplitude|² on |ψ_n^N⟩.
    pub fn probability(&self, total: usize, bright: usize) -> f64 {
        self.amplitude(total, bright).norm_sqr()
    }

    /// Squared norm captured by the decomposition.
    pub fn captured_norm_sqr(&self) -> f64 {
        self.entries.values().map(|z| z.norm_sqr()).sum()
    }

    /// Serializes to `{entries: [{N, n, re, im}], residual}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            #[serde(rename = "N")]
            total: usize,
            n: usize,
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct Dump {
            entries: Vec<Entry>,
            residual: f64,
        }
        let dump = Dump {
            entries: self
                .entries
                .iter()
                .map(|(idx, amp)| Entry {
                    total: idx.total,
                    n: idx.bright,
                    re: amp.re,
                    im: amp.im,
                })
                .collect(),
            residual: self.residual,
        };
        serde_json::to_string(&dump).expect("decomposition serialization cannot fail")
    }
}

// Factorials as u128; 34! is the largest fitting value.
fn factorial(n: usize) -> u128 {
    const TABLE_LEN: usize = MAX_TOTAL_PHONONS + 1;
    static TABLE: std::sync::OnceLock<[u128; TABLE_LEN]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [1u128; TABLE_LEN];
        for i in 1..TABLE_LEN {
            t[i] = t[i - 1] * i as u128;
        }
        t
    });
    table[n]
}

fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    (factorial(n) / (factorial(k) * factorial(n - k))) as i128
}

/// Coefficient C_{m,n}^N of |m, N−m⟩ in |ψ_n^N⟩.
///
/// The alternating inner sum is the integer
/// K = Σ_q (−1)^{m−q} C(n,q) C(N−n, m−q) over max(0, n+m−N) ≤ q ≤ min(n, m),
/// and C_{m,n}^N = K·√(m!(N−m)! / (2^N n!(N−n)!)).
pub fn collective_coeff(total: usize, bright: usize, m: usize) -> Result<f64> {
    if bright > total || m > total {
        return Err(Error::InvalidArgument(format!(
            "indices (N={total}, n={bright}, m={m}) out of range"
        )));
    }
    if total > MAX_TOTAL_PHONONS {
        return Err(Error::InvalidArgument(format!(
            "total phonon number {total} exceeds the exact-arithmetic limit {MAX_TOTAL_PHONONS}"
        )));
    }
    let (n_big, m_big) = (total, m);
    let q_min = (bright + m_big).saturating_sub(n_big);
    let q_max = bright.min(m_big);
    let mut k_sum: i128 = 0;
    for q in q_min..=q_max {
        let sign = if (m_big - q) % 2 == 0 { 1 } else { -1 };
        k_sum += sign * binomial(bright, q) * binomial(n_big - bright, m_big - q);
    }
    let numer = factorial(m_big) as f64 * factorial(n_big - m_big) as f64;
    let denom = 2f64.powi(n_big as i32)
        * factorial(bright) as f64
        * factorial(n_big - bright) as f64;
    Ok(k_sum as f64 * (numer / denom).sqrt())
}

/// Coefficient vector (C_{0,n}^N, ..., C_{N,n}^N).
pub fn collective_coeffs(total: usize, bright: usize) -> Result<Vec<f64>> {
    (0..=total).map(|m| collective_coeff(total, bright, m)).collect()
}

/// The normalized collective ket Σ_m C_{m,n}^N |m, N−m⟩ tensored with the
/// requested electronic level.
pub fn collective_state(
    space: SpaceConfig,
    idx: CollectiveIndex,
    electronic: Level,
) -> Result<PureState> {
    if idx.bright > idx.total {
        return Err(Error::InvalidArgument(format!(
            "bright index {} exceeds total {}",
            idx.bright, idx.total
        )));
    }
    if idx.total > space.n_max_1.min(space.n_max_2) {
        return Err(Error::InvalidArgument(format!(
            "total phonon number {} exceeds the smaller Fock cutoff {}",
            idx.total,
            space.n_max_1.min(space.n_max_2)
        )));
    }
    if electronic.index() >= space.electronic_levels {
        return Err(Error::InvalidArgument(format!(
            "level {electronic:?} not present on a {}-level space",
            space.electronic_levels
        )));
    }
    let mut amplitudes = Array1::zeros(space.dim());
    for m in 0..=idx.total {
        let coeff = collective_coeff(idx.total, idx.bright, m)?;
        amplitudes[space.index_of(electronic, m, idx.total - m)] = C64::new(coeff, 0.0);
    }
    PureState::new(space, amplitudes, 1.0)
}

/// Maximally bright N-phonon state |B^N⟩ = |ψ_N^N⟩ on |↓⟩.
pub fn bright_state(space: SpaceConfig, total: usize) -> Result<PureState> {
    collective_state(space, CollectiveIndex { total, bright: total }, Level::Down)
}

/// Perfectly dark N-phonon state |D^N⟩ = |ψ_0^N⟩ on |↓⟩.
pub fn dark_state(space: SpaceConfig, total: usize) -> Result<PureState> {
    collective_state(space, CollectiveIndex { total, bright: 0 }, Level::Down)
}

/// Poisson tail probability P(n > n_max) for mean |α|², evaluated by direct
/// summation of the retained weight.
pub fn coherent_tail(alpha_abs: f64, n_max: usize) -> f64 {
    let lambda = alpha_abs * alpha_abs;
    if lambda == 0.0 {
        return 0.0;
    }
    let mut term = (-lambda).exp();
    let mut kept = term;
    for n in 1..=n_max {
        term *= lambda / n as f64;
        kept += term;
    }
    (1.0 - kept).max(0.0)
}

/// Dropped-tail probability of displacing by (α₁, α₂) on the given cutoffs:
/// 1 − Π_m (1 − tail_m).
pub fn displacement_residual(space: &SpaceConfig, alpha1: C64, alpha2: C64) -> f64 {
    let tail1 = coherent_tail(alpha1.norm(), space.n_max_1);
    let tail2 = coherent_tail(alpha2.norm(), space.n_max_2);
    (1.0 - (1.0 - tail1) * (1.0 - tail2)).max(0.0)
}

/// Two-mode coherent state |α, e^{iφ}α⟩ on |↓⟩, built by applying truncated
/// displacement exponentials to the vacuum and renormalizing.
///
/// The dropped Poisson tail probability beyond the cutoffs is the truncation
/// residual; residuals above 1e-6 are an error. The guideline cutoff for a
/// clean construction is n_max ≥ |α|² + 6·|α| + 4.
pub fn coherent_two_mode(space: SpaceConfig, alpha: C64, phi: f64) -> Result<PureState> {
    let alpha2_mag = alpha;
    let residual = displacement_residual(&space, alpha, alpha2_mag);
    if residual > COHERENT_RESIDUAL_TOL {
        return Err(Error::Truncation { residual, tolerance: COHERENT_RESIDUAL_TOL });
    }
    let alpha2 = alpha * C64::from_polar(1.0, phi);
    let d1 = displacement(space, crate::hilbert::Mode::One, alpha);
    let d2 = displacement(space, crate::hilbert::Mode::Two, alpha2);
    let vac = PureState::ground(space);
    let displaced = d2.apply(&d1.apply(&vac)?)?;
    displaced.normalized()
}

/// Product state ½(|0⟩+|1⟩)(|0⟩+e^{iφ}|1⟩) on the motional factors, with the
/// electronic factor in |↓⟩.
pub fn upsilon_state(space: SpaceConfig, phi: f64) -> Result<PureState> {
    let half = C64::new(0.5, 0.0);
    let phase = C64::from_polar(0.5, phi);
    let mut amplitudes = Array1::zeros(space.dim());
    amplitudes[space.index_of(Level::Down, 0, 0)] = half;
    amplitudes[space.index_of(Level::Down, 1, 0)] = half;
    amplitudes[space.index_of(Level::Down, 0, 1)] = phase;
    amplitudes[space.index_of(Level::Down, 1, 1)] = phase;
    PureState::new(space, amplitudes, 1.0)
}

/// Decomposes a state into the collective basis.
///
/// The state's electronic factor must be a single level; the decomposition
/// acts on the motional factors. Amplitudes are reported for every manifold
/// N ≤ min(n_max_1, n_max_2); the norm of everything outside that range goes
/// into `residual`.
pub fn decompose(state: &PureState) -> Result<CollectiveDecomposition> {
    let space = state.space;
    let mut support = None;
    for e in 0..space.electronic_levels {
        let level = Level::from_index(e).unwrap();
        if state.level_population(level) > 1e-12 {
            if support.is_some() {
                return Err(Error::InvalidArgument(
                    "decompose requires the electronic factor to be a single level".into(),
                ));
            }
            support = Some(level);
        }
    }
    let level = support
        .ok_or_else(|| Error::InvalidArgument("decompose received a zero state".into()))?;

    let n_max = space.n_max_1.min(space.n_max_2);
    let mut entries = BTreeMap::new();
    let mut captured = 0.0;
    for total in 0..=n_max {
        for bright in 0..=total {
            let coeffs = collective_coeffs(total, bright)?;
            let mut amp = C64::ZERO;
            for (m, c) in coeffs.iter().enumerate() {
                let idx = space.index_of(level, m, total - m);
                amp += C64::new(*c, 0.0) * state.amplitudes[idx];
            }
            captured += amp.norm_sqr();
            entries.insert(CollectiveIndex { total, bright }, amp);
        }
    }
    let total_norm_sqr: f64 = state.amplitudes.iter().map(|z| z.norm_sqr()).sum();
    let residual = (total_norm_sqr - captured).max(0.0).sqrt();
    Ok(CollectiveDecomposition { entries, residual })
}
