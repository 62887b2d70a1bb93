//! Pulse primitives and the scripted state-preparation programs, including
//! postselection.
//!
//! Resonant pulses are ideal Jaynes-Cummings rotations. A sideband pulse of
//! nominal area θ (calibrated on the n = 0 ↔ 1 pair) rotates the pair whose
//! larger motional index is n+1 by θ·√(n+1); carriers rotate the addressed
//! electronic pair without touching motion. The rotation convention on a pair
//! (|g⟩, |x⟩) with azimuth φ is
//!
//! ```text
//! |g⟩ → cos(θ/2)|g⟩ + e^{iφ} sin(θ/2)|x⟩
//! |x⟩ → −e^{−iφ} sin(θ/2)|g⟩ + cos(θ/2)|x⟩
//! ```
//!
//! Pulse infidelity is not modeled here; preparation and detection errors are
//! absorbed by the readout contrast/offset instead. Tickles act as
//! instantaneous displacement unitaries.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::collective::displacement_residual;
use crate::dynamics::{
    collapse_operators, evolve_lindblad, interaction_hamiltonian, SimParams, UnitaryPropagator,
};
use crate::hilbert::{displacement, DensityOp, Level, Mode, PureState, SpaceConfig};
use crate::{Error, Result};

/// Residual tolerance for truncated displacement (dropped-tail probability).
pub const TICKLE_RESIDUAL_TOL: f64 = 1e-6;

/// Measured coherent-excitation rate of mode 1, α per ms of tickle time.
pub const TICKLE_RATE_MODE_1: f64 = 6.53;
/// Measured coherent-excitation rate of mode 2, α per ms of tickle time.
pub const TICKLE_RATE_MODE_2: f64 = 8.81;

/// Pulse area of the second sideband pulse in the product-state preparation:
/// 2·arcsin(1/√3), the area balancing a √3/2 ground amplitude into equal
/// quarters. Its rounded representation is π/2.55 (equal within 1e-2 of the
/// produced amplitude); the exact value is the default and the area stays a
/// parameter of [`upsilon_sequence`].
pub fn upsilon_bsb2_area() -> f64 {
    2.0 * (1.0 / 3f64.sqrt()).asin()
}

/// Addressable pulse kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PulseKind {
    /// Carrier |↓⟩ ↔ |↑⟩.
    CarrierA,
    /// Carrier |↓⟩ ↔ |↑′⟩ (three-level spaces only).
    CarrierB,
    /// Blue sideband of mode 1: |↓, n⟩ ↔ |↑, n+1⟩.
    Bsb1,
    /// Blue sideband of mode 2.
    Bsb2,
    /// Red sideband of mode 1: |↓, n⟩ ↔ |↑, n−1⟩.
    Rsb1,
    /// Red sideband of mode 2.
    Rsb2,
    /// Bichromatic drive of both red sidebands for a duration.
    BichromaticRsb,
    /// Instantaneous coherent displacement of the modes.
    Tickle,
}

impl PulseKind {
    fn is_resonant(self) -> bool {
        !matches!(self, PulseKind::BichromaticRsb | PulseKind::Tickle)
    }
}

/// One pulse primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Rabi angle in radians (resonant pulses).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    /// Duration in ms (BICHROMATIC_RSB).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
    /// Rotation azimuth in radians.
    #[serde(default)]
    pub phase: f64,
    /// Mode-1 displacement (TICKLE), as (re, im).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<(f64, f64)>,
    /// Mode-2 displacement (TICKLE).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<(f64, f64)>,
}

impl PulseSpec {
    pub fn resonant(kind: PulseKind, area: f64, phase: f64) -> PulseSpec {
        PulseSpec { kind, area: Some(area), duration_ms: None, phase, alpha1: None, alpha2: None }
    }

    pub fn bichromatic(duration_ms: f64) -> PulseSpec {
        PulseSpec {
            kind: PulseKind::BichromaticRsb,
            area: None,
            duration_ms: Some(duration_ms),
            phase: 0.0,
            alpha1: None,
            alpha2: None,
        }
    }

    pub fn tickle(alpha1: C64, alpha2: C64) -> PulseSpec {
        PulseSpec {
            kind: PulseKind::Tickle,
            area: None,
            duration_ms: None,
            phase: 0.0,
            alpha1: Some((alpha1.re, alpha1.im)),
            alpha2: Some((alpha2.re, alpha2.im)),
        }
    }

    /// Exactly one of area/duration/displacement must be set, matching the
    /// kind's convention.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PulseKind::BichromaticRsb => {
                if self.duration_ms.is_none() || self.area.is_some() {
                    return Err(Error::InvalidArgument(
                        "BICHROMATIC_RSB pulses take a duration, not an area".into(),
                    ));
                }
            }
            PulseKind::Tickle => {
                if self.alpha1.is_none() && self.alpha2.is_none() {
                    return Err(Error::InvalidArgument(
                        "TICKLE pulses need at least one displacement".into(),
                    ));
                }
                if self.area.is_some() || self.duration_ms.is_some() {
                    return Err(Error::InvalidArgument(
                        "TICKLE pulses take displacements, not an area or duration".into(),
                    ));
                }
            }
            k => {
                if self.area.is_none() || self.duration_ms.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "{k:?} pulses take an area, not a duration"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One step of a sequence program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceStep {
    Postselect { postselect: Vec<Level> },
    Pulse(PulseSpec),
}

/// Initial state of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InitialState {
    #[default]
    Ground,
    Thermal {
        n_th: f64,
    },
}

/// An ordered pulse program with postselection markers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(default)]
    pub initial: InitialState,
    pub steps: Vec<SequenceStep>,
}

/// Applies an ideal resonant rotation for the addressed transition.
pub fn resonant_pulse(
    state: &PureState,
    kind: PulseKind,
    area: f64,
    phase: f64,
) -> Result<PureState> {
    if !kind.is_resonant() {
        return Err(Error::InvalidArgument(format!("{kind:?} is not a resonant pulse")));
    }
    let space = state.space;
    if kind == PulseKind::CarrierB && space.electronic_levels < 3 {
        return Err(Error::InvalidArgument(
            "CARRIER_B requires a three-level electronic space".into(),
        ));
    }
    let mut amps = state.amplitudes.clone();
    let rot = C64::from_polar(1.0, phase);
    for n1 in 0..=space.n_max_1 {
        for n2 in 0..=space.n_max_2 {
            let Some((idx_g, idx_x, scale)) = coupled_pair(space, kind, n1, n2) else { continue };
            let theta = 0.5 * area * scale;
            let (c, s) = (theta.cos(), theta.sin());
            let g = amps[idx_g];
            let x = amps[idx_x];
            amps[idx_g] = C64::new(c, 0.0) * g - rot.conj() * C64::new(s, 0.0) * x;
            amps[idx_x] = rot * C64::new(s, 0.0) * g + C64::new(c, 0.0) * x;
        }
    }
    Ok(PureState::from_parts(space, amps, state.weight))
}

// Returns (ground index, excited index, √n scaling) for the pair whose |↓⟩
// member is |↓, n1, n2⟩, or None when the partner falls outside the truncated
// space (such states are left untouched, consistent with the hard cutoff).
fn coupled_pair(
    space: SpaceConfig,
    kind: PulseKind,
    n1: usize,
    n2: usize,
) -> Option<(usize, usize, f64)> {
    let g = space.index_of(Level::Down, n1, n2);
    match kind {
        PulseKind::CarrierA => Some((g, space.index_of(Level::Up, n1, n2), 1.0)),
        PulseKind::CarrierB => Some((g, space.index_of(Level::Aux, n1, n2), 1.0)),
        PulseKind::Bsb1 => (n1 + 1 <= space.n_max_1)
            .then(|| (g, space.index_of(Level::Up, n1 + 1, n2), ((n1 + 1) as f64).sqrt())),
        PulseKind::Bsb2 => (n2 + 1 <= space.n_max_2)
            .then(|| (g, space.index_of(Level::Up, n1, n2 + 1), ((n2 + 1) as f64).sqrt())),
        PulseKind::Rsb1 => {
            (n1 >= 1).then(|| (g, space.index_of(Level::Up, n1 - 1, n2), (n1 as f64).sqrt()))
        }
        PulseKind::Rsb2 => {
            (n2 >= 1).then(|| (g, space.index_of(Level::Up, n1, n2 - 1), (n2 as f64).sqrt()))
        }
        _ => None,
    }
}

/// Evolves a pure state under the bichromatic interaction for `duration_ms`.
/// Closed-system only; decoherence requires the density-operator variant.
pub fn bichromatic_pulse_pure(
    state: &PureState,
    params: &SimParams,
    duration_ms: f64,
) -> Result<PureState> {
    check_bichromatic(params)?;
    if params.gamma_m > 0.0 || params.gamma_e > 0.0 {
        return Err(Error::InvalidArgument(
            "bichromatic pulse with decoherence needs a density operator".into(),
        ));
    }
    let h = interaction_hamiltonian(state.space, params);
    UnitaryPropagator::new(&h)?.state_at(state, duration_ms)
}

/// Evolves a density operator under the bichromatic interaction (with the
/// dephasing collapse operators) for `duration_ms`.
pub fn bichromatic_pulse_density(
    rho: &DensityOp,
    params: &SimParams,
    duration_ms: f64,
) -> Result<DensityOp> {
    check_bichromatic(params)?;
    let h = interaction_hamiltonian(rho.space, params);
    let collapse = collapse_operators(rho.space, params);
    let traj = evolve_lindblad(&h, &collapse, rho, &[0.0, duration_ms])?;
    match traj.states {
        crate::dynamics::TrajectoryStates::Density(mut states) => {
            Ok(states.pop().expect("nonempty trajectory"))
        }
        _ => unreachable!(),
    }
}

fn check_bichromatic(params: &SimParams) -> Result<()> {
    params.validate()?;
    if params.g1 <= 0.0 || params.g2 <= 0.0 {
        return Err(Error::InvalidArgument(
            "bichromatic pulses require positive couplings on both modes".into(),
        ));
    }
    Ok(())
}

/// Applies truncated displacement operators exp(αâ† − α*â) per mode to a pure
/// state. Returns the state and the truncation residual (dropped-tail
/// probability); residuals above 1e-6 are an error.
pub fn tickle_pure(state: &PureState, alpha1: C64, alpha2: C64) -> Result<(PureState, f64)> {
    let residual = checked_residual(&state.space, alpha1, alpha2)?;
    let mut out = state.clone();
    if alpha1 != C64::ZERO {
        out = displacement(state.space, Mode::One, alpha1).apply(&out)?;
    }
    if alpha2 != C64::ZERO {
        out = displacement(state.space, Mode::Two, alpha2).apply(&out)?;
    }
    Ok((out, residual))
}

/// Displacement of a density operator, ρ → D̂ρD̂†.
pub fn tickle_density(rho: &DensityOp, alpha1: C64, alpha2: C64) -> Result<(DensityOp, f64)> {
    let residual = checked_residual(&rho.space, alpha1, alpha2)?;
    let mut m = rho.matrix.clone();
    for (mode, alpha) in [(Mode::One, alpha1), (Mode::Two, alpha2)] {
        if alpha == C64::ZERO {
            continue;
        }
        let d = displacement(rho.space, mode, alpha);
        let ddag = d.dagger();
        m = d.matrix.dot(&m).dot(&ddag.matrix);
    }
    Ok((DensityOp::from_parts(rho.space, m, rho.weight), residual))
}

fn checked_residual(space: &SpaceConfig, alpha1: C64, alpha2: C64) -> Result<f64> {
    let residual = displacement_residual(space, alpha1, alpha2);
    if residual > TICKLE_RESIDUAL_TOL {
        return Err(Error::Truncation { residual, tolerance: TICKLE_RESIDUAL_TOL });
    }
    Ok(residual)
}

/// Thermal product state at mean occupation `n_th` on |↓⟩⟨↓|: per-mode
/// geometric distributions p_n = (n_th/(1+n_th))^n/(1+n_th), truncated and
/// renormalized.
pub fn thermal_state(space: SpaceConfig, n_th: f64) -> Result<DensityOp> {
    if n_th < 0.0 {
        return Err(Error::InvalidArgument("n_th must be non-negative".into()));
    }
    let geometric = |n_max: usize| -> Vec<f64> {
        if n_th == 0.0 {
            let mut p = vec![0.0; n_max + 1];
            p[0] = 1.0;
            return p;
        }
        let ratio = n_th / (1.0 + n_th);
        let mut p: Vec<f64> = (0..=n_max).map(|n| ratio.powi(n as i32) / (1.0 + n_th)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        p
    };
    let p1 = geometric(space.n_max_1);
    let p2 = geometric(space.n_max_2);
    let mut matrix = Array2::zeros((space.dim(), space.dim()));
    for (n1, w1) in p1.iter().enumerate() {
        for (n2, w2) in p2.iter().enumerate() {
            let idx = space.index_of(Level::Down, n1, n2);
            matrix[(idx, idx)] = C64::new(w1 * w2, 0.0);
        }
    }
    Ok(DensityOp::from_parts(space, matrix, 1.0))
}

/// Projects onto the kept electronic subspace, renormalizes, and multiplies
/// the weight by the survival probability (also returned).
pub fn postselect_pure(state: &PureState, keep: &[Level]) -> Result<(PureState, f64)> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("postselection needs a nonempty kept set".into()));
    }
    let space = state.space;
    let mut amps = state.amplitudes.clone();
    for idx in 0..space.dim() {
        let (level, _, _) = space.labels_of(idx);
        if !keep.contains(&level) {
            amps[idx] = C64::ZERO;
        }
    }
    let prob: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if prob < 1e-12 {
        return Err(Error::EmptyProjection(prob));
    }
    let scale = prob.sqrt();
    amps.mapv_inplace(|z| z / scale);
    Ok((PureState::from_parts(space, amps, state.weight * prob), prob))
}

/// Density-operator postselection.
pub fn postselect_density(rho: &DensityOp, keep: &[Level]) -> Result<(DensityOp, f64)> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("postselection needs a nonempty kept set".into()));
    }
    let space = rho.space;
    let mut m = rho.matrix.clone();
    for idx in 0..space.dim() {
        let (level, _, _) = space.labels_of(idx);
        if !keep.contains(&level) {
            for j in 0..space.dim() {
                m[(idx, j)] = C64::ZERO;
                m[(j, idx)] = C64::ZERO;
            }
        }
    }
    let prob: f64 = m.diag().iter().map(|z| z.re).sum();
    if prob < 1e-12 {
        return Err(Error::EmptyProjection(prob));
    }
    m.mapv_inplace(|z| z / prob);
    Ok((DensityOp::from_parts(space, m, rho.weight * prob), prob))
}

/// Replays a sequence program on a pure state. The initial state must be
/// GROUND; thermal initials need [`run_sequence_density`].
pub fn run_sequence_pure(
    space: SpaceConfig,
    seq: &SequenceSpec,
    params: Option<&SimParams>,
) -> Result<PureState> {
    if !matches!(seq.initial, InitialState::Ground) {
        return Err(Error::InvalidArgument(
            "thermal initial states need the density-operator runner".into(),
        ));
    }
    let mut state = PureState::ground(space);
    for step in &seq.steps {
        state = match step {
            SequenceStep::Postselect { postselect } => postselect_pure(&state, postselect)?.0,
            SequenceStep::Pulse(pulse) => {
                pulse.validate()?;
                match pulse.kind {
                    PulseKind::BichromaticRsb => {
                        let p = params.ok_or_else(|| {
                            Error::InvalidArgument(
                                "bichromatic pulses need simulation parameters".into(),
                            )
                        })?;
                        bichromatic_pulse_pure(&state, p, pulse.duration_ms.unwrap())?
                    }
                    PulseKind::Tickle => {
                        let a1 = pulse.alpha1.map(|(re, im)| C64::new(re, im)).unwrap_or(C64::ZERO);
                        let a2 = pulse.alpha2.map(|(re, im)| C64::new(re, im)).unwrap_or(C64::ZERO);
                        tickle_pure(&state, a1, a2)?.0
                    }
                    kind => resonant_pulse(&state, kind, pulse.area.unwrap(), pulse.phase)?,
                }
            }
        };
    }
    Ok(state)
}

/// Replays a sequence program on a density operator.
pub fn run_sequence_density(
    space: SpaceConfig,
    seq: &SequenceSpec,
    params: Option<&SimParams>,
) -> Result<DensityOp> {
    let mut rho = match seq.initial {
        InitialState::Ground => DensityOp::from_pure(&PureState::ground(space)),
        InitialState::Thermal { n_th } => thermal_state(space, n_th)?,
    };
    for step in &seq.steps {
        rho = match step {
            SequenceStep::Postselect { postselect } => postselect_density(&rho, postselect)?.0,
            SequenceStep::Pulse(pulse) => {
                pulse.validate()?;
                match pulse.kind {
                    PulseKind::BichromaticRsb => {
                        let p = params.ok_or_else(|| {
                            Error::InvalidArgument(
                                "bichromatic pulses need simulation parameters".into(),
                            )
                        })?;
                        bichromatic_pulse_density(&rho, p, pulse.duration_ms.unwrap())?
                    }
                    PulseKind::Tickle => {
                        let a1 = pulse.alpha1.map(|(re, im)| C64::new(re, im)).unwrap_or(C64::ZERO);
                        let a2 = pulse.alpha2.map(|(re, im)| C64::new(re, im)).unwrap_or(C64::ZERO);
                        tickle_density(&rho, a1, a2)?.0
                    }
                    kind => apply_resonant_to_density(&rho, kind, pulse.area.unwrap(), pulse.phase)?,
                }
            }
        };
    }
    Ok(rho)
}

fn apply_resonant_to_density(
    rho: &DensityOp,
    kind: PulseKind,
    area: f64,
    phase: f64,
) -> Result<DensityOp> {
    let space = rho.space;
    if !kind.is_resonant() {
        return Err(Error::InvalidArgument(format!("{kind:?} is not a resonant pulse")));
    }
    if kind == PulseKind::CarrierB && space.electronic_levels < 3 {
        return Err(Error::InvalidArgument(
            "CARRIER_B requires a three-level electronic space".into(),
        ));
    }
    let d = space.dim();
    let mut u = Array2::<C64>::eye(d);
    let rot = C64::from_polar(1.0, phase);
    for n1 in 0..=space.n_max_1 {
        for n2 in 0..=space.n_max_2 {
            let Some((idx_g, idx_x, scale)) = coupled_pair(space, kind, n1, n2) else { continue };
            let theta = 0.5 * area * scale;
            let (c, s) = (theta.cos(), theta.sin());
            for col in 0..d {
                let g = u[(idx_g, col)];
                let x = u[(idx_x, col)];
                u[(idx_g, col)] = C64::new(c, 0.0) * g - rot.conj() * C64::new(s, 0.0) * x;
                u[(idx_x, col)] = rot * C64::new(s, 0.0) * g + C64::new(c, 0.0) * x;
            }
        }
    }
    let udag = u.t().mapv(|z| z.conj());
    let m = u.dot(&rho.matrix).dot(&udag);
    Ok(DensityOp::from_parts(space, m, rho.weight))
}

/// The single-phonon preparation program:
/// BSB₁(π/2, φ) → BSB₂(π) → postselect{↑} → CAR_A(π), yielding
/// |↓⟩ ⊗ (|0,1⟩ + e^{iφ}|1,0⟩)/√2. With `final_carrier` false the carrier is
/// omitted and the superposition stays on |↑⟩.
pub fn single_phonon_sequence(phi: f64, final_carrier: bool) -> SequenceSpec {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut steps = vec![
        SequenceStep::Pulse(PulseSpec::resonant(PulseKind::Bsb1, FRAC_PI_2, phi)),
        SequenceStep::Pulse(PulseSpec::resonant(PulseKind::Bsb2, PI, 0.0)),
        SequenceStep::Postselect { postselect: vec![Level::Up] },
    ];
    if final_carrier {
        steps.push(SequenceStep::Pulse(PulseSpec::resonant(PulseKind::CarrierA, PI, PI)));
    }
    SequenceSpec { initial: InitialState::Ground, steps }
}

/// Runs the single-phonon preparation, yielding |↓⟩(|0,1⟩ + e^{iφ}|1,0⟩)/√2.
pub fn prepare_single_phonon(space: SpaceConfig, phi: f64) -> Result<PureState> {
    run_sequence_pure(space, &single_phonon_sequence(phi, true), None)
}

/// Excited-state variant without the final carrier:
/// |↑⟩(|0,1⟩ + e^{iφ}|1,0⟩)/√2.
pub fn prepare_single_phonon_excited(space: SpaceConfig, phi: f64) -> Result<PureState> {
    run_sequence_pure(space, &single_phonon_sequence(phi, false), None)
}

/// The eleven-step product-state preparation program (nine pulses and two
/// postselection rounds) on a three-level space. Pulse azimuths are chosen so
/// every intermediate state carries the ideal listing's signs; the π pulse on
/// the second red sideband is the step that folds |↑,1,0⟩ into |↓,1,1⟩.
pub fn upsilon_sequence(phi1: f64, phi2: f64, bsb2_area: f64) -> SequenceSpec {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
    SequenceSpec {
        initial: InitialState::Ground,
        steps: vec![
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::Bsb1, FRAC_PI_3, 0.0)),
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::Bsb2, bsb2_area, phi2)),
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::CarrierA, PI, 0.0)),
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::CarrierB, PI, PI)),
            SequenceStep::Postselect { postselect: vec![Level::Up, Level::Aux] },
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::CarrierA, PI, PI)),
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::Bsb1, FRAC_PI_2, phi1)),
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::Rsb2, PI, PI)),
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::CarrierB, FRAC_PI_2, 0.0)),
            SequenceStep::Postselect { postselect: vec![Level::Aux] },
            SequenceStep::Pulse(PulseSpec::resonant(PulseKind::CarrierB, PI, PI)),
        ],
    }
}

/// Runs the product-state preparation with ideal pulses; with φ₁ = φ₂ = φ the
/// result is |↓⟩ ⊗ ½(|0,0⟩+|1,0⟩+e^{iφ}|0,1⟩+e^{iφ}|1,1⟩) and the weight
/// records the ½ survival probability of the second postselection.
pub fn prepare_upsilon(space: SpaceConfig, phi1: f64, phi2: f64) -> Result<PureState> {
    if space.electronic_levels < 3 {
        return Err(Error::InvalidArgument(
            "the product-state preparation needs the auxiliary level".into(),
        ));
    }
    run_sequence_pure(space, &upsilon_sequence(phi1, phi2, upsilon_bsb2_area()), None)
}

/// Inverts the linear tickle calibration: the duration that displaces the
/// given mode by α.
pub fn tickle_duration_for(alpha: f64, mode: Mode) -> Result<f64> {
    if alpha < 0.0 {
        return Err(Error::InvalidArgument("alpha must be non-negative".into()));
    }
    let rate = match mode {
        Mode::One => TICKLE_RATE_MODE_1,
        Mode::Two => TICKLE_RATE_MODE_2,
    };
    Ok(alpha / rate)
}
