//! Interaction Hamiltonian construction, closed-system propagation, and
//! Lindblad master-equation integration.
//!
//! Conventions: couplings and rates are cyclic frequencies in kHz and are
//! converted to angular frequencies (×2π, rad/ms) here and only here; times
//! are in ms. The relative drive phase enters as e^{−iφ} on σ̂⁺â₂, which makes
//! |↓⟩|B¹⟩ maximally coupled at φ = 0 and dark at φ = π.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::hilbert::{
    annihilation, electronic_projector, spin_raise, DensityOp, Level, Mode, OperatorMatrix,
    PureState, SpaceConfig,
};
use crate::{Error, Result};

/// Step-size rule for the fixed-step RK4 integrator. The ceiling is
/// h·‖L‖ ≤ 0.05; the working value 0.02 is calibrated so the closed-system
/// limit agrees with the eigendecomposition propagator to better than 1e-8 in
/// population.
pub const STEP_RULE: f64 = 0.02;
/// Tolerance for the half-step Richardson spot check.
pub const RICHARDSON_TOL: f64 = 1e-7;
/// Trace drift allowed before renormalization at output points.
pub const TRACE_TOL: f64 = 1e-8;
/// Hermiticity deviation allowed at output points.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalue floor; more negative values abort the run.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

/// Coupling strengths, drive phase, decoherence rates, thermal occupation and
/// readout contrast/offset for one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Sideband coupling of mode 1, kHz.
    pub g1: f64,
    /// Sideband coupling of mode 2, kHz.
    pub g2: f64,
    /// Relative phase of the mode-2 coupling term, radians.
    pub phi: f64,
    /// Motional dephasing rate (both modes), kHz.
    pub gamma_m: f64,
    /// Electronic dephasing rate, kHz.
    pub gamma_e: f64,
    /// Mean thermal occupation used by thermal preparation.
    pub n_th: f64,
    /// Readout contrast A ∈ (0, 1].
    pub contrast: f64,
    /// Readout offset C ∈ [0, 1).
    pub offset: f64,
}

impl SimParams {
    /// Symmetric-coupling constructor with ideal readout.
    pub fn symmetric(g: f64) -> SimParams {
        SimParams {
            g1: g,
            g2: g,
            phi: 0.0,
            gamma_m: 0.0,
            gamma_e: 0.0,
            n_th: 0.0,
            contrast: 1.0,
            offset: 0.0,
        }
    }

    pub fn with_phi(mut self, phi: f64) -> SimParams {
        self.phi = phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.g1 < 0.0 || self.g2 < 0.0 || self.gamma_m < 0.0 || self.gamma_e < 0.0 {
            return Err(Error::InvalidArgument("rates must be non-negative".into()));
        }
        if self.n_th < 0.0 {
            return Err(Error::InvalidArgument("n_th must be non-negative".into()));
        }
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "contrast {} outside (0, 1]",
                self.contrast
            )));
        }
        if !(0.0..1.0).contains(&self.offset) {
            return Err(Error::InvalidArgument(format!("offset {} outside [0, 1)", self.offset)));
        }
        // Fitted values may overshoot slightly; 1.05 is the allowance.
        if self.contrast + self.offset > 1.05 {
            return Err(Error::InvalidArgument(format!(
                "contrast + offset = {} exceeds 1.05",
                self.contrast + self.offset
            )));
        }
        Ok(())
    }
}

/// The two-mode resonant-sideband interaction Hamiltonian
///
/// H/ħ = 2π·g1(σ̂⁺â₁ + σ̂⁻â₁†) + 2π·g2(e^{−iφ}σ̂⁺â₂ + e^{+iφ}σ̂⁻â₂†),
///
/// Hermitian by construction, in rad/ms.
pub fn interaction_hamiltonian(space: SpaceConfig, params: &SimParams) -> OperatorMatrix {
    let sp = spin_raise(space);
    let a1 = annihilation(space, Mode::One);
    let a2 = annihilation(space, Mode::Two);
    let t1 = sp.matmul(&a1).expect("same space");
    let t2 = sp.matmul(&a2).expect("same space");
    let z1 = C64::new(TAU * params.g1, 0.0);
    let z2 = C64::from_polar(TAU * params.g2, -params.phi);
    let half = t1.matrix.mapv(|x| z1 * x) + t2.matrix.mapv(|x| z2 * x);
    let matrix = &half + &half.t().mapv(|z| z.conj());
    OperatorMatrix { space, matrix }
}

/// Single-tone reference Hamiltonian: only one mode's red sideband is driven,
/// H/ħ = 2π·g(σ̂⁺â_m + σ̂⁻â_m†).
pub fn single_mode_hamiltonian(space: SpaceConfig, g_khz: f64, mode: Mode) -> OperatorMatrix {
    let sp = spin_raise(space);
    let a = annihilation(space, mode);
    let t = sp.matmul(&a).expect("same space");
    let half = t.matrix.mapv(|x| C64::new(TAU * g_khz, 0.0) * x);
    let matrix = &half + &half.t().mapv(|z| z.conj());
    OperatorMatrix { space, matrix }
}

/// Dephasing collapse operators √(2πγ_m)â₁†â₁, √(2πγ_m)â₂†â₂ and
/// √(2πγ_e)σ̂⁺σ̂⁻. Zero-rate operators are omitted.
pub fn collapse_operators(space: SpaceConfig, params: &SimParams) -> Vec<OperatorMatrix> {
    let mut ops = Vec::new();
    if params.gamma_m > 0.0 {
        let rate = C64::new((TAU * params.gamma_m).sqrt(), 0.0);
        for mode in [Mode::One, Mode::Two] {
            let mut n = crate::hilbert::number_op(space, mode);
            n.matrix.mapv_inplace(|z| rate * z);
            ops.push(n);
        }
    }
    if params.gamma_e > 0.0 {
        let rate = C64::new((TAU * params.gamma_e).sqrt(), 0.0);
        let mut p = electronic_projector(space, Level::Up);
        p.matrix.mapv_inplace(|z| rate * z);
        ops.push(p);
    }
    ops
}

/// States stored along a trajectory.
#[derive(Debug, Clone)]
pub enum TrajectoryStates {
    Pure(Vec<PureState>),
    Density(Vec<DensityOp>),
}

/// Time series produced by the propagators: excited-state populations, the
/// readout-model output, and the per-point trace drift (before
/// renormalization; zero for unitary runs).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: TrajectoryStates,
    pub p_up: Vec<f64>,
    pub p_reported: Vec<f64>,
    pub trace_err: Vec<f64>,
    /// Half-step Richardson deviation measured on the first grid interval
    /// (zero for unitary runs).
    pub step_check: f64,
}

impl Trajectory {
    /// Final state populations of one mode.
    pub fn final_mode_marginal(&self, mode: Mode) -> Vec<f64> {
        match &self.states {
            TrajectoryStates::Pure(states) => states.last().expect("nonempty").mode_marginal(mode),
            TrajectoryStates::Density(states) => {
                states.last().expect("nonempty").mode_marginal(mode)
            }
        }
    }

    /// Writes the CSV dump: columns `t_ms,p_up,p_up_reported,trace_err`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t_ms", "p_up", "p_up_reported", "trace_err"])?;
        for i in 0..self.times.len() {
            w.write_record([
                self.times[i].to_string(),
                self.p_up[i].to_string(),
                self.p_reported[i].to_string(),
                self.trace_err[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Eigendecomposition-backed propagator for a time-independent Hermitian
/// Hamiltonian: ψ(t) = V e^{−iΛt} V† ψ(0).
pub struct UnitaryPropagator {
    space: SpaceConfig,
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<C64>,
}

impl UnitaryPropagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let dev = h.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::NonHermitian(dev));
        }
        let (eigenvalues, eigenvectors) = h
            .matrix
            .eigh(UPLO::Lower)
            .map_err(|e| Error::InvalidArgument(format!("eigendecomposition failed: {e}")))?;
        Ok(UnitaryPropagator { space: h.space, eigenvalues, eigenvectors })
    }

    /// Propagates `state` to time `t_ms`.
    pub fn state_at(&self, state: &PureState, t_ms: f64) -> Result<PureState> {
        self.space.check(&state.space)?;
        let vdag_psi = self.eigenvectors.t().mapv(|z| z.conj()).dot(&state.amplitudes);
        let rotated = Array1::from_iter(
            vdag_psi
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(c, w)| c * (-C64::i() * C64::new(*w * t_ms, 0.0)).exp()),
        );
        let amplitudes = self.eigenvectors.dot(&rotated);
        Ok(PureState::from_parts(state.space, amplitudes, state.weight))
    }

    /// Excited-state population at time `t_ms`.
    pub fn p_up_at(&self, state: &PureState, t_ms: f64) -> Result<f64> {
        Ok(self.state_at(state, t_ms)?.level_population(Level::Up))
    }
}

impl SpaceConfig {
    fn check(&self, other: &SpaceConfig) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch(format!("{self:?}"), format!("{other:?}")));
        }
        Ok(())
    }
}

/// Exact closed-system propagation via eigendecomposition on a uniform grid of
/// `samples` points spanning [0, duration].
pub fn evolve_unitary(
    h: &OperatorMatrix,
    state: &PureState,
    duration_ms: f64,
    samples: usize,
) -> Result<Trajectory> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let prop = UnitaryPropagator::new(h)?;
    let times: Vec<f64> =
        (0..samples).map(|i| duration_ms * i as f64 / (samples - 1) as f64).collect();
    let mut states = Vec::with_capacity(samples);
    let mut p_up = Vec::with_capacity(samples);
    for &t in &times {
        let st = prop.state_at(state, t)?;
        let p = st.level_population(Level::Up);
        check_population(p, t)?;
        p_up.push(p.clamp(0.0, 1.0));
        states.push(st);
    }
    Ok(Trajectory {
        times,
        states: TrajectoryStates::Pure(states),
        p_reported: p_up.clone(),
        p_up,
        trace_err: vec![0.0; samples],
        step_check: 0.0,
    })
}

fn check_population(p: f64, t: f64) -> Result<()> {
    if !(-1e-8..=1.0 + 1e-8).contains(&p) {
        return Err(Error::Integration {
            t_ms: t,
            reason: format!("population {p} outside [0, 1] beyond 1e-8"),
        });
    }
    Ok(())
}

// Right-hand side of the master equation. All collapse operators in this
// model are diagonal in the product basis, which reduces the dissipator to an
// elementwise product with a precomputed matrix; the general path handles
// arbitrary collapse operators.
enum LindbladRhs {
    Diagonal { h: Array2<C64>, weights: Array2<C64> },
    General { h: Array2<C64>, collapse: Vec<(Array2<C64>, Array2<C64>)> },
}

impl LindbladRhs {
    fn build(h: &OperatorMatrix, collapse: &[OperatorMatrix]) -> LindbladRhs {
        let all_diagonal = collapse.iter().all(|c| {
            c.matrix.indexed_iter().all(|((i, j), z)| i == j || *z == C64::ZERO)
        });
        if all_diagonal {
            let d = h.matrix.nrows();
            let mut weights = Array2::<C64>::zeros((d, d));
            for c in collapse {
                let diag: Vec<C64> = c.matrix.diag().to_vec();
                for j in 0..d {
                    for k in 0..d {
                        weights[(j, k)] += diag[j] * diag[k].conj()
                            - C64::new(0.5 * (diag[j].norm_sqr() + diag[k].norm_sqr()), 0.0);
                    }
                }
            }
            LindbladRhs::Diagonal { h: h.matrix.clone(), weights }
        } else {
            let collapse = collapse
                .iter()
                .map(|c| {
                    let cdag_c = c.matrix.t().mapv(|z| z.conj()).dot(&c.matrix);
                    (c.matrix.clone(), cdag_c)
                })
                .collect();
            LindbladRhs::General { h: h.matrix.clone(), collapse }
        }
    }

    fn eval(&self, rho: &Array2<C64>) -> Array2<C64> {
        match self {
            LindbladRhs::Diagonal { h, weights } => {
                let comm = h.dot(rho) - rho.dot(h);
                let mut out = comm.mapv(|z| -C64::i() * z);
                out += &(weights * rho);
                out
            }
            LindbladRhs::General { h, collapse } => {
                let comm = h.dot(rho) - rho.dot(h);
                let mut out = comm.mapv(|z| -C64::i() * z);
                for (c, cdag_c) in collapse {
                    let c_dag = c.t().mapv(|z| z.conj());
                    out += &c.dot(rho).dot(&c_dag);
                    let anti = cdag_c.dot(rho) + rho.dot(cdag_c);
                    out -= &anti.mapv(|z| C64::new(0.5, 0.0) * z);
                }
                out
            }
        }
    }

    fn rk4_step(&self, rho: &Array2<C64>, h_step: f64) -> Array2<C64> {
        let h2 = h_step / 2.0;
        let k1 = self.eval(rho);
        let k2 = self.eval(&(rho + &k1.mapv(|z| z * h2)));
        let k3 = self.eval(&(rho + &k2.mapv(|z| z * h2)));
        let k4 = self.eval(&(rho + &k3.mapv(|z| z * h_step)));
        let mut out = rho.clone();
        let w = h_step / 6.0;
        out += &k1.mapv(|z| z * w);
        out += &k2.mapv(|z| z * (2.0 * w));
        out += &k3.mapv(|z| z * (2.0 * w));
        out += &k4.mapv(|z| z * w);
        out
    }

    fn advance(&self, rho: &Array2<C64>, dt: f64, substeps: usize) -> Array2<C64> {
        let h_step = dt / substeps as f64;
        let mut out = rho.clone();
        for _ in 0..substeps {
            out = self.rk4_step(&out, h_step);
        }
        out
    }
}

/// Spectral norm of a Hermitian matrix by power iteration (deterministic
/// start vector).
fn hermitian_norm(m: &Array2<C64>) -> f64 {
    let d = m.nrows();
    let mut v = Array1::from_iter((0..d).map(|i| C64::new(1.0 + (i as f64) * 1e-3, 0.0)));
    let mut norm = 0.0;
    for _ in 0..60 {
        let w = m.dot(&v);
        norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        v = w.mapv(|z| z / norm);
    }
    norm
}

/// Conservative Liouvillian norm estimate 2‖H‖ + Σ 2‖C‖² used by the step-size
/// rule.
fn liouvillian_norm_estimate(h: &OperatorMatrix, collapse: &[OperatorMatrix]) -> f64 {
    let mut total = 2.0 * hermitian_norm(&h.matrix);
    for c in collapse {
        let cdag_c = c.matrix.t().mapv(|z| z.conj()).dot(&c.matrix);
        total += 2.0 * hermitian_norm(&cdag_c);
    }
    total
}

/// Integrates the Lindblad master equation
///
/// dρ/dt = −i[H, ρ] + Σ_n ½(2Ĉ_nρĈ_n† − ρĈ_n†Ĉ_n − Ĉ_n†Ĉ_nρ)
///
/// with fixed-step RK4 at h·‖L‖ ≤ 0.05, a half-step Richardson spot check on
/// the first grid interval, and trace / Hermiticity / positivity monitoring at
/// every grid point. The trace is renormalized at grid points after the drift
/// is recorded; drift beyond 1e-8 or eigenvalues below −1e-6 abort the run.
pub fn evolve_lindblad(
    h: &OperatorMatrix,
    collapse: &[OperatorMatrix],
    rho0: &DensityOp,
    t_grid: &[f64],
) -> Result<Trajectory> {
    let dev = h.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::NonHermitian(dev));
    }
    h.space.check(&rho0.space)?;
    for c in collapse {
        h.space.check(&c.space)?;
    }
    if t_grid.len() < 2 {
        return Err(Error::InvalidArgument("time grid needs at least two points".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }

    let rhs = LindbladRhs::build(h, collapse);
    let l_norm = liouvillian_norm_estimate(h, collapse);
    let h_max = if l_norm > 0.0 { STEP_RULE / l_norm } else { f64::INFINITY };

    let space = rho0.space;
    let mut rho = rho0.matrix.clone();
    let mut states = Vec::with_capacity(t_grid.len());
    let mut p_up = Vec::with_capacity(t_grid.len());
    let mut trace_err = Vec::with_capacity(t_grid.len());
    let mut step_check = 0.0;

    record_point(&space, &rho, rho0.weight, t_grid[0], &mut states, &mut p_up, &mut trace_err)?;

    for (k, pair) in t_grid.windows(2).enumerate() {
        let dt = pair[1] - pair[0];
        let substeps = (dt / h_max).ceil().max(1.0) as usize;
        let next = rhs.advance(&rho, dt, substeps);
        if k == 0 {
            // Richardson spot check: the first interval is integrated again at
            // half the step; dynamics only decay afterwards, so it bounds the
            // local step error for the whole run.
            let refined = rhs.advance(&rho, dt, 2 * substeps);
            step_check = (&next - &refined).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if step_check > RICHARDSON_TOL {
                return Err(Error::Integration {
                    t_ms: pair[1],
                    reason: format!(
                        "half-step Richardson check failed: deviation {step_check:.3e} > {RICHARDSON_TOL:.1e}"
                    ),
                });
            }
        }
        rho = next;
        // Renormalize the trace after recording the drift.
        let tr = rho.diag().sum().re;
        rho.mapv_inplace(|z| z / tr);
        record_point(
            &space,
            &rho,
            rho0.weight,
            pair[1],
            &mut states,
            &mut p_up,
            &mut trace_err,
        )?;
        let last = trace_err.last_mut().unwrap();
        *last = (tr - 1.0).abs();
        if *last > TRACE_TOL {
            return Err(Error::Integration {
                t_ms: pair[1],
                reason: format!("trace drift {last:.3e} exceeds {TRACE_TOL:.1e}"),
            });
        }
    }

    Ok(Trajectory {
        times: t_grid.to_vec(),
        states: TrajectoryStates::Density(states),
        p_reported: p_up.clone(),
        p_up,
        trace_err,
        step_check,
    })
}

fn record_point(
    space: &SpaceConfig,
    rho: &Array2<C64>,
    weight: f64,
    t: f64,
    states: &mut Vec<DensityOp>,
    p_up: &mut Vec<f64>,
    trace_err: &mut Vec<f64>,
) -> Result<()> {
    let op = DensityOp::from_parts(*space, rho.clone(), weight);
    let herm = op.hermiticity_deviation();
    if herm > HERMITICITY_TOL {
        return Err(Error::Integration {
            t_ms: t,
            reason: format!("Hermiticity deviation {herm:.3e} exceeds {HERMITICITY_TOL:.1e}"),
        });
    }
    let min_eig = op.min_eigenvalue()?;
    if min_eig < POSITIVITY_FLOOR {
        return Err(Error::Positivity { t_ms: t, min_eig });
    }
    let p = op.level_population(Level::Up);
    check_population(p, t)?;
    p_up.push(p.clamp(0.0, 1.0));
    trace_err.push(0.0);
    states.push(op);
    Ok(())
}

/// Applies the affine readout model p_reported = offset + contrast·p_up,
/// clipped to [0, 1].
pub fn apply_readout_model(traj: &Trajectory, params: &SimParams) -> Trajectory {
    let mut out = traj.clone();
    out.p_reported = traj
        .p_up
        .iter()
        .map(|p| (params.offset + params.contrast * p).clamp(0.0, 1.0))
        .collect();
    out
}

/// First local maximum of a sampled curve, refined by a parabolic fit through
/// the bracketing three points. Returns `None` for monotone data.
pub fn first_peak_discrete(times: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    debug_assert_eq!(times.len(), values.len());
    for i in 1..values.len().saturating_sub(1) {
        if values[i] >= values[i - 1] && values[i] > values[i + 1] {
            let (t0, t1, t2) = (times[i - 1], times[i], times[i + 1]);
            let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
            let denom = y0 - 2.0 * y1 + y2; // negative at a maximum
            if denom.abs() < 1e-300 {
                return Some((t1, y1));
            }
            let dt = t1 - t0;
            let tp = (t1 + 0.5 * dt * (y0 - y2) / denom).clamp(t0, t2);
            let a = denom / (2.0 * dt * dt);
            let b = (y2 - y0) / (2.0 * dt);
            let dx = tp - t1;
            return Some((tp, y1 + b * dx + a * dx * dx));
        }
    }
    None
}

/// First local maximum of a smooth function on [0, t_max], located with a
/// coarse scan followed by golden-section refinement.
pub fn first_peak_continuous<F: Fn(f64) -> f64>(f: F, t_max: f64, coarse: usize) -> Option<(f64, f64)> {
    let n = coarse.max(16);
    let ts: Vec<f64> = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut bracket = None;
    for i in 1..n {
        if ys[i] >= ys[i - 1] && ys[i] > ys[i + 1] {
            bracket = Some((ts[i - 1], ts[i + 1]));
            break;
        }
    }
    let (mut lo, mut hi) = bracket?;
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo < 1e-13 * t_max.max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let tp = 0.5 * (lo + hi);
    Some((tp, f(tp)))
}
