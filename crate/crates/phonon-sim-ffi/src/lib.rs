//! C ABI for the phonon-sim toolkit.
//!
//! Conventions:
//! - every object is an opaque handle created by a `ps_*_new`-style call and
//!   released with the matching `ps_*_free`;
//! - every fallible call returns a [`PsStatus`]; on failure
//!   [`ps_last_error_message`] holds a thread-local description;
//! - array outputs fill caller-allocated buffers whose length is queried
//!   first (`ps_*_len`);
//! - units match the core library: kHz for rates, ms for times, radians for
//!   phases.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64 as C64;
use phonon_sim::collective;
use phonon_sim::dynamics::{
    apply_readout_model, collapse_operators, evolve_lindblad, evolve_unitary,
    interaction_hamiltonian, SimParams, Trajectory,
};
use phonon_sim::hilbert::{DensityOp, Level, Mode, PureState, SpaceConfig};
use phonon_sim::sequences;
use phonon_sim::tomography::{
    self, fit_distribution, PhononDistribution, RabiModel, RabiTrace, Sideband,
};
use phonon_sim::Error;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    Utf8 = 5,
    Panic = 6,
}

/// Fitted parameter rows.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsTableRow {
    Fock = 0,
    Coherent = 1,
    Upsilon = 2,
}

/// Sideband selector for tomography calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsSideband {
    Red = 0,
    Blue = 1,
}

/// Output format selector for `ps_run_experiment_toml`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsFormat {
    Csv = 0,
    Json = 1,
    Both = 2,
}

/// Opaque Hilbert-space description.
pub struct PsSpace(SpaceConfig);
/// Opaque pure state.
pub struct PsState(PureState);
/// Opaque density operator.
pub struct PsDensity(DensityOp);
/// Opaque simulation parameters.
pub struct PsParams(SimParams);
/// Opaque evolution result.
pub struct PsTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> PsStatus {
    match err {
        Error::Io(_) | Error::Csv(_) => PsStatus::Io,
        Error::Integration { .. } | Error::Positivity { .. } | Error::Truncation { .. } => {
            PsStatus::Numerical
        }
        _ => PsStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> PsStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

fn guard<F: FnOnce() -> PsStatus>(f: F) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic inside phonon-sim-ffi");
            PsStatus::Panic
        }
    }
}

/// # Safety
/// `handle` must be non-null and valid for writes.
unsafe fn write_handle<T>(handle: *mut *mut T, value: T) -> PsStatus {
    if handle.is_null() {
        set_error("null output handle");
        return PsStatus::NullPointer;
    }
    unsafe { *handle = Box::into_raw(Box::new(value)) };
    PsStatus::Ok
}

macro_rules! deref {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(value) => value,
            None => {
                set_error("null input handle");
                return PsStatus::NullPointer;
            }
        }
    };
}

// cbindgen does not expand macros, so the free functions are written out.
unsafe fn free_handle<T>(handle: *mut T) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Thread-local message describing the most recent failure. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned by a `ps_*_to_json`-style
/// call and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ---------------------------------------------------------------- space --

/// Creates a truncated space with the given Fock cutoffs (inclusive) and
/// electronic level count (2 or 3).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_space_new(
    n_max_1: usize,
    n_max_2: usize,
    electronic_levels: usize,
    out: *mut *mut PsSpace,
) -> PsStatus {
    guard(|| match SpaceConfig::new(n_max_1, n_max_2, electronic_levels) {
        Ok(space) => unsafe { write_handle(out, PsSpace(space)) },
        Err(err) => fail(err),
    })
}

/// Total dimension of the composite space.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_space_dim(space: *const PsSpace, out: *mut usize) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        if out.is_null() {
            set_error("null output pointer");
            return PsStatus::NullPointer;
        }
        unsafe { *out = space.0.dim() };
        PsStatus::Ok
    })
}

/// Releases a space handle.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_space_free(handle: *mut PsSpace) {
    unsafe { free_handle(handle) }
}

// --------------------------------------------------------------- params --

/// Builds simulation parameters; rates in kHz.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_params_new(
    g1: f64,
    g2: f64,
    phi: f64,
    gamma_m: f64,
    gamma_e: f64,
    n_th: f64,
    contrast: f64,
    offset: f64,
    out: *mut *mut PsParams,
) -> PsStatus {
    guard(|| {
        let params = SimParams { g1, g2, phi, gamma_m, gamma_e, n_th, contrast, offset };
        match params.validate() {
            Ok(()) => unsafe { write_handle(out, PsParams(params)) },
            Err(err) => fail(err),
        }
    })
}

/// The fitted parameter set of one experiment family.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_params_table1(row: PsTableRow, out: *mut *mut PsParams) -> PsStatus {
    guard(|| {
        let row = match row {
            PsTableRow::Fock => phonon_sim::experiments::TableRow::Fock,
            PsTableRow::Coherent => phonon_sim::experiments::TableRow::Coherent,
            PsTableRow::Upsilon => phonon_sim::experiments::TableRow::Upsilon,
        };
        unsafe { write_handle(out, PsParams(phonon_sim::experiments::table1_defaults(row))) }
    })
}

/// Releases a parameter handle.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_params_free(handle: *mut PsParams) {
    unsafe { free_handle(handle) }
}

// --------------------------------------------------------------- states --

/// The ground ket |↓, 0, 0⟩.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_ground(space: *const PsSpace, out: *mut *mut PsState) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        unsafe { write_handle(out, PsState(PureState::ground(space.0))) }
    })
}

/// The maximally bright N-phonon collective state on |↓⟩.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_bright(
    space: *const PsSpace,
    total_phonons: usize,
    out: *mut *mut PsState,
) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        match collective::bright_state(space.0, total_phonons) {
            Ok(state) => unsafe { write_handle(out, PsState(state)) },
            Err(err) => fail(err),
        }
    })
}

/// The perfectly dark N-phonon collective state on |↓⟩.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_dark(
    space: *const PsSpace,
    total_phonons: usize,
    out: *mut *mut PsState,
) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        match collective::dark_state(space.0, total_phonons) {
            Ok(state) => unsafe { write_handle(out, PsState(state)) },
            Err(err) => fail(err),
        }
    })
}

/// The two-mode coherent state |α, e^{iφ}α⟩ on |↓⟩.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_coherent(
    space: *const PsSpace,
    alpha_re: f64,
    alpha_im: f64,
    phi: f64,
    out: *mut *mut PsState,
) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        match collective::coherent_two_mode(space.0, C64::new(alpha_re, alpha_im), phi) {
            Ok(state) => unsafe { write_handle(out, PsState(state)) },
            Err(err) => fail(err),
        }
    })
}

/// The motional product state ½(|0⟩+|1⟩)(|0⟩+e^{iφ}|1⟩) on |↓⟩.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_upsilon(
    space: *const PsSpace,
    phi: f64,
    out: *mut *mut PsState,
) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        match collective::upsilon_state(space.0, phi) {
            Ok(state) => unsafe { write_handle(out, PsState(state)) },
            Err(err) => fail(err),
        }
    })
}

/// Runs the single-phonon preparation program, yielding
/// |↓⟩(|0,1⟩+e^{iφ}|1,0⟩)/√2.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_single_phonon(
    space: *const PsSpace,
    phi: f64,
    out: *mut *mut PsState,
) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        match sequences::prepare_single_phonon(space.0, phi) {
            Ok(state) => unsafe { write_handle(out, PsState(state)) },
            Err(err) => fail(err),
        }
    })
}

/// Dimension of the state's amplitude vector.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_dim(state: *const PsState, out: *mut usize) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        if out.is_null() {
            set_error("null output pointer");
            return PsStatus::NullPointer;
        }
        unsafe { *out = state.0.amplitudes.len() };
        PsStatus::Ok
    })
}

/// Postselection weight carried by the state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_weight(state: *const PsState, out: *mut f64) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        if out.is_null() {
            set_error("null output pointer");
            return PsStatus::NullPointer;
        }
        unsafe { *out = state.0.weight };
        PsStatus::Ok
    })
}

/// Copies the amplitudes into caller-provided real/imaginary buffers of
/// length `len` (= the state dimension).
///
/// # Safety
/// Buffers must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_amplitudes(
    state: *const PsState,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        if out_re.is_null() || out_im.is_null() {
            set_error("null output buffer");
            return PsStatus::NullPointer;
        }
        if len != state.0.amplitudes.len() {
            set_error("buffer length does not match the state dimension");
            return PsStatus::InvalidArgument;
        }
        for (i, amp) in state.0.amplitudes.iter().enumerate() {
            unsafe {
                *out_re.add(i) = amp.re;
                *out_im.add(i) = amp.im;
            }
        }
        PsStatus::Ok
    })
}

/// Serializes the state dump JSON; free with `ps_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_to_json(
    state: *const PsState,
    out: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        if out.is_null() {
            set_error("null output pointer");
            return PsStatus::NullPointer;
        }
        match CString::new(state.0.to_json()) {
            Ok(text) => {
                unsafe { *out = text.into_raw() };
                PsStatus::Ok
            }
            Err(_) => {
                set_error("state JSON contained an interior NUL");
                PsStatus::Utf8
            }
        }
    })
}

/// Number of collective-basis entries a decomposition of this state reports.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_decompose_len(
    state: *const PsState,
    out: *mut usize,
) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        if out.is_null() {
            set_error("null output pointer");
            return PsStatus::NullPointer;
        }
        let n_max = state.0.space.n_max_1.min(state.0.space.n_max_2);
        unsafe { *out = (n_max + 1) * (n_max + 2) / 2 };
        PsStatus::Ok
    })
}

/// Decomposes the state into the collective basis. Buffers must hold
/// `ps_state_decompose_len` entries; entry i reports the amplitude of
/// |ψ_{bright[i]}^{total[i]}⟩.
///
/// # Safety
/// Buffers must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_decompose(
    state: *const PsState,
    out_total: *mut u32,
    out_bright: *mut u32,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
    out_residual: *mut f64,
) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        if out_total.is_null()
            || out_bright.is_null()
            || out_re.is_null()
            || out_im.is_null()
            || out_residual.is_null()
        {
            set_error("null output buffer");
            return PsStatus::NullPointer;
        }
        let decomposition = match collective::decompose(&state.0) {
            Ok(d) => d,
            Err(err) => return fail(err),
        };
        if decomposition.entries.len() != len {
            set_error("buffer length does not match ps_state_decompose_len");
            return PsStatus::InvalidArgument;
        }
        for (i, (idx, amp)) in decomposition.entries.iter().enumerate() {
            unsafe {
                *out_total.add(i) = idx.total as u32;
                *out_bright.add(i) = idx.bright as u32;
                *out_re.add(i) = amp.re;
                *out_im.add(i) = amp.im;
            }
        }
        unsafe { *out_residual = decomposition.residual };
        PsStatus::Ok
    })
}

/// Releases a state handle.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_state_free(handle: *mut PsState) {
    unsafe { free_handle(handle) }
}

// -------------------------------------------------------------- density --

/// |ψ⟩⟨ψ| of a pure state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_density_from_state(
    state: *const PsState,
    out: *mut *mut PsDensity,
) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        unsafe { write_handle(out, PsDensity(DensityOp::from_pure(&state.0))) }
    })
}

/// Thermal product state at mean occupation `n_th` on |↓⟩⟨↓|.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_density_thermal(
    space: *const PsSpace,
    n_th: f64,
    out: *mut *mut PsDensity,
) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        match sequences::thermal_state(space.0, n_th) {
            Ok(rho) => unsafe { write_handle(out, PsDensity(rho)) },
            Err(err) => fail(err),
        }
    })
}

/// Applies per-mode displacements to a density operator; writes the
/// truncation residual (dropped-tail probability).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_density_tickle(
    rho: *const PsDensity,
    alpha1_re: f64,
    alpha1_im: f64,
    alpha2_re: f64,
    alpha2_im: f64,
    out: *mut *mut PsDensity,
    out_residual: *mut f64,
) -> PsStatus {
    guard(|| {
        let rho = deref!(rho);
        match sequences::tickle_density(
            &rho.0,
            C64::new(alpha1_re, alpha1_im),
            C64::new(alpha2_re, alpha2_im),
        ) {
            Ok((displaced, residual)) => {
                if !out_residual.is_null() {
                    unsafe { *out_residual = residual };
                }
                unsafe { write_handle(out, PsDensity(displaced)) }
            }
            Err(err) => fail(err),
        }
    })
}

/// Releases a density handle.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_density_free(handle: *mut PsDensity) {
    unsafe { free_handle(handle) }
}

// ------------------------------------------------------------- dynamics --

/// Closed-system evolution of a pure state under the bichromatic interaction
/// on a uniform grid of `samples` points spanning [0, duration]. The readout
/// model of `params` fills the reported populations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_evolve_unitary(
    params: *const PsParams,
    state: *const PsState,
    duration_ms: f64,
    samples: usize,
    out: *mut *mut PsTrajectory,
) -> PsStatus {
    guard(|| {
        let params = deref!(params);
        let state = deref!(state);
        let h = interaction_hamiltonian(state.0.space, &params.0);
        match evolve_unitary(&h, &state.0, duration_ms, samples) {
            Ok(traj) => unsafe {
                write_handle(out, PsTrajectory(apply_readout_model(&traj, &params.0)))
            },
            Err(err) => fail(err),
        }
    })
}

/// Lindblad evolution of a density operator with the dephasing collapse
/// operators of `params`, readout model applied.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_evolve_lindblad(
    params: *const PsParams,
    rho: *const PsDensity,
    duration_ms: f64,
    samples: usize,
    out: *mut *mut PsTrajectory,
) -> PsStatus {
    guard(|| {
        let params = deref!(params);
        let rho = deref!(rho);
        if samples < 2 {
            set_error("need at least two samples");
            return PsStatus::InvalidArgument;
        }
        let h = interaction_hamiltonian(rho.0.space, &params.0);
        let collapse = collapse_operators(rho.0.space, &params.0);
        let grid: Vec<f64> =
            (0..samples).map(|i| duration_ms * i as f64 / (samples - 1) as f64).collect();
        match evolve_lindblad(&h, &collapse, &rho.0, &grid) {
            Ok(traj) => unsafe {
                write_handle(out, PsTrajectory(apply_readout_model(&traj, &params.0)))
            },
            Err(err) => fail(err),
        }
    })
}

/// Number of samples in a trajectory.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_trajectory_len(
    traj: *const PsTrajectory,
    out: *mut usize,
) -> PsStatus {
    guard(|| {
        let traj = deref!(traj);
        if out.is_null() {
            set_error("null output pointer");
            return PsStatus::NullPointer;
        }
        unsafe { *out = traj.0.times.len() };
        PsStatus::Ok
    })
}

unsafe fn copy_series(series: &[f64], out: *mut f64, len: usize) -> PsStatus {
    if out.is_null() {
        set_error("null output buffer");
        return PsStatus::NullPointer;
    }
    if len != series.len() {
        set_error("buffer length does not match the trajectory length");
        return PsStatus::InvalidArgument;
    }
    for (i, value) in series.iter().enumerate() {
        unsafe { *out.add(i) = *value };
    }
    PsStatus::Ok
}

/// Copies the sample times (ms).
///
/// # Safety
/// The buffer must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ps_trajectory_times(
    traj: *const PsTrajectory,
    out: *mut f64,
    len: usize,
) -> PsStatus {
    guard(|| {
        let traj = deref!(traj);
        unsafe { copy_series(&traj.0.times, out, len) }
    })
}

/// Copies the excited-state populations.
///
/// # Safety
/// The buffer must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ps_trajectory_p_up(
    traj: *const PsTrajectory,
    out: *mut f64,
    len: usize,
) -> PsStatus {
    guard(|| {
        let traj = deref!(traj);
        unsafe { copy_series(&traj.0.p_up, out, len) }
    })
}

/// Copies the readout-model populations (contrast/offset applied).
///
/// # Safety
/// The buffer must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ps_trajectory_p_reported(
    traj: *const PsTrajectory,
    out: *mut f64,
    len: usize,
) -> PsStatus {
    guard(|| {
        let traj = deref!(traj);
        unsafe { copy_series(&traj.0.p_reported, out, len) }
    })
}

/// Releases a trajectory handle.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_trajectory_free(handle: *mut PsTrajectory) {
    unsafe { free_handle(handle) }
}

// ----------------------------------------------------------- tomography --

/// Evaluates the sideband Rabi signal Σ_n p_n·½[1 − cos(2πΩ_n t)e^{−2πγ_n t}]
/// for a distribution `probs[0..n_probs]` at the given times.
///
/// # Safety
/// Buffers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ps_rabi_signal(
    probs: *const f64,
    n_probs: usize,
    omega0_khz: f64,
    eta: f64,
    decay_khz: f64,
    decay_exponent: f64,
    sideband: PsSideband,
    times: *const f64,
    out: *mut f64,
    len: usize,
) -> PsStatus {
    guard(|| {
        if probs.is_null() || times.is_null() || out.is_null() {
            set_error("null buffer");
            return PsStatus::NullPointer;
        }
        let probs = unsafe { std::slice::from_raw_parts(probs, n_probs) };
        let times = unsafe { std::slice::from_raw_parts(times, len) };
        let dist = match PhononDistribution::new(probs.to_vec()) {
            Ok(d) => d,
            Err(err) => return fail(err),
        };
        let model = RabiModel {
            omega0: omega0_khz,
            eta,
            decay: decay_khz,
            decay_exponent,
        };
        if let Err(err) = model.validate() {
            return fail(err);
        }
        let side = match sideband {
            PsSideband::Red => Sideband::Red,
            PsSideband::Blue => Sideband::Blue,
        };
        let signal = tomography::rabi_signal(&dist, &model, side, times);
        for (i, value) in signal.iter().enumerate() {
            unsafe { *out.add(i) = *value };
        }
        PsStatus::Ok
    })
}

/// Jointly fits an RSB and a BSB trace (same mode, shared time axes allowed
/// to differ) and writes the fitted probabilities and their uncertainties
/// into buffers of length `n_max + 1`.
///
/// # Safety
/// Buffers must be valid for the stated lengths.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ps_fit_distribution(
    rsb_times: *const f64,
    rsb_p_up: *const f64,
    rsb_len: usize,
    bsb_times: *const f64,
    bsb_p_up: *const f64,
    bsb_len: usize,
    omega0_khz: f64,
    eta: f64,
    decay_khz: f64,
    decay_exponent: f64,
    n_max: usize,
    out_probs: *mut f64,
    out_stderr: *mut f64,
    out_residual: *mut f64,
) -> PsStatus {
    guard(|| {
        if rsb_times.is_null()
            || rsb_p_up.is_null()
            || bsb_times.is_null()
            || bsb_p_up.is_null()
            || out_probs.is_null()
            || out_stderr.is_null()
        {
            set_error("null buffer");
            return PsStatus::NullPointer;
        }
        let model = RabiModel {
            omega0: omega0_khz,
            eta,
            decay: decay_khz,
            decay_exponent,
        };
        let rsb = RabiTrace {
            times: unsafe { std::slice::from_raw_parts(rsb_times, rsb_len) }.to_vec(),
            p_up: unsafe { std::slice::from_raw_parts(rsb_p_up, rsb_len) }.to_vec(),
            sigma: None,
            sideband: Sideband::Red,
            mode: Mode::One,
        };
        let bsb = RabiTrace {
            times: unsafe { std::slice::from_raw_parts(bsb_times, bsb_len) }.to_vec(),
            p_up: unsafe { std::slice::from_raw_parts(bsb_p_up, bsb_len) }.to_vec(),
            sigma: None,
            sideband: Sideband::Blue,
            mode: Mode::One,
        };
        match fit_distribution(&rsb, &bsb, &model, n_max) {
            Ok(fit) => {
                for n in 0..=n_max {
                    unsafe {
                        *out_probs.add(n) = fit.distribution.probs[n];
                        *out_stderr.add(n) = fit.stderr[n];
                    }
                }
                if !out_residual.is_null() {
                    unsafe { *out_residual = fit.residual };
                }
                PsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

// ---------------------------------------------------------- experiments --

/// Parses a TOML experiment config, runs it, and writes the result tables
/// into `out_dir`.
///
/// # Safety
/// `config_toml` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ps_run_experiment_toml(
    config_toml: *const c_char,
    out_dir: *const c_char,
    format: PsFormat,
) -> PsStatus {
    guard(|| {
        if config_toml.is_null() || out_dir.is_null() {
            set_error("null string argument");
            return PsStatus::NullPointer;
        }
        let config_text = match unsafe { CStr::from_ptr(config_toml) }.to_str() {
            Ok(text) => text,
            Err(_) => {
                set_error("config is not valid UTF-8");
                return PsStatus::Utf8;
            }
        };
        let out_dir = match unsafe { CStr::from_ptr(out_dir) }.to_str() {
            Ok(text) => std::path::PathBuf::from(text),
            Err(_) => {
                set_error("output directory is not valid UTF-8");
                return PsStatus::Utf8;
            }
        };
        let run = || -> Result<(), Error> {
            let config = phonon_sim::experiments::RawConfig::parse_toml(config_text)?.resolve()?;
            let result = phonon_sim::experiments::run(&config)?;
            std::fs::create_dir_all(&out_dir)?;
            let stem = result.file_stem();
            if format != PsFormat::Json {
                let file = std::fs::File::create(out_dir.join(format!("{stem}.csv")))?;
                result.write_csv(file)?;
            }
            if format != PsFormat::Csv {
                std::fs::write(out_dir.join(format!("{stem}.json")), result.to_json())?;
            }
            Ok(())
        };
        match run() {
            Ok(()) => PsStatus::Ok,
            Err(err) => fail(err),
        }
    })
}

/// Weight (survival probability) of a prepared product state: convenience
/// check that the two postselection rounds behaved as expected.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_prepare_upsilon(
    space: *const PsSpace,
    phi1: f64,
    phi2: f64,
    out: *mut *mut PsState,
) -> PsStatus {
    guard(|| {
        let space = deref!(space);
        match sequences::prepare_upsilon(space.0, phi1, phi2) {
            Ok(state) => unsafe { write_handle(out, PsState(state)) },
            Err(err) => fail(err),
        }
    })
}

/// Electronic-level population of a state (0 = down, 1 = up, 2 = auxiliary).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_state_level_population(
    state: *const PsState,
    level: u32,
    out: *mut f64,
) -> PsStatus {
    guard(|| {
        let state = deref!(state);
        if out.is_null() {
            set_error("null output pointer");
            return PsStatus::NullPointer;
        }
        let Some(level) = Level::from_index(level as usize) else {
            set_error("level must be 0, 1 or 2");
            return PsStatus::InvalidArgument;
        };
        unsafe { *out = state.0.level_population(level) };
        PsStatus::Ok
    })
}
