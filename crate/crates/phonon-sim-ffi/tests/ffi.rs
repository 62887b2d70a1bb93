//! Exercises the C ABI through the exported extern "C" functions.

use std::ffi::{CStr, CString};
use std::ptr;

use phonon_sim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ps_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn space_and_state_lifecycle() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(ps_space_new(3, 3, 2, &mut space), PsStatus::Ok);
        let mut dim = 0usize;
        assert_eq!(ps_space_dim(space, &mut dim), PsStatus::Ok);
        assert_eq!(dim, 32);

        let mut bright = ptr::null_mut();
        assert_eq!(ps_state_bright(space, 1, &mut bright), PsStatus::Ok);
        let mut state_dim = 0usize;
        assert_eq!(ps_state_dim(bright, &mut state_dim), PsStatus::Ok);
        assert_eq!(state_dim, dim);

        let mut re = vec![0.0; dim];
        let mut im = vec![0.0; dim];
        assert_eq!(
            ps_state_amplitudes(bright, re.as_mut_ptr(), im.as_mut_ptr(), dim),
            PsStatus::Ok
        );
        let norm: f64 = re.iter().zip(im.iter()).map(|(a, b)| a * a + b * b).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        // two nonzero amplitudes of 1/√2 each
        let nonzero = re.iter().filter(|x| x.abs() > 1e-12).count();
        assert_eq!(nonzero, 2);

        let mut json = ptr::null_mut();
        assert_eq!(ps_state_to_json(bright, &mut json), PsStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"amplitudes\""));
        ps_string_free(json);

        ps_state_free(bright);
        ps_space_free(space);
    }
}

#[test]
fn invalid_space_reports_error() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(ps_space_new(0, 3, 2, &mut space), PsStatus::InvalidArgument);
        assert!(last_error().contains("cutoff"), "{}", last_error());
        assert_eq!(ps_space_dim(ptr::null(), &mut 0usize), PsStatus::NullPointer);
    }
}

#[test]
fn decomposition_through_ffi() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(ps_space_new(4, 4, 2, &mut space), PsStatus::Ok);
        let mut upsilon = ptr::null_mut();
        assert_eq!(ps_state_upsilon(space, std::f64::consts::PI, &mut upsilon), PsStatus::Ok);

        let mut len = 0usize;
        assert_eq!(ps_state_decompose_len(upsilon, &mut len), PsStatus::Ok);
        let mut totals = vec![0u32; len];
        let mut brights = vec![0u32; len];
        let mut re = vec![0.0; len];
        let mut im = vec![0.0; len];
        let mut residual = -1.0;
        assert_eq!(
            ps_state_decompose(
                upsilon,
                totals.as_mut_ptr(),
                brights.as_mut_ptr(),
                re.as_mut_ptr(),
                im.as_mut_ptr(),
                len,
                &mut residual,
            ),
            PsStatus::Ok
        );
        assert!(residual < 1e-12);
        // |B²⟩ weight² = 1/8 for the anti-phased product state
        let idx = totals
            .iter()
            .zip(brights.iter())
            .position(|(t, b)| *t == 2 && *b == 2)
            .unwrap();
        let weight = re[idx] * re[idx] + im[idx] * im[idx];
        assert!((weight - 0.125).abs() < 1e-12);

        ps_state_free(upsilon);
        ps_space_free(space);
    }
}

#[test]
fn unitary_evolution_full_transfer() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(ps_space_new(2, 2, 2, &mut space), PsStatus::Ok);
        let mut params = ptr::null_mut();
        assert_eq!(ps_params_new(5.2, 5.2, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, &mut params), PsStatus::Ok);
        let mut bright = ptr::null_mut();
        assert_eq!(ps_state_bright(space, 1, &mut bright), PsStatus::Ok);

        let t_pi = 1.0 / (4.0 * 2f64.sqrt() * 5.2);
        let mut traj = ptr::null_mut();
        assert_eq!(ps_evolve_unitary(params, bright, t_pi, 3, &mut traj), PsStatus::Ok);
        let mut len = 0usize;
        assert_eq!(ps_trajectory_len(traj, &mut len), PsStatus::Ok);
        assert_eq!(len, 3);
        let mut p_up = vec![0.0; len];
        assert_eq!(ps_trajectory_p_up(traj, p_up.as_mut_ptr(), len), PsStatus::Ok);
        assert!((p_up[2] - 1.0).abs() < 1e-10, "full transfer, got {}", p_up[2]);

        ps_trajectory_free(traj);
        ps_state_free(bright);
        ps_params_free(params);
        ps_space_free(space);
    }
}

#[test]
fn lindblad_evolution_with_table_params() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(ps_space_new(2, 2, 2, &mut space), PsStatus::Ok);
        let mut params = ptr::null_mut();
        assert_eq!(ps_params_table1(PsTableRow::Fock, &mut params), PsStatus::Ok);
        let mut bright = ptr::null_mut();
        assert_eq!(ps_state_single_phonon(space, 0.0, &mut bright), PsStatus::Ok);
        let mut rho = ptr::null_mut();
        assert_eq!(ps_density_from_state(bright, &mut rho), PsStatus::Ok);

        let mut traj = ptr::null_mut();
        assert_eq!(ps_evolve_lindblad(params, rho, 0.14, 21, &mut traj), PsStatus::Ok);
        let mut reported = vec![0.0; 21];
        assert_eq!(ps_trajectory_p_reported(traj, reported.as_mut_ptr(), 21), PsStatus::Ok);
        // offset at t = 0, damped peak below contrast + offset later
        assert!((reported[0] - 0.03).abs() < 1e-9);
        let max = reported.iter().cloned().fold(0.0, f64::max);
        assert!(max > 0.5 && max <= 0.97 + 1e-9, "max {max}");

        ps_trajectory_free(traj);
        ps_density_free(rho);
        ps_state_free(bright);
        ps_params_free(params);
        ps_space_free(space);
    }
}

#[test]
fn tickle_and_thermal_through_ffi() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(ps_space_new(10, 10, 2, &mut space), PsStatus::Ok);
        let mut thermal = ptr::null_mut();
        assert_eq!(ps_density_thermal(space, 0.025, &mut thermal), PsStatus::Ok);
        let mut displaced = ptr::null_mut();
        let mut residual = -1.0;
        assert_eq!(
            ps_density_tickle(thermal, 1.0, 0.0, -1.0, 0.0, &mut displaced, &mut residual),
            PsStatus::Ok
        );
        assert!(residual > 0.0 && residual < 1e-6);

        // a too-small space reports a numerical (truncation) failure
        let mut small = ptr::null_mut();
        assert_eq!(ps_space_new(2, 2, 2, &mut small), PsStatus::Ok);
        let mut small_thermal = ptr::null_mut();
        assert_eq!(ps_density_thermal(small, 0.0, &mut small_thermal), PsStatus::Ok);
        let mut fail = ptr::null_mut();
        assert_eq!(
            ps_density_tickle(small_thermal, 1.0, 0.0, 0.0, 0.0, &mut fail, ptr::null_mut()),
            PsStatus::Numerical
        );
        assert!(last_error().contains("residual"));

        ps_density_free(displaced);
        ps_density_free(thermal);
        ps_density_free(small_thermal);
        ps_space_free(space);
        ps_space_free(small);
    }
}

#[test]
fn rabi_signal_and_fit_roundtrip() {
    unsafe {
        let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.0065).collect();
        let probs = [0.5, 0.5, 0.0];
        let mut rsb = vec![0.0; times.len()];
        let mut bsb = vec![0.0; times.len()];
        assert_eq!(
            ps_rabi_signal(
                probs.as_ptr(),
                probs.len(),
                126.8,
                0.041,
                0.2,
                0.0,
                PsSideband::Red,
                times.as_ptr(),
                rsb.as_mut_ptr(),
                times.len(),
            ),
            PsStatus::Ok
        );
        assert_eq!(
            ps_rabi_signal(
                probs.as_ptr(),
                probs.len(),
                126.8,
                0.041,
                0.2,
                0.0,
                PsSideband::Blue,
                times.as_ptr(),
                bsb.as_mut_ptr(),
                times.len(),
            ),
            PsStatus::Ok
        );
        assert_eq!(rsb[0], 0.0);

        let n_max = 3usize;
        let mut fitted = vec![0.0; n_max + 1];
        let mut stderr = vec![0.0; n_max + 1];
        let mut residual = -1.0;
        assert_eq!(
            ps_fit_distribution(
                times.as_ptr(),
                rsb.as_ptr(),
                times.len(),
                times.as_ptr(),
                bsb.as_ptr(),
                times.len(),
                126.8,
                0.041,
                0.2,
                0.0,
                n_max,
                fitted.as_mut_ptr(),
                stderr.as_mut_ptr(),
                &mut residual,
            ),
            PsStatus::Ok
        );
        assert!((fitted[0] - 0.5).abs() < 1e-4, "{fitted:?}");
        assert!((fitted[1] - 0.5).abs() < 1e-4);
        assert!(residual < 1e-6);
    }
}

#[test]
fn upsilon_preparation_weight() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(ps_space_new(2, 2, 3, &mut space), PsStatus::Ok);
        let mut state = ptr::null_mut();
        let phi = std::f64::consts::PI;
        assert_eq!(ps_state_prepare_upsilon(space, phi, phi, &mut state), PsStatus::Ok);
        let mut weight = 0.0;
        assert_eq!(ps_state_weight(state, &mut weight), PsStatus::Ok);
        assert!((weight - 0.5).abs() < 1e-12);
        let mut p_down = 0.0;
        assert_eq!(ps_state_level_population(state, 0, &mut p_down), PsStatus::Ok);
        assert!((p_down - 1.0).abs() < 1e-12);
        ps_state_free(state);
        ps_space_free(space);
    }
}

#[test]
fn experiment_runner_through_ffi() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let config = CString::new(
            "experiment = \"RABI_FOCK\"\n\n[scan]\npoints = 7\n",
        )
        .unwrap();
        let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(
            ps_run_experiment_toml(config.as_ptr(), out_dir.as_ptr(), PsFormat::Csv),
            PsStatus::Ok
        );
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);

        let bad = CString::new("experiment = \"RABI_FOCK\"\nwhat = 1\n").unwrap();
        assert_eq!(
            ps_run_experiment_toml(bad.as_ptr(), out_dir.as_ptr(), PsFormat::Csv),
            PsStatus::InvalidArgument
        );
        assert!(last_error().contains("what"));
    }
}

#[test]
fn version_is_exposed() {
    let version = unsafe { CStr::from_ptr(ps_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}
