//! Computes the frozen regression values for the acceptance suite.
use ndarray::Array2;
use num_complex::Complex64 as C64;
use phonon_sim::collective;
use phonon_sim::dynamics::*;
use phonon_sim::experiments::{default_span, table1_defaults, TableRow};
use phonon_sim::hilbert::*;
use phonon_sim::sequences::*;
use phonon_sim::verify::evolve_lindblad_expm;

fn peak_of(params: &SimParams, space: SpaceConfig, rho0: &DensityOp) -> ((f64, f64), (f64, f64)) {
    let span = default_span(params.g1);
    let grid: Vec<f64> = (0..=1000).map(|i| span * i as f64 / 1000.0).collect();
    let h = interaction_hamiltonian(space, params);
    let collapse = collapse_operators(space, params);
    let rk4 = apply_readout_model(&evolve_lindblad(&h, &collapse, rho0, &grid).unwrap(), params);
    let mats: Vec<Array2<C64>> = collapse.iter().map(|c| c.matrix.clone()).collect();
    let oracle = apply_readout_model(&evolve_lindblad_expm(&h.matrix, &mats, rho0, &grid).unwrap(), params);
    let p_rk4 = first_peak_discrete(&rk4.times, &rk4.p_reported).unwrap();
    let p_oracle = first_peak_discrete(&oracle.times, &oracle.p_reported).unwrap();
    (p_rk4, p_oracle)
}

fn main() {
    // FOCK row: single-phonon bright state on (2,2,2)
    let params = table1_defaults(TableRow::Fock);
    let space = SpaceConfig::new(2, 2, 2).unwrap();
    let rho0 = DensityOp::from_pure(&prepare_single_phonon(space, 0.0).unwrap());
    let (rk4, oracle) = peak_of(&params, space, &rho0);
    println!("FOCK     rk4=({:.12}, {:.12})  oracle=({:.12}, {:.12})  diff=({:.2e}, {:.2e})",
        rk4.0, rk4.1, oracle.0, oracle.1, (rk4.0-oracle.0).abs(), (rk4.1-oracle.1).abs());

    // COHERENT row: alpha = 0.25 displaced thermal on (3,3,2)
    let params = table1_defaults(TableRow::Coherent);
    let space = SpaceConfig::new(3, 3, 2).unwrap();
    let thermal = thermal_state(space, params.n_th).unwrap();
    let alpha = C64::new(0.2, 0.0);
    let (rho0, resid) = tickle_density(&thermal, alpha, alpha).unwrap();
    println!("coherent tickle residual: {resid:.3e}");
    let (rk4, oracle) = peak_of(&params, space, &rho0);
    println!("COHERENT rk4=({:.12}, {:.12})  oracle=({:.12}, {:.12})  diff=({:.2e}, {:.2e})",
        rk4.0, rk4.1, oracle.0, oracle.1, (rk4.0-oracle.0).abs(), (rk4.1-oracle.1).abs());

    // UPSILON row: |Y_pi> on (2,2,3)
    let params = table1_defaults(TableRow::Upsilon);
    let space = SpaceConfig::new(2, 2, 3).unwrap();
    let rho0 = DensityOp::from_pure(&prepare_upsilon(space, std::f64::consts::PI, std::f64::consts::PI).unwrap());
    let (rk4, oracle) = peak_of(&params, space, &rho0);
    println!("UPSILON  rk4=({:.12}, {:.12})  oracle=({:.12}, {:.12})  diff=({:.2e}, {:.2e})",
        rk4.0, rk4.1, oracle.0, oracle.1, (rk4.0-oracle.0).abs(), (rk4.1-oracle.1).abs());

    // criterion 7 reference: ideal max transfer of |Y_pi> and |Y_0| on (2,2,3)
    let space = SpaceConfig::new(2, 2, 3).unwrap();
    let h = interaction_hamiltonian(space, &SimParams::symmetric(7.3));
    let prop = UnitaryPropagator::new(&h).unwrap();
    for phi in [std::f64::consts::PI, 0.0] {
        let state = collective::upsilon_state(space, phi).unwrap();
        let span = default_span(7.3);
        let (tp, vp) = first_peak_continuous(|t| prop.p_up_at(&state, t).unwrap(), span, 4001).unwrap();
        println!("upsilon phi={phi:.3}: first peak t={tp:.9} ms, P={vp:.12}");
    }
}
