//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured value. Run with `cargo test --test acceptance --
//! --nocapture` to see every line.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::f64::consts::{PI, SQRT_2, TAU};

use phonon_sim::collective::{
    bright_state, coherent_two_mode, collective_state, dark_state, decompose, upsilon_state,
    CollectiveIndex,
};
use phonon_sim::dynamics::{
    apply_readout_model, collapse_operators, evolve_lindblad, first_peak_continuous,
    first_peak_discrete, interaction_hamiltonian, single_mode_hamiltonian, SimParams,
    TrajectoryStates, UnitaryPropagator,
};
use phonon_sim::experiments::{default_span, table1_defaults, TableRow};
use phonon_sim::hilbert::{overlap, DensityOp, Level, Mode, PureState, SpaceConfig};
use phonon_sim::sequences::{
    prepare_single_phonon, prepare_single_phonon_excited, prepare_upsilon, thermal_state,
    tickle_density,
};
use phonon_sim::tomography::{
    add_projection_noise, displaced_thermal_probs, fit_distribution, synthesize_trace,
    PhononDistribution, RabiModel, Sideband,
};
use phonon_sim::verify::evolve_lindblad_expm;

fn report(criterion: u32, name: &str, detail: &str) {
    println!("criterion {criterion:>2} ({name}): PASS: {detail}");
}

// 1. Collective-basis orthonormality: |⟨ψ_n^N|ψ_n'^N'⟩ − δδ| < 1e-12 for all
//    N, N' ≤ 10, checked on full state vectors.
#[test]
fn criterion_01_orthonormality() {
    let start = std::time::Instant::now();
    let space = SpaceConfig::new(10, 10, 2).unwrap();
    let mut states = Vec::new();
    for total in 0..=10usize {
        for bright in 0..=total {
            states.push((
                total,
                bright,
                collective_state(space, CollectiveIndex { total, bright }, Level::Down).unwrap(),
            ));
        }
    }
    let mut worst = 0.0f64;
    for (n_a, b_a, a) in &states {
        for (n_b, b_b, b) in &states {
            let ip = overlap(a, b).unwrap();
            let expected = if n_a == n_b && b_a == b_b { 1.0 } else { 0.0 };
            worst = worst.max((ip.re - expected).abs().max(ip.im.abs()));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "collective orthonormality",
        &format!("max |⟨ψ|ψ'⟩ − δδ| = {worst:.3e} < 1e-12, {elapsed:.2} s"),
    );
    assert!(worst < 1e-12);
    assert!(elapsed < 1.0, "runtime {elapsed:.2} s exceeds 1 s");
}

// 2. Ladder relation: ‖H|ψ_n^N⟩|↓⟩ − 2πg√(2n)|ψ_(n−1)^(N−1)⟩|↑⟩‖ < 1e-10
//    for N ≤ 6 and all n.
#[test]
fn criterion_02_ladder_relation() {
    let space = SpaceConfig::new(6, 6, 2).unwrap();
    let g = 1.0;
    let h = interaction_hamiltonian(space, &SimParams::symmetric(g));
    let mut worst = 0.0f64;
    for total in 1..=6usize {
        for bright in 0..=total {
            let psi =
                collective_state(space, CollectiveIndex { total, bright }, Level::Down).unwrap();
            let mut diff = h.apply(&psi).unwrap().amplitudes;
            if bright > 0 {
                let target = collective_state(
                    space,
                    CollectiveIndex { total: total - 1, bright: bright - 1 },
                    Level::Up,
                )
                .unwrap();
                let coeff = C64::new(TAU * g * (2.0 * bright as f64).sqrt(), 0.0);
                diff = diff - target.amplitudes.mapv(|z| coeff * z);
            }
            worst = worst.max(diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
        }
    }
    report(2, "ladder relation", &format!("max residual norm = {worst:.3e} < 1e-10"));
    assert!(worst < 1e-10);
}

// 3. Dark annihilation ‖H|↓⟩|D^N⟩‖ < 1e-12 and bright matrix element
//    ⟨B^(N−1)|⟨↑|H|↓⟩|B^N⟩/(2πg) = √(2N) within 1e-10, N ≤ 6.
#[test]
fn criterion_03_dark_annihilation_bright_element() {
    let space = SpaceConfig::new(6, 6, 2).unwrap();
    let g = 1.0;
    let h = interaction_hamiltonian(space, &SimParams::symmetric(g));
    let mut worst_dark = 0.0f64;
    let mut worst_bright = 0.0f64;
    for total in 1..=6usize {
        let dark = dark_state(space, total).unwrap();
        worst_dark = worst_dark.max(h.apply(&dark).unwrap().norm());

        let bright = bright_state(space, total).unwrap();
        let target = collective_state(
            space,
            CollectiveIndex { total: total - 1, bright: total - 1 },
            Level::Up,
        )
        .unwrap();
        let element = overlap(&target, &h.apply(&bright).unwrap()).unwrap();
        let deviation = (element.re / (TAU * g) - (2.0 * total as f64).sqrt()).abs()
            + element.im.abs() / (TAU * g);
        worst_bright = worst_bright.max(deviation);
    }
    report(
        3,
        "dark annihilation / bright element",
        &format!("max ‖H|↓,D^N⟩‖ = {worst_dark:.3e} < 1e-12, max element dev = {worst_bright:.3e} < 1e-10"),
    );
    assert!(worst_dark < 1e-12);
    assert!(worst_bright < 1e-10);
}

fn sqrt2_observables(space: SpaceConfig, g: f64) -> (f64, f64) {
    let h_full = interaction_hamiltonian(space, &SimParams::symmetric(g));
    let prop_full = UnitaryPropagator::new(&h_full).unwrap();
    let span = default_span(g);
    let bright = bright_state(space, 1).unwrap();
    let (t_bright, _) =
        first_peak_continuous(|t| prop_full.p_up_at(&bright, t).unwrap(), span, 4001).unwrap();

    let h_single = single_mode_hamiltonian(space, g, Mode::Two);
    let prop_single = UnitaryPropagator::new(&h_single).unwrap();
    let single = PureState::basis_ket(space, Level::Down, 0, 1).unwrap();
    let (t_single, _) =
        first_peak_continuous(|t| prop_single.p_up_at(&single, t).unwrap(), span, 4001).unwrap();

    let dark = dark_state(space, 1).unwrap();
    let dark_max = (0..=600)
        .map(|i| prop_full.p_up_at(&dark, span * i as f64 / 600.0).unwrap())
        .fold(0.0, f64::max);
    (t_single / t_bright, dark_max)
}

// 4. √2 Rabi enhancement at γ = 0: first-peak-time ratio single-mode/bright
//    equals √2 within 1e-4; dark-state max P↑ < 1e-10. Runtime < 1 s.
#[test]
fn criterion_04_sqrt2_enhancement() {
    let start = std::time::Instant::now();
    let space = SpaceConfig::new(3, 3, 2).unwrap();
    let (ratio, dark_max) = sqrt2_observables(space, 5.2);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        "sqrt(2) Rabi enhancement",
        &format!(
            "t_single/t_bright = {ratio:.8} (√2 ± 1e-4), dark max P↑ = {dark_max:.3e} < 1e-10, {elapsed:.2} s"
        ),
    );
    assert!((ratio - SQRT_2).abs() < 1e-4);
    assert!(dark_max < 1e-10);
    assert!(elapsed < 1.0, "runtime {elapsed:.2} s exceeds 1 s");
}

fn excited_marginals(space: SpaceConfig, g: f64) -> [[Vec<f64>; 2]; 2] {
    let h = interaction_hamiltonian(space, &SimParams::symmetric(g));
    let prop = UnitaryPropagator::new(&h).unwrap();
    let span = default_span(g);
    let mut out: [[Vec<f64>; 2]; 2] = Default::default();
    for (idx, phi) in [0.0, PI].into_iter().enumerate() {
        let initial = prepare_single_phonon_excited(space, phi).unwrap();
        let (t_pi, _) = first_peak_continuous(
            |t| 1.0 - prop.p_up_at(&initial, t).unwrap(),
            span,
            4001,
        )
        .unwrap();
        let final_state = prop.state_at(&initial, t_pi).unwrap();
        out[idx] = [
            final_state.mode_marginal(Mode::One),
            final_state.mode_marginal(Mode::Two),
        ];
    }
    out
}

// 5. Excited-state products: an ideal bichromatic π pulse takes |↑⟩|B¹⟩ to
//    per-mode marginals (¼, ½, ¼) and |↑⟩|D¹⟩ to (½, 0, ½), each entry
//    within 1e-8.
#[test]
fn criterion_05_excited_state_products() {
    let space = SpaceConfig::new(3, 3, 2).unwrap();
    let marginals = excited_marginals(space, 5.2);
    let expected = [[0.25, 0.5, 0.25], [0.5, 0.0, 0.5]];
    let mut worst = 0.0f64;
    for (case, target) in expected.iter().enumerate() {
        for mode in 0..2 {
            for (n, e) in target.iter().enumerate() {
                worst = worst.max((marginals[case][mode][n] - e).abs());
            }
        }
    }
    report(
        5,
        "excited-state products",
        &format!("max marginal deviation = {worst:.3e} < 1e-8 (bright → ¼,½,¼; dark → ½,0,½)"),
    );
    assert!(worst < 1e-8);
}

fn coherent_observables(space: SpaceConfig, alpha: f64) -> (f64, Vec<f64>) {
    let g = 7.1;
    let h = interaction_hamiltonian(space, &SimParams::symmetric(g));
    let prop = UnitaryPropagator::new(&h).unwrap();
    let span = default_span(g);
    let dark = coherent_two_mode(space, C64::new(alpha, 0.0), PI).unwrap();
    let dark_max = (0..=400)
        .map(|i| prop.p_up_at(&dark, span * i as f64 / 400.0).unwrap())
        .fold(0.0, f64::max);
    let bright = coherent_two_mode(space, C64::new(alpha, 0.0), 0.0).unwrap();
    let dec = decompose(&bright).unwrap();
    let weights = (0..=6).map(|n| dec.probability(n, n)).collect();
    (dark_max, weights)
}

// 6. Coherent bright/dark at γ = 0, n_th = 0, α = 1: the dark input stays
//    below 1e-8 in P↑, and the bright decomposition weights match the
//    Poisson-of-total-phonon-number law e^{−2|α|²}·(2|α|²)^N/N! within 1e-8
//    for N ≤ 6 (the squared series amplitudes).
#[test]
fn criterion_06_coherent_bright_dark() {
    let space = SpaceConfig::new(14, 14, 2).unwrap();
    let (dark_max, weights) = coherent_observables(space, 1.0);
    let mut worst = 0.0f64;
    let mut factorial = 1.0;
    for (n, w) in weights.iter().enumerate() {
        if n > 0 {
            factorial *= n as f64;
        }
        let expected = (-2.0f64).exp() * 2f64.powi(n as i32) / factorial;
        worst = worst.max((w - expected).abs());
    }
    report(
        6,
        "coherent bright/dark",
        &format!("dark max P↑ = {dark_max:.3e} < 1e-8, max weight deviation = {worst:.3e} < 1e-8"),
    );
    assert!(dark_max < 1e-8);
    assert!(worst < 1e-8);
}

fn upsilon_observables(space: SpaceConfig, g: f64) -> (f64, f64, f64, f64) {
    let h = interaction_hamiltonian(space, &SimParams::symmetric(g));
    let prop = UnitaryPropagator::new(&h).unwrap();
    let span = default_span(g);
    let pi_state = upsilon_state(space, PI).unwrap();
    let (t_pi, max_pi) =
        first_peak_continuous(|t| prop.p_up_at(&pi_state, t).unwrap(), span, 4001).unwrap();
    let zero_state = upsilon_state(space, 0.0).unwrap();
    let (t_zero, max_zero) =
        first_peak_continuous(|t| prop.p_up_at(&zero_state, t).unwrap(), span, 4001).unwrap();
    (t_pi, max_pi, t_zero, max_zero)
}

// 7. Product-state residual coupling at γ = 0: |Υ_π⟩ has max P↑ > 0.01
//    matching the Liouvillian-exponential oracle within 1e-8, and |Υ_0⟩'s
//    first peak is later and higher (slower but greater transfer).
#[test]
fn criterion_07_upsilon_residual_coupling() {
    let space = SpaceConfig::new(2, 2, 3).unwrap();
    let g = 7.3;
    let (t_pi, max_pi, t_zero, max_zero) = upsilon_observables(space, g);

    // independent oracle: propagate by the exponential of the (γ = 0)
    // Liouvillian on the same dense grid and compare maxima
    let h = interaction_hamiltonian(space, &SimParams::symmetric(g));
    let rho0 = DensityOp::from_pure(&upsilon_state(space, PI).unwrap());
    let span = default_span(g);
    let grid: Vec<f64> = (0..=2000).map(|i| span * i as f64 / 2000.0).collect();
    let oracle = evolve_lindblad_expm(&h.matrix, &[], &rho0, &grid).unwrap();
    let (_, oracle_max) = first_peak_discrete(&oracle.times, &oracle.p_up).unwrap();

    report(
        7,
        "product-state residual coupling",
        &format!(
            "Υ_π max P↑ = {max_pi:.9} (> 0.01, oracle {oracle_max:.9}), Υ_0 peak (t = {t_zero:.6} > {t_pi:.6}, P = {max_zero:.6} > {max_pi:.6})"
        ),
    );
    assert!(max_pi > 0.01);
    assert!((max_pi - oracle_max).abs() < 1e-8);
    assert!(t_zero > t_pi);
    assert!(max_zero > max_pi);
}

// 8. Lindblad integrator vs the vectorized-Liouvillian exponential on a
//    2 ⊗ 3 ⊗ 3 space with the Fock-row rates: max |p_up| deviation < 1e-6
//    over two Rabi periods, trace drift < 1e-8, min eigenvalue ≥ −1e-6.
//    Runtime < 10 s.
#[test]
fn criterion_08_lindblad_vs_liouvillian() {
    let start = std::time::Instant::now();
    let space = SpaceConfig::new(2, 2, 2).unwrap();
    let params = table1_defaults(TableRow::Fock);
    let h = interaction_hamiltonian(space, &params);
    let collapse = collapse_operators(space, &params);
    let rho0 = DensityOp::from_pure(&prepare_single_phonon(space, 0.0).unwrap());
    let span = default_span(params.g1);
    let grid: Vec<f64> = (0..=100).map(|i| span * i as f64 / 100.0).collect();

    let rk4 = evolve_lindblad(&h, &collapse, &rho0, &grid).unwrap();
    let mats: Vec<Array2<C64>> = collapse.iter().map(|c| c.matrix.clone()).collect();
    let oracle = evolve_lindblad_expm(&h.matrix, &mats, &rho0, &grid).unwrap();

    let worst = rk4
        .p_up
        .iter()
        .zip(oracle.p_up.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let drift = rk4.trace_err.iter().cloned().fold(0.0, f64::max);
    let min_eig = match &rk4.states {
        TrajectoryStates::Density(states) => states
            .iter()
            .map(|s| s.min_eigenvalue().unwrap())
            .fold(f64::INFINITY, f64::min),
        _ => unreachable!(),
    };
    let elapsed = start.elapsed().as_secs_f64();
    report(
        8,
        "Lindblad integrator vs oracle",
        &format!(
            "max |p_up dev| = {worst:.3e} < 1e-6, trace drift = {drift:.3e} < 1e-8, min eig = {min_eig:.3e} ≥ −1e-6, {elapsed:.2} s"
        ),
    );
    assert!(worst < 1e-6);
    assert!(drift < 1e-8);
    assert!(min_eig >= -1e-6);
    assert!(elapsed < 10.0, "runtime {elapsed:.2} s exceeds 10 s");
}

// 9. Table-row curve regeneration: the full pipeline (preparation → Lindblad
//    → contrast/offset) reproduces the first-peak height and time of the
//    oracle pipeline within 1e-6 on pinned small-space configurations, and
//    matches the frozen regression values. Visual parity with the published
//    simulated curves is a documented manual check (see README).
#[test]
fn criterion_09_table_row_regeneration() {
    struct Case {
        row: TableRow,
        name: &'static str,
        expected_t: f64,
        expected_p: f64,
    }
    // frozen once from the oracle pipeline on the pinned configurations below
    let cases = [
        Case { row: TableRow::Fock, name: "FOCK", expected_t: 0.034006630819, expected_p: 0.933809977680 },
        Case {
            row: TableRow::Coherent,
            name: "COHERENT",
            expected_t: 0.024125434072,
            expected_p: 0.088477994191,
        },
        Case {
            row: TableRow::Upsilon,
            name: "UPSILON",
            expected_t: 0.017334848864,
            expected_p: 0.193303239665,
        },
    ];

    for case in &cases {
        let params = table1_defaults(case.row);
        let (space, rho0) = match case.row {
            TableRow::Fock => {
                let space = SpaceConfig::new(2, 2, 2).unwrap();
                (space, DensityOp::from_pure(&prepare_single_phonon(space, 0.0).unwrap()))
            }
            TableRow::Coherent => {
                let space = SpaceConfig::new(3, 3, 2).unwrap();
                let thermal = thermal_state(space, params.n_th).unwrap();
                let alpha = C64::new(0.2, 0.0);
                (space, tickle_density(&thermal, alpha, alpha).unwrap().0)
            }
            TableRow::Upsilon => {
                let space = SpaceConfig::new(2, 2, 3).unwrap();
                (space, DensityOp::from_pure(&prepare_upsilon(space, PI, PI).unwrap()))
            }
        };
        let h = interaction_hamiltonian(space, &params);
        let collapse = collapse_operators(space, &params);
        let span = default_span(params.g1);
        let grid: Vec<f64> = (0..=1000).map(|i| span * i as f64 / 1000.0).collect();

        let pipeline =
            apply_readout_model(&evolve_lindblad(&h, &collapse, &rho0, &grid).unwrap(), &params);
        let mats: Vec<Array2<C64>> = collapse.iter().map(|c| c.matrix.clone()).collect();
        let oracle = apply_readout_model(
            &evolve_lindblad_expm(&h.matrix, &mats, &rho0, &grid).unwrap(),
            &params,
        );

        let (t_pipe, p_pipe) =
            first_peak_discrete(&pipeline.times, &pipeline.p_reported).unwrap();
        let (t_oracle, p_oracle) =
            first_peak_discrete(&oracle.times, &oracle.p_reported).unwrap();

        report(
            9,
            "table-row regeneration",
            &format!(
                "{}: peak (t = {t_pipe:.9} ms, p = {p_pipe:.9}); oracle dev ({:.2e}, {:.2e}); frozen dev ({:.2e}, {:.2e})",
                case.name,
                (t_pipe - t_oracle).abs(),
                (p_pipe - p_oracle).abs(),
                (t_pipe - case.expected_t).abs(),
                (p_pipe - case.expected_p).abs(),
            ),
        );
        assert!((t_pipe - t_oracle).abs() < 1e-6, "{}: pipeline-oracle peak time", case.name);
        assert!((p_pipe - p_oracle).abs() < 1e-6, "{}: pipeline-oracle peak height", case.name);
        assert!((t_pipe - case.expected_t).abs() < 1e-6, "{}: frozen peak time", case.name);
        assert!((p_pipe - case.expected_p).abs() < 1e-6, "{}: frozen peak height", case.name);
    }
}

// 10. Tomography round trips: noiseless synthetic traces from ground,
//     the single-phonon superposition marginal (½, ½), and the α = 1
//     Poisson distribution recover p_n within 1e-4; with 200-shot binomial
//     noise, within 0.05 at ≥ 95% of seeded repetitions. Runtime < 30 s.
#[test]
fn criterion_10_tomography_roundtrips() {
    let start = std::time::Instant::now();
    let model = RabiModel { omega0: 126.8, eta: 0.041, decay: 0.2, decay_exponent: 0.0 };
    let period = 1.0 / (model.omega0 * model.eta);
    let times: Vec<f64> = (0..=60).map(|i| 2.0 * period * i as f64 / 60.0).collect();
    let n_max = 7;

    let mut half = vec![0.0; n_max + 1];
    half[0] = 0.5;
    half[1] = 0.5;
    let cases = [
        ("ground", PhononDistribution::new(one_hot(n_max)).unwrap()),
        ("single-phonon marginal", PhononDistribution::new(half).unwrap()),
        (
            "poisson alpha=1",
            PhononDistribution { probs: displaced_thermal_probs(1.0, 0.0, n_max) },
        ),
    ];

    // noiseless: within 1e-4
    let mut worst_clean = 0.0f64;
    for (_, truth) in &cases {
        let rsb = synthesize_trace(truth, &model, Sideband::Red, Mode::One, &times);
        let bsb = synthesize_trace(truth, &model, Sideband::Blue, Mode::One, &times);
        let fit = fit_distribution(&rsb, &bsb, &model, n_max).unwrap();
        for n in 0..=n_max {
            worst_clean = worst_clean.max((fit.distribution.probs[n] - truth.probs[n]).abs());
        }
    }

    // noisy: 40 seeded repetitions, each must recover every p_n within 0.05
    let repetitions = 40;
    let mut successes = 0;
    for seed in 0..repetitions {
        let mut ok = true;
        for (case_idx, (_, truth)) in cases.iter().enumerate() {
            let rsb = synthesize_trace(truth, &model, Sideband::Red, Mode::One, &times);
            let bsb = synthesize_trace(truth, &model, Sideband::Blue, Mode::One, &times);
            let rsb_noisy = add_projection_noise(&rsb, 200, seed * 31 + case_idx as u64);
            let bsb_noisy =
                add_projection_noise(&bsb, 200, seed * 31 + case_idx as u64 + 1000);
            let fit = fit_distribution(&rsb_noisy, &bsb_noisy, &model, n_max).unwrap();
            for n in 0..=n_max {
                if (fit.distribution.probs[n] - truth.probs[n]).abs() > 0.05 {
                    ok = false;
                }
            }
        }
        if ok {
            successes += 1;
        }
    }
    let rate = successes as f64 / repetitions as f64;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        10,
        "tomography round trips",
        &format!(
            "noiseless max dev = {worst_clean:.3e} < 1e-4; noisy success rate = {successes}/{repetitions} ≥ 95%, {elapsed:.1} s"
        ),
    );
    assert!(worst_clean < 1e-4);
    assert!(rate >= 0.95);
    assert!(elapsed < 30.0, "runtime {elapsed:.1} s exceeds 30 s");
}

fn one_hot(n_max: usize) -> Vec<f64> {
    let mut probs = vec![0.0; n_max + 1];
    probs[0] = 1.0;
    probs
}

// 11. Preparation sequences: the single-phonon program reproduces the
//     closed-form bright/dark states within 1e-10; the eleven-step product
//     preparation reproduces the product state within 1e-10 and records the
//     ½ survival probability at its second postselection.
#[test]
fn criterion_11_preparation_sequences() {
    let space = SpaceConfig::new(2, 2, 2).unwrap();
    let dev_bright = {
        let prepared = prepare_single_phonon(space, 0.0).unwrap();
        let target = bright_state(space, 1).unwrap();
        (&prepared.amplitudes - &target.amplitudes).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    let dev_dark = {
        let prepared = prepare_single_phonon(space, PI).unwrap();
        let target = dark_state(space, 1).unwrap();
        (&prepared.amplitudes - &target.amplitudes).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };

    let space3 = SpaceConfig::new(2, 2, 3).unwrap();
    let mut dev_upsilon = 0.0f64;
    let mut weight = 0.0;
    for phi in [0.0, PI / 2.0, PI] {
        let prepared = prepare_upsilon(space3, phi, phi).unwrap();
        let target = upsilon_state(space3, phi).unwrap();
        let dev = (&prepared.amplitudes - &target.amplitudes)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        dev_upsilon = dev_upsilon.max(dev);
        weight = prepared.weight;
    }
    report(
        11,
        "preparation sequences",
        &format!(
            "single-phonon devs = {dev_bright:.3e}/{dev_dark:.3e} < 1e-10, product dev = {dev_upsilon:.3e} < 1e-10, survival = {weight}"
        ),
    );
    assert!(dev_bright < 1e-10);
    assert!(dev_dark < 1e-10);
    assert!(dev_upsilon < 1e-10);
    assert!((weight - 0.5).abs() < 1e-12);
}

// 12. Cutoff robustness: doubling both Fock cutoffs changes the criterion-4
//     through criterion-7 observables by < 1e-6 (Fock/product-state cases)
//     and < 1e-4 (coherent α = 1).
#[test]
fn criterion_12_cutoff_robustness() {
    // criterion 4 observables
    let base = SpaceConfig::new(3, 3, 2).unwrap();
    let (ratio_a, dark_a) = sqrt2_observables(base, 5.2);
    let (ratio_b, dark_b) = sqrt2_observables(base.doubled(), 5.2);
    let c4_dev = (ratio_a - ratio_b).abs().max((dark_a - dark_b).abs());

    // criterion 5 observables
    let marg_a = excited_marginals(base, 5.2);
    let marg_b = excited_marginals(base.doubled(), 5.2);
    let mut c5_dev = 0.0f64;
    for case in 0..2 {
        for mode in 0..2 {
            for n in 0..marg_a[case][mode].len() {
                c5_dev = c5_dev.max((marg_a[case][mode][n] - marg_b[case][mode][n]).abs());
            }
        }
    }

    // criterion 6 observables (coherent α = 1, tolerance 1e-4)
    let coh_base = SpaceConfig::new(14, 14, 2).unwrap();
    let (dark_c_a, weights_a) = coherent_observables(coh_base, 1.0);
    let (dark_c_b, weights_b) = coherent_observables(coh_base.doubled(), 1.0);
    let mut c6_dev = (dark_c_a - dark_c_b).abs();
    for (a, b) in weights_a.iter().zip(weights_b.iter()) {
        c6_dev = c6_dev.max((a - b).abs());
    }

    // criterion 7 observables
    let ups_base = SpaceConfig::new(2, 2, 3).unwrap();
    let obs_a = upsilon_observables(ups_base, 7.3);
    let obs_b = upsilon_observables(ups_base.doubled(), 7.3);
    let c7_dev = [
        (obs_a.0 - obs_b.0).abs(),
        (obs_a.1 - obs_b.1).abs(),
        (obs_a.2 - obs_b.2).abs(),
        (obs_a.3 - obs_b.3).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);

    report(
        12,
        "cutoff robustness",
        &format!(
            "doubling deviations: c4 = {c4_dev:.3e}, c5 = {c5_dev:.3e} (< 1e-6); c6 = {c6_dev:.3e} (< 1e-4); c7 = {c7_dev:.3e} (< 1e-6)"
        ),
    );
    assert!(c4_dev < 1e-6);
    assert!(c5_dev < 1e-6);
    assert!(c6_dev < 1e-4);
    assert!(c7_dev < 1e-6);
}
