//! Sideband Rabi-signal model and constrained least-squares extraction of
//! phonon-number distributions and coherent amplitudes.
//!
//! The signal model is the standard sideband-thermometry sum
//!
//! ```text
//! P↑(t) = Σ_n p_n · ½[1 − cos(2π Ω_n t) e^{−2π γ_n t}]
//! ```
//!
//! with Ω_n = ω₀·η·√(n+1) on the blue sideband and ω₀·η·√n on the red one
//! (the n = 0 red term vanishes identically: there is no phonon to remove),
//! and per-component decay γ_n = decay·(n+1)^p with p = 0 by default.
//!
//! Distribution fits minimize weighted least squares jointly over an RSB and a
//! BSB trace with the probabilities constrained to the simplex (projection,
//! not penalty). Because the red n = 0 component is flat, p₀ is determined
//! primarily by the blue-sideband data.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::{Read, Write};

use crate::hilbert::{single_mode_displacement, Mode};
use crate::{Error, Result};

/// Worst acceptable root-mean-square residual of an unweighted distribution
/// fit; larger values are reported as a fit failure rather than returned
/// silently.
pub const MAX_RESIDUAL_RMS: f64 = 0.15;
/// Worst acceptable √(χ²/m) when per-point errors are supplied (a good fit
/// sits near 1).
pub const MAX_RESIDUAL_CHI: f64 = 5.0;

/// Bare Rabi frequency, Lamb-Dicke parameter, and decay model of one mode's
/// sideband drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiModel {
    /// Bare carrier Rabi frequency, kHz.
    pub omega0: f64,
    /// Lamb-Dicke parameter (0 < η < 0.3).
    pub eta: f64,
    /// Base decay rate, kHz.
    pub decay: f64,
    /// Per-component decay exponent p: γ_n = decay·(n+1)^p.
    pub decay_exponent: f64,
}

impl RabiModel {
    pub fn validate(&self) -> Result<()> {
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidArgument("omega0 must be positive".into()));
        }
        if !(0.0..0.3).contains(&self.eta) || self.eta == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "eta {} outside the Lamb-Dicke range (0, 0.3)",
                self.eta
            )));
        }
        if self.decay < 0.0 {
            return Err(Error::InvalidArgument("decay must be non-negative".into()));
        }
        Ok(())
    }

    fn frequency(&self, sideband: Sideband, n: usize) -> f64 {
        let scale = match sideband {
            Sideband::Blue => ((n + 1) as f64).sqrt(),
            Sideband::Red => (n as f64).sqrt(),
        };
        self.omega0 * self.eta * scale
    }

    fn decay_rate(&self, n: usize) -> f64 {
        self.decay * ((n + 1) as f64).powf(self.decay_exponent)
    }
}

/// Red or blue first sideband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sideband {
    #[serde(rename = "RSB")]
    Red,
    #[serde(rename = "BSB")]
    Blue,
}

/// A phonon-number distribution p₀..p_nmax on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhononDistribution {
    pub probs: Vec<f64>,
}

impl PhononDistribution {
    /// Validated constructor: nonnegative entries summing to 1 within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("distribution needs at least p0".into()));
        }
        if probs.iter().any(|p| *p < -1e-12) {
            return Err(Error::InvalidArgument("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1 within 1e-9"
            )));
        }
        Ok(PhononDistribution { probs })
    }

    /// Normalizes a nonnegative weight vector.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        PhononDistribution::new(weights)
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }
}

/// One measured (or synthesized) sideband Rabi trace.
#[derive(Debug, Clone)]
pub struct RabiTrace {
    pub times: Vec<f64>,
    pub p_up: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub sideband: Sideband,
    pub mode: Mode,
}

impl RabiTrace {
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.p_up.len() {
            return Err(Error::InvalidArgument("times and p_up lengths differ".into()));
        }
        if let Some(sigma) = &self.sigma {
            if sigma.len() != self.times.len() {
                return Err(Error::InvalidArgument("sigma length differs".into()));
            }
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Writes the CSV form: header `t_ms,p_up[,sigma]`, one row per point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if let Some(sigma) = &self.sigma {
            w.write_record(["t_ms", "p_up", "sigma"])?;
            for i in 0..self.times.len() {
                w.write_record([
                    self.times[i].to_string(),
                    self.p_up[i].to_string(),
                    sigma[i].to_string(),
                ])?;
            }
        } else {
            w.write_record(["t_ms", "p_up"])?;
            for i in 0..self.times.len() {
                w.write_record([self.times[i].to_string(), self.p_up[i].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the CSV form; the header row is mandatory.
    pub fn read_csv<R: Read>(reader: R, sideband: Sideband, mode: Mode) -> Result<RabiTrace> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let with_sigma = match cols.as_slice() {
            ["t_ms", "p_up"] => false,
            ["t_ms", "p_up", "sigma"] => true,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "expected header t_ms,p_up[,sigma], found {other:?}"
                )))
            }
        };
        let mut times = Vec::new();
        let mut p_up = Vec::new();
        let mut sigma = Vec::new();
        for record in r.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| Error::InvalidArgument("short CSV row".into()))?
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad CSV number: {e}")))
            };
            times.push(parse(0)?);
            p_up.push(parse(1)?);
            if with_sigma {
                sigma.push(parse(2)?);
            }
        }
        let trace = RabiTrace {
            times,
            p_up,
            sigma: with_sigma.then_some(sigma),
            sideband,
            mode,
        };
        trace.validate()?;
        Ok(trace)
    }
}

/// Evaluates the sideband signal model for a distribution.
pub fn rabi_signal(
    dist: &PhononDistribution,
    model: &RabiModel,
    sideband: Sideband,
    times: &[f64],
) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            dist.probs
                .iter()
                .enumerate()
                .map(|(n, p)| p * component_signal(model, sideband, n, t))
                .sum()
        })
        .collect()
}

fn component_signal(model: &RabiModel, sideband: Sideband, n: usize, t: f64) -> f64 {
    if sideband == Sideband::Red && n == 0 {
        return 0.0; // no phonon to remove
    }
    let omega = model.frequency(sideband, n);
    let gamma = model.decay_rate(n);
    0.5 * (1.0 - (TAU * omega * t).cos() * (-TAU * gamma * t).exp())
}

/// Result of a distribution fit.
#[derive(Debug, Clone)]
pub struct DistributionFit {
    pub distribution: PhononDistribution,
    /// Root-mean-square weighted residual.
    pub residual: f64,
    /// Weighted sum of squared errors (monotone in refinement).
    pub sse: f64,
    /// Per-p_n local-curvature uncertainty.
    pub stderr: Vec<f64>,
}

impl DistributionFit {
    /// Serializes to `{probs: [...], residual, stderr: [...]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            probs: &'a [f64],
            residual: f64,
            stderr: &'a [f64],
        }
        serde_json::to_string(&Dump {
            probs: &self.distribution.probs,
            residual: self.residual,
            stderr: &self.stderr,
        })
        .expect("fit serialization cannot fail")
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Jointly fits an RSB and a BSB trace of the same mode with the phonon
/// occupation probabilities p₀..p_nmax as free parameters on the simplex.
///
/// The optimizer is projected gradient descent with multi-start (five seeded
/// random starts plus the uniform distribution) followed by an active-set
/// polish on the converged support. Uncertainties come from the local
/// quadratic (curvature) model.
pub fn fit_distribution(
    rsb: &RabiTrace,
    bsb: &RabiTrace,
    model: &RabiModel,
    n_max: usize,
) -> Result<DistributionFit> {
    model.validate()?;
    rsb.validate()?;
    bsb.validate()?;
    if rsb.sideband != Sideband::Red || bsb.sideband != Sideband::Blue {
        return Err(Error::InvalidArgument("traces must be (RSB, BSB) in that order".into()));
    }
    if rsb.mode != bsb.mode {
        return Err(Error::Fit("RSB and BSB traces come from different modes".into()));
    }
    let k = n_max + 1;
    let m = rsb.times.len() + bsb.times.len();
    if m < k {
        return Err(Error::Fit(format!("{m} points cannot determine {k} probabilities")));
    }

    // weighted design matrix and target
    let mut design = Array2::<f64>::zeros((m, k));
    let mut target = Array1::<f64>::zeros(m);
    let mut row = 0;
    for trace in [rsb, bsb] {
        for (i, &t) in trace.times.iter().enumerate() {
            let w = match &trace.sigma {
                Some(sigma) => 1.0 / sigma[i].max(1e-6),
                None => 1.0,
            };
            for n in 0..k {
                design[(row, n)] = w * component_signal(model, trace.sideband, n, t);
            }
            target[row] = w * trace.p_up[i];
            row += 1;
        }
    }

    let gram = design.t().dot(&design);
    let moment = design.t().dot(&target);
    let (eigs, _) = gram
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Fit(format!("normal-equation eigendecomposition failed: {e}")))?;
    let lambda_max = eigs.iter().cloned().fold(0.0, f64::max);
    let lambda_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if lambda_max <= 0.0 || lambda_min < 1e-12 * lambda_max {
        return Err(Error::Fit(format!(
            "degenerate design: eigenvalue ratio {:.3e}",
            lambda_min / lambda_max
        )));
    }

    let objective = |p: &[f64]| -> f64 {
        let pv = Array1::from_iter(p.iter().cloned());
        let r = design.dot(&pv) - &target;
        r.iter().map(|x| x * x).sum()
    };

    // multi-start projected gradient
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / k as f64; k]];
    for _ in 0..5 {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0f64).max(1e-3)).collect();
        let total: f64 = raw.iter().sum();
        starts.push(raw.into_iter().map(|x| x / total).collect());
    }
    let step = 1.0 / (2.0 * lambda_max);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let mut p = start;
        for _ in 0..20_000 {
            let pv = Array1::from_iter(p.iter().cloned());
            let grad = gram.dot(&pv) - &moment;
            let proposal: Vec<f64> =
                p.iter().zip(grad.iter()).map(|(x, g)| x - 2.0 * step * g).collect();
            let next = project_to_simplex(&proposal);
            let delta =
                p.iter().zip(next.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            p = next;
            if delta < 1e-15 {
                break;
            }
        }
        let value = objective(&p);
        if best.as_ref().map_or(true, |(_, v)| value < *v) {
            best = Some((p, value));
        }
    }
    let (mut p, mut sse) = best.expect("at least one start");

    // active-set polish: exact equality-constrained solve on the support
    if let Some(polished) = polish_on_support(&gram, &moment, &p) {
        let value = objective(&polished);
        if value <= sse {
            p = polished;
            sse = value;
        }
    }

    let has_sigma = rsb.sigma.is_some() || bsb.sigma.is_some();
    let residual = (sse / m as f64).sqrt();
    let threshold = if has_sigma { MAX_RESIDUAL_CHI } else { MAX_RESIDUAL_RMS };
    if residual > threshold {
        return Err(Error::Fit(format!(
            "residual {residual:.3} exceeds {threshold}; model does not describe the data"
        )));
    }

    // curvature uncertainties: cov = s²·G⁻¹ (s² = 1 when σ are supplied)
    let dof = (m - k).max(1) as f64;
    let scale = if has_sigma { 1.0 } else { sse / dof };
    let cov = pseudo_inverse(&gram)?;
    let stderr: Vec<f64> = (0..k).map(|i| (scale * cov[(i, i)]).max(0.0).sqrt()).collect();

    let total: f64 = p.iter().sum();
    let probs: Vec<f64> = p.iter().map(|x| x / total).collect();
    Ok(DistributionFit { distribution: PhononDistribution::new(probs)?, residual, sse, stderr })
}

fn polish_on_support(gram: &Array2<f64>, moment: &Array1<f64>, p: &[f64]) -> Option<Vec<f64>> {
    use ndarray_linalg::Solve;
    let support: Vec<usize> =
        p.iter().enumerate().filter(|(_, x)| **x > 1e-10).map(|(i, _)| i).collect();
    let s = support.len();
    if s == 0 {
        return None;
    }
    // KKT system: [2G_S  1; 1ᵀ 0][p_S; λ] = [2c_S; 1]
    let mut kkt = Array2::<f64>::zeros((s + 1, s + 1));
    let mut rhs = Array1::<f64>::zeros(s + 1);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            kkt[(a, b)] = 2.0 * gram[(i, j)];
        }
        kkt[(a, s)] = 1.0;
        kkt[(s, a)] = 1.0;
        rhs[a] = 2.0 * moment[i];
    }
    rhs[s] = 1.0;
    let solution = kkt.solve(&rhs).ok()?;
    let mut out = vec![0.0; p.len()];
    for (a, &i) in support.iter().enumerate() {
        if solution[a] < -1e-12 {
            return None; // support guess was wrong; keep the iterate
        }
        out[i] = solution[a].max(0.0);
    }
    Some(out)
}

fn pseudo_inverse(m: &Array2<f64>) -> Result<Array2<f64>> {
    let (eigs, vecs) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Fit(format!("covariance eigendecomposition failed: {e}")))?;
    let lambda_max = eigs.iter().cloned().fold(0.0, f64::max);
    let k = m.nrows();
    let mut out = Array2::<f64>::zeros((k, k));
    for (idx, &lambda) in eigs.iter().enumerate() {
        if lambda > 1e-12 * lambda_max {
            let v = vecs.column(idx);
            for i in 0..k {
                for j in 0..k {
                    out[(i, j)] += v[i] * v[j] / lambda;
                }
            }
        }
    }
    Ok(out)
}

/// Occupation probabilities p₀..p_nmax of a displaced thermal single-mode
/// state, evaluated by displacing the truncated thermal density matrix.
pub fn displaced_thermal_probs(alpha: f64, n_th: f64, n_max: usize) -> Vec<f64> {
    // work on a comfortably larger internal ladder
    let dim = (2 * n_max + 8).max(24);
    let mut rho = Array2::<C64>::zeros((dim, dim));
    if n_th <= 0.0 {
        rho[(0, 0)] = C64::new(1.0, 0.0);
    } else {
        let ratio = n_th / (1.0 + n_th);
        let mut total = 0.0;
        for n in 0..dim {
            let w = ratio.powi(n as i32) / (1.0 + n_th);
            rho[(n, n)] = C64::new(w, 0.0);
            total += w;
        }
        for n in 0..dim {
            rho[(n, n)] /= total;
        }
    }
    let d = single_mode_displacement(dim, C64::new(alpha, 0.0));
    let ddag = d.t().mapv(|z| z.conj());
    let displaced = d.dot(&rho).dot(&ddag);
    let probs: Vec<f64> = (0..=n_max).map(|n| displaced[(n, n)].re.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.into_iter().map(|p| p / total).collect()
}

/// Fits a BSB trace with the two-parameter displaced-thermal family,
/// returning the best (α, n_th).
pub fn fit_coherent_alpha(trace: &RabiTrace, model: &RabiModel) -> Result<(f64, f64)> {
    model.validate()?;
    trace.validate()?;
    if trace.sideband != Sideband::Blue {
        return Err(Error::InvalidArgument(
            "coherent-amplitude fits take a blue-sideband trace".into(),
        ));
    }
    let n_max = 14;
    let cost = |alpha: f64, n_th: f64| -> f64 {
        let a = alpha.abs();
        let nt = n_th.abs();
        let probs = displaced_thermal_probs(a, nt, n_max);
        let dist = PhononDistribution { probs };
        let signal = rabi_signal(&dist, model, Sideband::Blue, &trace.times);
        signal
            .iter()
            .zip(trace.p_up.iter())
            .enumerate()
            .map(|(i, (s, y))| {
                let w = match &trace.sigma {
                    Some(sigma) => 1.0 / sigma[i].max(1e-6),
                    None => 1.0,
                };
                let r = w * (s - y);
                r * r
            })
            .sum()
    };

    let starts = [(0.3, 0.02), (1.0, 0.02), (2.0, 0.05), (0.05, 0.2), (1.5, 0.01)];
    let mut best: Option<((f64, f64), f64)> = None;
    for (a0, n0) in starts {
        let (params, value) = nelder_mead_2d(|x, y| cost(x, y), (a0, n0));
        if best.as_ref().map_or(true, |(_, v)| value < *v) {
            best = Some((params, value));
        }
    }
    let ((alpha, n_th), value) = best.expect("starts are nonempty");
    if !value.is_finite() {
        return Err(Error::Fit("coherent-amplitude fit did not converge".into()));
    }
    Ok((alpha.abs(), n_th.abs()))
}

// Compact Nelder-Mead on two parameters (reflect/expand/contract/shrink),
// deterministic. Negative proposals are folded back by |·| in the cost.
fn nelder_mead_2d<F: Fn(f64, f64) -> f64>(cost: F, start: (f64, f64)) -> ((f64, f64), f64) {
    let mut simplex = [
        (start.0, start.1),
        (start.0 + 0.25 * start.0.abs().max(0.1), start.1),
        (start.0, start.1 + 0.05 * start.1.abs().max(0.02)),
    ];
    let mut values = simplex.map(|(a, b)| cost(a, b));
    for _ in 0..500 {
        // order ascending
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("no NaN"));
        let [best, mid, worst] = order;
        if (values[worst] - values[best]).abs() < 1e-14 * (1.0 + values[best].abs()) {
            break;
        }
        let centroid = (
            0.5 * (simplex[best].0 + simplex[mid].0),
            0.5 * (simplex[best].1 + simplex[mid].1),
        );
        let reflect = (
            centroid.0 + (centroid.0 - simplex[worst].0),
            centroid.1 + (centroid.1 - simplex[worst].1),
        );
        let f_reflect = cost(reflect.0, reflect.1);
        if f_reflect < values[best] {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - simplex[worst].0),
                centroid.1 + 2.0 * (centroid.1 - simplex[worst].1),
            );
            let f_expand = cost(expand.0, expand.1);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_reflect;
            }
        } else if f_reflect < values[mid] {
            simplex[worst] = reflect;
            values[worst] = f_reflect;
        } else {
            let contract = (
                centroid.0 + 0.5 * (simplex[worst].0 - centroid.0),
                centroid.1 + 0.5 * (simplex[worst].1 - centroid.1),
            );
            let f_contract = cost(contract.0, contract.1);
            if f_contract < values[worst] {
                simplex[worst] = contract;
                values[worst] = f_contract;
            } else {
                for i in [mid, worst] {
                    simplex[i] = (
                        0.5 * (simplex[i].0 + simplex[best].0),
                        0.5 * (simplex[i].1 + simplex[best].1),
                    );
                    values[i] = cost(simplex[i].0, simplex[i].1);
                }
            }
        }
    }
    let mut order = [0, 1, 2];
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("no NaN"));
    (simplex[order[0]], values[order[0]])
}

/// Noiseless synthetic trace from a distribution.
pub fn synthesize_trace(
    dist: &PhononDistribution,
    model: &RabiModel,
    sideband: Sideband,
    mode: Mode,
    times: &[f64],
) -> RabiTrace {
    RabiTrace {
        times: times.to_vec(),
        p_up: rabi_signal(dist, model, sideband, times),
        sigma: None,
        sideband,
        mode,
    }
}

/// Adds seeded binomial (quantum projection) noise at `shots` per point and
/// attaches the estimated standard errors.
pub fn add_projection_noise(trace: &RabiTrace, shots: u32, seed: u64) -> RabiTrace {
    use rand_distr::{Binomial, Distribution};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = Vec::with_capacity(trace.p_up.len());
    let mut sigma = Vec::with_capacity(trace.p_up.len());
    for &p in &trace.p_up {
        let clamped = p.clamp(0.0, 1.0);
        let binomial = Binomial::new(shots as u64, clamped).expect("valid probability");
        let count = binomial.sample(&mut rng);
        let estimate = count as f64 / shots as f64;
        noisy.push(estimate);
        let raw = (estimate * (1.0 - estimate) / shots as f64).sqrt();
        sigma.push(raw.max(1.0 / (2.0 * shots as f64)));
    }
    RabiTrace {
        times: trace.times.clone(),
        p_up: noisy,
        sigma: Some(sigma),
        sideband: trace.sideband,
        mode: trace.mode,
    }
}
