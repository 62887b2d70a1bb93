//! Truncated composite Hilbert space (electronic ⊗ mode-1 ⊗ mode-2), state
//! containers, and elementary operator constructors.
//!
//! Basis ordering is part of the external file contract: the flat index of
//! |e, n1, n2⟩ is `e·(n_max_1+1)·(n_max_2+1) + n1·(n_max_2+1) + n2`, with
//! e = 0 for |↓⟩, 1 for |↑⟩ and 2 for the auxiliary |↑′⟩. Electronic level is
//! the slowest index, mode 2 the fastest.
//!
//! Truncation rule: creation operators map the top Fock level to the zero
//! vector, so every operator stays strictly within the truncated space.

use ndarray::{linalg::kron, Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Norm tolerance enforced on [`PureState`].
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity / trace tolerance enforced on [`DensityOp`].
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalue floor enforced on constructed density operators.
pub const DENSITY_EIG_FLOOR: f64 = -1e-8;

/// One of the two motional modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    One,
    Two,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
        }
    }
}

/// Electronic level. `Aux` is the second metastable level used by the
/// auxiliary carrier transition; it exists only on three-level spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    Down,
    Up,
    Aux,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::Down => 0,
            Level::Up => 1,
            Level::Aux => 2,
        }
    }

    pub fn from_index(e: usize) -> Option<Level> {
        match e {
            0 => Some(Level::Down),
            1 => Some(Level::Up),
            2 => Some(Level::Aux),
            _ => None,
        }
    }
}

/// Truncation and level-count description of the composite Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceConfig {
    /// Inclusive highest Fock occupation of mode 1.
    pub n_max_1: usize,
    /// Inclusive highest Fock occupation of mode 2.
    pub n_max_2: usize,
    /// Number of electronic levels, 2 or 3.
    pub electronic_levels: usize,
}

impl SpaceConfig {
    /// Validated constructor. Cutoffs must be ≥ 1 and the electronic level
    /// count must be 2 or 3.
    pub fn new(n_max_1: usize, n_max_2: usize, electronic_levels: usize) -> Result<Self> {
        if n_max_1 < 1 || n_max_2 < 1 {
            return Err(Error::InvalidSpace(format!(
                "Fock cutoffs must be >= 1, got ({n_max_1}, {n_max_2})"
            )));
        }
        if electronic_levels != 2 && electronic_levels != 3 {
            return Err(Error::InvalidSpace(format!(
                "electronic_levels must be 2 or 3, got {electronic_levels}"
            )));
        }
        Ok(SpaceConfig { n_max_1, n_max_2, electronic_levels })
    }

    pub fn n_max(&self, mode: Mode) -> usize {
        match mode {
            Mode::One => self.n_max_1,
            Mode::Two => self.n_max_2,
        }
    }

    /// Dimension of the mode-1 factor, `n_max_1 + 1`.
    pub fn dim_mode_1(&self) -> usize {
        self.n_max_1 + 1
    }

    /// Dimension of the mode-2 factor, `n_max_2 + 1`.
    pub fn dim_mode_2(&self) -> usize {
        self.n_max_2 + 1
    }

    /// Dimension of the joint motional factor.
    pub fn motional_dim(&self) -> usize {
        self.dim_mode_1() * self.dim_mode_2()
    }

    /// Total dimension of the composite space.
    pub fn dim(&self) -> usize {
        self.electronic_levels * self.motional_dim()
    }

    /// Flat index of the basis ket |e, n1, n2⟩.
    pub fn index_of(&self, level: Level, n1: usize, n2: usize) -> usize {
        debug_assert!(level.index() < self.electronic_levels);
        debug_assert!(n1 <= self.n_max_1 && n2 <= self.n_max_2);
        level.index() * self.motional_dim() + n1 * self.dim_mode_2() + n2
    }

    /// Inverse of [`SpaceConfig::index_of`].
    pub fn labels_of(&self, index: usize) -> (Level, usize, usize) {
        debug_assert!(index < self.dim());
        let m = self.motional_dim();
        let e = index / m;
        let rem = index % m;
        let n1 = rem / self.dim_mode_2();
        let n2 = rem % self.dim_mode_2();
        (Level::from_index(e).expect("valid level index"), n1, n2)
    }

    /// Returns a space with both Fock cutoffs doubled, for cutoff-insensitivity
    /// checks.
    pub fn doubled(&self) -> SpaceConfig {
        SpaceConfig {
            n_max_1: 2 * self.n_max_1,
            n_max_2: 2 * self.n_max_2,
            electronic_levels: self.electronic_levels,
        }
    }

    fn check_same(&self, other: &SpaceConfig) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch(format!("{self:?}"), format!("{other:?}")));
        }
        Ok(())
    }
}

/// Validated constructor for [`SpaceConfig`].
pub fn make_space(n_max_1: usize, n_max_2: usize, electronic_levels: usize) -> Result<SpaceConfig> {
    SpaceConfig::new(n_max_1, n_max_2, electronic_levels)
}

/// A state vector on the composite space.
///
/// `weight` carries the survival probability accumulated through
/// postselection; the amplitudes themselves stay normalized. Raw products of
/// operator application (see [`apply`]) may hold unnormalized amplitudes; the
/// validated constructor rejects them.
#[derive(Debug, Clone)]
pub struct PureState {
    pub space: SpaceConfig,
    pub amplitudes: Array1<C64>,
    pub weight: f64,
}

impl PureState {
    /// Validated constructor: length must match the space, the Euclidean norm
    /// must be 1 within [`NORM_TOL`], and the weight must lie in [0, 1].
    pub fn new(space: SpaceConfig, amplitudes: Array1<C64>, weight: f64) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::InvalidState(format!(
                "amplitude vector length {} does not match space dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        let state = PureState { space, amplitudes, weight };
        if (state.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {:.15} deviates from 1 beyond {NORM_TOL:.0e}",
                state.norm()
            )));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidState(format!("weight {weight} outside [0, 1]")));
        }
        Ok(state)
    }

    /// Unvalidated constructor for raw operator-application results.
    pub fn from_parts(space: SpaceConfig, amplitudes: Array1<C64>, weight: f64) -> Self {
        PureState { space, amplitudes, weight }
    }

    /// Basis ket |e, n1, n2⟩ with unit weight.
    pub fn basis_ket(space: SpaceConfig, level: Level, n1: usize, n2: usize) -> Result<Self> {
        if level.index() >= space.electronic_levels {
            return Err(Error::InvalidArgument(format!(
                "level {level:?} not present on a {}-level space",
                space.electronic_levels
            )));
        }
        if n1 > space.n_max_1 || n2 > space.n_max_2 {
            return Err(Error::InvalidArgument(format!(
                "occupation ({n1}, {n2}) exceeds cutoffs ({}, {})",
                space.n_max_1, space.n_max_2
            )));
        }
        let mut amplitudes = Array1::zeros(space.dim());
        amplitudes[space.index_of(level, n1, n2)] = C64::new(1.0, 0.0);
        Ok(PureState { space, amplitudes, weight: 1.0 })
    }

    /// Ground ket |↓, 0, 0⟩.
    pub fn ground(space: SpaceConfig) -> Self {
        Self::basis_ket(space, Level::Down, 0, 0).expect("ground ket always exists")
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Returns a copy normalized to unit norm. Errors on (numerically) zero
    /// vectors.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-15 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(PureState {
            space: self.space,
            amplitudes: self.amplitudes.mapv(|z| z / n),
            weight: self.weight,
        })
    }

    /// Population of one electronic level (sum over motional occupations).
    pub fn level_population(&self, level: Level) -> f64 {
        if level.index() >= self.space.electronic_levels {
            return 0.0;
        }
        let m = self.space.motional_dim();
        let start = level.index() * m;
        self.amplitudes.slice(ndarray::s![start..start + m]).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Occupation probabilities of one mode (marginal over the other tensor
    /// factors).
    pub fn mode_marginal(&self, mode: Mode) -> Vec<f64> {
        let dim = match mode {
            Mode::One => self.space.dim_mode_1(),
            Mode::Two => self.space.dim_mode_2(),
        };
        let mut probs = vec![0.0; dim];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let (_, n1, n2) = self.space.labels_of(idx);
            let n = match mode {
                Mode::One => n1,
                Mode::Two => n2,
            };
            probs[n] += amp.norm_sqr();
        }
        probs
    }

    /// Serializes to the state dump format
    /// `{space: {n1, n2, levels}, weight, amplitudes: [[re, im], ...]}`.
    pub fn to_json(&self) -> String {
        let dump = StateDump {
            space: SpaceDump {
                n1: self.space.n_max_1,
                n2: self.space.n_max_2,
                levels: self.space.electronic_levels,
            },
            weight: self.weight,
            amplitudes: self.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string(&dump).expect("state dump serialization cannot fail")
    }

    /// Parses the state dump format; validates normalization.
    pub fn from_json(text: &str) -> Result<Self> {
        let dump: StateDump = serde_json::from_str(text)?;
        let space = SpaceConfig::new(dump.space.n1, dump.space.n2, dump.space.levels)?;
        let amplitudes =
            Array1::from_iter(dump.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)));
        PureState::new(space, amplitudes, dump.weight)
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceDump {
    n1: usize,
    n2: usize,
    levels: usize,
}

#[derive(Serialize, Deserialize)]
struct StateDump {
    space: SpaceDump,
    weight: f64,
    amplitudes: Vec<[f64; 2]>,
}

/// A density operator on the composite space.
#[derive(Debug, Clone)]
pub struct DensityOp {
    pub space: SpaceConfig,
    pub matrix: Array2<C64>,
    pub weight: f64,
}

impl DensityOp {
    /// Validated constructor: Hermitian within 1e-10, unit trace within 1e-10,
    /// minimum eigenvalue ≥ −1e-8.
    pub fn new(space: SpaceConfig, matrix: Array2<C64>, weight: f64) -> Result<Self> {
        let rho = DensityOp { space, matrix, weight };
        rho.validate(DENSITY_TOL, DENSITY_TOL, DENSITY_EIG_FLOOR)?;
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidState(format!("weight {weight} outside [0, 1]")));
        }
        Ok(rho)
    }

    /// Unvalidated constructor for trusted internal results.
    pub fn from_parts(space: SpaceConfig, matrix: Array2<C64>, weight: f64) -> Self {
        DensityOp { space, matrix, weight }
    }

    /// |ψ⟩⟨ψ| with the state's weight.
    pub fn from_pure(state: &PureState) -> Self {
        let d = state.space.dim();
        let mut matrix = Array2::zeros((d, d));
        for (i, a) in state.amplitudes.iter().enumerate() {
            for (j, b) in state.amplitudes.iter().enumerate() {
                matrix[(i, j)] = a * b.conj();
            }
        }
        DensityOp { space: state.space, matrix, weight: state.weight }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.matrix.nrows() {
            for j in 0..=i {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (eigs, _) = self
            .matrix
            .eigh(UPLO::Lower)
            .map_err(|e| Error::InvalidState(format!("eigendecomposition failed: {e}")))?;
        Ok(eigs.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Checks the density-operator invariants at the given tolerances.
    pub fn validate(&self, herm_tol: f64, trace_tol: f64, eig_floor: f64) -> Result<()> {
        if self.matrix.nrows() != self.space.dim() || self.matrix.ncols() != self.space.dim() {
            return Err(Error::InvalidState(format!(
                "matrix shape {:?} does not match space dimension {}",
                self.matrix.dim(),
                self.space.dim()
            )));
        }
        let herm = self.hermiticity_deviation();
        if herm > herm_tol {
            return Err(Error::InvalidState(format!(
                "Hermiticity deviation {herm:.3e} exceeds {herm_tol:.1e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidState(format!(
                "trace {tr} deviates from 1 beyond {trace_tol:.1e}"
            )));
        }
        let min_eig = self.min_eigenvalue()?;
        if min_eig < eig_floor {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_eig:.3e} below floor {eig_floor:.1e}"
            )));
        }
        Ok(())
    }

    /// Population of one electronic level, tr(P_level ρ).
    pub fn level_population(&self, level: Level) -> f64 {
        if level.index() >= self.space.electronic_levels {
            return 0.0;
        }
        let m = self.space.motional_dim();
        let start = level.index() * m;
        (start..start + m).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Occupation probabilities of one mode.
    pub fn mode_marginal(&self, mode: Mode) -> Vec<f64> {
        let dim = match mode {
            Mode::One => self.space.dim_mode_1(),
            Mode::Two => self.space.dim_mode_2(),
        };
        let mut probs = vec![0.0; dim];
        for idx in 0..self.space.dim() {
            let (_, n1, n2) = self.space.labels_of(idx);
            let n = match mode {
                Mode::One => n1,
                Mode::Two => n2,
            };
            probs[n] += self.matrix[(idx, idx)].re;
        }
        probs
    }
}

/// A dense operator on the composite space.
///
/// Construction functions document Hermiticity where applicable; nothing is
/// enforced on arbitrary matrices.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub space: SpaceConfig,
    pub matrix: Array2<C64>,
}

impl OperatorMatrix {
    pub fn new(space: SpaceConfig, matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::InvalidState(format!(
                "operator shape {:?} does not match space dimension {}",
                matrix.dim(),
                space.dim()
            )));
        }
        Ok(OperatorMatrix { space, matrix })
    }

    pub fn zeros(space: SpaceConfig) -> Self {
        OperatorMatrix { space, matrix: Array2::zeros((space.dim(), space.dim())) }
    }

    pub fn identity(space: SpaceConfig) -> Self {
        OperatorMatrix { space, matrix: Array2::eye(space.dim()) }
    }

    /// Adjoint (conjugate transpose).
    pub fn dagger(&self) -> Self {
        OperatorMatrix { space: self.space, matrix: self.matrix.t().mapv(|z| z.conj()) }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.matrix.nrows() {
            for j in 0..=i {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Operator product `self · other`.
    pub fn matmul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.space.check_same(&other.space)?;
        Ok(OperatorMatrix { space: self.space, matrix: self.matrix.dot(&other.matrix) })
    }

    /// Applies the operator to a pure state without renormalizing.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        self.space.check_same(&state.space)?;
        Ok(PureState::from_parts(state.space, self.matrix.dot(&state.amplitudes), state.weight))
    }
}

/// Truncated annihilation operator of one mode, acting as identity on the
/// other tensor factors: â|n⟩ = √n |n−1⟩, â|0⟩ = 0.
pub fn annihilation(space: SpaceConfig, mode: Mode) -> OperatorMatrix {
    let m = mode_lowering(space.n_max(mode) + 1);
    embed_mode_operator(space, mode, &m)
}

/// Truncated creation operator; the top Fock level maps to the zero vector
/// (hard cutoff).
pub fn creation(space: SpaceConfig, mode: Mode) -> OperatorMatrix {
    annihilation(space, mode).dagger()
}

/// Number operator â†â of one mode.
pub fn number_op(space: SpaceConfig, mode: Mode) -> OperatorMatrix {
    let dim = space.n_max(mode) + 1;
    let mut m = Array2::zeros((dim, dim));
    for n in 0..dim {
        m[(n, n)] = C64::new(n as f64, 0.0);
    }
    embed_mode_operator(space, mode, &m)
}

/// Total excitation number operator N̂ = â₁†â₁ + â₂†â₂ (diagonal, eigenvalue
/// n1+n2 on |e, n1, n2⟩).
pub fn excitation_number(space: SpaceConfig) -> OperatorMatrix {
    let mut op = number_op(space, Mode::One);
    op.matrix += &number_op(space, Mode::Two).matrix;
    op
}

/// Electronic raising operator σ̂⁺ = |↑⟩⟨↓| ⊗ identity on the modes. On a
/// three-level space the auxiliary level is untouched.
pub fn spin_raise(space: SpaceConfig) -> OperatorMatrix {
    electronic_transition(space, Level::Up, Level::Down)
}

/// Electronic lowering operator σ̂⁻ = |↓⟩⟨↑| ⊗ identity on the modes.
pub fn spin_lower(space: SpaceConfig) -> OperatorMatrix {
    electronic_transition(space, Level::Down, Level::Up)
}

/// |to⟩⟨from| on the electronic factor, identity on the modes.
pub fn electronic_transition(space: SpaceConfig, to: Level, from: Level) -> OperatorMatrix {
    let levels = space.electronic_levels;
    let mut e = Array2::zeros((levels, levels));
    if to.index() < levels && from.index() < levels {
        e[(to.index(), from.index())] = C64::new(1.0, 0.0);
    }
    let eye_m = Array2::eye(space.motional_dim());
    OperatorMatrix { space, matrix: kron(&e, &eye_m) }
}

/// Projector onto one electronic level (Hermitian).
pub fn electronic_projector(space: SpaceConfig, level: Level) -> OperatorMatrix {
    electronic_transition(space, level, level)
}

/// Displacement operator exp(α â† − α* â) of one mode, computed as the
/// exponential of the truncated generator (exactly unitary on the truncated
/// space).
pub fn displacement(space: SpaceConfig, mode: Mode, alpha: C64) -> OperatorMatrix {
    let d = single_mode_displacement(space.n_max(mode) + 1, alpha);
    embed_mode_operator(space, mode, &d)
}

/// Single-mode displacement matrix on a `dim`-level Fock ladder.
///
/// The generator α â† − α* â is anti-Hermitian; the exponential is evaluated
/// through the eigendecomposition of i·(α â† − α* â).
pub fn single_mode_displacement(dim: usize, alpha: C64) -> Array2<C64> {
    let a = mode_lowering(dim);
    let adag = a.t().mapv(|z| z.conj());
    // i(α a† − α* a) is Hermitian.
    let gen = adag.mapv(|z| C64::i() * alpha * z) - a.mapv(|z| C64::i() * alpha.conj() * z);
    let (eigs, vecs) = gen.eigh(UPLO::Lower).expect("Hermitian eigendecomposition");
    // exp(G) = V diag(e^{-iλ}) V†
    let phases = Array1::from_iter(eigs.iter().map(|w| (-C64::i() * *w).exp()));
    let vdag = vecs.t().mapv(|z| z.conj());
    let mut scaled = vecs.clone();
    for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
        col.mapv_inplace(|z| z * *ph);
    }
    scaled.dot(&vdag)
}

/// Lowering matrix on a bare `dim`-level Fock ladder: ⟨n−1|a|n⟩ = √n.
pub(crate) fn mode_lowering(dim: usize) -> Array2<C64> {
    let mut m = Array2::zeros((dim, dim));
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Embeds a single-mode operator into the composite space, identity on the
/// electronic factor and the other mode.
fn embed_mode_operator(space: SpaceConfig, mode: Mode, op: &Array2<C64>) -> OperatorMatrix {
    let eye_e = Array2::eye(space.electronic_levels);
    let eye_1 = Array2::eye(space.dim_mode_1());
    let eye_2 = Array2::eye(space.dim_mode_2());
    let motional = match mode {
        Mode::One => kron(op, &eye_2),
        Mode::Two => kron(&eye_1, op),
    };
    OperatorMatrix { space, matrix: kron(&eye_e, &motional) }
}

/// ⟨state|op|state⟩ for a pure state.
pub fn expectation_pure(op: &OperatorMatrix, state: &PureState) -> Result<C64> {
    op.space.check_same(&state.space)?;
    let applied = op.matrix.dot(&state.amplitudes);
    Ok(state.amplitudes.iter().zip(applied.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// tr(op ρ) for a density operator.
pub fn expectation_density(op: &OperatorMatrix, rho: &DensityOp) -> Result<C64> {
    op.space.check_same(&rho.space)?;
    let prod = op.matrix.dot(&rho.matrix);
    Ok(prod.diag().sum())
}

/// Applies `op` to `state` without renormalizing.
pub fn apply(op: &OperatorMatrix, state: &PureState) -> Result<PureState> {
    op.apply(state)
}

/// Inner product ⟨a|b⟩.
pub fn overlap(a: &PureState, b: &PureState) -> Result<C64> {
    a.space.check_same(&b.space)?;
    Ok(a.amplitudes.iter().zip(b.amplitudes.iter()).map(|(x, y)| x.conj() * y).sum())
}
