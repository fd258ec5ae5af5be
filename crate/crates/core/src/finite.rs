//! Exact quantum mechanics of finite generalized Ising chains.
//!
//! The Hamiltonian H = Σ_{x<y} J(|x−y|) σ³_x σ³_y is diagonal in the σ³
//! product basis, so time evolution is a phase per basis configuration:
//! ψ_c(t) = e^{−i E_c t} ψ_c. Energies are tabulated once per (coupling, N)
//! in an [`EnergyTable`].
//!
//! Reduced density matrices are formed from the amplitude matrix
//! M[a, b] = ψ(a ⊗ b) (region configuration a, complement configuration b),
//! ρ = M M†. The spectrum is taken from whichever of M M† and M† M is
//! smaller; their nonzero eigenvalues coincide.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::interaction::CouplingModel;
use crate::par;

/// Largest chain held as a state vector (2^24 amplitudes, 256 MiB).
pub const MAX_STATE_SITES: usize = 24;
/// Default largest region for partial traces.
pub const DEFAULT_TRACE_CAP: usize = 12;
/// Largest chain for commutator checks.
pub const MAX_COMMUTATOR_SITES: usize = 10;

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues below −this are reported as an invalid state.
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiniteError {
    #[error("{sites} sites exceed the capacity of {cap}")]
    TooManySites { sites: usize, cap: usize },
    #[error("region of {size} sites exceeds the partial-trace cap of {cap}")]
    RegionTooLarge { size: usize, cap: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("state has {got} sites, expected {expected}")]
    SiteMismatch { expected: usize, got: usize },
    #[error("expected {expected} amplitudes, got {got}")]
    AmplitudeCount { expected: usize, got: usize },
    #[error("state is not normalized: |psi|^2 = {0}")]
    NotNormalized(f64),
    #[error("matrix is not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("invalid state: eigenvalue {0} is negative")]
    NegativeEigenvalue(f64),
    #[error("density matrices act on {0} and {1} sites")]
    DimensionMismatch(usize, usize),
    #[error("mixing weight must lie in [0, 1], got {0}")]
    InvalidWeight(f64),
    #[error("site {site} outside a chain of {sites} sites")]
    InvalidSite { site: usize, sites: usize },
    #[error("invalid site specification: {0}")]
    InvalidSpec(String),
    #[error("Lieb-Robinson bound inapplicable: coupling has no exponential moment")]
    BoundInapplicable,
}

/// Single-site basis states: σ³ eigenstates (up/down) and σ¹ eigenstates
/// (plus/minus), all with eigenvalue ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteState {
    Up,
    Down,
    Plus,
    Minus,
}

impl SiteState {
    /// Amplitudes on (|σ³=+1⟩, |σ³=−1⟩).
    pub fn amplitudes(self) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let re = |a: f64, b: f64| [Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
        match self {
            SiteState::Up => re(1.0, 0.0),
            SiteState::Down => re(0.0, 1.0),
            SiteState::Plus => re(h, h),
            SiteState::Minus => re(h, -h),
        }
    }

    fn token(self) -> &'static str {
        match self {
            SiteState::Up => "+z",
            SiteState::Down => "-z",
            SiteState::Plus => "+x",
            SiteState::Minus => "-x",
        }
    }
}

/// Per-site choice of a product state, written e.g. `"+x+x+x-x"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteSpec(pub Vec<SiteState>);

impl SiteSpec {
    pub fn uniform(state: SiteState, sites: usize) -> Self {
        Self(vec![state; sites])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for SiteSpec {
    type Err = FiniteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .collect();
        if chars.is_empty() || chars.len() % 2 != 0 {
            return Err(FiniteError::InvalidSpec(format!(
                "expected pairs like +x or -z, got {s:?}"
            )));
        }
        chars
            .chunks(2)
            .map(|p| match (p[0], p[1].to_ascii_lowercase()) {
                ('+', 'z') => Ok(SiteState::Up),
                ('-', 'z') => Ok(SiteState::Down),
                ('+', 'x') => Ok(SiteState::Plus),
                ('-', 'x') => Ok(SiteState::Minus),
                _ => Err(FiniteError::InvalidSpec(format!(
                    "unknown site token {}{}",
                    p[0], p[1]
                ))),
            })
            .collect::<Result<_, _>>()
            .map(SiteSpec)
    }
}

impl fmt::Display for SiteSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(s.token())?;
        }
        Ok(())
    }
}

/// Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// An operator of the form O|c⟩ = w(c) |c ⊕ mask⟩, stored as the weights.
#[derive(Debug, Clone)]
struct Monomial {
    mask: usize,
    weights: Vec<Complex64>,
}

impl Monomial {
    fn pauli(op: Pauli, site: usize, sites: usize) -> Self {
        let bit = 1usize << site;
        let i = Complex64::i();
        let weights = par::collect_indexed(1usize << sites, |c| {
            let up = c & bit == 0;
            match (op, up) {
                (Pauli::X, _) => Complex64::new(1.0, 0.0),
                (Pauli::Y, true) => i,
                (Pauli::Y, false) => -i,
                (Pauli::Z, true) => Complex64::new(1.0, 0.0),
                (Pauli::Z, false) => Complex64::new(-1.0, 0.0),
            }
        });
        let mask = if op == Pauli::Z { 0 } else { bit };
        Self { mask, weights }
    }

    /// e^{iHt} O e^{−iHt} for diagonal H.
    fn heisenberg(&self, energies: &[f64], t: f64) -> Self {
        let weights = par::collect_indexed(self.weights.len(), |c| {
            let phase = (energies[c ^ self.mask] - energies[c]) * t;
            self.weights[c] * Complex64::from_polar(1.0, phase)
        });
        Self {
            mask: self.mask,
            weights,
        }
    }

    /// [self, other]; masks of Pauli monomials commute under xor.
    fn commutator(&self, other: &Self) -> Self {
        let weights = par::collect_indexed(self.weights.len(), |c| {
            let ab = other.weights[c] * self.weights[c ^ other.mask];
            let ba = self.weights[c] * other.weights[c ^ self.mask];
            ab - ba
        });
        Self {
            mask: self.mask ^ other.mask,
            weights,
        }
    }

    /// Operator norm: a permutation times a diagonal.
    fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }
}

/// Normalized state vector of an N-site chain in the σ³ product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    sites: usize,
    amplitudes: Vec<Complex64>,
}

fn check_sites(sites: usize) -> Result<(), FiniteError> {
    if sites == 0 || sites > MAX_STATE_SITES {
        return Err(FiniteError::TooManySites {
            sites,
            cap: MAX_STATE_SITES,
        });
    }
    Ok(())
}

impl SpinState {
    pub fn new(sites: usize, amplitudes: Vec<Complex64>) -> Result<Self, FiniteError> {
        check_sites(sites)?;
        if amplitudes.len() != 1usize << sites {
            return Err(FiniteError::AmplitudeCount {
                expected: 1usize << sites,
                got: amplitudes.len(),
            });
        }
        let state = Self { sites, amplitudes };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(FiniteError::NotNormalized(n));
        }
        Ok(state)
    }

    /// Tensor product of single-site states.
    pub fn product(spec: &SiteSpec) -> Result<Self, FiniteError> {
        let sites = spec.len();
        check_sites(sites)?;
        let factors: Vec<[Complex64; 2]> = spec.0.iter().map(|s| s.amplitudes()).collect();
        let amplitudes = par::collect_indexed(1usize << sites, |c| {
            factors
                .iter()
                .enumerate()
                .fold(Complex64::new(1.0, 0.0), |acc, (x, f)| acc * f[(c >> x) & 1])
        });
        Ok(Self { sites, amplitudes })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        par::chunked_sum(self.amplitudes.len(), |c| self.amplitudes[c].norm_sqr())
    }

    /// Multiplies every amplitude by e^{iφ}.
    pub fn with_global_phase(mut self, phi: f64) -> Self {
        let z = Complex64::from_polar(1.0, phi);
        par::for_each_indexed_mut(&mut self.amplitudes, |_, a| *a *= z);
        self
    }

    /// Whether every amplitude is real.
    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0)
    }

    /// ⟨σ^op_site⟩.
    pub fn expectation(&self, op: Pauli, site: usize) -> Result<f64, FiniteError> {
        if site >= self.sites {
            return Err(FiniteError::InvalidSite {
                site,
                sites: self.sites,
            });
        }
        let bit = 1usize << site;
        let psi = &self.amplitudes;
        Ok(match op {
            Pauli::Z => par::chunked_sum(psi.len(), |c| {
                let p = psi[c].norm_sqr();
                if c & bit == 0 {
                    p
                } else {
                    -p
                }
            }),
            // σ¹: 2 Re Σ_{c up} conj(ψ_c) ψ_{c⊕bit}
            Pauli::X => {
                2.0 * par::chunked_sum(psi.len() / 2, |k| {
                    let c = insert_zero_bit(k, site);
                    (psi[c].conj() * psi[c | bit]).re
                })
            }
            // σ²|up⟩ = i|down⟩: ⟨σ²⟩ = 2 Re Σ_{c up} conj(ψ_{c⊕bit}) i ψ_c
            Pauli::Y => {
                2.0 * par::chunked_sum(psi.len() / 2, |k| {
                    let c = insert_zero_bit(k, site);
                    (psi[c | bit].conj() * Complex64::i() * psi[c]).re
                })
            }
        })
    }

    /// ⟨σ¹_x⟩ for every site.
    pub fn sigma1_profile(&self) -> Vec<f64> {
        (0..self.sites)
            .map(|x| self.expectation(Pauli::X, x).expect("site in range"))
            .collect()
    }
}

/// The k-th index with bit `x` clear.
fn insert_zero_bit(k: usize, x: usize) -> usize {
    let low = k & ((1usize << x) - 1);
    ((k >> x) << (x + 1)) | low
}

/// E(c) = Σ_{x<y} J(|x−y|) s_x s_y for every basis configuration c.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    sites: usize,
    energies: Vec<f64>,
}

impl EnergyTable {
    pub fn new(coupling: &CouplingModel, sites: usize) -> Result<Self, FiniteError> {
        check_sites(sites)?;
        let couplings: Vec<f64> = (0..sites).map(|d| coupling.coupling_at(d as i64)).collect();
        let pairs: Vec<(usize, usize, f64)> = (0..sites)
            .flat_map(|x| (x + 1..sites).map(move |y| (x, y)))
            .filter_map(|(x, y)| {
                let j = couplings[y - x];
                (j != 0.0).then_some((x, y, j))
            })
            .collect();
        let energies = par::collect_indexed(1usize << sites, |c| {
            pairs
                .iter()
                .map(|&(x, y, j)| {
                    if ((c >> x) ^ (c >> y)) & 1 == 0 {
                        j
                    } else {
                        -j
                    }
                })
                .sum()
        });
        Ok(Self { sites, energies })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// e^{−iHt} ψ.
    pub fn evolve(&self, psi: &SpinState, t: f64) -> Result<SpinState, FiniteError> {
        if psi.sites != self.sites {
            return Err(FiniteError::SiteMismatch {
                expected: self.sites,
                got: psi.sites,
            });
        }
        let amplitudes = par::collect_indexed(psi.amplitudes.len(), |c| {
            psi.amplitudes[c] * Complex64::from_polar(1.0, -self.energies[c] * t)
        });
        Ok(SpinState {
            sites: self.sites,
            amplitudes,
        })
    }
}

/// e^{−iHt} ψ for the chain Hamiltonian of `coupling`.
pub fn diagonal_evolve(
    psi: &SpinState,
    coupling: &CouplingModel,
    t: f64,
) -> Result<SpinState, FiniteError> {
    EnergyTable::new(coupling, psi.sites)?.evolve(psi, t)
}

/// Hermitian, positive, unit-trace matrix on 2^d dimensions.
#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix {
    sites: usize,
    matrix: OnceLock<DMatrix<Complex64>>,
    /// M with ρ = M M†, when built from a pure state.
    factor: Option<DMatrix<Complex64>>,
    spectrum: OnceLock<Vec<f64>>,
}

/// Von Neumann entropy and entropy per site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub entropy: f64,
    pub density: f64,
}

impl ReducedDensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, FiniteError> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() {
            return Err(FiniteError::NotDensityMatrix(format!(
                "shape {}x{} is not a square power of two",
                dim,
                matrix.ncols()
            )));
        }
        for i in 0..dim {
            for j in 0..=i {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(FiniteError::NotDensityMatrix(format!(
                        "not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(FiniteError::NotDensityMatrix(format!("trace {trace}")));
        }
        Ok(Self {
            sites: dim.trailing_zeros() as usize,
            matrix: OnceLock::from(matrix),
            factor: None,
            spectrum: OnceLock::new(),
        })
    }

    /// Maximally mixed state 1/2^d.
    pub fn maximally_mixed(sites: usize) -> Self {
        let dim = 1usize << sites;
        let m = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        Self::new(m).expect("identity / 2^d is a density matrix")
    }

    /// |ψ⟩⟨ψ|.
    pub fn pure(psi: &SpinState) -> Self {
        let v = DMatrix::from_column_slice(psi.amplitudes.len(), 1, &psi.amplitudes);
        Self {
            sites: psi.sites,
            matrix: OnceLock::new(),
            factor: Some(v),
            spectrum: OnceLock::new(),
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1usize << self.sites
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        self.matrix.get_or_init(|| {
            row_gram(self.factor.as_ref().expect("factor or matrix is always set"))
        })
    }

    /// Eigenvalues, ascending, 2^d of them.
    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.get_or_init(|| {
            let gram = match &self.factor {
                Some(m) if m.ncols() < m.nrows() => row_gram(&m.adjoint()),
                _ => self.matrix().clone(),
            };
            let mut eig: Vec<f64> = if gram.nrows() == 1 {
                vec![gram[(0, 0)].re]
            } else {
                gram.symmetric_eigenvalues().iter().copied().collect()
            };
            eig.resize(self.dim(), 0.0);
            eig.sort_by(f64::total_cmp);
            eig
        })
    }

    /// Total magnitude of eigenvalues below zero (discarded by clipping).
    pub fn clipped_mass(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .filter(|&&l| l < 0.0)
            .map(|l| -l)
            .sum()
    }

    /// S = −Σ λ ln λ with 0 ln 0 = 0 and negative eigenvalues clipped.
    pub fn von_neumann_entropy(&self) -> Result<Entropy, FiniteError> {
        let eig = self.eigenvalues();
        if let Some(&l) = eig.first() {
            if l < -NEGATIVE_EIGENVALUE_TOL {
                return Err(FiniteError::NegativeEigenvalue(l));
            }
        }
        let entropy: f64 = eig
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum::<f64>()
            .max(0.0);
        Ok(Entropy {
            entropy,
            density: entropy / self.sites as f64,
        })
    }

    /// 1 − Tr ρ².
    pub fn mixedness(&self) -> f64 {
        let purity: f64 = match &self.factor {
            // Tr (M M†)² = Tr (M† M)², computed in the smaller space
            Some(m) if m.ncols() < m.nrows() => row_gram(&m.adjoint()).iter().map(|z| z.norm_sqr()).sum(),
            _ => self.matrix().iter().map(|z| z.norm_sqr()).sum(),
        };
        (1.0 - purity).max(0.0)
    }
}

/// M M† for a column-major M, accumulated column by column over fixed
/// chunks; only the upper triangle is summed.
fn row_gram(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let rows = m.nrows();
    let data = m.as_slice();
    let chunk = (par::REDUCE_CHUNK / rows.max(1)).max(1);
    let upper = par::chunked_vec_sum(m.ncols(), rows * rows, chunk, |b, acc: &mut [Complex64]| {
        let col = &data[b * rows..(b + 1) * rows];
        for j in 0..rows {
            let cj = col[j].conj();
            if cj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..=j {
                acc[j * rows + i] += col[i] * cj;
            }
        }
    });
    DMatrix::from_fn(rows, rows, |i, j| {
        if i <= j {
            upper[j * rows + i]
        } else {
            upper[i * rows + j].conj()
        }
    })
}

/// ρ_region = Tr_complement |ψ⟩⟨ψ| with the default region cap.
pub fn partial_trace(
    psi: &SpinState,
    region: &[usize],
) -> Result<ReducedDensityMatrix, FiniteError> {
    partial_trace_capped(psi, region, DEFAULT_TRACE_CAP)
}

/// Partial trace keeping the sites in `region` (0-based). Bit `i` of a
/// reduced basis index is the `i`-th site of `region` in ascending order.
pub fn partial_trace_capped(
    psi: &SpinState,
    region: &[usize],
    cap: usize,
) -> Result<ReducedDensityMatrix, FiniteError> {
    let mut region = region.to_vec();
    region.sort_unstable();
    region.dedup();
    if region.is_empty() {
        return Err(FiniteError::InvalidRegion("region is empty".into()));
    }
    if let Some(&x) = region.iter().find(|&&x| x >= psi.sites) {
        return Err(FiniteError::InvalidSite {
            site: x,
            sites: psi.sites,
        });
    }
    if region.len() > cap {
        return Err(FiniteError::RegionTooLarge {
            size: region.len(),
            cap,
        });
    }
    let complement: Vec<usize> = (0..psi.sites).filter(|x| !region.contains(x)).collect();
    let rows = 1usize << region.len();
    let cols = 1usize << complement.len();
    let scatter = |bits: &[usize], k: usize| {
        bits.iter()
            .enumerate()
            .fold(0usize, |acc, (i, &x)| acc | (((k >> i) & 1) << x))
    };
    let row_offsets: Vec<usize> = (0..rows).map(|a| scatter(&region, a)).collect();
    let col_offsets: Vec<usize> = (0..cols).map(|b| scatter(&complement, b)).collect();
    // column-major: entry (a, b) at b * rows + a
    let data = par::collect_indexed(rows * cols, |k| {
        let (a, b) = (k % rows, k / rows);
        psi.amplitudes[row_offsets[a] | col_offsets[b]]
    });
    Ok(ReducedDensityMatrix {
        sites: region.len(),
        matrix: OnceLock::new(),
        factor: Some(DMatrix::from_vec(rows, cols, data)),
        spectrum: OnceLock::new(),
    })
}

/// Binary entropy H(α) = −α ln α − (1−α) ln(1−α).
pub fn binary_entropy(alpha: f64) -> f64 {
    crate::dyadic::eta(alpha) + crate::dyadic::eta(1.0 - alpha)
}

/// S(αρ₁ + (1−α)ρ₂) − αS(ρ₁) − (1−α)S(ρ₂); lies in [0, H(α)].
pub fn affinity_gap(
    rho1: &ReducedDensityMatrix,
    rho2: &ReducedDensityMatrix,
    alpha: f64,
) -> Result<f64, FiniteError> {
    if rho1.sites != rho2.sites {
        return Err(FiniteError::DimensionMismatch(rho1.sites, rho2.sites));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(FiniteError::InvalidWeight(alpha));
    }
    let mix = rho1.matrix() * Complex64::new(alpha, 0.0)
        + rho2.matrix() * Complex64::new(1.0 - alpha, 0.0);
    let mixed = ReducedDensityMatrix {
        sites: rho1.sites,
        matrix: OnceLock::from(mix),
        factor: None,
        spectrum: OnceLock::new(),
    };
    let s = mixed.von_neumann_entropy()?.entropy;
    let s1 = rho1.von_neumann_entropy()?.entropy;
    let s2 = rho2.von_neumann_entropy()?.entropy;
    Ok(s - alpha * s1 - (1.0 - alpha) * s2)
}

/// Whether ψ is supported (up to 1e-10 probability) on configurations of
/// minimal energy.
pub fn ground_state_check(psi: &SpinState, coupling: &CouplingModel) -> bool {
    match EnergyTable::new(coupling, psi.sites) {
        Ok(table) => ground_state_check_with(psi, &table),
        Err(_) => false,
    }
}

pub fn ground_state_check_with(psi: &SpinState, table: &EnergyTable) -> bool {
    if psi.sites != table.sites {
        return false;
    }
    let e0 = table.ground_energy();
    let slack = 1e-12 * e0.abs().max(1.0);
    let mass = par::chunked_sum(psi.amplitudes.len(), |c| {
        if table.energies[c] <= e0 + slack {
            psi.amplitudes[c].norm_sqr()
        } else {
            0.0
        }
    });
    mass >= 1.0 - 1e-10
}

/// Measured commutator norm and the Lieb–Robinson bound at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorCheck {
    /// ‖[τ_t(σ_a), σ_b]‖.
    pub lhs: f64,
    /// inf_λ 2 exp(−(λ|a−b| − 2‖Φ‖_λ |t|)) over the λ grid.
    pub bound: f64,
    /// λ attaining `bound`.
    pub lambda: f64,
}

/// Number of λ grid points for the bound.
pub const LAMBDA_GRID: usize = 4000;

/// ‖[τ_t(σ^op_a), σ^op_b]‖ on an N-site chain versus the Lieb–Robinson bound
/// with ‖A‖ = ‖B‖ = 1.
pub fn commutator_norm_check(
    coupling: &CouplingModel,
    site_a: usize,
    site_b: usize,
    op: Pauli,
    t: f64,
    sites: usize,
) -> Result<CommutatorCheck, FiniteError> {
    if sites > MAX_COMMUTATOR_SITES {
        return Err(FiniteError::TooManySites {
            sites,
            cap: MAX_COMMUTATOR_SITES,
        });
    }
    let table = EnergyTable::new(coupling, sites)?;
    commutator_norm_check_with(&table, coupling, site_a, site_b, op, t)
}

/// As [`commutator_norm_check`], reusing an energy table.
pub fn commutator_norm_check_with(
    table: &EnergyTable,
    coupling: &CouplingModel,
    site_a: usize,
    site_b: usize,
    op: Pauli,
    t: f64,
) -> Result<CommutatorCheck, FiniteError> {
    let sites = table.sites;
    if sites > MAX_COMMUTATOR_SITES {
        return Err(FiniteError::TooManySites {
            sites,
            cap: MAX_COMMUTATOR_SITES,
        });
    }
    for s in [site_a, site_b] {
        if s >= sites {
            return Err(FiniteError::InvalidSite { site: s, sites });
        }
    }
    if site_a == site_b {
        return Err(FiniteError::InvalidRegion(
            "commutator sites must differ".into(),
        ));
    }
    if coupling.is_dyson() {
        return Err(FiniteError::BoundInapplicable);
    }
    let a = Monomial::pauli(op, site_a, sites).heisenberg(&table.energies, t);
    let b = Monomial::pauli(op, site_b, sites);
    let lhs = a.commutator(&b).norm();
    let (bound, lambda) = lieb_robinson_bound(coupling, site_a.abs_diff(site_b), t)?;
    Ok(CommutatorCheck { lhs, bound, lambda })
}

/// inf over a λ grid of 2 exp(−(λ d − 2‖Φ‖_λ |t|)).
pub fn lieb_robinson_bound(
    coupling: &CouplingModel,
    distance: usize,
    t: f64,
) -> Result<(f64, f64), FiniteError> {
    let lambda_max = match coupling.lambda_max() {
        l if l == 0.0 => return Err(FiniteError::BoundInapplicable),
        l if l.is_finite() => l,
        _ => 600.0 / coupling.support().unwrap_or(1).max(1) as f64,
    };
    let mut best = (f64::INFINITY, f64::NAN);
    for i in 1..=LAMBDA_GRID {
        let lambda = lambda_max * i as f64 / (LAMBDA_GRID + 1) as f64;
        let norm = match coupling.lambda_norm(lambda).map(|n| n.value.finite()) {
            Ok(Some(v)) => v,
            _ => continue,
        };
        let exponent = -(lambda * distance as f64 - 2.0 * norm * t.abs());
        let bound = 2.0 * exponent.exp();
        if bound < best.0 {
            best = (bound, lambda);
        }
    }
    Ok(best)
}
