//! Sudden transverse-field quench of a ferromagnetic chain.
//!
//! A cycle has three steps: the all-up ground state sits invariant under the
//! Ising evolution; at t = 0 a strong transverse field replaces it by the
//! block state Ψ^f (σ¹ = +1 on each A_k, −1 on each B_k); the block state
//! then evolves freely. The pointer (1/N) Σ⟨σ¹_x⟩ of Ψ^f equals f = A/B.
//!
//! Blocks are 0-based and half-open: A_k = [kC, kC + C(1+f)/2) and
//! B_k = [kC + C(1+f)/2, (k+1)C).

use std::ops::Range;

use thiserror::Error;

use crate::finite::{
    self, EnergyTable, FiniteError, Pauli, ReducedDensityMatrix, SiteSpec, SiteState, SpinState,
};
use crate::interaction::CouplingModel;
use crate::par;

/// Observables within this distance of their t = 0 value count as unchanged.
pub const TRIVIALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuenchError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid time grid: {0}")]
    InvalidTimes(String),
    #[error("initial all-up state is not invariant: {0}")]
    NotInvariant(String),
    #[error("transformation is trivial: no observable changes after the quench")]
    Trivial,
    #[error("volume ratio must be positive, got {0}")]
    InvalidRatio(f64),
    #[error("particle number must be positive, got {0}")]
    InvalidParticles(f64),
    #[error(transparent)]
    Finite(#[from] FiniteError),
}

impl QuenchError {
    /// Whether the error comes from a capacity limit rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            QuenchError::Finite(FiniteError::TooManySites { .. })
                | QuenchError::Finite(FiniteError::RegionTooLarge { .. })
        )
    }
}

/// Decay parameters of the field condition and the optional per-site fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldParams {
    /// ψ > 1.
    pub psi: f64,
    /// α > 2 unless `enforce_alpha_gt_2` is off (then α > 1).
    pub alpha: f64,
    /// Per-site |h_x|; defaults to 2·max(1/ψ, 1).
    pub fields: Option<Vec<f64>>,
    pub enforce_alpha_gt_2: bool,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            psi: std::f64::consts::E,
            alpha: 3.0,
            fields: None,
            enforce_alpha_gt_2: true,
        }
    }
}

/// Validated block layout of a quench.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchPlan {
    a: u64,
    b: u64,
    c: u64,
    k: u64,
    psi: f64,
    alpha: f64,
    fields: Vec<f64>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl QuenchPlan {
    /// Plan with default field parameters.
    pub fn new(a: u64, b: u64, c: u64, k: u64) -> Result<Self, QuenchError> {
        Self::with_fields(a, b, c, k, FieldParams::default())
    }

    pub fn with_fields(
        a: u64,
        b: u64,
        c: u64,
        k: u64,
        params: FieldParams,
    ) -> Result<Self, QuenchError> {
        let bad = |m: String| Err(QuenchError::InvalidPlan(m));
        if a == 0 || a >= b {
            return bad(format!("f = A/B must satisfy 0 < A < B, got A={a}, B={b}"));
        }
        if gcd(a, b) != 1 {
            return bad(format!("gcd(A, B) must be 1, got gcd({a}, {b}) = {}", gcd(a, b)));
        }
        if c < 2 * b || c % (2 * b) != 0 {
            return bad(format!("C must be a multiple of 2B with C >= 2B, got C={c}, 2B={}", 2 * b));
        }
        if k == 0 {
            return bad("K must be at least 1".into());
        }
        if !(params.psi > 1.0) || !params.psi.is_finite() {
            return bad(format!("psi must exceed 1, got {}", params.psi));
        }
        let alpha_min = if params.enforce_alpha_gt_2 { 2.0 } else { 1.0 };
        if !(params.alpha > alpha_min) || !params.alpha.is_finite() {
            return bad(format!("alpha must exceed {alpha_min}, got {}", params.alpha));
        }
        let sites = (c * k) as usize;
        // sup over x != 0 of max(psi^-|x|, |x|^-alpha), attained at |x| = 1
        let floor = (1.0 / params.psi).max(1.0);
        let fields = match params.fields {
            None => vec![2.0 * floor; sites],
            Some(h) => {
                if h.len() != sites {
                    return bad(format!("expected {sites} field values (one per site), got {}", h.len()));
                }
                if let Some((x, v)) = h.iter().enumerate().find(|(_, v)| !(**v > floor)) {
                    return bad(format!(
                        "h_x must exceed max(1/psi, 1) = {floor}, got h_{x} = {v}"
                    ));
                }
                h
            }
        };
        Ok(Self {
            a,
            b,
            c,
            k,
            psi: params.psi,
            alpha: params.alpha,
            fields,
        })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn blocks(&self) -> u64 {
        self.k
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// f = A/B.
    pub fn f(&self) -> f64 {
        self.a as f64 / self.b as f64
    }

    /// N = K·C.
    pub fn sites(&self) -> usize {
        (self.c * self.k) as usize
    }

    /// |A_k| = C(1+f)/2 = C(B+A)/(2B).
    pub fn plus_len(&self) -> usize {
        (self.c / (2 * self.b) * (self.b + self.a)) as usize
    }

    /// |B_k| = C(1−f)/2.
    pub fn minus_len(&self) -> usize {
        self.c as usize - self.plus_len()
    }

    pub fn plus_block(&self, k: u64) -> Range<usize> {
        let start = (k * self.c) as usize;
        start..start + self.plus_len()
    }

    pub fn minus_block(&self, k: u64) -> Range<usize> {
        let start = (k * self.c) as usize + self.plus_len();
        start..start + self.minus_len()
    }

    /// σ¹ pattern of the prepared state.
    pub fn site_spec(&self) -> SiteSpec {
        let block = (0..self.c as usize).map(|i| {
            if i < self.plus_len() {
                SiteState::Plus
            } else {
                SiteState::Minus
            }
        });
        SiteSpec(
            std::iter::repeat_n(block, self.k as usize)
                .flatten()
                .collect(),
        )
    }

    /// Ψ^f, the ground state of the transverse field −Σ h_x ε_x σ¹_x.
    pub fn prepared_state(&self) -> Result<SpinState, QuenchError> {
        Ok(SpinState::product(&self.site_spec())?)
    }
}

/// (1/N) Σ_x ⟨σ¹_x⟩.
pub fn pointer_value(psi: &SpinState) -> f64 {
    let profile = psi.sigma1_profile();
    profile.iter().sum::<f64>() / profile.len() as f64
}

/// Observables of the evolved state at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub t: f64,
    pub subregion_entropy: f64,
    pub entropy_density: f64,
    pub mixedness: f64,
    /// Entropy of the whole chain (a pure state, so 0 up to rounding).
    pub global_entropy: f64,
    pub pointer: f64,
    /// ⟨σ¹_x⟩ for every site.
    pub sigma1: Vec<f64>,
}

/// Sampled post-quench trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrace {
    pub plan: QuenchPlan,
    pub coupling: CouplingModel,
    pub subregion: Vec<usize>,
    pub records: Vec<CycleRecord>,
}

impl CycleTrace {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

fn check_grid(times: &[f64]) -> Result<(), QuenchError> {
    if times.is_empty() {
        return Err(QuenchError::InvalidTimes("grid is empty".into()));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(QuenchError::InvalidTimes(format!("time {t} is not finite")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QuenchError::InvalidTimes("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn record(
    table: &EnergyTable,
    psi0: &SpinState,
    subregion: &[usize],
    t: f64,
) -> Result<CycleRecord, FiniteError> {
    let psi = table.evolve(psi0, t)?;
    let rho = finite::partial_trace(&psi, subregion)?;
    let s = rho.von_neumann_entropy()?;
    let global = ReducedDensityMatrix::pure(&psi).von_neumann_entropy()?;
    let sigma1 = psi.sigma1_profile();
    Ok(CycleRecord {
        t,
        subregion_entropy: s.entropy,
        entropy_density: s.density,
        mixedness: rho.mixedness(),
        global_entropy: global.entropy,
        pointer: sigma1.iter().sum::<f64>() / sigma1.len() as f64,
        sigma1,
    })
}

/// Evolves the prepared state over `times` (any sign) without the
/// invariance and nontriviality checks of [`run_cycle`].
pub fn trace_post_quench(
    plan: &QuenchPlan,
    coupling: &CouplingModel,
    subregion: &[usize],
    times: &[f64],
) -> Result<CycleTrace, QuenchError> {
    check_grid(times)?;
    let psi0 = plan.prepared_state()?;
    let table = EnergyTable::new(coupling, plan.sites())?;
    let records = par::map_slice(times, |&t| record(&table, &psi0, subregion, t))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CycleTrace {
        plan: plan.clone(),
        coupling: coupling.clone(),
        subregion: subregion.to_vec(),
        records,
    })
}

/// Runs the three-step cycle and records the post-quench trajectory.
/// The grid must contain t = 0 and no negative times.
pub fn run_cycle(
    plan: &QuenchPlan,
    coupling: &CouplingModel,
    subregion: &[usize],
    times: &[f64],
) -> Result<CycleTrace, QuenchError> {
    check_grid(times)?;
    if !times.contains(&0.0) {
        return Err(QuenchError::InvalidTimes("grid must contain t = 0".into()));
    }
    if times[0] < 0.0 {
        return Err(QuenchError::InvalidTimes(
            "post-quench times must be non-negative".into(),
        ));
    }

    // step 1: the all-up state is a ground state and does not move
    let table = EnergyTable::new(coupling, plan.sites())?;
    let up = SpinState::product(&SiteSpec::uniform(SiteState::Up, plan.sites()))?;
    if !finite::ground_state_check_with(&up, &table) {
        return Err(QuenchError::NotInvariant(
            "all-up configuration does not minimize the energy".into(),
        ));
    }
    let t_last = *times.last().expect("grid is nonempty");
    let moved = table.evolve(&up, t_last)?;
    for op in [Pauli::X, Pauli::Y, Pauli::Z] {
        for x in 0..plan.sites() {
            let (before, after) = (up.expectation(op, x)?, moved.expectation(op, x)?);
            if (before - after).abs() > TRIVIALITY_TOL {
                return Err(QuenchError::NotInvariant(format!(
                    "<sigma_{x}> moved from {before} to {after}"
                )));
            }
        }
    }

    // steps 2 and 3: sudden replacement by the block state, then free evolution
    let trace = trace_post_quench(plan, coupling, subregion, times)?;
    let start = trace
        .records
        .iter()
        .find(|r| r.t == 0.0)
        .expect("grid contains zero");
    let changed = trace.records.iter().any(|r| {
        (r.subregion_entropy - start.subregion_entropy).abs() > TRIVIALITY_TOL
            || (r.pointer - start.pointer).abs() > TRIVIALITY_TOL
            || r.sigma1
                .iter()
                .zip(&start.sigma1)
                .any(|(a, b)| (a - b).abs() > TRIVIALITY_TOL)
    });
    if !changed {
        return Err(QuenchError::Trivial);
    }
    Ok(trace)
}

/// f(t) = ⟨σ¹_site⟩(t) − ⟨σ¹_site⟩(0) along the trace.
pub fn time_arrow_witness(trace: &CycleTrace, site: usize) -> Result<Vec<(f64, f64)>, QuenchError> {
    let sites = trace.plan.sites();
    if site >= sites {
        return Err(FiniteError::InvalidSite { site, sites }.into());
    }
    let start = trace
        .records
        .iter()
        .find(|r| r.t == 0.0)
        .ok_or_else(|| QuenchError::InvalidTimes("trace has no t = 0 record".into()))?;
    let base = start.sigma1[site];
    Ok(trace
        .records
        .iter()
        .map(|r| (r.t, r.sigma1[site] - base))
        .collect())
}

/// Entropy change n·ln(ratio) of an ideal gas expanding adiabatically by
/// `ratio` in volume.
pub fn barrier_delta_s(n_particles: f64, volume_ratio: f64) -> Result<f64, QuenchError> {
    if !(n_particles > 0.0) {
        return Err(QuenchError::InvalidParticles(n_particles));
    }
    if !(volume_ratio > 0.0) {
        return Err(QuenchError::InvalidRatio(volume_ratio));
    }
    Ok(n_particles * volume_ratio.ln())
}
