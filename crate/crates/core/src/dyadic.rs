//! The doubling map x ↦ 2x mod 1 as a classical reference for chaos and for
//! entropy growth of densities.
//!
//! Densities are piecewise constant on the dyadic grid of resolution `m`
//! (2^m cells). The transfer (Perron–Frobenius) operator of the doubling map
//! sends such a density to one of resolution `m − 1`, exactly, so every
//! statement about smoothing can be checked without quadrature error.
//! Individual orbits are handled as explicit binary digit strings, on which
//! the map is the one-sided shift.

use thiserror::Error;

/// Tolerance on the normalization ∫f = 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DyadicError {
    #[error("expected 2^{resolution} = {expected} cells, got {got}")]
    CellCount {
        resolution: u32,
        expected: usize,
        got: usize,
    },
    #[error("cell {index} is negative or not finite ({value})")]
    NegativeCell { index: usize, value: f64 },
    #[error("density is not normalized: mean of cells is {mean}")]
    NotNormalized { mean: f64 },
    #[error("density already constant")]
    AlreadyConstant,
    #[error("cannot apply {steps} transfer steps to a density of resolution {resolution}")]
    TooManySteps { steps: u32, resolution: u32 },
    #[error("orbit exhausted: shift by {shift} of an orbit with {len} digits")]
    OrbitExhausted { shift: usize, len: usize },
    #[error("binary digit at position {position} is {digit}, expected 0 or 1")]
    InvalidDigit { position: usize, digit: u8 },
    #[error("resolution {0} is too large")]
    ResolutionTooLarge(u32),
}

/// A probability density on [0, 1) that is constant on each of the 2^m
/// intervals [k/2^m, (k+1)/2^m).
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDensity {
    resolution: u32,
    cells: Vec<f64>,
}

impl DyadicDensity {
    pub fn new(resolution: u32, cells: Vec<f64>) -> Result<Self, DyadicError> {
        if resolution >= usize::BITS - 1 {
            return Err(DyadicError::ResolutionTooLarge(resolution));
        }
        let expected = 1usize << resolution;
        if cells.len() != expected {
            return Err(DyadicError::CellCount {
                resolution,
                expected,
                got: cells.len(),
            });
        }
        if let Some((index, &value)) = cells
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(DyadicError::NegativeCell { index, value });
        }
        let mean = cells.iter().sum::<f64>() / expected as f64;
        if (mean - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DyadicError::NotNormalized { mean });
        }
        Ok(Self { resolution, cells })
    }

    /// Normalizes non-negative weights into a density.
    pub fn from_weights(resolution: u32, weights: &[f64]) -> Result<Self, DyadicError> {
        let total: f64 = weights.iter().sum();
        let scale = weights.len() as f64 / total;
        Self::new(resolution, weights.iter().map(|w| w * scale).collect())
    }

    /// Histogram density of integer counts. When the total count is
    /// 2^m times a power of two every cell value is a dyadic rational and all
    /// transfer-operator averages are computed without rounding.
    pub fn from_counts(resolution: u32, counts: &[u64]) -> Result<Self, DyadicError> {
        let total: u64 = counts.iter().sum();
        let scale = counts.len() as f64 / total as f64;
        Self::new(resolution, counts.iter().map(|&c| c as f64 * scale).collect())
    }

    /// The invariant (Lebesgue) density f₀ ≡ 1.
    pub fn uniform(resolution: u32) -> Self {
        Self {
            resolution,
            cells: vec![1.0; 1usize << resolution],
        }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// Value of the density at x ∈ [0, 1).
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.cells.len();
        let k = ((x * n as f64).floor() as usize).min(n - 1);
        self.cells[k]
    }

    /// One step of the transfer operator: (Pf)(x) = ½[f(x/2) + f((x+1)/2)].
    pub fn pf_apply(&self) -> Result<Self, DyadicError> {
        if self.resolution == 0 {
            return Err(DyadicError::AlreadyConstant);
        }
        let half = self.cells.len() / 2;
        let cells = (0..half)
            .map(|j| 0.5 * (self.cells[j] + self.cells[j + half]))
            .collect();
        Ok(Self {
            resolution: self.resolution - 1,
            cells,
        })
    }

    /// Pⁿf from the closed form (Pⁿf)(x) = 2⁻ⁿ Σ_{k<2ⁿ} f((x+k)/2ⁿ).
    ///
    /// The 2ⁿ samples are added pairwise in the same tree as n successive
    /// [`pf_apply`](Self::pf_apply) steps and the 2⁻ⁿ factor is exact, so the
    /// two routes agree bit for bit.
    pub fn pf_power(&self, steps: u32) -> Result<Self, DyadicError> {
        if steps > self.resolution {
            return Err(DyadicError::TooManySteps {
                steps,
                resolution: self.resolution,
            });
        }
        let out_res = self.resolution - steps;
        let out_len = 1usize << out_res;
        let scale = 0.5f64.powi(steps as i32);
        let cells = (0..out_len)
            .map(|j| scale * self.pairwise_fibre_sum(j, out_res, steps))
            .collect();
        Ok(Self {
            resolution: out_res,
            cells,
        })
    }

    /// Σ_{k<2^level} f[j + k·2^stride_res].
    fn pairwise_fibre_sum(&self, j: usize, stride_res: u32, level: u32) -> f64 {
        if level == 0 {
            return self.cells[j];
        }
        // Outermost split is the first transfer step: offsets by 2^{m-1}.
        let inner_res = stride_res + 1;
        self.pairwise_fibre_sum(j, inner_res, level - 1)
            + self.pairwise_fibre_sum(j + (1usize << stride_res), inner_res, level - 1)
    }

    /// ∫ η(f(x)) dx with η(u) = −u ln u, η(0) = 0; exact for piecewise
    /// constant densities. Never positive; zero only for the uniform density.
    pub fn entropy(&self) -> f64 {
        let n = self.cells.len() as f64;
        self.cells.iter().map(|&u| eta(u)).sum::<f64>() / n
    }

    /// max_k |f_k − 1|.
    pub fn max_deviation(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| (c - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// η(u) = −u ln u with the convention η(0) = 0.
pub fn eta(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        -u * u.ln()
    }
}

/// One row of a smoothing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingStep {
    pub step: u32,
    pub entropy: f64,
    pub max_deviation: f64,
}

/// Applies P until the density is constant, recording entropy and distance
/// to the uniform density at every step (including step 0).
pub fn smoothing_trajectory(initial: &DyadicDensity, steps: u32) -> Vec<SmoothingStep> {
    let steps = steps.min(initial.resolution());
    let mut out = Vec::with_capacity(steps as usize + 1);
    let mut current = initial.clone();
    for step in 0..=steps {
        out.push(SmoothingStep {
            step,
            entropy: current.entropy(),
            max_deviation: current.max_deviation(),
        });
        if step < steps {
            current = current
                .pf_apply()
                .expect("step count is bounded by the resolution");
        }
    }
    out
}

/// A truncated binary expansion x = .ε₁ε₂…ε_L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryOrbit {
    bits: Vec<u8>,
}

impl BinaryOrbit {
    pub fn new(bits: Vec<u8>) -> Result<Self, DyadicError> {
        if let Some((position, &digit)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(DyadicError::InvalidDigit { position, digit });
        }
        Ok(Self { bits })
    }

    /// Parses digits such as `"1011"` (a leading `.` is allowed).
    pub fn parse(digits: &str) -> Result<Self, DyadicError> {
        let digits = digits.strip_prefix('.').unwrap_or(digits);
        Self::new(
            digits
                .bytes()
                .map(|b| b.wrapping_sub(b'0'))
                .collect(),
        )
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// T₂ⁿ on the expansion: drops the first `n` digits. Positions past the
    /// truncation are zero, so the returned orbit keeps the original length
    /// with a zero tail.
    pub fn shift(&self, n: usize) -> Result<Self, DyadicError> {
        if n > self.bits.len() {
            return Err(DyadicError::OrbitExhausted {
                shift: n,
                len: self.bits.len(),
            });
        }
        let mut bits = self.bits[n..].to_vec();
        bits.resize(self.bits.len(), 0);
        Ok(Self { bits })
    }

    /// Numerical value of the truncated expansion (for display only).
    pub fn value(&self) -> f64 {
        self.bits
            .iter()
            .rev()
            .fold(0.0, |acc, &b| 0.5 * (acc + b as f64))
    }

    /// Index of the first digit where two orbits differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        let n = self.bits.len().max(other.bits.len());
        (0..n).find(|&i| {
            self.bits.get(i).copied().unwrap_or(0) != other.bits.get(i).copied().unwrap_or(0)
        })
    }
}
