//! Infinite cosine products: the Cloitre function
//! Cl_{p;s}(t) = ∏_{n≥1} (1 − p + p cos(n^{−s} t)) and the infinite-volume
//! single-spin correlator ∏_{j≥1} cos²(2ε(j)t) of the generalized Ising chain.
//!
//! Products are accumulated in log space with an explicit sign. The first
//! `N` factors (those with phase u_n = a_n t above a switch-over value) are
//! multiplied out; the remaining tail is summed from the power series
//! ln(1 − p(1 − cos u)) = Σ_k c_k u^{2k} against closed-form power sums of
//! the frequency sequence. The reported `truncation_bound` covers the series
//! remainder (Cauchy estimate on the unit disk) and the error of the tail
//! power sums; `rounding_bound` is a separate first-order estimate of
//! floating-point rounding in the explicit factors.

use thiserror::Error;

use crate::interaction::{CouplingKind, CouplingModel};
use crate::par;
use crate::special::hurwitz_zeta;

/// Number of series terms used for the tail.
const SERIES_TERMS: usize = 12;

/// Default cap on the number of explicitly multiplied factors.
pub const DEFAULT_TERM_CAP: u64 = 50_000_000;

const HEAD_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProductError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(
        "tolerance {tol:e} unreachable within {cap} factors; best achievable bound {achievable:e}"
    )]
    ToleranceUnreachable { tol: f64, cap: u64, achievable: f64 },
}

/// sign · exp(log_magnitude), with bounds on the error of `log_magnitude`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductValue {
    pub log_magnitude: f64,
    /// +1, −1, or 0 when some factor vanished exactly.
    pub sign: i8,
    /// Log error from the discarded (series-summed) tail; infinite when no
    /// tail estimate applies.
    pub truncation_bound: f64,
    /// Estimated floating-point rounding in `log_magnitude`.
    pub rounding_bound: f64,
    /// Factors multiplied explicitly before the tail series takes over.
    pub terms_used: u64,
}

impl ProductValue {
    pub fn one() -> Self {
        Self {
            log_magnitude: 0.0,
            sign: 1,
            truncation_bound: 0.0,
            rounding_bound: 0.0,
            terms_used: 0,
        }
    }

    fn zero(terms_used: u64) -> Self {
        Self {
            log_magnitude: f64::NEG_INFINITY,
            sign: 0,
            truncation_bound: 0.0,
            rounding_bound: 0.0,
            terms_used,
        }
    }

    /// The value as a float; underflows to ±0 for very negative logs.
    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => s as f64 * self.log_magnitude.exp(),
        }
    }

    /// Whether `value()` is representable without underflow to zero.
    pub fn is_representable(&self) -> bool {
        self.sign == 0 || self.log_magnitude > f64::MIN_POSITIVE.ln()
    }

    /// Square of the product (used for two-sided correlators).
    pub fn squared(self) -> Self {
        Self {
            log_magnitude: 2.0 * self.log_magnitude,
            sign: self.sign * self.sign,
            truncation_bound: 2.0 * self.truncation_bound,
            rounding_bound: 2.0 * self.rounding_bound,
            terms_used: self.terms_used,
        }
    }
}

/// Decreasing positive frequencies a_1 ≥ a_2 ≥ … of a cosine product.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencySequence {
    /// a_n = coef · n^{−exponent}, exponent > ½.
    PowerLaw { coef: f64, exponent: f64 },
    /// a_n = coef · ratio^n, 0 < ratio < 1.
    Geometric { coef: f64, ratio: f64 },
    /// a_1..a_L explicitly; zero afterwards.
    Finite(Vec<f64>),
}

impl FrequencySequence {
    /// a_n for n ≥ 1.
    pub fn frequency(&self, n: u64) -> f64 {
        match self {
            FrequencySequence::PowerLaw { coef, exponent } => coef * (n as f64).powf(-exponent),
            FrequencySequence::Geometric { coef, ratio } => coef * ratio.powf(n as f64),
            FrequencySequence::Finite(v) => v.get(n as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// Smallest N (up to rounding) with a_n ≤ threshold for every n > N.
    /// Saturates at `u64::MAX` for unreachable thresholds.
    fn head_len(&self, threshold: f64) -> u64 {
        let raw = match self {
            FrequencySequence::Finite(v) => return v.len() as u64,
            FrequencySequence::PowerLaw { coef, exponent } => {
                (coef / threshold).powf(1.0 / exponent).floor()
            }
            FrequencySequence::Geometric { coef, ratio } => {
                ((coef / threshold).ln() / -ratio.ln()).floor().max(0.0)
            }
        };
        if !(raw < 1e18) {
            return u64::MAX;
        }
        let mut n = raw as u64;
        while self.frequency(n + 1) > threshold {
            n += 1;
        }
        n
    }

    /// Σ_{n>after} (scale · a_n)^power with an error bound.
    fn tail_power_sum(&self, scale: f64, power: i32, after: u64) -> (f64, f64) {
        match self {
            FrequencySequence::Finite(v) => {
                let s: f64 = v
                    .iter()
                    .skip(after as usize)
                    .map(|a| (scale * a).powi(power))
                    .sum();
                (s, 4.0 * f64::EPSILON * s * v.len() as f64)
            }
            FrequencySequence::Geometric { coef, ratio } => {
                let first = (scale * coef).ln() + (after as f64 + 1.0) * ratio.ln();
                let value = (power as f64 * first).exp() / (1.0 - ratio.powi(power));
                (value, 8.0 * f64::EPSILON * value)
            }
            FrequencySequence::PowerLaw { coef, exponent } => {
                let z = hurwitz_zeta(exponent * power as f64, after as f64 + 1.0);
                if z.value <= 0.0 {
                    return (0.0, 0.0);
                }
                let factor = (power as f64 * (scale * coef).ln()).exp();
                let value = factor * z.value;
                (value, factor * z.bound + 8.0 * f64::EPSILON * value)
            }
        }
    }
}

/// ∏_{n≥1} (1 − p + p cos(a_n t)) for p ∈ [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CosineProduct {
    weight: f64,
    frequencies: FrequencySequence,
    series: [f64; SERIES_TERMS],
    term_cap: u64,
}

impl CosineProduct {
    pub fn new(weight: f64, frequencies: FrequencySequence) -> Result<Self, ProductError> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(ProductError::InvalidArgument(format!(
                "weight p must lie in [0, 1], got {weight}"
            )));
        }
        match &frequencies {
            FrequencySequence::PowerLaw { coef, exponent } => {
                if !(*exponent > 0.5 && *coef >= 0.0 && coef.is_finite()) {
                    return Err(ProductError::InvalidArgument(format!(
                        "power-law frequencies need exponent > 1/2 and coef >= 0, got {exponent}, {coef}"
                    )));
                }
            }
            FrequencySequence::Geometric { coef, ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0 && *coef >= 0.0 && coef.is_finite()) {
                    return Err(ProductError::InvalidArgument(format!(
                        "geometric frequencies need 0 < ratio < 1 and coef >= 0, got {ratio}, {coef}"
                    )));
                }
            }
            FrequencySequence::Finite(v) => {
                if v.iter().any(|a| !a.is_finite()) {
                    return Err(ProductError::InvalidArgument(
                        "frequencies must be finite".into(),
                    ));
                }
            }
        }
        Ok(Self {
            weight,
            frequencies,
            series: log_factor_series(weight),
            term_cap: DEFAULT_TERM_CAP,
        })
    }

    /// Sets the maximal number of explicitly multiplied factors.
    pub fn with_term_cap(mut self, cap: u64) -> Self {
        self.term_cap = cap;
        self
    }

    /// Evaluates the product with `truncation_bound < tol`.
    pub fn evaluate(&self, t: f64, tol: f64) -> Result<ProductValue, ProductError> {
        if !(tol > 0.0) {
            return Err(ProductError::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if !t.is_finite() {
            return Err(ProductError::InvalidArgument(format!("time {t} is not finite")));
        }
        let t = t.abs();
        if t == 0.0 || self.weight == 0.0 {
            return Ok(ProductValue::one());
        }
        let mut achievable = f64::INFINITY;
        let mut switch = 0.5;
        for _ in 0..60 {
            let head = self.frequencies.head_len(switch / t);
            if head > self.term_cap {
                break;
            }
            let tail = self.tail(t, head, switch);
            achievable = achievable.min(tail.bound);
            if tail.bound < tol {
                return Ok(self.combine(t, head, tail));
            }
            if matches!(self.frequencies, FrequencySequence::Finite(_)) {
                break;
            }
            switch *= 0.5;
        }
        Err(ProductError::ToleranceUnreachable {
            tol,
            cap: self.term_cap,
            achievable,
        })
    }

    /// Evaluates with exactly `head` explicit factors and the series tail.
    /// The tail phases must satisfy a_n |t| ≤ 1 for n > head.
    pub fn evaluate_with_head(&self, t: f64, head: u64) -> Result<ProductValue, ProductError> {
        let t = t.abs();
        if t == 0.0 || self.weight == 0.0 {
            return Ok(ProductValue::one());
        }
        let switch = self.frequencies.frequency(head + 1) * t;
        if switch > 1.0 {
            return Err(ProductError::InvalidArgument(format!(
                "tail phase {switch} exceeds the unit radius of the tail series"
            )));
        }
        let tail = self.tail(t, head, switch);
        Ok(self.combine(t, head, tail))
    }

    /// Plain truncation ∏_{n≤terms}, no tail correction, accumulated in log
    /// space. `truncation_bound` is |tail| + its error when the tail phases
    /// stay within the unit disk, infinite otherwise.
    pub fn truncated(&self, t: f64, terms: u64) -> ProductValue {
        let t = t.abs();
        let head = self.head(t, terms);
        if head.zero {
            return ProductValue::zero(terms);
        }
        let switch = self.frequencies.frequency(terms + 1) * t;
        let truncation_bound = if switch <= 1.0 {
            let tail = self.tail(t, terms, switch);
            tail.value.abs() + tail.bound
        } else {
            f64::INFINITY
        };
        ProductValue {
            log_magnitude: head.log,
            sign: if head.negatives % 2 == 0 { 1 } else { -1 },
            truncation_bound,
            rounding_bound: head.rounding,
            terms_used: terms,
        }
    }

    fn combine(&self, t: f64, head: u64, tail: TailSum) -> ProductValue {
        let h = self.head(t, head);
        if h.zero {
            return ProductValue::zero(head);
        }
        ProductValue {
            log_magnitude: h.log + tail.value,
            sign: if h.negatives % 2 == 0 { 1 } else { -1 },
            truncation_bound: tail.bound,
            rounding_bound: h.rounding,
            terms_used: head,
        }
    }

    fn tail(&self, t: f64, head: u64, switch: f64) -> TailSum {
        if let FrequencySequence::Finite(v) = &self.frequencies {
            if head as usize >= v.len() {
                return TailSum {
                    value: 0.0,
                    bound: 0.0,
                };
            }
        }
        let mut value = 0.0;
        let mut bound = 0.0;
        for (k, c) in self.series.iter().enumerate() {
            let (s, err) = self.frequencies.tail_power_sum(t, 2 * (k as i32 + 1), head);
            value += c * s;
            bound += c.abs() * err + 2.0 * f64::EPSILON * (c * s).abs();
        }
        let (rest, rest_err) =
            self.frequencies
                .tail_power_sum(t, 2 * (SERIES_TERMS as i32 + 1), head);
        let cauchy = -(1.0 - self.weight * (1f64.cosh() - 1.0)).ln();
        bound += cauchy * (rest + rest_err) / (1.0 - switch * switch);
        TailSum { value, bound }
    }

    fn head(&self, t: f64, terms: u64) -> HeadSum {
        let chunks = terms.div_ceil(HEAD_CHUNK);
        let parts = par::collect_indexed(chunks as usize, |c| {
            let lo = c as u64 * HEAD_CHUNK + 1;
            let hi = (lo + HEAD_CHUNK - 1).min(terms);
            let mut acc = HeadSum::default();
            for n in lo..=hi {
                acc.push(self.weight, self.frequencies.frequency(n) * t);
            }
            acc
        });
        parts
            .into_iter()
            .fold(HeadSum::default(), |mut acc, part| {
                acc.merge(part);
                acc
            })
            .finish()
    }
}

#[derive(Debug, Clone, Copy)]
struct TailSum {
    value: f64,
    bound: f64,
}

/// Neumaier-compensated log accumulator with sign and rounding tracking.
#[derive(Debug, Clone, Copy, Default)]
struct HeadSum {
    log: f64,
    compensation: f64,
    negatives: u64,
    zero: bool,
    rounding: f64,
}

impl HeadSum {
    fn add(&mut self, x: f64) {
        let s = self.log + x;
        if self.log.abs() >= x.abs() {
            self.compensation += (self.log - s) + x;
        } else {
            self.compensation += (x - s) + self.log;
        }
        self.log = s;
    }

    fn push(&mut self, weight: f64, phase: f64) {
        let half_sin = (0.5 * phase).sin();
        let y = 2.0 * weight * half_sin * half_sin;
        let factor = 1.0 - y;
        if factor == 0.0 {
            self.zero = true;
            return;
        }
        let log = if y < 0.5 { (-y).ln_1p() } else { factor.abs().ln() };
        if factor < 0.0 {
            self.negatives += 1;
        }
        self.add(log);
        let sensitivity = 1.0 + phase * weight * phase.sin().abs();
        self.rounding += 4.0 * f64::EPSILON * (log.abs() + sensitivity / factor.abs());
    }

    fn merge(&mut self, other: HeadSum) {
        self.add(other.log);
        self.compensation += other.compensation;
        self.negatives += other.negatives;
        self.zero |= other.zero;
        self.rounding += other.rounding;
    }

    fn finish(mut self) -> Self {
        self.log += self.compensation;
        self.compensation = 0.0;
        self.rounding += 2.0 * f64::EPSILON * self.log.abs();
        self
    }
}

/// Coefficients c_k of ln(1 − p(1 − cos u)) = Σ_{k≥1} c_k u^{2k}.
fn log_factor_series(weight: f64) -> [f64; SERIES_TERMS] {
    // x(w) = p (1 − cos √w) as a polynomial in w = u², degree ≤ SERIES_TERMS
    let mut x = [0.0; SERIES_TERMS + 1];
    let mut fact = 1.0;
    for k in 1..=SERIES_TERMS {
        fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        x[k] = weight * sign / fact;
    }
    // ln(1 − x) = −Σ_m x^m / m
    let mut out = [0.0; SERIES_TERMS + 1];
    let mut power = x;
    for m in 1..=SERIES_TERMS {
        for k in 1..=SERIES_TERMS {
            out[k] -= power[k] / m as f64;
        }
        let mut next = [0.0; SERIES_TERMS + 1];
        for (i, &a) in power.iter().enumerate().skip(1) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in x.iter().enumerate().skip(1) {
                if i + j > SERIES_TERMS {
                    break;
                }
                next[i + j] += a * b;
            }
        }
        power = next;
    }
    let mut coeffs = [0.0; SERIES_TERMS];
    coeffs.copy_from_slice(&out[1..]);
    coeffs
}

/// Cl_{p;s}(t) = ∏_{n≥1} (1 − p + p cos(n^{−s} t)).
pub fn cloitre(p: f64, s: f64, t: f64, tol: f64) -> Result<ProductValue, ProductError> {
    cloitre_product(p, s)?.evaluate(checked_time(t)?, tol)
}

/// The product object behind [`cloitre`], for repeated or forced-head use.
pub fn cloitre_product(p: f64, s: f64) -> Result<CosineProduct, ProductError> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(ProductError::InvalidArgument(format!(
            "Cloitre exponent must exceed 1, got {s}"
        )));
    }
    CosineProduct::new(
        p,
        FrequencySequence::PowerLaw {
            coef: 1.0,
            exponent: s,
        },
    )
}

fn checked_time(t: f64) -> Result<f64, ProductError> {
    if t >= 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(ProductError::InvalidArgument(format!(
            "time must be finite and non-negative, got {t}"
        )))
    }
}

/// ∏_{j≥1} cos(2ε(j)t) for the one-sided neighbour chain of a coupling.
pub fn one_sided_product(coupling: &CouplingModel) -> CosineProduct {
    let scale = coupling.scale();
    let frequencies = match coupling.kind() {
        CouplingKind::Exponential { xi } => FrequencySequence::Geometric {
            coef: 2.0 * scale,
            ratio: 1.0 / xi,
        },
        CouplingKind::Dyson { alpha } => FrequencySequence::PowerLaw {
            coef: 2.0 * scale,
            exponent: *alpha,
        },
        CouplingKind::Table(_) => {
            let support = coupling.support().unwrap_or(0);
            FrequencySequence::Finite((1..=support).map(|d| 2.0 * coupling.magnitude(d)).collect())
        }
    };
    CosineProduct::new(1.0, frequencies).expect("coupling invariants give valid frequencies")
}

/// Infinite-volume ⟨σ¹_x(t)⟩ in a σ¹ product state:
/// ∏_{j≥1} cos²(2ε(j)t), always in [0, 1].
pub fn gim_correlator(
    coupling: &CouplingModel,
    t: f64,
    tol: f64,
) -> Result<ProductValue, ProductError> {
    Ok(one_sided_product(coupling)
        .evaluate(t, 0.5 * tol)?
        .squared())
}

/// ∏_{y≠site} cos(2 J(|site − y|) t) over the other sites of an open chain
/// of `sites` spins: the exact ⟨σ¹_site(t)⟩ of the all-plus σ¹ product state.
pub fn finite_chain_correlator(
    coupling: &CouplingModel,
    site: usize,
    sites: usize,
    t: f64,
) -> ProductValue {
    let frequencies: Vec<f64> = (0..sites)
        .filter(|&y| y != site)
        .map(|y| 2.0 * coupling.coupling_at(y as i64 - site as i64).abs())
        .collect();
    let n = frequencies.len() as u64;
    CosineProduct::new(1.0, FrequencySequence::Finite(frequencies))
        .expect("finite frequencies")
        .truncated(t, n)
}

/// The two candidate readings of the Dyson correlator in terms of the
/// Cloitre function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonReadings {
    /// ∏ cos²(2 j^{−s} t) evaluated directly.
    pub correlator: ProductValue,
    /// Cl_{½;s}(4t), from cos²θ = ½ + ½ cos 2θ.
    pub cloitre_rescaled: ProductValue,
    /// Cl_{½;s}(t)².
    pub cloitre_squared: ProductValue,
}

impl DysonReadings {
    /// |correlator − Cl_{½;s}(4t)| and |correlator − Cl_{½;s}(t)²|.
    pub fn disagreement(&self) -> (f64, f64) {
        let c = self.correlator.value();
        (
            (c - self.cloitre_rescaled.value()).abs(),
            (c - self.cloitre_squared.value()).abs(),
        )
    }
}

pub fn dyson_readings(s: f64, t: f64, tol: f64) -> Result<DysonReadings, ProductError> {
    let coupling = CouplingModel::dyson(s)
        .map_err(|e| ProductError::InvalidArgument(e.to_string()))?;
    Ok(DysonReadings {
        correlator: gim_correlator(&coupling, t, tol)?,
        cloitre_rescaled: cloitre(0.5, s, 4.0 * t, tol)?,
        cloitre_squared: cloitre(0.5, s, t, 0.5 * tol)?.squared(),
    })
}

/// What a sensitivity scan evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanTarget {
    Cloitre { p: f64, s: f64 },
    Correlator(CouplingModel),
}

impl ScanTarget {
    pub fn evaluate(&self, t: f64, tol: f64) -> Result<ProductValue, ProductError> {
        match self {
            ScanTarget::Cloitre { p, s } => cloitre(*p, *s, t, tol),
            ScanTarget::Correlator(c) => gim_correlator(c, t, tol),
        }
    }
}

/// |F(t + δ) − F(t)| at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub t: f64,
    pub delta: f64,
    pub diff: Result<f64, ProductError>,
}

/// Raw finite-difference table over `times`; rows are independent and
/// returned in input order. Failed evaluations mark their row only.
pub fn sensitivity_scan(
    target: &ScanTarget,
    times: &[f64],
    delta: f64,
    tol: f64,
) -> Result<Vec<SensitivityRow>, ProductError> {
    if !(delta > 0.0) {
        return Err(ProductError::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if times.is_empty() {
        return Err(ProductError::InvalidArgument("empty time grid".into()));
    }
    Ok(par::map_slice(times, |&t| {
        let diff = target.evaluate(t, tol).and_then(|a| {
            let b = target.evaluate(t + delta, tol)?;
            Ok((b.value() - a.value()).abs())
        });
        SensitivityRow { t, delta, diff }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn series_matches_log_of_factor() {
        for &p in &[0.0, 0.3, 0.5, 1.0] {
            let c = log_factor_series(p);
            for &u in &[0.01, 0.1, 0.3] {
                let direct = (1.0 - p * (1.0 - f64::cos(u))).ln();
                let series: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(k, ck)| ck * u.powi(2 * (k as i32 + 1)))
                    .sum();
                assert_abs_diff_eq!(direct, series, epsilon = 1e-16);
            }
        }
        // ln cos u = −u²/2 − u⁴/12 − …
        let c = log_factor_series(1.0);
        assert_abs_diff_eq!(c[0], -0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(c[1], -1.0 / 12.0, epsilon = 1e-16);
    }

    #[test]
    fn trivial_cases_are_one() {
        for s in [1.1, 2.0] {
            let v = cloitre(0.7, s, 0.0, 1e-10).unwrap();
            assert_eq!((v.sign, v.log_magnitude, v.value()), (1, 0.0, 1.0));
            assert_eq!(cloitre(0.0, s, 123.0, 1e-10).unwrap().value(), 1.0);
        }
        let c = CouplingModel::exponential(2.0).unwrap();
        assert_eq!(gim_correlator(&c, 0.0, 1e-12).unwrap().value(), 1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(cloitre(1.5, 2.0, 1.0, 1e-8).is_err());
        assert!(cloitre(0.5, 1.0, 1.0, 1e-8).is_err());
        assert!(cloitre(0.5, 2.0, -1.0, 1e-8).is_err());
        assert!(cloitre(0.5, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn tiny_cap_reports_achievable_bound() {
        let err = cloitre_product(0.5, 1.2)
            .unwrap()
            .with_term_cap(10)
            .evaluate(1000.0, 1e-12)
            .unwrap_err();
        match err {
            ProductError::ToleranceUnreachable { cap, achievable, .. } => {
                assert_eq!(cap, 10);
                assert!(achievable > 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn exponential_correlator_matches_viete() {
        let c = CouplingModel::exponential(2.0).unwrap();
        for i in 1..200 {
            let t = 0.25 * i as f64;
            let closed = ((2.0 * t).sin() / (2.0 * t)).powi(2);
            let got = gim_correlator(&c, t, 1e-12).unwrap();
            assert!((got.value() - closed).abs() < 1e-10, "t={t}");
            // cross-check against a long plain truncation
            let brute = one_sided_product(&c).truncated(t, 80).squared();
            assert!((brute.value() - closed).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn dyson_correlator_is_rescaled_cloitre() {
        for &t in &[0.3, 2.0, 17.0] {
            let r = dyson_readings(1.5, t, 1e-10).unwrap();
            let (rescaled, _) = r.disagreement();
            assert!(rescaled < 1e-9, "t={t}: {rescaled}");
            assert!((0.0..=1.0).contains(&r.correlator.value()));
        }
    }

    #[test]
    fn sign_tracking_matches_direct_product() {
        // p = 1: factors cos(n^{-s} t) change sign for small n
        let prod = cloitre_product(1.0, 2.0).unwrap();
        let t = 40.0;
        let direct: f64 = (1..=10_000u64)
            .map(|n| (t * (n as f64).powf(-2.0)).cos())
            .product();
        let v = prod.truncated(t, 10_000);
        assert_eq!(v.sign as f64, direct.signum());
        assert!((v.value() - direct).abs() <= 1e-12 * direct.abs().max(1e-300));
    }

    #[test]
    fn exact_zero_factor_short_circuits() {
        let prod = CosineProduct::new(0.5, FrequencySequence::Finite(vec![1.0, 0.5])).unwrap();
        let v = prod.evaluate(std::f64::consts::PI, 1e-6).unwrap();
        // cos(π) computes to exactly −1 so ½ + ½·cos(π) is exactly 0
        assert_eq!(v.sign, 0);
        assert_eq!(v.log_magnitude, f64::NEG_INFINITY);
        assert_eq!(v.value(), 0.0);
    }

    #[test]
    fn doubling_head_stays_within_bound() {
        let prod = cloitre_product(0.5, 1.2).unwrap();
        for &t in &[5.0, 250.0, 3000.0] {
            let v = prod.evaluate(t, 1e-9).unwrap();
            let w = prod.evaluate_with_head(t, 2 * v.terms_used).unwrap();
            let change = (v.log_magnitude - w.log_magnitude).abs();
            assert!(change <= v.truncation_bound + v.rounding_bound + w.rounding_bound);
        }
    }

    #[test]
    fn finite_chain_matches_explicit_product() {
        let c = CouplingModel::exponential(3.0).unwrap();
        let t = 0.8;
        let v = finite_chain_correlator(&c, 2, 6, t);
        let direct: f64 = [2i64, 1, 1, 2, 3]
            .iter()
            .map(|&d| (2.0 * 3f64.powi(-(d as i32)) * t).cos())
            .product();
        assert_abs_diff_eq!(v.value(), direct, epsilon = 1e-15);
    }

    #[test]
    fn scan_marks_failed_rows() {
        let target = ScanTarget::Cloitre { p: 0.5, s: 1.2 };
        let rows = sensitivity_scan(&target, &[1.0, 2.0], 0.1, 0.0).unwrap();
        assert!(rows.iter().all(|r| r.diff.is_err()));
        assert!(sensitivity_scan(&target, &[], 0.1, 1e-8).is_err());
        assert!(sensitivity_scan(&target, &[1.0], 0.0, 1e-8).is_err());
    }
}
