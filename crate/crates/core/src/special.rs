//! Hurwitz zeta function with a remainder bound, used for power-law tails.

/// Bernoulli numbers B_2, B_4, ..., B_24.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// `value ± bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded {
    pub value: f64,
    pub bound: f64,
}

/// Σ_{n≥0} (q+n)^{-a} for a > 1, q > 0, by Euler–Maclaurin summation.
///
/// The bound covers the first omitted Euler–Maclaurin term (the remainder of
/// this completely monotone summand never exceeds it) plus summation rounding.
pub fn hurwitz_zeta(a: f64, q: f64) -> Bounded {
    assert!(a > 1.0 && q > 0.0, "hurwitz_zeta needs a > 1, q > 0");
    let terms = BERNOULLI_EVEN.len() - 1;
    let shift_to = (a + 24.0).max(24.0);
    let direct = if q < shift_to {
        (shift_to - q).ceil() as usize
    } else {
        0
    };
    let mut head = 0.0;
    for n in 0..direct {
        head += (q + n as f64).powf(-a);
    }
    let big_q = q + direct as f64;
    let q_pow = big_q.powf(-a);
    let mut value = head + big_q * q_pow / (a - 1.0) + 0.5 * q_pow;

    // Running factor: a(a+1)...(a+2j-2) / (2j)! * Q^{-a-2j+1}
    let mut factor = q_pow / big_q * a / 2.0;
    let mut last = 0.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b * factor;
        if j == terms {
            last = term.abs();
            break;
        }
        value += term;
        let k = 2.0 * (j as f64 + 1.0);
        factor *= (a + k - 1.0) * (a + k) / ((k + 1.0) * (k + 2.0)) / (big_q * big_q);
    }
    let rounding = 4.0 * f64::EPSILON * (direct as f64 + 8.0) * value.abs();
    Bounded {
        value,
        bound: last + rounding,
    }
}

/// Riemann zeta for s > 1.
pub fn riemann_zeta(s: f64) -> Bounded {
    hurwitz_zeta(s, 1.0)
}
