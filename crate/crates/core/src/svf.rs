//! The directed singular value function `Φ^t` of a rectangle and the
//! dimension threshold of power-law radii sequences.

use num_rational::Ratio;

use crate::group::Radii;
use crate::math::{ln, powf};
use crate::stats::CompensatedSum;
use crate::{Error, Result};

/// Exact rational threshold.
pub type Exact = Ratio<i128>;

/// Which piece of `Φ^t` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiBranch {
    /// `r1 <= r2`, `t ∈ [0, 2]`: `r2^t`.
    Thin02,
    /// `r1 <= r2`, `t ∈ [2, 4]`: `r1^{t-2} r2²`.
    Thin24,
    /// `r1 >= r2`, `t ∈ [0, 3]`: `r1^t`.
    Flat03,
    /// `r1 >= r2`, `t ∈ [3, 4]`: `r1^{6-t} r2^{2(t-3)}`.
    Flat34,
}

impl PhiBranch {
    pub fn select(thin: bool, t: f64) -> Self {
        match (thin, t) {
            (true, t) if t <= 2.0 => PhiBranch::Thin02,
            (true, _) => PhiBranch::Thin24,
            (false, t) if t <= 3.0 => PhiBranch::Flat03,
            (false, _) => PhiBranch::Flat34,
        }
    }

    /// The branch formula at `(r1, r2)`, whether or not the branch applies.
    pub fn eval(&self, t: f64, r1: f64, r2: f64) -> f64 {
        match self {
            PhiBranch::Thin02 => powf(r2, t),
            PhiBranch::Thin24 => powf(r1, t - 2.0) * r2 * r2,
            PhiBranch::Flat03 => powf(r1, t),
            PhiBranch::Flat34 => powf(r1, 6.0 - t) * powf(r2, 2.0 * (t - 3.0)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhiBranch::Thin02 => "thin_t02",
            PhiBranch::Thin24 => "thin_t24",
            PhiBranch::Flat03 => "flat_t03",
            PhiBranch::Flat34 => "flat_t34",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub t: f64,
    pub r: Radii,
    pub value: f64,
    pub branch: PhiBranch,
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && (0.0..=4.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "t",
            value: t,
            lo: 0.0,
            hi: 4.0,
        })
    }
}

/// `Φ^t(r)` for `t ∈ [0, 4]`.
pub fn phi(t: f64, r: &Radii) -> Result<PhiValue> {
    check_t(t)?;
    let (r1, r2) = (r.r1(), r.r2());
    let branch = PhiBranch::select(r.is_thin(), t);
    let value = branch.eval(t, r1, r2);
    Ok(PhiValue {
        t,
        r: *r,
        value,
        branch,
    })
}

/// Radii `r_n = (n^{-α}, n^{-β})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawSeq {
    alpha: f64,
    beta: f64,
}

impl PowerLawSeq {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0 {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::Precondition(
                "power-law exponents must be positive and finite",
            ))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Eventually `r1 <= r2`. Only the tail matters for convergence, so the
    /// classification uses the exponents rather than `n = 1`.
    pub fn is_thin(&self) -> bool {
        self.alpha >= self.beta
    }

    /// `r_n` for `n >= 1`.
    pub fn radii(&self, n: u64) -> Radii {
        let n = n.max(1) as f64;
        Radii::new(powf(n, -self.alpha), powf(n, -self.beta))
            .expect("power-law radii are positive for finite n")
    }
}

/// `e(t)` with `Φ^t(r_n) = n^{-e(t)}` in the asymptotic branch.
pub fn phi_exponent(t: f64, s: &PowerLawSeq) -> Result<f64> {
    check_t(t)?;
    let (a, b) = (s.alpha, s.beta);
    Ok(match PhiBranch::select(s.is_thin(), t) {
        PhiBranch::Thin02 => b * t,
        PhiBranch::Thin24 => a * (t - 2.0) + 2.0 * b,
        PhiBranch::Flat03 => a * t,
        PhiBranch::Flat34 => a * (6.0 - t) + 2.0 * b * (t - 3.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub value: f64,
    /// Present when both exponents are recognised as rationals and the
    /// bisection result agrees with the exact root to 1e-9.
    pub exact: Option<Exact>,
    /// The series diverges for every `t <= 4`.
    pub capped: bool,
}

const BISECTION_TOL: f64 = 1e-12;
const SNAP_TOL: f64 = 1e-9;
const MAX_DENOMINATOR: i128 = 1_000_000;

/// `min(4, inf{t : Σ Φ^t(r_n) < ∞}) = min(4, inf{t : e(t) > 1})`.
pub fn dimension_threshold(s: &PowerLawSeq) -> Threshold {
    let e = |t: f64| phi_exponent(t, s).expect("t in [0, 4]");
    if e(4.0) <= 1.0 {
        return Threshold {
            value: 4.0,
            exact: Some(Exact::from_integer(4)),
            capped: true,
        };
    }
    let (mut lo, mut hi) = (0.0_f64, 4.0_f64);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if e(mid) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let approx = hi;
    match exact_root(s, approx) {
        Some(x) => Threshold {
            value: ratio_to_f64(&x),
            exact: Some(x),
            capped: false,
        },
        None => Threshold {
            value: approx,
            exact: None,
            capped: false,
        },
    }
}

fn to_ratio(x: f64) -> Option<Exact> {
    let r = Exact::approximate_float(x)?;
    (r.denom().abs() <= MAX_DENOMINATOR && ratio_to_f64(&r) == x).then_some(r)
}

fn ratio_to_f64(r: &Exact) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Solve `e(t) = 1` exactly on each linear piece adjacent to `approx` and
/// keep the root that lies in its piece and agrees with `approx`.
fn exact_root(s: &PowerLawSeq, approx: f64) -> Option<Exact> {
    let a = to_ratio(s.alpha)?;
    let b = to_ratio(s.beta)?;
    let one = Exact::from_integer(1);
    let two = Exact::from_integer(2);
    let three = Exact::from_integer(3);
    let six = Exact::from_integer(6);
    let candidates: [(Option<Exact>, Exact, Exact); 2] = if s.is_thin() {
        [
            (Some(one / b), Exact::from_integer(0), two),
            (Some(two + (one - two * b) / a), two, Exact::from_integer(4)),
        ]
    } else {
        let slope = two * b - a;
        let flat_high =
            (slope != Exact::from_integer(0)).then(|| (one - six * a + six * b) / slope);
        [
            (Some(one / a), Exact::from_integer(0), three),
            (flat_high, three, Exact::from_integer(4)),
        ]
    };
    candidates.into_iter().find_map(|(root, lo, hi)| {
        let root = root?;
        let inside = root >= lo && root <= hi;
        (inside && (ratio_to_f64(&root) - approx).abs() <= SNAP_TOL).then_some(root)
    })
}

/// `Σ_{n=1}^{N} Φ^t(r_n)`, compensated.
pub fn series_partial_sum(t: f64, s: &PowerLawSeq, n_terms: u64) -> Result<f64> {
    check_t(t)?;
    if n_terms == 0 {
        return Err(Error::Precondition("series needs at least one term"));
    }
    let mut acc = CompensatedSum::new();
    for n in 1..=n_terms {
        acc.add(phi(t, &s.radii(n))?.value);
    }
    Ok(acc.value())
}

/// `-log Φ^t(r_n) / log n`, the empirical decay exponent at a single `n`.
pub fn empirical_exponent(t: f64, s: &PowerLawSeq, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("empirical exponent needs n >= 2"));
    }
    let v = phi(t, &s.radii(n))?.value;
    Ok(-ln(v) / ln(n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn r(a: f64, b: f64) -> Radii {
        Radii::new(a, b).unwrap()
    }

    #[test]
    fn phi_examples() {
        let v = phi(2.0, &r(0.1, 0.5)).unwrap();
        assert_relative_eq!(v.value, 0.25, max_relative = 1e-15);
        assert_eq!(v.branch, PhiBranch::Thin02);
        let v = phi(4.0, &r(0.5, 0.1)).unwrap();
        assert_relative_eq!(v.value, 2.5e-3, max_relative = 1e-14);
        assert_eq!(v.branch, PhiBranch::Flat34);
        for t in [0.0, 0.7, 2.0, 2.9, 3.0, 3.4, 4.0] {
            assert_relative_eq!(
                phi(t, &r(0.3, 0.3)).unwrap().value,
                0.3f64.powf(t),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn phi_domain() {
        assert!(phi(-0.1, &r(1.0, 1.0)).is_err());
        assert!(phi(4.1, &r(1.0, 1.0)).is_err());
        assert!(phi(f64::NAN, &r(1.0, 1.0)).is_err());
    }

    #[test]
    fn phi_four_is_area_product_both_branches() {
        for rr in [r(0.2, 0.7), r(0.7, 0.2)] {
            let v = phi(4.0, &rr).unwrap().value;
            assert_relative_eq!(v, rr.r1().powi(2) * rr.r2().powi(2), max_relative = 1e-14);
        }
    }

    #[test]
    fn exponent_examples() {
        let e = |a, b, t| phi_exponent(t, &PowerLawSeq::new(a, b).unwrap()).unwrap();
        assert_relative_eq!(e(0.5, 0.5, 3.0), 1.5);
        assert_relative_eq!(e(0.25, 1.0, 3.5), 1.625);
        assert_relative_eq!(e(1.0, 0.5, 1.0), 0.5);
    }

    #[test]
    fn exponent_matches_phi_of_radii() {
        for (a, b) in [(0.25, 1.0), (1.0, 0.5), (0.5, 0.5), (0.3, 0.4)] {
            let s = PowerLawSeq::new(a, b).unwrap();
            for t in [0.3, 1.9, 2.5, 3.3, 3.9] {
                let n = 1_000_000;
                let got = empirical_exponent(t, &s, n).unwrap();
                assert_relative_eq!(got, phi_exponent(t, &s).unwrap(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn threshold_examples() {
        let th = dimension_threshold(&PowerLawSeq::new(0.5, 0.5).unwrap());
        assert_eq!(th.value, 2.0);
        assert_eq!(th.exact, Some(Exact::from_integer(2)));

        let th = dimension_threshold(&PowerLawSeq::new(0.25, 1.0).unwrap());
        assert_eq!(th.exact, Some(Exact::new(22, 7)));
        assert_relative_eq!(th.value, 22.0 / 7.0, epsilon = 1e-15);

        let th = dimension_threshold(&PowerLawSeq::new(0.125, 0.125).unwrap());
        assert_eq!(th.value, 4.0);
        assert!(th.capped);
    }

    #[test]
    fn threshold_without_rationals() {
        let s = PowerLawSeq::new(core::f64::consts::FRAC_1_PI, 1.0).unwrap();
        let th = dimension_threshold(&s);
        assert!(th.exact.is_none());
        let e = |t| phi_exponent(t, &s).unwrap();
        assert!((e(th.value) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partial_sums() {
        let s = PowerLawSeq::new(0.5, 0.5).unwrap();
        assert_eq!(series_partial_sum(0.0, &s, 1234).unwrap(), 1234.0);
        // Below the threshold the partial sums keep growing.
        let small = series_partial_sum(1.5, &s, 1_000).unwrap();
        let big = series_partial_sum(1.5, &s, 1_000_000).unwrap();
        assert!(big >= 2.0 * small);
        // Above it they settle: for r_n = (1/n, 1/n) and t = 3 the terms are
        // n^{-3} and the N..2N tail is about 3/(8N²).
        let fast = PowerLawSeq::new(1.0, 1.0).unwrap();
        let a = series_partial_sum(3.0, &fast, 10_000).unwrap();
        let b = series_partial_sum(3.0, &fast, 20_000).unwrap();
        assert!(b > a && b - a < 1e-6);
        assert!(series_partial_sum(1.0, &s, 0).is_err());
    }
}
