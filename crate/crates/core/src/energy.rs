//! Riesz `t`-energies of uniform measures on rectangles and balls, the
//! closed-form energy bounds for rectangles, and capacity lower bounds.
//!
//! The energy of Lebesgue measure restricted to a set `S` is
//! `I_t(S) = ∫_S ∫_S d(p, q)^{-t} dq dp`. Plain pair sampling
//! (`p, q` uniform on `S`) has infinite variance once `t >= 2`, because
//! `d^{-2t}` is not integrable against 4-dimensional volume. The default
//! estimator therefore draws the second point from a defensive mixture:
//! with probability `w` uniformly on `S`, otherwise as `q = p·h` with `h`
//! distributed on the ball `B(0, D)` with density proportional to `‖h‖^{-t}`.
//! The importance weight of every pair is bounded, so the sample variance is
//! finite for all `t < 4`. Setting `w = 1` recovers plain pair sampling.

use rand::Rng;

use crate::exec::{map_chunks, CHUNK};
use crate::group::{
    ball_volume, contains_at_origin, sample_ball, sample_rect_at_origin, HeisPoint, Radii,
    BALL_VOLUME_CONSTANT,
};
use crate::math::{powf, sqrt};
use crate::rng::{SeedStream, StreamRng};
use crate::stats::Moments;
use crate::{Error, Result};

pub const MIN_PAIRS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_pairs: u64,
    pub t: f64,
    pub seed: u64,
    /// Pairs redrawn because they coincided in floating point.
    pub resampled: u64,
}

impl EnergyEstimate {
    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.value
    }
}

/// How the second point of each pair is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSampling {
    /// Both points uniform on the set.
    Uniform,
    /// Defensive mixture: uniform with probability `uniform_weight`, otherwise
    /// `q = p·h` with `h` drawn from `‖h‖^{-t}` on one of the balls
    /// `B(0, D 4^{-j})`, `j = 0..=J`, chosen with equal probability. `D` is the
    /// set's diameter bound and `D 4^{-J}` the first radius below the set's
    /// smallest length scale, so thin and flat sets get kernels at their own
    /// scale.
    KernelMixture { uniform_weight: f64 },
}

impl Default for PairSampling {
    fn default() -> Self {
        PairSampling::KernelMixture {
            uniform_weight: 0.5,
        }
    }
}

const KERNEL_SCALE_STEP: f64 = 0.25;
const MAX_KERNELS: usize = 16;

/// A set centred at the origin that can be sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyDomain {
    Rect(Radii),
    Ball(f64),
}

impl EnergyDomain {
    pub fn volume(&self) -> f64 {
        match self {
            EnergyDomain::Rect(r) => r.rect_volume(),
            EnergyDomain::Ball(rho) => ball_volume(*rho),
        }
    }

    pub fn diameter_bound(&self) -> f64 {
        match self {
            EnergyDomain::Rect(r) => r.diameter_bound(),
            EnergyDomain::Ball(rho) => 2.0 * rho,
        }
    }

    /// Smallest length scale of the set.
    pub fn min_scale(&self) -> f64 {
        match self {
            EnergyDomain::Rect(r) => r.min(),
            EnergyDomain::Ball(rho) => *rho,
        }
    }

    fn kernel_radii(&self) -> ([f64; MAX_KERNELS], usize) {
        let mut radii = [0.0; MAX_KERNELS];
        let mut d = self.diameter_bound();
        let mut n = 0;
        while n < MAX_KERNELS {
            radii[n] = d;
            n += 1;
            if d < self.min_scale() {
                break;
            }
            d *= KERNEL_SCALE_STEP;
        }
        (radii, n)
    }

    fn contains(&self, p: &HeisPoint) -> bool {
        match self {
            EnergyDomain::Rect(r) => contains_at_origin(r, p),
            EnergyDomain::Ball(rho) => p.gauge_norm() <= *rho,
        }
    }

    fn sample(&self, rng: &mut StreamRng) -> HeisPoint {
        match self {
            EnergyDomain::Rect(r) => sample_rect_at_origin(r, rng),
            EnergyDomain::Ball(rho) => sample_ball(&HeisPoint::ORIGIN, *rho, rng).point,
        }
    }
}

/// `∫_{B(0, D)} ‖h‖^{-t} dh = κ · 4/(4 - t) · D^{4-t}`, `κ = λ(B(0, 1))`.
pub fn kernel_ball_mass(t: f64, radius: f64) -> f64 {
    BALL_VOLUME_CONSTANT * 4.0 / (4.0 - t) * powf(radius, 4.0 - t)
}

/// Draw `h` with density `‖h‖^{-t} / kernel_ball_mass(t, D)` on `B(0, D)`.
///
/// A uniform point `u` of the unit ball splits as `‖u‖` (density `4s³`) and
/// an independent direction `δ_{1/‖u‖} u`. Replacing the radius by one with
/// density proportional to `s^{3-t}` on `[0, D]` gives the target.
pub fn sample_kernel<R: Rng + ?Sized>(t: f64, radius: f64, rng: &mut R) -> HeisPoint {
    let u = sample_ball(&HeisPoint::ORIGIN, 1.0, rng).point;
    let norm = u.gauge_norm();
    let v: f64 = rng.random();
    let s = radius * powf(1.0 - v, 1.0 / (4.0 - t));
    if norm == 0.0 {
        return HeisPoint::ORIGIN;
    }
    u.dilate(s / norm)
}

fn check_open_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 && t < 4.0 {
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

/// Monte Carlo estimate of `I_t` for Lebesgue measure on `domain`.
pub fn riesz_energy(
    domain: &EnergyDomain,
    t: f64,
    n_pairs: u64,
    sampling: PairSampling,
    stream: SeedStream,
) -> Result<EnergyEstimate> {
    check_open_t(t)?;
    if n_pairs < MIN_PAIRS {
        return Err(Error::Precondition(
            "energy estimates need at least 1000 pairs",
        ));
    }
    let volume = domain.volume();
    let w = match sampling {
        PairSampling::Uniform => 1.0,
        PairSampling::KernelMixture { uniform_weight } => {
            if !(uniform_weight > 0.0 && uniform_weight < 1.0) {
                return Err(Error::Precondition(
                    "mixture needs uniform weight in (0, 1)",
                ));
            }
            uniform_weight
        }
    };
    let (radii, n_kernels) = if w < 1.0 {
        domain.kernel_radii()
    } else {
        ([0.0; MAX_KERNELS], 0)
    };
    let radii = &radii[..n_kernels];
    // Mixture density of q given p, divided by d^{-t}, is
    // (w/V) d^t + Σ_{j : d <= D_j} share_j.
    let mut shares = [0.0; MAX_KERNELS];
    for (j, &rad) in radii.iter().enumerate() {
        shares[j] = (1.0 - w) / n_kernels as f64 / kernel_ball_mass(t, rad);
    }
    let uniform_density = w / volume;

    let parts = map_chunks(n_pairs as usize, CHUNK, |c, range| {
        let mut rng = stream.child(c as u64).rng();
        let mut m = Moments::default();
        let mut resampled = 0u64;
        for _ in range {
            loop {
                let p = domain.sample(&mut rng);
                let u: f64 = rng.random();
                let q = if u < w {
                    domain.sample(&mut rng)
                } else {
                    let j = (((u - w) / (1.0 - w)) * n_kernels as f64) as usize;
                    p.mul(&sample_kernel(t, radii[j.min(n_kernels - 1)], &mut rng))
                };
                if !domain.contains(&q) {
                    m.push(0.0);
                    break;
                }
                let d = p.dist(&q);
                if d == 0.0 {
                    resampled += 1;
                    continue;
                }
                let mut denom = uniform_density * powf(d, t);
                for (rad, share) in radii.iter().zip(&shares) {
                    if d <= *rad {
                        denom += share;
                    }
                }
                m.push(1.0 / denom);
                break;
            }
        }
        (m, resampled)
    });
    let moments: alloc::vec::Vec<Moments> = parts.iter().map(|p| p.0).collect();
    let total = Moments::tree_merge(&moments);
    Ok(EnergyEstimate {
        value: volume * total.mean,
        stderr: volume * total.stderr(),
        n_pairs,
        t,
        seed: stream.seed,
        resampled: parts.iter().map(|p| p.1).sum(),
    })
}

/// `I_t` of Lebesgue measure on `R(0, r)`.
pub fn riesz_energy_rect(
    r: &Radii,
    t: f64,
    n_pairs: u64,
    stream: SeedStream,
) -> Result<EnergyEstimate> {
    riesz_energy(
        &EnergyDomain::Rect(*r),
        t,
        n_pairs,
        PairSampling::default(),
        stream,
    )
}

/// `I_t` of Lebesgue measure on `B(0, ρ)`.
pub fn riesz_energy_ball(
    rho: f64,
    t: f64,
    n_pairs: u64,
    stream: SeedStream,
) -> Result<EnergyEstimate> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Precondition(
            "ball radius must be positive and finite",
        ));
    }
    riesz_energy(
        &EnergyDomain::Ball(rho),
        t,
        n_pairs,
        PairSampling::default(),
        stream,
    )
}

/// Upper bound for `I_t(B(x, ρ))`: for each `p`, the inner integral over a
/// set of volume `λ(B)` is largest for the ball centred at `p`, so
/// `I_t(B) <= λ(B) · κ · 4/(4 - t) · ρ^{4-t}`.
pub fn ball_energy_upper_bound(rho: f64, t: f64) -> f64 {
    ball_volume(rho) * kernel_ball_mass(t, rho)
}

/// Which closed form bounds the energy of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyCase {
    /// `r1 <= r2`, `t ∈ (0, 2)`: `r1⁴ r2^{4-t}`.
    ThinLow,
    /// `r1 <= r2`, `t ∈ (2, 4)`: `r1^{6-t} r2²`.
    ThinHigh,
    /// `r1 >= r2`, `t ∈ (0, 3) \ {1}`: `r1^{4-t} r2⁴`.
    FlatLow,
    /// `r1 >= r2`, `t ∈ (3, 4)`: `r1^{t-2} r2^{2(5-t)}`.
    FlatHigh,
}

impl EnergyCase {
    pub fn name(&self) -> &'static str {
        match self {
            EnergyCase::ThinLow => "thin_low",
            EnergyCase::ThinHigh => "thin_high",
            EnergyCase::FlatLow => "flat_low",
            EnergyCase::FlatHigh => "flat_high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBound {
    pub t: f64,
    pub r: Radii,
    pub bound: f64,
    pub case: EnergyCase,
}

/// Closed-form order of magnitude of `I_t(R(0, r))`, up to a constant
/// depending on `t`. Undefined at `t ∈ {1, 2, 3}`.
pub fn energy_bound_rect(t: f64, r: &Radii) -> Result<EnergyBound> {
    check_open_t(t)?;
    if t == 1.0 || t == 2.0 || t == 3.0 {
        return Err(Error::ExcludedExponent { t });
    }
    let (r1, r2) = (r.r1(), r.r2());
    let (case, bound) = if r.is_thin() {
        if t < 2.0 {
            (EnergyCase::ThinLow, powf(r1, 4.0) * powf(r2, 4.0 - t))
        } else {
            (EnergyCase::ThinHigh, powf(r1, 6.0 - t) * r2 * r2)
        }
    } else if t < 3.0 {
        (EnergyCase::FlatLow, powf(r1, 4.0 - t) * powf(r2, 4.0))
    } else {
        (
            EnergyCase::FlatHigh,
            powf(r1, t - 2.0) * powf(r2, 2.0 * (5.0 - t)),
        )
    };
    Ok(EnergyBound {
        t,
        r: *r,
        bound,
        case,
    })
}

/// `λ(R)² / I_t`: the capacity of `R(0, r)` is at least this, using the
/// normalised uniform measure as test measure.
pub fn capacity_lower_bound(r: &Radii, e: &EnergyEstimate) -> Result<f64> {
    if e.value.is_nan() || e.value <= 0.0 {
        return Err(Error::Precondition("energy estimate must be positive"));
    }
    let v = r.rect_volume();
    Ok(v * v / e.value)
}

/// `f_ρ(x, y, z) = max(|x|, |y|, |z - 2ρy|^{1/2})`.
pub fn box_kernel(rho: f64, q: &HeisPoint) -> f64 {
    q.x()
        .abs()
        .max(q.y().abs())
        .max(sqrt((q.z() - 2.0 * rho * q.y()).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparability {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Extremes of `d(p, q) / f_ρ(q - p)` (Euclidean difference) for
/// `p = (ρ, 0, z0)` and `q` uniform in the box
/// `p + [-2, 2] × [-2, 2] × [-2, 2]` (the `r = (1, 1)` probe).
pub fn kernel_comparability(
    rho: f64,
    z0: f64,
    n_samples: u64,
    stream: SeedStream,
) -> Result<Comparability> {
    if n_samples < 1_000 {
        return Err(Error::Precondition(
            "kernel comparability needs at least 1000 samples",
        ));
    }
    let p = HeisPoint::new(rho, 0.0, z0)?;
    let (half_xy, half_z) = (2.0, 2.0);
    let parts = map_chunks(n_samples as usize, CHUNK, |c, range| {
        let mut rng = stream.child(c as u64).rng();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for _ in range {
            let (dx, dy, dz) = loop {
                let dx = half_xy * (2.0 * rng.random::<f64>() - 1.0);
                let dy = half_xy * (2.0 * rng.random::<f64>() - 1.0);
                let dz = half_z * (2.0 * rng.random::<f64>() - 1.0);
                if dx != 0.0 || dy != 0.0 || dz != 0.0 {
                    break (dx, dy, dz);
                }
            };
            let q = HeisPoint::raw(rho + dx, dy, z0 + dz);
            let ratio = p.dist(&q) / box_kernel(rho, &HeisPoint::raw(dx, dy, dz));
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        (lo, hi)
    });
    let (min_ratio, max_ratio) = parts
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    Ok(Comparability {
        min_ratio,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn r(a: f64, b: f64) -> Radii {
        Radii::new(a, b).unwrap()
    }

    #[test]
    fn bound_examples() {
        let b = energy_bound_rect(0.5, &r(0.1, 1.0)).unwrap();
        assert_eq!(b.case, EnergyCase::ThinLow);
        assert_relative_eq!(b.bound, 1e-4, max_relative = 1e-12);
        let b = energy_bound_rect(3.5, &r(1.0, 0.1)).unwrap();
        assert_eq!(b.case, EnergyCase::FlatHigh);
        assert_relative_eq!(b.bound, 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn bound_diagonal_agreement() {
        let c = 0.37;
        for t in [0.3, 1.5, 2.5, 3.5] {
            let thin = energy_bound_rect(t, &r(c, c)).unwrap().bound;
            // The flat formulas evaluated directly at r1 = r2 = c.
            let flat = if t < 3.0 {
                c.powf(4.0 - t) * c.powf(4.0)
            } else {
                c.powf(t - 2.0) * c.powf(2.0 * (5.0 - t))
            };
            assert_relative_eq!(thin, c.powf(8.0 - t), max_relative = 1e-12);
            assert_relative_eq!(flat, c.powf(8.0 - t), max_relative = 1e-12);
        }
    }

    #[test]
    fn excluded_exponents() {
        for t in [1.0, 2.0, 3.0] {
            assert_eq!(
                energy_bound_rect(t, &r(1.0, 1.0)),
                Err(Error::ExcludedExponent { t })
            );
        }
        assert!(energy_bound_rect(0.0, &r(1.0, 1.0)).is_err());
        assert!(energy_bound_rect(4.0, &r(1.0, 1.0)).is_err());
    }

    #[test]
    fn box_kernel_examples() {
        assert_eq!(box_kernel(0.0, &HeisPoint::raw(0.0, 0.0, 4.0)), 2.0);
        assert_eq!(box_kernel(1.0, &HeisPoint::raw(0.0, 1.0, 2.0)), 1.0);
        assert_eq!(box_kernel(0.7, &HeisPoint::ORIGIN), 0.0);
    }

    #[test]
    fn comparability_bracket() {
        for (i, rho) in [0.0, 0.5, 1.0].into_iter().enumerate() {
            for (j, z0) in [0.0, 0.5].into_iter().enumerate() {
                let c =
                    kernel_comparability(rho, z0, 10_000, SeedStream::new(8, (i * 2 + j) as u64))
                        .unwrap();
                assert!(c.min_ratio >= 0.5 && c.max_ratio <= 2.0, "{c:?}");
                // max(a, b, c) <= ((a² + b²)² + c⁴)^{1/4} <= 5^{1/4} max(a, b, c)
                assert!(c.min_ratio >= 1.0 - 1e-12 && c.max_ratio <= 5f64.powf(0.25) + 1e-12);
            }
        }
    }

    #[test]
    fn comparability_on_the_horizontal_line() {
        // y = 0, z = z0: both sides reduce to |x - ρ|.
        let p = HeisPoint::raw(0.5, 0.0, 0.25);
        let q = HeisPoint::raw(1.75, 0.0, 0.25);
        let f = box_kernel(0.5, &HeisPoint::raw(1.25, 0.0, 0.0));
        assert_relative_eq!(p.dist(&q), f, max_relative = 1e-15);
    }

    #[test]
    fn kernel_sampler_radial_law() {
        // P(‖h‖ <= a) = (a/D)^{4-t}.
        let (t, d) = (2.5, 2.0);
        let mut rng = SeedStream::new(4, 4).rng();
        let n = 100_000;
        let a = 0.5;
        let inside = (0..n)
            .filter(|_| sample_kernel(t, d, &mut rng).gauge_norm() <= a)
            .count() as f64
            / n as f64;
        let expected = (a / d).powf(4.0 - t);
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!(
            (inside - expected).abs() < 4.0 * se,
            "{inside} vs {expected}"
        );
    }

    #[test]
    fn mixture_agrees_with_plain_pairs_at_small_t() {
        let dom = EnergyDomain::Rect(r(0.5, 0.8));
        let plain = riesz_energy(
            &dom,
            0.5,
            200_000,
            PairSampling::Uniform,
            SeedStream::new(1, 0),
        )
        .unwrap();
        let mix = riesz_energy(
            &dom,
            0.5,
            200_000,
            PairSampling::default(),
            SeedStream::new(1, 1),
        )
        .unwrap();
        let se = (plain.stderr.powi(2) + mix.stderr.powi(2)).sqrt();
        assert!(
            (plain.value - mix.value).abs() < 4.0 * se,
            "{plain:?} {mix:?}"
        );
    }

    #[test]
    fn near_zero_t_gives_volume_squared() {
        let rr = r(0.6, 0.9);
        let e = riesz_energy_rect(&rr, 0.01, 50_000, SeedStream::new(2, 0)).unwrap();
        let v2 = rr.rect_volume().powi(2);
        // The kernel is d^{-0.01}, within a couple of percent of 1 on this set.
        assert!((e.value / v2 - 1.0).abs() < 0.05, "{}", e.value / v2);
        let b = riesz_energy_ball(0.7, 0.01, 50_000, SeedStream::new(2, 1)).unwrap();
        assert!((b.value / ball_volume(0.7).powi(2) - 1.0).abs() < 0.05);
    }

    #[test]
    fn ball_energy_below_rearrangement_bound() {
        for t in [0.5, 2.5, 3.5] {
            let e = riesz_energy_ball(1.0, t, 100_000, SeedStream::new(3, 0)).unwrap();
            assert!(e.value <= ball_energy_upper_bound(1.0, t) + 3.0 * e.stderr);
        }
    }

    #[test]
    fn seed_determinism() {
        let a = riesz_energy_rect(&r(0.3, 0.5), 2.5, 10_000, SeedStream::new(99, 3)).unwrap();
        let b = riesz_energy_rect(&r(0.3, 0.5), 2.5, 10_000, SeedStream::new(99, 3)).unwrap();
        assert_eq!(a, b);
        let c = riesz_energy_rect(&r(0.3, 0.5), 2.5, 10_000, SeedStream::new(100, 3)).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn domain_errors() {
        let rr = r(1.0, 1.0);
        assert!(riesz_energy_rect(&rr, 0.0, 10_000, SeedStream::new(0, 0)).is_err());
        assert!(riesz_energy_rect(&rr, 4.0, 10_000, SeedStream::new(0, 0)).is_err());
        assert!(riesz_energy_rect(&rr, 1.0, 10, SeedStream::new(0, 0)).is_err());
        assert!(riesz_energy_ball(0.0, 1.0, 10_000, SeedStream::new(0, 0)).is_err());
    }

    #[test]
    fn capacity_of_isotropic_rect_scales_like_phi() {
        let t = 0.5;
        let mut caps = alloc::vec::Vec::new();
        for (i, c) in [0.25, 0.5, 1.0].into_iter().enumerate() {
            let rr = r(c, c);
            let e = riesz_energy_rect(&rr, t, 100_000, SeedStream::new(6, i as u64)).unwrap();
            caps.push(capacity_lower_bound(&rr, &e).unwrap() / c.powf(t));
        }
        for w in caps.windows(2) {
            assert!((w[0] / w[1] - 1.0).abs() < 0.05, "{caps:?}");
        }
    }
}
