//! Explicit covers of `R(0, r)` by metric balls, and the Hausdorff content
//! upper estimates they give.
//!
//! Three constructions:
//! - trivial: one ball containing the whole rectangle;
//! - segment net (thin rectangles, `r1 <= r2`): balls of radius `2 r1`
//!   centred at `(0, 0, k r1²)`, `|k| <= ⌊r2²/r1²⌋`;
//! - annulus cover (flat rectangles, `r1 >= r2`): the central rectangle
//!   `R(0, (r2, r2))` by a segment net, plus for `ρ_k = r2 √k`,
//!   `k = 1..⌈(r1/r2)²⌉`, a net of the circle of radius `ρ_k` with angular step
//!   `ε²/2ρ²`, `ε = r2²/ρ_k`, and balls of radius `3 r2²/ρ_k`.
//!
//! Covers are stored by part (a ball, a vertical segment net, a circle net)
//! rather than as explicit ball lists; a flat rectangle with aspect ratio 64
//! needs on the order of 10^11 balls. Every query below gives the same answer
//! as iterating over [`Cover::elements`].

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::exec::{map_chunks, CHUNK};
use crate::group::{sample_rect_at_origin, HeisPoint, HeisRect, Radii};
use crate::math::{asin, atan2, ceil, floor, powf, round, sin_cos, sqrt};
use crate::rng::SeedStream;
use crate::stats::CompensatedSum;
use crate::{Error, Result};

/// Relative guard applied before `floor`/`ceil` of ratios of radii.
const ROUNDING_GUARD: f64 = 1e-12;
/// Relative slack when testing membership in a closed ball.
const COVER_SLACK: f64 = 1e-12;

fn floor_guarded(x: f64) -> f64 {
    floor(x * (1.0 + ROUNDING_GUARD))
}

fn ceil_guarded(x: f64) -> f64 {
    ceil(x * (1.0 - ROUNDING_GUARD))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    Trivial,
    SegmentNet,
    Annulus,
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::Trivial => "trivial",
            Construction::SegmentNet => "segment_net",
            Construction::Annulus => "annulus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverElement {
    pub center: HeisPoint,
    pub radius: f64,
    /// `2 · radius`, an upper bound for the diameter of the ball.
    pub diameter_bound: f64,
}

impl CoverElement {
    fn new(center: HeisPoint, radius: f64) -> Self {
        Self {
            center,
            radius,
            diameter_bound: 2.0 * radius,
        }
    }
}

/// A family of equal-radius balls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverPart {
    Ball {
        center: HeisPoint,
        radius: f64,
    },
    /// Centres `(0, 0, k·step)` for `k = -half..=half`.
    Segment {
        step: f64,
        half: u64,
        radius: f64,
    },
    /// Centres `ρ(cos kθ, sin kθ, 0)` for `k = 0..count`, `θ = angle_step`.
    Ring {
        rho: f64,
        angle_step: f64,
        count: u64,
        radius: f64,
    },
}

impl CoverPart {
    pub fn len(&self) -> u64 {
        match *self {
            CoverPart::Ball { .. } => 1,
            CoverPart::Segment { half, .. } => 2 * half + 1,
            CoverPart::Ring { count, .. } => count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radius(&self) -> f64 {
        match *self {
            CoverPart::Ball { radius, .. }
            | CoverPart::Segment { radius, .. }
            | CoverPart::Ring { radius, .. } => radius,
        }
    }

    pub fn center(&self, i: u64) -> HeisPoint {
        match *self {
            CoverPart::Ball { center, .. } => center,
            CoverPart::Segment { step, half, .. } => {
                HeisPoint::raw(0.0, 0.0, (i as f64 - half as f64) * step)
            }
            CoverPart::Ring {
                rho, angle_step, ..
            } => ring_point(rho, i as f64 * angle_step),
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = CoverElement> + '_ {
        (0..self.len()).map(move |i| CoverElement::new(self.center(i), self.radius()))
    }

    /// Distance from `p` to the nearest centre of this part, over the
    /// candidates that can attain it (see the module docs for rings).
    pub fn nearest(&self, p: &HeisPoint) -> f64 {
        match *self {
            CoverPart::Ball { center, .. } => center.dist(p),
            CoverPart::Segment { step, half, .. } => {
                let k = round(p.z() / step).clamp(-(half as f64), half as f64);
                HeisPoint::raw(0.0, 0.0, k * step).dist(p)
            }
            CoverPart::Ring {
                rho,
                angle_step,
                count,
                ..
            } => ring_nearest(rho, angle_step, count, p),
        }
    }
}

fn ring_point(rho: f64, angle: f64) -> HeisPoint {
    let (s, c) = sin_cos(angle);
    HeisPoint::raw(rho * c, rho * s, 0.0)
}

/// Candidate angles: the polar angle `θ` of `p`, and `φ* = θ - asin(z/2ρs)`,
/// where the circle point `c` has `c⁻¹p` horizontal. The nearest net point to
/// `φ*` is within the net spacing of the circle point closest to `p` used in
/// the density argument; a few neighbours on each side are checked.
fn ring_nearest(rho: f64, angle_step: f64, count: u64, p: &HeisPoint) -> f64 {
    const WINDOW: i64 = 3;
    let s = libm::hypot(p.x(), p.y());
    let theta = atan2(p.y(), p.x());
    let shift = if s > 0.0 {
        asin((p.z() / (2.0 * rho * s)).clamp(-1.0, 1.0))
    } else {
        0.0
    };
    let n = count as i64;
    let mut best = f64::INFINITY;
    for angle in [theta, theta - shift] {
        let a = angle - 2.0 * PI * floor(angle / (2.0 * PI));
        let k0 = round(a / angle_step) as i64;
        for dk in -WINDOW..=WINDOW {
            let k = (k0 + dk).rem_euclid(n);
            let d = ring_point(rho, k as f64 * angle_step).dist(p);
            best = best.min(d);
        }
        // The last net point sits just short of 2π; the wrap gap is checked
        // explicitly.
        best = best.min(ring_point(rho, 0.0).dist(p));
        best = best.min(ring_point(rho, (n - 1) as f64 * angle_step).dist(p));
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    parts: Vec<CoverPart>,
    target: HeisRect,
    /// Every target point is claimed to lie within this distance of a centre.
    /// Equal to the common radius for single-radius covers; for annulus covers
    /// the largest ring radius.
    density_claim: f64,
    construction: Construction,
    /// Ring radii in increasing order, with the index of the part.
    rings: Vec<(f64, usize)>,
    max_ring_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointQuery {
    /// Distance to the nearest centre.
    pub gap: f64,
    /// Inside at least one element ball.
    pub covered: bool,
}

impl PointQuery {
    fn visit(&mut self, part: &CoverPart, p: &HeisPoint) {
        let d = part.nearest(p);
        self.gap = self.gap.min(d);
        self.covered |= d <= part.radius() * (1.0 + COVER_SLACK);
    }
}

impl Cover {
    fn new(
        parts: Vec<CoverPart>,
        target: HeisRect,
        density_claim: f64,
        construction: Construction,
    ) -> Self {
        let mut rings: Vec<(f64, usize)> = parts
            .iter()
            .enumerate()
            .filter_map(|(i, p)| match *p {
                CoverPart::Ring { rho, .. } => Some((rho, i)),
                _ => None,
            })
            .collect();
        rings.sort_by(|a, b| a.0.total_cmp(&b.0));
        let max_ring_radius = rings
            .iter()
            .map(|&(_, i)| parts[i].radius())
            .fold(0.0, f64::max);
        Self {
            parts,
            target,
            density_claim,
            construction,
            rings,
            max_ring_radius,
        }
    }

    pub fn parts(&self) -> &[CoverPart] {
        &self.parts
    }
    pub fn target(&self) -> &HeisRect {
        &self.target
    }
    pub fn density_claim(&self) -> f64 {
        self.density_claim
    }
    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn element_count(&self) -> u64 {
        self.parts.iter().map(CoverPart::len).sum()
    }

    pub fn elements(&self) -> impl Iterator<Item = CoverElement> + '_ {
        self.parts.iter().flat_map(CoverPart::elements)
    }

    pub fn min_radius(&self) -> f64 {
        self.parts
            .iter()
            .map(CoverPart::radius)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.parts.iter().map(CoverPart::radius).fold(0.0, f64::max)
    }

    /// `Σ |C|^t` over the elements, using `2·radius` for `|C|`.
    pub fn content(&self, t: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for part in &self.parts {
            acc.add(part.len() as f64 * powf(2.0 * part.radius(), t));
        }
        acc.value()
    }

    pub fn query(&self, p: &HeisPoint) -> PointQuery {
        let mut acc = PointQuery {
            gap: f64::INFINITY,
            covered: false,
        };
        for part in self
            .parts
            .iter()
            .filter(|p| !matches!(p, CoverPart::Ring { .. }))
        {
            acc.visit(part, p);
        }
        if !self.rings.is_empty() {
            // A ring at planar distance |s - ρ| from p is at least that far in
            // the metric, so only rings inside this window can matter.
            let s = libm::hypot(p.x(), p.y());
            let reach = acc.gap.max(self.max_ring_radius);
            let lo = self.rings.partition_point(|&(rho, _)| rho < s - reach);
            let hi = self.rings.partition_point(|&(rho, _)| rho <= s + reach);
            for &(_, i) in &self.rings[lo..hi] {
                acc.visit(&self.parts[i], p);
            }
        }
        acc
    }

    /// Brute-force version of [`Cover::query`] for small covers.
    pub fn query_exhaustive(&self, p: &HeisPoint) -> PointQuery {
        let mut gap = f64::INFINITY;
        let mut covered = false;
        for e in self.elements() {
            let d = e.center.dist(p);
            gap = gap.min(d);
            covered |= d <= e.radius * (1.0 + COVER_SLACK);
        }
        PointQuery { gap, covered }
    }
}

/// One ball centred at the origin with radius `2^{5/4} max(r1, r2)`.
pub fn trivial_cover(r: &Radii) -> Cover {
    let radius = r.diameter_bound();
    Cover::new(
        alloc::vec![CoverPart::Ball {
            center: HeisPoint::ORIGIN,
            radius
        }],
        HeisRect::at_origin(*r),
        radius,
        Construction::Trivial,
    )
}

fn segment_part(r: &Radii) -> CoverPart {
    let (r1, r2) = (r.r1(), r.r2());
    let half = floor_guarded((r2 * r2) / (r1 * r1)) as u64;
    CoverPart::Segment {
        step: r1 * r1,
        half,
        radius: 2.0 * r1,
    }
}

/// `2 r1`-dense net of `R(0, r)` on the vertical axis. Requires `r1 <= r2`.
pub fn segment_net(r: &Radii) -> Result<Cover> {
    if !r.is_thin() {
        return Err(Error::Precondition("segment net needs r1 <= r2"));
    }
    Ok(Cover::new(
        alloc::vec![segment_part(r)],
        HeisRect::at_origin(*r),
        2.0 * r.r1(),
        Construction::SegmentNet,
    ))
}

fn ring_part(rho: f64, eps: f64, radius: f64) -> CoverPart {
    let ratio = rho / eps;
    CoverPart::Ring {
        rho,
        angle_step: (eps * eps) / (2.0 * rho * rho),
        count: floor(4.0 * PI * ratio * ratio) as u64 + 1,
        radius,
    }
}

/// Points `ρ(cos θ_k, sin θ_k, 0)`, `θ_k = k ε²/2ρ²`, `k = 0..=⌊4πρ²/ε²⌋`:
/// an `ε`-dense subset of the horizontal circle of radius `ρ`.
pub fn circle_net(rho: f64, eps: f64) -> Result<Vec<HeisPoint>> {
    if !(rho > 0.0 && eps > 0.0 && rho.is_finite() && eps.is_finite()) {
        return Err(Error::Precondition(
            "circle net needs finite ρ > 0 and ε > 0",
        ));
    }
    let part = ring_part(rho, eps, eps);
    Ok((0..part.len()).map(|i| part.center(i)).collect())
}

/// Number of points [`circle_net`] would return.
pub fn circle_net_len(rho: f64, eps: f64) -> u64 {
    ring_part(rho, eps, eps).len()
}

/// Cover of a flat rectangle (`r1 >= r2`) by a central segment net and
/// circle nets on the annuli `ρ_k = r2 √k`.
pub fn annulus_cover(r: &Radii) -> Result<Cover> {
    if r.r1() < r.r2() {
        return Err(Error::Precondition("annulus cover needs r1 >= r2"));
    }
    let r2 = r.r2();
    let central = Radii::new(r2, r2)?;
    let rings = ceil_guarded((r.r1() / r2) * (r.r1() / r2)).max(1.0) as u64;
    let mut parts = Vec::with_capacity(rings as usize + 1);
    parts.push(segment_part(&central));
    for k in 1..=rings {
        let rho = r2 * sqrt(k as f64);
        let eps = r2 * r2 / rho;
        parts.push(ring_part(rho, eps, 3.0 * r2 * r2 / rho));
    }
    let claim = parts.iter().map(CoverPart::radius).fold(0.0, f64::max);
    Ok(Cover::new(
        parts,
        HeisRect::at_origin(*r),
        claim,
        Construction::Annulus,
    ))
}

/// The construction matching the shape of `Φ^t(r)`.
pub fn build_cover(r: &Radii, t: f64) -> Result<Cover> {
    if !(t.is_finite() && (0.0..=4.0).contains(&t)) {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            lo: 0.0,
            hi: 4.0,
        });
    }
    if r.is_thin() {
        if t <= 2.0 {
            Ok(trivial_cover(r))
        } else {
            segment_net(r)
        }
    } else if t <= 3.0 {
        Ok(trivial_cover(r))
    } else {
        annulus_cover(r)
    }
}

pub fn content(cover: &Cover, t: f64) -> f64 {
    cover.content(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub samples: u64,
    /// Largest distance from a sample to its nearest centre.
    pub max_gap: f64,
    /// Samples farther than the density claim from every centre.
    pub violations: u64,
    /// Samples outside every element ball.
    pub uncovered: u64,
}

/// Samples the target rectangle uniformly and checks the cover's claims.
pub fn verify_density(cover: &Cover, n_samples: u64, stream: SeedStream) -> Result<DensityReport> {
    if n_samples == 0 {
        return Err(Error::Precondition(
            "verify_density needs at least one sample",
        ));
    }
    let target = *cover.target();
    let claim = cover.density_claim() * (1.0 + COVER_SLACK);
    let partials = map_chunks(n_samples as usize, CHUNK, |c, range| {
        let mut rng = stream.child(c as u64).rng();
        let mut max_gap: f64 = 0.0;
        let (mut violations, mut uncovered) = (0u64, 0u64);
        for _ in range {
            let p = target
                .center
                .mul(&sample_rect_at_origin(&target.radii, &mut rng));
            let q = cover.query(&p);
            max_gap = max_gap.max(q.gap);
            violations += u64::from(q.gap > claim);
            uncovered += u64::from(!q.covered);
        }
        (max_gap, violations, uncovered)
    });
    let (max_gap, violations, uncovered) = partials
        .into_iter()
        .fold((0.0f64, 0, 0), |a, b| (a.0.max(b.0), a.1 + b.1, a.2 + b.2));
    Ok(DensityReport {
        samples: n_samples,
        max_gap,
        violations,
        uncovered,
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
    fn trivial_examples() {
        let c = trivial_cover(&r(1.0, 1.0));
        assert_eq!(c.element_count(), 1);
        assert_relative_eq!(c.max_radius(), 2f64.powf(1.25), max_relative = 1e-15);
        assert_eq!(c.content(0.0), 1.0);
        assert_relative_eq!(
            c.content(1.7),
            (2.0 * c.max_radius()).powf(1.7),
            max_relative = 1e-14
        );
        // Single term: scales like max(r1, r2)^t.
        let small = trivial_cover(&r(0.25, 0.5));
        assert_relative_eq!(
            c.content(2.5) / small.content(2.5),
            2f64.powf(2.5),
            max_relative = 1e-12
        );
    }

    #[test]
    fn segment_examples() {
        let c = segment_net(&r(1.0, 1.0)).unwrap();
        let centres: Vec<_> = c.elements().map(|e| e.center.coords()).collect();
        assert_eq!(
            centres,
            alloc::vec![[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        );
        assert!(c.elements().all(|e| e.radius == 2.0));
        assert_eq!(segment_net(&r(0.1, 1.0)).unwrap().element_count(), 201);
        assert!(segment_net(&r(1.0, 0.5)).is_err());
    }

    #[test]
    fn segment_content_example() {
        let c = segment_net(&r(0.1, 1.0)).unwrap();
        assert_relative_eq!(c.content(3.0), 201.0 * 0.4f64.powi(3), max_relative = 1e-12);
    }

    #[test]
    fn circle_net_examples() {
        // Large ε: one point, still a valid net (every circle point is within 2ρ).
        let pts = circle_net(1.0, 4.0).unwrap();
        assert_eq!(pts.len(), 1);
        let pts = circle_net(2.0, 0.3).unwrap();
        assert_eq!(pts.len() as u64, (4.0 * PI * 4.0 / 0.09).floor() as u64 + 1);
        for w in pts.windows(2) {
            assert!(w[0].dist(&w[1]) <= 0.3 * (1.0 + 1e-12));
        }
        assert!(pts.last().unwrap().dist(&pts[0]) <= 0.3 * (1.0 + 1e-12));
        assert!(circle_net(0.0, 1.0).is_err());
    }

    #[test]
    fn annulus_unit_square() {
        let c = annulus_cover(&r(1.0, 1.0)).unwrap();
        // Central part plus ring k = 1.
        assert_eq!(c.parts().len(), 2);
        assert!(annulus_cover(&r(0.5, 1.0)).is_err());
    }

    #[test]
    fn build_cover_selection() {
        let kind = |a, b, t| build_cover(&r(a, b), t).unwrap().construction();
        assert_eq!(kind(0.1, 1.0, 3.0), Construction::SegmentNet);
        assert_eq!(kind(0.1, 1.0, 1.0), Construction::Trivial);
        assert_eq!(kind(1.0, 0.1, 1.0), Construction::Trivial);
        assert_eq!(kind(1.0, 0.1, 3.5), Construction::Annulus);
        assert!(build_cover(&r(1.0, 1.0), 4.5).is_err());
    }

    #[test]
    fn structured_query_matches_exhaustive() {
        let covers = [
            trivial_cover(&r(0.3, 0.6)),
            segment_net(&r(0.1, 0.5)).unwrap(),
            annulus_cover(&r(1.0, 0.25)).unwrap(),
            annulus_cover(&r(0.6, 0.3)).unwrap(),
        ];
        for (ci, cover) in covers.iter().enumerate() {
            let mut rng = SeedStream::new(77, ci as u64).rng();
            for _ in 0..2_000 {
                let p = sample_rect_at_origin(&cover.target().radii, &mut rng);
                let fast = cover.query(&p);
                let slow = cover.query_exhaustive(&p);
                assert!(fast.gap >= slow.gap - 1e-12);
                assert_eq!(fast.covered, slow.covered);
                // The candidate search should find the true nearest centre.
                assert_relative_eq!(fast.gap, slow.gap, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn density_examples() {
        let s = SeedStream::new(2024, 0);
        for cover in [
            trivial_cover(&r(1.0, 1.0)),
            segment_net(&r(0.1, 1.0)).unwrap(),
            annulus_cover(&r(1.0, 0.1)).unwrap(),
        ] {
            let rep = verify_density(&cover, 10_000, s).unwrap();
            assert_eq!(rep.violations, 0, "{:?}", cover.construction());
            assert_eq!(rep.uncovered, 0, "{:?}", cover.construction());
            assert!(rep.max_gap <= cover.density_claim());
        }
    }

    #[test]
    fn sparse_cover_is_caught() {
        // Halving the claimed radius of a segment net must leave gaps.
        let mut cover = segment_net(&r(0.1, 1.0)).unwrap();
        cover.density_claim *= 0.25;
        for p in cover.parts.iter_mut() {
            if let CoverPart::Segment { radius, .. } = p {
                *radius *= 0.25;
            }
        }
        let rep = verify_density(&cover, 5_000, SeedStream::new(1, 1)).unwrap();
        assert!(rep.violations > 0 && rep.uncovered > 0);
    }

    fn log_slope(counts: &[(f64, u64)]) -> f64 {
        let xs: Vec<f64> = counts.iter().map(|c| libm::log(c.0)).collect();
        let ys: Vec<f64> = counts.iter().map(|c| libm::log(c.1 as f64)).collect();
        crate::stats::fit_line(&xs, &ys).unwrap().slope
    }

    #[test]
    fn count_asymptotics() {
        let seg: Vec<(f64, u64)> = (2..=8)
            .map(|j| {
                (
                    libm::ldexp(1.0, j),
                    segment_net(&r(libm::ldexp(1.0, -j), 1.0))
                        .unwrap()
                        .element_count(),
                )
            })
            .collect();
        assert!((log_slope(&seg) - 2.0).abs() <= 0.05);
        let ann: Vec<(f64, u64)> = (2..=8)
            .map(|k| {
                (
                    libm::ldexp(1.0, k),
                    annulus_cover(&r(1.0, libm::ldexp(1.0, -k)))
                        .unwrap()
                        .element_count(),
                )
            })
            .collect();
        assert!((log_slope(&ann) - 6.0).abs() <= 0.1);
        // Ring k carries ⌊4πk²⌋ + 1 centres.
        let c = annulus_cover(&r(2.0, 1.0)).unwrap();
        let expected = 3
            + (1..=4u64)
                .map(|k| (4.0 * core::f64::consts::PI * (k * k) as f64) as u64 + 1)
                .sum::<u64>();
        assert_eq!(c.element_count(), expected);
    }
}
