//! The first Heisenberg group: group law, gauge norm and the left-invariant
//! gauge metric, with rectangles and their uniform samplers.
//!
//! Points are `(x, y, z)` with product
//! `(x, y, z)(x', y', z') = (x + x', y + y', z + z' + 2(xy' - yx'))`.
//! Dilations `(x, y, z) -> (sx, sy, s^2 z)` scale the gauge norm by `s` and
//! Lebesgue (= Haar) measure by `s^4`.

use core::f64::consts::PI;

use rand::Rng;

use crate::math::{sin_cos, sqrt};
use crate::{Error, Result};

/// Relative tolerance of [`in_horizontal_plane`].
pub const PLANE_TOLERANCE: f64 = 1e-9;

/// `λ(B(0, 1))` for the gauge metric. Integrating the vertical chord
/// `2 sqrt(1 - s^4)` over the unit disk gives `2π ∫ sqrt(1 - u^2) du = π²/2`.
pub const BALL_VOLUME_CONSTANT: f64 = PI * PI / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeisPoint {
    x: f64,
    y: f64,
    z: f64,
}

impl HeisPoint {
    pub const ORIGIN: HeisPoint = HeisPoint {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Ok(Self { x, y, z })
        } else {
            Err(Error::NonFinite {
                what: "point coordinate",
            })
        }
    }

    /// Construction without the finiteness check, for coordinates that are
    /// finite by construction.
    pub(crate) const fn raw(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &HeisPoint) -> HeisPoint {
        HeisPoint {
            x: self.x + other.x,
            y: self.y + other.y,
            z: self.z + other.z + 2.0 * (self.x * other.y - self.y * other.x),
        }
    }

    /// Group product that rejects overflow to a non-finite point.
    pub fn checked_mul(&self, other: &HeisPoint) -> Result<HeisPoint> {
        let p = self.mul(other);
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::NonFinite {
                what: "group product",
            })
        }
    }

    pub fn inv(&self) -> HeisPoint {
        HeisPoint {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// `self⁻¹ · other`, expanded so it costs one product.
    pub fn left_diff(&self, other: &HeisPoint) -> HeisPoint {
        HeisPoint {
            x: other.x - self.x,
            y: other.y - self.y,
            z: (other.z - self.z) - 2.0 * (self.x * other.y - self.y * other.x),
        }
    }

    /// The gauge `((x² + y²)² + z²)^{1/4}`.
    pub fn gauge_norm(&self) -> f64 {
        let s = self.x * self.x + self.y * self.y;
        sqrt(libm::hypot(s, self.z))
    }

    /// Left-invariant gauge distance `‖self⁻¹ other‖`.
    pub fn dist(&self, other: &HeisPoint) -> f64 {
        self.left_diff(other).gauge_norm()
    }

    /// Euclidean distance between the projections to the `xy`-plane.
    pub fn planar_dist(&self, other: &HeisPoint) -> f64 {
        libm::hypot(other.x - self.x, other.y - self.y)
    }

    /// Dilation `(sx, sy, s²z)`.
    pub fn dilate(&self, s: f64) -> HeisPoint {
        HeisPoint {
            x: s * self.x,
            y: s * self.y,
            z: s * s * self.z,
        }
    }

    /// Rotation by `angle` about the vertical axis; an isometry.
    pub fn rotate(&self, angle: f64) -> HeisPoint {
        let (s, c) = sin_cos(angle);
        HeisPoint {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
            z: self.z,
        }
    }
}

pub fn dist(p: &HeisPoint, q: &HeisPoint) -> f64 {
    p.dist(q)
}

/// Whether `q` lies on the horizontal plane `H(p)`:
/// `z' = z + 2(xy' - yx')`, up to [`PLANE_TOLERANCE`] relative to
/// `1 + |z| + |z'|`. Symmetric in `p` and `q`.
pub fn in_horizontal_plane(p: &HeisPoint, q: &HeisPoint) -> bool {
    let defect = p.left_diff(q).z;
    defect.abs() <= PLANE_TOLERANCE * (1.0 + p.z.abs() + q.z.abs())
}

/// Rectangle radii: `r1` is the horizontal radius, `r2²` the vertical
/// half-extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radii {
    r1: f64,
    r2: f64,
}

impl Radii {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if r1.is_finite() && r2.is_finite() && r1 > 0.0 && r2 > 0.0 {
            Ok(Self { r1, r2 })
        } else {
            Err(Error::InvalidRadii { r1, r2 })
        }
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// `r1 <= r2`: the rectangle is thin and tall.
    pub fn is_thin(&self) -> bool {
        self.r1 <= self.r2
    }

    pub fn max(&self) -> f64 {
        self.r1.max(self.r2)
    }

    pub fn min(&self) -> f64 {
        self.r1.min(self.r2)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(s * self.r1, s * self.r2)
    }

    /// Lebesgue measure of `R(p, r)`: disk area times vertical extent,
    /// `2π r1² r2²`.
    pub fn rect_volume(&self) -> f64 {
        2.0 * PI * self.r1 * self.r1 * self.r2 * self.r2
    }

    /// Upper bound `2^{5/4} max(r1, r2)` on the diameter of `R(0, r)`.
    ///
    /// Every point of the rectangle has gauge at most
    /// `(r1⁴ + r2⁴)^{1/4} <= 2^{1/4} max(r1, r2)`; double it.
    pub fn diameter_bound(&self) -> f64 {
        2.0 * libm::pow(2.0, 0.25) * self.max()
    }
}

pub fn rect_volume(r: &Radii) -> f64 {
    r.rect_volume()
}

pub fn rect_diameter_bound(r: &Radii) -> f64 {
    r.diameter_bound()
}

/// `λ(B(c, ρ)) = (π²/2) ρ⁴`.
pub fn ball_volume(rho: f64) -> f64 {
    BALL_VOLUME_CONSTANT * rho * rho * rho * rho
}

/// The closed rectangle `R(p, r) = p · R(0, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisRect {
    pub center: HeisPoint,
    pub radii: Radii,
}

impl HeisRect {
    pub fn new(center: HeisPoint, radii: Radii) -> Self {
        Self { center, radii }
    }

    pub fn at_origin(radii: Radii) -> Self {
        Self::new(HeisPoint::ORIGIN, radii)
    }

    pub fn contains(&self, q: &HeisPoint) -> bool {
        contains_at_origin(&self.radii, &self.center.left_diff(q))
    }

    pub fn volume(&self) -> f64 {
        self.radii.rect_volume()
    }
}

pub fn rect_contains(rect: &HeisRect, q: &HeisPoint) -> bool {
    rect.contains(q)
}

#[inline]
pub(crate) fn contains_at_origin(r: &Radii, h: &HeisPoint) -> bool {
    h.x * h.x + h.y * h.y <= r.r1 * r.r1 && h.z.abs() <= r.r2 * r.r2
}

/// Uniform point of the closed disk of radius `radius`.
pub(crate) fn sample_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> (f64, f64) {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let rad = radius * sqrt(u);
    let (s, c) = sin_cos(2.0 * PI * v);
    (rad * c, rad * s)
}

/// Uniform (Lebesgue) point of `R(0, r)`.
pub fn sample_rect_at_origin<R: Rng + ?Sized>(r: &Radii, rng: &mut R) -> HeisPoint {
    let (x, y) = sample_disk(r.r1, rng);
    let w: f64 = rng.random();
    let z = r.r2 * r.r2 * (2.0 * w - 1.0);
    HeisPoint::raw(x, y, z)
}

/// Uniform point of `R(p, r)`: sample at the origin, translate on the left.
/// Lebesgue measure is left invariant, so uniformity is preserved.
pub fn sample_rect<R: Rng + ?Sized>(rect: &HeisRect, rng: &mut R) -> HeisPoint {
    rect.center.mul(&sample_rect_at_origin(&rect.radii, rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSample {
    pub point: HeisPoint,
    /// Proposals drawn from the enclosing rectangle, including the accepted one.
    pub attempts: u32,
}

/// Uniform point of the metric ball `B(c, ρ)` by rejection from
/// `R(c, (ρ, ρ))`, which contains it. The acceptance probability is
/// `λ(B)/λ(R) = π/4` at every scale and centre.
pub fn sample_ball<R: Rng + ?Sized>(c: &HeisPoint, rho: f64, rng: &mut R) -> BallSample {
    let r = Radii { r1: rho, r2: rho };
    let mut attempts = 0;
    loop {
        attempts += 1;
        let h = sample_rect_at_origin(&r, rng);
        if h.gauge_norm() <= rho {
            return BallSample {
                point: c.mul(&h),
                attempts,
            };
        }
    }
}
