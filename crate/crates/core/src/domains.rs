//! Geometry of supported planar factors and their products: membership,
//! coordinatewise scaling, dilation sets, distinguished boundaries and
//! separating contours.
//!
//! Supported factors are discs (any center) and origin-centered annuli:
//! exactly the planar shapes closed under the coordinatewise scaling
//! `z^-1 * domain` that the multiplier layer needs. Circle data is exact, so
//! membership predicates use tolerance-free comparisons.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Point;

/// One planar factor of a product domain.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanarFactor {
    Disc {
        center: Complex64,
        radius: f64,
    },
    /// Origin-centered open annulus `r_in < |z| < r_out`.
    Annulus {
        r_in: f64,
        r_out: f64,
    },
}

impl PlanarFactor {
    pub fn disc(center: Complex64, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "disc radius must be positive and finite, got {radius}"
            )));
        }
        Ok(PlanarFactor::Disc { center, radius })
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_out > r_in) || !r_out.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "annulus needs 0 < r_in < r_out, got ({r_in}, {r_out})"
            )));
        }
        Ok(PlanarFactor::Annulus { r_in, r_out })
    }

    /// Open membership; boundary points count as outside.
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            PlanarFactor::Disc { center, radius } => (z - center).norm() < *radius,
            PlanarFactor::Annulus { r_in, r_out } => {
                let r = z.norm();
                *r_in < r && r < *r_out
            }
        }
    }

    pub fn is_disc(&self) -> bool {
        matches!(self, PlanarFactor::Disc { .. })
    }

    /// Distance from an interior point to the factor boundary.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        match self {
            PlanarFactor::Disc { center, radius } => radius - (z - center).norm(),
            PlanarFactor::Annulus { r_in, r_out } => (z.norm() - r_in).min(r_out - z.norm()),
        }
    }

    /// The factor scaled by `1/w`: `{u : w*u` is in the factor `}`.
    pub fn inverse_scale(&self, w: Complex64) -> Result<PlanarFactor> {
        if w == Complex64::new(0.0, 0.0) {
            return Err(Error::HyperplanePoint { coordinate: 0 });
        }
        Ok(match self {
            PlanarFactor::Disc { center, radius } => PlanarFactor::Disc {
                center: center / w,
                radius: radius / w.norm(),
            },
            PlanarFactor::Annulus { r_in, r_out } => PlanarFactor::Annulus {
                r_in: r_in / w.norm(),
                r_out: r_out / w.norm(),
            },
        })
    }

    /// Point-set boundary as positively oriented circles; an annulus
    /// contributes both of its circles.
    pub fn boundary_circles(&self) -> Vec<Circle> {
        match self {
            PlanarFactor::Disc { center, radius } => vec![Circle::new(*center, *radius, 1)],
            PlanarFactor::Annulus { r_in, r_out } => vec![
                Circle::new(Complex64::new(0.0, 0.0), *r_out, 1),
                Circle::new(Complex64::new(0.0, 0.0), *r_in, 1),
            ],
        }
    }
}

/// A product `Omega = Omega_1 x ... x Omega_n` of planar factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDomain {
    factors: Vec<PlanarFactor>,
}

impl ProductDomain {
    pub fn new(factors: Vec<PlanarFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGeometry("need at least one factor".into()));
        }
        Ok(ProductDomain { factors })
    }

    /// Polydisc centered at the origin with the given polyradius.
    pub fn polydisc(radii: &[f64]) -> Result<Self> {
        ProductDomain::new(
            radii
                .iter()
                .map(|&r| PlanarFactor::disc(Complex64::new(0.0, 0.0), r))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[PlanarFactor] {
        &self.factors
    }

    /// Polynomials are dense on products of discs; annuli are carried for
    /// geometry and duality tests only.
    pub fn is_runge(&self) -> bool {
        self.factors.iter().all(PlanarFactor::is_disc)
    }

    pub fn contains(&self, z: &Point) -> Result<bool> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        Ok(self
            .factors
            .iter()
            .zip(z.coords())
            .all(|(f, &zj)| f.contains(zj)))
    }

    /// `z^-1 * Omega = { w : z*w` in `Omega }`, factorwise.
    pub fn inverse_scale(&self, z: &Point) -> Result<ProductDomain> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        if let Some(j) = z
            .coords()
            .iter()
            .position(|c| *c == Complex64::new(0.0, 0.0))
        {
            return Err(Error::HyperplanePoint { coordinate: j });
        }
        Ok(ProductDomain {
            factors: self
                .factors
                .iter()
                .zip(z.coords())
                .map(|(f, &zj)| f.inverse_scale(zj))
                .collect::<Result<_>>()?,
        })
    }

    /// The dilation set `{ z : z * Omega` inside `Omega }`, factorwise.
    /// Requires origin-centered factors; for an off-center disc the set is
    /// not one of the supported regions.
    pub fn dilation_set(&self) -> Result<DilationSet> {
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                PlanarFactor::Disc { center, .. } => {
                    if *center != Complex64::new(0.0, 0.0) {
                        Err(Error::UnsupportedGeometry(
                            "dilation set of a non-origin-centered disc is not a supported region"
                                .into(),
                        ))
                    } else {
                        Ok(FactorDilation::ClosedUnitDisc)
                    }
                }
                PlanarFactor::Annulus { .. } => Ok(FactorDilation::UnitCircle),
            })
            .collect::<Result<_>>()?;
        Ok(DilationSet { factors })
    }

    /// Distinguished boundary: the product of factor boundaries.
    pub fn distinguished_boundary(&self) -> PolyContour {
        PolyContour::new(self.factors.iter().map(|f| f.boundary_circles()).collect())
    }

    /// A compact product box sitting inside the domain: each factor shrunk
    /// toward its center by the given fraction of the boundary distance.
    pub fn exhaustion_box(&self, fraction: f64) -> Result<CompactBox> {
        if !(0.0 < fraction && fraction < 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "exhaustion fraction must lie in (0,1), got {fraction}"
            )));
        }
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                PlanarFactor::Disc { center, radius } => Ok(ClosedDisc {
                    center: *center,
                    radius: radius * fraction,
                }),
                PlanarFactor::Annulus { .. } => Err(Error::UnsupportedGeometry(
                    "exhaustion boxes are built for disc factors".into(),
                )),
            })
            .collect::<Result<_>>()?;
        Ok(CompactBox { factors })
    }
}

/// Per-factor description of a dilation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorDilation {
    ClosedUnitDisc,
    UnitCircle,
}

impl FactorDilation {
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            FactorDilation::ClosedUnitDisc => z.norm() <= 1.0,
            FactorDilation::UnitCircle => z.norm() == 1.0,
        }
    }
}

/// Product of factor dilation sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilationSet {
    pub factors: Vec<FactorDilation>,
}

impl DilationSet {
    pub fn contains(&self, z: &Point) -> bool {
        z.dim() == self.factors.len()
            && self
                .factors
                .iter()
                .zip(z.coords())
                .all(|(f, &zj)| f.contains(zj))
    }
}

/// A closed planar disc; `radius = 0` degenerates to a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedDisc {
    pub center: Complex64,
    pub radius: f64,
}

impl ClosedDisc {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "closed disc radius must be non-negative, got {radius}"
            )));
        }
        Ok(ClosedDisc { center, radius })
    }

    pub fn point(center: Complex64) -> Self {
        ClosedDisc {
            center,
            radius: 0.0,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

/// A compact product `K = K_1 x ... x K_n` of closed discs.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactBox {
    factors: Vec<ClosedDisc>,
}

impl CompactBox {
    pub fn new(factors: Vec<ClosedDisc>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGeometry("need at least one factor".into()));
        }
        Ok(CompactBox { factors })
    }

    /// The single point `{1, ..., 1}`.
    pub fn ones(dim: usize) -> Self {
        CompactBox {
            factors: vec![ClosedDisc::point(Complex64::new(1.0, 0.0)); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[ClosedDisc] {
        &self.factors
    }

    pub fn contains(&self, z: &Point) -> bool {
        z.dim() == self.dim()
            && self
                .factors
                .iter()
                .zip(z.coords())
                .all(|(f, &zj)| f.contains(zj))
    }

    /// True when the box sits inside the open domain (factorwise disc in
    /// disc / disc in annulus checks).
    pub fn inside(&self, domain: &ProductDomain) -> bool {
        self.dim() == domain.dim()
            && self
                .factors
                .iter()
                .zip(domain.factors())
                .all(|(k, f)| match f {
                    PlanarFactor::Disc { center, radius } => {
                        (k.center - center).norm() + k.radius < *radius
                    }
                    PlanarFactor::Annulus { r_in, r_out } => {
                        let d = k.center.norm();
                        d - k.radius > *r_in && d + k.radius < *r_out
                    }
                })
    }

    pub fn distinguished_boundary(&self) -> PolyContour {
        PolyContour::new(
            self.factors
                .iter()
                .map(|k| vec![Circle::new(k.center, k.radius.max(0.0), 1)])
                .collect(),
        )
    }
}

/// An oriented circle; `orientation` is +1 (counterclockwise) or -1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
    pub orientation: i8,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64, orientation: i8) -> Self {
        assert!(radius >= 0.0 && (orientation == 1 || orientation == -1));
        Circle {
            center,
            radius,
            orientation,
        }
    }

    /// Exact winding number of the circle around a point off the circle.
    pub fn winding(&self, z: Complex64) -> i32 {
        if (z - self.center).norm() < self.radius {
            self.orientation as i32
        } else {
            0
        }
    }

    pub fn on_circle(&self, z: Complex64) -> bool {
        (z - self.center).norm() == self.radius
    }
}

/// Winding number of a finite union of circles around a point.
pub fn winding_number(circles: &[Circle], z: Complex64) -> i32 {
    circles.iter().map(|c| c.winding(z)).sum()
}

/// An n-tuple of finite circle unions, one union per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyContour {
    factors: Vec<Vec<Circle>>,
}

impl PolyContour {
    pub fn new(factors: Vec<Vec<Circle>>) -> Self {
        assert!(!factors.is_empty() && factors.iter().all(|f| !f.is_empty()));
        PolyContour { factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<Circle>] {
        &self.factors
    }

    /// For each factor, the largest `|center| + radius` over its circles: a
    /// closed origin-centered disc containing everything the contour encloses.
    pub fn enclosing_radii(&self) -> Vec<f64> {
        self.factors
            .iter()
            .map(|circles| {
                circles
                    .iter()
                    .map(|c| c.center.norm() + c.radius)
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// True when every coordinate of `z` lies strictly outside the region
    /// enclosed by the corresponding factor (winding 0, not on a circle).
    pub fn point_outside(&self, z: &Point) -> Result<bool> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        for (circles, &zj) in self.factors.iter().zip(z.coords()) {
            if circles.iter().any(|c| c.on_circle(zj)) || winding_number(circles, zj) != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Inner region a separating contour must wind around once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerCompact {
    Disc(ClosedDisc),
    /// Closed origin-centered annulus `r_in <= |z| <= r_out`.
    Annulus {
        r_in: f64,
        r_out: f64,
    },
}

impl InnerCompact {
    pub fn origin_disc(radius: f64) -> Self {
        InnerCompact::Disc(ClosedDisc {
            center: Complex64::new(0.0, 0.0),
            radius,
        })
    }
}

/// Floor used when the inner region degenerates to a point, so the radius
/// interpolation below stays well-defined.
const INNER_RADIUS_FLOOR: f64 = 1e-4;

/// Places circles separating an inner compact from the boundary of an outer
/// factor, winding once around the inner region and zero beyond the factor.
///
/// Radii interpolate geometrically between the inner and outer radii:
/// `margin = 0.5` gives the geometric mean, the scale-invariant choice that
/// maximizes the distance ratio governing quadrature convergence.
pub fn separating_contour(
    inner: &InnerCompact,
    outer: &PlanarFactor,
    margin: f64,
) -> Result<Vec<Circle>> {
    if !(0.0 < margin && margin < 1.0) {
        return Err(Error::InvalidGeometry(format!(
            "margin must lie in (0,1), got {margin}"
        )));
    }
    match (inner, outer) {
        (InnerCompact::Disc(k), PlanarFactor::Disc { center, radius }) => {
            // Re-center on the outer disc; the inner compact is then covered
            // by the closed disc of radius |k.center - center| + k.radius.
            let inner_radius = (k.center - center).norm() + k.radius;
            if inner_radius >= *radius {
                return Err(Error::NoSeparatingContour(format!(
                    "inner compact (effective radius {inner_radius}) touches the disc of radius {radius}"
                )));
            }
            let r = interpolate_up(inner_radius, *radius, margin);
            Ok(vec![Circle::new(*center, r, 1)])
        }
        (InnerCompact::Disc(k), PlanarFactor::Annulus { r_in, r_out }) => {
            // Treat a closed disc sitting inside the annulus as an annular
            // region between its extreme moduli.
            let lo = (k.center.norm() - k.radius).max(0.0);
            let hi = k.center.norm() + k.radius;
            separating_contour(
                &InnerCompact::Annulus {
                    r_in: lo,
                    r_out: hi,
                },
                &PlanarFactor::Annulus {
                    r_in: *r_in,
                    r_out: *r_out,
                },
                margin,
            )
        }
        (InnerCompact::Annulus { r_in: a, r_out: b }, PlanarFactor::Annulus { r_in, r_out }) => {
            if *a <= *r_in || *b >= *r_out {
                return Err(Error::NoSeparatingContour(format!(
                    "inner annulus [{a}, {b}] touches the annulus ({r_in}, {r_out})"
                )));
            }
            let outer_circle = interpolate_up(*b, *r_out, margin);
            let inner_circle = interpolate_down(*a, *r_in, margin);
            Ok(vec![
                Circle::new(Complex64::new(0.0, 0.0), outer_circle, 1),
                Circle::new(Complex64::new(0.0, 0.0), inner_circle, -1),
            ])
        }
        (InnerCompact::Annulus { r_out: b, .. }, PlanarFactor::Disc { center, radius }) => {
            if center.norm() > 0.0 {
                return Err(Error::UnsupportedGeometry(
                    "annular inner region inside an off-center disc".into(),
                ));
            }
            if *b >= *radius {
                return Err(Error::NoSeparatingContour(format!(
                    "inner annulus outer radius {b} touches the disc of radius {radius}"
                )));
            }
            let r = interpolate_up(*b, *radius, margin);
            Ok(vec![Circle::new(*center, r, 1)])
        }
    }
}

/// Geometric interpolation from `from` up to `to`; `from` is floored away
/// from zero so a degenerate inner point still yields a positive radius.
fn interpolate_up(from: f64, to: f64, margin: f64) -> f64 {
    let from = from.max(INNER_RADIUS_FLOOR * to);
    from * (to / from).powf(margin)
}

/// Geometric interpolation from `from` down to `to`.
fn interpolate_down(from: f64, to: f64, margin: f64) -> f64 {
    from * (to / from).powf(margin)
}
