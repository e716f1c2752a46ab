//! The weighted-derivative seminorm system on complement germs and the
//! boundedness diagnostics built on it.
//!
//! Every supremum over an infinite set (a distinguished boundary, a compact
//! off the hyperplanes, all multi-indices) is evaluated over a finite grid
//! or box and reported as a lower bound together with the witness that
//! attains it. Grid refinement can only grow the reported value.

use num_complex::Complex64;

use crate::domains::{CompactBox, ProductDomain};
use crate::duality::{AnalyticFunctional, Germ};
use crate::error::{Error, Result};
use crate::multiplier::{
    apply_laurent_germ, apply_taylor_germ, EngineParams, Multiplier, Provenance,
};
use crate::quadrature;
use crate::series::{FnEval, MultiIndex, Point, TaylorPoly, TruncationBox};
use crate::tensor::{c64, unflatten, ZERO};

/// A finite window of a positive null sequence `delta_0 >= delta_1 >= ...`
/// together with the cumulative weights `delta_(k) = delta_0 * ... * delta_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSequence {
    delta: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DeltaSequence {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.len() < 2 {
            return Err(Error::InvalidDelta(
                "need at least two terms to witness decay".into(),
            ));
        }
        if delta.iter().any(|&d| !d.is_finite() || d <= 0.0) {
            return Err(Error::InvalidDelta(
                "terms must be positive and finite".into(),
            ));
        }
        if delta.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidDelta("terms must be non-increasing".into()));
        }
        if delta[delta.len() - 1] >= delta[0] {
            return Err(Error::InvalidDelta(
                "the window must strictly decrease from head to tail".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(delta.len());
        let mut acc = 1.0;
        for &d in &delta {
            acc *= d;
            cumulative.push(acc);
        }
        Ok(DeltaSequence { delta, cumulative })
    }

    /// `delta_k = ratio^k` for `k = 0..=length`.
    pub fn geometric(ratio: f64, length: usize) -> Result<Self> {
        if !(0.0 < ratio && ratio < 1.0) {
            return Err(Error::InvalidDelta(format!(
                "geometric ratio must lie in (0,1), got {ratio}"
            )));
        }
        DeltaSequence::new((0..=length).map(|k| ratio.powi(k as i32)).collect())
    }

    /// Geometric window sized for a box in `dim` variables: exactly the
    /// indices the seminorm formulas touch, `diameter + dim`.
    pub fn for_box(bounds: &TruncationBox, ratio: f64) -> Result<Self> {
        DeltaSequence::geometric(ratio, bounds.diameter() + bounds.dim())
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn terms(&self) -> &[f64] {
        &self.delta
    }

    /// The cumulative weight `delta_(k)`.
    pub fn weight(&self, k: usize) -> Result<f64> {
        self.cumulative.get(k).copied().ok_or(Error::DeltaTooShort {
            needed: k,
            len: self.delta.len(),
        })
    }
}

/// Which branch of the seminorm attained the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// derivative sup on the distinguished boundary
    Boundary,
    /// Taylor coefficients of the reciprocal composition at the origin
    Infinity,
}

/// A seminorm evaluation: a certified lower bound of the supremum over the
/// finite grids swept, with the attaining witness.
#[derive(Debug, Clone)]
pub struct SeminormReport {
    pub value: f64,
    pub branch: Option<Branch>,
    pub alpha: Option<MultiIndex>,
    /// witness on the distinguished boundary, when the boundary branch wins
    pub boundary_point: Option<Point>,
    /// outer witness for supremum-over-compact seminorms
    pub outer_z: Option<Point>,
    pub grid_points: usize,
}

impl SeminormReport {
    fn zero() -> Self {
        SeminormReport {
            value: 0.0,
            branch: None,
            alpha: None,
            boundary_point: None,
            outer_z: None,
            grid_points: 0,
        }
    }
}

/// Finite grid over a compact box, off the coordinate hyperplanes.
#[derive(Debug, Clone)]
pub enum ZGrid {
    /// per factor: `radii` radial fractions times `angles` angles
    Spec {
        radii: usize,
        angles: usize,
    },
    Explicit(Vec<Point>),
}

impl Default for ZGrid {
    fn default() -> Self {
        ZGrid::Spec {
            radii: 5,
            angles: 8,
        }
    }
}

impl ZGrid {
    pub fn points(&self, k: &CompactBox) -> Vec<Point> {
        match self {
            ZGrid::Explicit(points) => points
                .iter()
                .filter(|p| !p.on_hyperplane())
                .cloned()
                .collect(),
            ZGrid::Spec { radii, angles } => {
                let factor_points: Vec<Vec<Complex64>> = k
                    .factors()
                    .iter()
                    .map(|disc| {
                        if disc.radius == 0.0 {
                            return vec![disc.center];
                        }
                        let mut pts = Vec::with_capacity(radii * angles);
                        for i in 0..*radii {
                            let frac = (i + 1) as f64 / *radii as f64;
                            for a in 0..*angles {
                                let theta =
                                    2.0 * std::f64::consts::PI * (a as f64 + 0.5) / *angles as f64;
                                pts.push(
                                    disc.center
                                        + frac * disc.radius * c64(theta.cos(), theta.sin()),
                                );
                            }
                        }
                        pts
                    })
                    .collect();
                let shape: Vec<usize> = factor_points.iter().map(Vec::len).collect();
                let total: usize = shape.iter().product();
                let mut out = Vec::new();
                for flat in 0..total {
                    let idx = unflatten(&shape, flat);
                    let coords: Vec<Complex64> = idx
                        .iter()
                        .enumerate()
                        .map(|(j, &kk)| factor_points[j][kk])
                        .collect();
                    let p = Point::new(coords);
                    if !p.on_hyperplane() {
                        out.push(p);
                    }
                }
                out
            }
        }
    }
}

/// The weighted-derivative seminorm of a complement germ over a product
/// region `V`: the larger of
///
/// * the sup over a grid on the distinguished boundary of `V` of
///   `|D^alpha f(z)| / alpha! * delta_(|alpha|)`, and
/// * the sup over the (box + 1) window of the reciprocal-composition
///   Taylor coefficients at the origin, weighted the same way.
pub fn germ_seminorm(
    f: &Germ,
    v: &ProductDomain,
    delta: &DeltaSequence,
    bounds: &TruncationBox,
    grid_per_circle: usize,
    params: &EngineParams,
) -> Result<SeminormReport> {
    if f.dim() != v.dim() || f.dim() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: v.dim(),
        });
    }
    let inf_bounds = TruncationBox::new(bounds.degrees().iter().map(|&d| d + 1).collect());
    // both branches need delta_(|alpha|) up to the infinity-side window
    delta.weight(inf_bounds.diameter())?;
    let nodes = params
        .nodes
        .unwrap_or_else(|| quadrature::default_nodes(&inf_bounds));
    let mut report = SeminormReport::zero();

    // boundary branch: tensor grid over the factor boundary circles
    let boundary = v.distinguished_boundary();
    let factor_points: Vec<Vec<Complex64>> = boundary
        .factors()
        .iter()
        .map(|circles| {
            let mut pts = Vec::new();
            for c in circles {
                for k in 0..grid_per_circle {
                    let theta =
                        2.0 * std::f64::consts::PI * (k as f64 + 0.5) / grid_per_circle as f64;
                    pts.push(c.center + c.radius * c64(theta.cos(), theta.sin()));
                }
            }
            pts
        })
        .collect();
    let shape: Vec<usize> = factor_points.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    for flat in 0..total {
        let idx = unflatten(&shape, flat);
        let z = Point::new(
            idx.iter()
                .enumerate()
                .map(|(j, &k)| factor_points[j][k])
                .collect(),
        );
        let local = f.local_taylor(&z, bounds, nodes)?;
        report.grid_points += 1;
        for (aflat, value) in local.iter().enumerate() {
            let alpha = bounds.alpha_at(aflat);
            let candidate = value.norm() * delta.weight(alpha.order())?;
            if candidate > report.value {
                report.value = candidate;
                report.branch = Some(Branch::Boundary);
                report.alpha = Some(alpha);
                report.boundary_point = Some(z.clone());
            }
        }
    }

    // infinity branch: Taylor window of f(1/zeta) at the origin
    let recip = f.reciprocal_taylor(&inf_bounds, nodes)?;
    for (aflat, value) in recip.iter().enumerate() {
        let alpha = inf_bounds.alpha_at(aflat);
        let candidate = value.norm() * delta.weight(alpha.order())?;
        if candidate > report.value {
            report.value = candidate;
            report.branch = Some(Branch::Infinity);
            report.alpha = Some(alpha);
            report.boundary_point = None;
        }
    }
    Ok(report)
}

/// Supremum of the germ seminorm over `z` in a compact box off the
/// hyperplanes, with the germ read on `z^-1 * domain`. Ties break toward
/// the earlier grid point.
#[allow(clippy::too_many_arguments)]
pub fn upsilon(
    f: &Germ,
    domain: &ProductDomain,
    k: &CompactBox,
    delta: &DeltaSequence,
    bounds: &TruncationBox,
    z_grid: &ZGrid,
    grid_per_circle: usize,
    params: &EngineParams,
) -> Result<SeminormReport> {
    let mut best = SeminormReport::zero();
    let mut grid_points = 0;
    for z in z_grid.points(k) {
        let scaled = domain.inverse_scale(&z)?;
        let inner = germ_seminorm(f, &scaled, delta, bounds, grid_per_circle, params).map_err(
            |e| match e {
                Error::ContourPlacement(reason) | Error::InvalidGerm(reason) => {
                    Error::MembershipSampleFailure {
                        z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
                        reason,
                    }
                }
                Error::InsideContour { factor } => Error::MembershipSampleFailure {
                    z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
                    reason: format!("extension not evaluable on factor {factor} boundary"),
                },
                other => other,
            },
        )?;
        grid_points += inner.grid_points;
        if inner.value > best.value {
            best = inner;
            best.outer_z = Some(z.clone());
        }
    }
    best.grid_points = grid_points;
    Ok(best)
}

/// The functional seminorm: the upsilon seminorm of the Cauchy transform.
/// Same code path as [`upsilon`], by construction.
#[allow(clippy::too_many_arguments)]
pub fn functional_seminorm(
    t: &AnalyticFunctional,
    domain: &ProductDomain,
    k: &CompactBox,
    delta: &DeltaSequence,
    bounds: &TruncationBox,
    z_grid: &ZGrid,
    grid_per_circle: usize,
    params: &EngineParams,
) -> Result<SeminormReport> {
    upsilon(
        &t.to_complement_germ(),
        domain,
        k,
        delta,
        bounds,
        z_grid,
        grid_per_circle,
        params,
    )
}

/// Test families for the boundedness probe.
#[derive(Debug, Clone)]
pub enum TestFamily {
    /// `h_alpha = delta_(|alpha|+n) * zeta^alpha` over the box
    ScaledMonomials { bounds: TruncationBox },
    /// `h = delta_(|alpha|) / (w - zeta/z)^(alpha+1)` over a grid of `z` in
    /// the compact, `w` on the distinguished boundary of `z^-1 * domain`,
    /// and `alpha` in the box
    ShiftedCauchyKernels {
        bounds: TruncationBox,
        z_grid: ZGrid,
        w_angles: usize,
    },
}

/// Result of sweeping a test family through a multiplier: the sup over the
/// family of the compact-grid sup of `|M h|`. Finiteness of the report is
/// the desk-scale proxy for an equicontinuity estimate.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub sup_value: f64,
    pub family_size: usize,
    pub witness: Option<String>,
}

/// Evaluation grid used for the `sup` over the compact in the probe; kept
/// off the hyperplanes so every provenance path stays cheap.
fn probe_eval_points(k: &CompactBox) -> Vec<Point> {
    ZGrid::Spec {
        radii: 3,
        angles: 6,
    }
    .points(k)
}

pub fn boundedness_probe(
    m: &Multiplier,
    k: &CompactBox,
    family: &TestFamily,
    delta: &DeltaSequence,
    params: &EngineParams,
) -> Result<ProbeReport> {
    let eval_points = probe_eval_points(k);
    let mut report = ProbeReport {
        sup_value: 0.0,
        family_size: 0,
        witness: None,
    };
    match family {
        TestFamily::ScaledMonomials { bounds } => {
            let n = bounds.dim();
            for alpha in bounds.iter() {
                let weight = delta.weight(alpha.order() + n)?;
                let h = TaylorPoly::monomial(bounds.clone(), &alpha)?.scale(c64(weight, 0.0));
                report.family_size += 1;
                for z in &eval_points {
                    let value = m.evaluate_at(&h, z, params)?.norm();
                    if value > report.sup_value {
                        report.sup_value = value;
                        report.witness = Some(format!("monomial alpha {:?} at z {:?}", alpha.0, z));
                    }
                }
            }
        }
        TestFamily::ShiftedCauchyKernels {
            bounds,
            z_grid,
            w_angles,
        } => {
            for z in z_grid.points(k) {
                let scaled = m.domain().inverse_scale(&z)?;
                let boundary = scaled.distinguished_boundary();
                let w_points: Vec<Vec<Complex64>> = boundary
                    .factors()
                    .iter()
                    .map(|circles| {
                        let mut pts = Vec::new();
                        for c in circles {
                            for a in 0..*w_angles {
                                let theta = 2.0 * std::f64::consts::PI * (a as f64 + 0.5)
                                    / *w_angles as f64;
                                pts.push(c.center + c.radius * c64(theta.cos(), theta.sin()));
                            }
                        }
                        pts
                    })
                    .collect();
                let shape: Vec<usize> = w_points.iter().map(Vec::len).collect();
                let total: usize = shape.iter().product();
                for flat in 0..total {
                    let idx = unflatten(&shape, flat);
                    let w: Vec<Complex64> = idx
                        .iter()
                        .enumerate()
                        .map(|(j, &kk)| w_points[j][kk])
                        .collect();
                    for alpha in bounds.iter() {
                        let weight = delta.weight(alpha.order())?;
                        let value =
                            probe_apply_kernel(m, &z, &w, &alpha, weight, &eval_points, params)?;
                        report.family_size += 1;
                        if value > report.sup_value {
                            report.sup_value = value;
                            report.witness =
                                Some(format!("kernel alpha {:?}, z {:?}, w {:?}", alpha.0, z, w));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `sup over the eval grid of |M h|` for one shifted Cauchy kernel
/// `h(zeta) = weight / prod_j (w_j - zeta_j/z_j)^(alpha_j+1)`.
fn probe_apply_kernel(
    m: &Multiplier,
    z: &Point,
    w: &[Complex64],
    alpha: &MultiIndex,
    weight: f64,
    eval_points: &[Point],
    params: &EngineParams,
) -> Result<f64> {
    let dim = m.dim();
    let z_coords = z.coords().to_vec();
    let w_coords = w.to_vec();
    let powers: Vec<u32> = alpha.0.iter().map(|&a| a as u32 + 1).collect();
    let h = FnEval::new(dim, move |zeta: &[Complex64]| {
        let mut acc = c64(weight, 0.0);
        for j in 0..zeta.len() {
            acc *= (w_coords[j] - zeta[j] / z_coords[j]).powu(powers[j]).inv();
        }
        acc
    });
    let mut sup: f64 = 0.0;
    match m.provenance() {
        Provenance::FromLaurentGerm(germ) => {
            for p in eval_points {
                sup = sup.max(apply_laurent_germ(germ, &h, p, m.domain(), params)?.norm());
            }
        }
        Provenance::FromTaylorGerm(germ) => {
            for p in eval_points {
                sup = sup.max(apply_taylor_germ(germ, &h, p, m.domain(), params)?.norm());
            }
        }
        Provenance::FromFunctional(_) | Provenance::FromSequence => {
            // truncate h to the sequence window and act coefficientwise
            let radii: Vec<f64> = m
                .domain()
                .factors()
                .iter()
                .map(|f| match f {
                    crate::domains::PlanarFactor::Disc { center, radius } => {
                        0.8 * (radius - center.norm())
                    }
                    crate::domains::PlanarFactor::Annulus { .. } => 0.0,
                })
                .collect();
            let nodes = params.nodes.unwrap_or_else(|| {
                quadrature::nodes_for_ratio(
                    0.8,
                    params.quad_target,
                    quadrature::default_nodes(m.bounds()),
                )
            });
            let origin = Point::new(vec![ZERO; dim]);
            let h_poly = quadrature::taylor_coefficients(&h, &origin, &radii, m.bounds(), nodes)?;
            let g = m.apply_sequence(&h_poly)?;
            for p in eval_points {
                sup = sup.max(g.eval(p)?.norm());
            }
        }
    }
    Ok(sup)
}
