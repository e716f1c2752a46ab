//! Coefficient multipliers on products of discs: the correspondence with
//! analytic functionals, the Laurent/Taylor symbol germs, the explicit
//! contour-integral application formulas, composition, and evaluation on
//! the coordinate hyperplanes.
//!
//! The multiplier sequence on a truncation box is the single source of
//! truth for "which multiplier": the coefficientwise action it defines is
//! the brute-force oracle every integral formula is checked against.

use num_complex::Complex64;

use crate::domains::{PlanarFactor, ProductDomain};
use crate::duality::{AnalyticFunctional, Germ};
use crate::error::{Error, Result};
use crate::quadrature::{self, CircleGrid};
use crate::series::{Evaluate, MultiIndex, Point, TaylorPoly, TruncationBox};
use crate::tensor::{self, c64, pairwise_sum, ONE, ZERO};

/// Tuning knobs for the quadrature-backed operations.
#[derive(Debug, Clone)]
pub struct EngineParams {
    /// Per-circle node override; `None` picks counts from the singularity
    /// ratio of each placement.
    pub nodes: Option<usize>,
    /// Interpolation exponent for separating-circle radii.
    pub margin: f64,
    /// Sampling grid for the carrier-membership test, per factor.
    pub membership_radii: usize,
    pub membership_angles: usize,
    /// Target for the geometric quadrature error when choosing node counts.
    pub quad_target: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            nodes: None,
            margin: 0.5,
            membership_radii: 5,
            membership_angles: 8,
            quad_target: 1e-14,
        }
    }
}

/// One factor of a product rational function regular at the origin,
/// `p(w)/q(w)` with `q(0) != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorRationalFactor {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
}

impl TaylorRationalFactor {
    pub fn new(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        if denominator.first().copied().unwrap_or(ZERO) == ZERO {
            return Err(Error::InvalidGerm(
                "denominator must be nonzero at the origin".into(),
            ));
        }
        Ok(TaylorRationalFactor {
            numerator,
            denominator,
        })
    }

    fn horner(coeffs: &[Complex64], w: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for c in coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        Self::horner(&self.numerator, w) / Self::horner(&self.denominator, w)
    }

    /// Lower bound on the modulus of denominator roots: the factor is
    /// holomorphic on the open disc of this radius. Exact for degrees one
    /// and two, a reciprocal Cauchy bound above that.
    pub fn regular_radius(&self) -> f64 {
        let deg = match self.denominator.iter().rposition(|c| *c != ZERO) {
            Some(0) | None => return f64::INFINITY,
            Some(d) => d,
        };
        let q = &self.denominator;
        match deg {
            1 => (q[0] / q[1]).norm(),
            2 => {
                let disc = (q[1] * q[1] - 4.0 * q[0] * q[2]).sqrt();
                let r1 = ((-q[1] + disc) / (2.0 * q[2])).norm();
                let r2 = ((-q[1] - disc) / (2.0 * q[2])).norm();
                r1.min(r2)
            }
            _ => {
                let max_ratio = q[1..=deg]
                    .iter()
                    .map(|c| c.norm() / q[0].norm())
                    .fold(0.0, f64::max);
                1.0 / (1.0 + max_ratio)
            }
        }
    }
}

#[derive(Clone)]
enum TaylorBackend {
    /// truncated expansion at the origin
    Head(TaylorPoly),
    /// `prod_j p_j(w_j)/q_j(w_j)`, `q_j(0) != 0`
    RationalProduct(Vec<TaylorRationalFactor>),
}

impl std::fmt::Debug for TaylorBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaylorBackend::Head(p) => write!(f, "Head(box {:?})", p.bounds().degrees()),
            TaylorBackend::RationalProduct(r) => write!(f, "RationalProduct({} factors)", r.len()),
        }
    }
}

/// A germ of a holomorphic function at the origin: the Taylor-side symbol
/// of a multiplier. Factor `j` is holomorphic for `|w_j| < regular_radii[j]`.
#[derive(Debug, Clone)]
pub struct TaylorGerm {
    dim: usize,
    backend: TaylorBackend,
    regular_radii: Vec<f64>,
}

impl TaylorGerm {
    /// Truncated expansion with the given coefficient tensor; entire, so the
    /// regular radii are infinite.
    pub fn head(poly: TaylorPoly) -> Self {
        let dim = poly.dim();
        TaylorGerm {
            dim,
            backend: TaylorBackend::Head(poly),
            regular_radii: vec![f64::INFINITY; dim],
        }
    }

    pub fn rational_product(factors: Vec<TaylorRationalFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGerm(
                "need at least one rational factor".into(),
            ));
        }
        let regular_radii = factors.iter().map(|f| f.regular_radius()).collect();
        Ok(TaylorGerm {
            dim: factors.len(),
            backend: TaylorBackend::RationalProduct(factors),
            regular_radii,
        })
    }

    /// `prod_j 1/(1 - c_j w_j)`: the Taylor symbol of the dilation by `c`.
    pub fn geometric(c: &[Complex64]) -> Result<Self> {
        TaylorGerm::rational_product(
            c.iter()
                .map(|&cj| TaylorRationalFactor::new(vec![ONE], vec![ONE, -cj]))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regular_radii(&self) -> &[f64] {
        &self.regular_radii
    }

    /// Taylor coefficients over the box by extraction on polycircles placed
    /// at three quarters of the regular radius.
    pub fn coefficients(
        &self,
        bounds: &TruncationBox,
        params: &EngineParams,
    ) -> Result<Vec<Complex64>> {
        Ok(self.extraction(bounds, params)?.0)
    }

    /// Extraction plus the reciprocal radii and sample sup that bound the
    /// per-coefficient read-out noise.
    fn extraction(
        &self,
        bounds: &TruncationBox,
        params: &EngineParams,
    ) -> Result<(Vec<Complex64>, Vec<f64>, f64)> {
        if let TaylorBackend::Head(poly) = &self.backend {
            // exact read-off, padded with zeros outside the stored box
            let mut out = vec![ZERO; bounds.len()];
            for (flat, slot) in out.iter_mut().enumerate() {
                let alpha = bounds.alpha_at(flat);
                if poly.bounds().contains(&alpha) {
                    *slot = poly.coeff(&alpha)?;
                }
            }
            return Ok((out, vec![0.0; self.dim], 0.0));
        }
        let radii: Vec<f64> = self
            .regular_radii
            .iter()
            .map(|&r| if r.is_finite() { 0.75 * r } else { 1.0 })
            .collect();
        let ratio = radii
            .iter()
            .zip(&self.regular_radii)
            .map(|(&r, &reg)| if reg.is_finite() { r / reg } else { 0.0 })
            .fold(0.0, f64::max);
        let nodes = params.nodes.unwrap_or_else(|| {
            quadrature::nodes_for_ratio(
                ratio,
                params.quad_target,
                quadrature::default_nodes(bounds),
            )
        });
        let origin = Point::new(vec![ZERO; self.dim]);
        let (poly, sup) =
            quadrature::taylor_coefficients_with_sup(self, &origin, &radii, bounds, nodes)?;
        let inverse_radii = radii.iter().map(|r| 1.0 / r).collect();
        Ok((poly.coeffs().to_vec(), inverse_radii, sup))
    }
}

impl Evaluate for TaylorGerm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_at(&self, w: &[Complex64]) -> Complex64 {
        match &self.backend {
            TaylorBackend::Head(poly) => poly.eval_at(w),
            TaylorBackend::RationalProduct(factors) => {
                let mut acc = ONE;
                for (f, &x) in factors.iter().zip(w) {
                    acc *= f.eval(x);
                }
                acc
            }
        }
    }
}

/// Zeroes quadrature dust: read-out entries whose modulus sits below the
/// per-index noise bound `32 * eps * sup * prod_j scale_j^(alpha_j+1)` are
/// structural zeros contaminated by sample rounding, and downstream
/// relative comparisons need them exact. Genuine geometrically decaying
/// entries stay orders of magnitude above this bound because their size
/// tracks the same `scale^alpha` growth.
fn snap_read_out_noise(seq: &mut [Complex64], bounds: &TruncationBox, scales: &[f64], sup: f64) {
    let base = 32.0 * f64::EPSILON * sup;
    for (flat, v) in seq.iter_mut().enumerate() {
        let alpha = bounds.alpha_at(flat);
        let mut threshold = base;
        for (j, &a) in alpha.0.iter().enumerate() {
            threshold *= scales[j].powi(a as i32 + 1);
        }
        if v.norm() <= threshold {
            *v = ZERO;
        }
    }
}

/// Where a multiplier's sequence came from; germ and functional provenances
/// keep the data needed for the integral application paths.
#[derive(Debug, Clone)]
pub enum Provenance {
    FromFunctional(AnalyticFunctional),
    FromLaurentGerm(Germ),
    FromTaylorGerm(TaylorGerm),
    FromSequence,
}

/// A coefficient multiplier on a product of discs, truncated to a box.
#[derive(Debug, Clone)]
pub struct Multiplier {
    domain: ProductDomain,
    bounds: TruncationBox,
    sequence: Vec<Complex64>,
    provenance: Provenance,
}

impl Multiplier {
    fn check_domain(domain: &ProductDomain, bounds: &TruncationBox) -> Result<()> {
        if !domain.is_runge() {
            return Err(Error::NonRungeDomain);
        }
        if domain.dim() != bounds.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: bounds.dim(),
            });
        }
        Ok(())
    }

    /// Builds a multiplier directly from its eigenvalue sequence.
    pub fn from_sequence(
        domain: ProductDomain,
        bounds: TruncationBox,
        sequence: Vec<Complex64>,
    ) -> Result<Self> {
        Self::check_domain(&domain, &bounds)?;
        if sequence.len() != bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                got: sequence.len(),
            });
        }
        if let Some(index) = sequence
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFiniteCoefficient { index });
        }
        Ok(Multiplier {
            domain,
            bounds,
            sequence,
            provenance: Provenance::FromSequence,
        })
    }

    /// The identity multiplier (all eigenvalues one).
    pub fn identity(domain: ProductDomain, bounds: TruncationBox) -> Result<Self> {
        let len = bounds.len();
        Multiplier::from_sequence(domain, bounds, vec![ONE; len])
    }

    /// The dilation `f -> f(c .)`, with eigenvalues `c^alpha`.
    pub fn dilation(domain: ProductDomain, bounds: TruncationBox, c: &[Complex64]) -> Result<Self> {
        Self::check_domain(&domain, &bounds)?;
        let tables: Vec<Vec<Complex64>> = c
            .iter()
            .zip(bounds.degrees())
            .map(|(&cj, &d)| tensor::power_column(cj, d))
            .collect();
        let mut sequence = Vec::with_capacity(bounds.len());
        for alpha in bounds.iter() {
            let mut v = ONE;
            for (j, &a) in alpha.0.iter().enumerate() {
                v *= tables[j][a];
            }
            sequence.push(v);
        }
        Multiplier::from_sequence(domain, bounds, sequence)
    }

    /// Builds the multiplier represented by an analytic functional: the
    /// eigenvalue sequence is the functional's moment sequence. The kernel
    /// must be carriable inside `z^-1 * domain` for sampled `z`.
    pub fn from_functional(
        domain: ProductDomain,
        bounds: TruncationBox,
        functional: AnalyticFunctional,
        params: &EngineParams,
    ) -> Result<Self> {
        Self::check_domain(&domain, &bounds)?;
        check_membership(functional.kernel().singular_radii(), &domain, params)?;
        let mut sequence = functional.moments(&bounds)?;
        let scales = functional.contour().enclosing_radii();
        let sup = functional.kernel_sup();
        snap_read_out_noise(&mut sequence, &bounds, &scales, sup);
        Ok(Multiplier {
            domain,
            bounds,
            sequence,
            provenance: Provenance::FromFunctional(functional),
        })
    }

    /// Builds a multiplier from its Laurent symbol: a germ at infinity whose
    /// expansion coefficients are the eigenvalues.
    pub fn from_laurent_germ(
        domain: ProductDomain,
        bounds: TruncationBox,
        germ: Germ,
        params: &EngineParams,
    ) -> Result<Self> {
        Self::check_domain(&domain, &bounds)?;
        if germ.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: germ.dim(),
            });
        }
        check_membership(germ.singular_radii(), &domain, params)?;
        // Hug the singular region: a radius tied to the singular radius
        // keeps the relative read-out noise flat across the whole box.
        let radii: Vec<f64> = germ
            .singular_radii()
            .iter()
            .map(|&s| if s > 0.0 { 1.25 * s } else { 1.0 })
            .collect();
        let nodes = params.nodes.unwrap_or_else(|| {
            quadrature::nodes_for_ratio(0.8, params.quad_target, quadrature::default_nodes(&bounds))
        });
        let (mut sequence, sup) = germ.moments_with_sup(&radii, &bounds, nodes)?;
        snap_read_out_noise(&mut sequence, &bounds, &radii, sup);
        Ok(Multiplier {
            domain,
            bounds,
            sequence,
            provenance: Provenance::FromLaurentGerm(germ),
        })
    }

    /// Builds a multiplier from its Taylor symbol: a germ at the origin
    /// whose Taylor coefficients are the eigenvalues.
    pub fn from_taylor_germ(
        domain: ProductDomain,
        bounds: TruncationBox,
        germ: TaylorGerm,
        params: &EngineParams,
    ) -> Result<Self> {
        Self::check_domain(&domain, &bounds)?;
        if germ.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: germ.dim(),
            });
        }
        // the Taylor-side regular radii pair with Laurent-side singular
        // radii by reciprocal
        let singular: Vec<f64> = germ
            .regular_radii()
            .iter()
            .map(|&r| if r.is_finite() { 1.0 / r } else { 0.0 })
            .collect();
        check_membership(&singular, &domain, params)?;
        let (mut sequence, scales, sup) = germ.extraction(&bounds, params)?;
        snap_read_out_noise(&mut sequence, &bounds, &scales, sup);
        Ok(Multiplier {
            domain,
            bounds,
            sequence,
            provenance: Provenance::FromTaylorGerm(germ),
        })
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn bounds(&self) -> &TruncationBox {
        &self.bounds
    }

    pub fn sequence(&self) -> &[Complex64] {
        &self.sequence
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn eigenvalue(&self, alpha: &MultiIndex) -> Result<Complex64> {
        Ok(self.sequence[self.bounds.flat_index(alpha)?])
    }

    /// The coefficientwise action `f_alpha -> m_alpha * f_alpha`: the
    /// brute-force oracle for both integral formulas. Boxes intersect.
    pub fn apply_sequence(&self, f: &TaylorPoly) -> Result<TaylorPoly> {
        let bounds = self.bounds.intersect(f.bounds())?;
        let mut coeffs = Vec::with_capacity(bounds.len());
        for alpha in bounds.iter() {
            coeffs.push(self.eigenvalue(&alpha)? * f.coeff(&alpha)?);
        }
        TaylorPoly::new(bounds, coeffs)
    }

    /// The representing functional `f -> (M f)(1, ..., 1)`: a quadrature
    /// functional whose kernel is the truncated Laurent symbol, with unit
    /// contour circles. Its moments reproduce the sequence as exact
    /// residues. The domain must contain the all-ones point.
    pub fn representing_functional(&self) -> Result<AnalyticFunctional> {
        if !self.domain.contains(&Point::ones(self.dim()))? {
            return Err(Error::OnePointNotInDomain);
        }
        let kernel = Germ::laurent_tail(self.bounds.clone(), self.sequence.clone())?;
        let circles = self
            .domain
            .factors()
            .iter()
            .map(|_| vec![crate::domains::Circle::new(ZERO, 1.0, 1)])
            .collect();
        let contour = crate::domains::PolyContour::new(circles);
        let nodes = quadrature::default_nodes(&self.bounds);
        AnalyticFunctional::new(kernel, contour, nodes)
    }

    /// The Laurent symbol: truncated expansion at infinity with the
    /// sequence as coefficients.
    pub fn laurent_symbol(&self) -> Result<Germ> {
        Germ::laurent_tail(self.bounds.clone(), self.sequence.clone())
    }

    /// The Taylor symbol: truncated expansion at the origin with the
    /// sequence as coefficients.
    pub fn taylor_symbol(&self) -> Result<TaylorGerm> {
        Ok(TaylorGerm::head(TaylorPoly::new(
            self.bounds.clone(),
            self.sequence.clone(),
        )?))
    }

    /// Composition of multipliers: the coefficientwise product of the
    /// sequences on the intersected box.
    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        let bounds = self.bounds.intersect(&other.bounds)?;
        let mut sequence = Vec::with_capacity(bounds.len());
        for alpha in bounds.iter() {
            sequence.push(self.eigenvalue(&alpha)? * other.eigenvalue(&alpha)?);
        }
        Multiplier::from_sequence(self.domain.clone(), bounds, sequence)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Evaluates `(M f)(z)` for `z` in the domain. Off the coordinate
    /// hyperplanes this delegates to the germ formula when the provenance
    /// carries one and to the coefficientwise path otherwise; on the
    /// hyperplanes it integrates the off-hyperplane values over a small
    /// polycircle around `z`.
    pub fn evaluate_at(
        &self,
        f: &TaylorPoly,
        z: &Point,
        params: &EngineParams,
    ) -> Result<Complex64> {
        if !self.domain.contains(z)? {
            return Err(Error::PointOutsideDomain {
                z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
            });
        }
        if z.on_hyperplane() {
            return self.hyperplane_evaluate(f, z, params);
        }
        match &self.provenance {
            Provenance::FromLaurentGerm(germ) => {
                apply_laurent_germ(germ, f, z, &self.domain, params)
            }
            Provenance::FromTaylorGerm(germ) => apply_taylor_germ(germ, f, z, &self.domain, params),
            Provenance::FromFunctional(_) | Provenance::FromSequence => {
                self.apply_sequence(f)?.eval(z)
            }
        }
    }

    /// Evaluation at a hyperplane point by the Cauchy mean over a small
    /// polycircle whose distinguished boundary avoids the hyperplanes: the
    /// integrand is supplied by the off-hyperplane path.
    fn hyperplane_evaluate(
        &self,
        f: &TaylorPoly,
        z: &Point,
        params: &EngineParams,
    ) -> Result<Complex64> {
        let torus_nodes = params.nodes.unwrap_or(64);
        let mut grids = Vec::with_capacity(self.dim());
        for (j, (&zj, factor)) in z.coords().iter().zip(self.domain.factors()).enumerate() {
            let mut radius = 0.5 * factor.boundary_distance(zj);
            if radius <= 0.0 {
                return Err(Error::PointOutsideDomain {
                    z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
                });
            }
            // keep the circle off the hyperplane |w_j| = 0
            if (zj.norm() - radius).abs() < 0.05 * radius {
                radius *= 0.75;
            }
            let circle = crate::domains::Circle::new(zj, radius, 1);
            let mut grid = CircleGrid::new(circle, torus_nodes, 0.0)?;
            if grid.nodes.iter().any(|w| w.norm() < 1e-12 * radius) {
                grid = CircleGrid::new(circle, torus_nodes, 0.5)?;
            }
            let _ = j;
            grids.push(grid);
        }
        // off-hyperplane values of M f on the torus
        let torus_points: Vec<Vec<Complex64>> = {
            let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
            let total: usize = shape.iter().product();
            (0..total)
                .map(|flat| {
                    let idx = tensor::unflatten(&shape, flat);
                    idx.iter()
                        .enumerate()
                        .map(|(j, &k)| grids[j].nodes[k])
                        .collect()
                })
                .collect()
        };
        let values: Vec<Complex64> = match &self.provenance {
            Provenance::FromLaurentGerm(germ) => {
                let pts: Vec<Point> = torus_points.iter().map(|w| Point::new(w.clone())).collect();
                apply_laurent_batch(germ, f, &pts, &self.domain, params)?
            }
            Provenance::FromTaylorGerm(germ) => {
                let pts: Vec<Point> = torus_points.iter().map(|w| Point::new(w.clone())).collect();
                apply_taylor_batch(germ, f, &pts, &self.domain, params)?
            }
            Provenance::FromFunctional(_) | Provenance::FromSequence => {
                let g = self.apply_sequence(f)?;
                torus_points.iter().map(|w| g.eval_at(w)).collect()
            }
        };
        // Cauchy mean: (1/2 pi i)^n integral of g(w)/prod(w_j - z_j)
        let mut acc: Vec<Complex64> = values;
        let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        for (flat, v) in acc.iter_mut().enumerate() {
            let idx = tensor::unflatten(&shape, flat);
            for (j, &k) in idx.iter().enumerate() {
                let w = grids[j].nodes[k];
                *v *= grids[j].weights[k] * (w - z.coords()[j]).inv();
            }
        }
        Ok(pairwise_sum(&acc))
    }

    /// Checks the eigenvector identity `(M zeta^alpha)(z) = m_alpha z^alpha`
    /// at the sampled points, driving the full evaluation path.
    pub fn eigencheck(
        &self,
        alpha: &MultiIndex,
        z_samples: &[Point],
        params: &EngineParams,
    ) -> Result<EigenReport> {
        let monomial = TaylorPoly::monomial(self.bounds.clone(), alpha)?;
        let m = self.eigenvalue(alpha)?;
        let mut report = EigenReport::default();
        for z in z_samples {
            let measured = self.evaluate_at(&monomial, z, params)?;
            let expected = m * alpha.monomial(z.coords());
            report.record(alpha, z, measured, expected);
        }
        Ok(report)
    }

    /// Sweeps the eigenvector identity over the whole box at every sampled
    /// point, sharing one kernel sample tensor per point. For germ and
    /// functional provenances the measured side is the contour integral of
    /// the dilated monomials, with the common factor `z^alpha` cancelled
    /// against the expected side.
    pub fn eigencheck_box(
        &self,
        z_samples: &[Point],
        params: &EngineParams,
    ) -> Result<EigenReport> {
        let mut report = EigenReport::default();
        for z in z_samples {
            if z.on_hyperplane() {
                return Err(Error::HyperplanePoint {
                    coordinate: z.coords().iter().position(|c| *c == ZERO).unwrap_or(0),
                });
            }
            if !self.domain.contains(z)? {
                return Err(Error::PointOutsideDomain {
                    z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
                });
            }
            let measured = match &self.provenance {
                Provenance::FromLaurentGerm(germ) => {
                    let scaled = self.domain.inverse_scale(z)?;
                    let grids = laurent_contour_grids(
                        germ.singular_radii(),
                        &scaled,
                        None,
                        &self.bounds,
                        params,
                    )?;
                    quadrature::moments_on_grids(germ, &grids, &self.bounds)?
                }
                Provenance::FromTaylorGerm(germ) => {
                    taylor_measured_sequence(germ, z, &self.domain, &self.bounds, params)?
                }
                Provenance::FromFunctional(functional) => functional.moments(&self.bounds)?,
                Provenance::FromSequence => self.sequence.clone(),
            };
            for (flat, (&got, &want)) in measured.iter().zip(&self.sequence).enumerate() {
                let alpha = self.bounds.alpha_at(flat);
                report.record(&alpha, z, got, want);
            }
        }
        Ok(report)
    }
}

/// Outcome of an eigenvector check: the worst deviation and where it
/// happened. Entries with a nonzero expected value contribute relative
/// error; structurally zero entries contribute the absolute residual.
#[derive(Debug, Clone, Default)]
pub struct EigenReport {
    pub max_error: f64,
    pub worst_alpha: Option<MultiIndex>,
    pub worst_z: Option<Point>,
    pub entries: usize,
}

impl EigenReport {
    fn record(&mut self, alpha: &MultiIndex, z: &Point, measured: Complex64, expected: Complex64) {
        let err = if expected == ZERO {
            measured.norm()
        } else {
            (measured - expected).norm() / expected.norm()
        };
        self.entries += 1;
        if err > self.max_error {
            self.max_error = err;
            self.worst_alpha = Some(alpha.clone());
            self.worst_z = Some(z.clone());
        }
    }

    pub fn merge(&mut self, other: &EigenReport) {
        self.entries += other.entries;
        if other.max_error > self.max_error {
            self.max_error = other.max_error;
            self.worst_alpha = other.worst_alpha.clone();
            self.worst_z = other.worst_z.clone();
        }
    }
}

/// Verifies that a germ can be carried inside `z^-1 * domain` for a sampled
/// grid of `z` off the hyperplanes: a finite proxy for the quantifier over
/// the whole domain. `singular` are per-factor singular radii.
fn check_membership(singular: &[f64], domain: &ProductDomain, params: &EngineParams) -> Result<()> {
    for z in membership_grid(domain, params.membership_radii, params.membership_angles) {
        let scaled = domain.inverse_scale(&z)?;
        for (j, factor) in scaled.factors().iter().enumerate() {
            let ok = match factor {
                PlanarFactor::Disc { center, radius } => singular[j] < radius - center.norm(),
                PlanarFactor::Annulus { .. } => false,
            };
            if !ok {
                return Err(Error::MembershipSampleFailure {
                    z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
                    reason: format!(
                        "factor {j}: singular radius {} does not fit inside the scaled factor {factor:?}",
                        singular[j]
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Deterministic sampling grid over the domain off the hyperplanes: per
/// factor, `radii x angles` points pushed toward the boundary, tensored
/// across factors.
fn membership_grid(domain: &ProductDomain, radii: usize, angles: usize) -> Vec<Point> {
    let factor_points: Vec<Vec<Complex64>> = domain
        .factors()
        .iter()
        .map(|factor| {
            let mut pts = Vec::with_capacity(radii * angles);
            for i in 0..radii {
                let frac = 0.95 * (i + 1) as f64 / radii as f64;
                for k in 0..angles {
                    let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / angles as f64;
                    let dir = c64(theta.cos(), theta.sin());
                    let p = match factor {
                        PlanarFactor::Disc { center, radius } => center + frac * radius * dir,
                        PlanarFactor::Annulus { r_in, r_out } => {
                            let r = r_in + frac * (r_out - r_in);
                            r * dir
                        }
                    };
                    pts.push(p);
                }
            }
            pts
        })
        .collect();
    let shape: Vec<usize> = factor_points.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let mut out = Vec::new();
    for flat in 0..total {
        let idx = tensor::unflatten(&shape, flat);
        let coords: Vec<Complex64> = idx
            .iter()
            .enumerate()
            .map(|(j, &k)| factor_points[j][k])
            .collect();
        if coords.iter().all(|c| *c != ZERO) {
            out.push(Point::new(coords));
        }
    }
    out
}

/// Separating circle radius inside a scaled disc factor for a singular disc
/// of radius `s` around the origin. Radii hug the singular region (at most
/// 25% beyond it): this keeps the relative quadrature noise flat in the
/// moment index, at the price of a fixed geometric rate covered by the node
/// count.
fn laurent_radius(s: f64, factor: &PlanarFactor, margin: f64) -> Result<f64> {
    let avail = match factor {
        PlanarFactor::Disc { center, radius } => radius - center.norm(),
        PlanarFactor::Annulus { .. } => {
            return Err(Error::NonRungeDomain);
        }
    };
    if s >= avail {
        return Err(Error::ContourPlacement(format!(
            "singular radius {s} does not fit inside the scaled factor (room {avail})"
        )));
    }
    if s > 0.0 {
        Ok((s * (avail / s).powf(margin)).min(1.25 * s))
    } else {
        Ok(0.5 * avail)
    }
}

/// Builds the per-factor contour grids for the Laurent application formula
/// inside `scaled = z^-1 * domain`.
fn laurent_contour_grids(
    singular: &[f64],
    scaled: &ProductDomain,
    degree_hint: Option<&[usize]>,
    bounds: &TruncationBox,
    params: &EngineParams,
) -> Result<Vec<Vec<CircleGrid>>> {
    let mut grids = Vec::with_capacity(scaled.dim());
    for (j, factor) in scaled.factors().iter().enumerate() {
        let r = laurent_radius(singular[j], factor, params.margin)?;
        let ratio = if singular[j] > 0.0 {
            singular[j] / r
        } else {
            0.0
        };
        let floor = {
            let d = degree_hint
                .map(|h| h[j])
                .unwrap_or(0)
                .max(bounds.degrees()[j]);
            (2 * (d + 1)).max(64).next_power_of_two()
        };
        let nodes = params
            .nodes
            .unwrap_or_else(|| quadrature::nodes_for_ratio(ratio, params.quad_target, floor));
        grids.push(vec![CircleGrid::new(
            crate::domains::Circle::new(ZERO, r, 1),
            nodes,
            0.0,
        )?]);
    }
    Ok(grids)
}

/// Applies a multiplier through its Laurent symbol: the normalized contour
/// integral of `f(z * zeta) * psi(zeta)` over circles separating the
/// symbol's singularities from the complement of `z^-1 * domain`.
pub fn apply_laurent_germ(
    psi: &Germ,
    f: &dyn Evaluate,
    z: &Point,
    domain: &ProductDomain,
    params: &EngineParams,
) -> Result<Complex64> {
    Ok(apply_laurent_batch_impl(psi, f, std::slice::from_ref(z), domain, params)?[0])
}

/// Batch variant sharing one symbol sample tensor across all points (the
/// contour is placed to be valid for every point at once).
pub fn apply_laurent_batch(
    psi: &Germ,
    f: &dyn Evaluate,
    zs: &[Point],
    domain: &ProductDomain,
    params: &EngineParams,
) -> Result<Vec<Complex64>> {
    apply_laurent_batch_impl(psi, f, zs, domain, params)
}

fn apply_laurent_batch_impl(
    psi: &Germ,
    f: &dyn Evaluate,
    zs: &[Point],
    domain: &ProductDomain,
    params: &EngineParams,
) -> Result<Vec<Complex64>> {
    if zs.is_empty() {
        return Ok(Vec::new());
    }
    let dim = domain.dim();
    if psi.dim() != dim || f.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi.dim(),
        });
    }
    for z in zs {
        if z.on_hyperplane() {
            return Err(Error::HyperplanePoint {
                coordinate: z.coords().iter().position(|c| *c == ZERO).unwrap_or(0),
            });
        }
        if !domain.contains(z)? {
            return Err(Error::PointOutsideDomain {
                z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
            });
        }
    }
    // one contour valid inside z^-1 * domain for every z in the batch:
    // intersect the scaled factors over the batch
    let worst = worst_scaled_domain(domain, zs)?;
    let hint = f.degree_hint();
    let bounds_floor = TruncationBox::new(vec![0; dim]);
    let grids = laurent_contour_grids(
        psi.singular_radii(),
        &worst,
        hint.as_deref(),
        &bounds_floor,
        params,
    )?;
    let axes: Vec<Vec<Complex64>> = grids.iter().map(|g| g[0].nodes.clone()).collect();
    let mut weighted = psi.sample_grid(&axes);
    if weighted
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::ContourPlacement(
            "symbol not finite on a contour node".into(),
        ));
    }
    let shape: Vec<usize> = grids.iter().map(|g| g[0].len()).collect();
    for (flat, v) in weighted.iter_mut().enumerate() {
        let idx = tensor::unflatten(&shape, flat);
        for (j, &k) in idx.iter().enumerate() {
            *v *= grids[j][0].weights[k];
        }
    }
    if let Some(poly) = f.as_taylor() {
        // the quadrature sum factors exactly through the monomial basis:
        // sum_k f(z*zeta_k) psi_k u_k = sum_alpha f_alpha z^alpha *
        //   (sum_k zeta_k^alpha psi_k u_k)
        let mut measured = weighted;
        for (j, grid) in grids.iter().enumerate() {
            let table = tensor::power_rows(&grid[0].nodes, poly.bounds().degrees()[j]);
            measured = tensor::contract_leading_to_back(&measured, grid[0].len(), &table);
        }
        for (m, c) in measured.iter_mut().zip(poly.coeffs()) {
            *m *= c;
        }
        let combined = TaylorPoly::new(poly.bounds().clone(), measured)?;
        return zs.iter().map(|z| combined.eval(z)).collect();
    }
    let mut out = Vec::with_capacity(zs.len());
    for z in zs {
        let scaled_axes: Vec<Vec<Complex64>> = axes
            .iter()
            .zip(z.coords())
            .map(|(nodes, &zj)| nodes.iter().map(|&n| zj * n).collect())
            .collect();
        let mut samples = f.sample_grid(&scaled_axes);
        if samples
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::ContourPlacement(
                "argument not finite on a dilated contour node".into(),
            ));
        }
        for (s, w) in samples.iter_mut().zip(&weighted) {
            *s *= w;
        }
        out.push(pairwise_sum(&samples));
    }
    Ok(out)
}

/// The scaled domain `z^-1 * domain` shrunk over a batch of points: per
/// factor, the largest origin-centered disc fitting inside all of them.
fn worst_scaled_domain(domain: &ProductDomain, zs: &[Point]) -> Result<ProductDomain> {
    let mut rooms = vec![f64::INFINITY; domain.dim()];
    for z in zs {
        let scaled = domain.inverse_scale(z)?;
        for (room, factor) in rooms.iter_mut().zip(scaled.factors()) {
            let avail = match factor {
                PlanarFactor::Disc { center, radius } => radius - center.norm(),
                PlanarFactor::Annulus { .. } => return Err(Error::NonRungeDomain),
            };
            *room = room.min(avail);
        }
    }
    ProductDomain::new(
        rooms
            .into_iter()
            .map(|r| PlanarFactor::disc(ZERO, r))
            .collect::<Result<_>>()?,
    )
}

/// Applies a multiplier through its Taylor symbol: the reciprocal-contour
/// route. The circles have reciprocal radii and inherit the reversed
/// orientation from the substitution `zeta -> 1/u`; the `(-1)^n` prefactor
/// rides on top, and the two conventions cancel against the Laurent route.
pub fn apply_taylor_germ(
    psi_hat: &TaylorGerm,
    f: &dyn Evaluate,
    z: &Point,
    domain: &ProductDomain,
    params: &EngineParams,
) -> Result<Complex64> {
    Ok(apply_taylor_batch(psi_hat, f, std::slice::from_ref(z), domain, params)?[0])
}

/// Batch variant of [`apply_taylor_germ`] sharing one symbol sample tensor.
pub fn apply_taylor_batch(
    psi_hat: &TaylorGerm,
    f: &dyn Evaluate,
    zs: &[Point],
    domain: &ProductDomain,
    params: &EngineParams,
) -> Result<Vec<Complex64>> {
    if zs.is_empty() {
        return Ok(Vec::new());
    }
    let dim = domain.dim();
    if psi_hat.dim() != dim || f.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi_hat.dim(),
        });
    }
    for z in zs {
        if z.on_hyperplane() {
            return Err(Error::HyperplanePoint {
                coordinate: z.coords().iter().position(|c| *c == ZERO).unwrap_or(0),
            });
        }
        if !domain.contains(z)? {
            return Err(Error::PointOutsideDomain {
                z: z.coords().iter().map(|c| (c.re, c.im)).collect(),
            });
        }
    }
    let worst = worst_scaled_domain(domain, zs)?;
    // Laurent-side radii from the reciprocal pairing of the regular radii
    let singular: Vec<f64> = psi_hat
        .regular_radii()
        .iter()
        .map(|&r| if r.is_finite() { 1.0 / r } else { 0.0 })
        .collect();
    let hint = f.degree_hint();
    let mut grids = Vec::with_capacity(dim);
    for (j, factor) in worst.factors().iter().enumerate() {
        let big_r = laurent_radius(singular[j], factor, params.margin)?;
        // ratio toward the symbol's own singularities on the reciprocal side
        let ratio_outer = if psi_hat.regular_radii()[j].is_finite() {
            (1.0 / big_r) / psi_hat.regular_radii()[j]
        } else {
            0.0
        };
        let avail = match factor {
            PlanarFactor::Disc { center, radius } => radius - center.norm(),
            PlanarFactor::Annulus { .. } => return Err(Error::NonRungeDomain),
        };
        // ratio toward the region where f(z/u) stops being defined
        let ratio_inner = big_r / avail;
        let ratio = ratio_outer.max(ratio_inner);
        let floor = {
            let d = hint.as_deref().map(|h| h[j]).unwrap_or(0);
            (2 * (d + 1)).max(64).next_power_of_two()
        };
        let nodes = params
            .nodes
            .unwrap_or_else(|| quadrature::nodes_for_ratio(ratio, params.quad_target, floor));
        // reciprocal circle, inherited (clockwise) orientation
        grids.push(CircleGrid::new(
            crate::domains::Circle::new(ZERO, 1.0 / big_r, -1),
            nodes,
            0.0,
        )?);
    }
    let axes: Vec<Vec<Complex64>> = grids.iter().map(|g| g.nodes.clone()).collect();
    let mut weighted = psi_hat.sample_grid(&axes);
    if weighted
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::ContourPlacement(
            "symbol not finite on a contour node".into(),
        ));
    }
    let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
    // fold in weights and the 1/u kernel
    for (flat, v) in weighted.iter_mut().enumerate() {
        let idx = tensor::unflatten(&shape, flat);
        for (j, &k) in idx.iter().enumerate() {
            *v *= grids[j].weights[k] * grids[j].nodes[k].inv();
        }
    }
    let sign = if dim.is_multiple_of(2) { ONE } else { -ONE };
    if let Some(poly) = f.as_taylor() {
        // factor the quadrature sum through the monomial basis:
        // sum_k f(z/u_k) w_k = sum_alpha f_alpha z^alpha (sum_k u_k^-alpha w_k)
        let mut measured = weighted;
        for (j, grid) in grids.iter().enumerate() {
            let inv_nodes: Vec<Complex64> = grid.nodes.iter().map(|u| u.inv()).collect();
            let table = tensor::power_rows(&inv_nodes, poly.bounds().degrees()[j]);
            measured = tensor::contract_leading_to_back(&measured, grid.len(), &table);
        }
        for (m, c) in measured.iter_mut().zip(poly.coeffs()) {
            *m *= sign * c;
        }
        let combined = TaylorPoly::new(poly.bounds().clone(), measured)?;
        return zs.iter().map(|z| combined.eval(z)).collect();
    }
    let mut out = Vec::with_capacity(zs.len());
    for z in zs {
        let recip_axes: Vec<Vec<Complex64>> = axes
            .iter()
            .zip(z.coords())
            .map(|(nodes, &zj)| nodes.iter().map(|&u| zj / u).collect())
            .collect();
        let mut samples = f.sample_grid(&recip_axes);
        if samples
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::ContourPlacement(
                "argument not finite on a reciprocal contour node".into(),
            ));
        }
        for (s, w) in samples.iter_mut().zip(&weighted) {
            *s *= w;
        }
        out.push(sign * pairwise_sum(&samples));
    }
    Ok(out)
}

/// Measured eigenvalue sequence of a Taylor symbol at one point: the
/// reciprocal-contour integrals of the dilated monomials with the common
/// `z^alpha` factor cancelled.
fn taylor_measured_sequence(
    psi_hat: &TaylorGerm,
    z: &Point,
    domain: &ProductDomain,
    bounds: &TruncationBox,
    params: &EngineParams,
) -> Result<Vec<Complex64>> {
    // (M zeta^alpha)(z) = z^alpha * (-1)^n (1/2 pi i)^n
    //   integral of u^-alpha psi(u)/u du over the reciprocal contour;
    // read all alpha off one sample tensor by contracting with u^-alpha.
    let worst = worst_scaled_domain(domain, std::slice::from_ref(z))?;
    let singular: Vec<f64> = psi_hat
        .regular_radii()
        .iter()
        .map(|&r| if r.is_finite() { 1.0 / r } else { 0.0 })
        .collect();
    let dim = domain.dim();
    let mut grids = Vec::with_capacity(dim);
    for (j, factor) in worst.factors().iter().enumerate() {
        let big_r = laurent_radius(singular[j], factor, params.margin)?;
        let ratio_outer = if psi_hat.regular_radii()[j].is_finite() {
            (1.0 / big_r) / psi_hat.regular_radii()[j]
        } else {
            0.0
        };
        let avail = match factor {
            PlanarFactor::Disc { center, radius } => radius - center.norm(),
            PlanarFactor::Annulus { .. } => return Err(Error::NonRungeDomain),
        };
        let ratio = ratio_outer.max(big_r / avail);
        let floor = (2 * (bounds.degrees()[j] + 1)).max(64).next_power_of_two();
        let nodes = params
            .nodes
            .unwrap_or_else(|| quadrature::nodes_for_ratio(ratio, params.quad_target, floor));
        grids.push(CircleGrid::new(
            crate::domains::Circle::new(ZERO, 1.0 / big_r, -1),
            nodes,
            0.0,
        )?);
    }
    let axes: Vec<Vec<Complex64>> = grids.iter().map(|g| g.nodes.clone()).collect();
    let mut data = psi_hat.sample_grid(&axes);
    if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::ContourPlacement(
            "symbol not finite on a contour node".into(),
        ));
    }
    let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
    for (flat, v) in data.iter_mut().enumerate() {
        let idx = tensor::unflatten(&shape, flat);
        for (j, &k) in idx.iter().enumerate() {
            *v *= grids[j].weights[k] * grids[j].nodes[k].inv();
        }
    }
    for (j, grid) in grids.iter().enumerate() {
        let inv_nodes: Vec<Complex64> = grid.nodes.iter().map(|u| u.inv()).collect();
        let table = tensor::power_rows(&inv_nodes, bounds.degrees()[j]);
        data = tensor::contract_leading_to_back(&data, grid.len(), &table);
    }
    let sign = if dim.is_multiple_of(2) { ONE } else { -ONE };
    Ok(data.into_iter().map(|v| sign * v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{point_mass, MixtureTerm};

    fn bidisc(r: f64) -> ProductDomain {
        ProductDomain::polydisc(&[r, r]).unwrap()
    }

    fn mi(e: &[usize]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn test_poly_2d() -> TaylorPoly {
        TaylorPoly::from_terms(
            TruncationBox::new(vec![3, 3]),
            &[
                (mi(&[0, 0]), c64(0.7, -0.3)),
                (mi(&[1, 0]), c64(-1.0, 0.2)),
                (mi(&[1, 2]), c64(0.4, 0.9)),
                (mi(&[3, 1]), c64(0.1, -0.5)),
                (mi(&[2, 3]), c64(-0.6, 0.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sequence_action_identity_and_zero() {
        let f = test_poly_2d();
        let bounds = TruncationBox::new(vec![3, 3]);
        let id = Multiplier::identity(bidisc(1.0), bounds.clone()).unwrap();
        assert_eq!(id.apply_sequence(&f).unwrap(), f);
        let zero = Multiplier::from_sequence(bidisc(1.0), bounds.clone(), vec![ZERO; 16]).unwrap();
        assert_eq!(zero.apply_sequence(&f).unwrap(), TaylorPoly::zero(bounds));
    }

    #[test]
    fn dilation_sequence_action_matches_dilate() {
        let f = test_poly_2d();
        let c = [c64(0.4, 0.1), c64(-0.3, 0.2)];
        let m = Multiplier::dilation(bidisc(1.0), TruncationBox::new(vec![3, 3]), &c).unwrap();
        let dilated = f.dilate(&Point::new(c.to_vec())).unwrap();
        let applied = m.apply_sequence(&f).unwrap();
        for alpha in applied.bounds().iter() {
            let a = applied.coeff(&alpha).unwrap();
            let b = dilated.coeff(&alpha).unwrap();
            assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn sequence_of_first_index_order() {
        // m_alpha = alpha_1 leaves zeta_1 + zeta_1 zeta_2^2 unchanged
        let bounds = TruncationBox::new(vec![2, 2]);
        let mut seq = vec![ZERO; bounds.len()];
        for (flat, slot) in seq.iter_mut().enumerate() {
            let alpha = bounds.alpha_at(flat);
            *slot = c64(alpha[0] as f64, 0.0);
        }
        let m = Multiplier::from_sequence(bidisc(1.0), bounds.clone(), seq).unwrap();
        let f = TaylorPoly::from_terms(bounds, &[(mi(&[1, 0]), ONE), (mi(&[1, 2]), ONE)]).unwrap();
        assert_eq!(m.apply_sequence(&f).unwrap(), f);
    }

    #[test]
    fn non_runge_domains_are_refused() {
        let annulus = ProductDomain::new(vec![PlanarFactor::annulus(0.5, 2.0).unwrap()]).unwrap();
        assert!(matches!(
            Multiplier::identity(annulus, TruncationBox::new(vec![2])),
            Err(Error::NonRungeDomain)
        ));
    }

    #[test]
    fn laurent_germ_multiplier_is_dilation() {
        // psi = prod 1/(w_j - c_j) represents the dilation by c
        let c = [c64(0.4, 0.1), c64(0.3, -0.2)];
        let germ = Germ::product_poles(c.to_vec()).unwrap();
        let params = EngineParams::default();
        let bounds = TruncationBox::new(vec![8, 8]);
        let m = Multiplier::from_laurent_germ(bidisc(1.0), bounds.clone(), germ, &params).unwrap();
        let reference = Multiplier::dilation(bidisc(1.0), bounds, &c).unwrap();
        for (a, b) in m.sequence().iter().zip(reference.sequence()) {
            assert!((a - b).norm() <= 1e-11 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn membership_rejects_poles_outside_dilation_closure() {
        // a pole of modulus > 1 cannot be carried inside z^-1 * unit bidisc
        // for z near the boundary
        let germ = Germ::product_poles(vec![c64(1.3, 0.0), c64(0.2, 0.0)]).unwrap();
        let r = Multiplier::from_laurent_germ(
            bidisc(1.0),
            TruncationBox::new(vec![4, 4]),
            germ,
            &EngineParams::default(),
        );
        assert!(matches!(r, Err(Error::MembershipSampleFailure { .. })));
    }

    #[test]
    fn functional_multiplier_of_point_mass_is_dilation() {
        let c = Point::new(vec![c64(0.5, 0.2), c64(-0.4, 0.3)]);
        let t = point_mass(&c, &[0.85, 0.85], 256).unwrap();
        let bounds = TruncationBox::new(vec![10, 10]);
        let m =
            Multiplier::from_functional(bidisc(1.0), bounds.clone(), t, &EngineParams::default())
                .unwrap();
        let reference = Multiplier::dilation(bidisc(1.0), bounds, c.coords()).unwrap();
        for (a, b) in m.sequence().iter().zip(reference.sequence()) {
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn representing_functional_of_identity_is_point_evaluation_at_ones() {
        let bounds = TruncationBox::new(vec![4, 4]);
        let id = Multiplier::identity(bidisc(1.5), bounds.clone()).unwrap();
        let t = id.representing_functional().unwrap();
        // moments of delta_1 are all ones
        let m = t.moments(&bounds).unwrap();
        for v in &m {
            assert!((v - ONE).norm() <= 1e-12);
        }
        // and T h = h(1,...,1) for polynomials within the box
        let f = test_poly_2d();
        let expected = f.eval(&Point::ones(2)).unwrap();
        let got = t.act(&f).unwrap();
        assert!((got - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    }

    #[test]
    fn representing_functional_requires_ones_in_domain() {
        let id = Multiplier::identity(bidisc(1.0), TruncationBox::new(vec![2, 2])).unwrap();
        assert!(matches!(
            id.representing_functional(),
            Err(Error::OnePointNotInDomain)
        ));
    }

    #[test]
    fn sequence_roundtrip_through_functional() {
        // Phi(Theta(M)) reproduces the sequence
        let c = [c64(0.35, 0.2), c64(-0.25, 0.15)];
        let bounds = TruncationBox::new(vec![6, 6]);
        let m = Multiplier::dilation(bidisc(1.5), bounds.clone(), &c).unwrap();
        let t = m.representing_functional().unwrap();
        let back =
            Multiplier::from_functional(bidisc(1.5), bounds, t, &EngineParams::default()).unwrap();
        for (a, b) in back.sequence().iter().zip(m.sequence()) {
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn moment_roundtrip_through_multiplier() {
        // moments(Theta(Phi(T))) = moments(T)
        let kernel = Germ::pole_mixture(vec![
            MixtureTerm {
                coeff: c64(0.9, -0.1),
                poles: vec![c64(0.45, 0.1), c64(0.3, -0.3)],
            },
            MixtureTerm {
                coeff: c64(0.15, 0.1),
                poles: vec![c64(0.1, 0.05), c64(-0.12, 0.04)],
            },
        ])
        .unwrap();
        let contour = crate::domains::PolyContour::new(vec![
            vec![crate::domains::Circle::new(ZERO, 0.7, 1)],
            vec![crate::domains::Circle::new(ZERO, 0.65, 1)],
        ]);
        let t = AnalyticFunctional::new(kernel, contour, 256).unwrap();
        let bounds = TruncationBox::new(vec![6, 6]);
        let m1 = t.moments(&bounds).unwrap();
        let mult =
            Multiplier::from_functional(bidisc(1.5), bounds.clone(), t, &EngineParams::default())
                .unwrap();
        let back = mult.representing_functional().unwrap();
        let m2 = back.moments(&bounds).unwrap();
        let scale = m1.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in m1.iter().zip(&m2) {
            assert!((a - b).norm() <= 1e-9 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn laurent_application_is_dilation() {
        let c = [c64(0.45, 0.15), c64(-0.35, 0.2)];
        let germ = Germ::product_poles(c.to_vec()).unwrap();
        let f = test_poly_2d();
        let domain = bidisc(1.0);
        let params = EngineParams::default();
        for z in [
            Point::new(vec![c64(0.5, 0.1), c64(0.2, -0.6)]),
            Point::new(vec![c64(-0.7, 0.1), c64(0.4, 0.4)]),
        ] {
            let got = apply_laurent_germ(&germ, &f, &z, &domain, &params).unwrap();
            let cz = Point::new(c.iter().zip(z.coords()).map(|(&cj, &zj)| cj * zj).collect());
            let expected = f.eval(&cz).unwrap();
            assert!(
                (got - expected).norm() <= 1e-10 * (1.0 + expected.norm()),
                "z {z:?}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn laurent_application_of_pure_inverse_picks_constant_term() {
        // psi = 1/w has moment sequence (1, 0, 0, ...)
        let germ = Germ::laurent_tail(TruncationBox::new(vec![0]), vec![ONE]).unwrap();
        let domain = ProductDomain::polydisc(&[1.0]).unwrap();
        let f = TaylorPoly::from_terms(
            TruncationBox::new(vec![4]),
            &[(mi(&[0]), c64(0.8, -0.2)), (mi(&[3]), c64(1.5, 0.4))],
        )
        .unwrap();
        for z in [c64(0.3, 0.2), c64(-0.6, 0.1)] {
            let got = apply_laurent_germ(
                &germ,
                &f,
                &Point::new(vec![z]),
                &domain,
                &EngineParams::default(),
            )
            .unwrap();
            assert!((got - c64(0.8, -0.2)).norm() <= 1e-12, "z {z}: {got}");
        }
    }

    #[test]
    fn laurent_application_of_zero_is_zero() {
        let germ = Germ::laurent_tail(TruncationBox::new(vec![1]), vec![ZERO, ZERO]).unwrap();
        let domain = ProductDomain::polydisc(&[1.0]).unwrap();
        let f = TaylorPoly::all_ones(TruncationBox::new(vec![3]));
        let got = apply_laurent_germ(
            &germ,
            &f,
            &Point::new(vec![c64(0.5, 0.0)]),
            &domain,
            &EngineParams::default(),
        )
        .unwrap();
        assert!(got.norm() < 1e-15);
    }

    #[test]
    fn taylor_application_is_dilation() {
        // psi_hat = prod 1/(1 - c_j u_j) pairs with the dilation by c
        let c = [c64(0.45, 0.15), c64(-0.35, 0.2)];
        let germ = TaylorGerm::geometric(&c).unwrap();
        let f = test_poly_2d();
        let domain = bidisc(1.0);
        let params = EngineParams::default();
        for z in [
            Point::new(vec![c64(0.5, 0.1), c64(0.2, -0.6)]),
            Point::new(vec![c64(-0.7, 0.1), c64(0.4, 0.4)]),
        ] {
            let got = apply_taylor_germ(&germ, &f, &z, &domain, &params).unwrap();
            let cz = Point::new(c.iter().zip(z.coords()).map(|(&cj, &zj)| cj * zj).collect());
            let expected = f.eval(&cz).unwrap();
            assert!(
                (got - expected).norm() <= 1e-9 * (1.0 + expected.norm()),
                "z {z:?}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn taylor_application_of_constant_symbol_picks_constant_term() {
        // psi_hat = 1: only m_0 = 1
        let germ = TaylorGerm::head(
            TaylorPoly::from_terms(TruncationBox::new(vec![0]), &[(mi(&[0]), ONE)]).unwrap(),
        );
        let domain = ProductDomain::polydisc(&[1.0]).unwrap();
        let f = TaylorPoly::from_terms(
            TruncationBox::new(vec![4]),
            &[(mi(&[0]), c64(0.8, -0.2)), (mi(&[2]), c64(-0.9, 0.6))],
        )
        .unwrap();
        let got = apply_taylor_germ(
            &germ,
            &f,
            &Point::new(vec![c64(0.4, 0.3)]),
            &domain,
            &EngineParams::default(),
        )
        .unwrap();
        assert!((got - c64(0.8, -0.2)).norm() <= 1e-12, "{got}");
    }

    #[test]
    fn taylor_application_eigenvector_identity() {
        // f = zeta^alpha maps to m_alpha z^alpha
        let c = [c64(0.5, -0.2)];
        let germ = TaylorGerm::geometric(&c).unwrap();
        let domain = ProductDomain::polydisc(&[1.0]).unwrap();
        let alpha = mi(&[3]);
        let f = TaylorPoly::monomial(TruncationBox::new(vec![4]), &alpha).unwrap();
        let z = Point::new(vec![c64(0.6, 0.25)]);
        let got = apply_taylor_germ(&germ, &f, &z, &domain, &EngineParams::default()).unwrap();
        let expected = c[0].powu(3) * z.coords()[0].powu(3);
        assert!((got - expected).norm() <= 1e-11 * (1.0 + expected.norm()));
    }

    #[test]
    fn formula_equivalence_laurent_taylor_sequence() {
        let c = [c64(0.55, 0.2), c64(0.3, -0.4)];
        let laurent = Germ::product_poles(c.to_vec()).unwrap();
        let taylor = TaylorGerm::geometric(&c).unwrap();
        let domain = bidisc(1.0);
        let bounds = TruncationBox::new(vec![3, 3]);
        let m = Multiplier::dilation(domain.clone(), bounds, &c).unwrap();
        let f = test_poly_2d();
        let params = EngineParams::default();
        for z in [
            Point::new(vec![c64(0.3, 0.4), c64(-0.5, 0.2)]),
            Point::new(vec![c64(0.75, -0.1), c64(0.1, 0.65)]),
        ] {
            let via_laurent = apply_laurent_germ(&laurent, &f, &z, &domain, &params).unwrap();
            let via_taylor = apply_taylor_germ(&taylor, &f, &z, &domain, &params).unwrap();
            let via_sequence = m.apply_sequence(&f).unwrap().eval(&z).unwrap();
            let scale = 1.0 + via_sequence.norm();
            assert!(
                (via_laurent - via_taylor).norm() / scale <= 1e-9,
                "laurent {via_laurent} vs taylor {via_taylor}"
            );
            assert!(
                (via_laurent - via_sequence).norm() / scale <= 1e-9,
                "laurent {via_laurent} vs sequence {via_sequence}"
            );
        }
    }

    #[test]
    fn compose_identity_is_neutral() {
        let bounds = TruncationBox::new(vec![4, 4]);
        let id = Multiplier::identity(bidisc(1.0), bounds.clone()).unwrap();
        let c = [c64(0.3, 0.3), c64(0.6, -0.1)];
        let m = Multiplier::dilation(bidisc(1.0), bounds, &c).unwrap();
        let composed = id.compose(&m).unwrap();
        assert_eq!(composed.sequence(), m.sequence());
    }

    #[test]
    fn compose_dilations_multiplies_parameters() {
        let bounds = TruncationBox::new(vec![5, 5]);
        let a = [c64(0.5, 0.1), c64(-0.3, 0.2)];
        let b = [c64(0.4, -0.2), c64(0.25, 0.5)];
        let ma = Multiplier::dilation(bidisc(1.0), bounds.clone(), &a).unwrap();
        let mb = Multiplier::dilation(bidisc(1.0), bounds.clone(), &b).unwrap();
        let ab: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mab = Multiplier::dilation(bidisc(1.0), bounds, &ab).unwrap();
        let composed = ma.compose(&mb).unwrap();
        for (x, y) in composed.sequence().iter().zip(mab.sequence()) {
            assert!((x - y).norm() <= 1e-14 * (1.0 + y.norm()));
        }
        // sequence commutativity is exact
        let other = mb.compose(&ma).unwrap();
        assert_eq!(composed.sequence(), other.sequence());
    }

    #[test]
    fn compose_requires_same_domain() {
        let bounds = TruncationBox::new(vec![2, 2]);
        let m1 = Multiplier::identity(bidisc(1.0), bounds.clone()).unwrap();
        let m2 = Multiplier::identity(bidisc(1.5), bounds).unwrap();
        assert!(matches!(m1.compose(&m2), Err(Error::DomainMismatch)));
    }

    #[test]
    fn symbols_roundtrip_through_extraction() {
        let c = [c64(0.4, 0.25)];
        let bounds = TruncationBox::new(vec![10]);
        let m = Multiplier::dilation(ProductDomain::polydisc(&[1.0]).unwrap(), bounds.clone(), &c)
            .unwrap();
        // Laurent symbol: moments reproduce the sequence as exact residues
        let psi = m.laurent_symbol().unwrap();
        let moments = psi
            .moments(&[1.0], &bounds, quadrature::default_nodes(&bounds))
            .unwrap();
        for (a, b) in moments.iter().zip(m.sequence()) {
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
        // Taylor symbol: coefficient extraction reproduces the sequence
        let psi_hat = m.taylor_symbol().unwrap();
        let coeffs = psi_hat
            .coefficients(&bounds, &EngineParams::default())
            .unwrap();
        for (a, b) in coeffs.iter().zip(m.sequence()) {
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn laurent_symbol_matches_closed_form_outside() {
        // m = c^alpha: the truncated symbol approaches prod 1/(w_j - c_j)
        // within the geometric tail bound
        let c = c64(0.3, 0.2);
        let bounds = TruncationBox::new(vec![12]);
        let m = Multiplier::dilation(
            ProductDomain::polydisc(&[1.0]).unwrap(),
            bounds.clone(),
            &[c],
        )
        .unwrap();
        let psi = m.laurent_symbol().unwrap();
        for w in [c64(0.8, 0.0), c64(0.0, 1.5), c64(-2.0, 1.0)] {
            let truncated = psi.eval_at(&[w]);
            let closed = (w - c).inv();
            let q = c.norm() / w.norm();
            let tail_bound = q.powi(13) / (1.0 - q) / w.norm();
            assert!(
                (truncated - closed).norm() <= tail_bound + 1e-14,
                "w {w}: diff {} bound {tail_bound}",
                (truncated - closed).norm()
            );
        }
    }

    #[test]
    fn zero_multiplier_symbol_is_zero() {
        let bounds = TruncationBox::new(vec![3]);
        let m = Multiplier::from_sequence(
            ProductDomain::polydisc(&[1.0]).unwrap(),
            bounds,
            vec![ZERO; 4],
        )
        .unwrap();
        let psi = m.laurent_symbol().unwrap();
        assert!(psi.eval_at(&[c64(2.0, 1.0)]).norm() < 1e-15);
    }

    #[test]
    fn evaluate_at_consistency_between_paths() {
        // off the hyperplanes the germ path agrees with the sequence path
        let c = [c64(0.45, 0.1), c64(0.25, -0.3)];
        let germ = Germ::product_poles(c.to_vec()).unwrap();
        let bounds = TruncationBox::new(vec![3, 3]);
        let params = EngineParams::default();
        let m = Multiplier::from_laurent_germ(bidisc(1.0), bounds.clone(), germ, &params).unwrap();
        let m_seq = Multiplier::from_sequence(bidisc(1.0), bounds, m.sequence().to_vec()).unwrap();
        let f = test_poly_2d();
        for z in [
            Point::new(vec![c64(0.4, 0.2), c64(-0.3, 0.5)]),
            Point::new(vec![c64(0.1, -0.8), c64(0.6, 0.1)]),
        ] {
            let a = m.evaluate_at(&f, &z, &params).unwrap();
            let b = m_seq.evaluate_at(&f, &z, &params).unwrap();
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn hyperplane_evaluation_identity_multiplier() {
        let bounds = TruncationBox::new(vec![3, 3]);
        let id = Multiplier::identity(bidisc(1.0), bounds).unwrap();
        let f = test_poly_2d();
        let z = Point::new(vec![ZERO, c64(0.5, 0.0)]);
        let params = EngineParams::default();
        let got = id.evaluate_at(&f, &z, &params).unwrap();
        let expected = f.eval(&z).unwrap();
        assert!(
            (got - expected).norm() <= 1e-10 * (1.0 + expected.norm()),
            "{got} vs {expected}"
        );
    }

    #[test]
    fn hyperplane_evaluation_dilation_closed_form() {
        let c = [c64(0.5, 0.15), c64(-0.35, 0.25)];
        let germ = Germ::product_poles(c.to_vec()).unwrap();
        let bounds = TruncationBox::new(vec![3, 3]);
        let params = EngineParams::default();
        let m = Multiplier::from_laurent_germ(bidisc(1.0), bounds, germ, &params).unwrap();
        let f = test_poly_2d();
        for z in [
            Point::new(vec![ZERO, c64(0.4, -0.2)]),
            Point::new(vec![c64(0.3, 0.1), ZERO]),
            Point::new(vec![ZERO, ZERO]),
        ] {
            let got = m.evaluate_at(&f, &z, &params).unwrap();
            let cz = Point::new(c.iter().zip(z.coords()).map(|(&cj, &zj)| cj * zj).collect());
            let expected = f.eval(&cz).unwrap();
            assert!(
                (got - expected).norm() <= 1e-9 * (1.0 + expected.norm()),
                "z {z:?}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn eigencheck_identity_multiplier() {
        let bounds = TruncationBox::new(vec![3, 3]);
        let id = Multiplier::identity(bidisc(1.0), bounds).unwrap();
        let zs = crate::sampling::domain_points(id.domain(), 9, 0.85);
        let report = id.eigencheck_box(&zs, &EngineParams::default()).unwrap();
        assert!(report.max_error <= 1e-12, "{}", report.max_error);
    }

    #[test]
    fn eigencheck_germ_multiplier() {
        let c = [c64(0.5, 0.2), c64(-0.4, 0.15)];
        let germ = Germ::product_poles(c.to_vec()).unwrap();
        let params = EngineParams::default();
        let bounds = TruncationBox::new(vec![8, 8]);
        let m = Multiplier::from_laurent_germ(bidisc(1.0), bounds, germ, &params).unwrap();
        let zs = crate::sampling::domain_points(m.domain(), 16, 0.85);
        let report = m.eigencheck_box(&zs, &params).unwrap();
        assert!(report.max_error <= 1e-9, "{}", report.max_error);
        // spot-check the literal single-index path against the batch
        let alpha = mi(&[3, 2]);
        let single = m.eigencheck(&alpha, &zs[..4], &params).unwrap();
        assert!(single.max_error <= 1e-9, "{}", single.max_error);
    }

    #[test]
    fn taylor_germ_multiplier_eigencheck() {
        let c = [c64(0.45, -0.2)];
        let germ = TaylorGerm::geometric(&c).unwrap();
        let params = EngineParams::default();
        let domain = ProductDomain::polydisc(&[1.0]).unwrap();
        let bounds = TruncationBox::new(vec![8]);
        let m = Multiplier::from_taylor_germ(domain, bounds, germ, &params).unwrap();
        let reference: Vec<Complex64> = (0..=8).map(|k| c[0].powu(k)).collect();
        for (a, b) in m.sequence().iter().zip(&reference) {
            assert!((a - b).norm() <= 1e-11 * (1.0 + b.norm()));
        }
        let zs = crate::sampling::domain_points(m.domain(), 8, 0.8);
        let report = m.eigencheck_box(&zs, &params).unwrap();
        assert!(report.max_error <= 1e-9, "{}", report.max_error);
    }

    #[test]
    fn rational_germ_with_origin_pole_eigencheck() {
        // psi = 1/(w^2 (w - 0.3)): eigenvalues 0, 0, 0.3^(k-2) for k >= 2
        let germ = Germ::rational_product(vec![crate::duality::RationalFactor::new(
            vec![ONE],
            vec![ZERO, ZERO, c64(-0.3, 0.0), ONE],
        )
        .unwrap()])
        .unwrap();
        assert!((germ.singular_radii()[0] - 0.3).abs() < 1e-14);
        let domain = ProductDomain::polydisc(&[1.0]).unwrap();
        let params = EngineParams::default();
        let bounds = TruncationBox::new(vec![10]);
        let m = Multiplier::from_laurent_germ(domain, bounds.clone(), germ, &params).unwrap();
        for (k, v) in m.sequence().iter().enumerate() {
            let expected = if k < 2 {
                ZERO
            } else {
                c64(0.3f64.powi(k as i32 - 2), 0.0)
            };
            assert!(
                (v - expected).norm() <= 1e-11 * (1.0 + expected.norm()),
                "k = {k}: {v} vs {expected}"
            );
        }
        let zs = crate::sampling::domain_points(m.domain(), 10, 0.85);
        let report = m.eigencheck_box(&zs, &params).unwrap();
        assert!(report.max_error <= 1e-9, "{}", report.max_error);
    }

    #[test]
    fn composition_operator_identity() {
        // the composite sequence acts like applying the factors in turn
        let bounds = TruncationBox::new(vec![3, 3]);
        let c1 = [c64(0.5, 0.1), c64(0.3, -0.2)];
        let germ1 = Germ::product_poles(c1.to_vec()).unwrap();
        let params = EngineParams::default();
        let m1 =
            Multiplier::from_laurent_germ(bidisc(1.0), bounds.clone(), germ1, &params).unwrap();
        let mut seq2 = Vec::new();
        for alpha in bounds.iter() {
            seq2.push(c64(1.0 / (1.0 + alpha.order() as f64), 0.2));
        }
        let m2 = Multiplier::from_sequence(bidisc(1.0), bounds.clone(), seq2).unwrap();
        let f = test_poly_2d();
        let z = Point::new(vec![c64(0.4, 0.3), c64(-0.2, 0.5)]);
        let composed = m1.compose(&m2).unwrap();
        let lhs = composed.apply_sequence(&f).unwrap().eval(&z).unwrap();
        let rhs = m1
            .evaluate_at(&m2.apply_sequence(&f).unwrap(), &z, &params)
            .unwrap();
        assert!(
            (lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()),
            "{lhs} vs {rhs}"
        );
    }
}
