//! Analytic functionals as contour quadratures against complement germs.
//!
//! A functional is the pair (kernel germ, polycontour): it acts on a
//! holomorphic function by the normalized contour integral of their product.
//! On product domains this quadrature form is lossless, it makes the action
//! total and testable, and the Cauchy transform closes the loop back from a
//! functional to a complement germ.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domains::PolyContour;
use crate::error::{Error, Result};
use crate::quadrature::{self, CircleGrid};
use crate::series::{Evaluate, MultiIndex, Point, TruncationBox};
use crate::tensor::{self, c64, pairwise_sum, ONE, ZERO};

/// One factor of a product of planar rational functions `p(w)/q(w)`.
/// Coefficients run from the constant term up. Vanishing at infinity needs
/// `deg p < deg q`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFactor {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
}

impl RationalFactor {
    pub fn new(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        let deg = |c: &[Complex64]| c.iter().rposition(|x| *x != ZERO);
        let dn = deg(&numerator);
        let dd = deg(&denominator)
            .ok_or_else(|| Error::InvalidGerm("rational factor has a zero denominator".into()))?;
        if let Some(dn) = dn {
            if dn >= dd {
                return Err(Error::InvalidGerm(format!(
                    "rational factor must vanish at infinity: numerator degree {dn} >= denominator degree {dd}"
                )));
            }
        }
        Ok(RationalFactor {
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

    /// Bound on the modulus of denominator roots: every singularity lies
    /// within this radius. Roots at the origin are stripped first; what
    /// remains is exact for degrees one and two and a Cauchy bound above.
    pub fn singular_radius_bound(&self) -> f64 {
        let dd = self
            .denominator
            .iter()
            .rposition(|x| *x != ZERO)
            .expect("validated non-zero denominator");
        let origin_zeros = self
            .denominator
            .iter()
            .position(|x| *x != ZERO)
            .expect("validated non-zero denominator");
        let q = &self.denominator[origin_zeros..=dd];
        match q.len() - 1 {
            0 => 0.0,
            1 => (q[0] / q[1]).norm(),
            2 => {
                let disc = (q[1] * q[1] - 4.0 * q[0] * q[2]).sqrt();
                let r1 = ((-q[1] + disc) / (2.0 * q[2])).norm();
                let r2 = ((-q[1] - disc) / (2.0 * q[2])).norm();
                r1.max(r2)
            }
            d => {
                let lead = q[d].norm();
                let max_ratio = q[..d].iter().map(|c| c.norm() / lead).fold(0.0, f64::max);
                1.0 + max_ratio
            }
        }
    }
}

/// One additive term of a pole mixture: `coeff * prod_j 1/(w_j - poles[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureTerm {
    pub coeff: Complex64,
    pub poles: Vec<Complex64>,
}

#[derive(Clone)]
enum GermBackend {
    /// `sum_t a_t * prod_j 1/(w_j - c_{t,j})`
    PoleMixture(Vec<MixtureTerm>),
    /// `prod_j p_j(w_j)/q_j(w_j)`
    RationalProduct(Vec<RationalFactor>),
    /// Truncated expansion at infinity: `sum_alpha m_alpha / w^(alpha+1)`
    LaurentTail {
        bounds: TruncationBox,
        seq: Vec<Complex64>,
    },
    /// The Cauchy transform of a functional, evaluated by quadrature.
    CauchyTransform(Arc<AnalyticFunctional>),
    Closure(#[allow(clippy::type_complexity)] Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>),
    Scaled {
        factor: Complex64,
        inner: Box<Germ>,
    },
    Sum(Vec<Germ>),
}

impl fmt::Debug for GermBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GermBackend::PoleMixture(t) => write!(f, "PoleMixture({} terms)", t.len()),
            GermBackend::RationalProduct(r) => write!(f, "RationalProduct({} factors)", r.len()),
            GermBackend::LaurentTail { bounds, .. } => {
                write!(f, "LaurentTail(box {:?})", bounds.degrees())
            }
            GermBackend::CauchyTransform(_) => write!(f, "CauchyTransform"),
            GermBackend::Closure(_) => write!(f, "Closure"),
            GermBackend::Scaled { factor, inner } => {
                write!(f, "Scaled({factor}, {:?})", inner.backend)
            }
            GermBackend::Sum(t) => write!(f, "Sum({} terms)", t.len()),
        }
    }
}

/// A germ of a holomorphic function on a product of disc complements,
/// vanishing at infinity: the kernel side of the duality.
///
/// Factor `j` is declared holomorphic for `|w_j| > singular_radii[j]`. The
/// radii may overestimate the true singular set; contour placement only
/// needs a bound.
#[derive(Debug, Clone)]
pub struct Germ {
    dim: usize,
    backend: GermBackend,
    singular_radii: Vec<f64>,
    vanishing: Vec<bool>,
}

impl Germ {
    /// `prod_j 1/(w_j - poles[j])`: the Cauchy transform of a point mass.
    pub fn product_poles(poles: Vec<Complex64>) -> Result<Self> {
        Germ::pole_mixture(vec![MixtureTerm { coeff: ONE, poles }])
    }

    /// A finite sum of scaled product-pole terms. Moments are available in
    /// closed form, which makes these the workhorse of the test suite.
    pub fn pole_mixture(terms: Vec<MixtureTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidGerm(
                "pole mixture needs at least one term".into(),
            ));
        }
        let dim = terms[0].poles.len();
        if dim == 0 || terms.iter().any(|t| t.poles.len() != dim) {
            return Err(Error::InvalidGerm(
                "mixture terms must share a dimension >= 1".into(),
            ));
        }
        let mut singular_radii = vec![0.0f64; dim];
        for t in &terms {
            for (r, p) in singular_radii.iter_mut().zip(&t.poles) {
                *r = r.max(p.norm());
            }
        }
        Ok(Germ {
            dim,
            backend: GermBackend::PoleMixture(terms),
            singular_radii,
            vanishing: vec![true; dim],
        })
    }

    /// `prod_j p_j(w_j)/q_j(w_j)` with every factor vanishing at infinity.
    pub fn rational_product(factors: Vec<RationalFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGerm(
                "need at least one rational factor".into(),
            ));
        }
        let singular_radii = factors.iter().map(|f| f.singular_radius_bound()).collect();
        Ok(Germ {
            dim: factors.len(),
            vanishing: vec![true; factors.len()],
            backend: GermBackend::RationalProduct(factors),
            singular_radii,
        })
    }

    /// Truncated expansion at infinity with the given coefficient tensor:
    /// `sum_alpha seq[alpha] / w^(alpha+1)`. Its only singularity is the
    /// pole at the origin, so any positive contour radius is valid and
    /// moment read-outs are exact residues.
    pub fn laurent_tail(bounds: TruncationBox, seq: Vec<Complex64>) -> Result<Self> {
        if seq.len() != bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                got: seq.len(),
            });
        }
        if let Some(index) = seq
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFiniteCoefficient { index });
        }
        let dim = bounds.dim();
        Ok(Germ {
            dim,
            backend: GermBackend::LaurentTail { bounds, seq },
            singular_radii: vec![0.0; dim],
            vanishing: vec![true; dim],
        })
    }

    /// The Cauchy transform `f_T` of a functional: holomorphic outside the
    /// region enclosed by the functional's contour, vanishing at infinity.
    pub fn cauchy_transform(functional: AnalyticFunctional) -> Self {
        let dim = functional.dim();
        let singular_radii = functional.contour().enclosing_radii();
        Germ {
            dim,
            backend: GermBackend::CauchyTransform(Arc::new(functional)),
            singular_radii,
            vanishing: vec![true; dim],
        }
    }

    /// Generic evaluator with declared singular radii. The declaration is
    /// checked by sampling: finiteness on the declared region and magnitude
    /// decay along rays toward infinity.
    pub fn from_fn(
        dim: usize,
        singular_radii: Vec<f64>,
        vanishing: Vec<bool>,
        eval: impl Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 || singular_radii.len() != dim || vanishing.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: singular_radii.len(),
            });
        }
        let germ = Germ {
            dim,
            backend: GermBackend::Closure(Arc::new(eval)),
            singular_radii,
            vanishing,
        };
        germ.check_declared_behavior()?;
        Ok(germ)
    }

    pub fn scaled(self, factor: Complex64) -> Self {
        let dim = self.dim;
        let singular_radii = self.singular_radii.clone();
        let vanishing = self.vanishing.clone();
        Germ {
            dim,
            backend: GermBackend::Scaled {
                factor,
                inner: Box::new(self),
            },
            singular_radii,
            vanishing,
        }
    }

    pub fn sum(terms: Vec<Germ>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidGerm("empty germ sum".into()));
        }
        let dim = terms[0].dim;
        if terms.iter().any(|t| t.dim != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: 0,
            });
        }
        let mut singular_radii = vec![0.0f64; dim];
        let mut vanishing = vec![true; dim];
        for t in &terms {
            for j in 0..dim {
                singular_radii[j] = singular_radii[j].max(t.singular_radii[j]);
                vanishing[j] &= t.vanishing[j];
            }
        }
        Ok(Germ {
            dim,
            backend: GermBackend::Sum(terms),
            singular_radii,
            vanishing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn singular_radii(&self) -> &[f64] {
        &self.singular_radii
    }

    pub fn vanishing_at_infinity(&self) -> &[bool] {
        &self.vanishing
    }

    fn check_declared_behavior(&self) -> Result<()> {
        // finiteness at a handful of points of the declared region
        let base: Vec<Complex64> = self
            .singular_radii
            .iter()
            .map(|&s| c64(2.0 * s + 1.0, 0.0))
            .collect();
        for k in 0..4 {
            let angle = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / 4.0;
            let rot = c64(angle.cos(), angle.sin());
            let w: Vec<Complex64> = base.iter().map(|&b| b * rot).collect();
            let v = self.eval_at(&w);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidGerm(format!(
                    "evaluator not finite at declared-region sample {w:?}"
                )));
            }
        }
        // vanishing: magnitude decay along each coordinate ray
        for j in 0..self.dim {
            if !self.vanishing[j] {
                continue;
            }
            let mut near = base.clone();
            let mut far = base.clone();
            near[j] = c64(1e3, 0.0);
            far[j] = c64(1e6, 0.0);
            let v_near = self.eval_at(&near).norm();
            let v_far = self.eval_at(&far).norm();
            let decayed = v_far < v_near;
            if !decayed && v_near != 0.0 {
                return Err(Error::InvalidGerm(format!(
                    "declared vanishing at infinity in variable {j}, but |f| went from {v_near} to {v_far}"
                )));
            }
        }
        Ok(())
    }

    /// Moment sequence against origin-centered circles, with the radii
    /// validated against the declared singular radii.
    pub fn moments(
        &self,
        radii: &[f64],
        bounds: &TruncationBox,
        nodes: usize,
    ) -> Result<Vec<Complex64>> {
        Ok(self.moments_with_sup(radii, bounds, nodes)?.0)
    }

    /// [`Germ::moments`] plus the sup of the kernel over the sample tensor.
    pub fn moments_with_sup(
        &self,
        radii: &[f64],
        bounds: &TruncationBox,
        nodes: usize,
    ) -> Result<(Vec<Complex64>, f64)> {
        for (j, (&r, &s)) in radii.iter().zip(&self.singular_radii).enumerate() {
            if r <= s {
                return Err(Error::ContourPlacement(format!(
                    "moment radius {r} in factor {j} does not clear the declared singular radius {s}"
                )));
            }
        }
        quadrature::laurent_moments_with_sup(self, radii, bounds, nodes)
    }

    /// Scaled derivative tensor `D^alpha f(center)/alpha!` over the box.
    ///
    /// Structured backends use closed forms; generic ones fall back to local
    /// Cauchy extraction on polycircles of radius one tenth of the distance
    /// to the declared singular set.
    pub fn local_taylor(
        &self,
        center: &Point,
        bounds: &TruncationBox,
        nodes: usize,
    ) -> Result<Vec<Complex64>> {
        if center.dim() != self.dim || bounds.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: center.dim(),
            });
        }
        match &self.backend {
            GermBackend::PoleMixture(terms) => {
                let mut out = vec![ZERO; bounds.len()];
                for t in terms {
                    // D^alpha of prod 1/(w-c), over alpha!, is
                    // (-1)^|alpha| * prod (w_j - c_j)^-(alpha_j+1)
                    let tables: Vec<Vec<Complex64>> = center
                        .coords()
                        .iter()
                        .zip(&t.poles)
                        .zip(bounds.degrees())
                        .map(|((&w, &c), &d)| tensor::power_column((w - c).inv(), d + 1))
                        .collect();
                    for (flat, slot) in out.iter_mut().enumerate() {
                        let alpha = bounds.alpha_at(flat);
                        let mut v = t.coeff;
                        for (j, &a) in alpha.0.iter().enumerate() {
                            v *= tables[j][a + 1];
                        }
                        if alpha.order() % 2 == 1 {
                            v = -v;
                        }
                        *slot += v;
                    }
                }
                Ok(out)
            }
            GermBackend::LaurentTail { bounds: mb, seq } => {
                // term m_beta / w^(beta+1) contributes
                // m_beta * (-1)^|alpha| * prod_j binom(beta_j+alpha_j, alpha_j)
                //        * w_j^-(beta_j+alpha_j+1)
                let max_pow: Vec<usize> = mb
                    .degrees()
                    .iter()
                    .zip(bounds.degrees())
                    .map(|(&b, &a)| b + a + 1)
                    .collect();
                let inv_pows: Vec<Vec<Complex64>> = center
                    .coords()
                    .iter()
                    .zip(&max_pow)
                    .map(|(&w, &m)| tensor::power_column(w.inv(), m))
                    .collect();
                let mut out = vec![ZERO; bounds.len()];
                for (flat, slot) in out.iter_mut().enumerate() {
                    let alpha = bounds.alpha_at(flat);
                    let mut acc = ZERO;
                    for (bflat, &m) in seq.iter().enumerate() {
                        if m == ZERO {
                            continue;
                        }
                        let beta = mb.alpha_at(bflat);
                        let mut v = m;
                        for j in 0..self.dim {
                            v *= binom(beta[j] + alpha[j], alpha[j]);
                            v *= inv_pows[j][beta[j] + alpha[j] + 1];
                        }
                        acc += v;
                    }
                    if alpha.order() % 2 == 1 {
                        acc = -acc;
                    }
                    *slot = acc;
                }
                Ok(out)
            }
            GermBackend::CauchyTransform(functional) => {
                // D^alpha f_T(w)/alpha! = (-1)^|alpha| T((w - zeta)^-(alpha+1))
                let mut out = functional.shifted_kernel_moments(center, bounds)?;
                for (flat, slot) in out.iter_mut().enumerate() {
                    if bounds.alpha_at(flat).order() % 2 == 1 {
                        *slot = -*slot;
                    }
                }
                Ok(out)
            }
            GermBackend::Scaled { factor, inner } => {
                let mut out = inner.local_taylor(center, bounds, nodes)?;
                for v in &mut out {
                    *v *= factor;
                }
                Ok(out)
            }
            GermBackend::Sum(terms) => {
                let mut out = vec![ZERO; bounds.len()];
                for t in terms {
                    for (o, v) in out.iter_mut().zip(t.local_taylor(center, bounds, nodes)?) {
                        *o += v;
                    }
                }
                Ok(out)
            }
            GermBackend::RationalProduct(_) | GermBackend::Closure(_) => {
                let radii: Vec<f64> = center
                    .coords()
                    .iter()
                    .zip(&self.singular_radii)
                    .enumerate()
                    .map(|(j, (&w, &s))| {
                        let dist = w.norm() - s;
                        if dist <= 0.0 {
                            Err(Error::ContourPlacement(format!(
                                "derivative point in factor {j} does not clear the declared singular radius {s}"
                            )))
                        } else {
                            Ok(0.1 * dist)
                        }
                    })
                    .collect::<Result<_>>()?;
                let poly = quadrature::taylor_coefficients(self, center, &radii, bounds, nodes)?;
                Ok(poly.coeffs().to_vec())
            }
        }
    }

    /// Taylor coefficients at the origin of `f(1/zeta)`, the infinity-side
    /// branch of the weighted-derivative seminorm.
    pub fn reciprocal_taylor(
        &self,
        bounds: &TruncationBox,
        nodes: usize,
    ) -> Result<Vec<Complex64>> {
        if bounds.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: bounds.dim(),
            });
        }
        match &self.backend {
            GermBackend::PoleMixture(terms) => {
                // f(1/u) = sum_t a_t prod u_j/(1 - c_j u_j): the coefficient
                // at alpha >= 1 componentwise is sum_t a_t prod c_j^(alpha_j-1)
                let mut out = vec![ZERO; bounds.len()];
                for t in terms {
                    let tables: Vec<Vec<Complex64>> = t
                        .poles
                        .iter()
                        .zip(bounds.degrees())
                        .map(|(&c, &d)| tensor::power_column(c, d.max(1) - 1))
                        .collect();
                    for (flat, slot) in out.iter_mut().enumerate() {
                        let alpha = bounds.alpha_at(flat);
                        if alpha.0.contains(&0) {
                            continue;
                        }
                        let mut v = t.coeff;
                        for (j, &a) in alpha.0.iter().enumerate() {
                            v *= tables[j][a - 1];
                        }
                        *slot += v;
                    }
                }
                Ok(out)
            }
            GermBackend::LaurentTail { bounds: mb, seq } => {
                // f(1/u) = sum_beta m_beta u^(beta+1)
                let mut out = vec![ZERO; bounds.len()];
                for (flat, slot) in out.iter_mut().enumerate() {
                    let alpha = bounds.alpha_at(flat);
                    if alpha.0.contains(&0) {
                        continue;
                    }
                    let beta = MultiIndex::new(alpha.0.iter().map(|&a| a - 1).collect());
                    if mb.contains(&beta) {
                        *slot = seq[mb.flat_index(&beta)?];
                    }
                }
                Ok(out)
            }
            GermBackend::CauchyTransform(functional) => {
                // coefficient at alpha >= 1 componentwise is the moment
                // T(zeta^(alpha-1)); zero when some alpha_j = 0
                let shifted =
                    TruncationBox::new(bounds.degrees().iter().map(|&d| d.max(1) - 1).collect());
                let moments = functional.moments(&shifted)?;
                let mut out = vec![ZERO; bounds.len()];
                for (flat, slot) in out.iter_mut().enumerate() {
                    let alpha = bounds.alpha_at(flat);
                    if alpha.0.contains(&0) {
                        continue;
                    }
                    let beta = MultiIndex::new(alpha.0.iter().map(|&a| a - 1).collect());
                    *slot = moments[shifted.flat_index(&beta)?];
                }
                Ok(out)
            }
            GermBackend::Scaled { factor, inner } => {
                let mut out = inner.reciprocal_taylor(bounds, nodes)?;
                for v in &mut out {
                    *v *= factor;
                }
                Ok(out)
            }
            GermBackend::Sum(terms) => {
                let mut out = vec![ZERO; bounds.len()];
                for t in terms {
                    for (o, v) in out.iter_mut().zip(t.reciprocal_taylor(bounds, nodes)?) {
                        *o += v;
                    }
                }
                Ok(out)
            }
            GermBackend::RationalProduct(_) | GermBackend::Closure(_) => {
                let radii: Vec<f64> = self
                    .singular_radii
                    .iter()
                    .map(|&s| if s > 0.0 { 0.1 / s } else { 0.5 })
                    .collect();
                let this = self.clone();
                let recip = crate::series::FnEval::new(self.dim, move |u: &[Complex64]| {
                    let w: Vec<Complex64> = u.iter().map(|x| x.inv()).collect();
                    this.eval_at(&w)
                });
                let origin = Point::new(vec![ZERO; self.dim]);
                let poly = quadrature::taylor_coefficients(&recip, &origin, &radii, bounds, nodes)?;
                Ok(poly.coeffs().to_vec())
            }
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

impl Evaluate for Germ {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_at(&self, w: &[Complex64]) -> Complex64 {
        match &self.backend {
            GermBackend::PoleMixture(terms) => {
                let mut acc = ZERO;
                for t in terms {
                    let mut v = t.coeff;
                    for (x, c) in w.iter().zip(&t.poles) {
                        v /= x - c;
                    }
                    acc += v;
                }
                acc
            }
            GermBackend::RationalProduct(factors) => {
                let mut acc = ONE;
                for (f, &x) in factors.iter().zip(w) {
                    acc *= f.eval(x);
                }
                acc
            }
            GermBackend::LaurentTail { bounds, seq } => {
                // sum_alpha m_alpha u^alpha times prod u_j, with u = 1/w
                let u: Vec<Complex64> = w.iter().map(|x| x.inv()).collect();
                let poly = horner_tensor(seq, &bounds.shape(), &u);
                poly * u.iter().product::<Complex64>()
            }
            GermBackend::CauchyTransform(functional) => functional
                .cauchy_transform_at(&Point::new(w.to_vec()))
                .unwrap_or(c64(f64::NAN, f64::NAN)),
            GermBackend::Closure(f) => f(w),
            GermBackend::Scaled { factor, inner } => factor * inner.eval_at(w),
            GermBackend::Sum(terms) => {
                let mut acc = ZERO;
                for t in terms {
                    acc += t.eval_at(w);
                }
                acc
            }
        }
    }

    fn sample_grid(&self, axes: &[Vec<Complex64>]) -> Vec<Complex64> {
        match &self.backend {
            // contraction over the backing functional's cached samples;
            // falls back to pointwise evaluation (and its NaN markers) when
            // some node sits inside the contour
            GermBackend::CauchyTransform(functional) => functional
                .cauchy_transform_grid(axes)
                .unwrap_or_else(|_| default_sample_grid(self, axes)),
            GermBackend::Scaled { factor, inner } => {
                let mut out = inner.sample_grid(axes);
                for v in &mut out {
                    *v *= factor;
                }
                out
            }
            GermBackend::Sum(terms) => {
                let len = axes.iter().map(Vec::len).product();
                let mut out = vec![ZERO; len];
                for t in terms {
                    for (o, v) in out.iter_mut().zip(t.sample_grid(axes)) {
                        *o += v;
                    }
                }
                out
            }
            _ => default_sample_grid(self, axes),
        }
    }
}

/// The trait's pointwise sampler, reachable as a plain function.
fn default_sample_grid(g: &dyn Evaluate, axes: &[Vec<Complex64>]) -> Vec<Complex64> {
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let mut point = vec![ZERO; axes.len()];
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let idx = tensor::unflatten(&shape, flat);
        for (j, &k) in idx.iter().enumerate() {
            point[j] = axes[j][k];
        }
        out.push(g.eval_at(&point));
    }
    out
}

fn horner_tensor(coeffs: &[Complex64], shape: &[usize], z: &[Complex64]) -> Complex64 {
    if shape.len() == 1 {
        let mut acc = ZERO;
        for c in coeffs.iter().rev() {
            acc = acc * z[0] + c;
        }
        return acc;
    }
    let block: usize = shape[1..].iter().product();
    let mut acc = ZERO;
    for chunk in coeffs.chunks_exact(block).rev() {
        acc = acc * z[0] + horner_tensor(chunk, &shape[1..], &z[1..]);
    }
    acc
}

/// An analytic functional in quadrature form: it sends `h` to the
/// normalized integral of `h * kernel` over the polycontour. The kernel is
/// sampled once at construction; actions and moment read-outs reuse the
/// weighted sample tensors.
#[derive(Debug, Clone)]
pub struct AnalyticFunctional {
    kernel: Germ,
    contour: PolyContour,
    nodes: usize,
    /// One entry per circle combination: the per-factor grids plus the
    /// kernel samples with all quadrature weights folded in.
    combos: Vec<ComboSamples>,
}

#[derive(Debug, Clone)]
struct ComboSamples {
    grids: Vec<CircleGrid>,
    weighted: Vec<Complex64>,
}

impl AnalyticFunctional {
    pub fn new(kernel: Germ, contour: PolyContour, nodes: usize) -> Result<Self> {
        if contour.dim() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: contour.dim(),
            });
        }
        let all_grids = quadrature::contour_grids(&contour, nodes)?;
        let mut picks: Vec<Vec<usize>> = vec![vec![]];
        for factor in &all_grids {
            let mut next = Vec::new();
            for prefix in &picks {
                for k in 0..factor.len() {
                    let mut p = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            picks = next;
        }
        let mut combos = Vec::with_capacity(picks.len());
        for pick in picks {
            let grids: Vec<CircleGrid> = pick
                .iter()
                .enumerate()
                .map(|(j, &k)| all_grids[j][k].clone())
                .collect();
            let axes: Vec<Vec<Complex64>> = grids.iter().map(|g| g.nodes.clone()).collect();
            let mut weighted = kernel.sample_grid(&axes);
            if weighted
                .iter()
                .any(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(Error::ContourPlacement(
                    "kernel not finite on a contour node".into(),
                ));
            }
            let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
            for (flat, v) in weighted.iter_mut().enumerate() {
                let idx = tensor::unflatten(&shape, flat);
                for (j, &k) in idx.iter().enumerate() {
                    *v *= grids[j].weights[k];
                }
            }
            combos.push(ComboSamples { grids, weighted });
        }
        Ok(AnalyticFunctional {
            kernel,
            contour,
            nodes,
            combos,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn kernel(&self) -> &Germ {
        &self.kernel
    }

    pub fn contour(&self) -> &PolyContour {
        &self.contour
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Applies the functional to `h` by quadrature.
    pub fn act(&self, h: &dyn Evaluate) -> Result<Complex64> {
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: h.dim(),
            });
        }
        let mut total = ZERO;
        for combo in &self.combos {
            let axes: Vec<Vec<Complex64>> = combo.grids.iter().map(|g| g.nodes.clone()).collect();
            let mut samples = h.sample_grid(&axes);
            if samples
                .iter()
                .any(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(Error::ContourPlacement(
                    "argument not finite on a contour node".into(),
                ));
            }
            for (s, w) in samples.iter_mut().zip(&combo.weighted) {
                *s *= w;
            }
            total += pairwise_sum(&samples);
        }
        Ok(total)
    }

    /// The moment sequence `m_alpha = T(zeta^alpha)` for the whole box,
    /// contracted from the shared weighted sample tensors.
    pub fn moments(&self, bounds: &TruncationBox) -> Result<Vec<Complex64>> {
        if bounds.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: bounds.dim(),
            });
        }
        let mut total = vec![ZERO; bounds.len()];
        for combo in &self.combos {
            let mut data = combo.weighted.clone();
            for (j, grid) in combo.grids.iter().enumerate() {
                let table = tensor::power_rows(&grid.nodes, bounds.degrees()[j]);
                data = tensor::contract_leading_to_back(&data, grid.len(), &table);
            }
            for (t, d) in total.iter_mut().zip(&data) {
                *t += d;
            }
        }
        Ok(total)
    }

    /// `T` applied to the shifted Cauchy kernels
    /// `zeta -> prod_j (w_j - zeta_j)^-(alpha_j+1)` for every `alpha` in the
    /// box; the raw material for derivative bounds of the Cauchy transform.
    pub fn shifted_kernel_moments(
        &self,
        w: &Point,
        bounds: &TruncationBox,
    ) -> Result<Vec<Complex64>> {
        if w.dim() != self.dim() || bounds.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.dim(),
            });
        }
        self.check_point_outside(w)?;
        let mut total = vec![ZERO; bounds.len()];
        for combo in &self.combos {
            let mut data = combo.weighted.clone();
            for (j, grid) in combo.grids.iter().enumerate() {
                let inv: Vec<Complex64> = grid
                    .nodes
                    .iter()
                    .map(|&node| (w.coords()[j] - node).inv())
                    .collect();
                if inv.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return Err(Error::ContourPlacement(format!(
                        "shift point coincides with a contour node in factor {j}"
                    )));
                }
                // rows[d][k] = (w_j - node_k)^-(d+1)
                let mut table = tensor::power_rows(&inv, bounds.degrees()[j] + 1);
                table.remove(0);
                data = tensor::contract_leading_to_back(&data, grid.len(), &table);
            }
            for (t, d) in total.iter_mut().zip(&data) {
                *t += d;
            }
        }
        Ok(total)
    }

    /// Every coordinate strictly outside the region enclosed by the
    /// corresponding contour factor (winding zero, not on a circle).
    fn check_point_outside(&self, zeta: &Point) -> Result<()> {
        for (j, (circles, &zj)) in self.contour.factors().iter().zip(zeta.coords()).enumerate() {
            let on = circles.iter().any(|c| c.on_circle(zj));
            if on || crate::domains::winding_number(circles, zj) != 0 {
                return Err(Error::InsideContour { factor: j });
            }
        }
        Ok(())
    }

    /// Samples the Cauchy transform on a tensor grid by contracting the
    /// cached weighted kernel samples against per-axis Cauchy tables; one
    /// pass per axis instead of one quadrature per grid node. Every grid
    /// node must lie outside the region enclosed by the contour.
    pub fn cauchy_transform_grid(&self, axes: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
        if axes.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: axes.len(),
            });
        }
        for (j, (circles, nodes)) in self.contour.factors().iter().zip(axes).enumerate() {
            for &zj in nodes {
                if circles.iter().any(|c| c.on_circle(zj))
                    || crate::domains::winding_number(circles, zj) != 0
                {
                    return Err(Error::InsideContour { factor: j });
                }
            }
        }
        let out_len: usize = axes.iter().map(Vec::len).product();
        let mut total = vec![ZERO; out_len];
        for combo in &self.combos {
            let mut data = combo.weighted.clone();
            for (j, grid) in combo.grids.iter().enumerate() {
                let table: Vec<Vec<Complex64>> = axes[j]
                    .iter()
                    .map(|&zj| grid.nodes.iter().map(|&w| (zj - w).inv()).collect())
                    .collect();
                data = tensor::contract_leading_to_back(&data, grid.len(), &table);
            }
            for (t, d) in total.iter_mut().zip(&data) {
                *t += d;
            }
        }
        Ok(total)
    }

    /// Evaluates the Cauchy transform `f_T` at a point with every coordinate
    /// strictly outside the region enclosed by the contour.
    pub fn cauchy_transform_at(&self, zeta: &Point) -> Result<Complex64> {
        if zeta.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: zeta.dim(),
            });
        }
        self.check_point_outside(zeta)?;
        let z = zeta.clone();
        let kernel = crate::series::FnEval::new(self.dim(), move |w: &[Complex64]| {
            let mut acc = ONE;
            for (&zj, &wj) in z.coords().iter().zip(w) {
                acc *= (zj - wj).inv();
            }
            acc
        });
        self.act(&kernel)
    }

    /// The Cauchy transform as a germ on the complement.
    pub fn to_complement_germ(&self) -> Germ {
        Germ::cauchy_transform(self.clone())
    }

    /// Sup of `|kernel|` over the contour nodes, recovered from the cached
    /// weighted samples.
    pub fn kernel_sup(&self) -> f64 {
        let mut sup: f64 = 0.0;
        for combo in &self.combos {
            let shape: Vec<usize> = combo.grids.iter().map(|g| g.len()).collect();
            for (flat, v) in combo.weighted.iter().enumerate() {
                let idx = tensor::unflatten(&shape, flat);
                let mut w = ONE;
                for (j, &k) in idx.iter().enumerate() {
                    w *= combo.grids[j].weights[k];
                }
                if w != ZERO {
                    sup = sup.max((v / w).norm());
                }
            }
        }
        sup
    }

    /// Empirical carrier diagnostic: the smallest `C` with
    /// `|T f| <= C * ||f||` over the sample functions, where the norm is the
    /// sup over the carrier contour's nodes, plus the a-priori bound
    /// `max|kernel| * prod_j (sum of circle radii)` from the quadrature form.
    pub fn carrier_bound_check(
        &self,
        carrier: &PolyContour,
        samples: &[&dyn Evaluate],
        declared_c: Option<f64>,
    ) -> Result<CarrierReport> {
        let grids = quadrature::contour_grids(carrier, 64.max(self.nodes))?;
        let mut c_estimate: f64 = 0.0;
        let mut violations = Vec::new();
        for (idx, f) in samples.iter().enumerate() {
            let action = self.act(*f)?.norm();
            let mut sup: f64 = 0.0;
            for factor_grids in crate::quadrature::factor_combinations(&grids) {
                let axes: Vec<Vec<Complex64>> =
                    factor_grids.iter().map(|g| g.nodes.clone()).collect();
                for v in f.sample_grid(&axes) {
                    sup = sup.max(v.norm());
                }
            }
            let ratio = if sup > 0.0 { action / sup } else { 0.0 };
            c_estimate = c_estimate.max(ratio);
            if let Some(c) = declared_c {
                if action > c * sup * (1.0 + 1e-12) {
                    violations.push(idx);
                }
            }
        }
        let kernel_sup = self.kernel_sup();
        let length_product: f64 = self
            .contour
            .factors()
            .iter()
            .map(|circles| circles.iter().map(|c| c.radius).sum::<f64>())
            .product();
        Ok(CarrierReport {
            c_estimate,
            quadrature_bound: kernel_sup * length_product,
            violations,
            samples: samples.len(),
        })
    }
}

/// Result of [`AnalyticFunctional::carrier_bound_check`]. A diagnostic, not
/// a proof: finitely many samples give an empirical constant.
#[derive(Debug, Clone)]
pub struct CarrierReport {
    pub c_estimate: f64,
    /// `max|kernel on contour| * prod_j (sum of circle radii)`: what the
    /// quadrature form itself guarantees.
    pub quadrature_bound: f64,
    pub violations: Vec<usize>,
    pub samples: usize,
}

/// A point-mass functional `delta_a` in quadrature form: product-pole
/// kernel at `a` with origin-centered contour circles of the given radii.
pub fn point_mass(a: &Point, contour_radii: &[f64], nodes: usize) -> Result<AnalyticFunctional> {
    let kernel = Germ::product_poles(a.coords().to_vec())?;
    let circles: Vec<Vec<crate::domains::Circle>> = a
        .coords()
        .iter()
        .zip(contour_radii)
        .enumerate()
        .map(|(j, (&aj, &r))| {
            if r <= aj.norm() {
                return Err(Error::ContourPlacement(format!(
                    "contour radius {r} does not enclose the point mass in factor {j}"
                )));
            }
            Ok(vec![crate::domains::Circle::new(ZERO, r, 1)])
        })
        .collect::<Result<_>>()?;
    AnalyticFunctional::new(kernel, PolyContour::new(circles), nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Circle;
    use crate::series::{FnEval, TaylorPoly};

    fn circle_contour(radii: &[f64]) -> PolyContour {
        PolyContour::new(
            radii
                .iter()
                .map(|&r| vec![Circle::new(ZERO, r, 1)])
                .collect(),
        )
    }

    #[test]
    fn point_mass_acts_as_evaluation() {
        // kernel prod 1/(zeta_j - a_j) with a winding contour is delta_a
        let a = Point::new(vec![c64(0.3, 0.1), c64(-0.2, 0.4)]);
        let t = point_mass(&a, &[0.8, 0.8], 64).unwrap();
        let h = TaylorPoly::from_terms(
            TruncationBox::new(vec![2, 2]),
            &[
                (MultiIndex::new(vec![0, 0]), c64(1.5, 0.0)),
                (MultiIndex::new(vec![2, 1]), c64(-0.7, 0.3)),
                (MultiIndex::new(vec![1, 2]), c64(0.0, 0.9)),
            ],
        )
        .unwrap();
        let expected = h.eval(&a).unwrap();
        let got = t.act(&h).unwrap();
        assert!(
            (got - expected).norm() / expected.norm() <= 1e-11,
            "{got} vs {expected}"
        );
    }

    #[test]
    fn second_order_pole_kills_constants() {
        // kernel 1/zeta^2 on the unit circle sends 1 to 0
        let kernel = Germ::laurent_tail(TruncationBox::new(vec![1]), vec![ZERO, ONE]).unwrap();
        let t = AnalyticFunctional::new(kernel, circle_contour(&[1.0]), 32).unwrap();
        let one = FnEval::new(1, |_: &[Complex64]| ONE);
        assert!(t.act(&one).unwrap().norm() < 1e-14);
        // and picks out the linear coefficient: moments (0, 1, 0, ...)
        let m = t.moments(&TruncationBox::new(vec![3])).unwrap();
        assert!((m[1] - ONE).norm() < 1e-13);
        for k in [0usize, 2, 3] {
            assert!(m[k].norm() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn moment_identity_for_simple_pole_germ() {
        // T from 1/(w - 0.4) acting on w^3 gives 0.4^3
        let kernel = Germ::product_poles(vec![c64(0.4, 0.0)]).unwrap();
        let t = AnalyticFunctional::new(kernel, circle_contour(&[0.7]), 64).unwrap();
        let h = FnEval::new(1, |z: &[Complex64]| z[0].powu(3));
        let got = t.act(&h).unwrap();
        let expected = 0.4f64.powi(3);
        assert!((got - c64(expected, 0.0)).norm() / expected <= 1e-10);
    }

    #[test]
    fn moments_of_product_pole_kernel() {
        let c = [c64(0.45, 0.15), c64(-0.3, 0.2)];
        let kernel = Germ::product_poles(c.to_vec()).unwrap();
        let t = AnalyticFunctional::new(kernel, circle_contour(&[0.75, 0.75]), 128).unwrap();
        let bounds = TruncationBox::new(vec![6, 6]);
        let m = t.moments(&bounds).unwrap();
        for alpha in bounds.iter() {
            let expected = c[0].powu(alpha[0] as u32) * c[1].powu(alpha[1] as u32);
            let got = m[bounds.flat_index(&alpha).unwrap()];
            assert!(
                (got - expected).norm() / expected.norm() <= 1e-10,
                "alpha {:?}",
                alpha
            );
        }
    }

    #[test]
    fn cauchy_transform_of_point_mass() {
        let a = Point::new(vec![c64(0.2, -0.1), c64(0.5, 0.3)]);
        // zeta_2 sits at modulus 1.26 against contour radius 0.9; 256 nodes
        // push the geometric quadrature error well under 1e-12
        let t = point_mass(&a, &[0.75, 0.9], 256).unwrap();
        for zeta in [
            Point::new(vec![c64(1.5, 0.5), c64(-1.2, 0.4)]),
            Point::new(vec![c64(0.0, 2.0), c64(3.0, 0.0)]),
        ] {
            let got = t.cauchy_transform_at(&zeta).unwrap();
            let expected =
                (zeta.coords()[0] - a.coords()[0]).inv() * (zeta.coords()[1] - a.coords()[1]).inv();
            assert!(
                (got - expected).norm() / expected.norm() <= 1e-12,
                "zeta {:?}",
                zeta
            );
        }
    }

    #[test]
    fn cauchy_transform_region_error() {
        let a = Point::new(vec![c64(0.2, 0.0)]);
        let t = point_mass(&a, &[0.6], 32).unwrap();
        assert!(matches!(
            t.cauchy_transform_at(&Point::new(vec![c64(0.3, 0.0)])),
            Err(Error::InsideContour { factor: 0 })
        ));
        assert!(matches!(
            t.cauchy_transform_at(&Point::new(vec![c64(0.6, 0.0)])),
            Err(Error::InsideContour { factor: 0 })
        ));
    }

    #[test]
    fn zero_kernel_gives_zero_functional() {
        let kernel = Germ::laurent_tail(TruncationBox::new(vec![2]), vec![ZERO; 3]).unwrap();
        let t = AnalyticFunctional::new(kernel, circle_contour(&[1.0]), 32).unwrap();
        let zeta = Point::new(vec![c64(2.0, 1.0)]);
        assert!(t.cauchy_transform_at(&zeta).unwrap().norm() < 1e-15);
        let m = t.moments(&TruncationBox::new(vec![4])).unwrap();
        assert!(m.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn duality_roundtrip_on_moments() {
        // T -> f_T -> T_{f_T} preserves moments
        let kernel = Germ::pole_mixture(vec![
            MixtureTerm {
                coeff: c64(1.0, 0.5),
                poles: vec![c64(0.35, 0.1)],
            },
            MixtureTerm {
                coeff: c64(0.1, -0.2),
                poles: vec![c64(-0.15, 0.05)],
            },
        ])
        .unwrap();
        let t = AnalyticFunctional::new(kernel, circle_contour(&[0.7]), 128).unwrap();
        let f_t = t.to_complement_germ();
        let t_back = AnalyticFunctional::new(f_t, circle_contour(&[1.1]), 128).unwrap();
        let bounds = TruncationBox::new(vec![12]);
        let m1 = t.moments(&bounds).unwrap();
        let m2 = t_back.moments(&bounds).unwrap();
        let scale = m1.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in m1.iter().zip(&m2) {
            assert!((a - b).norm() / scale <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn act_is_linear() {
        let kernel = Germ::product_poles(vec![c64(0.3, 0.2)]).unwrap();
        let t = AnalyticFunctional::new(kernel, circle_contour(&[0.8]), 64).unwrap();
        let f = FnEval::new(1, |z: &[Complex64]| z[0].powu(2));
        let g = FnEval::new(1, |z: &[Complex64]| (z[0] * c64(0.2, 0.1)).exp());
        let a = c64(1.3, -0.4);
        let b = c64(-0.2, 2.0);
        let combo = FnEval::new(1, move |z: &[Complex64]| {
            a * z[0].powu(2) + b * (z[0] * c64(0.2, 0.1)).exp()
        });
        let lhs = t.act(&combo).unwrap();
        let rhs = a * t.act(&f).unwrap() + b * t.act(&g).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn act_contour_independence() {
        let kernel = Germ::product_poles(vec![c64(0.4, -0.2)]).unwrap();
        let h = FnEval::new(1, |z: &[Complex64]| {
            z[0].powu(5) + z[0] * c64(0.3, 0.0) + ONE
        });
        let act_at = |r: f64| {
            let t = AnalyticFunctional::new(kernel.clone(), circle_contour(&[r]), 128).unwrap();
            t.act(&h).unwrap()
        };
        assert!((act_at(0.6) - act_at(0.9)).norm() <= 1e-10);
    }

    #[test]
    fn carrier_bound_for_point_mass() {
        // delta_a with the carrier shrunk to (nearly) the point a: C ~ 1
        let a = Point::new(vec![c64(0.3, 0.2)]);
        let t = point_mass(&a, &[0.8], 64).unwrap();
        let carrier = PolyContour::new(vec![vec![Circle::new(a.coords()[0], 1e-4, 1)]]);
        let polys: Vec<TaylorPoly> = (0..5)
            .map(|k| {
                TaylorPoly::monomial(TruncationBox::new(vec![4]), &MultiIndex::new(vec![k]))
                    .unwrap()
            })
            .collect();
        let sample_refs: Vec<&dyn Evaluate> = polys.iter().map(|p| p as &dyn Evaluate).collect();
        let report = t
            .carrier_bound_check(&carrier, &sample_refs, Some(1.001))
            .unwrap();
        assert!(
            report.violations.is_empty(),
            "violations: {:?}",
            report.violations
        );
        assert!(
            (report.c_estimate - 1.0).abs() <= 1e-3,
            "C = {}",
            report.c_estimate
        );
    }

    #[test]
    fn carrier_bound_zero_functional() {
        let kernel = Germ::laurent_tail(TruncationBox::new(vec![1]), vec![ZERO, ZERO]).unwrap();
        let t = AnalyticFunctional::new(kernel, circle_contour(&[0.5]), 32).unwrap();
        let carrier = circle_contour(&[0.5]);
        let poly = TaylorPoly::all_ones(TruncationBox::new(vec![3]));
        let report = t
            .carrier_bound_check(&carrier, &[&poly as &dyn Evaluate], None)
            .unwrap();
        assert_eq!(report.c_estimate, 0.0);
    }

    #[test]
    fn carrier_estimate_below_quadrature_bound() {
        let kernel = Germ::product_poles(vec![c64(0.25, 0.35)]).unwrap();
        let t = AnalyticFunctional::new(kernel.clone(), circle_contour(&[0.8]), 64).unwrap();
        // carrier: the rim of the closed disc the contour encloses
        let carrier = circle_contour(&[0.8]);
        let mut state = 123456789u64;
        let mut next_unit = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 16) as f64 / (1u64 << 48) as f64) * 2.0 - 1.0
        };
        let mut polys = Vec::new();
        for _ in 0..100 {
            let mut terms = Vec::new();
            for k in 0..5usize {
                terms.push((MultiIndex::new(vec![k]), c64(next_unit(), next_unit())));
            }
            polys.push(TaylorPoly::from_terms(TruncationBox::new(vec![4]), &terms).unwrap());
        }
        let refs: Vec<&dyn Evaluate> = polys.iter().map(|p| p as &dyn Evaluate).collect();
        let report = t.carrier_bound_check(&carrier, &refs, None).unwrap();
        assert!(report.c_estimate <= report.quadrature_bound * (1.0 + 1e-9));
        assert!(report.c_estimate > 0.0);
    }

    #[test]
    fn germ_vanishing_check_rejects_growth() {
        let bad = Germ::from_fn(1, vec![0.5], vec![true], |w| w[0]);
        assert!(matches!(bad, Err(Error::InvalidGerm(_))));
        let good = Germ::from_fn(1, vec![0.5], vec![true], |w| w[0].inv());
        assert!(good.is_ok());
    }

    #[test]
    fn germ_moments_respect_declared_radii() {
        let g = Germ::product_poles(vec![c64(0.6, 0.0)]).unwrap();
        let bounds = TruncationBox::new(vec![4]);
        assert!(matches!(
            g.moments(&[0.5], &bounds, 64),
            Err(Error::ContourPlacement(_))
        ));
        let m = g.moments(&[1.2], &bounds, 64).unwrap();
        assert!((m[2] - c64(0.36, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn local_taylor_closed_form_matches_quadrature() {
        // pole mixture vs the generic extraction path on the same germ
        let terms = vec![
            MixtureTerm {
                coeff: c64(0.8, 0.1),
                poles: vec![c64(0.3, -0.2)],
            },
            MixtureTerm {
                coeff: c64(-0.25, 0.4),
                poles: vec![c64(-0.1, 0.15)],
            },
        ];
        let g = Germ::pole_mixture(terms.clone()).unwrap();
        let closure = Germ::from_fn(1, g.singular_radii().to_vec(), vec![true], move |w| {
            let mut acc = ZERO;
            for t in &terms {
                acc += t.coeff * (w[0] - t.poles[0]).inv();
            }
            acc
        })
        .unwrap();
        let center = Point::new(vec![c64(1.1, 0.6)]);
        // extraction circles at 10% of the singular distance amplify sample
        // rounding by ~10^k in the k-th coefficient; keep the box small
        let bounds = TruncationBox::new(vec![5]);
        let exact = g.local_taylor(&center, &bounds, 64).unwrap();
        let numeric = closure.local_taylor(&center, &bounds, 64).unwrap();
        for (a, b) in exact.iter().zip(&numeric) {
            assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn laurent_tail_local_taylor_matches_mixture() {
        // the truncated tail of 1/(w - c) approximates its derivatives
        let c = c64(0.3, 0.1);
        let bounds_m = TruncationBox::new(vec![24]);
        let seq: Vec<Complex64> = (0..25).map(|k| c.powu(k)).collect();
        let tail = Germ::laurent_tail(bounds_m, seq).unwrap();
        let pole = Germ::product_poles(vec![c]).unwrap();
        let center = Point::new(vec![c64(1.4, -0.8)]);
        let bounds = TruncationBox::new(vec![4]);
        let a = tail.local_taylor(&center, &bounds, 64).unwrap();
        let b = pole.local_taylor(&center, &bounds, 64).unwrap();
        for (x, y) in a.iter().zip(&b) {
            // truncation tail of the geometric series limits agreement
            assert!((x - y).norm() <= 1e-7 * (1.0 + y.norm()), "{x} vs {y}");
        }
    }

    #[test]
    fn reciprocal_taylor_of_laurent_tail_shifts_indices() {
        // f = 2/w + 3/w^2 -> f(1/u) = 2u + 3u^2
        let g = Germ::laurent_tail(
            TruncationBox::new(vec![1]),
            vec![c64(2.0, 0.0), c64(3.0, 0.0)],
        )
        .unwrap();
        let out = g
            .reciprocal_taylor(&TruncationBox::new(vec![3]), 64)
            .unwrap();
        assert!((out[0]).norm() < 1e-15);
        assert!((out[1] - c64(2.0, 0.0)).norm() < 1e-15);
        assert!((out[2] - c64(3.0, 0.0)).norm() < 1e-15);
        assert!((out[3]).norm() < 1e-15);
    }

    #[test]
    fn rational_factor_rejects_non_vanishing() {
        assert!(RationalFactor::new(vec![ONE, ONE], vec![ZERO, ONE]).is_err());
        let f = RationalFactor::new(vec![ONE], vec![c64(-0.4, 0.0), ONE]).unwrap();
        // 1/(w - 0.4): the singular bound must cover the root
        assert!(f.singular_radius_bound() >= 0.4);
    }

    #[test]
    fn rational_product_matches_pole_mixture() {
        // 1/(w - c) both ways
        let c = c64(0.35, -0.2);
        let rat =
            Germ::rational_product(vec![RationalFactor::new(vec![ONE], vec![-c, ONE]).unwrap()])
                .unwrap();
        let mix = Germ::product_poles(vec![c]).unwrap();
        for w in [c64(1.2, 0.4), c64(-0.8, 1.5), c64(2.0, -2.0)] {
            let a = rat.eval_at(&[w]);
            let b = mix.eval_at(&[w]);
            assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
        }
    }
}
