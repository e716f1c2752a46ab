//! Truncated multivariate power series with exact-shape arithmetic:
//! evaluation, dilatation, coefficientwise products and coefficient access.
//!
//! A series lives on a per-variable degree box; the dense coefficient tensor
//! is the honestly known window onto the underlying infinite object.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{self, ZERO};

/// A multi-index in n variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs dimension >= 1");
        MultiIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// `alpha! = alpha_1! * ... * alpha_n!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(|k| k as f64).product::<f64>())
            .product()
    }

    /// The monomial value `z^alpha` (with `0^0 = 1`).
    pub fn monomial(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.0.len());
        let mut acc = tensor::ONE;
        for (&a, &zj) in self.0.iter().zip(z) {
            acc *= zj.powu(a as u32);
        }
        acc
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// Per-variable degree caps `(D_1, ..., D_n)`. Enumeration of the contained
/// multi-indices is lexicographic (row-major over the coefficient tensor).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationBox {
    degrees: Vec<usize>,
}

impl TruncationBox {
    pub fn new(degrees: Vec<usize>) -> Self {
        assert!(!degrees.is_empty(), "box needs dimension >= 1");
        TruncationBox { degrees }
    }

    /// Uniform box `(d, ..., d)` in `n` variables.
    pub fn cube(dim: usize, d: usize) -> Self {
        TruncationBox::new(vec![d; dim])
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        *self.degrees.iter().max().unwrap()
    }

    /// Sum of the per-variable caps; the largest `|alpha|` in the box.
    pub fn diameter(&self) -> usize {
        self.degrees.iter().sum()
    }

    /// Tensor shape `(D_1+1, ..., D_n+1)`.
    pub fn shape(&self) -> Vec<usize> {
        self.degrees.iter().map(|&d| d + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.degrees.iter().map(|&d| d + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        alpha.dim() == self.dim() && alpha.0.iter().zip(&self.degrees).all(|(a, d)| a <= d)
    }

    pub fn flat_index(&self, alpha: &MultiIndex) -> Result<usize> {
        if !self.contains(alpha) {
            return Err(Error::IndexOutsideBox {
                alpha: alpha.0.clone(),
                bounds: self.degrees.clone(),
            });
        }
        Ok(tensor::flat_index(&self.shape(), &alpha.0))
    }

    pub fn alpha_at(&self, flat: usize) -> MultiIndex {
        MultiIndex(tensor::unflatten(&self.shape(), flat))
    }

    /// Lexicographic enumeration of all multi-indices in the box.
    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len()).map(move |flat| self.alpha_at(flat))
    }

    /// Componentwise minimum of the caps.
    pub fn intersect(&self, other: &TruncationBox) -> Result<TruncationBox> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(TruncationBox::new(
            self.degrees
                .iter()
                .zip(&other.degrees)
                .map(|(a, b)| *a.min(b))
                .collect(),
        ))
    }
}

/// A point of C^n with coordinatewise operations.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        assert!(!coords.is_empty());
        assert!(
            coords.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            "point coordinates must be finite"
        );
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    /// True when some coordinate is exactly zero, so the point lies on a
    /// coordinate hyperplane and has no coordinatewise inverse.
    pub fn on_hyperplane(&self) -> bool {
        self.0.contains(&ZERO)
    }

    pub fn inverse(&self) -> Result<Point> {
        if let Some(j) = self.0.iter().position(|c| *c == ZERO) {
            return Err(Error::HyperplanePoint { coordinate: j });
        }
        Ok(Point(self.0.iter().map(|c| c.inv()).collect()))
    }

    /// Coordinatewise product.
    pub fn mul(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    /// The identity of coordinatewise multiplication, `(1, ..., 1)`.
    pub fn ones(dim: usize) -> Point {
        Point(vec![tensor::ONE; dim])
    }
}

/// Anything that can be evaluated at points of C^n. Implementations may
/// override the grid sampler when evaluation separates over coordinates.
pub trait Evaluate: Sync {
    fn dim(&self) -> usize;

    fn eval_at(&self, z: &[Complex64]) -> Complex64;

    /// Per-variable polynomial degree when one is known; lets quadrature
    /// pick alias-free node counts.
    fn degree_hint(&self) -> Option<Vec<usize>> {
        None
    }

    /// The coefficient view, when the evaluator is a stored series. Lets
    /// application paths factor a batched quadrature through the monomial
    /// basis exactly.
    fn as_taylor(&self) -> Option<&TaylorPoly> {
        None
    }

    /// Samples on the tensor grid spanned by the per-axis node lists, in
    /// row-major order.
    fn sample_grid(&self, axes: &[Vec<Complex64>]) -> Vec<Complex64> {
        debug_assert_eq!(axes.len(), self.dim());
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = shape.iter().product();
        let mut point = vec![ZERO; axes.len()];
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = tensor::unflatten(&shape, flat);
            for (j, &k) in idx.iter().enumerate() {
                point[j] = axes[j][k];
            }
            out.push(self.eval_at(&point));
        }
        out
    }
}

/// Closure adapter for [`Evaluate`].
pub struct FnEval<F: Fn(&[Complex64]) -> Complex64 + Sync> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[Complex64]) -> Complex64 + Sync> FnEval<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnEval { dim, f }
    }
}

impl<F: Fn(&[Complex64]) -> Complex64 + Sync> Evaluate for FnEval<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval_at(&self, z: &[Complex64]) -> Complex64 {
        (self.f)(z)
    }
}

/// A truncated multivariate Taylor series: dense row-major coefficient
/// tensor over a truncation box. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPoly {
    bounds: TruncationBox,
    coeffs: Vec<Complex64>,
}

impl TaylorPoly {
    /// Builds a series from its full coefficient tensor (row-major over the
    /// box shape). Non-finite entries are rejected here rather than being
    /// allowed to propagate.
    pub fn new(bounds: TruncationBox, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                got: coeffs.len(),
            });
        }
        for (index, c) in coeffs.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFiniteCoefficient { index });
            }
        }
        Ok(TaylorPoly { bounds, coeffs })
    }

    pub fn zero(bounds: TruncationBox) -> Self {
        let coeffs = vec![ZERO; bounds.len()];
        TaylorPoly { bounds, coeffs }
    }

    /// Sparse construction; omitted multi-indices are zero.
    pub fn from_terms(bounds: TruncationBox, terms: &[(MultiIndex, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![ZERO; bounds.len()];
        for (alpha, c) in terms {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    index: bounds.flat_index(alpha)?,
                });
            }
            coeffs[bounds.flat_index(alpha)?] = *c;
        }
        Ok(TaylorPoly { bounds, coeffs })
    }

    /// The monomial `zeta^alpha` on the given box.
    pub fn monomial(bounds: TruncationBox, alpha: &MultiIndex) -> Result<Self> {
        TaylorPoly::from_terms(bounds, &[(alpha.clone(), tensor::ONE)])
    }

    /// The all-ones series, the unit of the coefficientwise product.
    pub fn all_ones(bounds: TruncationBox) -> Self {
        let coeffs = vec![tensor::ONE; bounds.len()];
        TaylorPoly { bounds, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &TruncationBox {
        &self.bounds
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Result<Complex64> {
        Ok(self.coeffs[self.bounds.flat_index(alpha)?])
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Evaluates by nested Horner recursion, one nesting level per variable.
    pub fn eval(&self, z: &Point) -> Result<Complex64> {
        self.check_dim(z.dim())?;
        Ok(horner(&self.coeffs, &self.bounds.shape(), z.coords()))
    }

    /// The dilatation `f_z`: coefficient at `alpha` becomes `f_alpha * z^alpha`.
    pub fn dilate(&self, z: &Point) -> Result<TaylorPoly> {
        self.check_dim(z.dim())?;
        let shape = self.bounds.shape();
        let tables: Vec<Vec<Complex64>> = z
            .coords()
            .iter()
            .zip(self.bounds.degrees())
            .map(|(&zj, &d)| tensor::power_column(zj, d))
            .collect();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (flat, &c) in self.coeffs.iter().enumerate() {
            let idx = tensor::unflatten(&shape, flat);
            let mut factor = tensor::ONE;
            for (j, &a) in idx.iter().enumerate() {
                factor *= tables[j][a];
            }
            coeffs.push(c * factor);
        }
        TaylorPoly::new(self.bounds.clone(), coeffs)
    }

    /// Coefficientwise (Hadamard) product. Mismatched boxes intersect to the
    /// smaller box: the intersection is the honestly known window.
    pub fn hadamard(&self, other: &TaylorPoly) -> Result<TaylorPoly> {
        self.check_dim(other.dim())?;
        let bounds = self.bounds.intersect(&other.bounds)?;
        let mut coeffs = Vec::with_capacity(bounds.len());
        for alpha in bounds.iter() {
            coeffs.push(self.coeff(&alpha)? * other.coeff(&alpha)?);
        }
        TaylorPoly::new(bounds, coeffs)
    }

    /// `D^alpha f(0) / alpha!`, i.e. the coefficient at `alpha`.
    pub fn scaled_derivative(&self, alpha: &MultiIndex) -> Result<Complex64> {
        self.coeff(alpha)
    }

    pub fn add(&self, other: &TaylorPoly) -> Result<TaylorPoly> {
        self.check_dim(other.dim())?;
        let bounds = self.bounds.intersect(&other.bounds)?;
        let mut coeffs = Vec::with_capacity(bounds.len());
        for alpha in bounds.iter() {
            coeffs.push(self.coeff(&alpha)? + other.coeff(&alpha)?);
        }
        TaylorPoly::new(bounds, coeffs)
    }

    pub fn scale(&self, c: Complex64) -> TaylorPoly {
        TaylorPoly {
            bounds: self.bounds.clone(),
            coeffs: self.coeffs.iter().map(|x| c * x).collect(),
        }
    }
}

impl Evaluate for TaylorPoly {
    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn eval_at(&self, z: &[Complex64]) -> Complex64 {
        horner(&self.coeffs, &self.bounds.shape(), z)
    }

    fn degree_hint(&self) -> Option<Vec<usize>> {
        Some(self.bounds.degrees().to_vec())
    }

    fn as_taylor(&self) -> Option<&TaylorPoly> {
        Some(self)
    }

    /// Separable sampling: per-axis power tables then one contraction per
    /// axis, instead of a Horner pass per grid node.
    fn sample_grid(&self, axes: &[Vec<Complex64>]) -> Vec<Complex64> {
        debug_assert_eq!(axes.len(), self.dim());
        let mut tensor_data = self.coeffs.clone();
        for (j, nodes) in axes.iter().enumerate() {
            let d = self.bounds.degrees()[j];
            let table = tensor::power_table(nodes, d);
            tensor_data = tensor::contract_leading_to_back(&tensor_data, d + 1, &table);
        }
        tensor_data
    }
}

fn horner(coeffs: &[Complex64], shape: &[usize], z: &[Complex64]) -> Complex64 {
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
        acc = acc * z[0] + horner(chunk, &shape[1..], &z[1..]);
    }
    acc
}
