//! Spectrally accurate contour integration on circles and polycircles.
//!
//! The only rule in play is the trapezoidal rule on circles, which converges
//! geometrically for integrands analytic near the contour. Coefficient
//! extraction and moment extraction share one sample tensor and one discrete
//! Fourier transform; moments are coefficient extraction with an index flip.
//!
//! Sampling is pure; every reduction runs in a fixed order, so values are
//! bit-reproducible across runs.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::domains::{Circle, PolyContour};
use crate::error::{Error, Result};
use crate::series::{Evaluate, Point, TaylorPoly, TruncationBox};
use crate::tensor::{self, pairwise_sum, ZERO};

/// Nodes and weights for `(1/2*pi*i) * integral` over one circle.
///
/// Node `k` sits at `center + radius * e^(i*theta_k)` with
/// `theta_k = 2*pi*(k + rotation)/n`; its weight is
/// `orientation * (radius/n) * e^(i*theta_k)`.
#[derive(Debug, Clone)]
pub struct CircleGrid {
    pub circle: Circle,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

impl CircleGrid {
    pub fn new(circle: Circle, n: usize, rotation: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::NodeCountTooSmall { needed: 4, got: n });
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let scale = circle.orientation as f64 * circle.radius / n as f64;
        for k in 0..n {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + rotation) / n as f64;
            let unit = Complex64::new(theta.cos(), theta.sin());
            nodes.push(circle.center + circle.radius * unit);
            weights.push(scale * unit);
        }
        Ok(CircleGrid {
            circle,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Contraction table pairing each degree with weighted node powers:
    /// `table[d][k] = nodes[k]^d * weights[k]`.
    pub fn moment_table(&self, max_degree: usize) -> Vec<Vec<Complex64>> {
        let mut table = vec![vec![ZERO; self.len()]; max_degree + 1];
        for (k, (&node, &weight)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let mut acc = weight;
            for row in table.iter_mut() {
                row[k] = acc;
                acc *= node;
            }
        }
        table
    }
}

/// Default per-circle node count for a coefficient window: large enough for
/// an alias-free read-out of the box, rounded up to a power of two.
pub fn default_nodes(bounds: &TruncationBox) -> usize {
    (2 * (bounds.max_degree() + 1)).max(64).next_power_of_two()
}

/// Node count that pushes the geometric quadrature error `ratio^N` below
/// `tol`, clamped to `[floor, 8192]` and rounded up to a power of two.
///
/// `ratio` is the modulus ratio between the nearest integrand singularity
/// and the contour; anything `>= 1` means the caller placed the contour
/// badly and simply gets the cap.
pub fn nodes_for_ratio(ratio: f64, tol: f64, floor: usize) -> usize {
    const CAP: usize = 8192;
    if ratio.is_nan() || ratio <= 0.0 {
        return floor.next_power_of_two();
    }
    if ratio >= 1.0 {
        return CAP;
    }
    let needed = (tol.ln() / ratio.ln()).ceil().max(1.0) as usize;
    needed.max(floor).next_power_of_two().min(CAP)
}

fn check_finite(samples: &[Complex64]) -> Result<()> {
    if samples
        .iter()
        .any(|s| !s.re.is_finite() || !s.im.is_finite())
    {
        return Err(Error::ContourPlacement(
            "integrand not finite at a quadrature node; a singularity sits on the contour".into(),
        ));
    }
    Ok(())
}

/// Every combination taking one circle grid per factor, in lexicographic
/// order over the unions.
pub fn factor_combinations(grids: &[Vec<CircleGrid>]) -> Vec<Vec<&CircleGrid>> {
    let mut combos: Vec<Vec<&CircleGrid>> = vec![vec![]];
    for factor in grids {
        let mut next = Vec::with_capacity(combos.len() * factor.len());
        for combo in &combos {
            for grid in factor {
                let mut c = combo.clone();
                c.push(grid);
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}

/// Integrates `g` against the tensor weights of one circle combination.
fn integrate_combo(g: &dyn Evaluate, combo: &[&CircleGrid]) -> Result<Complex64> {
    let axes: Vec<Vec<Complex64>> = combo.iter().map(|c| c.nodes.clone()).collect();
    let mut samples = g.sample_grid(&axes);
    check_finite(&samples)?;
    let shape: Vec<usize> = combo.iter().map(|c| c.len()).collect();
    for (flat, s) in samples.iter_mut().enumerate() {
        let idx = tensor::unflatten(&shape, flat);
        for (j, &k) in idx.iter().enumerate() {
            *s *= combo[j].weights[k];
        }
    }
    Ok(pairwise_sum(&samples))
}

/// Builds the per-factor grids for a polycontour with a uniform node count.
pub fn contour_grids(contour: &PolyContour, nodes: usize) -> Result<Vec<Vec<CircleGrid>>> {
    contour
        .factors()
        .iter()
        .map(|circles| {
            circles
                .iter()
                .map(|&c| CircleGrid::new(c, nodes, 0.0))
                .collect()
        })
        .collect()
}

/// `(1/2*pi*i)^n` times the integral of `g` over the polycontour. Circle
/// unions sum; a `-1` orientation negates that circle's contribution.
pub fn contour_integral(
    g: &dyn Evaluate,
    contour: &PolyContour,
    nodes: usize,
) -> Result<Complex64> {
    let grids = contour_grids(contour, nodes)?;
    integrate_on_grids(g, &grids)
}

/// Same as [`contour_integral`] over pre-built grids.
pub fn integrate_on_grids(g: &dyn Evaluate, grids: &[Vec<CircleGrid>]) -> Result<Complex64> {
    if g.dim() != grids.len() {
        return Err(Error::DimensionMismatch {
            expected: grids.len(),
            got: g.dim(),
        });
    }
    let mut total = ZERO;
    for combo in factor_combinations(grids) {
        total += integrate_combo(g, &combo)?;
    }
    Ok(total)
}

/// All moments `integral of zeta^alpha * g` for `alpha` in the box, computed
/// from one sample tensor per circle combination by axis contractions.
pub fn moments_on_grids(
    g: &dyn Evaluate,
    grids: &[Vec<CircleGrid>],
    bounds: &TruncationBox,
) -> Result<Vec<Complex64>> {
    if g.dim() != grids.len() || bounds.dim() != grids.len() {
        return Err(Error::DimensionMismatch {
            expected: grids.len(),
            got: g.dim(),
        });
    }
    let mut total = vec![ZERO; bounds.len()];
    for combo in factor_combinations(grids) {
        let axes: Vec<Vec<Complex64>> = combo.iter().map(|c| c.nodes.clone()).collect();
        let samples = g.sample_grid(&axes);
        check_finite(&samples)?;
        let mut data = samples;
        for (j, grid) in combo.iter().enumerate() {
            let table = grid.moment_table(bounds.degrees()[j]);
            data = tensor::contract_leading_to_back(&data, grid.len(), &table);
        }
        for (t, d) in total.iter_mut().zip(&data) {
            *t += d;
        }
    }
    Ok(total)
}

/// Forward DFT along every axis of a row-major tensor.
fn dft_forward_axes(mut data: Vec<Complex64>, shape: &[usize]) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    for axis in 0..shape.len() {
        let n = shape[axis];
        let fft = planner.plan_fft_forward(n);
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut line = vec![ZERO; n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, slot) in line.iter().enumerate() {
                    data[base + k * stride] = *slot;
                }
            }
        }
    }
    data
}

fn sample_polycircle(
    f: &dyn Evaluate,
    center: &[Complex64],
    radii: &[f64],
    nodes: usize,
) -> Result<Vec<Complex64>> {
    let axes: Vec<Vec<Complex64>> = center
        .iter()
        .zip(radii)
        .map(|(&a, &r)| {
            (0..nodes)
                .map(|k| {
                    let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
                    a + r * Complex64::new(theta.cos(), theta.sin())
                })
                .collect()
        })
        .collect();
    let samples = f.sample_grid(&axes);
    check_finite(&samples)?;
    Ok(samples)
}

fn check_window(bounds: &TruncationBox, nodes: usize) -> Result<()> {
    let needed = 2 * (bounds.max_degree() + 1);
    if nodes < needed {
        return Err(Error::NodeCountTooSmall { needed, got: nodes });
    }
    Ok(())
}

/// Taylor coefficients of `f` around `center` for the whole box, from one
/// polycircle sample tensor via the DFT. The caller guarantees `f` is
/// holomorphic on a neighborhood of the closed polydisc.
pub fn taylor_coefficients(
    f: &dyn Evaluate,
    center: &Point,
    radii: &[f64],
    bounds: &TruncationBox,
    nodes: usize,
) -> Result<TaylorPoly> {
    Ok(taylor_coefficients_with_sup(f, center, radii, bounds, nodes)?.0)
}

/// [`taylor_coefficients`] plus the sup of `|f|` over the sample tensor.
pub fn taylor_coefficients_with_sup(
    f: &dyn Evaluate,
    center: &Point,
    radii: &[f64],
    bounds: &TruncationBox,
    nodes: usize,
) -> Result<(TaylorPoly, f64)> {
    if center.dim() != f.dim() || radii.len() != f.dim() || bounds.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: bounds.dim(),
        });
    }
    check_window(bounds, nodes)?;
    let samples = sample_polycircle(f, center.coords(), radii, nodes)?;
    let sup = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let shape = vec![nodes; f.dim()];
    let spectrum = dft_forward_axes(samples, &shape);
    let norm = (nodes as f64).powi(f.dim() as i32);
    let mut coeffs = Vec::with_capacity(bounds.len());
    for alpha in bounds.iter() {
        let idx: Vec<usize> = alpha.0.clone();
        let mut value = spectrum[tensor::flat_index(&shape, &idx)] / norm;
        for (j, &a) in alpha.0.iter().enumerate() {
            value *= radii[j].powi(-(a as i32));
        }
        coeffs.push(value);
    }
    Ok((TaylorPoly::new(bounds.clone(), coeffs)?, sup))
}

/// Moment sequence `m_alpha = (1/2*pi*i)^n * integral of zeta^alpha * psi`
/// over origin-centered circles of the given radii, for a `psi` holomorphic
/// outside the polycircle and vanishing at infinity. Reuses the coefficient
/// transform: the moment at `alpha` is the DFT bin at `N-1-alpha` per axis.
pub fn laurent_moments(
    psi: &dyn Evaluate,
    radii: &[f64],
    bounds: &TruncationBox,
    nodes: usize,
) -> Result<Vec<Complex64>> {
    Ok(laurent_moments_with_sup(psi, radii, bounds, nodes)?.0)
}

/// [`laurent_moments`] plus the sup of `|psi|` over the sample tensor: the
/// ingredient of the read-out's noise bound `eps * sup * r^(alpha+1)`.
pub fn laurent_moments_with_sup(
    psi: &dyn Evaluate,
    radii: &[f64],
    bounds: &TruncationBox,
    nodes: usize,
) -> Result<(Vec<Complex64>, f64)> {
    if radii.len() != psi.dim() || bounds.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            got: bounds.dim(),
        });
    }
    check_window(bounds, nodes)?;
    let center = vec![ZERO; psi.dim()];
    let samples = sample_polycircle(psi, &center, radii, nodes)?;
    let sup = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let shape = vec![nodes; psi.dim()];
    let spectrum = dft_forward_axes(samples, &shape);
    let norm = (nodes as f64).powi(psi.dim() as i32);
    let mut moments = Vec::with_capacity(bounds.len());
    for alpha in bounds.iter() {
        let idx: Vec<usize> = alpha.0.iter().map(|&a| nodes - 1 - a).collect();
        let mut value = spectrum[tensor::flat_index(&shape, &idx)] / norm;
        for (j, &a) in alpha.0.iter().enumerate() {
            value *= radii[j].powi(a as i32 + 1);
        }
        moments.push(value);
    }
    Ok((moments, sup))
}
