//! JSON literal formats for every value the CLI and configs exchange:
//! series, domains, contours, germs, functionals, multipliers and delta
//! sequences. Each literal is a plain serde struct with a `build` method
//! producing the validated core value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domains::{Circle, InnerCompact, PlanarFactor, PolyContour, ProductDomain};
use crate::duality::{AnalyticFunctional, Germ, MixtureTerm, RationalFactor};
use crate::error::{Error, Result};
use crate::multiplier::{EngineParams, Multiplier, TaylorGerm, TaylorRationalFactor};
use crate::seminorms::DeltaSequence;
use crate::series::{MultiIndex, TaylorPoly, TruncationBox};

/// A complex number as the two-element array `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cx(pub f64, pub f64);

impl From<Cx> for Complex64 {
    fn from(c: Cx) -> Self {
        Complex64::new(c.0, c.1)
    }
}

impl From<Complex64> for Cx {
    fn from(c: Complex64) -> Self {
        Cx(c.re, c.im)
    }
}

fn to_complex(v: &[Cx]) -> Vec<Complex64> {
    v.iter().map(|&c| c.into()).collect()
}

/// One sparse coefficient: omitted multi-indices are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub alpha: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// `{ "dim": n, "box": [D1,...,Dn], "coeffs": [ {alpha, re, im}, ... ] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesLiteral {
    pub dim: usize,
    #[serde(rename = "box")]
    pub bounds: Vec<usize>,
    pub coeffs: Vec<CoeffEntry>,
}

impl SeriesLiteral {
    pub fn build(&self) -> Result<TaylorPoly> {
        if self.bounds.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: self.bounds.len(),
            });
        }
        let bounds = TruncationBox::new(self.bounds.clone());
        let terms: Vec<(MultiIndex, Complex64)> = self
            .coeffs
            .iter()
            .map(|e| (MultiIndex::new(e.alpha.clone()), Complex64::new(e.re, e.im)))
            .collect();
        TaylorPoly::from_terms(bounds, &terms)
    }

    pub fn from_poly(poly: &TaylorPoly) -> Self {
        let mut coeffs = Vec::new();
        for (flat, c) in poly.coeffs().iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                coeffs.push(CoeffEntry {
                    alpha: poly.bounds().alpha_at(flat).0,
                    re: c.re,
                    im: c.im,
                });
            }
        }
        SeriesLiteral {
            dim: poly.dim(),
            bounds: poly.bounds().degrees().to_vec(),
            coeffs,
        }
    }
}

/// `{"disc": {"center": [re,im], "radius": r}}` or
/// `{"annulus": {"r_in": a, "r_out": b}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorLiteral {
    Disc { center: Cx, radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainLiteral {
    pub factors: Vec<FactorLiteral>,
}

impl DomainLiteral {
    pub fn build(&self) -> Result<ProductDomain> {
        ProductDomain::new(
            self.factors
                .iter()
                .map(|f| match f {
                    FactorLiteral::Disc { center, radius } => {
                        PlanarFactor::disc((*center).into(), *radius)
                    }
                    FactorLiteral::Annulus { r_in, r_out } => PlanarFactor::annulus(*r_in, *r_out),
                })
                .collect::<Result<_>>()?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFactorLiteral {
    pub num: Vec<Cx>,
    pub den: Vec<Cx>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTermLiteral {
    pub coeff: Cx,
    pub poles: Vec<Cx>,
}

/// Kernel germ on the complement side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GermLiteral {
    /// `prod_j 1/(w_j - poles[j])`
    ProductPoles { poles: Vec<Cx> },
    /// `prod_j num_j(w_j)/den_j(w_j)` vanishing at infinity
    Rational { factors: Vec<RationalFactorLiteral> },
    /// finite sum of scaled product-pole terms
    PoleMixture { terms: Vec<MixtureTermLiteral> },
    /// truncated expansion at infinity
    LaurentSequence {
        #[serde(rename = "box")]
        bounds: Vec<usize>,
        coeffs: Vec<CoeffEntry>,
    },
}

impl GermLiteral {
    pub fn build(&self) -> Result<Germ> {
        match self {
            GermLiteral::ProductPoles { poles } => Germ::product_poles(to_complex(poles)),
            GermLiteral::Rational { factors } => Germ::rational_product(
                factors
                    .iter()
                    .map(|f| RationalFactor::new(to_complex(&f.num), to_complex(&f.den)))
                    .collect::<Result<_>>()?,
            ),
            GermLiteral::PoleMixture { terms } => Germ::pole_mixture(
                terms
                    .iter()
                    .map(|t| MixtureTerm {
                        coeff: t.coeff.into(),
                        poles: to_complex(&t.poles),
                    })
                    .collect(),
            ),
            GermLiteral::LaurentSequence { bounds, coeffs } => {
                let bounds = TruncationBox::new(bounds.clone());
                let mut seq = vec![Complex64::new(0.0, 0.0); bounds.len()];
                for e in coeffs {
                    let idx = bounds.flat_index(&MultiIndex::new(e.alpha.clone()))?;
                    seq[idx] = Complex64::new(e.re, e.im);
                }
                Germ::laurent_tail(bounds, seq)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleLiteral {
    pub center: Cx,
    pub radius: f64,
    pub orientation: i8,
}

/// Either explicit circle unions per factor, or a request to place
/// separating circles automatically against a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourLiteral {
    Circles(Vec<Vec<CircleLiteral>>),
    Auto { margin: f64 },
}

impl ContourLiteral {
    pub fn build(&self, kernel: &Germ, domain: Option<&ProductDomain>) -> Result<PolyContour> {
        match self {
            ContourLiteral::Circles(factors) => {
                if factors.len() != kernel.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: kernel.dim(),
                        got: factors.len(),
                    });
                }
                Ok(PolyContour::new(
                    factors
                        .iter()
                        .map(|circles| {
                            circles
                                .iter()
                                .map(|c| Circle::new(c.center.into(), c.radius, c.orientation))
                                .collect()
                        })
                        .collect(),
                ))
            }
            ContourLiteral::Auto { margin } => {
                let domain = domain.ok_or_else(|| {
                    Error::ContourPlacement("automatic contour placement needs a domain".into())
                })?;
                if domain.dim() != kernel.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: kernel.dim(),
                        got: domain.dim(),
                    });
                }
                let factors = kernel
                    .singular_radii()
                    .iter()
                    .zip(domain.factors())
                    .map(|(&s, factor)| {
                        crate::domains::separating_contour(
                            &InnerCompact::origin_disc(s),
                            factor,
                            *margin,
                        )
                    })
                    .collect::<Result<_>>()?;
                Ok(PolyContour::new(factors))
            }
        }
    }
}

/// `{ "kernel": <germ>, "contour": <contour>, "nodes": N }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalLiteral {
    pub kernel: GermLiteral,
    pub contour: ContourLiteral,
    pub nodes: usize,
}

impl FunctionalLiteral {
    pub fn build(&self, domain: Option<&ProductDomain>) -> Result<AnalyticFunctional> {
        let kernel = self.kernel.build()?;
        let contour = self.contour.build(&kernel, domain)?;
        AnalyticFunctional::new(kernel, contour, self.nodes)
    }
}

/// Where a multiplier's sequence comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierSource {
    /// product-pole Laurent symbol: the dilation family
    LaurentPoles(Vec<Cx>),
    /// general pole-mixture Laurent symbol
    PoleMixture { terms: Vec<MixtureTermLiteral> },
    /// rational Taylor symbol regular at the origin
    TaylorRational { factors: Vec<RationalFactorLiteral> },
    /// explicit eigenvalue sequence over the box
    Sequence(Vec<CoeffEntry>),
    /// represented by an analytic functional
    Functional(FunctionalLiteral),
}

/// `{ "domain": ..., "source": {...}, "box": [...] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierLiteral {
    pub domain: DomainLiteral,
    pub source: MultiplierSource,
    #[serde(rename = "box")]
    pub bounds: Vec<usize>,
}

impl MultiplierLiteral {
    pub fn build(&self, params: &EngineParams) -> Result<Multiplier> {
        let domain = self.domain.build()?;
        let bounds = TruncationBox::new(self.bounds.clone());
        match &self.source {
            MultiplierSource::LaurentPoles(poles) => {
                let germ = Germ::product_poles(to_complex(poles))?;
                Multiplier::from_laurent_germ(domain, bounds, germ, params)
            }
            MultiplierSource::PoleMixture { terms } => {
                let germ = GermLiteral::PoleMixture {
                    terms: terms.clone(),
                }
                .build()?;
                Multiplier::from_laurent_germ(domain, bounds, germ, params)
            }
            MultiplierSource::TaylorRational { factors } => {
                let germ = TaylorGerm::rational_product(
                    factors
                        .iter()
                        .map(|f| TaylorRationalFactor::new(to_complex(&f.num), to_complex(&f.den)))
                        .collect::<Result<_>>()?,
                )?;
                Multiplier::from_taylor_germ(domain, bounds, germ, params)
            }
            MultiplierSource::Sequence(entries) => {
                let mut seq = vec![Complex64::new(0.0, 0.0); bounds.len()];
                for e in entries {
                    let idx = bounds.flat_index(&MultiIndex::new(e.alpha.clone()))?;
                    seq[idx] = Complex64::new(e.re, e.im);
                }
                Multiplier::from_sequence(domain, bounds, seq)
            }
            MultiplierSource::Functional(f) => {
                let functional = f.build(Some(&domain))?;
                Multiplier::from_functional(domain, bounds, functional, params)
            }
        }
    }
}

/// `{"kind": "geometric", "ratio": q, "length": L}` or
/// `{"kind": "explicit", "values": [...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaLiteral {
    Geometric { ratio: f64, length: usize },
    Explicit { values: Vec<f64> },
}

impl DeltaLiteral {
    pub fn build(&self) -> Result<DeltaSequence> {
        match self {
            DeltaLiteral::Geometric { ratio, length } => DeltaSequence::geometric(*ratio, *length),
            DeltaLiteral::Explicit { values } => DeltaSequence::new(values.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Evaluate, Point};
    use crate::tensor::c64;

    #[test]
    fn series_literal_roundtrip() {
        let json = r#"{
            "dim": 2,
            "box": [2, 1],
            "coeffs": [
                {"alpha": [0, 0], "re": 1.0, "im": 0.0},
                {"alpha": [2, 1], "re": -0.5, "im": 2.0}
            ]
        }"#;
        let lit: SeriesLiteral = serde_json::from_str(json).unwrap();
        let poly = lit.build().unwrap();
        assert_eq!(
            poly.coeff(&MultiIndex::new(vec![2, 1])).unwrap(),
            c64(-0.5, 2.0)
        );
        assert_eq!(
            poly.coeff(&MultiIndex::new(vec![1, 0])).unwrap(),
            c64(0.0, 0.0)
        );
        let back = SeriesLiteral::from_poly(&poly);
        assert_eq!(back.build().unwrap(), poly);
    }

    #[test]
    fn domain_literal_parses_both_kinds() {
        let json = r#"{
            "factors": [
                {"disc": {"center": [0.0, 0.0], "radius": 1.5}},
                {"annulus": {"r_in": 0.5, "r_out": 2.0}}
            ]
        }"#;
        let lit: DomainLiteral = serde_json::from_str(json).unwrap();
        let d = lit.build().unwrap();
        assert_eq!(d.dim(), 2);
        assert!(!d.is_runge());
    }

    #[test]
    fn functional_literal_with_auto_contour() {
        let json = r#"{
            "kernel": {"product_poles": {"poles": [[0.4, 0.1]]}},
            "contour": {"auto": {"margin": 0.5}},
            "nodes": 64
        }"#;
        let lit: FunctionalLiteral = serde_json::from_str(json).unwrap();
        let domain = ProductDomain::polydisc(&[1.0]).unwrap();
        let t = lit.build(Some(&domain)).unwrap();
        // moments of the simple pole are powers of the pole
        let m = t.moments(&TruncationBox::new(vec![4])).unwrap();
        let c = c64(0.4, 0.1);
        for (k, v) in m.iter().enumerate() {
            let expected = c.powu(k as u32);
            assert!((v - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn multiplier_literal_sources() {
        let params = EngineParams::default();
        let dilation: MultiplierLiteral = serde_json::from_str(
            r#"{
                "domain": {"factors": [{"disc": {"center": [0.0, 0.0], "radius": 1.0}}]},
                "source": {"laurent_poles": [[0.4, 0.1]]},
                "box": [6]
            }"#,
        )
        .unwrap();
        let m1 = dilation.build(&params).unwrap();
        let taylor: MultiplierLiteral = serde_json::from_str(
            r#"{
                "domain": {"factors": [{"disc": {"center": [0.0, 0.0], "radius": 1.0}}]},
                "source": {"taylor_rational": {"factors": [{"num": [[1.0, 0.0]], "den": [[1.0, 0.0], [-0.4, -0.1]]}]}},
                "box": [6]
            }"#,
        )
        .unwrap();
        let m2 = taylor.build(&params).unwrap();
        for (a, b) in m1.sequence().iter().zip(m2.sequence()) {
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{a} vs {b}");
        }
        let sequence: MultiplierLiteral = serde_json::from_str(
            r#"{
                "domain": {"factors": [{"disc": {"center": [0.0, 0.0], "radius": 1.0}}]},
                "source": {"sequence": [{"alpha": [0], "re": 1.0, "im": 0.0}, {"alpha": [2], "re": 0.5, "im": 0.0}]},
                "box": [2]
            }"#,
        )
        .unwrap();
        let m3 = sequence.build(&params).unwrap();
        assert_eq!(m3.sequence()[1], c64(0.0, 0.0));
        assert_eq!(m3.sequence()[2], c64(0.5, 0.0));
    }

    #[test]
    fn rational_germ_literal() {
        // 1/(w^2 (w - 0.3)) through the coefficient-array form
        let lit: GermLiteral = serde_json::from_str(
            r#"{"rational": {"factors": [{"num": [[1.0, 0.0]], "den": [[0.0, 0.0], [0.0, 0.0], [-0.3, 0.0], [1.0, 0.0]]}]}}"#,
        )
        .unwrap();
        let g = lit.build().unwrap();
        let w = c64(1.2, 0.5);
        let expected = (w.powu(2) * (w - c64(0.3, 0.0))).inv();
        assert!((g.eval_at(&[w]) - expected).norm() <= 1e-14 * expected.norm());
        // vanishing at infinity is rejected when violated
        let bad: GermLiteral = serde_json::from_str(
            r#"{"rational": {"factors": [{"num": [[0.0, 0.0], [1.0, 0.0]], "den": [[1.0, 0.0], [1.0, 0.0]]}]}}"#,
        )
        .unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn delta_literal_kinds() {
        let g: DeltaLiteral =
            serde_json::from_str(r#"{"kind": "geometric", "ratio": 0.5, "length": 6}"#).unwrap();
        assert_eq!(g.build().unwrap().len(), 7);
        let e: DeltaLiteral =
            serde_json::from_str(r#"{"kind": "explicit", "values": [1.0, 0.5, 0.25]}"#).unwrap();
        assert_eq!(e.build().unwrap().terms(), &[1.0, 0.5, 0.25]);
        let bad: DeltaLiteral =
            serde_json::from_str(r#"{"kind": "geometric", "ratio": 1.5, "length": 6}"#).unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn laurent_sequence_germ_literal() {
        let lit: GermLiteral = serde_json::from_str(
            r#"{"laurent_sequence": {"box": [1], "coeffs": [{"alpha": [1], "re": 1.0, "im": 0.0}]}}"#,
        )
        .unwrap();
        let g = lit.build().unwrap();
        // 1/w^2 at w = 2i: -1/4
        let v = g.eval_at(&[c64(0.0, 2.0)]);
        assert!((v - c64(-0.25, 0.0)).norm() < 1e-14);
        let _ = Point::new(vec![c64(1.0, 0.0)]);
    }
}
