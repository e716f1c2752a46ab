//! The invariant battery: quadrature sanity, extraction windows, the
//! eigenvector property, the three application routes, both isomorphism
//! roundtrips, the duality roundtrip, the composition homomorphism and the
//! hyperplane fill. One pass/fail row per check; any operational error
//! fails its row instead of aborting the run.

use multcalc::domains::{Circle, PolyContour};
use multcalc::duality::{AnalyticFunctional, Germ};
use multcalc::literal::MultiplierSource;
use multcalc::multiplier::{apply_laurent_germ, apply_taylor_germ, Multiplier, TaylorGerm};
use multcalc::quadrature;
use multcalc::sampling;
use multcalc::series::{FnEval, Point, TaylorPoly, TruncationBox};
use multcalc::Complex64;

use crate::config::ExperimentConfig;
use crate::report::{Environment, RunReport};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Runs one check, turning an operational error into a failed row.
fn row(
    report: &mut RunReport,
    check: &str,
    anchor: &str,
    tol: f64,
    body: impl FnOnce() -> anyhow::Result<f64>,
) {
    match body() {
        Ok(err) => report.push(check, anchor, err, tol),
        Err(e) => report.push_error(check, anchor, tol, e.to_string()),
    }
}

pub fn run(config: &ExperimentConfig) -> anyhow::Result<bool> {
    let mult_lit = config.require(config.multiplier.as_ref(), ".multiplier")?;
    let params = config.engine_params();
    let tol = config.tol();
    let seed = config.seed();
    let grid = config.z_grid();
    let bounds = TruncationBox::new(mult_lit.bounds.clone());
    let domain = mult_lit.domain.build()?;
    let dim = domain.dim();

    let mut report = RunReport::new(
        "verify",
        Environment {
            nodes: config.nodes,
            bounds: bounds.degrees().to_vec(),
            z_grid: [grid.radii, grid.angles],
            seed,
            tol,
        },
    );

    let unit_circle = PolyContour::new(vec![vec![Circle::new(c64(0.0, 0.0), 1.0, 1)]]);

    // plain residue and monomial rows pin the quadrature normalization
    row(
        &mut report,
        "residue-unit",
        "cauchy-quadrature",
        1e-13,
        || {
            let g = FnEval::new(1, |z: &[Complex64]| z[0].inv());
            let v = quadrature::contour_integral(&g, &unit_circle, 32)?;
            Ok((v - c64(1.0, 0.0)).norm())
        },
    );
    row(
        &mut report,
        "monomial-no-residue",
        "cauchy-quadrature",
        1e-13,
        || {
            let mut worst: f64 = 0.0;
            for m in 0..4u32 {
                let g = FnEval::new(1, move |z: &[Complex64]| z[0].powu(m));
                worst = worst.max(quadrature::contour_integral(&g, &unit_circle, 32)?.norm());
            }
            Ok(worst)
        },
    );

    // geometric error decay of the trapezoidal rule
    {
        let g = FnEval::new(1, |z: &[Complex64]| (z[0] - c64(0.3, 0.0)).inv());
        let mut errors = Vec::new();
        let mut failure: Option<anyhow::Error> = None;
        for nodes in [8usize, 16, 32] {
            match quadrature::contour_integral(&g, &unit_circle, nodes) {
                Ok(v) => errors.push((v - c64(1.0, 0.0)).norm()),
                Err(e) => failure = Some(e.into()),
            }
        }
        if let Some(e) = failure {
            report.push_error(
                "spectral-convergence",
                "cauchy-quadrature",
                1e-13,
                e.to_string(),
            );
        } else {
            let geometric = errors
                .windows(2)
                .all(|w| w[0] <= 1e-13 || w[1] * 4.0 <= w[0]);
            let last = *errors.last().unwrap();
            if geometric {
                report.push("spectral-convergence", "cauchy-quadrature", last, 1e-13);
            } else {
                report.push_error(
                    "spectral-convergence",
                    "cauchy-quadrature",
                    1e-13,
                    format!("non-geometric error sequence {errors:?}"),
                );
            }
        }
    }

    // same action from two admissible contours
    row(
        &mut report,
        "contour-independence",
        "cauchy-quadrature",
        1e-10,
        || {
            let kernel = Germ::product_poles(vec![c64(0.4, -0.15)])?;
            let h = FnEval::new(1, |z: &[Complex64]| {
                z[0].powu(4) + c64(0.5, 0.2) * z[0] + c64(1.0, 0.0)
            });
            let mut values = Vec::new();
            for r in [0.62, 0.9] {
                let contour = PolyContour::new(vec![vec![Circle::new(c64(0.0, 0.0), r, 1)]]);
                let t = AnalyticFunctional::new(kernel.clone(), contour, 128)?;
                values.push(t.act(&h)?);
            }
            Ok((values[0] - values[1]).norm())
        },
    );

    // coefficient extraction against closed-form factorials, at the config
    // node count: an aliasing-window violation fails here
    row(
        &mut report,
        "coefficient-extraction",
        "coefficient-window",
        tol.max(1e-9),
        || {
            let exp_product =
                FnEval::new(dim, |z: &[Complex64]| z.iter().map(|w| w.exp()).product());
            let nodes = config
                .nodes
                .unwrap_or_else(|| quadrature::default_nodes(&bounds));
            let coeffs = quadrature::taylor_coefficients(
                &exp_product,
                &Point::new(vec![c64(0.0, 0.0); dim]),
                &vec![1.0; dim],
                &bounds,
                nodes,
            )?;
            let mut worst: f64 = 0.0;
            for (flat, got) in coeffs.coeffs().iter().enumerate() {
                let alpha = bounds.alpha_at(flat);
                let expected = 1.0 / alpha.factorial();
                // scaled error: the tiny high-order factorials sit below the
                // sample rounding floor, the unit constant term sets the scale
                worst = worst.max((got - c64(expected, 0.0)).norm());
            }
            Ok(worst)
        },
    );

    // moment extraction against the closed-form mixture oracle
    row(
        &mut report,
        "moment-extraction",
        "moment-window",
        tol.max(1e-10),
        || {
            let mut rng = sampling::rng(seed ^ 0x6d6f6d);
            let terms = sampling::random_mixture_terms(&mut rng, dim, 0.7);
            let germ = Germ::pole_mixture(terms.clone())?;
            let oracle = sampling::mixture_moments(&terms, &bounds);
            let radii: Vec<f64> = germ.singular_radii().iter().map(|s| 1.25 * s).collect();
            let nodes = config.nodes.unwrap_or_else(|| {
                quadrature::nodes_for_ratio(0.8, 1e-14, quadrature::default_nodes(&bounds))
            });
            let measured = germ.moments(&radii, &bounds, nodes)?;
            let mut worst: f64 = 0.0;
            for (a, b) in measured.iter().zip(&oracle) {
                worst = worst.max((a - b).norm() / b.norm().max(1e-300));
            }
            Ok(worst)
        },
    );

    // the configured multiplier: every eigenvalue measured back through the
    // integral route at sampled points
    let multiplier = mult_lit.build(&params);
    row(
        &mut report,
        "eigenvector-property",
        "eigenvector-property",
        tol,
        || {
            let m = multiplier.as_ref().map_err(clone_err)?;
            let zs = sampling::domain_points(m.domain(), config.z_count.unwrap_or(25), 0.9);
            let rep = m.eigencheck_box(&zs, &params)?;
            Ok(rep.max_error)
        },
    );

    // three application routes on seeded polynomials
    let dilation_c: Vec<Complex64> = match &mult_lit.source {
        MultiplierSource::LaurentPoles(poles) => {
            poles.iter().map(|p| Complex64::new(p.0, p.1)).collect()
        }
        _ => vec![c64(0.4, 0.1); dim],
    };
    row(
        &mut report,
        "formula-equivalence",
        "application-formula",
        tol,
        || {
            let laurent = Germ::product_poles(dilation_c.clone())?;
            let taylor = TaylorGerm::geometric(&dilation_c)?;
            let m = Multiplier::dilation(domain.clone(), bounds.clone(), &dilation_c)?;
            let mut rng = sampling::rng(seed ^ 0x666d6c);
            let mut worst: f64 = 0.0;
            for _ in 0..3 {
                let f = sampling::random_poly(&mut rng, &bounds);
                let seq = m.apply_sequence(&f)?;
                for z in sampling::domain_points(&domain, 5, 0.8) {
                    let via_laurent = apply_laurent_germ(&laurent, &f, &z, &domain, &params)?;
                    let via_taylor = apply_taylor_germ(&taylor, &f, &z, &domain, &params)?;
                    let via_sequence = seq.eval(&z)?;
                    let scale = 1.0 + via_sequence.norm();
                    worst = worst.max((via_laurent - via_taylor).norm() / scale);
                    worst = worst.max((via_laurent - via_sequence).norm() / scale);
                }
            }
            Ok(worst)
        },
    );

    // multiplier -> functional -> multiplier on sequences
    row(
        &mut report,
        "sequence-roundtrip",
        "sequence-isomorphism",
        tol,
        || {
            let m = multiplier.as_ref().map_err(clone_err)?;
            let t = m.representing_functional()?;
            let back =
                Multiplier::from_functional(m.domain().clone(), m.bounds().clone(), t, &params)?;
            let scale = m.sequence().iter().map(|v| v.norm()).fold(1e-300, f64::max);
            let mut worst: f64 = 0.0;
            for (a, b) in back.sequence().iter().zip(m.sequence()) {
                worst = worst.max((a - b).norm() / scale);
            }
            Ok(worst)
        },
    );

    // functional -> multiplier -> functional on moments
    row(
        &mut report,
        "moment-roundtrip",
        "sequence-isomorphism",
        tol,
        || {
            let mut rng = sampling::rng(seed ^ 0x746d74);
            let kernel = sampling::random_pole_mixture(&mut rng, dim, 0.6);
            let contour = PolyContour::new(
                kernel
                    .singular_radii()
                    .iter()
                    .map(|&s| vec![Circle::new(c64(0.0, 0.0), (1.3 * s).max(0.3), 1)])
                    .collect(),
            );
            let t = AnalyticFunctional::new(kernel, contour, 256)?;
            let m1 = t.moments(&bounds)?;
            let mult = Multiplier::from_functional(domain.clone(), bounds.clone(), t, &params)?;
            let back = mult.representing_functional()?;
            let m2 = back.moments(&bounds)?;
            let scale = m1.iter().map(|v| v.norm()).fold(1e-300, f64::max);
            let mut worst: f64 = 0.0;
            for (a, b) in m1.iter().zip(&m2) {
                worst = worst.max((a - b).norm() / scale);
            }
            Ok(worst)
        },
    );

    // duality roundtrip through the Cauchy transform
    row(
        &mut report,
        "duality-roundtrip",
        "moment-duality",
        tol,
        || {
            let mut rng = sampling::rng(seed ^ 0x647561);
            let kernel = sampling::random_pole_mixture(&mut rng, dim, 0.6);
            let radii: Vec<f64> = kernel
                .singular_radii()
                .iter()
                .map(|&s| (1.3 * s).max(0.3))
                .collect();
            let contour = PolyContour::new(
                radii
                    .iter()
                    .map(|&r| vec![Circle::new(c64(0.0, 0.0), r, 1)])
                    .collect(),
            );
            let t = AnalyticFunctional::new(kernel, contour, 256)?;
            let back_contour = PolyContour::new(
                radii
                    .iter()
                    .map(|&r| vec![Circle::new(c64(0.0, 0.0), 1.6 * r, 1)])
                    .collect(),
            );
            let t_back = AnalyticFunctional::new(t.to_complement_germ(), back_contour, 256)?;
            let m1 = t.moments(&bounds)?;
            let m2 = t_back.moments(&bounds)?;
            let scale = m1.iter().map(|v| v.norm()).fold(1e-300, f64::max);
            let mut worst: f64 = 0.0;
            for (a, b) in m1.iter().zip(&m2) {
                worst = worst.max((a - b).norm() / scale);
            }
            Ok(worst)
        },
    );

    // composition: exact on sequences, within tolerance as operators
    row(
        &mut report,
        "composition-homomorphism",
        "multiplier-algebra",
        tol,
        || {
            let m1 = multiplier.as_ref().map_err(clone_err)?;
            let mut rng = sampling::rng(seed ^ 0x636f6d);
            let seq: Vec<Complex64> = (0..bounds.len())
                .map(|_| {
                    c64(
                        rand::Rng::gen_range(&mut rng, -1.0..1.0),
                        rand::Rng::gen_range(&mut rng, -1.0..1.0),
                    )
                })
                .collect();
            let m2 = Multiplier::from_sequence(domain.clone(), bounds.clone(), seq)?;
            let composed = m1.compose(&m2)?;
            for (flat, v) in composed.sequence().iter().enumerate() {
                let alpha = composed.bounds().alpha_at(flat);
                let expected = m1.eigenvalue(&alpha)? * m2.eigenvalue(&alpha)?;
                if *v != expected {
                    anyhow::bail!("composite sequence is not the exact coefficientwise product");
                }
            }
            let mut worst: f64 = 0.0;
            for _ in 0..3 {
                let f = sampling::random_poly(&mut rng, &bounds);
                let staged = m2.apply_sequence(&f)?;
                let joint = composed.apply_sequence(&f)?;
                for z in sampling::domain_points(&domain, 4, 0.8) {
                    let lhs = joint.eval(&z)?;
                    let rhs = m1.evaluate_at(&staged, &z, &params)?;
                    worst = worst.max((lhs - rhs).norm() / (1.0 + rhs.norm()));
                }
            }
            Ok(worst)
        },
    );

    // evaluation on the coordinate hyperplanes against the closed form
    row(
        &mut report,
        "hyperplane-closed-form",
        "hyperplane-fill",
        tol,
        || {
            let laurent = Germ::product_poles(dilation_c.clone())?;
            let m =
                Multiplier::from_laurent_germ(domain.clone(), bounds.clone(), laurent, &params)?;
            let mut rng = sampling::rng(seed ^ 0x687970);
            let f = sampling::random_poly(&mut rng, &bounds);
            let mut worst: f64 = 0.0;
            for drop_j in 0..dim {
                let mut coords: Vec<Complex64> = sampling::random_point(&mut rng, dim, 0.3, 0.6)
                    .coords()
                    .to_vec();
                coords[drop_j] = c64(0.0, 0.0);
                let z = Point::new(coords);
                let got = m.evaluate_at(&f, &z, &params)?;
                let cz = Point::new(
                    dilation_c
                        .iter()
                        .zip(z.coords())
                        .map(|(&c, &zj)| c * zj)
                        .collect(),
                );
                let expected = f.eval(&cz)?;
                worst = worst.max((got - expected).norm() / (1.0 + expected.norm()));
            }
            Ok(worst)
        },
    );

    // off the hyperplanes both code paths agree
    row(
        &mut report,
        "path-consistency",
        "hyperplane-fill",
        1e-10,
        || {
            let laurent = Germ::product_poles(dilation_c.clone())?;
            let m =
                Multiplier::from_laurent_germ(domain.clone(), bounds.clone(), laurent, &params)?;
            let m_seq =
                Multiplier::from_sequence(domain.clone(), bounds.clone(), m.sequence().to_vec())?;
            let mut rng = sampling::rng(seed ^ 0x706174);
            let f = sampling::random_poly(&mut rng, &bounds);
            let mut worst: f64 = 0.0;
            for z in sampling::domain_points(&domain, 5, 0.8) {
                let a = m.evaluate_at(&f, &z, &params)?;
                let b = m_seq.evaluate_at(&f, &z, &params)?;
                worst = worst.max((a - b).norm() / (1.0 + b.norm()));
            }
            Ok(worst)
        },
    );

    // coefficientwise unit
    row(&mut report, "hadamard-unit", "plumbing", 0.0, || {
        let mut rng = sampling::rng(seed ^ 0x756e69);
        let f = sampling::random_poly(&mut rng, &bounds);
        let ones = TaylorPoly::all_ones(bounds.clone());
        if f.hadamard(&ones)? == f {
            Ok(0.0)
        } else {
            anyhow::bail!("unit of the coefficientwise product failed")
        }
    });

    report.print(std::io::stdout())?;
    if let Some(out) = &config.out {
        report.write_json(out)?;
    }
    Ok(report.all_pass())
}

fn clone_err(e: &multcalc::Error) -> anyhow::Error {
    anyhow::anyhow!("{e}")
}
