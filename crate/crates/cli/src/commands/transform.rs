//! Sample the Cauchy transform of a functional outside its contour and,
//! with `"roundtrip": true`, rebuild a functional from the transform and
//! compare moment sequences.

use multcalc::domains::{Circle, PolyContour};
use multcalc::duality::AnalyticFunctional;
use multcalc::series::TruncationBox;
use multcalc::Complex64;

use crate::config::ExperimentConfig;
use crate::report::{Environment, RunReport};

pub fn run(config: &ExperimentConfig) -> anyhow::Result<bool> {
    let functional_lit = config.require(config.functional.as_ref(), ".functional")?;
    let domain = config.domain.as_ref().map(|d| d.build()).transpose()?;
    let functional = functional_lit.build(domain.as_ref())?;
    let dim = functional.dim();
    let tol = config.tol();
    let roundtrip = config.roundtrip.unwrap_or(false);

    let enclosing = functional.contour().enclosing_radii();
    let angles = config.z_grid().angles.max(4);

    let mut writer = csv::Writer::from_writer(super::output_writer(config.out.as_deref())?);

    if !roundtrip {
        // tensor grid of sample points outside the contour, factor radius
        // 1.5x the enclosed region (plus a floor for tiny contours)
        let factor_points: Vec<Vec<Complex64>> = enclosing
            .iter()
            .map(|&r| {
                let radius = (1.5 * r).max(0.5);
                (0..angles)
                    .map(|k| {
                        let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / angles as f64;
                        radius * Complex64::new(theta.cos(), theta.sin())
                    })
                    .collect()
            })
            .collect();
        let mut headers = super::point_headers(dim, "zeta");
        headers.push("f_re".into());
        headers.push("f_im".into());
        writer.write_record(&headers)?;
        let shape: Vec<usize> = factor_points.iter().map(Vec::len).collect();
        let total: usize = shape.iter().product();
        for flat in 0..total {
            let idx = multcalc::tensor::unflatten(&shape, flat);
            let zeta = multcalc::series::Point::new(
                idx.iter()
                    .enumerate()
                    .map(|(j, &k)| factor_points[j][k])
                    .collect(),
            );
            let value = functional.cauchy_transform_at(&zeta)?;
            let mut record: Vec<String> = Vec::new();
            for c in zeta.coords() {
                record.push(format!("{}", c.re));
                record.push(format!("{}", c.im));
            }
            record.push(format!("{}", value.re));
            record.push(format!("{}", value.im));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        return Ok(true);
    }

    // roundtrip: T -> f_T -> T', compare moment sequences on the box
    let bounds = TruncationBox::new(config.require(config.bounds.as_ref(), ".box")?.clone());
    let back_contour = PolyContour::new(
        enclosing
            .iter()
            .map(|&r| {
                vec![Circle::new(
                    Complex64::new(0.0, 0.0),
                    (1.25 * r).max(0.4),
                    1,
                )]
            })
            .collect(),
    );
    let t_back = AnalyticFunctional::new(
        functional.to_complement_germ(),
        back_contour,
        functional.nodes().max(128),
    )?;
    let original = functional.moments(&bounds)?;
    let back = t_back.moments(&bounds)?;
    let scale = original.iter().map(|v| v.norm()).fold(1e-300, f64::max);

    let mut headers: Vec<String> = (1..=dim).map(|j| format!("alpha_{j}")).collect();
    headers.extend(
        ["m_re", "m_im", "roundtrip_re", "roundtrip_im", "abs_diff"]
            .iter()
            .map(|s| s.to_string()),
    );
    writer.write_record(&headers)?;
    let mut max_diff: f64 = 0.0;
    for (flat, (a, b)) in original.iter().zip(&back).enumerate() {
        let alpha = bounds.alpha_at(flat);
        let diff = (a - b).norm();
        max_diff = max_diff.max(diff);
        let mut record: Vec<String> = alpha.0.iter().map(|x| x.to_string()).collect();
        record.push(format!("{}", a.re));
        record.push(format!("{}", a.im));
        record.push(format!("{}", b.re));
        record.push(format!("{}", b.im));
        record.push(format!("{diff}"));
        writer.write_record(&record)?;
    }
    writer.flush()?;

    let grid = config.z_grid();
    let mut report = RunReport::new(
        "transform",
        Environment {
            nodes: config.nodes,
            bounds: bounds.degrees().to_vec(),
            z_grid: [grid.radii, grid.angles],
            seed: config.seed(),
            tol,
        },
    );
    report.push("moment-roundtrip", "moment-duality", max_diff / scale, tol);
    report.print(std::io::stderr())?;
    Ok(report.all_pass())
}
