//! Quadrature convergence study: the residue integrand over doubling node
//! counts, with the error ratio per doubling.

use multcalc::domains::{Circle, PolyContour};
use multcalc::quadrature;
use multcalc::series::FnEval;
use multcalc::Complex64;

use crate::config::ExperimentConfig;
use crate::report::{Environment, RunReport};

pub fn run(config: &ExperimentConfig) -> anyhow::Result<bool> {
    let pole = config.pole.unwrap_or([0.3, 0.0]);
    let c = Complex64::new(pole[0], pole[1]);
    if c.norm() >= 1.0 {
        anyhow::bail!("config error at .pole: the study pole must lie inside the unit circle");
    }
    let contour = PolyContour::new(vec![vec![Circle::new(Complex64::new(0.0, 0.0), 1.0, 1)]]);
    let integrand = FnEval::new(1, move |z: &[Complex64]| (z[0] - c).inv());
    let exact = Complex64::new(1.0, 0.0);

    let mut writer = csv::Writer::from_writer(super::output_writer(config.out.as_deref())?);
    writer.write_record(["nodes", "abs_err", "ratio_to_prev"])?;
    let mut prev: Option<f64> = None;
    let mut geometric = true;
    let mut final_err = f64::INFINITY;
    let mut nodes = 8usize;
    while nodes <= 1024 {
        let err = (quadrature::contour_integral(&integrand, &contour, nodes)? - exact).norm();
        let ratio = prev.map(|p| if err > 0.0 { p / err } else { f64::INFINITY });
        if let (Some(p), Some(r)) = (prev, ratio) {
            if p > 1e-13 && r < 4.0 {
                geometric = false;
            }
        }
        writer.write_record(&[
            nodes.to_string(),
            format!("{err}"),
            ratio.map(|r| format!("{r}")).unwrap_or_default(),
        ])?;
        prev = Some(err);
        final_err = err;
        nodes *= 2;
    }
    writer.flush()?;

    let grid = config.z_grid();
    let mut report = RunReport::new(
        "bench",
        Environment {
            nodes: config.nodes,
            bounds: config.bounds.clone().unwrap_or_default(),
            z_grid: [grid.radii, grid.angles],
            seed: config.seed(),
            tol: 1e-13,
        },
    );
    if geometric {
        report.push(
            "spectral-convergence",
            "cauchy-quadrature",
            final_err,
            1e-13,
        );
    } else {
        report.push_error(
            "spectral-convergence",
            "cauchy-quadrature",
            1e-13,
            "a doubling step reduced the error by less than 4x".into(),
        );
    }
    report.print(std::io::stderr())?;
    Ok(report.all_pass())
}
