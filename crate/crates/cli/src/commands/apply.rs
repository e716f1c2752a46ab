//! Apply a multiplier to a series over a point grid. Every row carries the
//! value from the provenance path next to the coefficientwise oracle, so
//! the CSV doubles as an equivalence check.

use multcalc::sampling;

use crate::config::ExperimentConfig;
use crate::report::{Environment, RunReport};

pub fn run(config: &ExperimentConfig) -> anyhow::Result<bool> {
    let mult_lit = config.require(config.multiplier.as_ref(), ".multiplier")?;
    let series_lit = config.require(config.series.as_ref(), ".series")?;
    let params = config.engine_params();
    let multiplier = mult_lit.build(&params)?;
    let series = series_lit.build()?;
    let tol = config.tol();

    let z_count = config.z_count.unwrap_or(25);
    let points = sampling::domain_points(multiplier.domain(), z_count, 0.85);
    let oracle_series = multiplier.apply_sequence(&series)?;

    let mut writer = csv::Writer::from_writer(super::output_writer(config.out.as_deref())?);
    let mut headers = super::point_headers(multiplier.dim(), "z");
    headers.extend(
        ["value_re", "value_im", "oracle_re", "oracle_im", "abs_err"]
            .iter()
            .map(|s| s.to_string()),
    );
    writer.write_record(&headers)?;

    let mut max_err: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for z in &points {
        let value = multiplier.evaluate_at(&series, z, &params)?;
        let oracle = oracle_series.eval(z)?;
        let err = (value - oracle).norm();
        max_err = max_err.max(err);
        scale = scale.max(oracle.norm());
        let mut record: Vec<String> = Vec::new();
        for c in z.coords() {
            record.push(format!("{}", c.re));
            record.push(format!("{}", c.im));
        }
        record.push(format!("{}", value.re));
        record.push(format!("{}", value.im));
        record.push(format!("{}", oracle.re));
        record.push(format!("{}", oracle.im));
        record.push(format!("{err}"));
        writer.write_record(&record)?;
    }
    writer.flush()?;

    let grid = config.z_grid();
    let mut report = RunReport::new(
        "apply",
        Environment {
            nodes: config.nodes,
            bounds: multiplier.bounds().degrees().to_vec(),
            z_grid: [grid.radii, grid.angles],
            seed: config.seed(),
            tol,
        },
    );
    report.push(
        "apply-vs-oracle",
        "application-formula",
        max_err / scale,
        tol,
    );
    report.print(std::io::stderr())?;
    Ok(report.all_pass())
}
