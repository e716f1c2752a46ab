//! Weighted-derivative seminorm of a germ or of a functional's Cauchy
//! transform, over a compact box (default: the all-ones point).

use serde::Serialize;

use multcalc::domains::CompactBox;
use multcalc::seminorms::{self, Branch, ZGrid};
use multcalc::series::TruncationBox;

use crate::config::ExperimentConfig;

#[derive(Serialize)]
struct SeminormOutput {
    value: f64,
    branch: Option<&'static str>,
    alpha: Option<Vec<usize>>,
    boundary_point: Option<Vec<[f64; 2]>>,
    outer_z: Option<Vec<[f64; 2]>>,
    grid_points: usize,
    #[serde(rename = "box")]
    bounds: Vec<usize>,
}

pub fn run(config: &ExperimentConfig) -> anyhow::Result<bool> {
    let domain = config.require(config.domain.as_ref(), ".domain")?.build()?;
    let delta = config.require(config.delta.as_ref(), ".delta")?.build()?;
    let bounds = TruncationBox::new(config.require(config.bounds.as_ref(), ".box")?.clone());
    let params = config.engine_params();
    let compact = config
        .compact()?
        .unwrap_or_else(|| CompactBox::ones(domain.dim()));
    let grid = config.z_grid();
    let z_grid = ZGrid::Spec {
        radii: grid.radii,
        angles: grid.angles,
    };

    let germ = match (&config.germ, &config.functional) {
        (Some(g), None) => g.build()?,
        (None, Some(f)) => f.build(Some(&domain))?.to_complement_germ(),
        (Some(_), Some(_)) => {
            anyhow::bail!("config error at .germ: give either a germ or a functional, not both")
        }
        (None, None) => anyhow::bail!("config error at .germ: need a germ or a functional"),
    };

    let report = seminorms::upsilon(
        &germ, &domain, &compact, &delta, &bounds, &z_grid, 64, &params,
    )?;
    let output = SeminormOutput {
        value: report.value,
        branch: report.branch.map(|b| match b {
            Branch::Boundary => "boundary",
            Branch::Infinity => "infinity",
        }),
        alpha: report.alpha.map(|a| a.0),
        boundary_point: report
            .boundary_point
            .map(|p| p.coords().iter().map(|c| [c.re, c.im]).collect()),
        outer_z: report
            .outer_z
            .map(|p| p.coords().iter().map(|c| [c.re, c.im]).collect()),
        grid_points: report.grid_points,
        bounds: bounds.degrees().to_vec(),
    };
    let mut writer = super::output_writer(config.out.as_deref())?;
    serde_json::to_writer_pretty(&mut writer, &output)?;
    use std::io::Write;
    writeln!(writer)?;
    Ok(true)
}
