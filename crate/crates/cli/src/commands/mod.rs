pub mod apply;
pub mod bench;
pub mod compose;
pub mod moments;
pub mod seminorm;
pub mod transform;
pub mod verify;

use std::io::Write;
use std::path::Path;

/// Writer for the command's primary output: the config's `out` path, or
/// stdout when none is given.
pub fn output_writer(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    })
}

/// Column headers for a point grid in `dim` complex variables.
pub fn point_headers(dim: usize, prefix: &str) -> Vec<String> {
    let mut headers = Vec::with_capacity(2 * dim);
    for j in 1..=dim {
        headers.push(format!("{prefix}{j}_re"));
        headers.push(format!("{prefix}{j}_im"));
    }
    headers
}
