//! Moment sequence of an analytic functional over a truncation box.

use multcalc::series::TruncationBox;

use crate::config::ExperimentConfig;

pub fn run(config: &ExperimentConfig) -> anyhow::Result<bool> {
    let functional_lit = config.require(config.functional.as_ref(), ".functional")?;
    let bounds = TruncationBox::new(config.require(config.bounds.as_ref(), ".box")?.clone());
    let domain = config.domain.as_ref().map(|d| d.build()).transpose()?;
    let functional = functional_lit.build(domain.as_ref())?;
    let moments = functional.moments(&bounds)?;

    let mut writer = csv::Writer::from_writer(super::output_writer(config.out.as_deref())?);
    let mut headers: Vec<String> = (1..=bounds.dim()).map(|j| format!("alpha_{j}")).collect();
    headers.push("m_re".into());
    headers.push("m_im".into());
    writer.write_record(&headers)?;
    for (flat, m) in moments.iter().enumerate() {
        let alpha = bounds.alpha_at(flat);
        let mut record: Vec<String> = alpha.0.iter().map(|a| a.to_string()).collect();
        record.push(format!("{}", m.re));
        record.push(format!("{}", m.im));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(true)
}
