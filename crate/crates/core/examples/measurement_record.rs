//! Conditioning on a mixed record of detections.
//!
//! Outcomes are written `-` (lower level) and `+` (upper level); `m5`
//! repeats `-` five times. The same record is applied with atoms injected
//! in the lower and in the upper level.
//!
//!     cargo run --example measurement_record

use cavity_filter::{
    apply_sequence, AtomInjectionCase, DKParams, FilterTable, MeasurementSequence,
    PhotonDistribution, PulseModel,
};

fn main() -> cavity_filter::Result<()> {
    let model = PulseModel::DemkovKunike(DKParams::new(4.0, 0.1, 0.1)?);
    let initial = PhotonDistribution::coherent(10.0, None)?;
    let record: MeasurementSequence = "m5 + -- +".parse()?;
    println!("record {record} ({} atoms)", record.len());

    for case in [AtomInjectionCase::CaseA, AtomInjectionCase::CaseB] {
        let families = cavity_filter::filtering::required_families(&initial, &record, case);
        let table = FilterTable::for_model(&model, families)?;
        let out = apply_sequence(&initial, &table, &record, case)?;
        println!(
            "{case:?}: P(record) = {:.4e}, mean {:.4}, Q {:+.4}, n_max {}",
            out.success_prob(),
            out.dist.mean(),
            out.dist.q_parameter()?,
            out.dist.n_max()
        );
    }

    // a record that cannot happen: the vacuum never sends an atom up
    let err = apply_sequence(
        &PhotonDistribution::vacuum(),
        &FilterTable::for_model(&model, 2)?,
        &"+".parse()?,
        AtomInjectionCase::CaseA,
    )
    .unwrap_err();
    println!("vacuum, '+': {err}");
    Ok(())
}
