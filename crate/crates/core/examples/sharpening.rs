//! Sharpening a coherent state centred on a filter maximum.
//!
//! With `g0 = 4, A0 = T = 0.1` the second filter maximum sits at `n = 25`;
//! a coherent state with `nbar = 25` narrows with every lower-level atom.
//! The second part compares the analytic width estimate with the numeric
//! FWHM for `g0 = 4.5, nbar = 19.8`.
//!
//!     cargo run --example sharpening

use cavity_filter::analysis::{dk_maxima, sharpening_sweep};
use cavity_filter::DKParams;
use cavity_filter::{
    AtomInjectionCase, FilterTable, MeasurementSequence, PhotonDistribution, PulseModel,
};

fn main() -> cavity_filter::Result<()> {
    let params = DKParams::new(4.0, 0.1, 0.1)?;
    println!("filter maximum k=2 at n = {}", dk_maxima(2, &params));
    let initial = PhotonDistribution::coherent(25.0, None)?;
    let table = FilterTable::for_model(&PulseModel::DemkovKunike(params), initial.n_max())?;
    for m in [0usize, 1, 5, 25] {
        let out = cavity_filter::apply_sequence(
            &initial,
            &table,
            &MeasurementSequence::all_minus(m),
            AtomInjectionCase::CaseA,
        )?;
        let w = out.dist.fwhm_numeric();
        println!(
            "m = {m:>2}: mean {:7.3}  Q {:+.4}  FWHM {:6.3}  P(record) {:.3e}",
            out.dist.mean(),
            out.dist.q_parameter()?,
            w.width,
            out.success_prob()
        );
    }

    let params = DKParams::new(4.5, 0.1, 0.1)?;
    let ms: Vec<u32> = (1..=25).collect();
    let sweep = sharpening_sweep(19.8, &params, &ms)?;
    let analytic = sweep.column("delta_n").expect("delta_n");
    let numeric = sweep.column("fwhm_numeric").expect("fwhm_numeric");
    println!("{:>3} {:>9} {:>9} {:>7}", "m", "analytic", "numeric", "rel");
    for (i, m) in ms
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 4 == 0 || *i == 24)
    {
        println!(
            "{m:>3} {:>9.4} {:>9.4} {:>6.1}%",
            analytic[i],
            numeric[i],
            100.0 * (analytic[i] / numeric[i] - 1.0)
        );
    }
    Ok(())
}
