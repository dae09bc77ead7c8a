//! Landau-Zener filtering of a coherent state.
//!
//! Every atom that leaves in the lower level multiplies `p(n)` by
//! `exp(-v n)`, so after `m` such atoms a coherent state stays coherent with
//! mean `nbar exp(-v m)`.
//!
//!     cargo run --example lz_filter

use cavity_filter::filtering::{lz_minus_closed_form, lz_upper_mean};
use cavity_filter::{
    apply_sequence, AtomInjectionCase, FilterTable, LZParams, MeasurementSequence,
    PhotonDistribution, PulseModel,
};

fn main() -> cavity_filter::Result<()> {
    let params = LZParams::from_v(0.126, 1.0)?;
    let model = PulseModel::LandauZener(params);
    let nbar = 25.0;
    let initial = PhotonDistribution::coherent(nbar, None)?;
    let table = FilterTable::for_model(&model, initial.n_max() + 1)?;

    println!("v = {}", params.v());
    println!("{:>4} {:>12} {:>12} {:>12}", "n", "m=1", "m=5", "m=25");
    for n in (0..=40).step_by(5) {
        println!(
            "{n:>4} {:>12.6} {:>12.6} {:>12.6}",
            table.lower_power(n, 1),
            table.lower_power(n, 5),
            table.lower_power(n, 25)
        );
    }

    for m in [1u32, 5, 25] {
        let out = apply_sequence(
            &initial,
            &table,
            &MeasurementSequence::all_minus(m as usize),
            AtomInjectionCase::CaseA,
        )?;
        let closed = lz_minus_closed_form(nbar, params.v(), m)?;
        let err = out
            .dist
            .probs()
            .iter()
            .zip(closed.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "m = {m:>2}: mean {:.6} (expected {:.6}), P(record) = {:.3e}, max |pipeline - Poisson| = {err:.1e}",
            out.dist.mean(),
            nbar * (-params.v() * m as f64).exp(),
            out.success_prob()
        );
    }

    let plus = apply_sequence(&initial, &table, &"+".parse()?, AtomInjectionCase::CaseA)?;
    println!(
        "one upper-level atom: mean {:.6}, closed form {:.6}",
        plus.dist.mean(),
        lz_upper_mean(nbar, params.v())?
    );
    Ok(())
}
