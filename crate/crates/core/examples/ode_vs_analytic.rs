//! Direct integration of single photon families against the closed forms.
//!
//!     cargo run --release --example ode_vs_analytic

use cavity_filter::propagator::{
    lz_lower_filter_numeric, numeric_transfer_matrix, propagate_family_with_stats, LzReadout,
};
use cavity_filter::pulses::{case_a_filter, lz_transfer_prob};
use cavity_filter::{DKParams, FamilyAmplitudes, IntegrationConfig, LZParams, PulseModel};

fn main() -> cavity_filter::Result<()> {
    let model = PulseModel::DemkovKunike(DKParams::new(4.0, 0.1, 0.1)?);
    let cfg = IntegrationConfig::for_model(&model)?;
    println!("Demkov-Kunike, window [{}, {}]", cfg.t_start, cfg.t_end);
    for n in [1u64, 6, 25, 30] {
        let (y, stats) = propagate_family_with_stats(n, &model, FamilyAmplitudes::CASE_A, &cfg)?;
        let exact = case_a_filter(n, &model)?.0;
        let tm = numeric_transfer_matrix(n, &model, &cfg)?;
        println!(
            "  n = {n:>2}: |a-|^2 = {:.10}  closed form {exact:.10}  norm-1 = {:+.1e}  w = {:.6} phi = {:.4}  steps {}",
            y.lower(),
            y.norm_sqr() - 1.0,
            tm.w,
            tm.phi,
            stats.accepted
        );
    }

    let params = LZParams::from_v(0.126, 1.0)?;
    println!("Landau-Zener, v = 0.126, n = 10");
    for lt2 in [100.0, 400.0, 1600.0] {
        let cfg = IntegrationConfig::lz_window(&params, lt2)?;
        let exact = lz_transfer_prob(10, &params)?;
        let raw = lz_lower_filter_numeric(10, &params, &cfg, LzReadout::Raw)?;
        let avg = lz_lower_filter_numeric(10, &params, &cfg, LzReadout::AverageBoth)?;
        println!(
            "  lambda tau^2 = {lt2:>6}: raw error {:.2e}, averaged error {:.2e}",
            (raw - exact).abs(),
            (avg - exact).abs()
        );
    }
    Ok(())
}
