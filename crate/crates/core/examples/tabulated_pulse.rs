//! Filter table of a sampled pulse with no closed form.
//!
//! A Gaussian coupling with a linear chirp; the filter is obtained by
//! integrating each photon family over the sampled window.
//!
//!     cargo run --release --example tabulated_pulse

use cavity_filter::pulses::TabulatedPulse;
use cavity_filter::{FilterTable, IntegrationConfig, PulseModel};

fn main() -> cavity_filter::Result<()> {
    let pulse =
        TabulatedPulse::from_fn(-8.0, 8.0, 1601, |t| (0.4 * t, 0.6 * (-t * t / 4.0).exp()))?;
    let model = PulseModel::Tabulated(pulse);
    println!("{}", &model.to_json()[..80]);
    let cfg = IntegrationConfig::for_model(&model)?;
    let table = FilterTable::numeric(&model, 20, &cfg)?;
    for n in 0..=20 {
        println!(
            "{n:>3} lower {:.6} upper {:.6}",
            table.lower(n),
            table.upper(n)
        );
    }
    Ok(())
}
