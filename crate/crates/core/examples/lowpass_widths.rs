//! Low-pass regime: width of `|a-(n)|^(2m)` against atom number.
//!
//!     cargo run --example lowpass_widths

use cavity_filter::analysis::{lowpass_filter_value, lowpass_width_approx, lowpass_width_exact};
use cavity_filter::DKParams;

fn main() -> cavity_filter::Result<()> {
    let params = DKParams::new(1.0, 2.0, 1.0)?;
    println!(
        "{:>3} {:>10} {:>10} {:>7} {:>10}",
        "m", "exact", "approx", "rel", "residual"
    );
    for m in [1u32, 2, 3, 5, 10, 15, 20, 25] {
        let exact = lowpass_width_exact(m, &params)?;
        let approx = lowpass_width_approx(m, &params)?;
        // filter^m at the width should equal 1/e
        let residual = lowpass_filter_value(m, &params, exact) - (-1.0f64).exp();
        println!(
            "{m:>3} {exact:>10.6} {approx:>10.6} {:>6.2}% {residual:>10.1e}",
            100.0 * (approx / exact - 1.0)
        );
    }
    Ok(())
}
