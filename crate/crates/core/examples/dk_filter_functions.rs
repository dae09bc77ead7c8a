//! Demkov-Kunike filter functions in the two regimes.
//!
//! Small `A0 T` (nearly resonant, short pulse): the lower-level filter
//! oscillates in `sqrt(n)` and selects photon numbers near its maxima.
//! Large `A0 T`: it decays monotonically, a low-pass filter.
//!
//!     cargo run --example dk_filter_functions

use cavity_filter::analysis::{adiabatic_amplitude, dk_maxima, dk_zeros};
use cavity_filter::pulses::dk_lower_filter;
use cavity_filter::DKParams;

fn main() -> cavity_filter::Result<()> {
    let sharp = DKParams::new(4.0, 0.1, 0.1)?;
    println!("oscillating filter, g0 = 4, A0 = T = 0.1");
    for k in 1..=3 {
        println!(
            "  maximum k={k}: n = {:.4}   zero: n = {:.4}",
            dk_maxima(k, &sharp),
            dk_zeros(k - 1, &sharp)
        );
    }
    let lower: Vec<f64> = (1..=40)
        .map(|n| dk_lower_filter(n, &sharp))
        .collect::<Result<_, _>>()?;
    let argmax = lower
        .iter()
        .enumerate()
        .fold((0, 0.0), |b, (i, &f)| if f > b.1 { (i + 1, f) } else { b });
    println!(
        "  integer argmax n = {} (|a-|^2 = {:.6})",
        argmax.0, argmax.1
    );
    print_bars(&lower);

    let lowpass = DKParams::new(0.2, 0.6, 0.9)?;
    let (amp, approx) = adiabatic_amplitude(&lowpass);
    println!("low-pass filter, g0 = 0.2, A0 = 0.6, T = 0.9");
    println!("  residual oscillation amplitude sech^2(pi A0 T) = {amp:.4} (~4 exp(-2 pi A0 T) = {approx:.4})");
    let lower: Vec<f64> = (1..=40)
        .map(|n| dk_lower_filter(n, &lowpass))
        .collect::<Result<_, _>>()?;
    print_bars(&lower);
    Ok(())
}

fn print_bars(values: &[f64]) {
    for (i, f) in values.iter().enumerate().step_by(3) {
        println!(
            "  {:>3} {:<40} {f:.4}",
            i + 1,
            "#".repeat((f * 40.0).round() as usize)
        );
    }
}
