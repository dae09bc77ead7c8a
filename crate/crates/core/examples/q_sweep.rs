//! Mandel Q after 25 lower-level atoms against the peak coupling.
//!
//! Negative Q marks sub-Poissonian light. Prints the minimum and the
//! negative-Q intervals; pass `--csv` to dump the whole table.
//!
//!     cargo run --release --example q_sweep [-- --csv]

use cavity_filter::analysis::{linspace, q_sweep, FilterApprox};
use cavity_filter::DKParams;

fn main() -> cavity_filter::Result<()> {
    let template = DKParams::new(1.0, 0.1, 0.1)?;
    let g0 = linspace(0.03, 6.0, 200);
    let table = q_sweep(100.0, 25, &template, &g0, FilterApprox::Exact)?;

    if std::env::args().any(|a| a == "--csv") {
        print!("{}", table.to_csv());
        return Ok(());
    }
    let q = table.column("q").expect("q column");
    let (i_min, q_min) =
        q.iter().enumerate().fold(
            (0, f64::INFINITY),
            |b, (i, &x)| if x < b.1 { (i, x) } else { b },
        );
    println!("min Q = {q_min:.4} at g0 = {:.3}", g0[i_min]);
    let mut start = None;
    for (i, &x) in q.iter().enumerate() {
        match (x < 0.0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                println!("Q < 0 for g0 in [{:.3}, {:.3}]", g0[s], g0[i - 1]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        println!("Q < 0 for g0 in [{:.3}, {:.3}]", g0[s], g0[g0.len() - 1]);
    }
    Ok(())
}
