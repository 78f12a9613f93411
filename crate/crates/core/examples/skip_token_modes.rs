//! The five ways of weighting a skip-token arc, shown on one joint row.

use ndarray::array;
use robust_transducer::loss::{mode_value, SkipTokenMode};

fn main() -> robust_transducer::Result<()> {
    // log-probabilities of tokens 0..3 and blank
    let row = array![0.05f64, 0.6, 0.15, 0.1, 0.1].mapv(f64::ln);
    let target = 1;
    println!("target token {target}, penalty added on top of each value");
    for mode in SkipTokenMode::ALL {
        let v = mode_value(row.view(), target, mode)?;
        println!("{:<9} log {:>8.4}  prob {:.4}", mode.name(), v, v.exp());
    }
    Ok(())
}
