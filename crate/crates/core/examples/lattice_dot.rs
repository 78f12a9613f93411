//! Prints the Target-Robust-Transducer lattice for a two-token target over
//! three frames as Graphviz DOT.
//!
//! cargo run --example lattice_dot | dot -Tsvg > trt.svg

use robust_transducer::fsa::to_dot;
use robust_transducer::lattice::{build_grid, LossKind, TargetSequence};

fn main() -> robust_transducer::Result<()> {
    let target = TargetSequence::new(vec![0, 1], 2)?;
    let grid = build_grid(&target, 3, LossKind::Trt)?;
    eprintln!("{} states, {} arcs", grid.num_states(), grid.num_arcs());
    print!("{}", to_dot(&grid));
    Ok(())
}
