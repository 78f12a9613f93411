//! Builds every lattice twice, directly as a grid and by composing a unit
//! schema with a temporal schema, and confirms the two are the same graph.

use robust_transducer::fsa::{canonical_form, compose, connect};
use robust_transducer::lattice::{
    build_grid, build_temporal_schema, build_unit_schema, LossKind, TargetSequence,
};

fn main() -> robust_transducer::Result<()> {
    let target = TargetSequence::new(vec![2, 0, 1], 3)?;
    let frames = 4;
    for kind in LossKind::ALL {
        let unit = build_unit_schema(&target, kind);
        let temporal = build_temporal_schema(frames, target.vocab_size(), kind)?;
        let composed = connect(&compose(&unit, &temporal));
        let grid = build_grid(&target, frames, kind)?;
        println!(
            "{:<6} unit {:>2} arcs, temporal {:>2} arcs, composed {:>3} arcs, grid {:>3} arcs, same graph: {}",
            kind.name(),
            unit.num_arcs(),
            temporal.num_arcs(),
            composed.num_arcs(),
            grid.num_arcs(),
            canonical_form(&composed) == canonical_form(&grid)
        );
    }
    Ok(())
}
