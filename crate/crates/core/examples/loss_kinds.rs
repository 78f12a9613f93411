//! Loss of all four lattice kinds on one joint output, and how the gradient
//! mass on blank shifts once skip-frame arcs exist.

use ndarray::{s, Array3};
use robust_transducer::lattice::{LossKind, TargetSequence};
use robust_transducer::loss::{loss_and_grad, JointLogProbs, LossConfig};

fn main() -> robust_transducer::Result<()> {
    // T = 5 frames, target "0 1", vocabulary of 3 plus blank
    let (frames, vocab) = (5, 3);
    let target = TargetSequence::new(vec![0, 1], vocab)?;
    let logits = Array3::from_shape_fn((frames, 3, vocab + 1), |(t, u, v)| {
        ((t * 7 + u * 3 + v * 5) % 11) as f64 / 4.0
    });
    let mut joint = logits;
    for mut row in joint.lanes_mut(ndarray::Axis(2)) {
        let lse = row.iter().map(|x| x.exp()).sum::<f64>().ln();
        row -= lse;
    }
    let joint = JointLogProbs::new(joint)?;

    for kind in LossKind::ALL {
        let config = LossConfig {
            skip_frame_weight: -0.5,
            ..LossConfig::new(kind)
        };
        let r = loss_and_grad(&joint, &target, &config, -5.0)?;
        let blank_mass: f64 = -r.grad.slice(s![.., .., vocab]).sum();
        println!("{:<6} loss {:>8.4}  expected blank arcs {:>6.3}", kind.name(), r.loss, blank_mass);
    }
    Ok(())
}
