//! Skip-token penalty over a training run: held for the first epochs, then
//! decayed toward the cap.

use robust_transducer::loss::PenaltySchedule;

fn main() {
    let schedule = PenaltySchedule {
        max_weight: -5.0,
        ..PenaltySchedule::default()
    };
    println!(
        "initial {}, decay {}, cap {}, decay after epoch {}",
        schedule.initial_weight, schedule.decay, schedule.max_weight, schedule.start_epoch
    );
    println!("epoch  in effect");
    let mut w = schedule.initial_weight;
    for (epoch, next) in schedule.trajectory(20).into_iter().enumerate() {
        println!("{:>5}  {:>9.4}", epoch + 1, w);
        w = next;
    }
}
