//! Word error rate, degradation against a clean baseline, and the share of
//! that degradation a modified loss recovers.

use robust_transducer::metrics::{align, wer, werd, werdr, words};

fn main() -> robust_transducer::Result<()> {
    let reference = words("the cat sat on the mat");
    let hypothesis = words("the cat sat on mat today");
    let counts = align(&reference, &hypothesis);
    println!(
        "sub {} ins {} del {} over {} words: WER {:.1}%",
        counts.sub,
        counts.ins,
        counts.del,
        counts.reference_len,
        100.0 * wer(&counts)?
    );

    let clean = 6.8;
    let baseline = werd(81.4, clean);
    let proposed = werd(11.0, clean);
    println!("baseline WERD {baseline:.1}, proposed WERD {proposed:.1}");
    println!("WERDR {:.1}%", 100.0 * werdr(baseline, proposed)?);
    Ok(())
}
