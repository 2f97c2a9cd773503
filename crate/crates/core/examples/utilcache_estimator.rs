//! EWMA upstream-cost estimates and the resulting effective-request
//! probabilities at one node.

use utilcache::strategy::{UlcField, UtilEstimator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut est = UtilEstimator::new(0.1)?;
    // ULC values accumulated hop by hop on the way down
    let mut ulc = UlcField::new();
    ulc.traverse(1000.0);
    ulc.traverse(10.0);
    est.update_estimate(0, ulc.value)?;
    for sample in [100.0, 120.0, 80.0, 100.0] {
        est.update_estimate(1, sample)?;
    }
    est.update_estimate(2, 10.0)?;
    for c in 0..4 {
        println!(
            "content {c}: estimate {:?}, effective with probability {:.4}",
            est.estimate(c),
            est.effective_probability(c)
        );
    }
    println!("w_max = {}", est.w_max());
    Ok(())
}
