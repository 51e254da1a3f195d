//! Communication budget comparison on softmax regression: dense per-step SGD
//! versus sign∘top-k with 8 local steps per round. Reports how many uplink
//! bits each needs to reach the dense run's final loss.
//!
//! ```bash
//! cargo run --release --example bit_budget
//! ```

use qsparse::config::{build_run_config, preset};
use qsparse::engine::{run_sync, Parallelism};
use qsparse::metrics::bits_to_target;

fn main() {
    let horizon = 2000;

    // dense baseline: identity operator, synchronize every step
    let mut dense_cfg = preset("paper-convex").unwrap();
    dense_cfg.run.horizon = horizon;
    dense_cfg.run.record_every = 20;
    dense_cfg.schedule.h = Some(1);
    dense_cfg.operator = qsparse::config::OperatorSection {
        kind: "identity".into(),
        ..Default::default()
    };
    dense_cfg.lr.a = Some(42.0); // same offset the compressed run derives
    let dense = run_sync(&build_run_config(&dense_cfg, Parallelism::Serial).unwrap()).unwrap();

    // compressed: the preset's sign∘top-40 with H = 8, run longer
    let mut comp_cfg = preset("paper-convex").unwrap();
    comp_cfg.run.horizon = 3 * horizon;
    comp_cfg.run.record_every = 20;
    let comp = run_sync(&build_run_config(&comp_cfg, Parallelism::Serial).unwrap()).unwrap();

    let target = dense.final_loss();
    println!("softmax regression, R=15, b=8, k=40 (preset constants)");
    println!("dense H=1   : loss {:.4} after {} bits", target, dense.total_uplink_bits);
    match bits_to_target(&comp.records, target) {
        Some(bits) => {
            println!(
                "sign∘top-40 : reaches loss {:.4} after {} bits (H=8 local steps)",
                target, bits
            );
            println!(
                "\nuplink savings factor: {:.0}x",
                dense.total_uplink_bits as f64 / bits as f64
            );
        }
        None => println!(
            "sign∘top-40 : did not reach {:.4} (final {:.4})",
            target,
            comp.final_loss()
        ),
    }
}
