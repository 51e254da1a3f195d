//! Synchronization schedules: periodic (synchronous) and uniformly random
//! asynchronous, with their gap bounds.
//!
//! ```bash
//! cargo run --example schedules
//! ```

use qsparse::schedule::{gap, make_periodic, make_random_async};

fn main() {
    let horizon = 40;
    let h = 6;

    let periodic = make_periodic(horizon, h, 3).unwrap();
    println!("periodic T={horizon}, H={h} (identical for every worker):");
    println!("  {:?}  gap = {}", periodic.worker_indices(0), gap(periodic.worker_indices(0)).unwrap());
    println!("  synchronous: {}", periodic.is_synchronous());

    let random = make_random_async(horizon, h, 3, 11).unwrap();
    println!("\nrandom-async T={horizon}, H={h}, seed 11 (intervals uniform on 1..={h}):");
    for r in 0..3 {
        let indices = random.worker_indices(r);
        println!("  worker {r}: {:?}  gap = {}", indices, gap(indices).unwrap());
    }
    println!("  synchronous: {}", random.is_synchronous());

    // The gap counts from an implicit step 0, so a lone index {t} has gap t.
    println!("\ngap({{10}}) = {}", gap(&[10]).unwrap());
    println!("gap({{2,5,6,9}}) = {}", gap(&[2, 5, 6, 9]).unwrap());
}
