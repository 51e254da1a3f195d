//! Generate a synthetic classification dataset, write it in IDX binary
//! format, load it back, and shard it across workers.
//!
//! ```bash
//! cargo run --example idx_roundtrip
//! ```

use qsparse::data::{load_idx, shard, synthetic_classification, write_idx, ShardMode};

fn main() {
    let raw = synthetic_classification(100, 8, 4, 3.0, 21).unwrap();
    // IDX stores bytes, so snap features to the [0,1] 1/255 grid first.
    let data = raw.quantized_to_unit();

    let dir = std::env::temp_dir().join("qsparse-idx-example");
    std::fs::create_dir_all(&dir).unwrap();
    let images = dir.join("images.idx");
    let labels = dir.join("labels.idx");
    write_idx(&data, &images, &labels).unwrap();
    println!("wrote {} and {}", images.display(), labels.display());

    let loaded = load_idx(&images, &labels).unwrap();
    assert_eq!(loaded, data);
    println!(
        "round trip exact: n={}, d_in={}, classes={}",
        loaded.len(),
        loaded.d_in(),
        loaded.classes()
    );

    for mode in [
        ShardMode::Contiguous,
        ShardMode::RoundRobin,
        ShardMode::IidRandom { seed: 4 },
    ] {
        let plan = shard(&loaded, 3, mode).unwrap();
        let sizes: Vec<usize> = (0..3).map(|r| plan.shard(r).len()).collect();
        println!("{mode:?}: shard sizes {sizes:?}");
    }
}
