//! Finite-difference verification of every analytic gradient.
//!
//! ```bash
//! cargo run --example gradcheck
//! ```

use qsparse::cli::gradcheck_max_error;
use qsparse::data::{synthetic_classification, Dataset};
use qsparse::objectives::{random_quadratic, ObjectiveSpec};
use qsparse::rng::{global_stream, Purpose};

fn main() {
    let mut rng = global_stream(1, Purpose::Objective);
    let quad = random_quadratic(10, 10.0, &mut rng).unwrap();
    let softmax_data = synthetic_classification(60, 5, 3, 2.0, 2).unwrap();
    let logistic_data = synthetic_classification(60, 5, 2, 2.0, 3).unwrap();
    let empty = Dataset::empty();

    let cases: Vec<(&str, ObjectiveSpec, &Dataset)> = vec![
        ("quadratic", quad, &empty),
        ("softmax", ObjectiveSpec::Softmax { lambda: 1.0 / 60.0 }, &softmax_data),
        ("nonconvex-logistic", ObjectiveSpec::NonConvexLogistic { alpha: 0.2 }, &logistic_data),
    ];
    println!("central differences at h = 1e-5, 50 random points each:");
    for (name, obj, data) in cases {
        let worst = gradcheck_max_error(&obj, data, 50, 9).unwrap();
        println!("  {name:<20} max relative error {worst:.3e}");
    }
}
