//! Tour of the compression operators: apply each one to the same vector and
//! compare reconstructions, uplink bit costs, and theoretical coefficients.
//!
//! ```bash
//! cargo run --example operators
//! ```

use qsparse::ops::{apply_operator, beta, theoretical_gamma, OperatorSpec, Segment};
use qsparse::rng::{global_stream, Purpose};
use qsparse::DenseVector;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let d = 64;
    let mut data_rng = global_stream(7, Purpose::Data);
    let coords: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut data_rng)).collect();
    let x = DenseVector::new(coords).unwrap();

    let specs = vec![
        OperatorSpec::Identity,
        OperatorSpec::TopK { k: 8 },
        OperatorSpec::RandK { k: 8 },
        OperatorSpec::Qsgd { s: 8 },
        OperatorSpec::StochasticLevels { s: 6 },
        OperatorSpec::RotatedLevels { s: 6 },
        OperatorSpec::Sign,
        OperatorSpec::composed(OperatorSpec::Qsgd { s: 8 }, OperatorSpec::TopK { k: 8 }, true),
        OperatorSpec::composed(OperatorSpec::Qsgd { s: 8 }, OperatorSpec::TopK { k: 8 }, false),
        OperatorSpec::sign_comp(OperatorSpec::TopK { k: 8 }, 2),
        OperatorSpec::sign_comp(OperatorSpec::TopK { k: 8 }, 1),
        OperatorSpec::Piecewise {
            segments: vec![
                Segment { start: 0, end: 32, spec: OperatorSpec::TopK { k: 4 } },
                Segment { start: 32, end: 64, spec: OperatorSpec::Qsgd { s: 4 } },
            ],
        },
    ];

    println!("input: d={d}, ‖x‖ = {:.4}", x.norm());
    println!(
        "{:<34} {:>8} {:>9} {:>10} {:>12}",
        "operator", "bits", "gamma", "beta", "rel. error"
    );
    let mut op_rng = global_stream(1, Purpose::Operator);
    for spec in specs {
        spec.validate(d).unwrap();
        let (rec, bits) = apply_operator(&spec, &x, &mut op_rng).unwrap();
        let err: f64 = x
            .as_slice()
            .iter()
            .zip(rec.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let gamma = theoretical_gamma(&spec, d)
            .map_or("-".to_string(), |g| format!("{g:.5}"));
        let beta_str = beta(&spec, d).map_or("-".to_string(), |b| format!("{b:.4}"));
        println!(
            "{:<34} {:>8} {:>9} {:>10} {:>12.5}",
            spec.to_string(),
            bits,
            gamma,
            beta_str,
            err / x.norm_sq()
        );
    }

    // An unscaled composition with a too-coarse quantizer is refused up front.
    let invalid = OperatorSpec::composed(OperatorSpec::Qsgd { s: 1 }, OperatorSpec::TopK { k: 8 }, false);
    println!("\nvalidating {invalid}: {}", invalid.validate(d).unwrap_err());
}
