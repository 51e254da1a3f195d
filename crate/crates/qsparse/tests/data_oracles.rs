//! End-to-end statistical oracles for the synthetic data generator: a linear
//! softmax model trained on margin-0 data scores chance accuracy, and a
//! wide-margin dataset is linearly separable.

use qsparse::data::{synthetic_classification, Dataset};
use qsparse::objectives::{grad, ObjectiveSpec};

fn train_softmax(data: &Dataset, obj: &ObjectiveSpec, iters: usize, eta: f64) -> Vec<f64> {
    let all: Vec<usize> = (0..data.len()).collect();
    let mut w = vec![0.0; obj.param_dim(data)];
    for _ in 0..iters {
        let g = grad(obj, &w, data, &all).unwrap();
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= eta * gi;
        }
    }
    w
}

fn accuracy(data: &Dataset, w: &[f64]) -> f64 {
    let (d_in, classes) = (data.d_in(), data.classes());
    let mut hits = 0;
    for i in 0..data.len() {
        let row = data.row(i);
        let mut best = (f64::NEG_INFINITY, 0);
        for j in 0..classes {
            let logit: f64 = w[j * d_in..(j + 1) * d_in]
                .iter()
                .zip(row)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + w[d_in * classes + j];
            if logit > best.0 {
                best = (logit, j);
            }
        }
        if best.1 == data.label(i) {
            hits += 1;
        }
    }
    hits as f64 / data.len() as f64
}

// margin 0: the class-conditional distributions coincide, so a trained
// linear model cannot beat chance by much.
#[test]
fn zero_margin_accuracy_near_chance() {
    let data = synthetic_classification(1000, 10, 4, 0.0, 31).unwrap();
    let obj = ObjectiveSpec::Softmax { lambda: 1.0 / 1000.0 };
    let w = train_softmax(&data, &obj, 300, 0.5);
    let acc = accuracy(&data, &w);
    assert!((acc - 0.25).abs() <= 0.1, "margin-0 accuracy {acc}, want 1/L ± 0.1");
}

// margin 10: clusters far apart, so training accuracy saturates.
#[test]
fn wide_margin_linearly_separable() {
    let data = synthetic_classification(2000, 10, 4, 10.0, 32).unwrap();
    let obj = ObjectiveSpec::Softmax { lambda: 1.0 / 2000.0 };
    let w = train_softmax(&data, &obj, 300, 0.5);
    let acc = accuracy(&data, &w);
    assert!(acc >= 0.99, "margin-10 accuracy {acc}, want >= 0.99");
}
