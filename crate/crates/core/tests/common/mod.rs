#![allow(dead_code)]

use boost_core::linalg::C64;
use boost_core::model::{hamiltonian_rotating, ModelParams};
use boost_core::FieldVector;
use nalgebra::{DMatrix, DVector};

/// Dense oracle: product of nalgebra exponentials at the step midpoints,
/// Richardson-extrapolated from N and 2N steps.
pub fn dense_oracle(psi0: &DVector<C64>, p: &ModelParams, t1: f64, steps: usize) -> DVector<C64> {
    let run = |n: usize| {
        let dt = t1 / n as f64;
        let mut psi = psi0.clone();
        for k in 0..n {
            let h: DMatrix<C64> = hamiltonian_rotating((k as f64 + 0.5) * dt, p).unwrap();
            psi = (h * C64::new(0.0, -dt)).exp() * psi;
        }
        psi
    };
    let coarse = run(steps);
    let fine = run(2 * steps);
    (fine * C64::from(4.0) - coarse) / C64::from(3.0)
}

pub fn distance(a: &[C64], b: &DVector<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn fd_field(f: impl Fn(f64) -> FieldVector, x: f64, h: f64) -> FieldVector {
    let (a, b) = (f(x + h), f(x - h));
    FieldVector::new(
        (a.x - b.x) / (2.0 * h),
        (a.y - b.y) / (2.0 * h),
        (a.z - b.z) / (2.0 * h),
    )
}

pub fn gap(a: FieldVector, b: FieldVector) -> f64 {
    (a.x - b.x).abs().max((a.y - b.y).abs()).max((a.z - b.z).abs())
}
