//! Test-only oracles shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use tweetsift::nn::{Matrix, ModelRng, Trainable};

pub mod gradient_checks;

pub const FD_STEP: f64 = 1e-5;
/// Relative errors are measured against max(|analytic|, |numeric|, this).
pub const REL_FLOOR: f64 = 1e-6;

pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Largest relative error between `analytic` and central differences of
/// `loss` around `x`.
pub fn fd_max_rel_error(x: &[f64], analytic: &[f64], mut loss: impl FnMut(&[f64]) -> f64) -> f64 {
    assert_eq!(x.len(), analytic.len());
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + FD_STEP;
        let up = loss(&probe);
        probe[i] = x[i] - FD_STEP;
        let down = loss(&probe);
        probe[i] = x[i];
        let numeric = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(rel_error(analytic[i], numeric));
    }
    worst
}

/// Checks every parameter of `model` on `batch`. Each loss evaluation uses
/// a generator seeded with `seed`, so dropout masks are identical across the
/// analytic pass and every perturbed pass.
pub fn model_fd_max_rel_error<M: Trainable>(model: &mut M, batch: &[&M::Example], seed: u64) -> f64 {
    let (_, grads) = model
        .batch_gradients(batch, &mut ModelRng::seed_from_u64(seed))
        .unwrap();
    let analytic = grads.flat();
    let shapes: Vec<usize> = model.parameters().iter().map(|p| p.len()).collect();
    let mut worst = 0.0f64;
    let mut flat_index = 0;
    for (t, &len) in shapes.iter().enumerate() {
        for e in 0..len {
            let original = model.parameters()[t].as_slice()[e];
            let eval = |value: f64, model: &mut M| {
                model.parameters_mut()[t].as_mut_slice()[e] = value;
                model
                    .batch_gradients(batch, &mut ModelRng::seed_from_u64(seed))
                    .unwrap()
                    .0
            };
            let up = eval(original + FD_STEP, model);
            let down = eval(original - FD_STEP, model);
            model.parameters_mut()[t].as_mut_slice()[e] = original;
            let numeric = (up - down) / (2.0 * FD_STEP);
            worst = worst.max(rel_error(analytic[flat_index], numeric));
            flat_index += 1;
        }
    }
    worst
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ModelRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Text made of random lowercase letters and digits.
pub fn random_chars(len: usize, rng: &mut ModelRng) -> String {
    const POOL: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789 ";
    (0..len).map(|_| POOL[rng.gen_range(0..POOL.len())] as char).collect()
}
