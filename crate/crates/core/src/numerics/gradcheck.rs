//! Central-difference validation of backward rules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scalar::Scalar;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Outcome of one finite-difference sweep.
#[derive(Debug, Clone)]
pub struct FiniteDiffReport {
    /// max over checked coordinates of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
    pub max_rel_err: f64,
    /// (input index, flat coordinate) of the worst coordinate.
    pub worst: (usize, usize),
    pub analytic_at_worst: f64,
    pub numeric_at_worst: f64,
    pub coords_checked: usize,
}

/// Default step: coarse for f32, fine for f64.
pub fn default_eps(dtype: super::scalar::Dtype) -> f64 {
    match dtype {
        super::scalar::Dtype::F32 => 1e-3,
        super::scalar::Dtype::F64 => 1e-6,
    }
}

/// Checks the analytic vector-Jacobian product of an operation against
/// central differences of the scalar loss `sum(output * cotangent)` with a
/// fixed random cotangent.
///
/// `eval` must be pure; it receives the inputs immutably, so mutation is
/// ruled out by construction. `vjp` returns one gradient per input, in
/// order. When `max_coords` is set and the total coordinate count exceeds
/// it, a seeded random subset of coordinates is probed instead of the full
/// sweep (used for the deep composite checks).
pub fn finite_diff_check<T: Scalar>(
    inputs: &[Tensor<T>],
    eps: f64,
    max_coords: Option<usize>,
    seed: u64,
    eval: &dyn Fn(&[Tensor<T>]) -> Result<Tensor<T>>,
    vjp: &dyn Fn(&[Tensor<T>], &Tensor<T>) -> Result<Vec<Tensor<T>>>,
) -> Result<FiniteDiffReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out0 = eval(inputs)?;
    let cot = Tensor::<T>::rand_uniform(&mut rng, out0.dims(), -1.0, 1.0);

    let grads = vjp(inputs, &cot)?;
    if grads.len() != inputs.len() {
        return Err(Error::contract(format!(
            "vjp returned {} gradients for {} inputs",
            grads.len(),
            inputs.len()
        )));
    }
    for (i, (g, x)) in grads.iter().zip(inputs.iter()).enumerate() {
        if !g.same_shape(x) {
            return Err(Error::contract(format!("gradient {i} shape {:?} vs input {:?}", g.dims(), x.dims())));
        }
    }

    let loss = |ins: &[Tensor<T>]| -> Result<f64> {
        let out = eval(ins)?;
        if !out.same_shape(&cot) {
            return Err(Error::contract("eval output shape changed between calls".to_string()));
        }
        let mut acc = 0.0f64;
        for (&o, &c) in out.data().iter().zip(cot.data().iter()) {
            acc += o.as_f64() * c.as_f64();
        }
        Ok(acc)
    };

    // Enumerate (input, coord) pairs; subsample when asked to.
    let total: usize = inputs.iter().map(|t| t.len()).sum();
    let coords: Vec<(usize, usize)> = match max_coords {
        Some(k) if total > k => {
            let mut picks = Vec::with_capacity(k);
            for _ in 0..k {
                let mut flat = rng.gen_range(0..total);
                let mut input_idx = 0;
                while flat >= inputs[input_idx].len() {
                    flat -= inputs[input_idx].len();
                    input_idx += 1;
                }
                picks.push((input_idx, flat));
            }
            picks
        }
        _ => {
            let mut all = Vec::with_capacity(total);
            for (i, t) in inputs.iter().enumerate() {
                for j in 0..t.len() {
                    all.push((i, j));
                }
            }
            all
        }
    };

    let mut work: Vec<Tensor<T>> = inputs.to_vec();
    let mut report = FiniteDiffReport {
        max_rel_err: 0.0,
        worst: (0, 0),
        analytic_at_worst: 0.0,
        numeric_at_worst: 0.0,
        coords_checked: coords.len(),
    };
    let step = T::from_f64(eps);
    for (i, j) in coords {
        let orig = work[i].data()[j];
        work[i].data_mut()[j] = orig + step;
        let lp = loss(&work)?;
        work[i].data_mut()[j] = orig - step;
        let lm = loss(&work)?;
        work[i].data_mut()[j] = orig;

        let numeric = (lp - lm) / (2.0 * eps);
        let analytic = grads[i].data()[j].as_f64();
        let rel = (analytic - numeric).abs() / f64::max(1e-8, analytic.abs() + numeric.abs());
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst = (i, j);
            report.analytic_at_worst = analytic;
            report.numeric_at_worst = numeric;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::ops::{matmul, matmul_backward};
    use super::*;

    #[test]
    fn matmul_gradients_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Tensor::<f64>::rand_uniform(&mut rng, &[3, 4], -1.0, 1.0);
        let b = Tensor::<f64>::rand_uniform(&mut rng, &[4, 2], -1.0, 1.0);
        let report = finite_diff_check(
            &[a, b],
            1e-6,
            None,
            11,
            &|ins| matmul(&ins[0], &ins[1]),
            &|ins, cot| {
                let (ga, gb) = matmul_backward(&ins[0], &ins[1], cot);
                Ok(vec![ga, gb])
            },
        )
        .unwrap();
        assert!(report.max_rel_err <= 1e-9, "rel err {}", report.max_rel_err);
    }

    #[test]
    fn corrupted_backward_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Tensor::<f64>::rand_uniform(&mut rng, &[3, 3], -1.0, 1.0);
        let b = Tensor::<f64>::rand_uniform(&mut rng, &[3, 3], -1.0, 1.0);
        let report = finite_diff_check(
            &[a, b],
            1e-6,
            None,
            12,
            &|ins| matmul(&ins[0], &ins[1]),
            &|ins, cot| {
                let (ga, gb) = matmul_backward(&ins[0], &ins[1], cot);
                // Deliberately wrong scale on one operand.
                Ok(vec![ga.scale(1.5), gb])
            },
        )
        .unwrap();
        assert!(report.max_rel_err > 1e-3, "corruption went unnoticed: {}", report.max_rel_err);
    }
}
