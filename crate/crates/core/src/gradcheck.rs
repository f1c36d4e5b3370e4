//! Central finite-difference gradient checks.
//!
//! Numerical derivatives come from forward evaluations only, so they are
//! independent of every backward rule they are compared against.

use crate::error::{CoreError, Result};
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;
use rand::Rng;

/// Below this magnitude errors are measured absolutely.
pub const ERROR_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn merge(self, other: GradCheckReport) -> GradCheckReport {
        GradCheckReport {
            max_rel_error: self.max_rel_error.max(other.max_rel_error),
            max_abs_error: self.max_abs_error.max(other.max_abs_error),
            checked: self.checked + other.checked,
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(ERROR_FLOOR)
}

/// Compare backward gradients of the scalar built by `build` against
/// central differences with step `h`, for every element of every input.
pub fn check_gradients<F>(inputs: &[Tensor<f64>], h: f64, build: F) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape<f64>, &[Var]) -> Result<Var>,
{
    let eval = |values: &[Tensor<f64>]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|v| tape.constant(v.clone())).collect();
        let out = build(&mut tape, &vars)?;
        tape.value(out).item()
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|v| tape.variable(v.clone())).collect();
    let out = build(&mut tape, &vars)?;
    tape.backward(out)?;
    let analytic: Vec<Tensor<f64>> = vars
        .iter()
        .zip(inputs)
        .map(|(&v, x)| {
            tape.grad(v)
                .cloned()
                .unwrap_or_else(|| Tensor::zeros(x.shape().to_vec()).expect("valid shape"))
        })
        .collect();

    let mut report = GradCheckReport::default();
    let mut probe: Vec<Tensor<f64>> = inputs.to_vec();
    for (i, input) in inputs.iter().enumerate() {
        for j in 0..input.numel() {
            let orig = input.data()[j];
            probe[i].data_mut()[j] = orig + h;
            let plus = eval(&probe)?;
            probe[i].data_mut()[j] = orig - h;
            let minus = eval(&probe)?;
            probe[i].data_mut()[j] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            if !numeric.is_finite() {
                return Err(CoreError::NonFinite("finite-difference probe".into()));
            }
            let a = analytic[i].data()[j];
            report.max_abs_error = report.max_abs_error.max((a - numeric).abs());
            report.max_rel_error = report.max_rel_error.max(relative_error(a, numeric));
            report.checked += 1;
        }
    }
    Ok(report)
}

/// Finite-difference step used by [`op_suite`].
pub const SUITE_STEP: f64 = 1e-5;

/// Worst-case results for one op over all of its random instances.
#[derive(Clone, Debug, PartialEq)]
pub struct OpCheck {
    pub op: &'static str,
    pub instances: usize,
    pub report: GradCheckReport,
}

fn uniform(rng: &mut impl Rng, shape: &[usize], lo: f64, hi: f64) -> Result<Tensor<f64>> {
    Tensor::from_fn(shape.to_vec(), |_| rng.random_range(lo..hi))
}

/// Magnitudes in `[gap, 1)` with random sign, keeping kinks out of reach of
/// the probe step.
fn off_kink(rng: &mut impl Rng, shape: &[usize], gap: f64) -> Result<Tensor<f64>> {
    Tensor::from_fn(shape.to_vec(), |_| {
        let v = rng.random_range(gap..1.0);
        if rng.random::<bool>() {
            v
        } else {
            -v
        }
    })
}

/// `sum(out * r)` for a fixed random `r`, so every output element is weighed.
fn project(tape: &mut Tape<f64>, out: Var, r: &Tensor<f64>) -> Result<Var> {
    let r = tape.constant(r.clone());
    let prod = tape.mul(out, r)?;
    Ok(tape.sum(prod))
}

/// Central-difference checks of every differentiable op on `instances`
/// random shapes and values each.
pub fn op_suite(instances: usize, rng: &mut impl Rng) -> Result<Vec<OpCheck>> {
    const OPS: [&str; 12] = [
        "conv2d",
        "conv_transpose2d",
        "instance_norm",
        "leaky_relu",
        "relu",
        "tanh",
        "sigmoid",
        "avg_pool2",
        "l1_loss",
        "gan_loss_d",
        "gan_loss_g",
        "concat_mean",
    ];
    let mut out = Vec::with_capacity(OPS.len());
    for op in OPS {
        let mut report = GradCheckReport::default();
        for _ in 0..instances {
            let n = rng.random_range(1..=2);
            let c = rng.random_range(1..=3);
            let hw = rng.random_range(3..=6);
            let r = match op {
                "conv2d" => {
                    let o = rng.random_range(1..=3);
                    let k = rng.random_range(1..=3);
                    let stride = rng.random_range(1..=2);
                    let padding = rng.random_range(0..k);
                    let inputs = [
                        uniform(rng, &[n, c, hw, hw], -1.0, 1.0)?,
                        uniform(rng, &[o, c, k, k], -1.0, 1.0)?,
                        uniform(rng, &[o], -1.0, 1.0)?,
                    ];
                    let oh = (hw + 2 * padding - k) / stride + 1;
                    let proj = uniform(rng, &[n, o, oh, oh], -1.0, 1.0)?;
                    check_gradients(&inputs, SUITE_STEP, |t, v| {
                        let y = t.conv2d(v[0], v[1], Some(v[2]), stride, padding)?;
                        project(t, y, &proj)
                    })?
                }
                "conv_transpose2d" => {
                    let o = rng.random_range(1..=3);
                    let k = rng.random_range(2..=4);
                    let stride = rng.random_range(1..=2);
                    let padding = rng.random_range(0..k.min(2));
                    let inputs = [
                        uniform(rng, &[n, c, hw, hw], -1.0, 1.0)?,
                        uniform(rng, &[c, o, k, k], -1.0, 1.0)?,
                        uniform(rng, &[o], -1.0, 1.0)?,
                    ];
                    let oh = (hw - 1) * stride + k - 2 * padding;
                    let proj = uniform(rng, &[n, o, oh, oh], -1.0, 1.0)?;
                    check_gradients(&inputs, SUITE_STEP, |t, v| {
                        let y = t.conv_transpose2d(v[0], v[1], Some(v[2]), stride, padding)?;
                        project(t, y, &proj)
                    })?
                }
                "instance_norm" => {
                    let inputs = [
                        uniform(rng, &[n, c, hw, hw], -1.0, 1.0)?,
                        uniform(rng, &[c], 0.5, 1.5)?,
                        uniform(rng, &[c], -1.0, 1.0)?,
                    ];
                    let proj = uniform(rng, &[n, c, hw, hw], -1.0, 1.0)?;
                    check_gradients(&inputs, SUITE_STEP, |t, v| {
                        let y = t.instance_norm(v[0], v[1], v[2], 1e-5)?;
                        project(t, y, &proj)
                    })?
                }
                "leaky_relu" | "relu" | "tanh" | "sigmoid" => {
                    let kind = match op {
                        "leaky_relu" => crate::tape::Activation::LeakyRelu(0.2),
                        "relu" => crate::tape::Activation::Relu,
                        "tanh" => crate::tape::Activation::Tanh,
                        _ => crate::tape::Activation::Sigmoid,
                    };
                    let inputs = [off_kink(rng, &[n, c, hw, hw], 1e-3)?];
                    let proj = uniform(rng, &[n, c, hw, hw], -1.0, 1.0)?;
                    check_gradients(&inputs, SUITE_STEP, |t, v| {
                        let y = t.activation(v[0], kind);
                        project(t, y, &proj)
                    })?
                }
                "avg_pool2" => {
                    let side = 2 * rng.random_range(1..=3);
                    let inputs = [uniform(rng, &[n, c, side, side], -1.0, 1.0)?];
                    let proj = uniform(rng, &[n, c, side / 2, side / 2], -1.0, 1.0)?;
                    check_gradients(&inputs, SUITE_STEP, |t, v| {
                        let y = t.avg_pool2(v[0])?;
                        project(t, y, &proj)
                    })?
                }
                "l1_loss" => {
                    let b = uniform(rng, &[n, c, hw, hw], -1.0, 1.0)?;
                    let gap = off_kink(rng, &[n, c, hw, hw], 1e-3)?;
                    let a = Tensor::from_fn(b.shape().to_vec(), |i| b.data()[i] + gap.data()[i])?;
                    check_gradients(&[a, b], SUITE_STEP, |t, v| t.l1_loss(v[0], v[1]))?
                }
                "gan_loss_d" | "gan_loss_g" => {
                    let inputs = [
                        uniform(rng, &[n, 1, hw, hw], 0.05, 0.95)?,
                        uniform(rng, &[n, 1, hw, hw], 0.05, 0.95)?,
                    ];
                    let d_side = op == "gan_loss_d";
                    check_gradients(&inputs, SUITE_STEP, |t, v| {
                        let l = crate::losses::gan_log_losses(t, v[0], v[1])?;
                        Ok(if d_side { l.loss_d } else { l.loss_g })
                    })?
                }
                _ => {
                    let c2 = rng.random_range(1..=3);
                    let inputs = [
                        uniform(rng, &[n, c, hw, hw], -1.0, 1.0)?,
                        uniform(rng, &[n, c2, hw, hw], -1.0, 1.0)?,
                    ];
                    let proj = uniform(rng, &[n, c + c2, hw, hw], -1.0, 1.0)?;
                    check_gradients(&inputs, SUITE_STEP, |t, v| {
                        let y = t.concat_channels(&[v[0], v[1]])?;
                        let p = project(t, y, &proj)?;
                        let m = t.mean(y);
                        t.add(p, m)
                    })?
                }
            };
            report = report.merge(r);
        }
        out.push(OpCheck { op, instances, report });
    }
    Ok(out)
}
