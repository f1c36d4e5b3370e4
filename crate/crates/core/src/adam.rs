use crate::error::{CoreError, Result};
use crate::param::ParamSet;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam moments for one [`ParamSet`].
#[derive(Clone, Debug)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig, params: &ParamSet<T>) -> Self {
        let zeros = |p: &crate::param::Parameter<T>| vec![T::zero(); p.value.numel()];
        Self {
            config,
            step: 0,
            first: params.iter().map(zeros).collect(),
            second: params.iter().map(zeros).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update from the gradients currently stored on `params`.
    /// Gradients are left in place.
    pub fn step(&mut self, params: &mut ParamSet<T>) -> Result<()> {
        if params.len() != self.first.len() {
            return Err(CoreError::contract(
                "adam_step",
                format!(
                    "state tracks {} parameters, set has {}",
                    self.first.len(),
                    params.len()
                ),
            ));
        }
        for (p, m) in params.iter().zip(&self.first) {
            if p.value.numel() != m.len() {
                return Err(CoreError::contract(
                    "adam_step",
                    format!("moment buffer for {} does not match its shape", p.name),
                ));
            }
            if p.grad.is_none() {
                return Err(CoreError::contract(
                    "adam_step",
                    format!("parameter {} has no gradient", p.name),
                ));
            }
        }
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let lr = T::from_f64_lossy(c.lr);
        let b1 = T::from_f64_lossy(c.beta1);
        let b2 = T::from_f64_lossy(c.beta2);
        let eps = T::from_f64_lossy(c.eps);
        let corr1 = T::from_f64_lossy(1.0 - c.beta1.powi(t));
        let corr2 = T::from_f64_lossy(1.0 - c.beta2.powi(t));
        for ((p, m), v) in params.iter_mut().zip(&mut self.first).zip(&mut self.second) {
            let grad = p.grad.as_ref().expect("checked above").data();
            for (((w, &g), mi), vi) in p
                .value
                .data_mut()
                .iter_mut()
                .zip(grad)
                .zip(m.iter_mut())
                .zip(v.iter_mut())
            {
                *mi = b1 * *mi + (T::one() - b1) * g;
                *vi = b2 * *vi + (T::one() - b2) * g * g;
                let m_hat = *mi / corr1;
                let v_hat = *vi / corr2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
