use super::GcnParams;
use crate::error::{Error, Result};

/// First/second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: GcnParams,
    pub v: GcnParams,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(like: &GcnParams) -> Self {
        Self {
            m: like.zeros_like(),
            v: like.zeros_like(),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam update applied in place.
pub fn adam_step(
    params: &mut GcnParams,
    grads: &GcnParams,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) {
        return Err(Error::invalid(
            "Adam state/gradient shapes do not match parameters",
        ));
    }
    if let Some(name) = grads.first_non_finite() {
        return Err(Error::NonFinite(format!("gradient tensor {name}")));
    }
    state.step += 1;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let bc1 = 1.0 - b1.powi(state.step as i32);
    let bc2 = 1.0 - b2.powi(state.step as i32);
    let AdamState { m, v, .. } = state;
    for (((p, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(m.tensors_mut())
        .zip(v.tensors_mut())
    {
        for i in 0..p.1.len() {
            let gi = g.1[i];
            m.1[i] = b1 * m.1[i] + (1.0 - b1) * gi;
            v.1[i] = b2 * v.1[i] + (1.0 - b2) * gi * gi;
            let m_hat = m.1[i] / bc1;
            let v_hat = v.1[i] / bc2;
            p.1[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
