use agegan_core::{discriminator_loss, generator_loss, Scalar, Tape, Var};

use crate::error::{E2fError, Result};
use crate::nets::MultiScaleDiscriminator;

pub const DEFAULT_LAMBDA_FM: f64 = 10.0;

#[derive(Clone, Copy, Debug)]
pub struct E2fLosses {
    /// Mean over scales of `-E[log D(real)] - E[log(1 - D(fake))]`.
    pub loss_d: Var,
    /// Mean over scales of `-E[log D(fake)]`.
    pub loss_g_adv: Var,
    /// Mean over scales and feature taps of `mean|f_real - f_fake|`.
    pub loss_fm: Var,
}

fn mean_of<T: Scalar>(tape: &mut Tape<T>, terms: &[Var]) -> Result<Var> {
    let total = agegan_core::losses::sum_scalars(tape, terms)?
        .ok_or_else(|| E2fError::Contract("nothing to average".into()))?;
    Ok(tape.scale(total, T::from_f64_lossy(1.0 / terms.len() as f64)))
}

/// Adversarial and feature-matching terms of a conditional face pair.
/// Freeze the discriminators for the generator update and pass a detached
/// `fake` for the discriminator update.
pub fn e2f_losses<T: Scalar>(
    tape: &mut Tape<T>,
    discriminators: &MultiScaleDiscriminator<T>,
    condition: Var,
    real: Var,
    fake: Var,
) -> Result<E2fLosses> {
    if tape.shape(real) != tape.shape(fake) {
        return Err(E2fError::Core(agegan_core::CoreError::ShapeMismatch {
            op: "e2f_losses",
            lhs: tape.shape(real).to_vec(),
            rhs: tape.shape(fake).to_vec(),
        }));
    }
    let real_out = discriminators.forward(tape, condition, real)?;
    let fake_out = discriminators.forward(tape, condition, fake)?;
    let mut d_terms = Vec::new();
    let mut g_terms = Vec::new();
    let mut fm_terms = Vec::new();
    for (r, f) in real_out.iter().zip(&fake_out) {
        d_terms.push(discriminator_loss(tape, r.score, f.score)?);
        g_terms.push(generator_loss(tape, f.score)?);
        for (&fr, &ff) in r.features.iter().zip(&f.features) {
            let target = tape.detach(fr);
            fm_terms.push(tape.l1_loss(ff, target)?);
        }
    }
    Ok(E2fLosses {
        loss_d: mean_of(tape, &d_terms)?,
        loss_g_adv: mean_of(tape, &g_terms)?,
        loss_fm: mean_of(tape, &fm_terms)?,
    })
}

/// `loss_g_adv + lambda_fm * loss_fm`.
pub fn generator_objective<T: Scalar>(tape: &mut Tape<T>, losses: &E2fLosses, lambda_fm: f64) -> Result<Var> {
    let fm = tape.scale(losses.loss_fm, T::from_f64_lossy(lambda_fm));
    Ok(tape.add(losses.loss_g_adv, fm)?)
}
