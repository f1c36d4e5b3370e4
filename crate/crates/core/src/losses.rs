use crate::error::Result;
use crate::scalar::Scalar;
use crate::tape::{Tape, Var};

/// Clamp applied to discriminator scores before taking logs.
pub const SCORE_EPS: f64 = 1e-7;

/// Discriminator and generator terms of the log-likelihood GAN game.
///
/// `loss_d = -E[log D(x)] - E[log(1 - D(G(z)))]` and the non-saturating
/// generator term `loss_g = -E[log D(G(z))]`.
pub struct GanLosses {
    pub loss_d: Var,
    pub loss_g: Var,
}

pub fn gan_log_losses<T: Scalar>(tape: &mut Tape<T>, d_real: Var, d_fake: Var) -> Result<GanLosses> {
    let real_term = tape.neg_log_mean(d_real, false, SCORE_EPS)?;
    let fake_term = tape.neg_log_mean(d_fake, true, SCORE_EPS)?;
    let loss_d = tape.add(real_term, fake_term)?;
    let loss_g = tape.neg_log_mean(d_fake, false, SCORE_EPS)?;
    Ok(GanLosses { loss_d, loss_g })
}

/// Discriminator-side loss only: `-E[log D(x)] - E[log(1 - D(G(z)))]`.
pub fn discriminator_loss<T: Scalar>(tape: &mut Tape<T>, d_real: Var, d_fake: Var) -> Result<Var> {
    let real_term = tape.neg_log_mean(d_real, false, SCORE_EPS)?;
    let fake_term = tape.neg_log_mean(d_fake, true, SCORE_EPS)?;
    tape.add(real_term, fake_term)
}

/// Non-saturating generator loss `-E[log D(G(z))]`.
pub fn generator_loss<T: Scalar>(tape: &mut Tape<T>, d_fake: Var) -> Result<Var> {
    tape.neg_log_mean(d_fake, false, SCORE_EPS)
}

/// Sum of scalar vars.
pub fn sum_scalars<T: Scalar>(tape: &mut Tape<T>, terms: &[Var]) -> Result<Option<Var>> {
    let mut acc: Option<Var> = None;
    for &t in terms {
        acc = Some(match acc {
            None => t,
            Some(a) => tape.add(a, t)?,
        });
    }
    Ok(acc)
}
