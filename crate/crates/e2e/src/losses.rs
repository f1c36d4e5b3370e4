use agegan_core::{gan_log_losses, GanLosses, Scalar, Tape, Var};

use crate::error::{GanError, Result};
use crate::nets::DiscriminatorNet;

fn same_shape<T: Scalar>(tape: &Tape<T>, op: &'static str, a: Var, b: Var) -> Result<()> {
    if tape.shape(a) != tape.shape(b) {
        return Err(GanError::Core(agegan_core::CoreError::ShapeMismatch {
            op,
            lhs: tape.shape(a).to_vec(),
            rhs: tape.shape(b).to_vec(),
        }));
    }
    Ok(())
}

/// `loss_d = -E[log D(real)] - E[log(1 - D(fake))]` and the non-saturating
/// `loss_g = -E[log D(fake)]`, averaged over the score grid.
///
/// Freeze `d` on the tape before backpropagating `loss_g` so only the
/// generator that produced `fake` is updated.
pub fn adversarial_loss<T: Scalar>(
    tape: &mut Tape<T>,
    d: &DiscriminatorNet<T>,
    real: Var,
    fake: Var,
) -> Result<GanLosses> {
    same_shape(tape, "adversarial_loss", real, fake)?;
    let d_real = d.score(tape, real)?;
    let d_fake = d.score(tape, fake)?;
    Ok(gan_log_losses(tape, d_real, d_fake)?)
}

/// `mean|recon_x - x| + mean|recon_y - y|`.
pub fn cycle_loss<T: Scalar>(tape: &mut Tape<T>, x: Var, recon_x: Var, y: Var, recon_y: Var) -> Result<Var> {
    same_shape(tape, "cycle_loss", x, recon_x)?;
    same_shape(tape, "cycle_loss", y, recon_y)?;
    let a = tape.l1_loss(recon_x, x)?;
    let b = tape.l1_loss(recon_y, y)?;
    Ok(tape.add(a, b)?)
}

/// `gan_xy + gan_yx + lambda * cycle`.
pub fn full_objective(gan_xy: f64, gan_yx: f64, cycle: f64, lambda: f64) -> f64 {
    gan_xy + gan_yx + lambda * cycle
}

/// [`full_objective`] on the tape.
pub fn full_objective_var<T: Scalar>(tape: &mut Tape<T>, gan_xy: Var, gan_yx: Var, cycle: Var, lambda: f64) -> Result<Var> {
    let adv = tape.add(gan_xy, gan_yx)?;
    let weighted = tape.scale(cycle, T::from_f64_lossy(lambda));
    Ok(tape.add(adv, weighted)?)
}
