//! Iterate the one-step decay and compare with its closed form.

use nsreg::regularity::*;

fn main() -> nsreg::Result<()> {
    let cfg = IterationConfig { theta_decay: 0.5, delta_aux: 0.1, epsilon: 1e-6, c11: 1.0, q: 2.9 };
    let rep = iterate_decay(10.0, &cfg, 10)?;
    println!("theta {:.3}, G {:.4e}", rep.theta, rep.g);
    for (k, (a, b)) in rep.sequence.iter().zip(&rep.closed_form).enumerate() {
        println!("{k:>3} {a:.6e} {b:.6e}");
    }
    println!("iterated bound {:.4e}, radius bound {:.4e}", rep.iterated_bound, rep.radius_bound);
    Ok(())
}
