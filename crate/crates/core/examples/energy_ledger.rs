//! Energy functional and pressure majorant over a time window.

use nsreg::energy::*;
use nsreg::exponents::*;
use nsreg::grid::*;
use nsreg::regularity::band_limited_ensemble;

fn main() -> nsreg::Result<()> {
    let grid = SpaceTimeGrid::cube(-1.0, 1.0, 24, 0.0, 0.5, 6)?;
    let spec = band_limited_ensemble(grid, 11, 1)[0];
    let v = generate_field(&spec)?;
    let pi = generate_pressure(&spec)?;
    for delta in [0.1, 0.3, 0.45] {
        let led = energy_functional(&v, delta, 0.0, 0.5)?;
        println!(
            "delta {delta}: sup {:.4}, grad {:.4}, mixed {:.4}, E = {:.4}",
            led.sup_term, led.grad_term, led.mixed_term, led.e_delta
        );
    }
    let p = 3.0 / (2.1 - 2.0 / 3.0);
    let tuple = select_theta(&check_admissible(p, 3.0, 0.3, 0.1))?;
    let b = pressure_term_bound(&v, &pi, &tuple, 0.0, 0.5)?;
    println!("pressure term {:.4e} against majorant {:.4e} (ratio {:.3})", b.i, b.majorant, b.ratio);
    Ok(())
}
