//! Evaluate the scale-invariant quantities on shrinking cylinders.

use nsreg::grid::*;
use nsreg::localq::*;

fn main() -> nsreg::Result<()> {
    let grid = SpaceTimeGrid::cube(-0.5, 0.5, 48, 0.92, 0.99, 16)?;
    let spec = FieldSpec::new(
        FieldKind::BlowupProfile {
            t_blow: 1.0,
            center: [0.0; 3],
            profile: Profile::Swirl { amplitude: 0.5, width: 1.0 },
        },
        grid,
    );
    let v = generate_field(&spec)?;
    let pi = generate_pressure(&spec)?;
    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "r", "A", "E", "C", "D", "S", "B_q");
    for r in [0.25, 0.2, 0.15, 0.1, 0.05] {
        let q = evaluate_cylinder(&v, Some(&pi), &ParabolicCylinder::new([0.0; 3], 0.99, r), 2.6)?;
        println!(
            "{r:>8.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            q.a,
            q.e,
            q.c,
            q.d.unwrap_or(f64::NAN),
            q.s,
            q.bq
        );
    }
    Ok(())
}
