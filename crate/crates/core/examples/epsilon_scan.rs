//! Scan a concentrating field and a smooth one for candidate singular points.

use nsreg::grid::*;
use nsreg::regularity::*;

fn main() -> nsreg::Result<()> {
    let grid = SpaceTimeGrid::cube(-1.0, 1.0, 48, 0.92, 0.99, 24)?;
    let blowup = FieldSpec::new(
        FieldKind::BlowupProfile {
            t_blow: 1.0,
            center: [0.0; 3],
            profile: Profile::Swirl { amplitude: 0.5, width: 1.0 },
        },
        grid,
    );
    let smooth = FieldSpec::new(FieldKind::TaylorLike { amplitude: 1.0, wavenumber: 1.0, decay: 0.0 }, grid);
    let cfg = RegularityConfig::default();
    for (name, spec) in [("blowup", blowup), ("taylor", smooth)] {
        let report = epsilon_scan(&generate_field(&spec)?, &BasePoints::Grid(5), &cfg)?;
        let top = report.profiles.iter().map(|p| p.sup).fold(0.0, f64::max);
        println!("{name}: {} of {} points flagged, largest sup {top:.4}", report.candidates.len(), report.profiles.len());
        for p in &report.candidates.points {
            println!("    x = {:?}, sup {:.4} at r = {:.4}", p.x, p.sup, p.argmax_r);
        }
    }
    Ok(())
}
