//! Fit the constants of the local inequalities over a random ensemble.

use nsreg::grid::SpaceTimeGrid;
use nsreg::regularity::*;

fn main() -> nsreg::Result<()> {
    let grid = SpaceTimeGrid::cube(-1.0, 1.0, 16, 0.0, 0.5, 6)?;
    let specs = band_limited_ensemble(grid, 2024, 20);
    let cfg = HarnessConfig { q: 2.6, pairs: vec![(0.25, 0.5), (0.125, 0.5), (0.5, 0.5)], centers: None };
    let report = lemma_ratio_harness_specs(&specs, &cfg)?;
    for c in &report.constants {
        println!(
            "{:<24} sup ratio {:.4} over {} evaluations (member {:?})",
            c.inequality, c.sup_ratio, c.evaluations, c.argmax_member
        );
    }
    Ok(())
}
