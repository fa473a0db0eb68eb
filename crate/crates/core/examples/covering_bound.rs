//! Vitali selection and the covering chain on a cluster of candidates.

use nsreg::grid::*;
use nsreg::hausdorff::*;
use nsreg::regularity::*;

fn main() -> nsreg::Result<()> {
    let family = BallFamily::new(vec![
        Ball { center: [0.0, 0.0, 0.0], radius: 0.3 },
        Ball { center: [0.4, 0.0, 0.0], radius: 0.2 },
        Ball { center: [1.0, 0.0, 0.0], radius: 0.1 },
        Ball { center: [1.05, 0.1, 0.0], radius: 0.05 },
    ])?;
    let selected = vitali_select(&family);
    let check = check_selection(&family, &selected);
    println!("selected {selected:?}, disjoint {}, covered by 5x {}", check.disjoint, check.covered);

    let grid = SpaceTimeGrid::cube(-1.0, 1.0, 32, 0.7, 0.99, 30)?;
    let spec = FieldSpec::new(
        FieldKind::BlowupProfile {
            t_blow: 1.0,
            center: [0.0; 3],
            profile: Profile::Swirl { amplitude: 3.0, width: 1.0 },
        },
        grid,
    );
    let v = generate_field(&spec)?;
    let points = vec![[0.0; 3], [0.05, 0.0, 0.0], [0.0, 0.05, -0.05]];
    let cfg = RegularityConfig {
        ladder: Some(RadiusLadder { r_max: 0.25, factor: 0.8, count: 12 }),
        ..RegularityConfig::default()
    };
    let sigma = epsilon_scan(&v, &BasePoints::List(points), &cfg)?.candidates;
    let sweep = covering_sweep(&v, &sigma, 0.2, 0.05, &SweepConfig { eps_hat_max: 0.5, factor: 0.8, count: 4 })?;
    println!("{:>8} {:>4} {:>12} {:>12} {:>12}", "eps", "sel", "sum", "witness", "integral");
    for row in &sweep.sweep {
        println!(
            "{:>8.4} {:>4} {:>12.4e} {:>12.4e} {:>12.4e} {}",
            row.eps_hat,
            row.selected,
            row.comb_sum,
            row.witness_bound,
            row.integral_bound,
            if row.ok { "ok" } else { "broken" }
        );
    }
    Ok(())
}
