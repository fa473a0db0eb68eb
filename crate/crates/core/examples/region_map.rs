//! Tabulate the admissible region in the (1/p, 1/r) plane as ASCII.

use nsreg::exponents::*;

fn main() -> nsreg::Result<()> {
    let grid = RegionGrid { inv_p_min: 0.0, inv_p_max: 1.0, inv_r_min: 0.0, inv_r_max: 1.0, n: 40, delta_samples: 8 };
    let rows = region_map(&grid)?;
    // rows run over inv_p fastest
    let mut lines: Vec<String> = rows
        .chunks(grid.n)
        .map(|row| {
            row.iter()
                .map(|r| match r.case {
                    Some(c) if c.is_large_r() => '#',
                    Some(_) => '+',
                    None => '.',
                })
                .collect()
        })
        .collect();
    lines.reverse();
    println!("1/r up, 1/p right; # means r >= 2, + means r < 2");
    for l in lines {
        println!("{l}");
    }
    let admissible = rows.iter().filter(|r| r.admissible).count();
    println!("{admissible} of {} points admissible", rows.len());
    Ok(())
}
