//! Generate a field, rescale it, and roundtrip it through the binary format.

use nsreg::grid::*;

fn main() -> nsreg::Result<()> {
    let grid = SpaceTimeGrid::cube(-1.0, 1.0, 24, 0.5, 0.9, 5)?;
    let spec = FieldSpec::new(
        FieldKind::BlowupProfile {
            t_blow: 1.0,
            center: [0.0; 3],
            profile: Profile::Swirl { amplitude: 1.0, width: 1.0 },
        },
        grid,
    );
    let v = generate_field(&spec)?;
    let pi = generate_pressure(&spec)?;
    for n in 0..grid.nt {
        println!("t = {:.2}: max |v| = {:.4}", grid.time(n), v.max_magnitude(n));
    }
    println!("pressure components: {}", pi.components());

    let scaled = rescale(&v, 2.0)?;
    println!("rescaled by 2: max |v| at the last time = {:.4}", scaled.max_magnitude(grid.nt - 1));

    let path = std::env::temp_dir().join("nsreg_example.nsfd");
    store_field(&v, &path)?;
    let back = load_field(&path)?;
    println!("roundtrip identical: {}", back == v);
    std::fs::remove_file(path)?;
    Ok(())
}
