mod common;

use nsreg::grid::*;
use nsreg::Error;

fn max_abs_diff(a: &Field, b: &Field) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn band_limited(grid: SpaceTimeGrid) -> FieldSpec {
    FieldSpec::new(
        FieldKind::BandLimited { seed: 7, modes: 6, amplitude: 1.0, max_wavenumber: 3.0 },
        grid,
    )
}

#[test]
fn container_roundtrip_is_bit_exact() {
    let grid = common::cube(-1.0, 1.0, 12, 0.0, 0.5, 5);
    let spec = band_limited(grid);
    let v = generate_field(&spec).unwrap();
    let pi = generate_pressure(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, f) in [("v.nsfd", &v), ("pi.nsfd", &pi)] {
        let path = dir.path().join(name);
        store_field(f, &path).unwrap();
        let back = load_field(&path).unwrap();
        assert_eq!(&back, f);
        assert_eq!(to_bytes(&back), std::fs::read(&path).unwrap());
    }
}

#[test]
fn corrupt_containers_are_rejected() {
    let grid = common::cube(0.0, 1.0, 4, 0.0, 1.0, 2);
    let bytes = to_bytes(&generate_field(&common::taylor(grid)).unwrap());

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(from_bytes(&bad_magic), Err(Error::Format { offset: 0, .. })));

    let mut bad_version = bytes.clone();
    bad_version[4] = 9;
    assert!(matches!(from_bytes(&bad_version), Err(Error::Version(9))));

    assert!(matches!(from_bytes(&bytes[..bytes.len() - 3]), Err(Error::Format { .. })));
    assert!(matches!(from_bytes(&bytes[..10]), Err(Error::Format { .. })));
}

#[test]
fn unit_rescale_is_a_copy() {
    let grid = common::cube(-1.0, 1.0, 10, 0.0, 1.0, 4);
    let v = generate_field(&band_limited(grid)).unwrap();
    assert_eq!(rescale(&v, 1.0).unwrap(), v);
}

#[test]
fn rescale_matches_rescaled_spec() {
    let grid = common::cube(-1.0, 1.0, 10, 0.0, 0.9, 4);
    let spec = common::swirl_blowup(grid, 1.0);
    let v = generate_field(&spec).unwrap();
    let pi = generate_pressure(&spec).unwrap();
    for lambda in [0.5, 2.0, 5.0] {
        let direct = generate_field(&spec.rescaled(lambda).unwrap()).unwrap();
        let moved = rescale(&v, lambda).unwrap();
        assert_eq!(moved.grid, direct.grid);
        let scale = v.max_magnitude(3) * lambda;
        assert!(max_abs_diff(&moved, &direct) <= 1e-12 * scale);

        let pd = generate_pressure(&spec.rescaled(lambda).unwrap()).unwrap();
        let pm = rescale_pressure(&pi, lambda).unwrap();
        assert!(max_abs_diff(&pm, &pd) <= 1e-12 * scale * scale);
    }
}

#[test]
fn rescale_onto_pulled_back_grid_needs_no_interpolation() {
    let grid = common::cube(-1.0, 1.0, 8, 0.0, 1.0, 3);
    let v = generate_field(&band_limited(grid)).unwrap();
    let target = grid.pulled_back(2.0);
    let a = rescale_onto(&v, 2.0, 1, &target).unwrap();
    let b = rescale(&v, 2.0).unwrap();
    assert!(max_abs_diff(&a, &b) < 1e-12);
}

#[test]
fn rescale_onto_interpolates_linear_fields_exactly() {
    let grid = common::cube(-1.0, 1.0, 16, 0.0, 1.0, 3);
    let v = generate_field(&FieldSpec::new(FieldKind::LinearShear, grid)).unwrap();
    let target = common::cube(-0.3, 0.3, 7, 0.0, 0.2, 2);
    let lambda = 1.7;
    let got = rescale_onto(&v, lambda, 1, &target).unwrap();
    let want = generate_field(&FieldSpec { scale: lambda, ..FieldSpec::new(FieldKind::LinearShear, target) }).unwrap();
    assert!(max_abs_diff(&got, &want) < 1e-12);

    let outside = common::cube(-0.9, 0.9, 4, 0.0, 0.2, 2);
    assert!(matches!(rescale_onto(&v, lambda, 1, &outside), Err(Error::OutOfDomain(_))));
}

#[test]
fn budget_is_enforced_before_allocation() {
    let grid = common::cube(-1.0, 1.0, 128, 0.0, 1.0, 32);
    let err = generate_field(&common::taylor(grid)).unwrap_err();
    assert!(matches!(err, Error::GridTooLarge { .. }));
    let small = common::cube(-1.0, 1.0, 4, 0.0, 1.0, 2);
    assert!(generate_field_within(&common::taylor(small), 10).is_err());
}

#[test]
fn invalid_specs_are_refused() {
    assert!(SpaceTimeGrid::cube(1.0, -1.0, 4, 0.0, 1.0, 2).is_err());
    assert!(SpaceTimeGrid::cube(-1.0, 1.0, 0, 0.0, 1.0, 2).is_err());
    let grid = common::cube(-1.0, 1.0, 4, 0.0, 1.0, 2);
    // the blowup time must lie beyond the grid
    let spec = FieldSpec::new(
        FieldKind::BlowupProfile {
            t_blow: 0.5,
            center: [0.0; 3],
            profile: Profile::Gaussian { amplitude: 1.0, width: 1.0 },
        },
        grid,
    );
    assert!(generate_field(&spec).is_err());
    assert!(spec.rescaled(0.0).is_err());
}

#[test]
fn band_limited_fields_are_seeded() {
    let grid = common::cube(-1.0, 1.0, 6, 0.0, 1.0, 2);
    let a = generate_field(&band_limited(grid)).unwrap();
    let b = generate_field(&band_limited(grid)).unwrap();
    assert_eq!(a, b);
    let other = FieldSpec::new(
        FieldKind::BandLimited { seed: 8, modes: 6, amplitude: 1.0, max_wavenumber: 3.0 },
        grid,
    );
    assert_ne!(generate_field(&other).unwrap(), a);
}
