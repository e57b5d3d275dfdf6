use capillarity::functionals::{deficit, evaluate, SearchOptions};
use capillarity::geometry::io::{read_profile, read_voxel, write_profile, write_voxel};
use capillarity::geometry::voxelize;
use capillarity::harness::corpus::{item_rng, random_voxel_set};
use capillarity::harness::{geometric_schedule, sweep, SweepConfig, SWEEP_COLUMNS};
use capillarity::symmetrize::schwarz_symmetrize;
use capillarity::{Bubble, CapillarityParams, ProfileSet, Shape};
use proptest::prelude::*;

#[test]
fn files_round_trip_into_identical_reports() {
    let dir = std::env::temp_dir().join(format!("capillarity-flows-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = CapillarityParams::new(0.3, 2).unwrap();
    let prof = ProfileSet::from_bubble(&Bubble::unit(p), 512).unwrap();
    let vox = voxelize(&prof, 2, 1.0 / 16.0).unwrap();
    write_profile(&dir.join("b.csv"), &prof).unwrap();
    write_voxel(&dir.join("b.json"), &vox).unwrap();
    let opts = SearchOptions::default();
    for (a, b) in [
        (Shape::profile(prof.clone(), 2), Shape::profile(read_profile(&dir.join("b.csv")).unwrap(), 2)),
        (Shape::Voxel(vox.clone()), Shape::Voxel(read_voxel(&dir.join("b.json")).unwrap())),
    ] {
        assert_eq!(evaluate(&a, &p, &opts).unwrap(), evaluate(&b, &p, &opts).unwrap());
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_csv_matches_rows() {
    let p = CapillarityParams::new(0.2, 2).unwrap();
    let cfg = SweepConfig { nodes: 1024, ..Default::default() };
    let t = sweep(&p, &cfg, &geometric_schedule(0.1, 3)).unwrap();
    let csv = t.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_COLUMNS.join(","));
    for (line, row) in lines.zip(&t.rows) {
        let vals: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(vals.len(), SWEEP_COLUMNS.len());
        assert_eq!(vals[0], row.eps);
        assert_eq!(vals[3], row.deficit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schwarz_keeps_volume_and_lowers_energy(index in 0usize..10_000, lambda in -0.8f64..0.8) {
        let n = 2 + index % 2;
        let p = CapillarityParams::new(lambda, n).unwrap();
        let v = random_voxel_set(&mut item_rng(91, index), n);
        let before = Shape::Voxel(v.clone());
        let after = Shape::profile(schwarz_symmetrize(&v).unwrap(), n);
        let (mb, ma) = (before.measures(), after.measures());
        prop_assert!((ma.volume - mb.volume).abs() <= 1e-9 * mb.volume);
        prop_assert!(ma.capillarity_perimeter(lambda) <= mb.capillarity_perimeter(lambda) * (1.0 + 1e-12));
        prop_assert!(deficit(&after, &p).unwrap() >= -1e-9);
    }
}
