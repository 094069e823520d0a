use std::fs;

use ducc_core::linalg::symmetric_eigenvalues;
use ducc_tools::config::parse_config_str;
use ducc_tools::formats::{heff_active_space, read_heff, sidecar_path};
use ducc_tools::runner::{run_experiment, RunOptions, Status};

const H6_CONFIG: &str = "\
name = h6-export
system = 6
spacings = 2.0
cc_ranks = 2
active_spaces = {2,3,4,5}
export_heff = true
";

#[test]
fn heff_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(H6_CONFIG, "unused").unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        ..RunOptions::default()
    };
    let rows = run_experiment(&cfg, &opts);
    let ducc = rows.iter().find(|r| r.method == "DUCC-SD").unwrap();
    assert_eq!(ducc.status, Status::Converged);

    let path = dir.path().join("heff").join("H6_R2.00_SD_2-3-4-5.heff");
    assert_eq!(fs::metadata(&path).unwrap().len(), 36 * 36 * 8 + 32);
    let file = read_heff(&path).unwrap();
    assert_eq!(file.header.n_spin_orbitals, 12);
    assert_eq!(
        (file.header.n_alpha, file.header.n_beta, file.header.dim),
        (3, 3, 36)
    );
    assert_eq!(file.active, vec![2, 3, 4, 5]);
    assert_eq!(heff_active_space(&file).unwrap().orbitals(), &[1, 2, 3, 4]);
    // Reference determinant first: spin orbitals 0..6 occupied.
    assert_eq!(file.dets[0].0, 0b111111);
    let sidecar = fs::read_to_string(sidecar_path(&path)).unwrap();
    assert!(sidecar.lines().nth(2).unwrap().ends_with("111111"));

    let lowest = symmetric_eigenvalues(&file.matrix)[0];
    assert!((lowest - ducc.energy.unwrap()).abs() < 1e-12);
    assert!((lowest - -3.217040).abs() < 2e-6);
}

#[test]
fn cache_round_trip_gives_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(
        "system = 4\nspacings = 2.0, 3.0\nactive_spaces = {2,3}\n",
        "h4",
    )
    .unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        ..RunOptions::default()
    };
    let cold = run_experiment(&cfg, &opts);
    let cached = fs::read_dir(dir.path().join("cache")).unwrap().count();
    assert_eq!(cached, 2 * cfg.cc_ranks.len());
    let warm = run_experiment(&cfg, &opts);
    for (a, b) in cold.iter().zip(&warm) {
        assert_eq!(a.method, b.method);
        assert!(
            (a.energy.unwrap() - b.energy.unwrap()).abs() < 1e-9,
            "{}",
            a.method
        );
    }
}

#[test]
fn corrupt_cache_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str("system = 4\nspacings = 2.5\ncc_ranks = 2\n", "h4").unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        ..RunOptions::default()
    };
    let first = run_experiment(&cfg, &opts);
    for entry in fs::read_dir(dir.path().join("cache")).unwrap() {
        fs::write(entry.unwrap().path(), "# max_rank 2\nnot an amplitude\n").unwrap();
    }
    let second = run_experiment(&cfg, &opts);
    assert_eq!(first.len(), second.len());
    assert!(second.iter().all(|r| r.converged()));
    assert!((first[1].energy.unwrap() - second[1].energy.unwrap()).abs() < 1e-9);
}
