use std::path::Path;
use std::process::{Command, Output};

fn oamspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oamspace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_pgm(path: &Path) -> (usize, usize, Vec<u16>) {
    let bytes = std::fs::read(path).unwrap();
    let mut newlines = bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i);
    let end = newlines.nth(2).unwrap() + 1;
    let header = std::str::from_utf8(&bytes[..end]).unwrap();
    let dims: Vec<usize> = header
        .split_whitespace()
        .skip(1)
        .take(2)
        .map(|v| v.parse().unwrap())
        .collect();
    let data = bytes[end..]
        .chunks(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    (dims[0], dims[1], data)
}

#[test]
fn render_writes_images_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = oamspace(&[
        "render", "--l", "2", "--p", "0", "--grid", "65", "--out", out, "--stem", "ring",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "ring_intensity.pgm",
        "ring_phase.pgm",
        "ring_intensity.pgm.json",
        "ring_phase.pgm.json",
        "ring_config.json",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let (w, h, data) = read_pgm(&dir.path().join("ring_intensity.pgm"));
    assert_eq!((w, h), (65, 65));
    assert_eq!(data[32 * 65 + 32], 0);
    assert_eq!(*data.iter().max().unwrap(), 65535);
}

#[test]
fn equator_render_is_hermite_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = oamspace(&[
        "render", "--l", "2", "--theta", "90", "--deg", "--grid", "65", "--extent", "4", "--out", out,
    ]);
    assert!(o.status.success());
    let (_, _, data) = read_pgm(&dir.path().join("mode_intensity.pgm"));
    // the central row of an HG20-like pattern has bright lobes left and right of a bright centre,
    // while the central column has only the centre
    let row: Vec<u16> = (0..65).map(|ix| data[32 * 65 + ix]).collect();
    let col: Vec<u16> = (0..65).map(|iy| data[iy * 65 + 32]).collect();
    let peaks = |v: &[u16]| {
        (1..64)
            .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > 1000)
            .count()
    };
    assert_eq!(peaks(&row) + peaks(&col), 4);
    assert_eq!(peaks(&row), 3);
}

#[test]
fn propagated_pole_is_a_scaled_copy() {
    // w0 = 1, k0 = 100 gives z0 = 50; at z = 2 z0 the width grows by sqrt 5
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ext = 6.0f64;
    let far = format!("{}", ext * 5f64.sqrt());
    let a = oamspace(&[
        "render", "--l", "2", "--grid", "65", "--extent", "6", "--out", out, "--stem", "near",
    ]);
    let b = oamspace(&[
        "render", "--l", "2", "--grid", "65", "--extent", &far, "--z", "100", "--out", out, "--stem", "far",
    ]);
    assert!(a.status.success() && b.status.success());
    let (_, _, near) = read_pgm(&dir.path().join("near_intensity.pgm"));
    let (_, _, far) = read_pgm(&dir.path().join("far_intensity.pgm"));
    let worst = near
        .iter()
        .zip(&far)
        .map(|(x, y)| (*x as i32 - *y as i32).abs())
        .max()
        .unwrap();
    assert!(worst <= 1, "grey levels differ by {worst}");
}

#[test]
fn exit_codes() {
    let bad_sphere = oamspace(&["overlap", "--theta1", "4"]);
    assert_eq!(bad_sphere.status.code(), Some(2));
    let small_grid = oamspace(&["render", "--grid", "8"]);
    assert_eq!(small_grid.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let no_config = oamspace(&["render", "--config", missing.to_str().unwrap()]);
    assert_eq!(no_config.status.code(), Some(3));
    let strict = oamspace(&["verify", "--suite", "symplectic", "--tol", "1e-300"]);
    assert_eq!(strict.status.code(), Some(1));
    let usage = oamspace(&["verify", "--suite", "everything"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn verify_report_schema() {
    let o = oamspace(&["verify", "--suite", "symplectic", "--seed", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "symplectic");
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-12);
    assert!(!v["checks"].as_array().unwrap().is_empty());
}

#[test]
fn config_file_drives_render() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oamspace::io::RunConfig {
        output: oamspace::io::OutputConfig {
            dir: dir.path().to_path_buf(),
            stem: "from_file".into(),
        },
        grid: oamspace::io::GridConfig {
            resolution: 48,
            half_extent: Some(5.0),
        },
        ..Default::default()
    };
    let path = dir.path().join("run.json");
    cfg.save(&path).unwrap();
    let o = oamspace(&["render", "--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (w, _, _) = read_pgm(&dir.path().join("from_file_intensity.pgm"));
    assert_eq!(w, 48);
    let written = std::fs::read_to_string(dir.path().join("from_file_config.json")).unwrap();
    assert_eq!(written, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn overlap_sweep_locates_radial_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = oamspace(&[
        "overlap",
        "--l",
        "1",
        "--p",
        "1",
        "--sweep",
        csv.to_str().unwrap(),
        "--grid",
        "61",
    ]);
    assert!(o.status.success());
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 61 * 61);
    // along a meridian from the pole tau decreases, and the overlap dips to zero where tau = 2/3
    let meridian: Vec<&Vec<f64>> = rows.iter().filter(|r| r[1] == 0.0).collect();
    for w in meridian.windows(2) {
        assert!(w[1][2] <= w[0][2] + 1e-15);
    }
    let k = meridian.iter().position(|r| r[2] < 2.0 / 3.0).unwrap();
    assert!(meridian[k - 1][3] > 0.0 || meridian[k][3] > 0.0);
    let lo = meridian[k - 1][3].min(meridian[k][3]);
    assert!(lo < 1e-2);
}
