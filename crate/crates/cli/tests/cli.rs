mod common;

use common::*;
use dsmfuse_core::raster::{read_asc, GridGeometry, RasterGrid, DEFAULT_NODATA};
use std::fs;

#[test]
fn median_of_one_layer_is_the_layer() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, _) = scene(1, 48);
    let layer = write_grid(dir.path(), "l.asc", &noisy(&truth, 0.5, 3));
    let out = dir.path().join("f.asc");
    let o = run(&["fuse", "--mode", "median", "--layers", s(&layer), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&layer).unwrap());
    assert!(out.with_extension("pgm").exists());
    assert!(out.with_extension("manifest.json").exists());
}

#[test]
fn collapsed_window_matches_median_files() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, ortho) = scene(2, 48);
    let paths: Vec<String> = (0..3)
        .map(|i| s(&write_grid(dir.path(), &format!("l{i}.asc"), &noisy(&truth, 1.0, i))).to_string())
        .collect();
    let ortho = write_grid(dir.path(), "o.asc", &ortho);
    let layers = paths.join(",");
    let a = dir.path().join("a.asc");
    let m = dir.path().join("m.asc");
    let o = run(&["fuse", "--layers", &layers, "--ortho", s(&ortho), "--gamma", "0.999999", "--out", s(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["fuse", "--mode", "median", "--layers", &layers, "--out", s(&m)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&m).unwrap());
    assert_eq!(fs::read(a.with_extension("pgm")).unwrap(), fs::read(m.with_extension("pgm")).unwrap());
}

#[test]
fn adaptive_without_ortho_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let layer = write_grid(dir.path(), "l.asc", &scene(1, 24).0);
    let out = dir.path().join("f.asc");
    let o = run(&["fuse", "--layers", s(&layer), "--out", s(&out)]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("--ortho"));
    assert!(!out.exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, _) = scene(1, 32);
    let t = write_grid(dir.path(), "t.asc", &truth);
    let out = dir.path().join("o.asc");

    // unreadable and malformed inputs
    assert_eq!(code(&run(&["eval", "--dsm", "/nonexistent.asc", "--truth", s(&t)])), 2);
    let bad = dir.path().join("bad.asc");
    fs::write(&bad, "ncols 2\nnrows x\n").unwrap();
    assert_eq!(code(&run(&["fuse", "--mode", "median", "--layers", s(&bad), "--out", s(&out)])), 2);

    // disjoint grids
    let far = RasterGrid::new(
        GridGeometry { origin_x: 1e5, ..*truth.geometry() },
        truth.values().to_vec(),
        DEFAULT_NODATA,
    )
    .unwrap();
    let far = write_grid(dir.path(), "far.asc", &far);
    assert_eq!(code(&run(&["eval", "--dsm", s(&far), "--truth", s(&t)])), 3);
    assert_eq!(
        code(&run(&["fuse", "--mode", "median", "--layers", &format!("{},{}", s(&t), s(&far)), "--out", s(&out)])),
        3
    );

    // bad configuration
    assert_eq!(code(&run(&["eval", "--dsm", s(&t), "--truth", s(&t), "--threshold", "-1"])), 4);
    assert_eq!(code(&run(&["fuse", "--mode", "median", "--layers", s(&t), "--grid", "1,2", "--out", s(&out)])), 4);
    assert_eq!(code(&run(&["fuse", "--bogus"])), 4);
    assert_eq!(code(&run(&["--help"])), 0);
    assert!(!out.exists());
}

#[test]
fn eval_reports_offset_and_raw_error() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, _) = scene(3, 48);
    let t = write_grid(dir.path(), "t.asc", &truth);
    let up = write_grid(dir.path(), "up.asc", &truth.offset_valid(1.0));

    let o = run(&["eval", "--dsm", s(&t), "--truth", s(&t)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "0.000000");

    let csv = dir.path().join("e.csv");
    assert_eq!(code(&run(&["eval", "--dsm", s(&up), "--truth", s(&t), "--out", s(&csv)])), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("rmse_raw_m"), "1.000000");
    assert_eq!(col("rmse_all_m"), "0.000000");
    assert_eq!(col("dz_m"), "1.000000");
    assert_eq!(col("converged"), "true");
    assert!(csv.with_extension("manifest.json").exists());
}

#[test]
fn rank_selects_top_ten_of_twelve() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, _) = scene(4, 64);
    let t = write_grid(dir.path(), "t.asc", &truth);
    let angles: Vec<f64> = (0..12).map(|i| 11.0 + 1.5 * i as f64).collect();
    let manifest = pair_fixture(dir.path(), &truth, &angles);
    let out = dir.path().join("ranked.csv");
    let o = run(&["rank", "--manifest", s(&manifest), "--truth", s(&t), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows.iter().filter(|r| r[4] == "true").count(), 10);
    // noise rises with the view index, so the ranking follows it
    let order: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    let expected: Vec<String> = (0..12).map(|i| format!("v{i:02}")).collect();
    assert_eq!(order, expected);
}

#[test]
fn rank_with_nothing_in_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, _) = scene(5, 32);
    let t = write_grid(dir.path(), "t.asc", &truth);
    let manifest = pair_fixture(dir.path(), &truth, &[5.0, 40.0]);
    let out = dir.path().join("ranked.csv");
    let o = run(&["rank", "--manifest", s(&manifest), "--truth", s(&t), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("selection is empty"), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1);

    let missing = dir.path().join("missing.csv");
    let o = run(&["rank", "--manifest", s(&missing), "--truth", s(&t), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn curve_rows_and_single_layer() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, ortho) = scene(6, 48);
    let t = write_grid(dir.path(), "t.asc", &truth);
    let o_path = write_grid(dir.path(), "o.asc", &ortho);
    let layers: Vec<String> = (0..10)
        .map(|i| s(&write_grid(dir.path(), &format!("l{i}.asc"), &noisy(&truth, 0.3 + 0.2 * i as f64, i))).to_string())
        .collect();
    let out = dir.path().join("c.csv");
    let o = run(&["curve", "--layers", &layers.join(","), "--ortho", s(&o_path), "--truth", s(&t), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "k,rmse_adaptive_m,rmse_median_m");
    assert_eq!(text.lines().count(), 11);

    let one = dir.path().join("one.csv");
    let o = run(&["curve", "--layers", &layers[0], "--ortho", s(&o_path), "--truth", s(&t), "--out", s(&one)]);
    assert_eq!(code(&o), 0);
    let row: Vec<String> = fs::read_to_string(&one).unwrap().lines().nth(1).unwrap().split(',').map(String::from).collect();
    assert_eq!(row[0], "1");
    // one layer: the median method returns the layer itself
    let e = run(&["eval", "--dsm", &layers[0], "--truth", s(&t)]);
    let eval_all = String::from_utf8(e.stdout).unwrap().lines().nth(1).unwrap().split(',').nth(1).unwrap().to_string();
    assert_eq!(row[2], eval_all);
}

#[test]
fn rpc_commands_print_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_rpc(dir.path(), "m.rpc", &view(15.0, 40.0));
    let n = write_rpc(dir.path(), "n.rpc", &view(0.0, 0.0));
    let o = run(&["rpc", "project", "--rpc", s(&m), "--point", "-117.55,34.27,400"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = String::from_utf8(o.stdout).unwrap();
    assert_eq!(line.lines().count(), 1);
    let sl: Vec<&str> = line.split_whitespace().collect();
    let o = run(&["rpc", "invert", "--rpc", s(&m), "--pixel", &format!("{},{}", sl[0], sl[1]), "--height", "400"]);
    let uvz: Vec<f64> = String::from_utf8(o.stdout).unwrap().split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert!((uvz[0] + 117.55).abs() < 1e-9 && (uvz[1] - 34.27).abs() < 1e-9 && uvz[2] == 400.0);
    let o = run(&["rpc", "angle", "--rpc-a", s(&m), "--rpc-b", s(&n), "--at", "-117.55,34.27,400"]);
    let angle: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!((angle - 15.0).abs() < 0.1);
    assert_eq!(code(&run(&["rpc", "project", "--rpc", s(&m), "--point", "1,2"])), 4);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, ortho) = scene(7, 32);
    let l = write_grid(dir.path(), "l.asc", &noisy(&truth, 1.0, 1));
    let o_path = write_grid(dir.path(), "o.asc", &ortho);
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("# fusion\nlayers={}\northo={}\ngamma=0.999999\n", s(&l), s(&o_path))).unwrap();
    let a = dir.path().join("a.asc");
    let o = run(&["fuse", "--config", s(&cfg), "--out", s(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = dir.path().join("m.asc");
    assert_eq!(code(&run(&["fuse", "--config", s(&cfg), "--mode", "median", "--out", s(&m)])), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&m).unwrap());
    // the command line wins over the file
    let b = dir.path().join("b.asc");
    assert_eq!(code(&run(&["fuse", "--config", s(&cfg), "--gamma", "0.5", "--out", s(&b)])), 0);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    fs::write(&cfg, "nonsense_key=1\n").unwrap();
    assert_eq!(code(&run(&["fuse", "--config", s(&cfg), "--out", s(&b)])), 4);
}

#[test]
fn synth_writes_scene_and_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scene.txt");
    fs::write(&spec, "seed=3\nwidth=30\nheight=20\nground_height=5\nbuilding=2,3,10,10,20,220\n").unwrap();
    let out = dir.path().join("gen");
    let o = run(&["synth", "--scene", s(&spec), "--out-dir", s(&out), "--layers", "3", "--hole-prob", "0.1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let truth = read_asc(out.join("truth.asc")).unwrap();
    assert_eq!(truth.values().iter().filter(|&&v| v == 25.0).count(), 100);
    for i in 1..=3 {
        assert!(out.join(format!("layer_{i:02}.asc")).exists());
    }
    fs::write(&spec, "seed=3\nwidth=30\n").unwrap();
    assert_eq!(code(&run(&["synth", "--scene", s(&spec), "--out-dir", s(&out)])), 4);
    fs::write(&spec, "width=abc\n").unwrap();
    assert_eq!(code(&run(&["synth", "--scene", s(&spec), "--out-dir", s(&out)])), 2);
}
