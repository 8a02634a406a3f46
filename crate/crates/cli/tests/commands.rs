use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shapeforge"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CUBE: &str = "# object: box\n# category: misc\n# part_0: body\ncreate_primitive(kind=\"cube\", location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))\n";

const CHAIR: &str = "# object: chair\n# category: chair\n\
# part_0: seat\ncreate_primitive(kind=\"cube\", location=(0, 0, 0.5), rotation=(1, 0, 0, 0), scale=(0.5, 0.5, 0.05))\n\
# part_1: leg\ncreate_primitive(kind=\"cylinder\", location=(0.4, 0.4, 0.22), rotation=(1, 0, 0, 0), scale=(0.04, 0.04, 0.23))\n\
# part_2: back\ncreate_primitive(kind=\"cube\", location=(0, -0.47, 0.9), rotation=(1, 0, 0, 0), scale=(0.5, 0.03, 0.35))\n";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn generate_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = run(&["generate", "--count", "100", "--seed", "7", "--out", out], d.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let ma = fs::read(d.path().join("a/manifest.json")).unwrap();
    let mb = fs::read(d.path().join("b/manifest.json")).unwrap();
    let ja: serde_json::Value = serde_json::from_slice(&ma).unwrap();
    let jb: serde_json::Value = serde_json::from_slice(&mb).unwrap();
    assert_eq!(ja["checksum"], jb["checksum"]);
    assert_eq!(ja["count"], 100);
    assert_eq!(fs::read(d.path().join("a/config.json")).unwrap(), fs::read(d.path().join("b/config.json")).unwrap());
}

#[test]
fn negative_weight_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["generate", "--count", "10", "--weight", "primitive=-1", "--out", "x"], d.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("weight"));
    assert!(!d.path().join("x").exists());
    let cfg = write(d.path(), "cfg.json", r#"{"families": [{"family": "boolean", "weight": -1}]}"#);
    let o = run(&["generate", "--config", cfg.to_str().unwrap(), "--out", "y"], d.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "file", "x");
    let o = run(&["generate", "--count", "3", "--out", "file/sub"], d.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn generate_five_thousand_quickly() {
    let d = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let o = run(
        &["generate", "--count", "5000", "--seed", "1", "--weight", "fill_grid=0", "--out", "big"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(start.elapsed().as_secs_f64() < 60.0, "{:?}", start.elapsed());
}

#[test]
fn exec_cube_writes_eight_vertices() {
    let d = tempfile::tempdir().unwrap();
    let p = write(d.path(), "cube.sfp", CUBE);
    let o = run(&["exec", p.to_str().unwrap(), "--out", "m"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let obj = fs::read_to_string(d.path().join("m/box.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8);
    let again = run(&["exec", p.to_str().unwrap(), "--out", "m2"], d.path());
    assert_eq!(code(&again), 0);
    assert_eq!(obj, fs::read_to_string(d.path().join("m2/box.obj")).unwrap());
}

#[test]
fn vertex_count_grows_with_resolution() {
    let d = tempfile::tempdir().unwrap();
    let mut last = 0;
    for seg in [4, 8, 16, 32, 64] {
        let text = format!("# object: c\n# part_0: c\ncreate_primitive(kind=\"cylinder\", segments={seg}, location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))\n");
        let p = write(d.path(), "c.sfp", &text);
        let o = run(&["exec", p.to_str().unwrap(), "--export", "ply", "--out", "m"], d.path());
        assert_eq!(code(&o), 0);
        let bytes = fs::read(d.path().join("m/c.ply")).unwrap();
        let head = String::from_utf8_lossy(&bytes[..200]).into_owned();
        let n: usize = head
            .lines()
            .find_map(|l| l.strip_prefix("element vertex "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(n > last);
        last = n;
    }
}

#[test]
fn malformed_program_reports_line_and_column() {
    let d = tempfile::tempdir().unwrap();
    let p = write(d.path(), "bad.sfp", "# object: x\n# part_0: a\ncreate_primitive(kind=\"cube\", location=(0, 0, 0), rotation=(1, 0, 0, 0)\n");
    let o = run(&["exec", p.to_str().unwrap()], d.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.sfp:3:"), "{}", stderr(&o));
}

#[test]
fn execution_failure_names_the_part() {
    let d = tempfile::tempdir().unwrap();
    let text = "# object: o\n# part_0: a\ncreate_primitive(kind=\"cube\", location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))\n# part_1: b\nbridge_loop(loops=[create_curve(kind=\"circle\", radius=1, location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1)), create_curve(kind=\"circle\", radius=1, location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))], location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))\n";
    let p = write(d.path(), "o.sfp", text);
    let o = run(&["exec", p.to_str().unwrap()], d.path());
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("part 1"), "{}", stderr(&o));
}

fn split_chair(dir: &Path) {
    let p = write(dir, "chair.sfp", CHAIR);
    let o = run(&["exec", p.to_str().unwrap(), "--per-part", "--out", "meshes", "--assembly-dir", "parts"], dir);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_dir(dir.join("meshes")).unwrap().count(), 3);
}

#[test]
fn assemble_round_trips_split_parts() {
    let d = tempfile::tempdir().unwrap();
    split_chair(d.path());
    let o = run(&["assemble", "parts", "--out", "asm.sfp", "--strict"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["eval", "chair.sfp", "asm.sfp", "--out", "ev"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let reports: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("ev/report.json")).unwrap()).unwrap();
    let cd = reports[0]["cd"].as_f64().unwrap();
    assert!(cd <= 1e-3, "cd {cd}");
    let text = fs::read_to_string(d.path().join("asm.sfp")).unwrap();
    assert!(text.find("# part_0: leg").is_some(), "{text}");
}

#[test]
fn rejected_parts_in_strict_and_lenient_modes() {
    let d = tempfile::tempdir().unwrap();
    split_chair(d.path());
    let code_file = d.path().join("parts/part_02.code");
    let orig = fs::read_to_string(&code_file).unwrap();
    fs::write(&code_file, orig.replace("kind=\"cube\"", "kind=\"uv_sphere\"")).unwrap();
    let o = run(&["assemble", "parts", "--out", "strict.sfp", "--strict"], d.path());
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("back"), "{}", stderr(&o));
    let report = fs::read_to_string(d.path().join("strict.sfp.report.json")).unwrap();
    assert!(report.contains("\"back\""));
    assert!(!d.path().join("strict.sfp").exists());

    let o = run(&["assemble", "parts", "--out", "lenient.sfp"], d.path());
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("rejected part 2 (back)"));
    let text = fs::read_to_string(d.path().join("lenient.sfp")).unwrap();
    assert_eq!(text.matches("# part_").count(), 2);
    assert!(!text.contains("back"));
}

#[test]
fn batch_eval_writes_rows_and_aggregates() {
    let d = tempfile::tempdir().unwrap();
    let mut items = Vec::new();
    for i in 0..50 {
        let s = 0.5 + i as f64 * 0.01;
        let text = format!("# object: box{i}\n# category: {}\n# part_0: body\ncreate_primitive(kind=\"cube\", location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=({s}, 1, 1))\n", if i % 2 == 0 { "even" } else { "odd" });
        write(d.path(), &format!("p{i}.sfp"), &text);
        items.push(serde_json::json!({"gt": format!("p{i}.sfp"), "pred": format!("p{i}.sfp")}));
    }
    fs::write(d.path().join("batch.json"), serde_json::to_string(&items).unwrap()).unwrap();
    let o = run(&["eval", "--batch", "batch.json", "--out", "ev"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("ev/report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 50 + 6);
    assert!(lines.iter().any(|l| l.starts_with("even,mean,")));
    assert!(lines.iter().any(|l| l.starts_with("all,std,")));
}

#[test]
fn eval_errors_and_failed_predictions() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "cube.sfp", CUBE);
    let o = run(&["eval", "missing.obj", "cube.sfp"], d.path());
    assert_eq!(code(&o), 3);
    write(d.path(), "broken.sfp", "# object: b\n# part_0: a\nnot_a_call(\n");
    let o = run(&["eval", "cube.sfp", "broken.sfp", "--out", "ev"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("ev/report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",failed,"));
}

#[test]
fn export_writes_a_point_cloud_with_provenance() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "chair.sfp", CHAIR);
    let o = run(&["export", "chair.sfp", "--out", "pc.ply", "--points", "1000", "--seed", "3", "--normalize"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bytes = fs::read(d.path().join("pc.ply")).unwrap();
    let head = String::from_utf8_lossy(&bytes[..400]).into_owned();
    assert!(head.contains("element vertex 1000"));
    assert!(head.contains("comment seed 3"));
    assert!(head.contains("comment transform"));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let d = tempfile::tempdir().unwrap();
    let one = bin()
        .args(["generate", "--count", "60", "--seed", "2", "--out", "t1"])
        .env("SHAPEFORGE_THREADS", "1")
        .current_dir(d.path())
        .output()
        .unwrap();
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    let many = run(&["--threads", "4", "generate", "--count", "60", "--seed", "2", "--out", "t4"], d.path());
    assert_eq!(code(&many), 0, "{}", stderr(&many));
    for f in ["manifest.json", "parts-train-0000.jsonl", "config.json"] {
        let a = fs::read(d.path().join("t1").join(f)).unwrap();
        let b = fs::read(d.path().join("t4").join(f)).unwrap();
        if f == "manifest.json" {
            let ja: serde_json::Value = serde_json::from_slice(&a).unwrap();
            let jb: serde_json::Value = serde_json::from_slice(&b).unwrap();
            assert_eq!(ja["checksum"], jb["checksum"]);
        } else {
            assert_eq!(a, b, "{f}");
        }
    }
}
