use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TWO_SPHERES: &str = r#"{"bodies":[
  {"id":"s1","shape":{"type":"sphere","center":[0,0,0],"radius":1}},
  {"id":"s2","shape":{"type":"sphere","center":[3,0,0],"radius":1}}]}"#;

fn write_scene(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn chordix(args: &[&str], scene: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chordix"));
    cmd.args(&args[..1]).arg(scene).args(&args[1..]);
    cmd.env_remove("CHORDIX_THREADS");
    if let Some(t) = threads {
        cmd.env("CHORDIX_THREADS", t);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn measure_reports_union_volume() {
    let dir = TempDir::new().unwrap();
    let scene = write_scene(&dir, "s.json", TWO_SPHERES);
    let o = chordix(&["measure"], &scene, None);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["v_union"]["value"], 8.37758041);
    assert_eq!(v["bodies"][1]["id"], "s2");
    assert_eq!(v["bodies"][0]["surface"]["value"], 12.5663706);
}

#[test]
fn ball_kernel_chords_route_gives_volume_product() {
    let dir = TempDir::new().unwrap();
    let scene = write_scene(&dir, "s.json", TWO_SPHERES);
    let o = chordix(
        &[
            "transfer",
            "--pair",
            "0,1",
            "--kernel",
            "ball",
            "--route",
            "chords",
            "--samples",
            "1000000",
            "--seed",
            "7",
            "--format",
            "json",
        ],
        &scene,
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["results"][0];
    assert_eq!(r["route"], "chords");
    let (value, stderr) = (r["value"].as_f64().unwrap(), r["stderr"].as_f64().unwrap());
    let expected = (4.0 * std::f64::consts::PI / 3.0_f64).powi(2);
    assert!(
        (value - expected).abs() < 4.0 * stderr,
        "{value} ± {stderr}"
    );
    assert_eq!(v["kernel"], "ball");
}

#[test]
fn identical_commands_give_identical_bytes_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let scene = write_scene(&dir, "s.json", TWO_SPHERES);
    let args = [
        "hist",
        "--kind",
        "chords",
        "--samples",
        "100000",
        "--bins",
        "20",
    ];
    let outs: Vec<Vec<u8>> = ["1", "2", "8"]
        .iter()
        .map(|t| chordix(&args, &scene, Some(t)).stdout)
        .collect();
    assert!(!outs[0].is_empty());
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
    let targs = [
        "transfer",
        "--kernel",
        "exp:sigma=1",
        "--samples",
        "50000",
        "--format",
        "json",
    ];
    let a = chordix(&targs, &scene, Some("1")).stdout;
    let b = chordix(&targs, &scene, Some("8")).stdout;
    assert_eq!(a, b);
}

#[test]
fn hist_writes_one_file_per_pair_into_directory() {
    let dir = TempDir::new().unwrap();
    let scene = write_scene(&dir, "s.json", TWO_SPHERES);
    let out = dir.path().join("hists");
    std::fs::create_dir(&out).unwrap();
    let o = chordix(
        &[
            "hist",
            "--kind",
            "eta",
            "--samples",
            "20000",
            "--bins",
            "10",
            "--out",
            out.to_str().unwrap(),
        ],
        &scene,
        None,
    );
    assert!(o.status.success());
    let mut names: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["eta_0_0.csv", "eta_0_1.csv", "eta_1_1.csv"]);
    let text = std::fs::read_to_string(out.join("eta_0_1.csv")).unwrap();
    assert!(text.starts_with(
        "# kind=eta pair=0,1 l_max=5.25 bins=10 seed=42\nbin_left,bin_right,density,stderr\n"
    ));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn verify_passes_and_echoes_kernel() {
    let dir = TempDir::new().unwrap();
    let scene = write_scene(&dir, "s.json", TWO_SPHERES);
    let o = chordix(
        &[
            "verify",
            "--suite",
            "all",
            "--samples",
            "100000",
            "--bins",
            "50",
            "--kernel",
            "exp:sigma=1.5",
            "--format",
            "json",
        ],
        &scene,
        None,
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(v["kernel"], "exp:sigma=1.5");
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .all(|c| c["status"] == "EXACT_PASS" || c["status"] == "STAT_PASS"));
    assert!(checks
        .iter()
        .any(|c| c["identity"] == "chords-matrix-sum" && c["status"] == "EXACT_PASS"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let scene = write_scene(&dir, "s.json", TWO_SPHERES);
    let bad = write_scene(
        &dir,
        "bad.json",
        r#"{"bodies":[{"id":"a","shape":{"type":"cone"}}]}"#,
    );
    let missing = dir.path().join("missing.json");
    let cases: Vec<(Vec<&str>, &Path)> = vec![
        (vec!["transfer", "--kernel", "gauss"], &scene),
        (vec!["hist", "--kind", "eta", "--bins", "5"], &scene),
        (vec!["transfer", "--pair", "0,7"], &scene),
        (vec!["transfer", "--samples", "0"], &scene),
        (vec!["measure"], &bad),
        (vec!["measure"], &missing),
        (
            vec![
                "transfer",
                "--pair",
                "0,0",
                "--route",
                "direct",
                "--kernel",
                "exp:sigma=1",
            ],
            &scene,
        ),
    ];
    for (args, path) in cases {
        let o = chordix(&args, path, None);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
}
