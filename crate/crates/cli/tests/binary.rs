use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SPIRAL: &str = "experiment = spiral\n[map]\ncoefficients = 0, 0.9, 1\nradius = 0.3\n[spiral]\nr = 0.2\n";

fn buffdyn(args: &[&str], env_threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_buffdyn"));
    cmd.args(args).env_remove("BUFFDYN_THREADS");
    if let Some(t) = env_threads {
        cmd.env("BUFFDYN_THREADS", t);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn pass_exits_zero_and_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.conf", SPIRAL);
    let out = tmp.path().join("out");
    let o = buffdyn(&["spiral", &cfg, "--out-dir", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS translation audit"));
    let names: Vec<String> = files(&out).into_iter().map(|f| f.0).collect();
    assert_eq!(names, ["spiral.json", "spiral_lift.csv", "spiral_spiral.svg"]);
    let csv = fs::read_to_string(out.join("spiral_lift.csv")).unwrap();
    assert!(csv.starts_with("t_index,base_re,base_im,z_re,z_im\r\n"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("spiral.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["experiment"], "spiral");
    assert_eq!(json["inputs"]["spiral"]["r"], "0.2");
}

#[test]
fn quantitative_failure_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.conf", &format!("{SPIRAL}tolerance = 1e-300\n"));
    let o = buffdyn(&["run", &cfg, "--out-dir", tmp.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL translation audit"));
    assert!(tmp.path().join("o/spiral.json").exists());
}

#[test]
fn errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();
    let missing = buffdyn(&["run", "/nonexistent/x.conf", "--out-dir", out], None);
    assert_eq!(missing.status.code(), Some(1));
    let typo = write(tmp.path(), "t.conf", &SPIRAL.replace("r = 0.2", "rr = 0.2"));
    let o = buffdyn(&["run", &typo, "--out-dir", out], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing key [spiral] r"));
    let wrong_kind = write(tmp.path(), "k.conf", SPIRAL);
    assert_eq!(buffdyn(&["portrait", &wrong_kind, "--out-dir", out], None).status.code(), Some(1));
    let pole = write(tmp.path(), "p.conf", &SPIRAL.replace("r = 0.2", "r = 0.1"));
    let o = buffdyn(&["run", &pole, "--out-dir", out], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lift circle"));
    assert_eq!(buffdyn(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(buffdyn(&["run", &pole, "--threads", "0"], None).status.code(), Some(1));
    assert_eq!(buffdyn(&["run", &pole], Some("many")).status.code(), Some(1));
    assert_eq!(buffdyn(&["--help"], None).status.code(), Some(0));
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "g.conf",
        "experiment = gate\n[map]\ncoefficients = 0.25, 0, 1\nradius = 1e6\n[rays]\nshift = 1\ns = 0.05, 0.1, 0.2\nt_min = -256\n[gate]\ncenter = 0.5\nradius = 0.2\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert_eq!(buffdyn(&["run", &cfg, "--out-dir", a.to_str().unwrap(), "--threads", "1"], None).status.code(), Some(0));
    assert_eq!(buffdyn(&["run", &cfg, "--out-dir", b.to_str().unwrap(), "--threads", "4"], None).status.code(), Some(0));
    assert_eq!(buffdyn(&["run", &cfg, "--out-dir", c.to_str().unwrap()], Some("3")).status.code(), Some(0));
    let fa = files(&a);
    assert!(fa.len() >= 5);
    assert_eq!(fa, files(&b));
    assert_eq!(fa, files(&c));
}

#[test]
fn out_dir_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("from_config");
    let cfg = write(tmp.path(), "s.conf", &format!("name = lifted\nout_dir = {}\n{SPIRAL}", dir.display()));
    assert_eq!(buffdyn(&["run", &cfg], None).status.code(), Some(0));
    assert!(dir.join("lifted.json").exists());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        text.parse::<buffdyn::ExperimentConfig>().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 8);
}
