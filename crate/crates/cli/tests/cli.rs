use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quantbound"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CANTOR: &str = r#"
seed = 3
[space]
type = "cantor"
[params]
n_list = "1..64"
"#;

#[test]
fn cantor_bounds_with_exact_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CANTOR);
    let o = run(&["bounds"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "space_id,n,L_n,U_n,V_n,scaled_L,scaled_U,scaled_V,pass");
    assert_eq!(lines.len(), 65);
    let second: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(second[1], "2");
    assert!((second[4].parse::<f64>().unwrap() - 1.0 / 72.0).abs() < 1e-15);
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[space]\ntype = \"interval\"\n[params]\nn_list = [1]\n");
    let o = run(&["bounds"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"));
    // the flag supplies it
    let o = run(&["bounds", "--seed", "5"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn unknown_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 1\n[space]\ntype = \"torus\"\n");
    let o = run(&["bounds"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("torus"), "{}", stderr(&o));
    let cfg = write(dir.path(), "t.toml", "seed = 1\ntask = \"launch\"\n[space]\ntype = \"interval\"\n");
    let o = run(&["bounds"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("launch"), "{}", stderr(&o));
    let cfg = write(dir.path(), "m.toml", "seed = 1\ntask = \"quantize\"\n[space]\ntype = \"interval\"\n");
    let o = run(&["bounds"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("task"));
    let o = bin().args(["bounds", "--no-such-flag"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // a subregularity constant far too small for the Cantor set
    let cfg = write(
        dir.path(),
        "v.toml",
        r#"
seed = 4
[space]
type = "selfsimilar"
c_sub = 0.1
[[space.maps]]
kappa = 0.3333333333333333
shift = [0.0]
[[space.maps]]
kappa = 0.3333333333333333
shift = [0.6666666666666666]
[params]
radii = [0.1, 0.3]
samples = 20000
"#,
    );
    let o = run(&["volume-check"], &cfg);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("false"));
}

#[test]
fn reruns_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.toml",
        r#"
seed = 11
[space]
type = "sphere"
d = 3
[params]
n_list = [1, 2, 4, 8]
budget = 40000
"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o = run(&["quantize", "--workers", "1", "--out", a.to_str().unwrap()], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["quantize", "--workers", "4", "--out", b.to_str().unwrap()], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert!(String::from_utf8(a)
        .unwrap()
        .starts_with("space_id,n,L_n,U_n,v_hat,v_ci,scaled_L,scaled_U,scaled_v,pass\n"));
}

#[test]
fn json_output_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.json",
        r#"{"seed": 2, "space": {"type": "sphere", "d": 3}, "distribution": {"type": "vmf", "kappa": 2.0},
            "params": {"d_grid": [1e-6, 1e-2]}}"#,
    );
    let out = dir.path().join("r.json.out");
    let o = run(&["rd-lower", "--format", "json", "--out", out.to_str().unwrap()], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 2);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    // the offset from h + F vanishes as D → 0
    let off = |i: usize| rows[i]["offset"].as_f64().unwrap().abs();
    assert!(off(0) < 1e-3 && off(0) < off(1));
}

#[test]
fn shipped_examples_parse_and_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let task = text
            .lines()
            .find_map(|l| {
                let l = l.trim().trim_end_matches(',');
                let rest = l.strip_prefix("task").or_else(|| l.strip_prefix("\"task\""))?;
                Some(rest.trim_start_matches([' ', '=', ':']).trim().trim_matches('"').to_string())
            })
            .expect("example declares its task");
        let o = bin().arg(&task).arg("--config").arg(&path).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
        count += 1;
    }
    assert!(count >= 10);
}
