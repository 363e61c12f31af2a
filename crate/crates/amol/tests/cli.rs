use std::path::Path;
use std::process::{Command, Output};

fn amol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amol"))
        .args(args)
        .env("AMOL_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn frame_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("frame.json");
    let o = amol(&[
        "frame",
        "check",
        "--n",
        "64",
        "--scales",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&out);
    assert!(r["tight"]["max_dev"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["config"]["n"], 64);
    assert_eq!(
        amol(&["frame", "check", "--n", "63"]).status.code(),
        Some(2)
    );
    assert_eq!(
        amol(&["frame", "check", "--n", "64", "--scales", "9"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(amol(&["frame", "check", "--bogus"]).status.code(), Some(2));
}

#[test]
fn gramian_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = [
        "gramian",
        "--n",
        "16",
        "--scales",
        "1",
        "--pairs",
        "54",
        "--seed",
        "3",
        "--omega-min",
        "1",
    ];
    let run = |p: &Path| amol(&[&base[..], &["--out", p.to_str().unwrap()]].concat());
    let ca = run(&a).status.code();
    let cb = run(&b).status.code();
    assert_eq!(ca, cb);
    assert!(matches!(ca, Some(0) | Some(1)));
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    assert!(String::from_utf8(text)
        .unwrap()
        .starts_with("a_eps,a_j,a_l1,a_l2,a_k1,a_k2,a_k3,b_eps"));
    let fit = json(&a.with_extension("json"));
    assert!(fit["fit"]["slope"].is_number());
    assert_eq!(fit["pairs"], 54);
}

#[test]
fn gramian_usage_and_io_errors() {
    assert_eq!(
        amol(&["gramian", "--pairs", "0", "--out", "x.csv"])
            .status
            .code(),
        Some(2)
    );
    let o = amol(&[
        "gramian",
        "--n",
        "16",
        "--scales",
        "1",
        "--pairs",
        "5",
        "--out",
        "/nonexistent/dir/g.csv",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn consistency_converges_for_k4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = amol(&[
        "consistency",
        "--alpha",
        "0.5",
        "--k",
        "4",
        "--jmax",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let r = json(&out);
    assert_eq!(r["report"]["converged"], true, "{r}");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(r["levels"].as_array().unwrap().len(), 4);
}

#[test]
fn consistency_flags_k1() {
    let o = amol(&["consistency", "--k", "1", "--jmin", "0", "--jmax", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["report"]["converged"], false);
}

#[test]
fn phantom_feasibility_and_determinism() {
    assert_eq!(
        amol(&["phantom", "--dim", "3", "--nu", "1"]).status.code(),
        Some(2)
    );
    let a = amol(&["phantom", "--dim", "3", "--nu", "10", "--seed", "4"]);
    let b = amol(&["phantom", "--dim", "3", "--nu", "10", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let vol = dir.path().join("p.json");
    let o = amol(&[
        "phantom",
        "--nu",
        "10",
        "--n",
        "16",
        "--volume",
        vol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = amol::io::read_volume(&vol).unwrap();
    assert_eq!(v.dims, [16; 3]);
    assert!(v.max_abs() <= 2.0);
}

#[test]
fn approx_err2_column_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let o = amol(&[
        "approx",
        "--nterms",
        "100,1000,10000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = amol::io::read_rates(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        vec![100, 1000, 10000]
    );
    assert!(rows.windows(2).all(|p| p[1].err2 <= p[0].err2));
    assert!(rows.iter().all(|r| r.err2 <= r.tail2 * (1.0 + 1e-8)));
    let report = json(&out.with_extension("json"));
    assert_eq!(report["phantom"]["seed"], 0);
    assert_eq!(
        amol(&["approx", "--nterms", "1000,100"]).status.code(),
        Some(2)
    );
}

#[test]
fn approx_reads_a_volume_file() {
    let dir = tempfile::tempdir().unwrap();
    let vol = dir.path().join("v.json");
    assert_eq!(
        amol(&[
            "phantom",
            "--nu",
            "8",
            "--n",
            "16",
            "--volume",
            vol.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let o = amol(&[
        "approx",
        "--n",
        "16",
        "--scales",
        "1",
        "--nterms",
        "10,100",
        "--input",
        vol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .starts_with("N,err2,tail2\n10,"));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        amol(&["approx", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}
