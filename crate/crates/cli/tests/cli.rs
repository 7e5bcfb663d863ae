use std::path::Path;
use std::process::{Command, Output};

fn drstack(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drstack"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn value_of(path: &Path) -> f64 {
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    doc["value"].as_f64().unwrap()
}

#[test]
fn gen_solve_and_algorithm1_agree_on_a_finite_universe() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&drstack(
        d,
        &[
            "gen", "--family", "synthetic", "--param", "n=3", "--param", "m=2", "--param", "k=3", "--seed", "5",
            "--out", "game.json", "--nominal", "nominal.json",
        ],
    ));
    let game: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("game.json")).unwrap()).unwrap();
    assert_eq!(game["n"], 3);
    assert_eq!(game["follower"]["kind"], "finite");

    std::fs::write(
        d.join("ball.toml"),
        "game = \"game.json\"\n[ambiguity]\nkind = \"wasserstein\"\nnominal = \"nominal.json\"\ntheta = 0.2\n",
    )
    .unwrap();
    ok(&drstack(d, &["solve", "--config", "ball.toml", "--out", "mip.json", "--dump-lp", "lp"]));
    ok(&drstack(
        d,
        &["wasserstein", "--config", "ball.toml", "--out", "a1.json", "--dump-iters", "iters.csv", "--sequential"],
    ));
    assert!((value_of(&d.join("mip.json")) - value_of(&d.join("a1.json"))).abs() < 1e-6);

    let iters = std::fs::read_to_string(d.join("iters.csv")).unwrap();
    assert_eq!(iters.lines().next().unwrap(), "tau,master_objective,lambda,E_size,Gamma,wall_time_s");
    let milps: Vec<_> = std::fs::read_dir(d.join("lp"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("milp_"))
        .collect();
    assert_eq!(milps.len(), 1);
    let text = std::fs::read_to_string(&milps[0]).unwrap();
    assert!(text.starts_with("Minimize") && text.contains("Binaries") && text.trim_end().ends_with("End"));
}

#[test]
fn polytope_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&drstack(d, &["gen", "--family", "cournot", "--param", "n=3", "--param", "k=3", "--seed", "1", "--out", "g.json"]));
    for method in ["mip", "enumeration"] {
        std::fs::write(
            d.join(format!("{method}.toml")),
            format!(
                "game = \"g.json\"\nmethod = \"{method}\"\n[ambiguity]\nkind = \"polytope\"\nsupport = [0, 1, 2]\nA = [[1.0, 0.0, 0.0]]\nb = [0.5]\n"
            ),
        )
        .unwrap();
        ok(&drstack(d, &["solve", "--config", &format!("{method}.toml"), "--out", &format!("{method}.json")]));
    }
    assert!((value_of(&d.join("mip.json")) - value_of(&d.join("enumeration.json"))).abs() < 1e-6);
}

#[test]
fn sweep_writes_csv_json_summary_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("sweep.toml"),
        r#"
family = "synthetic"
method = ["dr_mip_finite", "bayesian"]
reps = 2
time_limit_s = 30
[params]
n = 3
m = 2
[sweep]
var = "k"
values = [1, 2]
"#,
    )
    .unwrap();
    ok(&drstack(
        d,
        &["sweep", "--config", "sweep.toml", "--out", "r.csv", "--summary", "s.csv", "--plot", "p.svg"],
    ));
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,method,sweep_var,sweep_value,seed,status,objective,wall_time_s,iterations"
    );
    assert_eq!(lines.count(), 8);
    assert!(std::fs::read_to_string(d.join("p.svg")).unwrap().contains("<svg"));
    assert_eq!(std::fs::read_to_string(d.join("s.csv")).unwrap().lines().count(), 5);

    ok(&drstack(d, &["sweep", "--config", "sweep.toml", "--out", "r.out", "--format", "json", "--seed", "7"]));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.out")).unwrap()).unwrap();
    let records = json.as_array().unwrap();
    assert_eq!(records.len(), 8);
    assert_eq!(records[0]["seed"], 7);
    assert_eq!(records[0]["status"], "ok");
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = drstack(d, &["sweep", "--preset", "nope", "--out", "x.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig2a"));
    let out = drstack(d, &["gen", "--family", "inspection", "--param", "z=1"]);
    assert!(!out.status.success());
    let out = drstack(d, &["solve", "--config", "missing.toml"]);
    assert!(!out.status.success());
}
