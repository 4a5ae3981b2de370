use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

/// Runs `line`, split on whitespace, in `dir`.
fn tireplan(line: &str, dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tireplan"))
        .args(line.split_whitespace())
        .current_dir(dir)
        .env_remove("TIREPLAN_SOLVER_PROFILE")
        .output()
        .expect("binary runs")
}

fn ok(line: &str, dir: &Path) -> String {
    let out = tireplan(line, dir);
    assert!(
        out.status.success(),
        "{line} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn generate_solve_validate_and_report() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok("generate --seed 3 --scale tiny --out inst.json", d);
    ok("generate --seed 3 --scale tiny --out again.json", d);
    assert_eq!(read(d, "inst.json"), read(d, "again.json"));

    for (mode, out) in [("matheuristic", "mh"), ("integrated", "int")] {
        let summary = ok(
            &format!("solve --mode {mode} --instance inst.json --time-limits 30,30 --out {out}"),
            d,
        );
        assert!(summary.starts_with("OF="), "{summary}");
        for f in ["plan.json", "manifest.json", "kpi.csv"] {
            assert!(d.join(out).join(f).exists(), "{out}/{f}");
        }
        let summary = ok(
            &format!("validate --instance inst.json --plan {out}/plan.json"),
            d,
        );
        assert!(summary.starts_with("feasible"), "{summary}");
        ok(
            &format!("kpi --instance inst.json --plan {out}/plan.json --out {out}/again.csv"),
            d,
        );
        assert_eq!(
            read(d, &format!("{out}/again.csv")),
            read(d, &format!("{out}/kpi.csv"))
        );
    }

    ok("compare --a int/kpi.csv --b mh/kpi.csv --out gaps.csv", d);
    let gaps = read(d, "gaps.csv");
    let rows: Vec<&str> = gaps.lines().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(rows[0], "dataset");
    assert_eq!(&rows[rows.len() - 4..], ["mean", "std_dev", "min", "max"]);
    assert!(gaps.lines().next().unwrap().ends_with("BT,OS,US,OF"));
}

#[test]
fn solving_twice_gives_the_same_plan() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok("generate --seed 8 --scale tiny --out inst.json", d);
    for out in ["a", "b"] {
        ok(
            &format!("solve --instance inst.json --time-limits 30 --out {out}"),
            d,
        );
    }
    assert_eq!(read(d, "a/plan.json"), read(d, "b/plan.json"));
    assert_eq!(read(d, "a/kpi.csv"), read(d, "b/kpi.csv"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("broken.json"), "{ not json").unwrap();
    for line in [
        "solve --instance broken.json --out o",
        "solve --instance missing.json --out o",
        "generate --scale broken.json --out i.json",
        "solve --time-limits -1 --instance x --out o",
        "frobnicate",
    ] {
        assert_eq!(tireplan(line, d).status.code(), Some(2), "{line}");
    }
}

#[test]
fn infeasible_plan_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok("generate --seed 5 --scale tiny --out inst.json", d);
    ok("solve --instance inst.json --time-limits 30 --out o", d);
    let mut plan: serde_json::Value = serde_json::from_str(&read(d, "o/plan.json")).unwrap();
    plan["inventory"][0][0] = serde_json::json!(plan["inventory"][0][0].as_u64().unwrap() + 1);
    std::fs::write(d.join("bad.json"), plan.to_string()).unwrap();
    let out = tireplan("validate --instance inst.json --plan bad.json", d);
    assert_eq!(out.status.code(), Some(3));
    let violations = read(d, "bad.violations.csv");
    assert!(violations.lines().count() > 1, "{violations}");
}

#[test]
fn solver_failure_exits_with_four() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok("generate --seed 5 --scale tiny --out inst.json", d);
    let out = Command::new(env!("CARGO_BIN_EXE_tireplan"))
        .args("solve --mode integrated --instance inst.json --out o".split_whitespace())
        .current_dir(d)
        .env("TIREPLAN_SOLVER_PROFILE", d.join("no-such-profile.json"))
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(4), "{stderr}");
}
