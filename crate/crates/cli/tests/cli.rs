use std::path::PathBuf;
use std::process::{Command, Output};

fn geomint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geomint")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("geomint-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn list_prints_the_registry() {
    let o = geomint(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["rigid_body_sphere", "rigid_body_liepoisson", "toda_isospectral", "heat_semilinear", "isotropy_demo", "cf4", "dg_gonzalez"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn orderconds_reports() {
    let o = geomint(&["orderconds", "--scheme", "cf4", "--order", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("PASS: 22 conditions satisfied"), "{text}");
    assert!(text.contains("1+1+3+8 = 13"));

    let text = stdout(&geomint(&["orderconds", "--scheme", "cg3", "--order", "3"]));
    assert!(text.contains("PASS"));
    let text = stdout(&geomint(&["orderconds", "--scheme", "lie-euler", "--order", "2"]));
    assert!(text.contains("FAIL: 1 of 3"));
    let text = stdout(&geomint(&["orderconds", "--scheme", "rk4-classical", "--order", "2"]));
    assert!(text.contains("PASS"));
}

#[test]
fn trees_lists_catalan_many() {
    let o = geomint(&["trees", "--max-order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("grade 3 (4 nodes): 5 trees"));
    assert!(text.contains("aabaabbb  alpha=2"));
    assert!(text.contains("aaabbabb  alpha=1"));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["frobnicate"],
        vec!["orderconds", "--scheme", "cf4"],
        vec!["orderconds", "--scheme", "rk99", "--order", "2"],
        vec!["converge", "--problem", "kepler"],
        vec!["converge", "--h", "0.1,0.05"],
        vec!["drift", "--set", "colour=red"],
        vec!["trees", "--max-order", "12"],
    ] {
        let o = geomint(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(geomint(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_with_two() {
    // The step exceeds the exponential's injectivity radius.
    let o = geomint(&["integrate", "--problem", "rigid_body_liepoisson", "--method", "variational", "--h", "10", "--t-end", "10"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn converge_writes_a_monotone_csv() {
    let o = geomint(&["converge", "--problem", "rigid_body_sphere", "--method", "cf4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 5);
    let errors: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
    let last: f64 = rows[4][3].parse().unwrap();
    assert!((3.8..=4.2).contains(&last));
}

#[test]
fn runs_are_byte_identical() {
    let args = ["drift", "--problem", "toda_isospectral", "--method", "cf4", "--h", "0.01", "--t-end", "1"];
    let a = geomint(&args);
    let b = geomint(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_and_output_path() {
    let cfg = scratch("drift.cfg");
    let out = scratch("drift.csv");
    std::fs::write(&cfg, "# rigid body\nproblem = rigid_body_sphere\nmethod = dg_gonzalez\nh = 0.05\nt_end = 5\n").unwrap();
    let o = geomint(&["drift", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,H,norm,iterations");
    assert_eq!(text.lines().count(), 1 + 101 + 1);
    let summary: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(summary[0], "max_drift");
    assert!(summary[1].parse::<f64>().unwrap() <= 1e-12);

    // Flags override the file.
    let o = geomint(&["drift", "--config", cfg.to_str().unwrap(), "--method", "lie_euler"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let summary: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert!(summary[1].parse::<f64>().unwrap() > 1e-6);
}

#[test]
fn symplectic_check_defaults() {
    let o = geomint(&["symplectic-check"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let defects: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(defects.len(), 3);
    assert!(defects.iter().all(|d| *d <= 1e-6));
}

#[test]
fn integrate_heat_with_lie_euler() {
    let o = geomint(&["integrate", "--problem", "heat_semilinear", "--method", "lie_euler", "--h", "0.001", "--t-end", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().next().unwrap().starts_with("t,x0,x1"));
}
