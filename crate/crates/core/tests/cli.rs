use std::path::PathBuf;
use std::process::{Command, Output};

const HEADER: &str = "scheme,noise,parameter,fidelity_sim,fidelity_closed,abs_err";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decoy-noise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn check_golden(name: &str, args: &[&str]) {
    let out = bin(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(
        out.stdout == golden(name),
        "{name} differs from `decoy-noise {}`",
        args.join(" ")
    );
}

#[test]
fn figure_curves_match_golden_files() {
    check_golden(
        "fig1_ad.csv",
        &["sweep", "--noise", "ad", "--schemes", "bb84,psi+,phi+,cluster", "--grid", "101"],
    );
    check_golden(
        "fig2_pd.csv",
        &["sweep", "--noise", "pd", "--schemes", "bb84,psi+,psi-,phi+,phi-,cluster", "--grid", "101"],
    );
    check_golden(
        "fig3_cd.csv",
        &["sweep", "--noise", "cd", "--schemes", "bb84,psi+,cluster,phi+,w3", "--grid", "101"],
    );
    check_golden(
        "fig4_cr.csv",
        &["sweep", "--noise", "cr", "--schemes", "bb84,psi-,cluster,psi+", "--grid", "101"],
    );
}

#[test]
fn golden_rows_are_within_tolerance() {
    for name in ["fig1_ad.csv", "fig2_pd.csv", "fig3_cd.csv", "fig4_cr.csv"] {
        let text = String::from_utf8(golden(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(HEADER));
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 6, "{line}");
            let sim: f64 = fields[3].parse().unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&sim), "{line}");
            if !fields[5].is_empty() {
                let err: f64 = fields[5].parse().unwrap();
                assert!(err < 1e-12, "{line}");
            }
        }
    }
}

#[test]
fn out_flag_writes_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = ["sweep", "--noise", "cr", "--schemes", "phi-,w3", "--grid", "7"];
    let to_stdout = bin(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let to_file = bin(&with_out);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn diagnostics_never_reach_stdout() {
    let out = bin(&["sweep", "--noise", "ad", "--schemes", "psi+", "--grid", "3"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l == HEADER || l.starts_with("psi+,ad,")));
    assert!(!out.stderr.is_empty());
}

#[test]
fn exit_codes() {
    let bad_grid = bin(&["sweep", "--noise", "ad", "--schemes", "psi+", "--grid", "1"]);
    assert_eq!(bad_grid.status.code(), Some(1));
    assert!(bad_grid.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad_grid.stderr).contains("grid must be ≥ 2"));

    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["verify-table", "--grid", "1"]).status.code(), Some(1));
    assert_eq!(bin(&["eve-sim", "--method", "mc"]).status.code(), Some(1));

    let verify = bin(&["verify-table", "--grid", "5"]);
    assert_eq!(verify.status.code(), Some(0));
    let lines = String::from_utf8(verify.stdout).unwrap();
    assert_eq!(lines.lines().count(), 1 + 24);

    let mutated = bin(&["verify-table", "--grid", "5", "--perturb", "-1e-6"]);
    assert_eq!(mutated.status.code(), Some(2));
}

#[test]
fn verify_table_csv_mode_uses_sweep_schema() {
    let out = bin(&["verify-table", "--grid", "3", "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some(HEADER));
    assert_eq!(text.lines().count(), 1 + 24 * 3);
}

#[test]
fn seeded_monte_carlo_is_reproducible() {
    let args = ["eve-sim", "--method", "mc", "--seed", "42", "--trials", "20000"];
    let a = bin(&args);
    let b = bin(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = bin(&["eve-sim", "--method", "mc", "--seed", "43", "--trials", "20000"]);
    assert_ne!(a.stdout, c.stdout);
}
