use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pucopula::ranks::{read_data_csv, read_ranks_csv};
use pucopula::risk::{read_sums_csv, QuantileCurve};
use pucopula::{compute_ranks, fixtures, SparseProbTable};

fn pucopula(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pucopula")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let path = out.to_str().unwrap().to_owned();
    full.extend(["--output", &path]);
    let result = pucopula(&full);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    fs::read(out).unwrap()
}

const SAMPLE: &[&str] = &[
    "sample", "--fixture", "paper-s4", "--family", "negbinomial", "--a", "17", "--b", "22", "--shuffle", "rook",
    "--seed", "42", "--n", "5000",
];

#[test]
fn ranks_reproduce_the_fixture() {
    let out = pucopula(&["ranks", "--fixture", "paper-s4"]);
    assert!(out.status.success());
    let ranks = read_ranks_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(ranks.ranks(0), fixtures::LOSS_PAIRS_RANKS[0]);
    assert_eq!(ranks.ranks(1), fixtures::LOSS_PAIRS_RANKS[1]);
    // provenance goes to stderr when writing to stdout
    let record: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(record["command"], "ranks");
}

#[test]
fn sample_rows_are_in_the_open_square() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = run_to(dir.path(), "s.csv", SAMPLE);
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.starts_with("u1,u2\n"));
    let rows = read_data_csv(bytes.as_slice()).unwrap();
    assert_eq!(rows.len(), 5000);
    assert!(rows.iter().flatten().all(|&x| x > 0.0 && x < 1.0));

    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.csv.provenance.json")).unwrap()).unwrap();
    assert_eq!(record["seed"], 42);
    assert_eq!(record["config"]["n_sims"], 5000);
    assert_eq!(record["rows"], 5000);
}

#[test]
fn aligned_bernstein_table_has_twenty_cells() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["pij", "--fixture", "paper-s4", "--family", "bernstein", "--a", "20", "--b", "20", "--shuffle", "rook"];
    let bytes = run_to(dir.path(), "p.csv", &args);
    let table = SparseProbTable::read_csv(bytes.as_slice()).unwrap();
    assert_eq!(table.len(), 20);
    assert!(table.iter().all(|(_, p)| p == 0.05));
    let ranks = compute_ranks(&fixtures::loss_pairs()).unwrap();
    for k in 0..20 {
        assert_eq!(table.get(&[ranks.ranks(0)[k] - 1, ranks.ranks(1)[k] - 1]), 0.05);
    }
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("p.csv.provenance.json")).unwrap()).unwrap();
    assert_eq!(record["truncated_mass"], 0.0);
}

#[test]
fn reruns_are_byte_identical_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("sample", SAMPLE.to_vec()),
        (
            "var",
            vec![
                "var", "--fixture", "paper-s4", "--family", "poisson", "--a", "17", "--b", "22", "--seed", "5",
                "--n", "20000", "--tail", "0.05",
            ],
        ),
        (
            "taildep",
            vec![
                "taildep", "--fixture", "paper-s4", "--family", "negbinomial", "--a", "17", "--b", "22",
                "--shuffle", "upper", "--seed", "9", "--n", "20000", "--t", "0.95",
            ],
        ),
        (
            "density",
            vec!["density", "--fixture", "paper-s4", "--family", "bernstein", "--a", "22", "--b", "27", "--grid", "15"],
        ),
        (
            "pij",
            vec!["pij", "--fixture", "paper-s4", "--family", "poisson", "--a", "17", "--b", "22", "--shuffle", "lower"],
        ),
    ];
    for (name, args) in cases {
        let first = run_to(dir.path(), &format!("{name}-1.csv"), &args);
        let second = run_to(dir.path(), &format!("{name}-2.csv"), &args);
        assert_eq!(first, second, "{name} differs between runs");
        let p1 = fs::read(dir.path().join(format!("{name}-1.csv.provenance.json"))).unwrap();
        let p2 = fs::read(dir.path().join(format!("{name}-2.csv.provenance.json"))).unwrap();
        assert_eq!(p1.len(), p2.len());
        match name {
            "var" => {
                let curve = QuantileCurve::read_csv(first.as_slice()).unwrap();
                assert_eq!(curve.len(), 1000);
                assert!(curve.is_monotone());
            }
            "pij" => {
                let table = SparseProbTable::read_csv(first.as_slice()).unwrap();
                let mut again = Vec::new();
                table.write_csv(&mut again).unwrap();
                assert_eq!(again, first);
            }
            "density" => {
                let rows = read_data_csv(first.as_slice()).unwrap();
                assert_eq!(rows.len(), 225);
                assert!(rows.iter().all(|r| r[2] >= 0.0));
                assert_eq!(rows[0][0], 1.0 / 16.0);
            }
            _ => {
                read_data_csv(first.as_slice()).unwrap();
            }
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sums.csv");
    let sums_path = path.to_str().unwrap();
    let mut args = vec![
        "var", "--fixture", "paper-s4", "--family", "negbinomial", "--a", "17", "--b", "22", "--seed", "3", "--n",
        "40000", "--levels", "0.9,0.99", "--sums-output", sums_path,
    ];
    let single = Command::new(env!("CARGO_BIN_EXE_pucopula"))
        .args(&args)
        .env("PUCOPULA_THREADS", "1")
        .output()
        .unwrap();
    let sums_single = fs::read(&path).unwrap();
    args.extend(["--threads", "4"]);
    let multi = pucopula(&args);
    assert!(single.status.success() && multi.status.success());
    assert_eq!(single.stdout, multi.stdout);
    assert_eq!(sums_single, fs::read(&path).unwrap());
    assert_eq!(read_sums_csv(sums_single.as_slice()).unwrap().len(), 40000);
}

#[test]
fn failures_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tied = dir.path().join("tied.csv");
    fs::write(&tied, "x,y\n1,2\n1,3\n2,4\n").unwrap();
    let broken = dir.path().join("broken.csv");
    fs::write(&broken, "x,y\n1,2\n3,oops\n").unwrap();
    let three = dir.path().join("three.csv");
    fs::write(&three, "1,2,3\n2,3,1\n3,1,2\n").unwrap();

    let code = |args: &[&str]| pucopula(args).status.code().unwrap();
    assert_eq!(code(&["ranks", "--input", tied.to_str().unwrap()]), 4);
    assert_eq!(code(&["ranks", "--input", tied.to_str().unwrap(), "--allow-ties"]), 0);
    assert_eq!(code(&["ranks", "--input", broken.to_str().unwrap()]), 3);
    assert_eq!(code(&["ranks", "--input", "/nonexistent/data.csv"]), 6);
    assert_eq!(
        code(&["pij", "--input", three.to_str().unwrap(), "--family", "poisson", "--params", "3,4,5", "--shuffle", "lower"]),
        5
    );
    assert_eq!(code(&["sample", "--fixture", "paper-s4", "--family", "poisson", "--a", "3", "--b", "4"]), 2);
    assert_eq!(code(&["pij", "--fixture", "nope", "--family", "poisson", "--a", "3", "--b", "4"]), 5);
}
