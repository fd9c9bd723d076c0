use std::path::Path;
use std::process::{Command, Output};

use isoconf::density::{Dataset, DensityEstimator};
use isoconf::kernel::KernelSpec;
use isoconf::models::TrueModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn isoconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoconf")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_case1_points(path: &Path, n: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = TrueModel::Elliptic { a: 1.0 }.sample(n, &mut rng).unwrap();
    let mut text = String::from("x,y\n");
    for i in 0..n {
        let p = data.point(i);
        text.push_str(&format!("{:?},{:?}\n", p[0], p[1]));
    }
    std::fs::write(path, text).unwrap();
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn constants_subcommand() {
    let out = isoconf(&["constants", "--kernel", "sim2d"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let get = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("{name},"))).unwrap();
        line.split(',').nth(1).unwrap().parse().unwrap()
    };
    assert!(text.starts_with("name,value\n"));
    assert!((get("integral") - 1.0).abs() < 1e-12);
    assert!((get("mu2") - 1.0 / 13.0).abs() < 1e-12);
    assert_eq!(code(&isoconf(&["constants", "--kernel", "gauss7d"])), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&isoconf(&[])), 1);
    assert_eq!(
        code(&isoconf(&[
            "simulate",
            "--config",
            "x.toml",
            "--out",
            "y.csv",
            "--frobnicate"
        ])),
        1
    );
    assert_eq!(code(&isoconf(&["nonsense"])), 1);
    assert_eq!(code(&isoconf(&["--help"])), 0);
}

#[test]
fn region_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pts.csv");
    write_case1_points(&data, 500);
    let prefix = dir.path().join("ve");
    let base = [
        "region",
        "--data",
        path_str(&data),
        "--prob",
        "0.5",
        "--case",
        "elliptic:1",
    ];

    let mut args = base.to_vec();
    args.extend([
        "--method",
        "V.e",
        "--alpha",
        "0.1",
        "--replications",
        "60",
        "--out",
        path_str(&prefix),
    ]);
    let out = isoconf(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "V.e");
    let quantile: f64 = row[2].parse().unwrap();
    assert!(quantile > 0.0 && quantile < 0.08);
    let region = std::fs::read_to_string(dir.path().join("ve_region.csv")).unwrap();
    assert!(region.lines().skip(1).any(|l| l.ends_with(",1")));
    assert!(std::fs::read_to_string(dir.path().join("ve_contour.csv"))
        .unwrap()
        .starts_with("curve,x,y\n"));
    assert!(std::fs::read_to_string(dir.path().join("ve.svg"))
        .unwrap()
        .starts_with("<svg"));

    let mut args = base.to_vec();
    args.extend(["--method", "V.e", "--alpha", "1.5", "--out", path_str(&prefix)]);
    assert_eq!(code(&isoconf(&args)), 1);

    let mut args = base.to_vec();
    args.extend(["--method", "V.ls", "--out", path_str(&prefix)]);
    let out = isoconf(&args);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("must be below 1"));

    let mut args = base.to_vec();
    args.extend(["--method", "V.xx", "--out", path_str(&prefix)]);
    assert_eq!(code(&isoconf(&args)), 1);
}

#[test]
fn kde_eval_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pts.csv");
    write_case1_points(&data, 300);
    let points = dir.path().join("eval.csv");
    std::fs::write(&points, "x,y\n0.1,0.2\n-0.7,1.1\n50,50\n").unwrap();
    let out = isoconf(&[
        "kde-eval",
        "--data",
        path_str(&data),
        "--h",
        "0.8",
        "--points",
        path_str(&points),
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();

    let parsed = isoconf::io::read_rows_path(&data).unwrap();
    let ds = std::sync::Arc::new(Dataset::from_rows(&parsed).unwrap());
    let est = DensityEstimator::plain(ds, &KernelSpec::simulation(2).unwrap(), &[0.8, 0.8]).unwrap();
    for r in &rows {
        assert!((r[2] - est.eval(&r[..2]).unwrap()).abs() <= 1e-15);
    }
    assert_eq!(rows[2][2], 0.0);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\n3,oops\n").unwrap();
    assert_eq!(
        code(&isoconf(&[
            "kde-eval",
            "--data",
            path_str(&bad),
            "--h",
            "0.8",
            "--points",
            path_str(&points)
        ])),
        3
    );
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        code(&isoconf(&[
            "kde-eval",
            "--data",
            path_str(&missing),
            "--h",
            "0.8",
            "--points",
            path_str(&points)
        ])),
        3
    );
}

#[test]
fn simulate_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("smoke.toml");
    std::fs::write(
        &config,
        "case = \"case1\"\nn = 200\nruns = 2\nreplications = 25\nmethods = [\"V.e\", \"H\"]\nseed = 3\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let svg = dir.path().join("svg");
    let run = |out: &Path, extra: &[&str]| {
        let mut args = vec![
            "simulate",
            "--config",
            path_str(&config),
            "--out",
            path_str(out),
            "--seed",
            "11",
        ];
        args.extend(extra);
        code(&isoconf(&args))
    };
    assert_eq!(run(&a, &["--svg", path_str(&svg)]), 0);
    assert_eq!(run(&b, &["--threads", "2"]), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read_dir(&svg).unwrap().count(), 2);

    let missing = dir.path().join("none.toml");
    assert_eq!(
        code(&isoconf(&[
            "simulate",
            "--config",
            path_str(&missing),
            "--out",
            path_str(&a)
        ])),
        3
    );
    std::fs::write(
        &config,
        "case = \"case9\"\nn = 200\nruns = 2\nreplications = 25\nmethods = []\n",
    )
    .unwrap();
    assert_eq!(
        code(&isoconf(&[
            "simulate",
            "--config",
            path_str(&config),
            "--out",
            path_str(&a)
        ])),
        1
    );
}
