use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use shor_afs_cli::config::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shor-afs"))
}

fn run(args: &[&str], out: &Path) -> Output {
    let o = bin().args(args).arg("--out").arg(out).output().expect("spawn");
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn csv_rows(path: &Path) -> (String, Vec<csv::StringRecord>) {
    let text = std::fs::read_to_string(path).unwrap();
    let (schema, body) = text.split_once('\n').unwrap();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    (schema.to_string(), rdr.records().map(Result::unwrap).collect())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_config_round_trips_bit_stable() {
    let cfg = RunConfig::default();
    assert_eq!(cfg.circuit.modulus, 21);
    assert_eq!(cfg.circuit.base, 2);
    let layout = cfg.circuit.layout().unwrap();
    assert_eq!((layout.l1(), layout.l2()), (10, 5));

    let text = cfg.to_toml().unwrap();
    let back = RunConfig::from_toml(&text).unwrap();
    assert_eq!(back.to_toml().unwrap(), text);
    assert_eq!(back.noise.lambda.to_bits(), cfg.noise.lambda.to_bits());
    assert_eq!(back.noise.omega_high_factor.to_bits(), cfg.noise.omega_high_factor.to_bits());
}

#[test]
fn written_run_config_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    run(&["spectrum", "--seed", "17", "--lambda", "0.003"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("run_config.toml")).unwrap();
    let cfg = RunConfig::from_toml(&text).unwrap();
    assert_eq!(cfg.noise.seed, 17);
    assert_eq!(cfg.noise.lambda, 0.003);
    assert_eq!(cfg.to_toml().unwrap(), text);
}

#[test]
fn trace_has_every_step_and_known_landmark() {
    let dir = tempfile::tempdir().unwrap();
    run(&["trace", "--svg"], dir.path());
    let (schema, rows) = csv_rows(&dir.path().join("trace.csv"));
    assert_eq!(schema, "# shor-afs trace v1");
    // 3 components × 3 scopes, steps 0..=75.
    assert_eq!(rows.len(), 76 * 9);
    let x_all: Vec<_> = rows.iter().filter(|r| &r[2] == "x" && &r[3] == "all").collect();
    assert_eq!(x_all.len(), 76);
    let at20: f64 = x_all.iter().find(|r| &r[0] == "20").unwrap()[4].parse().unwrap();
    assert!((at20 - 0.227).abs() < 1e-3, "{at20}");
    assert!(dir.path().join("trace.svg").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    std::fs::write(&cfg, "[noise]\nsubsteps = 256\n[noise_scan]\nsteps = [3, 20, 40]\n").unwrap();
    let args = ["noise-scan", "--samples", "4", "--components", "xz", "--svg", "--config", cfg.to_str().unwrap()];
    let out = dir.path().join("out");
    let names = ["noise_scan.csv", "noise_scan_summary.json", "noise_scan.svg", "run_config.toml"];
    let snapshot = || names.map(|n| std::fs::read(out.join(n)).unwrap());
    run(&args, &out);
    let first = snapshot();
    run(&args, &out);
    let second = snapshot();
    for (name, (x, y)) in names.iter().zip(first.iter().zip(&second)) {
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn spectrum_summary_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    run(&["spectrum"], dir.path());
    let (_, rows) = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 1024);
    let total: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let s = json(&dir.path().join("spectrum_summary.json"));
    assert_eq!(s["order"], 6);
    assert!((s["t_clean"].as_f64().unwrap() - 0.22797).abs() < 1e-5);
    assert!((s["total_probability"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn spectrum_agrees_across_backends() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&["spectrum"], a.path());
    run(&["spectrum", "--backend", "structured"], b.path());
    let (_, ra) = csv_rows(&a.path().join("spectrum.csv"));
    let (_, rb) = csv_rows(&b.path().join("spectrum.csv"));
    for (x, y) in ra.iter().zip(&rb) {
        let (p, q): (f64, f64) = (x[1].parse().unwrap(), y[1].parse().unwrap());
        assert!((p - q).abs() < 1e-12);
    }
}

#[test]
fn z_noise_after_last_step_keeps_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("z.toml");
    std::fs::write(&cfg, "[noise]\ncomponents = \"z\"\nsamples = 4\nsubsteps = 256\n[noise_scan]\nsteps = [10, 75]\n").unwrap();
    run(&["noise-scan", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    let out = dir.path().join("out");
    let (schema, rows) = csv_rows(&out.join("noise_scan.csv"));
    assert_eq!(schema, "# shor-afs noise-scan v1");
    assert_eq!(rows.len(), 2);
    let s = json(&out.join("noise_scan_summary.json"));
    let t_clean = s["t_clean"].as_f64().unwrap();
    let last = &rows[1];
    assert_eq!(&last[0], "75");
    let f: f64 = last[2].parse().unwrap();
    let t: f64 = last[7].parse().unwrap();
    assert!(f < 1.0);
    assert!((t - t_clean).abs() < 1e-12, "{t} vs {t_clean}");
    // An incomplete scan carries no combined estimate.
    assert!(s["combined"].is_null());
}

#[test]
fn state_noise_zero_coupling_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    run(&["state-noise", "--samples", "4", "--step", "20", "--lambdas", "0,0.0015,0.003"], dir.path());
    let (_, rows) = csv_rows(&dir.path().join("state_noise.csv"));
    assert_eq!(rows.len(), 9);
    let s = json(&dir.path().join("state_noise_summary.json"));
    let t_clean = s["t_clean"].as_f64().unwrap();
    for r in rows.iter().filter(|r| r[0].parse::<f64>().unwrap() == 0.0) {
        assert_eq!(r[2].parse::<f64>().unwrap(), 1.0);
        assert!((r[4].parse::<f64>().unwrap() - t_clean).abs() < 1e-14);
        assert_eq!(r[6].parse::<f64>().unwrap(), 0.0);
        assert!(r[8].is_empty());
    }
    for r in rows.iter().filter(|r| r[0].parse::<f64>().unwrap() > 0.0) {
        assert!(r[2].parse::<f64>().unwrap() < 1.0);
    }
}

#[test]
fn bad_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[circuit]\nmodulus = 21\nbogus = 1\n").unwrap();
    let o = bin().args(["trace", "--config", cfg.to_str().unwrap()]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&cfg, "[circuit]\nmodulus = 21\nbase = 7\n").unwrap();
    let o = bin().args(["trace", "--config", cfg.to_str().unwrap()]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2), "non-coprime base");

    let o = bin().args(["trace", "--components", "xw"]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dense_memory_cap_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    std::fs::write(&cfg, "[circuit]\nmodulus = 513\nbase = 26\nbackend = \"dense\"\n").unwrap();
    let o = bin().args(["spectrum", "--config", cfg.to_str().unwrap()]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn noise_commands_refuse_structured_backend() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["noise-scan", "--backend", "structured"]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.circuit.layout().unwrap();
            cfg.noise.to_config().unwrap();
            n += 1;
        }
    }
    assert!(n >= 8);
}
