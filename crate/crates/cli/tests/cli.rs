use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use treelabel::codec::{unpack_parts, Bits};
use treelabel::tree::{ceil_log2, parse_tree};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treelabel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn gen(dir: &TempDir, kind: &str, n: usize, seed: u64) -> PathBuf {
    let p = dir.path().join(format!("{}-{n}-{seed}.tree", kind.replace(':', "_")));
    let o = run(&["gen", "--kind", kind, "--n", &n.to_string(), "--seed", &seed.to_string(), "-o", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    p
}

fn encode(scheme: &str, tree: &Path, extra: &[&str], out: &Path) -> Output {
    let mut args = vec!["encode", "--scheme", scheme, tree.to_str().unwrap(), "-o", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn gen_writes_the_tree_format() {
    let o = run(&["gen", "--kind", "path", "--n", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "5\n0 1 2 3\n");
    let d = TempDir::new().unwrap();
    let a = fs::read_to_string(gen(&d, "lower_bound:3", 64, 0)).unwrap();
    let t = parse_tree(&a).unwrap();
    assert_eq!(t.len(), 64);
    assert!(t.max_degree() <= 2);
    let again = stdout(&run(&["gen", "--kind", "lower_bound:3", "--n", "64"]));
    assert_eq!(a, again);
}

#[test]
fn encode_writes_labels_and_ports() {
    let d = TempDir::new().unwrap();
    let tree = gen(&d, "path", 3, 0);
    let out = d.path().join("final.labels");
    assert_eq!(code(&encode("final", &tree, &[], &out)), 0);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "# scheme=final n=3 b=0 c=2");
    assert!(lines[2..5].iter().all(|l| l.split_whitespace().nth(1).unwrap().starts_with("len:")));
    assert_eq!(&lines[5..], ["PORTS", "0 1 1", "1 2 1"]);

    let again = d.path().join("again.labels");
    encode("final", &tree, &[], &again);
    assert_eq!(text, fs::read_to_string(&again).unwrap());
}

#[test]
fn interm_labels_unpack() {
    let d = TempDir::new().unwrap();
    let tree = gen(&d, "star", 10, 0);
    let out = d.path().join("interm.labels");
    assert_eq!(code(&encode("interm", &tree, &["--b", "6"], &out)), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("scheme=interm n=10 b=6"));
    let labels: Vec<&str> = text.lines().skip(2).take(10).collect();
    for l in labels {
        let f: Vec<&str> = l.split_whitespace().collect();
        let len = f[1].strip_prefix("len:").unwrap().parse().unwrap();
        let bits = Bits::from_hex(f.get(2).copied().unwrap_or(""), len).unwrap();
        assert_eq!(unpack_parts(&bits).unwrap().len(), 6);
    }
}

#[test]
fn route_answers_and_rejects() {
    let d = TempDir::new().unwrap();
    let tree = gen(&d, "complete_binary", 7, 0);
    let out = d.path().join("bd.labels");
    encode("bd", &tree, &[], &out);
    let l = out.to_str().unwrap();
    assert_eq!(stdout(&run(&["route", l, "3", "0"])).trim(), "0");
    assert_eq!(stdout(&run(&["route", l, "0", "5"])).trim(), "2");
    assert_eq!(stdout(&run(&["route", l, "0", "3"])).trim(), "1");
    assert_eq!(code(&run(&["route", l, "2", "2"])), 2);
    assert_eq!(code(&run(&["route", l, "2", "70"])), 2);

    let anc = d.path().join("anc.labels");
    encode("ancestry", &tree, &[], &anc);
    assert_eq!(stdout(&run(&["route", anc.to_str().unwrap(), "0", "6"])).trim(), "1");
    assert_eq!(stdout(&run(&["route", anc.to_str().unwrap(), "6", "0"])).trim(), "0");
}

#[test]
fn route_agrees_with_verify_on_samples() {
    let d = TempDir::new().unwrap();
    let tree = gen(&d, "random", 60, 9);
    let out = d.path().join("ct.labels");
    encode("ct", &tree, &[], &out);
    let v = run(&["verify", tree.to_str().unwrap(), "--labels", out.to_str().unwrap(), "--mode", "sample:300"]);
    assert_eq!(code(&v), 0, "{}", stdout(&v));
    let t = parse_tree(&fs::read_to_string(&tree).unwrap()).unwrap();
    for (u, w) in [(0, 59), (59, 0), (5, 40), (17, 3)] {
        let got: u32 = stdout(&run(&["route", out.to_str().unwrap(), &u.to_string(), &w.to_string()]))
            .trim()
            .parse()
            .unwrap();
        let up = !treelabel::tree::is_proper_ancestor(&t, u, w);
        assert_eq!(got == 0, up, "{u}->{w}");
    }
}

#[test]
fn final_verifies_on_every_generator() {
    let d = TempDir::new().unwrap();
    for (kind, n) in [
        ("path", 256),
        ("star", 256),
        ("caterpillar", 256),
        ("complete_binary", 255),
        ("random", 256),
        ("lower_bound:1", 256),
        ("lower_bound:2", 256),
        ("lower_bound:8", 256),
    ] {
        let tree = gen(&d, kind, n, 3);
        let o = run(&["verify", "--scheme", "final", tree.to_str().unwrap(), "--mode", "exhaustive"]);
        assert_eq!(code(&o), 0, "{kind}: {}", stdout(&o));
        assert!(stdout(&o).starts_with("PASS scheme=final"));
    }
    let tree = gen(&d, "random", 200, 1);
    let o = run(&["verify", "--scheme", "ancestry", tree.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains(&format!("pairs={}", 200 * 199)));
}

#[test]
fn corrupted_labels_fail_verification() {
    let d = TempDir::new().unwrap();
    let tree = gen(&d, "random", 50, 2);
    let out = d.path().join("interm.labels");
    encode("interm", &tree, &[], &out);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let rest = |l: &str| l.split_once(' ').unwrap().1.to_string();
    let (a, b) = (rest(&lines[2 + 4]), rest(&lines[2 + 30]));
    lines[2 + 4] = format!("4 {b}");
    lines[2 + 30] = format!("30 {a}");
    let bad = d.path().join("bad.labels");
    fs::write(&bad, lines.join("\n")).unwrap();
    let o = run(&["verify", tree.to_str().unwrap(), "--labels", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let s = stdout(&o);
    assert!(s.starts_with("FAIL scheme=interm"), "{s}");
    assert!(s.contains("u=") && s.contains("want=") && s.contains("label_u=[len:"));
}

#[test]
fn usage_errors_exit_2() {
    let d = TempDir::new().unwrap();
    let tree = gen(&d, "path", 4, 0);
    let t = tree.to_str().unwrap();
    let out = d.path().join("x");
    assert_eq!(code(&encode("nope", &tree, &[], &out)), 2);
    assert_eq!(code(&encode("final", &tree, &["--b", "3"], &out)), 2);
    assert_eq!(code(&run(&["verify", t])), 2);
    assert_eq!(code(&run(&["verify", "--scheme", "bd", t, "--mode", "some"])), 2);
    assert_eq!(code(&run(&["gen", "--kind", "complete_binary", "--n", "6"])), 2);
    assert_eq!(code(&run(&["route", t, "0", "1"])), 2);
    let o = bin().args(["verify", "--scheme", "bd", t]).env("TREELABEL_THREADS", "0").output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin().args(["verify", "--scheme", "bd", t]).env("TREELABEL_THREADS", "1").output().unwrap();
    assert_eq!(code(&o), 0);
}

fn bench_rows(args: &[&str]) -> Vec<csv::StringRecord> {
    let o = run(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_reader(o.stdout.as_slice());
    let h = rd.headers().unwrap().clone();
    assert_eq!(h.iter().next(), Some("schema_version"));
    let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
    assert!(rows.iter().all(|r| r.len() == h.len() && &r[0] == "1"));
    rows
}

fn col(h: &str) -> usize {
    [
        "schema_version",
        "scheme",
        "n",
        "kind",
        "seed",
        "max_label_bits",
        "mean_label_bits",
        "encode_ms",
        "verify",
        "second_order_ratio",
    ]
    .iter()
    .position(|c| *c == h)
    .unwrap()
}

#[test]
fn bench_ratios_stay_bounded() {
    let sizes = "1024,16384,262144";
    let rows = bench_rows(&["bench", "--scheme", "final,ancestry", "--n", sizes, "--mode", "sample:200"]);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(&r[col("verify")], "pass");
        let n: u64 = r[col("n")].parse().unwrap();
        let max: u32 = r[col("max_label_bits")].parse().unwrap();
        assert!(max >= ceil_log2(n));
        let ratio: f64 = r[col("second_order_ratio")].parse().unwrap();
        let cap = if &r[col("scheme")] == "final" { 60.0 } else { 12.0 };
        assert!(ratio > 0.0 && ratio <= cap, "{r:?}");
    }
}

#[test]
fn bench_writes_csv_and_plot_files() {
    let d = TempDir::new().unwrap();
    let csv_path = d.path().join("b.csv");
    let plot = d.path().join("b.dat");
    let o = run(&[
        "bench",
        "--scheme",
        "interm,local:v2",
        "--n",
        "64,128",
        "--kind",
        "random,star",
        "--seed",
        "1,2",
        "--csv",
        csv_path.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let mut rd = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rd.records().count(), 16);
    let p = fs::read_to_string(&plot).unwrap();
    assert_eq!(p.lines().count(), 5);
    assert!(p.lines().nth(1).unwrap().starts_with("interm 64 6 "));
}
