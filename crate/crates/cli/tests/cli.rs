use pel_cli::goldens::{golden, golden_traces};
use pel_cli::{run, EXIT_DOMAIN, EXIT_USAGE};

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn pel(args: &[&str], stdin: &str) -> Output {
    let mut input = stdin.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("pel").chain(args.iter().copied());
    let code = run(argv, &mut input, &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

#[test]
fn goldens_rederive_bit_identically() {
    for g in golden_traces() {
        let (Some(command), Some(from)) = (g.command, g.from) else { continue };
        let source = golden(from).unwrap().contents;
        let args: Vec<&str> = command.iter().map(|a| if *a == "{}" { "-" } else { a }).collect();
        let o = pel(&args, source);
        assert_eq!(o.code, 0, "{}: {}", g.name, o.err);
        assert_eq!(o.out, g.contents, "{} is stale", g.name);
    }
}

#[test]
fn cbv_trace_shape_and_endpoint() {
    let o = pel(&["reduce", "--strategy", "full", "--trace", "-"], golden("cbv_intro.pel").unwrap().contents);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.out.lines().collect();
    assert_eq!(*lines.last().unwrap(), r"\x.\y.x");
    let rules: Vec<&str> = lines[..lines.len() - 1].iter().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(rules.first(), Some(&"plusArg"));
    assert_eq!(&rules[rules.len() - 2..], ["idem", "boxVoid"]);
}

#[test]
fn cbn_distribution_lines() {
    let o = pel(&["dist", "-"], golden("cbn_intro.pel").unwrap().contents);
    assert_eq!(o.code, 0);
    assert_eq!(o.out, "1/2\t\\x.\\y.x\n1/2\t\\x.\\y.y\n");
}

#[test]
fn omega_fails_the_occurs_check() {
    let o = pel(&["typecheck", "-"], golden("omega.pel").unwrap().contents);
    assert_eq!(o.code, EXIT_DOMAIN);
    assert!(o.err.contains("occurs check"), "{}", o.err);
    assert!(o.out.is_empty());
}

#[test]
fn typecheck_with_environment_and_expected_type() {
    let o = pel(&["typecheck", "--env", "x:o", "-e", r"!a.((\y.y) +[a] (\z.x))"], "");
    assert_eq!((o.code, o.out.as_str()), (0, "o -> o\n"), "{}", o.err);
    let o = pel(&["typecheck", "--env", "x:o", "--type", "o -> o", "-e", r"\y.y"], "");
    assert_eq!(o.code, 0, "{}", o.err);
    let o = pel(&["typecheck", "--env", "x:o", "--type", "o", "-e", r"\y.y"], "");
    assert_eq!(o.code, EXIT_DOMAIN);
}

#[test]
fn exit_codes() {
    assert_eq!(pel(&["fmt", "-e", r"\x."], "").code, EXIT_USAGE);
    assert_eq!(pel(&["fmt", "-e", "x +[a] y"], "").code, EXIT_DOMAIN);
    assert_eq!(pel(&["frobnicate"], "").code, EXIT_USAGE);
    assert_eq!(pel(&["reduce", "--strategy", "sideways", "-e", "x"], "").code, EXIT_USAGE);
    assert_eq!(pel(&["fmt", "/nonexistent/file.pel"], "").code, EXIT_USAGE);
    let o = pel(&["reduce", "--max-steps", "50", "-e", r"(\x.x x) (\x.x x)"], "");
    assert_eq!(o.code, EXIT_DOMAIN);
    assert!(o.err.contains("budget"), "{}", o.err);
    assert_eq!(pel(&["--help"], "").code, 0);
}

#[test]
fn fmt_is_idempotent() {
    let once = pel(&["fmt", "-e", r"!b.( (\x . x)  (y +[b] (z +[b] w)) )"], "");
    assert_eq!(once.code, 0);
    let twice = pel(&["fmt", "-"], &once.out);
    assert_eq!(once.out, twice.out);
}

#[test]
fn output_is_deterministic() {
    let args = ["reduce", "--trace", "--certify", "-"];
    let src = golden("cbn_intro.pel").unwrap().contents;
    assert_eq!(pel(&args, src).out, pel(&args, src).out);
    let t = ["test", "perm-sn", "--trials", "50", "--seed", "7"];
    assert_eq!(pel(&t, "").out, pel(&t, "").out);
}

#[test]
fn certified_trace() {
    let o = pel(&["reduce", "--strategy", "perm", "--trace", "--certify", "-e", r"!a.((x +[a] y) z)"], "");
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.lines().any(|l| l.starts_with("plusFun")), "{}", o.out);
    assert!(o.out.contains("certificate: decreasing under"), "{}", o.out);
}

#[test]
fn json_records() {
    let o = pel(&["--json", "reduce", "--trace", "--certify", "-e", r"!a.((x +[a] x) z)"], "");
    assert_eq!(o.code, 0, "{}", o.err);
    let records: Vec<serde_json::Value> = o.out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.len() >= 2);
    for r in &records[..records.len() - 1] {
        assert!(r["rule"].is_string() && r["pos"].is_string() && r["term"].is_string());
        assert!(r["certificate"].is_string());
    }
    assert_eq!(records.last().unwrap()["term"], "x z");
    let d = pel(&["--json", "dist", "-"], golden("cbn_intro.pel").unwrap().contents);
    let first: serde_json::Value = serde_json::from_str(d.out.lines().next().unwrap()).unwrap();
    assert_eq!(first["prob"], "1/2");
    let ty = pel(&["--json", "typecheck", "-e", r"\x.x"], "");
    let rec: serde_json::Value = serde_json::from_str(ty.out.trim()).unwrap();
    assert_eq!(rec["type"], "a -> a");
}

#[test]
fn open_terms_use_a_label_sequence() {
    let o = pel(&["check", "--open", "--theta", "b,a", "-e", "x +[a] (y +[b] z)"], "");
    assert_eq!(o.code, 0, "{}", o.err);
    let o = pel(&["check", "--open", "--theta", "a", "-e", "x +[a] (y +[b] z)"], "");
    assert_eq!(o.code, EXIT_DOMAIN);
    assert!(o.err.contains("not all in a"), "{}", o.err);
    let o = pel(&["reduce", "--open", "-e", "(x +[a] y) z"], "");
    assert_eq!((o.code, o.out.as_str()), (0, "x z +[a] y z\n"), "{}", o.err);
}

#[test]
fn translations() {
    let src = r"(\x.x) (y (+) z)";
    let cbn = pel(&["translate", "--to", "cbn", "-e", src], "");
    assert_eq!(cbn.out, "(\\x.x) (!a.(y +[a] z))\n");
    let cbv = pel(&["translate", "-e", src], "");
    assert_eq!(cbv.out, "!a.(\\x.x) (y +[a] z)\n");
    let open = pel(&["translate", "--to", "open", "-e", src], "");
    assert_eq!(open.out, "a |- (\\x.x) (y +[a] z)\n");
    assert_eq!(pel(&["translate", "-e", "!a.x"], "").code, EXIT_USAGE);
}

#[test]
fn parse_describes_the_term() {
    let o = pel(&["parse", "-e", r"(\x.x) y"], "");
    assert_eq!(o.code, 0);
    assert!(o.out.contains("size: 4"), "{}", o.out);
    assert!(o.out.contains("class: PNormal"), "{}", o.out);
}

#[test]
fn property_runs() {
    let o = pel(&["test", "list"], "");
    assert!(o.out.contains("perm-sn") && o.out.contains("diamond-exhaustive"));
    let o = pel(&["test", "roundtrip", "--trials", "30"], "");
    assert_eq!(o.code, 0, "{}", o.out);
    assert_eq!(o.out.lines().next().unwrap(), "roundtrip: 30 trials, 30 passed, 0 skipped, 0 failed");
    let o = pel(&["--json", "test", "diamond-exhaustive", "--size", "4"], "");
    let rec: serde_json::Value = serde_json::from_str(o.out.trim()).unwrap();
    assert_eq!(rec["property"], "diamond-exhaustive");
    assert_eq!(pel(&["test", "no-such-property"], "").code, EXIT_USAGE);
}
