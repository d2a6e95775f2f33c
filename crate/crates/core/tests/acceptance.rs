//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p fieldscope --test acceptance`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fieldscope::arch::{Axes, LayerKind, LayerShape, NetworkSpec};
use fieldscope::calc::{erf_bottom_up, pf_size_set, pf_sizes_for, rf_top_down};
use fieldscope::cli;
use fieldscope::fixtures::case_study;
use fieldscope::oracle::{self, check_equivalence, pf_counts_oracle};
use fieldscope::par::Execution;
use fieldscope::parser::{parse_dsl, parse_manifest, serialize_dsl};
use fieldscope::random::{clamp_strides, seeded_chains, ChainBounds};

const SEED: u64 = 42;
const TRIALS: usize = 1000;
const SMALL_TRIALS: usize = 100;

const CASE_STUDY_BOTTOM_UP: [u64; 12] = [1, 9, 10, 26, 28, 60, 64, 96, 160, 240, 320, 400];
const CASE_STUDY_TOP_DOWN_11: [u64; 12] = [1, 11, 21, 31, 39, 43, 86, 94, 188, 196, 392, 400];

const AC1_BUDGET: Duration = Duration::from_millis(1);
const AC3_BUDGET: Duration = Duration::from_secs(1);
const AC4_BUDGET: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run_cli(args: &[&str]) -> (Option<i32>, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_fieldscope"))
        .args(args)
        .output()
        .expect("binary runs");
    (o.status.code(), String::from_utf8(o.stdout).unwrap())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn square_values(values: &[Axes<u64>]) -> Result<Vec<u64>, String> {
    values
        .iter()
        .map(|v| {
            if v.is_square() {
                Ok(v.h)
            } else {
                Err(format!("non-square value {v:?}"))
            }
        })
        .collect()
}

fn ac1_case_study_bottom_up() -> Outcome {
    let net = case_study();
    let trace = erf_bottom_up(&net).map_err(|e| e.to_string())?;
    let got = square_values(&trace.values)?;
    ensure(got == CASE_STUDY_BOTTOM_UP, || format!("trace {got:?}"))?;

    let file = parse_dsl(&std::fs::read_to_string(fixture("case_study.net")).unwrap())
        .map_err(|d| format!("{d:?}"))?;
    let from_file = square_values(&erf_bottom_up(&file).unwrap().values)?;
    ensure(from_file == CASE_STUDY_BOTTOM_UP, || format!("fixture trace {from_file:?}"))?;

    let runs = 1000;
    let start = Instant::now();
    for _ in 0..runs {
        std::hint::black_box(erf_bottom_up(std::hint::black_box(&net)).unwrap());
    }
    let per_run = start.elapsed() / runs;
    ensure(per_run < AC1_BUDGET, || format!("{per_run:?} per run"))?;
    Ok(format!("trace exact, {per_run:?} per run"))
}

fn ac2_case_study_top_down() -> Outcome {
    let proj = rf_top_down(&case_study(), 11).map_err(|e| e.to_string())?;
    let got = square_values(&proj.values)?;
    ensure(got == CASE_STUDY_TOP_DOWN_11, || format!("library {got:?}"))?;

    let path = fixture("case_study.net");
    let (code, out) = run_cli(&["topdown", path.to_str().unwrap(), "--layer", "11", "--format", "json"]);
    ensure(code == Some(0), || format!("exit {code:?}"))?;
    let v: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let cli_values: Vec<u64> = v["projection"]
        .as_array()
        .ok_or("no projection")?
        .iter()
        .map(|s| s["rf"][0].as_u64().unwrap())
        .collect();
    ensure(cli_values == CASE_STUDY_TOP_DOWN_11, || format!("cli {cli_values:?}"))?;
    Ok("library and CLI sequences exact".into())
}

fn ac3_method_agreement() -> Outcome {
    let nets = seeded_chains(SEED, TRIALS, &ChainBounds::default());
    let start = Instant::now();
    let mut checked = 0usize;
    for net in &nets {
        let trace = erf_bottom_up(net).map_err(|e| format!("{}: {e}", net.name))?;
        for k in 0..=net.len() {
            let td = rf_top_down(net, k).map_err(|e| e.to_string())?.erf();
            ensure(td == trace.values[k], || {
                format!("{} layer {k}: bottom-up {:?} top-down {td:?}", net.name, trace.values[k])
            })?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < AC3_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} layers over {TRIALS} chains in {elapsed:?}"))
}

fn ac4_oracle_agreement() -> Outcome {
    let nets: Vec<NetworkSpec> = seeded_chains(SEED, TRIALS, &ChainBounds::default())
        .iter()
        .map(clamp_strides)
        .collect();
    let start = Instant::now();
    let outcome = oracle::check_batch(&nets, Execution::Parallel);
    let elapsed = start.elapsed();
    if let Some(fail) = &outcome.first_failure {
        return Err(format!(
            "trial {} failed:\n{}\n{:?}",
            fail.trial,
            serialize_dsl(&fail.network),
            fail.outcome
        ));
    }
    // Every boundary of a clamped chain is gap-free, so every PF row is gated.
    for net in &nets {
        let report = check_equivalence(net).map_err(|e| e.to_string())?;
        ensure(report.pf.len() == net.len() && report.pf.iter().all(|c| c.covered && c.matched), || {
            format!("{}: PF rows {:?}", net.name, report.pf)
        })?;
        ensure(report.erf.iter().all(|c| c.oracle.span == c.bottom_up), || {
            format!("{}: span mismatch", net.name)
        })?;
    }
    ensure(elapsed < AC4_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{} chains agree in {elapsed:?}", outcome.passed))
}

fn ac5_pf_disparity() -> Outcome {
    let set = |pairs: &[(u64, u64)]| -> BTreeSet<Axes<u64>> {
        pairs.iter().map(|&(h, w)| Axes::new(h, w)).collect()
    };
    let p = pf_sizes_for(0, Axes::square(5), Axes::square(2));
    ensure(p.sizes == set(&[(2, 2), (2, 3), (3, 2), (3, 3)]) && !p.uniform, || {
        format!("f=5 s=2 gave {:?}", p.sizes)
    })?;
    let o = pf_counts_oracle(Axes::square(5), Axes::square(2));
    ensure(o.sizes == p.sizes, || format!("oracle gave {:?}", o.sizes))?;

    let p = pf_sizes_for(0, Axes::square(3), Axes::square(1));
    ensure(p.sizes == set(&[(3, 3)]) && p.uniform, || format!("f=3 s=1 gave {:?}", p.sizes))?;

    for (f, s) in [(2, 2), (4, 2), (6, 3), (9, 3), (8, 4), (1, 1), (11, 1)] {
        let p = pf_sizes_for(0, Axes::square(f), Axes::square(s));
        ensure(p.sizes == set(&[(f / s, f / s)]) && p.uniform, || {
            format!("f={f} s={s} gave {:?}", p.sizes)
        })?;
    }
    let mixed = pf_sizes_for(0, Axes::new(6, 4), Axes::new(3, 2));
    ensure(mixed.sizes == set(&[(2, 2)]) && mixed.uniform, || format!("{:?}", mixed.sizes))?;

    let net = NetworkSpec::square_chain("pf", [(LayerKind::Conv, 3, 1), (LayerKind::Conv, 5, 2)]);
    let p = pf_size_set(&net, 1).map_err(|e| e.to_string())?;
    ensure(p.sizes.len() == 4, || "network boundary".into())?;
    Ok("worked example, stride-1 and divisible cases exact".into())
}

fn ac6_unit_layer_invariance() -> Outcome {
    let unit = LayerShape::square(LayerKind::Conv, 1, 1);
    let mut inserted = 0usize;
    for net in seeded_chains(SEED, SMALL_TRIALS, &ChainBounds::default()) {
        let before = erf_bottom_up(&net).unwrap().values;
        for at in 1..=net.len() + 1 {
            let after = erf_bottom_up(&net.with_inserted(at, unit)).unwrap().values;
            let mut expected = before.clone();
            expected.insert(at, before[at - 1]);
            ensure(after == expected, || format!("{} insert at {at}", net.name))?;
            inserted += 1;
        }
    }
    Ok(format!("{inserted} insertions over {SMALL_TRIALS} chains"))
}

fn ac7_round_trip() -> Outcome {
    let mut nets = seeded_chains(SEED, SMALL_TRIALS, &ChainBounds::default());
    for (i, net) in nets.iter_mut().enumerate() {
        if i % 3 == 0 {
            net.direction = fieldscope::Direction::Deconv;
        }
        if i % 4 == 0 {
            net.layers[0].channels_out = Some(i as u64 + 1);
        }
        if i % 5 == 0 {
            net.name.clear();
        }
    }
    for net in &nets {
        let back = parse_dsl(&serialize_dsl(net)).map_err(|d| format!("{}: {d:?}", net.name))?;
        ensure(&back == net, || format!("{} changed", net.name))?;
    }

    let text = std::fs::read_to_string(fixture("case_study.net")).unwrap();
    let parsed = parse_dsl(&text).map_err(|d| format!("{d:?}"))?;
    ensure(parsed == case_study(), || "fixture differs from reference".into())?;
    ensure(parse_dsl(&serialize_dsl(&parsed)).unwrap() == parsed, || "fixture".into())?;

    let manifest = std::fs::read_to_string(fixture("case_study.toml")).unwrap();
    let m = parse_manifest(&manifest).map_err(|d| format!("{d:?}"))?;
    ensure(m.network == parsed && m.warnings.is_empty(), || "manifest differs".into())?;
    Ok(format!("{} random networks + case-study fixture", nets.len()))
}

fn ac8_exit_codes_and_golden() -> Outcome {
    let net = fixture("case_study.net");
    let net = net.to_str().unwrap();

    let golden = std::fs::read_to_string(fixture("golden/case_study.analyze.json")).unwrap();
    for _ in 0..2 {
        let (code, out) = run_cli(&["analyze", net, "--format", "json"]);
        ensure(code == Some(0), || format!("analyze exit {code:?}"))?;
        ensure(out == golden, || "analyze json differs from golden".into())?;
    }
    let golden = std::fs::read_to_string(fixture("golden/case_study.topdown11.json")).unwrap();
    let (_, out) = run_cli(&["topdown", net, "--layer", "11", "--format", "json"]);
    ensure(out == golden, || "topdown json differs from golden".into())?;
    let golden = std::fs::read_to_string(fixture("golden/case_study.analyze.txt")).unwrap();
    let (_, out) = run_cli(&["analyze", net]);
    ensure(out == golden, || "analyze table differs from golden".into())?;

    let bad = fixture("bad_integer.net");
    let dir = std::env::temp_dir().join(format!("fieldscope-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let huge = dir.join("huge.net");
    std::fs::write(&huge, "conv 3 s18446744073709551615\nconv 2 s1\n").unwrap();

    let cases: [(&[&str], i32); 7] = [
        (&["verify", net], 0),
        (&["analyze", bad.to_str().unwrap()], 2),
        (&["analyze", "/nonexistent/file.net"], 2),
        (&["topdown", net, "--layer", "12"], 2),
        (&["verify"], 2),
        (&["analyze", "--format", "yaml", net], 2),
        (&["analyze", huge.to_str().unwrap()], 3),
    ];
    for (args, want) in cases {
        let (code, _) = run_cli(args);
        ensure(code == Some(want), || format!("{args:?}: exit {code:?}, want {want}"))?;
    }
    std::fs::remove_dir_all(&dir).ok();

    // A mismatching report must map to exit 1.
    let mut report = check_equivalence(&case_study()).unwrap();
    report.erf[3].matched = false;
    report.pass = false;
    let mut sink = Vec::new();
    let code = cli::write_verification(&report, &mut sink);
    ensure(code == cli::EXIT_MISMATCH && code == 1, || format!("mismatch exit {code}"))?;
    let text = String::from_utf8(sink).unwrap();
    ensure(text.contains("first mismatch: layer 3"), || text.clone())?;
    Ok("exit codes 0/1/2/3 and golden files byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 case-study bottom-up ERF trace", ac1_case_study_bottom_up),
        ("AC2 case-study top-down projection", ac2_case_study_top_down),
        ("AC3 bottom-up = top-down on 1000 random chains", ac3_method_agreement),
        ("AC4 oracle agreement on 1000 gap-free chains", ac4_oracle_agreement),
        ("AC5 projective-field size sets", ac5_pf_disparity),
        ("AC6 1x1 layer invariance", ac6_unit_layer_invariance),
        ("AC7 DSL round trip", ac7_round_trip),
        ("AC8 exit codes and JSON golden files", ac8_exit_codes_and_golden),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
