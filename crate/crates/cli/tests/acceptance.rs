//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines always show in `cargo test` output.

mod support;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ng_core::harness::{self, AgentSpec, EvalReport, ExperimentSettings, LevelTemplate, RowStatus};
use ng_core::io::{self, Producer, SpaceHeader};
use ng_core::novelty::{apply_novelty, NoveltyKind, NoveltySpec, NoveltySuite};
use ng_core::sampling::{self, SamplingConfig};
use ng_core::worlds::{GridNavParams, WallContact, World, WorldKind, WorldSpec};
use ng_core::{
    classify_difficulty, space_distance, ActionMetricSpec, ActionVector, DifficultyClass, DifficultyThresholds,
    NormalizationMode, Solution, SolutionSpace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle::{self, GridOracle, Metric, Seq};

const MODES: [NormalizationMode; 2] = [NormalizationMode::Literal, NormalizationMode::Single];
const SUITE_SEED: u64 = 7;
const SAMPLING_SEED: u64 = 11;

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn run(id: u32, name: &str, limit: Duration, body: impl FnOnce(&mut Outcome)) -> bool {
    let mut out = Outcome::new();
    let t = Instant::now();
    body(&mut out);
    let took = t.elapsed();
    out.check(took <= limit, || format!("took {took:?}, limit {limit:?}"));
    let ok = out.failures.is_empty();
    println!("[{}] criterion {id}: {name} ({took:.2?})", if ok { "PASS" } else { "FAIL" });
    for n in &out.notes {
        println!("       {n}");
    }
    for f in out.failures.iter().take(10) {
        println!("       ! {f}");
    }
    ok
}

fn space(seqs: &[Seq], metric: &ActionMetricSpec) -> SolutionSpace {
    let sols = seqs.iter().map(|s| {
        Solution::new(s.iter().map(|a| ActionVector::new(a.clone()).unwrap()).collect()).unwrap()
    });
    ng_core::partition_space(sols, metric).unwrap()
}

fn seqs_of(space: &SolutionSpace) -> Vec<Seq> {
    space.iter().map(|s| s.actions().iter().map(|a| a.components().to_vec()).collect()).collect()
}

// ---- corpus for criteria 2 to 4 ----

struct Case {
    metric: ActionMetricSpec,
    oracle_metric: Metric,
    a: Vec<Seq>,
    b: Vec<Seq>,
}

fn random_space(rng: &mut ChaCha8Rng, discrete: bool) -> Vec<Seq> {
    let moves = [[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]];
    let size = rng.gen_range(0..=20);
    (0..size)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            (0..len)
                .map(|_| {
                    if discrete {
                        moves[rng.gen_range(0..4)].to_vec()
                    } else {
                        // coarse grid so duplicates and distance ties happen
                        vec![rng.gen_range(0..=4) as f64 / 4.0, rng.gen_range(0..=4) as f64 / 4.0]
                    }
                })
                .collect()
        })
        .collect()
}

fn corpus() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut cases = Vec::new();
    while cases.len() < 500 {
        let discrete = cases.len() % 2 == 0;
        let (a, b) = (random_space(&mut rng, discrete), random_space(&mut rng, discrete));
        if a.is_empty() && b.is_empty() {
            continue;
        }
        let (metric, oracle_metric) = if discrete {
            (ActionMetricSpec::discrete(), Metric::Discrete)
        } else {
            (ActionMetricSpec::euclidean(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(), Metric::Euclidean(2f64.sqrt()))
        };
        cases.push(Case { metric, oracle_metric, a, b });
    }
    cases
}

fn criterion_1(o: &mut Outcome) {
    let distances = [0.76, 0.46, -0.15, -0.16, 0.26, 0.29, 0.22, -0.10, 0.28, 0.43, 0.23, -0.03];
    let expected = "HHEEMMMEMHME";
    let th = DifficultyThresholds::default();
    let got: String = distances.iter().map(|&d| classify_difficulty(d, &th).unwrap().letter()).collect();
    o.check(got == expected, || format!("got {got}, expected {expected}"));
}

fn criterion_2(o: &mut Outcome, cases: &[Case]) {
    let mut worst = 0f64;
    for (i, c) in cases.iter().enumerate() {
        let (pa, pb) = (space(&c.a, &c.metric), space(&c.b, &c.metric));
        let reference = oracle::breakdown(c.oracle_metric, &c.a, &c.b).unwrap();
        for mode in MODES {
            let got = space_distance(&pa, &pb, mode).unwrap().distance;
            let want = match mode {
                NormalizationMode::Literal => reference.literal(),
                NormalizationMode::Single => reference.single(),
            };
            worst = worst.max((got - want).abs());
            o.check((got - want).abs() <= 1e-12, || format!("case {i} {mode}: {got} vs oracle {want}"));
        }
    }
    o.notes.push(format!("{} pairs x 2 modes, max |error| = {worst:.3e}", cases.len()));
}

fn criterion_3(o: &mut Outcome, cases: &[Case]) {
    let mut identities = 0;
    for c in cases.iter().filter(|c| !c.a.is_empty()).take(100) {
        let pa = space(&c.a, &c.metric);
        for mode in MODES {
            let d = space_distance(&pa, &pa, mode).unwrap().distance;
            o.check(d == 0.0, || format!("D(P,P) = {d} under {mode}"));
        }
        identities += 1;
    }
    o.check(identities == 100, || format!("only {identities} nonempty spaces"));

    let mut pairs = 0usize;
    for c in cases {
        let (pa, pb) = (space(&c.a, &c.metric), space(&c.b, &c.metric));
        for x in pa.iter().chain(pb.iter()) {
            for y in pa.iter().chain(pb.iter()).filter(|y| y.len() == x.len()) {
                let d = ng_core::solution_distance(x, y, &c.metric).unwrap();
                o.check((0.0..=1.0).contains(&d), || format!("solution distance {d}"));
                pairs += 1;
            }
        }
        for mode in MODES {
            let d = space_distance(&pa, &pb, mode).unwrap().distance;
            o.check(d.abs() <= 2.0, || format!("|D| = {} > 2", d.abs()));
        }
    }
    o.notes.push(format!("100 identities, {pairs} solution pairs, {} space pairs", cases.len()));
}

fn criterion_4(o: &mut Outcome, cases: &[Case]) {
    for (i, c) in cases.iter().enumerate() {
        let (pa, pb) = (space(&c.a, &c.metric), space(&c.b, &c.metric));
        let r = oracle::breakdown(c.oracle_metric, &c.a, &c.b).unwrap();
        let m = r.m();
        for (mode, k) in [(NormalizationMode::Literal, 2), (NormalizationMode::Single, 1)] {
            let ab = space_distance(&pa, &pb, mode).unwrap().distance;
            let ba = space_distance(&pb, &pa, mode).unwrap().distance;
            let mk = m.powi(k);
            let sum = 2.0 * r.matched_total() / mk;
            let diff = 2.0 * (r.total_a as f64 - r.total_b as f64) / mk;
            o.check((ab + ba - sum).abs() <= 1e-12 && ab + ba >= -1e-12, || {
                format!("case {i} {mode}: D(A,B)+D(B,A) = {} vs {sum}", ab + ba)
            });
            o.check((ab - ba - diff).abs() <= 1e-12, || {
                format!("case {i} {mode}: D(A,B)-D(B,A) = {} vs {diff}", ab - ba)
            });
        }
    }
}

fn criterion_5(o: &mut Outcome) {
    let metric = ActionMetricSpec::euclidean(vec![(0.0, 1.0)]).unwrap();
    let a = space(&[vec![vec![0.0]], vec![vec![1.0]]], &metric);
    let b = space(&[vec![vec![0.0]]], &metric);
    for (pa, pb, lit, single) in [(&a, &b, 0.25, 0.5), (&b, &a, -0.25, -0.5)] {
        let got_lit = space_distance(pa, pb, NormalizationMode::Literal).unwrap().distance;
        let got_single = space_distance(pa, pb, NormalizationMode::Single).unwrap().distance;
        o.check(got_lit == lit, || format!("literal {got_lit}, expected {lit}"));
        o.check(got_single == single, || format!("single {got_single}, expected {single}"));
    }
}

fn grid(width: u32, height: u32, walls: &[(u32, u32)], goal: (u32, u32), horizon: u32, contact: WallContact) -> WorldSpec {
    WorldSpec::gridnav(
        GridNavParams { width, height, walls: walls.iter().copied().collect(), start: (0, 0), goal, wall_contact: contact },
        horizon,
    )
}

fn grid_oracle(spec: &WorldSpec) -> GridOracle {
    let g = match &spec.world {
        ng_core::worlds::WorldParams::Gridnav(g) => g,
        _ => unreachable!(),
    };
    GridOracle {
        width: g.width.into(),
        height: g.height.into(),
        walls: g.walls.iter().map(|&(x, y)| (x.into(), y.into())).collect(),
        start: (g.start.0.into(), g.start.1.into()),
        goal: (g.goal.0.into(), g.goal.1.into()),
        horizon: spec.horizon as usize,
        wall_fails: g.wall_contact == WallContact::Fail,
    }
}

fn criterion_6(o: &mut Outcome) {
    let (n, e) = (vec![0.0, 1.0], vec![1.0, 0.0]);
    let pre = grid(2, 2, &[], (1, 1), 2, WallContact::Stay);
    let nov = NoveltySpec::new("wall", NoveltyKind::AddWall { cells: vec![(1, 0)] });
    let post = apply_novelty(&pre, &nov).unwrap();
    let pa = sampling::enumerate_solutions(&pre).unwrap();
    let pb = sampling::enumerate_solutions(&post).unwrap();
    let want_pre = vec![vec![n.clone(), e.clone()], vec![e.clone(), n.clone()]];
    let want_post = vec![vec![n.clone(), e.clone()]];
    o.check(seqs_of(&pa) == want_pre, || format!("pre space {:?}", seqs_of(&pa)));
    o.check(seqs_of(&pb) == want_post, || format!("post space {:?}", seqs_of(&pb)));
    o.check(grid_oracle(&pre).solutions() == want_pre, || "brute-force walk disagrees on pre".into());
    o.check(grid_oracle(&post).solutions() == want_post, || "brute-force walk disagrees on post".into());
    for mode in MODES {
        let r = sampling::compare_spaces(&pa, &pb, mode, &DifficultyThresholds::default()).unwrap();
        o.check(r.distance > 0.0, || format!("{mode} distance {}", r.distance));
        o.check(r.class != Some(DifficultyClass::Easy), || format!("{mode} classed Easy"));
        o.notes.push(format!("{mode}: distance {} class {}", r.distance, r.class.unwrap()));
    }
}

/// Pre-novel world and novelty for each sampling-convergence case.
fn convergence_cases() -> Vec<(WorldSpec, NoveltySpec)> {
    vec![
        (
            grid(3, 3, &[], (2, 2), 4, WallContact::Stay),
            NoveltySpec::new("w1", NoveltyKind::AddWall { cells: vec![(1, 2)] }),
        ),
        (
            grid(4, 3, &[(1, 1)], (3, 2), 5, WallContact::Fail),
            NoveltySpec::new("w2", NoveltyKind::AddWall { cells: vec![(2, 2)] }),
        ),
        (
            grid(4, 4, &[(1, 1)], (2, 1), 6, WallContact::Stay),
            NoveltySpec::new("w3", NoveltyKind::AddWall { cells: vec![(2, 0)] }),
        ),
    ]
}

/// Sampled space files from criterion 7, keyed by case and world.
type SpaceFiles = Vec<(String, WorldSpec, String)>;

fn criterion_7(o: &mut Outcome) -> SpaceFiles {
    let cfg = SamplingConfig::with_seed(SAMPLING_SEED);
    let mut files = Vec::new();
    for (i, (pre, nov)) in convergence_cases().into_iter().enumerate() {
        let post = apply_novelty(&pre, &nov).unwrap();
        let mut spaces = Vec::new();
        for (tag, spec) in [("pre", &pre), ("post", &post)] {
            let exact = sampling::enumerate_solutions(spec).unwrap();
            let sampled = sampling::sample_solutions(spec, &cfg).unwrap();
            let world = World::new(spec.clone()).unwrap();
            o.check(seqs_of(&exact) == grid_oracle(spec).solutions(), || format!("case {i} {tag}: enumeration vs brute force"));
            o.check(sampled.iter().all(|s| world.is_solution(s.actions())), || format!("case {i} {tag}: a sample does not replay"));
            o.check(sampled.is_subset_of(&exact), || format!("case {i} {tag}: sampled not within exact"));
            let header = SpaceHeader::new(&sampled, spec.content_hash(), Producer::Sampled(cfg));
            files.push((format!("c{i}_{tag}"), spec.clone(), io::space_to_string(&header, &sampled)));
            spaces.push((exact, sampled));
        }
        let [(ea, sa), (eb, sb)] = <[_; 2]>::try_from(spaces).ok().unwrap();
        let gap = |mode| {
            let e = space_distance(&ea, &eb, mode).unwrap().distance;
            let s = space_distance(&sa, &sb, mode).unwrap().distance;
            (e, s, (e - s).abs())
        };
        let (e, s, g) = gap(NormalizationMode::Literal);
        let (se, ss, sg) = gap(NormalizationMode::Single);
        o.check(g <= 0.05, || format!("case {i} literal: |sampled - exact| = {g}"));
        o.check(sg <= 0.05, || format!("case {i} single: |sampled - exact| = {sg}"));
        o.notes.push(format!(
            "case {i}: exact {}/{} sampled {}/{} solutions; literal {e:.4} vs {s:.4} (gap {g:.4}); single {se:.4} vs {ss:.4} (gap {sg:.4})",
            ea.total_size(),
            eb.total_size(),
            sa.total_size(),
            sb.total_size()
        ));
    }
    files
}

fn demo_suite() -> NoveltySuite {
    NoveltySuite::from_json(include_str!("fixtures/demo_suite.json")).unwrap()
}

fn criterion_8(o: &mut Outcome) -> EvalReport {
    let settings = ExperimentSettings::new(SUITE_SEED);
    let template = LevelTemplate::default_for(WorldKind::Gridnav);
    let levels = harness::generate_levels(&template, settings.levels_seed(), 100).unwrap();
    let report = harness::run_experiment(&demo_suite(), &[AgentSpec::replay_adapt()], &levels, &levels, &settings).unwrap();
    for row in &report.rows {
        o.check(row.status == RowStatus::Ok, || format!("{} inconclusive: {:?}", row.novelty_id, row.note));
        let (d, diff) = (row.distance.unwrap_or(f64::NAN), row.pass_diff_pct.unwrap_or(f64::NAN));
        if row.novelty_id.starts_with("open") {
            o.check(diff >= 0.0 && d <= 0.0, || format!("superset {}: distance {d}, pass diff {diff}", row.novelty_id));
        }
        if row.novelty_id.starts_with("wall") {
            o.check(d > 0.0, || format!("subset {}: distance {d}", row.novelty_id));
        }
        o.notes.push(format!(
            "{:<12} distance {:>8.5} class {} pass diff {:>7.2}",
            row.novelty_id,
            d,
            row.class.map(|c| c.letter()).unwrap_or('-'),
            diff
        ));
    }
    match report.spearman_rho {
        Some(rho) => {
            o.check(rho >= 0.5, || format!("spearman rho {rho} < 0.5"));
            o.notes.push(format!("spearman rho = {rho:.4}"));
        }
        None => o.check(false, || format!("rho undefined: {:?}", report.spearman_note)),
    }
    report
}

fn ng(args: &[&str], jobs: usize) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ng")).args(args).arg("--jobs").arg(jobs.to_string()).output().unwrap()
}

fn criterion_9(o: &mut Outcome, files: &SpaceFiles, report: &EvalReport) {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    for (name, spec, expected) in files {
        let world = p(&format!("{name}.json"));
        std::fs::write(&world, spec.to_json()).unwrap();
        for jobs in [1, 4] {
            let out = p(&format!("{name}.j{jobs}.jsonl"));
            let seed = SAMPLING_SEED.to_string();
            let r = ng(&["sample", "--world", &world, "--out", &out, "--seed", &seed], jobs);
            o.check(r.status.success(), || format!("ng sample failed: {}", String::from_utf8_lossy(&r.stderr)));
            let got = std::fs::read_to_string(&out).unwrap_or_default();
            o.check(&got == expected, || format!("{name} at --jobs {jobs} differs from the in-process run"));
        }
    }

    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/demo_suite.json");
    let mut outputs = Vec::new();
    for jobs in [1, 4] {
        let out = p(&format!("exp_j{jobs}"));
        let seed = SUITE_SEED.to_string();
        let args = ["experiment", "--suite", suite.to_str().unwrap(), "--out", &out, "--levels", "100", "--seed", &seed];
        let r = ng(&args, jobs);
        o.check(r.status.success(), || format!("ng experiment failed: {}", String::from_utf8_lossy(&r.stderr)));
        let read = |f: &str| std::fs::read(Path::new(&out).join(f)).unwrap_or_default();
        outputs.push((read("report.csv"), read("summary.json"), read("levels.json")));
    }
    o.check(outputs[0] == outputs[1], || "experiment outputs differ between --jobs 1 and 4".into());
    o.check(outputs[0].0 == report.to_csv().into_bytes(), || "CLI report.csv differs from the in-process report".into());
    o.notes.push(format!("{} space files and 3 report files compared byte for byte", files.len() * 2));
}

fn main() {
    let mut results = Vec::new();
    let secs = Duration::from_secs;
    results.push(run(1, "classifier reproduces the 12-novelty table", Duration::from_millis(1), criterion_1));
    let cases = corpus();
    results.push(run(2, "space distance matches brute-force oracle", secs(10), |o| criterion_2(o, &cases)));
    results.push(run(3, "identity and bounds", secs(5), |o| criterion_3(o, &cases)));
    results.push(run(4, "decomposition identities", secs(10), |o| criterion_4(o, &cases)));
    results.push(run(5, "hand-computed 2-vs-1 fixture", secs(1), criterion_5));
    results.push(run(6, "enumeration oracle on 2x2 grid", secs(1), criterion_6));
    let mut files = Vec::new();
    results.push(run(7, "sampling converges to exact spaces", secs(60), |o| files = criterion_7(o)));
    let mut report = None;
    results.push(run(8, "directional 6-novelty suite", secs(300), |o| report = Some(criterion_8(o))));
    results.push(run(9, "byte-identical reruns independent of --jobs", secs(600), |o| {
        criterion_9(o, &files, report.as_ref().unwrap())
    }));
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

