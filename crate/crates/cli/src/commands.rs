use std::io::BufReader;
use std::path::Path;

use ng_core::harness::{self, ExperimentSettings, LevelTemplate};
use ng_core::io::{self, Producer, SpaceHeader};
use ng_core::novelty::{NoveltySpec, NoveltySuite};
use ng_core::sampling::{self, SamplingConfig};
use ng_core::worlds::{WorldKind, WorldSpec};
use ng_core::{DifficultyReport, DifficultyThresholds, SolutionSpace};
use serde_json::json;

use crate::error::CliError;
use crate::output::{read_input, sidecar, write_atomic, RunManifest};
use crate::{DistanceArgs, EnumerateArgs, EstimateArgs, ExperimentArgs, SampleArgs, ThresholdArgs};

fn load_world(path: &Path) -> Result<(WorldSpec, String), CliError> {
    let text = read_input(path)?;
    Ok((WorldSpec::from_json(&text)?, text))
}

fn thresholds(t: &ThresholdArgs) -> Result<DifficultyThresholds, CliError> {
    Ok(DifficultyThresholds::new(t.easy_max, t.medium_max)?)
}

fn write_space_file(out: &Path, header: &SpaceHeader, space: &SolutionSpace) -> Result<(), CliError> {
    write_atomic(out, io::space_to_string(header, space).as_bytes())
}

pub fn enumerate(a: &EnumerateArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let (spec, text) = load_world(&a.world)?;
    let space = sampling::enumerate_solutions_with_budget(&spec, a.budget)?;
    let header = SpaceHeader::new(&space, spec.content_hash(), Producer::Exact { budget: a.budget });
    write_space_file(&a.out, &header, &space)?;

    let mut m = RunManifest::new("enumerate", a).input(&a.world, &text);
    m.outputs.push(a.out.clone());
    m.jobs = jobs;
    m.write(&sidecar(&a.out))?;
    eprintln!("{} solutions -> {}", space.total_size(), a.out.display());
    Ok(())
}

pub fn sample(a: &SampleArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let (spec, text) = load_world(&a.world)?;
    let cfg = SamplingConfig { num_agents: a.agents, episodes_per_agent: a.episodes, master_seed: a.seed };
    let space = sampling::sample_solutions(&spec, &cfg)?;
    let header = SpaceHeader::new(&space, spec.content_hash(), Producer::Sampled(cfg));
    write_space_file(&a.out, &header, &space)?;

    let mut m = RunManifest::new("sample", a).input(&a.world, &text);
    m.seeds = json!({ "master_seed": a.seed });
    m.outputs.push(a.out.clone());
    m.jobs = jobs;
    m.write(&sidecar(&a.out))?;
    eprintln!("{} distinct solutions -> {}", space.total_size(), a.out.display());
    Ok(())
}

fn load_space(path: &Path) -> Result<(SpaceHeader, SolutionSpace, String), CliError> {
    let text = read_input(path)?;
    let (h, s) = io::read_space(BufReader::new(text.as_bytes()))?;
    Ok((h, s, text))
}

fn report_csv(r: &DifficultyReport) -> String {
    let class = r.class.map(|c| c.letter().to_string()).unwrap_or_default();
    format!("distance,difficulty,mode,size_pre,size_post\n{},{},{},{},{}\n", r.distance, class, r.mode, r.size_a, r.size_b)
}

fn emit_report<T: serde::Serialize>(
    value: &T,
    csv: Option<String>,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let text = match csv {
        Some(c) => c,
        None => serde_json::to_string_pretty(value).expect("report serializes") + "\n",
    };
    if let Some(p) = out {
        write_atomic(p, text.as_bytes())?;
    }
    print!("{text}");
    Ok(text)
}

pub fn distance(a: &DistanceArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let th = thresholds(&a.thresholds)?;
    let (_, pre, pre_text) = load_space(&a.pre)?;
    let (_, post, post_text) = load_space(&a.post)?;
    let report = sampling::compare_spaces(&pre, &post, a.thresholds.mode, &th)?;
    emit_report(&report, a.csv.then(|| report_csv(&report)), a.out.as_deref())?;

    if let Some(out) = &a.out {
        let mut m = RunManifest::new("distance", a).input(&a.pre, &pre_text).input(&a.post, &post_text);
        m.outputs.push(out.clone());
        m.jobs = jobs;
        m.write(&sidecar(out))?;
    }
    Ok(())
}

pub fn estimate(a: &EstimateArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let th = thresholds(&a.thresholds)?;
    let (spec, world_text) = load_world(&a.world)?;
    let nov_text = read_input(&a.novelty)?;
    let nov: NoveltySpec = serde_json::from_str(&nov_text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", a.novelty.display())))?;
    let est = if a.exact {
        sampling::exact_difficulty(&spec, &nov, a.budget, a.thresholds.mode, &th)?
    } else {
        let cfg = SamplingConfig { num_agents: a.agents, episodes_per_agent: a.episodes, master_seed: a.seed };
        sampling::estimate_difficulty(&spec, &nov, &cfg, a.thresholds.mode, &th)?
    };
    emit_report(&est, None, a.out.as_deref())?;

    if let Some(out) = &a.out {
        let mut m = RunManifest::new("estimate", a).input(&a.world, &world_text).input(&a.novelty, &nov_text);
        m.seeds = json!({ "master_seed": a.seed });
        m.outputs.push(out.clone());
        m.jobs = jobs;
        m.write(&sidecar(out))?;
    }
    Ok(())
}

/// World kind the suite targets; `None` for suites of identity novelties.
fn suite_kind(suite: &NoveltySuite) -> Result<Option<WorldKind>, CliError> {
    let mut kinds = suite.novelties.iter().filter_map(|n| n.transform.world_kind());
    let first = kinds.next();
    if kinds.any(|k| Some(k) != first) {
        return Err(CliError::Validation("suite mixes gridnav and slingshot novelties".into()));
    }
    Ok(first)
}

pub fn experiment(a: &ExperimentArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let th = thresholds(&a.thresholds)?;
    let suite_text = read_input(&a.suite)?;
    let suite = NoveltySuite::from_json(&suite_text)?;
    let kind = suite_kind(&suite)?;
    let (template, template_text) = match &a.template {
        Some(p) => {
            let text = read_input(p)?;
            let t: LevelTemplate = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
            (t, Some(text))
        }
        None => (LevelTemplate::default_for(kind.unwrap_or(WorldKind::Gridnav)), None),
    };
    if kind.is_some_and(|k| k != template.kind()) {
        return Err(CliError::Validation("level template and suite target different world kinds".into()));
    }
    let agents: Vec<_> = a
        .agents
        .iter()
        .cloned()
        .map(|mut s| {
            if let Some(n) = a.attempts {
                s.attempts = n;
            }
            s
        })
        .collect();
    if agents.iter().any(|s| s.attempts == 0) {
        return Err(CliError::Usage("--attempts must be at least 1".into()));
    }

    let settings = ExperimentSettings {
        seed: a.seed,
        num_agents: a.sample_agents,
        episodes_per_agent: a.episodes,
        mode: a.thresholds.mode,
        thresholds: th,
    };
    settings.sampling_for_level(0).validate()?;
    let levels = harness::generate_levels(&template, settings.levels_seed(), a.levels)?;
    let report = harness::run_experiment(&suite, &agents, &levels, &levels, &settings)?;

    std::fs::create_dir_all(&a.out).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    let files = [
        ("report.csv", report.to_csv()),
        ("summary.json", report.to_json() + "\n"),
        ("levels.json", serde_json::to_string_pretty(&levels).expect("levels serialize") + "\n"),
    ];
    let mut m = RunManifest::new("experiment", a).input(&a.suite, &suite_text);
    if let (Some(p), Some(t)) = (&a.template, &template_text) {
        m = m.input(p, t);
    }
    for (name, body) in &files {
        let p = a.out.join(name);
        write_atomic(&p, body.as_bytes())?;
        m.outputs.push(p);
    }
    m.seeds = json!({
        "seed": a.seed,
        "levels": levels.seed,
        "agents": (0..agents.len()).map(|j| settings.agent_seed(j)).collect::<Vec<_>>(),
        "sampling": (0..levels.len()).map(|i| settings.sampling_for_level(i).master_seed).collect::<Vec<_>>(),
    });
    m.jobs = jobs;
    m.write(&a.out.join("manifest.json"))?;

    eprint!("{}", report.to_csv());
    match report.spearman_rho {
        Some(r) => eprintln!("spearman rho = {r:.4}"),
        None => eprintln!("spearman rho undefined: {}", report.spearman_note.as_deref().unwrap_or("")),
    }
    Ok(())
}
