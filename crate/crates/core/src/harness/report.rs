//! Report tables: one row per novelty, plus per-class aggregates.

use serde::{Deserialize, Serialize};

use super::agents::AgentSpec;
use super::stats::spearman_rho;
use super::ExperimentSettings;
use crate::DifficultyClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentPass {
    pub agent: String,
    pub pre_pass: f64,
    pub post_pass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltyRow {
    pub novelty_id: String,
    pub status: RowStatus,
    /// Mean distance over the conclusive level pairs.
    pub distance: Option<f64>,
    pub class: Option<DifficultyClass>,
    /// Pass rates in [0, 1], averaged over agents.
    pub pre_pass: Option<f64>,
    pub post_pass: Option<f64>,
    /// `(post_pass - pre_pass) * 100`.
    pub pass_diff_pct: Option<f64>,
    pub level_pairs: usize,
    pub conclusive_pairs: usize,
    pub agents: Vec<AgentPass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl NoveltyRow {
    pub(crate) fn conclusive(
        id: &str,
        distance: f64,
        class: DifficultyClass,
        level_pairs: usize,
        conclusive_pairs: usize,
        agents: Vec<AgentPass>,
    ) -> Self {
        let n = agents.len() as f64;
        let pre = agents.iter().map(|a| a.pre_pass).sum::<f64>() / n;
        let post = agents.iter().map(|a| a.post_pass).sum::<f64>() / n;
        Self {
            novelty_id: id.to_string(),
            status: RowStatus::Ok,
            distance: Some(distance),
            class: Some(class),
            pre_pass: Some(pre),
            post_pass: Some(post),
            pass_diff_pct: Some((post - pre) * 100.0),
            level_pairs,
            conclusive_pairs,
            agents,
            note: None,
        }
    }

    pub(crate) fn inconclusive(id: &str, level_pairs: usize, note: String) -> Self {
        Self {
            novelty_id: id.to_string(),
            status: RowStatus::Inconclusive,
            distance: None,
            class: None,
            pre_pass: None,
            post_pass: None,
            pass_diff_pct: None,
            level_pairs,
            conclusive_pairs: 0,
            agents: Vec::new(),
            note: Some(note),
        }
    }

    /// Pre minus post pass rate.
    pub fn pass_drop(&self) -> Option<f64> {
        Some(self.pre_pass? - self.post_pass?)
    }
}

/// Mean post-novel pass rate of the rows predicted to be in one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassAggregate {
    pub class: DifficultyClass,
    pub rows: usize,
    pub mean_post_pass_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<NoveltyRow>,
    pub class_aggregates: Vec<ClassAggregate>,
    /// Rank correlation between distance and pass-rate drop over conclusive rows.
    pub spearman_rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spearman_note: Option<String>,
    pub settings: ExperimentSettings,
    pub agents: Vec<AgentSpec>,
    pub levels_seed: u64,
    pub evaluation_levels_seed: u64,
}

impl EvalReport {
    pub(crate) fn from_rows(
        rows: Vec<NoveltyRow>,
        settings: ExperimentSettings,
        agents: Vec<AgentSpec>,
        levels_seed: u64,
        evaluation_levels_seed: u64,
    ) -> Self {
        let class_aggregates = [DifficultyClass::Easy, DifficultyClass::Medium, DifficultyClass::Hard]
            .into_iter()
            .filter_map(|class| {
                let posts: Vec<f64> =
                    rows.iter().filter(|r| r.class == Some(class)).filter_map(|r| r.post_pass).collect();
                (!posts.is_empty()).then(|| ClassAggregate {
                    class,
                    rows: posts.len(),
                    mean_post_pass_pct: posts.iter().sum::<f64>() / posts.len() as f64 * 100.0,
                })
            })
            .collect();

        let (xs, ys): (Vec<f64>, Vec<f64>) =
            rows.iter().filter_map(|r| Some((r.distance?, r.pass_drop()?))).unzip();
        let (spearman_rho, spearman_note) = match spearman_rho(&xs, &ys) {
            Ok(rho) => (Some(rho), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            rows,
            class_aggregates,
            spearman_rho,
            spearman_note,
            settings,
            agents,
            levels_seed,
            evaluation_levels_seed,
        }
    }

    /// One line per novelty: distance, predicted class, and pass rates in percent.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "novelty",
            "distance",
            "difficulty",
            "pre_pass_pct",
            "post_pass_pct",
            "pass_pct_diff",
            "level_pairs",
            "conclusive_pairs",
            "status",
        ])
        .expect("in-memory csv");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let pct = |v: Option<f64>| v.map(|x| format!("{:.2}", x * 100.0)).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.novelty_id.clone(),
                opt(r.distance),
                r.class.map(|c| c.letter().to_string()).unwrap_or_default(),
                pct(r.pre_pass),
                pct(r.post_pass),
                r.pass_diff_pct.map(|x| format!("{x:.2}")).unwrap_or_default(),
                r.level_pairs.to_string(),
                r.conclusive_pairs.to_string(),
                match r.status {
                    RowStatus::Ok => "ok".into(),
                    RowStatus::Inconclusive => "inconclusive".into(),
                },
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
