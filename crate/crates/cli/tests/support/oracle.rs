//! Brute-force reference for the solution-space distance.
//!
//! Works on plain nested vectors and shares no code with the library: sets
//! are deduplicated and sorted here, every nearest neighbour is found by a
//! full scan, and the two normalizations are spelled out separately.

use std::cmp::Ordering;
use std::collections::BTreeSet;

pub type Seq = Vec<Vec<f64>>;

#[derive(Clone, Copy, Debug)]
pub enum Metric {
    Discrete,
    /// Euclidean with the given action-space diameter.
    Euclidean(f64),
}

impl Metric {
    fn max_a(self) -> f64 {
        match self {
            Metric::Discrete => 1.0,
            Metric::Euclidean(d) => d,
        }
    }

    fn action(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Discrete => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            Metric::Euclidean(_) => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }

    /// Per-step distance of two equal-length sequences, scaled to [0, 1].
    pub fn seq(self, a: &Seq, b: &Seq) -> f64 {
        assert_eq!(a.len(), b.len());
        let total: f64 = a.iter().zip(b).map(|(x, y)| self.action(x, y)).sum();
        (total / (a.len() as f64 * self.max_a())).min(1.0)
    }
}

fn cmp_seq(a: &Seq, b: &Seq) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.iter().zip(y) {
            match p.partial_cmp(q).unwrap() {
                Ordering::Equal => {}
                o => return o,
            }
        }
        match x.len().cmp(&y.len()) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn canonical(space: &[Seq]) -> Vec<Seq> {
    let mut v = space.to_vec();
    v.sort_by(cmp_seq);
    v.dedup_by(|a, b| cmp_seq(a, b) == Ordering::Equal);
    v
}

fn of_length(space: &[Seq], n: usize) -> Vec<Seq> {
    space.iter().filter(|s| s.len() == n).cloned().collect()
}

fn cmp_lists(a: &[Seq], b: &[Seq]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cmp_seq(x, y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Sum of nearest-neighbour distances from the smaller list into the larger.
/// Equal sizes: the canonically smaller list is the source, so the sum does
/// not depend on argument order.
pub fn matched_sum(metric: Metric, a: &[Seq], b: &[Seq]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (src, dst) = match a.len().cmp(&b.len()) {
        Ordering::Less => (a, b),
        Ordering::Greater => (b, a),
        Ordering::Equal if cmp_lists(a, b) != Ordering::Greater => (a, b),
        Ordering::Equal => (b, a),
    };
    src.iter().map(|s| dst.iter().map(|t| metric.seq(s, t)).fold(f64::INFINITY, f64::min)).sum()
}

#[derive(Debug, Clone)]
pub struct Breakdown {
    pub total_a: usize,
    pub total_b: usize,
    /// Per length: (|A_n|, |B_n|, matched sum).
    pub parts: Vec<(usize, usize, f64)>,
}

impl Breakdown {
    pub fn m(&self) -> f64 {
        self.total_a.max(self.total_b) as f64
    }

    pub fn literal(&self) -> f64 {
        let m = self.m();
        self.parts.iter().map(|&(na, nb, s)| (na as f64 - nb as f64 + s) / m).sum::<f64>() / m
    }

    pub fn single(&self) -> f64 {
        self.parts.iter().map(|&(na, nb, s)| na as f64 - nb as f64 + s).sum::<f64>() / self.m()
    }

    pub fn matched_total(&self) -> f64 {
        self.parts.iter().map(|p| p.2).sum()
    }
}

/// `None` when both spaces are empty.
pub fn breakdown(metric: Metric, a: &[Seq], b: &[Seq]) -> Option<Breakdown> {
    let (a, b) = (canonical(a), canonical(b));
    if a.is_empty() && b.is_empty() {
        return None;
    }
    let lengths: BTreeSet<usize> = a.iter().chain(&b).map(Vec::len).collect();
    let parts = lengths
        .into_iter()
        .map(|n| {
            let (an, bn) = (of_length(&a, n), of_length(&b, n));
            (an.len(), bn.len(), matched_sum(metric, &an, &bn))
        })
        .collect();
    Some(Breakdown { total_a: a.len(), total_b: b.len(), parts })
}

/// Every action sequence of a gridnav world, checked one by one by walking
/// the grid. Moves are N, S, E, W; off-grid moves stay put; wall contact
/// either stays put or ends the episode without reward.
pub struct GridOracle {
    pub width: i64,
    pub height: i64,
    pub walls: Vec<(i64, i64)>,
    pub start: (i64, i64),
    pub goal: (i64, i64),
    pub horizon: usize,
    pub wall_fails: bool,
}

pub const MOVES: [(i64, i64); 4] = [(0, 1), (0, -1), (1, 0), (-1, 0)];

impl GridOracle {
    fn solves(&self, seq: &[usize]) -> bool {
        let mut p = self.start;
        for (i, &m) in seq.iter().enumerate() {
            let q = (p.0 + MOVES[m].0, p.1 + MOVES[m].1);
            let on_grid = q.0 >= 0 && q.1 >= 0 && q.0 < self.width && q.1 < self.height;
            if on_grid && self.walls.contains(&q) {
                if self.wall_fails {
                    return false;
                }
            } else if on_grid {
                p = q;
            }
            if p == self.goal {
                return i + 1 == seq.len();
            }
        }
        false
    }

    /// All solutions, shortest first, canonical order within a length.
    pub fn solutions(&self) -> Vec<Seq> {
        let mut out = Vec::new();
        for len in 1..=self.horizon {
            for code in 0..4usize.pow(len as u32) {
                let seq: Vec<usize> = (0..len).map(|i| (code / 4usize.pow(i as u32)) % 4).collect();
                if self.solves(&seq) {
                    out.push(
                        seq.iter().map(|&m| vec![MOVES[m].0 as f64, MOVES[m].1 as f64]).collect(),
                    );
                }
            }
        }
        let mut out = canonical(&out);
        out.sort_by_key(Vec::len);
        out
    }
}
