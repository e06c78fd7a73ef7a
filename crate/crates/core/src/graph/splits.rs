use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Some(SplitTag::Train),
            "val" | "valid" | "validation" => Some(SplitTag::Val),
            "test" => Some(SplitTag::Test),
            _ => None,
        }
    }
}

/// Relative train/val/test proportions; normalized on use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 2.0,
            val: 4.0,
            test: 4.0,
        }
    }
}

impl SplitRatios {
    fn normalized(&self) -> Result<[f64; 3]> {
        let r = [self.train, self.val, self.test];
        if r.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::invalid(format!("split ratios {r:?} must be >= 0")));
        }
        let sum: f64 = r.iter().sum();
        if sum <= 0.0 {
            return Err(Error::invalid("split ratios sum to zero"));
        }
        Ok(r.map(|x| x / sum))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSplit {
    pub tags: Vec<SplitTag>,
}

impl NodeSplit {
    pub fn count(&self, tag: SplitTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }

    pub fn mask(&self, tag: SplitTag) -> Vec<bool> {
        self.tags.iter().map(|&t| t == tag).collect()
    }
}

/// Largest-remainder allocation of `n` items over `ratios`.
fn allocate(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let raw = ratios.map(|r| r * n as f64);
    let mut counts = raw.map(|x| x.floor() as usize);
    let mut left = n - counts.iter().sum::<usize>();
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if ratios[i] > 0.0 {
            counts[i] += 1;
            left -= 1;
        }
    }
    counts
}

/// Per-class stratified random split.
///
/// A class with fewer than three nodes gets at least one Train node; the
/// remainder of such a class goes to Test.
pub fn make_splits(g: &Graph, ratios: SplitRatios, seed: u64) -> Result<NodeSplit> {
    let ratios = ratios.normalized()?;
    let mut rng = seeded(seed);
    let mut tags = vec![SplitTag::Test; g.num_nodes()];
    for class in 0..g.num_classes() {
        let mut members: Vec<usize> = (0..g.num_nodes())
            .filter(|&v| g.labels()[v] == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let mut counts = allocate(members.len(), &ratios);
        if members.len() < 3 {
            log::warn!(
                "class {class} has only {} nodes; assigning Train first",
                members.len()
            );
            let train = counts[0].max(1);
            counts = [train, 0, members.len() - train];
        }
        for (i, &v) in members.iter().enumerate() {
            tags[v] = if i < counts[0] {
                SplitTag::Train
            } else if i < counts[0] + counts[1] {
                SplitTag::Val
            } else {
                SplitTag::Test
            };
        }
    }
    Ok(NodeSplit { tags })
}
