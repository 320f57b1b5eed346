//! Predictor-to-group memberships, possibly overlapping.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

/// For each predictor `p`, the set `g(p)` of groups it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStructure {
    memberships: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
}

impl GroupStructure {
    /// Builds from `(predictor, group)` pairs over `n_pred` predictors.
    /// Group indices must be contiguous from 0: every group in `0..G` needs
    /// at least one member.
    pub fn from_pairs(n_pred: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_pred];
        let mut n_groups = 0;
        for (p, g) in pairs {
            if p >= n_pred {
                return Err(Error::Data(format!("predictor index {p} out of range (P = {n_pred})")));
            }
            sets[p].insert(g);
            n_groups = n_groups.max(g + 1);
        }
        let memberships: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let mut members = vec![Vec::new(); n_groups];
        for (p, gs) in memberships.iter().enumerate() {
            for &g in gs {
                members[g].push(p);
            }
        }
        if let Some(g) = members.iter().position(|m| m.is_empty()) {
            return Err(Error::Data(format!("group {g} has no members")));
        }
        if n_groups == 0 {
            return Err(Error::Data("group structure has no groups".into()));
        }
        Ok(Self { memberships, members })
    }

    /// Builds from explicit group member lists.
    pub fn from_groups(n_pred: usize, groups: &[Vec<usize>]) -> Result<Self> {
        Self::from_pairs(
            n_pred,
            groups.iter().enumerate().flat_map(|(g, ps)| ps.iter().map(move |&p| (p, g))),
        )
    }

    /// Consecutive disjoint blocks of `size` predictors (the last may be shorter).
    pub fn contiguous(n_pred: usize, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::config("group size must be positive"));
        }
        Self::from_pairs(n_pred, (0..n_pred).map(|p| (p, p / size)))
    }

    /// Reads `predictor_index,group_index` lines (0-based). A non-numeric
    /// first line is treated as a header; blank lines and `#` comments are skipped.
    pub fn read_csv(path: impl AsRef<Path>, n_pred: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let (a, b) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
            match (a.parse::<usize>(), b.parse::<usize>()) {
                (Ok(p), Ok(g)) if it.next().is_none() => pairs.push((p, g)),
                _ if lineno == 0 && pairs.is_empty() => continue,
                _ => {
                    return Err(Error::Data(format!(
                        "group file line {}: expected 'predictor_index,group_index', got '{line}'",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_pairs(n_pred, pairs)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::from("predictor_index,group_index\n");
        for (p, gs) in self.memberships.iter().enumerate() {
            for g in gs {
                out.push_str(&format!("{p},{g}\n"));
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn n_pred(&self) -> usize {
        self.memberships.len()
    }

    pub fn n_groups(&self) -> usize {
        self.members.len()
    }

    /// `g(p)`, sorted ascending.
    pub fn groups_of(&self, p: usize) -> &[usize] {
        &self.memberships[p]
    }

    pub fn members(&self, g: usize) -> &[usize] {
        &self.members[g]
    }

    /// Every predictor belongs to exactly one group.
    pub fn is_partition(&self) -> bool {
        self.memberships.iter().all(|gs| gs.len() == 1)
    }

    pub fn covers_all(&self) -> bool {
        self.memberships.iter().all(|gs| !gs.is_empty())
    }
}
