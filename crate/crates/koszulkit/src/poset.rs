//! Finite posets presented by Hasse diagrams.
//!
//! A poset is built from an ordered element list and a set of relation
//! pairs. The pairs may be covers or any acyclic relation; the transitive
//! reduction is taken internally, so the stored cover set is always the
//! Hasse diagram. Gradedness (every interval has all maximal chains of
//! equal length) is checked once at construction; non-graded posets are
//! representable, but homological operations refuse them.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("duplicate element identifier {0:?}")]
    DuplicateElement(String),
    #[error("relation mentions unknown element {0:?}")]
    UnknownElement(String),
    #[error("cover relation contains a cycle through {0:?}")]
    Cycle(String),
    #[error("elements {0:?} and {1:?} are incomparable")]
    Incomparable(String, String),
    #[error("poset is not graded: interval [{x}, {y}] has maximal chains of lengths {short} and {long}")]
    NotGraded {
        x: String,
        y: String,
        short: usize,
        long: usize,
    },
    #[error("invalid frontier: {0}")]
    InvalidFrontier(String),
}

/// Outcome of the gradedness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub graded: bool,
    /// `(x, y, shortest, longest)` for one offending interval, when not graded.
    pub witness: Option<(String, String, usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Grading {
    /// `lengths[i][j] = Some(l)` iff `i <= j`, with the common maximal-chain length.
    Graded(Vec<Vec<Option<usize>>>),
    NotGraded {
        x: usize,
        y: usize,
        short: usize,
        long: usize,
    },
}

/// A finite poset with a fixed element order.
///
/// Element identifiers are opaque strings; all deterministic orderings
/// (chain enumeration, matrix bases) follow the element sequence order.
/// Values are immutable after construction.
#[derive(Clone, Debug)]
pub struct Poset {
    elements: Vec<String>,
    index: HashMap<String, usize>,
    covers: Vec<(usize, usize)>,
    up_covers: Vec<Vec<usize>>,
    down_covers: Vec<Vec<usize>>,
    leq: Vec<Vec<bool>>,
    grading: Grading,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.covers == other.covers
    }
}

impl Eq for Poset {}

impl Poset {
    /// Builds a poset from elements (order significant) and relation pairs.
    ///
    /// The pairs may include transitive or reflexive relations; the cover
    /// set is recovered by transitive reduction.
    pub fn new<S: AsRef<str>>(elements: &[S], relations: &[(S, S)]) -> Result<Poset, PosetError> {
        let elements: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(PosetError::DuplicateElement(e.clone()));
            }
        }
        let n = elements.len();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (a, b) in relations {
            let &i = index
                .get(a.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(a.as_ref().to_string()))?;
            let &j = index
                .get(b.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(b.as_ref().to_string()))?;
            if i != j {
                adj[i].insert(j);
            }
        }
        // Kahn toposort; a leftover node witnesses a cycle.
        let mut indeg = vec![0usize; n];
        for out in &adj {
            for &j in out {
                indeg[j] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            topo.push(i);
            for &j in &adj[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
        if topo.len() != n {
            let culprit = (0..n).find(|&i| indeg[i] > 0).unwrap();
            return Err(PosetError::Cycle(elements[culprit].clone()));
        }
        // reflexive-transitive closure
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &i in topo.iter().rev() {
            for &j in &adj[i] {
                let reachable = leq[j].clone();
                for (dst, src) in leq[i].iter_mut().zip(reachable) {
                    *dst |= src;
                }
            }
        }
        // transitive reduction: (i, j) is a cover iff nothing sits strictly between
        let mut covers = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || !leq[i][j] {
                    continue;
                }
                let implied = (0..n).any(|k| k != i && k != j && leq[i][k] && leq[k][j]);
                if !implied {
                    covers.push((i, j));
                }
            }
        }
        covers.sort_unstable();
        let mut up_covers = vec![Vec::new(); n];
        let mut down_covers = vec![Vec::new(); n];
        for &(i, j) in &covers {
            up_covers[i].push(j);
            down_covers[j].push(i);
        }
        for v in up_covers.iter_mut().chain(down_covers.iter_mut()) {
            v.sort_unstable();
        }
        let grading = compute_grading(n, &up_covers, &leq);
        Ok(Poset {
            elements,
            index,
            covers,
            up_covers,
            down_covers,
            leq,
            grading,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn name(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require_element(&self, name: &str) -> Result<usize, PosetError> {
        self.index_of(name)
            .ok_or_else(|| PosetError::UnknownElement(name.to_string()))
    }

    /// Cover pairs in element-index order.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn cover_pairs(&self) -> Vec<(String, String)> {
        self.covers
            .iter()
            .map(|&(i, j)| (self.elements[i].clone(), self.elements[j].clone()))
            .collect()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq[i][j]
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq[i][j] || self.leq[j][i]
    }

    /// Cover successors of `i`, in element order.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.up_covers[i]
    }

    /// Cover predecessors of `i`, in element order.
    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.down_covers[i]
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.up_covers[i].is_empty()).collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.down_covers[i].is_empty()).collect()
    }

    pub fn is_graded(&self) -> bool {
        matches!(self.grading, Grading::Graded(_))
    }

    pub fn validate_graded(&self) -> ValidationReport {
        match &self.grading {
            Grading::Graded(_) => ValidationReport {
                graded: true,
                witness: None,
            },
            Grading::NotGraded { x, y, short, long } => ValidationReport {
                graded: false,
                witness: Some((
                    self.elements[*x].clone(),
                    self.elements[*y].clone(),
                    *short,
                    *long,
                )),
            },
        }
    }

    pub fn require_graded(&self) -> Result<(), PosetError> {
        match &self.grading {
            Grading::Graded(_) => Ok(()),
            Grading::NotGraded { x, y, short, long } => Err(PosetError::NotGraded {
                x: self.elements[*x].clone(),
                y: self.elements[*y].clone(),
                short: *short,
                long: *long,
            }),
        }
    }

    /// Interval length by element index; requires a graded poset.
    pub fn length_idx(&self, i: usize, j: usize) -> Result<usize, PosetError> {
        match &self.grading {
            Grading::NotGraded { .. } => Err(self.require_graded().unwrap_err()),
            Grading::Graded(lengths) => lengths[i][j].ok_or_else(|| {
                PosetError::Incomparable(self.elements[i].clone(), self.elements[j].clone())
            }),
        }
    }

    /// The length `l([x, y])` of the interval from `x` to `y`.
    pub fn interval_length(&self, x: &str, y: &str) -> Result<usize, PosetError> {
        let i = self.require_element(x)?;
        let j = self.require_element(y)?;
        self.length_idx(i, j)
    }

    /// Largest interval length occurring in the poset (0 for antichains).
    pub fn max_interval_length(&self) -> usize {
        match &self.grading {
            Grading::NotGraded { .. } => 0,
            Grading::Graded(lengths) => lengths
                .iter()
                .flatten()
                .filter_map(|l| *l)
                .max()
                .unwrap_or(0),
        }
    }

    /// All intervals of length exactly `p`, as index pairs in lex order.
    pub fn intervals_of_length(&self, p: usize) -> Vec<(usize, usize)> {
        let Grading::Graded(lengths) = &self.grading else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (i, row) in lengths.iter().enumerate() {
            for (j, l) in row.iter().enumerate() {
                if *l == Some(p) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The meet of `i` and `j`: the unique maximum of their common lower
    /// bounds, if it exists.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.len())
            .filter(|&k| self.leq[k][i] && self.leq[k][j])
            .collect();
        unique_maximum(self, &lower)
    }

    /// The join of `i` and `j`: the unique minimum of their common upper bounds.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let upper: Vec<usize> = (0..self.len())
            .filter(|&k| self.leq[i][k] && self.leq[j][k])
            .collect();
        let maximal_in_dual: Vec<usize> = upper
            .iter()
            .copied()
            .filter(|&k| !upper.iter().any(|&l| l != k && self.leq[l][k]))
            .collect();
        match maximal_in_dual.as_slice() {
            [m] => Some(*m),
            _ => None,
        }
    }

    /// The order-reversed poset; an involution preserving gradedness.
    pub fn dual(&self) -> Poset {
        let rev: Vec<(String, String)> = self
            .covers
            .iter()
            .map(|&(i, j)| (self.elements[j].clone(), self.elements[i].clone()))
            .collect();
        Poset::new(&self.elements, &rev).expect("reversing a DAG keeps it acyclic")
    }

    /// Disjoint union; no relations across the two parts.
    ///
    /// If the identifier sets collide, every right-hand element is prefixed
    /// with `"r."` (repeatedly, until fresh).
    pub fn disjoint_union(&self, other: &Poset) -> Poset {
        let taken: BTreeSet<&String> = self.elements.iter().collect();
        let rename = |name: &String| {
            let mut out = name.clone();
            while taken.contains(&out) {
                out = format!("r.{out}");
            }
            out
        };
        let collide = other.elements.iter().any(|e| taken.contains(e));
        let right: Vec<String> = if collide {
            other.elements.iter().map(rename).collect()
        } else {
            other.elements.clone()
        };
        let mut elements = self.elements.clone();
        elements.extend(right.iter().cloned());
        let mut relations: Vec<(String, String)> = self.cover_pairs();
        for &(i, j) in &other.covers {
            relations.push((right[i].clone(), right[j].clone()));
        }
        Poset::new(&elements, &relations).expect("disjoint union of valid posets is valid")
    }

    /// The induced subposet on all elements except `removed`.
    pub fn without(&self, removed: usize) -> Poset {
        let elements: Vec<String> = self
            .elements
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != removed)
            .map(|(_, e)| e.clone())
            .collect();
        let mut relations = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != removed && j != removed && self.lt(i, j) {
                    relations.push((self.elements[i].clone(), self.elements[j].clone()));
                }
            }
        }
        Poset::new(&elements, &relations).expect("induced subposet is valid")
    }

    /// Checks condition (†) for a frontier: either a singleton, or all
    /// frontier elements share a common cover-predecessor `s` that is the
    /// meet of every pair.
    pub fn check_dagger<S: AsRef<str>>(&self, frontier: &[S]) -> Result<FrontierCheck, PosetError> {
        let mut idx = Vec::new();
        for name in frontier {
            idx.push(self.require_element(name.as_ref())?);
        }
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return Err(PosetError::InvalidFrontier("frontier is empty".into()));
        }
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                if self.comparable(idx[a], idx[b]) {
                    return Err(PosetError::InvalidFrontier(format!(
                        "elements {:?} and {:?} are comparable",
                        self.elements[idx[a]], self.elements[idx[b]]
                    )));
                }
            }
        }
        if idx.len() == 1 {
            return Ok(FrontierCheck::satisfied_singleton());
        }
        // candidate pivots: common cover-predecessors of the whole frontier
        let common: Vec<usize> = (0..self.len())
            .filter(|&s| idx.iter().all(|&u| self.down_covers[u].contains(&s)))
            .collect();
        if common.is_empty() {
            return Ok(FrontierCheck::failed(FrontierFailure::NoCommonPivot, None));
        }
        let mut pivot: Option<usize> = None;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                let pair = Some((
                    self.elements[idx[a]].clone(),
                    self.elements[idx[b]].clone(),
                ));
                let Some(m) = self.meet(idx[a], idx[b]) else {
                    return Ok(FrontierCheck::failed(FrontierFailure::PairWithoutMeet, pair));
                };
                match pivot {
                    None => pivot = Some(m),
                    Some(p) if p != m => {
                        return Ok(FrontierCheck::failed(FrontierFailure::MeetNotPivot, pair));
                    }
                    _ => {}
                }
            }
        }
        let s = pivot.unwrap();
        if !common.contains(&s) {
            // the common meet exists but is not a cover of every frontier element
            return Ok(FrontierCheck::failed(FrontierFailure::PivotNotCover, None));
        }
        Ok(FrontierCheck::satisfied(self.elements[s].clone()))
    }

    /// Condition (‡): condition (†) in the dual poset.
    pub fn check_ddagger<S: AsRef<str>>(&self, frontier: &[S]) -> Result<FrontierCheck, PosetError> {
        self.dual().check_dagger(frontier)
    }

    /// DOT rendering of the Hasse diagram, covers drawn upward, elements
    /// grouped by distance from the minimal elements.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph poset {\n  rankdir=BT;\n");
        for e in &self.elements {
            let _ = writeln!(out, "  {};", dot_quote(e));
        }
        for &(i, j) in &self.covers {
            let _ = writeln!(
                out,
                "  {} -> {};",
                dot_quote(&self.elements[i]),
                dot_quote(&self.elements[j])
            );
        }
        let ranks = self.ranks_from_minimal();
        let max_rank = ranks.iter().copied().max().unwrap_or(0);
        for r in 0..=max_rank {
            let members: Vec<&String> = self
                .elements
                .iter()
                .enumerate()
                .filter(|&(i, _)| ranks[i] == r)
                .map(|(_, e)| e)
                .collect();
            if members.is_empty() {
                continue;
            }
            out.push_str("  { rank=same;");
            for m in members {
                let _ = write!(out, " {};", dot_quote(m));
            }
            out.push_str(" }\n");
        }
        out.push_str("}\n");
        out
    }

    /// Longest cover-path distance from a minimal element.
    pub fn ranks_from_minimal(&self) -> Vec<usize> {
        let mut rank = vec![0usize; self.len()];
        let order = self.topo_order();
        for &i in &order {
            for &j in &self.up_covers[i] {
                rank[j] = rank[j].max(rank[i] + 1);
            }
        }
        rank
    }

    fn topo_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = (0..self.len()).map(|i| self.down_covers[i].len()).collect();
        let mut queue: Vec<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(i) = queue.pop() {
            order.push(i);
            for &j in &self.up_covers[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
        order
    }
}

fn compute_grading(n: usize, up_covers: &[Vec<usize>], leq: &[Vec<bool>]) -> Grading {
    // shortest/longest cover-path DP from every source
    let mut lengths = vec![vec![None; n]; n];
    let order = {
        let mut indeg = vec![0usize; n];
        for out in up_covers {
            for &j in out {
                indeg[j] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            for &j in &up_covers[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
        order
    };
    for src in 0..n {
        let mut short = vec![usize::MAX; n];
        let mut long = vec![0usize; n];
        short[src] = 0;
        for &i in &order {
            if short[i] == usize::MAX {
                continue;
            }
            for &j in &up_covers[i] {
                short[j] = short[j].min(short[i] + 1);
                long[j] = long[j].max(long[i] + 1);
            }
        }
        for dst in 0..n {
            if leq[src][dst] {
                if short[dst] != long[dst] {
                    return Grading::NotGraded {
                        x: src,
                        y: dst,
                        short: short[dst],
                        long: long[dst],
                    };
                }
                lengths[src][dst] = Some(long[dst]);
            }
        }
    }
    Grading::Graded(lengths)
}

fn unique_maximum(p: &Poset, set: &[usize]) -> Option<usize> {
    let maxima: Vec<usize> = set
        .iter()
        .copied()
        .filter(|&k| !set.iter().any(|&l| l != k && p.leq(k, l)))
        .collect();
    match maxima.as_slice() {
        [m] => Some(*m),
        _ => None,
    }
}

fn dot_quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Result of a (†)/(‡) frontier check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontierCheck {
    pub satisfied: bool,
    /// The pivot `s`, present whenever the check succeeds on two or more elements.
    pub pivot: Option<String>,
    pub failure_reason: Option<FrontierFailure>,
    /// An offending pair, when the failure is tied to one.
    pub offending_pair: Option<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrontierFailure {
    NoCommonPivot,
    PairWithoutMeet,
    MeetNotPivot,
    PivotNotCover,
}

impl std::fmt::Display for FrontierFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FrontierFailure::NoCommonPivot => "no_common_pivot",
            FrontierFailure::PairWithoutMeet => "pair_without_meet",
            FrontierFailure::MeetNotPivot => "meet_not_pivot",
            FrontierFailure::PivotNotCover => "pivot_not_cover",
        };
        f.write_str(s)
    }
}

impl FrontierCheck {
    fn satisfied_singleton() -> Self {
        FrontierCheck {
            satisfied: true,
            pivot: None,
            failure_reason: None,
            offending_pair: None,
        }
    }

    fn satisfied(pivot: String) -> Self {
        FrontierCheck {
            satisfied: true,
            pivot: Some(pivot),
            failure_reason: None,
            offending_pair: None,
        }
    }

    fn failed(reason: FrontierFailure, pair: Option<(String, String)>) -> Self {
        FrontierCheck {
            satisfied: false,
            pivot: None,
            failure_reason: Some(reason),
            offending_pair: pair,
        }
    }
}

// ---------------------------------------------------------------------------
// JSON poset format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PosetJson {
    elements: Vec<String>,
    covers: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum PosetIoError {
    #[error("malformed poset JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// Parses the JSON poset format: `{"elements": [...], "covers": [["x","y"], ...]}`.
/// Unknown keys are rejected.
pub fn poset_from_json(text: &str) -> Result<Poset, PosetIoError> {
    let raw: PosetJson = serde_json::from_str(text)?;
    Ok(Poset::new(&raw.elements, &raw.covers)?)
}

/// Serializes the Hasse diagram to the JSON poset format.
pub fn poset_to_json(p: &Poset) -> String {
    let raw = PosetJson {
        elements: p.elements().to_vec(),
        covers: p.cover_pairs(),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("poset serialization cannot fail");
    s.push('\n');
    s
}
