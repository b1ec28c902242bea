//! Finite strict partial orders over roles.
//!
//! A [`RoleGraph`] keeps only the direct edge relation the caller supplied.
//! Edges are stored junior-first: `(ED, E1)` means `ED < E1`. Reachability is
//! derived on demand and cached for the lifetime of the (immutable) value.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::ids::RoleId;

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(len: usize) -> Self {
        BitSet(vec![0; len.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.0[w] & b == 0;
        self.0[w] |= b;
        fresh
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1u64 << (i % 64)) != 0
    }
}

/// The transitive closure of a direct-edge relation, indexed by role.
///
/// `reaches(a, b)` holds when a path of one or more edges leads from `a` up
/// to `b`. The relation may contain cycles when built by
/// [`RoleGraph::closure_with`].
#[derive(Debug, Clone)]
pub struct Reachability {
    names: Vec<RoleId>,
    index: HashMap<RoleId, usize>,
    up: Vec<BitSet>,
}

impl Reachability {
    fn build<'a>(nodes: &BTreeSet<RoleId>, edges: impl Iterator<Item = (&'a RoleId, &'a RoleId)>) -> Self {
        let names: Vec<RoleId> = nodes.iter().cloned().collect();
        let index: HashMap<RoleId, usize> = names.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        for (j, s) in edges {
            if let (Some(&a), Some(&b)) = (index.get(j), index.get(s)) {
                adj[a].push(b);
            }
        }
        let mut up = Vec::with_capacity(n);
        for start in 0..n {
            let mut seen = BitSet::new(n);
            let mut stack: Vec<usize> = adj[start].clone();
            while let Some(v) = stack.pop() {
                if seen.insert(v) {
                    stack.extend(adj[v].iter().copied());
                }
            }
            up.push(seen);
        }
        Reachability { names, index, up }
    }

    pub fn index_of(&self, role: &str) -> Option<usize> {
        self.index.get(role).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &RoleId {
        &self.names[i]
    }

    /// Path of length >= 1 from `a` up to `b`, by index.
    pub fn reaches_idx(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    /// Reflexive-transitive membership `(a, b) ∈ E*`, by index.
    pub fn reflexive_idx(&self, a: usize, b: usize) -> bool {
        a == b || self.up[a].contains(b)
    }

    /// Reflexive-transitive membership `(a, b) ∈ E*`. Unknown names are never related.
    pub fn contains(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.reflexive_idx(i, j),
            _ => false,
        }
    }

    /// Transitive membership `(a, b) ∈ E+`.
    pub fn contains_strict(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.reaches_idx(i, j),
            _ => false,
        }
    }

    fn has_cycle(&self) -> Option<usize> {
        (0..self.names.len()).find(|&i| self.up[i].contains(i))
    }
}

/// A finite strict partial order stored as its direct-edge relation.
#[derive(Debug, Clone, Default)]
pub struct RoleGraph {
    nodes: BTreeSet<RoleId>,
    edges: BTreeSet<(RoleId, RoleId)>,
    closure: OnceLock<Arc<Reachability>>,
}

impl PartialEq for RoleGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for RoleGraph {}

impl RoleGraph {
    /// Builds a graph from nodes and junior-first edges, rejecting unknown
    /// endpoints, self-edges, repeated edges and cycles.
    pub fn new<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator,
        N::Item: Into<RoleId>,
        E: IntoIterator<Item = (RoleId, RoleId)>,
    {
        let nodes: BTreeSet<RoleId> = nodes.into_iter().map(Into::into).collect();
        let mut set = BTreeSet::new();
        for (j, s) in edges {
            for r in [&j, &s] {
                if !nodes.contains(r) {
                    return Err(Error::unknown("role", r.as_str()));
                }
            }
            if j == s {
                return Err(Error::Cycle {
                    junior: j.to_string(),
                    senior: s.to_string(),
                });
            }
            if set.contains(&(j.clone(), s.clone())) {
                return Err(Error::DuplicateEdge {
                    junior: j.to_string(),
                    senior: s.to_string(),
                });
            }
            set.insert((j, s));
        }
        let graph = RoleGraph {
            nodes,
            edges: set,
            closure: OnceLock::new(),
        };
        if let Some(i) = graph.closure().has_cycle() {
            let r = graph.closure().name(i).to_string();
            return Err(Error::Cycle {
                junior: r.clone(),
                senior: r,
            });
        }
        Ok(graph)
    }

    pub fn nodes(&self) -> &BTreeSet<RoleId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(RoleId, RoleId)> {
        &self.edges
    }

    pub fn contains(&self, role: &str) -> bool {
        self.nodes.contains(role)
    }

    pub fn has_edge(&self, junior: &str, senior: &str) -> bool {
        self.edges.contains(&(RoleId::from(junior), RoleId::from(senior)))
    }

    /// Cached transitive closure of the direct edges.
    pub fn closure(&self) -> &Reachability {
        self.closure
            .get_or_init(|| Arc::new(Reachability::build(&self.nodes, self.edges.iter().map(|(a, b)| (a, b)))))
    }

    fn require(&self, role: &str) -> Result<usize> {
        self.closure()
            .index_of(role)
            .ok_or_else(|| Error::unknown("role", role))
    }

    /// Strict seniority: `a > b`.
    pub fn is_senior(&self, a: &str, b: &str) -> Result<bool> {
        let (ia, ib) = (self.require(a)?, self.require(b)?);
        Ok(self.closure().reaches_idx(ib, ia))
    }

    /// Strict juniority: `a < b`.
    pub fn is_junior(&self, a: &str, b: &str) -> Result<bool> {
        self.is_senior(b, a)
    }

    pub fn incomparable(&self, a: &str, b: &str) -> Result<bool> {
        let (ia, ib) = (self.require(a)?, self.require(b)?);
        let c = self.closure();
        Ok(ia != ib && !c.reaches_idx(ia, ib) && !c.reaches_idx(ib, ia))
    }

    /// The roles strictly between `x` and `y`: `{ r | x < r < y }`.
    pub fn open_range(&self, x: &str, y: &str) -> Result<BTreeSet<RoleId>> {
        let (ix, iy) = (self.require(x)?, self.require(y)?);
        let c = self.closure();
        Ok((0..c.len())
            .filter(|&r| c.reaches_idx(ix, r) && c.reaches_idx(r, iy))
            .map(|r| c.name(r).clone())
            .collect())
    }

    /// `r ∈ ⌈x, y⌉`; false when `r` is not a role.
    pub fn in_open_range(&self, r: &str, x: &str, y: &str) -> Result<bool> {
        let (ix, iy) = (self.require(x)?, self.require(y)?);
        let c = self.closure();
        Ok(match c.index_of(r) {
            Some(ir) => c.reaches_idx(ix, ir) && c.reaches_idx(ir, iy),
            None => false,
        })
    }

    /// All pairs of the transitive closure, junior-first (the relation RH⁺).
    pub fn transitive_pairs(&self) -> BTreeSet<(RoleId, RoleId)> {
        let c = self.closure();
        let mut out = BTreeSet::new();
        for a in 0..c.len() {
            for b in 0..c.len() {
                if c.reaches_idx(a, b) {
                    out.insert((c.name(a).clone(), c.name(b).clone()));
                }
            }
        }
        out
    }

    pub fn insert_edge(&self, junior: &str, senior: &str) -> Result<RoleGraph> {
        let (ij, is) = (self.require(junior)?, self.require(senior)?);
        if self.has_edge(junior, senior) {
            return Err(Error::DuplicateEdge {
                junior: junior.into(),
                senior: senior.into(),
            });
        }
        if ij == is || self.closure().reaches_idx(is, ij) {
            return Err(Error::Cycle {
                junior: junior.into(),
                senior: senior.into(),
            });
        }
        let mut edges = self.edges.clone();
        edges.insert((junior.into(), senior.into()));
        Ok(RoleGraph {
            nodes: self.nodes.clone(),
            edges,
            closure: OnceLock::new(),
        })
    }

    /// Removes a direct edge. Pairs that are only implied by the closure are
    /// rejected with `EdgeNotFound`.
    pub fn delete_edge(&self, junior: &str, senior: &str) -> Result<RoleGraph> {
        self.require(junior)?;
        self.require(senior)?;
        let key = (RoleId::from(junior), RoleId::from(senior));
        if !self.edges.contains(&key) {
            return Err(Error::EdgeNotFound {
                junior: junior.into(),
                senior: senior.into(),
            });
        }
        let mut edges = self.edges.clone();
        edges.remove(&key);
        Ok(RoleGraph {
            nodes: self.nodes.clone(),
            edges,
            closure: OnceLock::new(),
        })
    }

    /// The closure of the direct edges plus one hypothetical edge, without
    /// mutating the graph. Cycles are allowed in the result. Query it with
    /// [`Reachability::contains`] for the reflexive-transitive relation.
    pub fn closure_with(&self, junior: &str, senior: &str) -> Reachability {
        let extra = (RoleId::from(junior), RoleId::from(senior));
        Reachability::build(
            &self.nodes,
            self.edges.iter().chain(std::iter::once(&extra)).map(|(a, b)| (a, b)),
        )
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn example_rh() -> RoleGraph {
        let edges = [
            ("ED", "E1"),
            ("E1", "QE1"),
            ("E1", "PE1"),
            ("PE1", "PL1"),
            ("QE1", "PL1"),
            ("ED", "E2"),
            ("E2", "PE2"),
            ("E2", "QE2"),
            ("PE2", "PL2"),
            ("QE2", "PL2"),
            ("PL1", "DIR"),
            ("PL2", "DIR"),
        ];
        RoleGraph::new(
            ["ED", "E1", "PE1", "QE1", "PL1", "E2", "PE2", "QE2", "PL2", "DIR"],
            edges.iter().map(|(a, b)| (RoleId::from(*a), RoleId::from(*b))),
        )
        .unwrap()
    }

    fn names(set: &BTreeSet<RoleId>) -> Vec<&str> {
        set.iter().map(RoleId::as_str).collect()
    }

    #[test]
    fn seniority_on_example() {
        let g = example_rh();
        assert!(g.is_senior("DIR", "ED").unwrap());
        assert!(!g.is_senior("PE1", "QE1").unwrap());
        assert!(!g.is_senior("PE1", "PE1").unwrap());
        assert!(g.incomparable("PE1", "QE1").unwrap());
        assert!(!g.incomparable("ED", "DIR").unwrap());
        assert!(!g.incomparable("E1", "E1").unwrap());
        assert!(matches!(g.is_senior("NOPE", "ED"), Err(Error::UnknownEntity { .. })));
    }

    #[test]
    fn open_ranges_on_example() {
        let g = example_rh();
        assert_eq!(names(&g.open_range("E1", "PL1").unwrap()), ["PE1", "QE1"]);
        assert_eq!(
            names(&g.open_range("ED", "DIR").unwrap()),
            ["E1", "E2", "PE1", "PE2", "PL1", "PL2", "QE1", "QE2"]
        );
        assert!(g.open_range("E1", "E1").unwrap().is_empty());
    }

    #[test]
    fn insert_and_delete() {
        let g = example_rh();
        let g2 = g.insert_edge("PE1", "QE1").unwrap();
        assert!(g2.is_senior("QE1", "PE1").unwrap());
        assert!(matches!(g.insert_edge("DIR", "ED"), Err(Error::Cycle { .. })));
        assert!(matches!(g.insert_edge("ED", "E1"), Err(Error::DuplicateEdge { .. })));
        assert_eq!(g2.delete_edge("PE1", "QE1").unwrap(), g);
        assert!(matches!(g.delete_edge("ED", "DIR"), Err(Error::EdgeNotFound { .. })));
        let g3 = g.delete_edge("ED", "E1").unwrap();
        assert!(!g3.has_edge("ED", "E1"));
        assert!(!g3.is_senior("E1", "ED").unwrap());
    }

    #[test]
    fn single_insert_on_edgeless_graph() {
        let g = RoleGraph::new(["a", "b"], []).unwrap();
        let g = g.insert_edge("a", "b").unwrap();
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn hypothetical_closure() {
        let g = example_rh();
        let rel = g.closure_with("PE1", "QE1");
        assert!(rel.contains("PE1", "QE1"));
        assert!(rel.contains("E1", "QE1"));
        assert!(!g.closure().contains("PE1", "QE1"));

        let same = g.closure_with("ED", "E1");
        for a in g.nodes() {
            for b in g.nodes() {
                assert_eq!(
                    same.contains(a.as_str(), b.as_str()),
                    g.closure().contains(a.as_str(), b.as_str())
                );
            }
        }

        let empty = RoleGraph::new(["a", "b"], []).unwrap();
        let rel = empty.closure_with("a", "b");
        let pairs: Vec<(&str, &str)> = [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]
            .into_iter()
            .filter(|(x, y)| rel.contains(x, y))
            .collect();
        assert_eq!(pairs, [("a", "a"), ("a", "b"), ("b", "b")]);
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        let e = |a: &str, b: &str| (RoleId::from(a), RoleId::from(b));
        assert!(matches!(RoleGraph::new(["a"], [e("a", "a")]), Err(Error::Cycle { .. })));
        assert!(matches!(
            RoleGraph::new(["a", "b"], [e("a", "b"), e("b", "a")]),
            Err(Error::Cycle { .. })
        ));
        assert!(matches!(
            RoleGraph::new(["a"], [e("a", "z")]),
            Err(Error::UnknownEntity { .. })
        ));
        assert!(matches!(
            RoleGraph::new(["a", "b"], [e("a", "b"), e("a", "b")]),
            Err(Error::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn transitive_pairs_match_seniority() {
        let g = example_rh();
        let plus = g.transitive_pairs();
        for a in g.nodes() {
            for b in g.nodes() {
                assert_eq!(
                    plus.contains(&(a.clone(), b.clone())),
                    g.is_senior(b.as_str(), a.as_str()).unwrap()
                );
            }
        }
    }
}
