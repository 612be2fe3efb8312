//! Greedy modularity maximization (Louvain) with a fixed visiting order.
//!
//! Nodes are visited by ascending user id; when several communities offer the
//! same gain the lowest community id wins. Identical graphs therefore always
//! produce identical assignments.

use std::collections::{BTreeMap, HashMap};

use crate::model::UserId;
use crate::numeric::Scalar;

const MAX_PASSES: usize = 1_000;
const MAX_LEVELS: usize = 64;

/// Undirected weighted graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<S> {
    ids: Vec<UserId>,
    index: HashMap<UserId, usize>,
    adj: Vec<BTreeMap<usize, S>>,
}

impl<S: Scalar> WeightedGraph<S> {
    pub fn new(nodes: impl IntoIterator<Item = UserId>) -> Self {
        let mut ids: Vec<UserId> = nodes.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let adj = vec![BTreeMap::new(); ids.len()];
        Self { ids, index, adj }
    }

    /// Adds `w` to the `a`–`b` edge. Self-loops and unknown nodes are ignored.
    pub fn add_edge(&mut self, a: UserId, b: UserId, w: S) {
        let (Some(&i), Some(&j)) = (self.index.get(&a), self.index.get(&b)) else {
            return;
        };
        if i == j {
            return;
        }
        for (from, to) in [(i, j), (j, i)] {
            let e = self.adj[from].entry(to).or_insert_with(S::zero);
            *e = *e + w;
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.ids
    }

    pub fn weight(&self, a: UserId, b: UserId) -> S {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&i), Some(&j)) => self.adj[i].get(&j).copied().unwrap_or_else(S::zero),
            _ => S::zero(),
        }
    }

    pub fn neighbors(&self, id: UserId) -> impl Iterator<Item = (UserId, S)> + '_ {
        self.index
            .get(&id)
            .into_iter()
            .flat_map(move |&i| self.adj[i].iter().map(move |(&j, &w)| (self.ids[j], w)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityAssignment<S> {
    /// Community ids are dense and numbered by each community's lowest user id.
    pub communities: BTreeMap<UserId, usize>,
    pub modularity: S,
}

impl<S> CommunityAssignment<S> {
    pub fn community_of(&self, id: UserId) -> Option<usize> {
        self.communities.get(&id).copied()
    }

    pub fn community_count(&self) -> usize {
        self.communities.values().max().map_or(0, |m| m + 1)
    }
}

/// `Q = Σ_c [ in_c / m − (tot_c / 2m)² ]`, zero for an edgeless graph.
pub fn modularity<S: Scalar>(graph: &WeightedGraph<S>, communities: &BTreeMap<UserId, usize>) -> S {
    let mut inside: BTreeMap<usize, S> = BTreeMap::new();
    let mut total: BTreeMap<usize, S> = BTreeMap::new();
    let mut m2 = S::zero();
    for (i, row) in graph.adj.iter().enumerate() {
        let ci = communities[&graph.ids[i]];
        for (&j, &w) in row {
            m2 = m2 + w;
            let t = total.entry(ci).or_insert_with(S::zero);
            *t = *t + w;
            if communities[&graph.ids[j]] == ci {
                let e = inside.entry(ci).or_insert_with(S::zero);
                *e = *e + w;
            }
        }
    }
    if m2 == S::zero() {
        return S::zero();
    }
    // `inside` counts each internal edge twice, so in_c / m = inside_c / 2m
    total
        .iter()
        .map(|(c, &tot)| {
            let a = inside.get(c).copied().unwrap_or_else(S::zero) / m2;
            let b = tot / m2;
            a - b * b
        })
        .fold(S::zero(), |acc, q| acc + q)
}

#[derive(Debug, Clone)]
struct Level<S> {
    /// Links to other nodes; weight internal to a node only shows up in `degree`.
    adj: Vec<Vec<(usize, S)>>,
    degree: Vec<S>,
    m2: S,
}

impl<S: Scalar> Level<S> {
    fn from_graph(g: &WeightedGraph<S>) -> Self {
        let adj: Vec<Vec<(usize, S)>> = g
            .adj
            .iter()
            .map(|row| row.iter().map(|(&j, &w)| (j, w)).collect())
            .collect();
        let degree: Vec<S> = adj
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect();
        let m2 = degree.iter().copied().sum();
        Self { adj, degree, m2 }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Local moving phase. Returns dense community labels, numbered by first appearance.
    fn local_moves(&self) -> Vec<usize> {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot: Vec<S> = self.degree.clone();
        let base_eps = S::epsilon() * S::from_count(1024);
        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for i in 0..n {
                let ci = comm[i];
                let ki = self.degree[i];
                let mut links: BTreeMap<usize, S> = BTreeMap::new();
                for &(j, w) in &self.adj[i] {
                    let e = links.entry(comm[j]).or_insert_with(S::zero);
                    *e = *e + w;
                }
                tot[ci] = tot[ci] - ki;
                let gain = |c: usize, w: S| w - tot[c] * ki / self.m2;
                let eps = base_eps * ki.max(S::one());
                let mut best = ci;
                let mut best_gain = gain(ci, links.get(&ci).copied().unwrap_or_else(S::zero));
                for (&c, &w) in &links {
                    let g = gain(c, w);
                    if g > best_gain + eps || ((g - best_gain).abs() <= eps && c < best) {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] = tot[best] + ki;
                if best != ci {
                    comm[i] = best;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        let mut labels = HashMap::new();
        comm.iter()
            .map(|c| {
                let next = labels.len();
                *labels.entry(*c).or_insert(next)
            })
            .collect()
    }

    fn aggregate(&self, comm: &[usize], count: usize) -> Self {
        let mut degree = vec![S::zero(); count];
        let mut links: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); count];
        for i in 0..self.len() {
            let ci = comm[i];
            degree[ci] = degree[ci] + self.degree[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if cj != ci {
                    let e = links[ci].entry(cj).or_insert_with(S::zero);
                    *e = *e + w;
                }
            }
        }
        Self {
            adj: links
                .into_iter()
                .map(|row| row.into_iter().collect())
                .collect(),
            degree,
            m2: self.m2,
        }
    }
}

pub fn detect_communities<S: Scalar>(graph: &WeightedGraph<S>) -> CommunityAssignment<S> {
    let n = graph.node_count();
    let mut membership: Vec<usize> = (0..n).collect();
    if n > 0 {
        let mut level = Level::from_graph(graph);
        if level.m2 > S::zero() {
            for _ in 0..MAX_LEVELS {
                let comm = level.local_moves();
                let count = comm.iter().max().map_or(0, |m| m + 1);
                if count == level.len() {
                    break;
                }
                for m in membership.iter_mut() {
                    *m = comm[*m];
                }
                level = level.aggregate(&comm, count);
            }
        }
    }
    // renumber by lowest member (nodes are already in ascending id order)
    let mut labels = HashMap::new();
    let communities: BTreeMap<UserId, usize> = graph
        .ids
        .iter()
        .zip(&membership)
        .map(|(&id, &m)| {
            let next = labels.len();
            (id, *labels.entry(m).or_insert(next))
        })
        .collect();
    let q = modularity(graph, &communities);
    CommunityAssignment {
        communities,
        modularity: q,
    }
}
