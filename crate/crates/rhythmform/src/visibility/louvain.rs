//! Seeded community detection by greedy modularity optimization: local node
//! moves followed by graph aggregation, repeated until no gain remains, with
//! a node-sweep and community-merge refinement pass and a fixed number of
//! deterministic restarts. Resolution is fixed at 1.
//!
//! All gain comparisons use exact integer arithmetic (gains scaled by `2m`,
//! modularity scores by `4m^2`), so results are identical across platforms.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::visibility::VisibilityGraph;

const RESTARTS: u64 = 32;

/// Community assignment with its modularity value.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    community: Vec<usize>,
    modularity_value: f64,
}

impl Partition {
    pub fn community_of(&self, node: usize) -> usize {
        self.community[node]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.community
    }

    pub fn community_count(&self) -> usize {
        self.community.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn modularity_value(&self) -> f64 {
        self.modularity_value
    }

    /// Indices where the community id changes between consecutive events.
    pub fn segment_boundaries(&self) -> Vec<usize> {
        (1..self.community.len())
            .filter(|&i| self.community[i] != self.community[i - 1])
            .collect()
    }
}

/// splitmix64; the entire algorithm's only source of randomness.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn shuffled(&mut self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (self.next() % (i as u64 + 1)) as usize;
            order.swap(i, j);
        }
        order
    }
}

/// Weighted working graph for the aggregation levels.
struct Level {
    n: usize,
    adjacency: Vec<BTreeMap<usize, u64>>,
    self_weight: Vec<u64>,
}

impl Level {
    fn degree(&self, u: usize) -> u64 {
        self.adjacency[u].values().sum::<u64>() + 2 * self.self_weight[u]
    }
}

/// Newman-Girvan modularity of an assignment on the original graph.
pub fn modularity(graph: &VisibilityGraph, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != graph.node_count() {
        return Err(Error::Argument(format!(
            "partition covers {} nodes, graph has {}",
            assignment.len(),
            graph.node_count()
        )));
    }
    let m = graph.edge_count();
    if m == 0 {
        return Ok(0.0);
    }
    Ok(modularity_score(graph, assignment) as f64 / (4 * (m as i128) * (m as i128)) as f64)
}

/// `Q * 4m^2` as an exact integer: `4m * sum(e_c) - sum(d_c^2)`.
fn modularity_score(graph: &VisibilityGraph, assignment: &[usize]) -> i128 {
    let m = graph.edge_count() as i128;
    if m == 0 {
        return 0;
    }
    let mut internal: BTreeMap<usize, i128> = BTreeMap::new();
    let mut degree_sum: BTreeMap<usize, i128> = BTreeMap::new();
    for &(u, v) in graph.edges() {
        let (cu, cv) = (assignment[u as usize], assignment[v as usize]);
        *degree_sum.entry(cu).or_insert(0) += 1;
        *degree_sum.entry(cv).or_insert(0) += 1;
        if cu == cv {
            *internal.entry(cu).or_insert(0) += 1;
        }
    }
    let e_total: i128 = internal.values().sum();
    let d_sq: i128 = degree_sum.values().map(|d| d * d).sum();
    4 * m * e_total - d_sq
}

/// One full Louvain run (all levels) for one restart.
/// Returns the per-original-node assignment and per-level modularity scores.
fn louvain_run(graph: &VisibilityGraph, rng: &mut SplitMix64) -> (Vec<usize>, Vec<i128>) {
    let n = graph.node_count();
    let mut node_map: Vec<usize> = (0..n).collect();
    let m = graph.edge_count() as u64;
    if m == 0 {
        return (node_map, Vec::new());
    }
    let two_m = 2 * m as i128;

    let mut level = Level {
        n,
        adjacency: {
            let mut adj = vec![BTreeMap::new(); n];
            for &(u, v) in graph.edges() {
                *adj[u as usize].entry(v as usize).or_insert(0) += 1;
                *adj[v as usize].entry(u as usize).or_insert(0) += 1;
            }
            adj
        },
        self_weight: vec![0; n],
    };

    let mut level_scores = Vec::new();
    loop {
        let deg: Vec<u64> = (0..level.n).map(|u| level.degree(u)).collect();
        let mut comm: Vec<usize> = (0..level.n).collect();
        let mut comm_tot: Vec<i128> = deg.iter().map(|&d| d as i128).collect();
        let mut next_free = level.n;
        let mut level_moves = 0usize;
        loop {
            let mut moves = 0usize;
            let order = rng.shuffled(level.n);
            for &u in &order {
                let cu = comm[u];
                let ku = deg[u] as i128;
                let mut weight_to: BTreeMap<usize, i128> = BTreeMap::new();
                for (&v, &w) in &level.adjacency[u] {
                    if v != u {
                        *weight_to.entry(comm[v]).or_insert(0) += w as i128;
                    }
                }
                comm_tot[cu] -= ku;
                // gain(c) * 2m = 2m * w(u,c) - k_u * tot(c); staying is baseline,
                // a fresh singleton community has gain 0.
                let mut best_c = cu;
                let mut best_gain = two_m * weight_to.get(&cu).copied().unwrap_or(0) - ku * comm_tot[cu];
                let mut go_solo = false;
                if 0 > best_gain {
                    go_solo = true;
                    best_gain = 0;
                }
                for (&c, &w) in &weight_to {
                    if c == cu {
                        continue;
                    }
                    let gain = two_m * w - ku * comm_tot[c];
                    if gain > best_gain {
                        best_c = c;
                        best_gain = gain;
                        go_solo = false;
                    }
                }
                if go_solo {
                    best_c = next_free;
                    next_free += 1;
                    if comm_tot.len() <= best_c {
                        comm_tot.resize(best_c + 1, 0);
                    }
                }
                comm[u] = best_c;
                comm_tot[best_c] += ku;
                if best_c != cu {
                    moves += 1;
                }
            }
            if moves == 0 {
                break;
            }
            level_moves += moves;
        }
        if level_moves == 0 {
            break;
        }

        // aggregate communities into the next level's nodes
        let mut ids: Vec<usize> = comm.clone();
        ids.sort_unstable();
        ids.dedup();
        let remap: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let new_n = ids.len();
        let mut new_adjacency = vec![BTreeMap::new(); new_n];
        let mut new_self = vec![0u64; new_n];
        for u in 0..level.n {
            let cu = remap[&comm[u]];
            new_self[cu] += level.self_weight[u];
            for (&v, &w) in &level.adjacency[u] {
                let cv = remap[&comm[v]];
                if cu == cv {
                    if u < v {
                        new_self[cu] += w;
                    }
                } else {
                    *new_adjacency[cu].entry(cv).or_insert(0) += w;
                }
            }
        }
        for mapped in node_map.iter_mut() {
            *mapped = remap[&comm[*mapped]];
        }
        level = Level { n: new_n, adjacency: new_adjacency, self_weight: new_self };
        level_scores.push(modularity_score(graph, &node_map));
    }
    (node_map, level_scores)
}

/// Single sweep phase of local moves on the original graph, given an
/// existing assignment. Returns true if anything moved.
fn refine_sweep(graph: &VisibilityGraph, comm: &mut Vec<usize>, rng: &mut SplitMix64) -> bool {
    let n = graph.node_count();
    let m = graph.edge_count() as i128;
    if m == 0 {
        return false;
    }
    let two_m = 2 * m;
    let mut comm_tot: BTreeMap<usize, i128> = BTreeMap::new();
    for u in 0..n {
        *comm_tot.entry(comm[u]).or_insert(0) += graph.degree(u) as i128;
    }
    let mut next_free = comm.iter().copied().max().unwrap_or(0) + 1;
    let mut changed = false;
    loop {
        let mut moves = 0usize;
        let order = rng.shuffled(n);
        for &u in &order {
            let cu = comm[u];
            let ku = graph.degree(u) as i128;
            let mut weight_to: BTreeMap<usize, i128> = BTreeMap::new();
            for &v in graph.neighbors(u) {
                *weight_to.entry(comm[v as usize]).or_insert(0) += 1;
            }
            *comm_tot.get_mut(&cu).unwrap() -= ku;
            let mut best_c = cu;
            let mut best_gain =
                two_m * weight_to.get(&cu).copied().unwrap_or(0) - ku * comm_tot[&cu];
            let mut go_solo = false;
            if 0 > best_gain {
                go_solo = true;
                best_gain = 0;
            }
            for (&c, &w) in &weight_to {
                if c == cu {
                    continue;
                }
                let gain = two_m * w - ku * comm_tot.get(&c).copied().unwrap_or(0);
                if gain > best_gain {
                    best_c = c;
                    best_gain = gain;
                    go_solo = false;
                }
            }
            if go_solo {
                best_c = next_free;
                next_free += 1;
            }
            comm[u] = best_c;
            *comm_tot.entry(best_c).or_insert(0) += ku;
            if best_c != cu {
                moves += 1;
            }
        }
        if moves == 0 {
            break;
        }
        changed = true;
    }
    changed
}

/// Merge whole communities while any pairwise merge improves modularity.
fn refine_merge(graph: &VisibilityGraph, comm: &mut [usize]) -> bool {
    let m = graph.edge_count() as i128;
    if m == 0 {
        return false;
    }
    let mut changed = false;
    loop {
        let mut between: BTreeMap<(usize, usize), i128> = BTreeMap::new();
        let mut degree_sum: BTreeMap<usize, i128> = BTreeMap::new();
        for &(u, v) in graph.edges() {
            let (cu, cv) = (comm[u as usize], comm[v as usize]);
            *degree_sum.entry(cu).or_insert(0) += 1;
            *degree_sum.entry(cv).or_insert(0) += 1;
            if cu != cv {
                *between.entry((cu.min(cv), cu.max(cv))).or_insert(0) += 1;
            }
        }
        let mut best_gain = 0i128;
        let mut best_pair = None;
        for (&(c1, c2), &e12) in &between {
            // merge gain * 4m^2
            let gain = 4 * m * e12 - 2 * degree_sum[&c1] * degree_sum[&c2];
            if gain > best_gain {
                best_gain = gain;
                best_pair = Some((c1, c2));
            }
        }
        match best_pair {
            None => break,
            Some((c1, c2)) => {
                for c in comm.iter_mut() {
                    if *c == c2 {
                        *c = c1;
                    }
                }
                changed = true;
            }
        }
    }
    changed
}

fn relabel_by_first_appearance(comm: &[usize]) -> Vec<usize> {
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    comm.iter()
        .map(|&c| {
            let next = seen.len();
            *seen.entry(c).or_insert(next)
        })
        .collect()
}

/// Detect communities; deterministic for a fixed seed.
pub fn detect_communities(graph: &VisibilityGraph, seed: u64) -> Partition {
    detect_communities_traced(graph, seed).0
}

/// As [`detect_communities`], also returning the per-level modularity scores
/// of the winning restart (monotonically non-decreasing by construction).
pub fn detect_communities_traced(graph: &VisibilityGraph, seed: u64) -> (Partition, Vec<f64>) {
    let n = graph.node_count();
    if n == 0 {
        return (Partition { community: Vec::new(), modularity_value: 0.0 }, Vec::new());
    }
    let m = graph.edge_count();
    if m == 0 {
        return (
            Partition { community: relabel_by_first_appearance(&(0..n).collect::<Vec<_>>()), modularity_value: 0.0 },
            Vec::new(),
        );
    }
    let mut best: Option<(i128, Vec<usize>, Vec<i128>)> = None;
    for restart in 0..RESTARTS {
        let mut rng = SplitMix64::new(seed.wrapping_add(restart));
        let (mut comm, mut trace) = louvain_run(graph, &mut rng);
        for _ in 0..16 {
            let swept = refine_sweep(graph, &mut comm, &mut rng);
            let merged = refine_merge(graph, &mut comm);
            if !(swept || merged) {
                break;
            }
            trace.push(modularity_score(graph, &comm));
        }
        let score = modularity_score(graph, &comm);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, comm, trace));
        }
    }
    let (score, comm, trace) = best.unwrap();
    let community = relabel_by_first_appearance(&comm);
    let denom = (4 * (m as i128) * (m as i128)) as f64;
    let modularity_value = score as f64 / denom;
    let trace_f: Vec<f64> = trace.into_iter().map(|s| s as f64 / denom).collect();
    (Partition { community, modularity_value }, trace_f)
}
