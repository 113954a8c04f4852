//! Natural visibility graphs over duration series, plus the structural
//! metrics read off them: degree correlation with a power-law fit,
//! assortativity, and transitivity.

pub mod louvain;

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Which abscissa the series points sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeAxis {
    /// Event index 0, 1, 2, ...
    #[default]
    Index,
    /// Onset ticks of each event.
    Onset,
}

/// A positive duration series with strictly increasing coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurationSeries {
    values: Vec<u64>,
    coords: Vec<u64>,
}

impl DurationSeries {
    pub fn new(values: Vec<u64>, coords: Vec<u64>) -> Result<Self> {
        if values.len() != coords.len() {
            return Err(Error::Argument(format!(
                "{} values vs {} coordinates",
                values.len(),
                coords.len()
            )));
        }
        if values.iter().any(|&v| v == 0) {
            return Err(Error::Argument("durations must be positive".into()));
        }
        if coords.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("coordinates must be strictly increasing".into()));
        }
        Ok(Self { values, coords })
    }

    /// Series over consecutive integer positions.
    pub fn indexed(values: Vec<u64>) -> Result<Self> {
        let coords = (0..values.len() as u64).collect();
        Self::new(values, coords)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

/// Simple undirected graph over the series events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
}

impl VisibilityGraph {
    pub fn from_edges(n: usize, mut edges: Vec<(u32, u32)>) -> Self {
        for e in &mut edges {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Self { n, edges, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }
}

/// Build the natural visibility graph: `i` and `j` are linked iff every point
/// between them lies strictly below the sightline from `(x_i, y_i)` to
/// `(x_j, y_j)`. Collinear points block. All comparisons are exact integer
/// arithmetic, so the graph is invariant under positive scaling of the
/// durations and affine rescaling of the coordinates.
pub fn build_visibility(series: &DurationSeries) -> Result<VisibilityGraph> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Argument(format!("visibility needs at least 2 events, got {n}")));
    }
    let y = &series.values;
    let x = &series.coords;
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n {
        // Track the steepest slope from i seen so far as an exact fraction.
        let mut max_num = 0i128; // slope numerator (dy)
        let mut max_den = 0i128; // slope denominator (dx), 0 = nothing yet
        for j in i + 1..n {
            let dy = y[j] as i128 - y[i] as i128;
            let dx = (x[j] - x[i]) as i128;
            let visible = max_den == 0 || dy * max_den > max_num * dx;
            if visible {
                edges.push((i as u32, j as u32));
                max_num = dy;
                max_den = dx;
            }
        }
    }
    Ok(VisibilityGraph::from_edges(n, edges))
}

/// Average neighbor degree of all degree-`k` nodes, for each degree present.
pub fn degree_correlation(graph: &VisibilityGraph) -> BTreeMap<usize, f64> {
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for node in 0..graph.node_count() {
        let k = graph.degree(node);
        if k == 0 {
            continue;
        }
        let mean_neighbor = graph
            .neighbors(node)
            .iter()
            .map(|&v| graph.degree(v as usize) as f64)
            .sum::<f64>()
            / k as f64;
        let entry = sums.entry(k).or_insert((0.0, 0));
        entry.0 += mean_neighbor;
        entry.1 += 1;
    }
    sums.into_iter().map(|(k, (sum, cnt))| (k, sum / cnt as f64)).collect()
}

/// Least-squares power law `k_m(k) = a * k^b` fitted on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
}

/// Fit requires at least two distinct degrees; regular graphs yield `None`.
pub fn powerlaw_fit(correlation: &BTreeMap<usize, f64>) -> Option<PowerLawFit> {
    let points: Vec<(f64, f64)> = correlation
        .iter()
        .filter(|&(_, &km)| km > 0.0)
        .map(|(&k, &km)| ((k as f64).ln(), km.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let b = (n * sxy - sx * sy) / denom;
    let a = ((sy - b * sx) / n).exp();
    Some(PowerLawFit { a, b })
}

/// Pearson correlation of endpoint degrees over both edge orientations.
/// `None` when the degree variance at edge endpoints is zero (regular graphs).
pub fn assortativity(graph: &VisibilityGraph) -> Option<f64> {
    if graph.edge_count() == 0 {
        return None;
    }
    let m2 = (2 * graph.edge_count()) as f64;
    let mut sum = 0.0;
    for &(u, v) in graph.edges() {
        sum += (graph.degree(u as usize) + graph.degree(v as usize)) as f64;
    }
    let mean = sum / m2;
    let mut var = 0.0;
    let mut cov = 0.0;
    for &(u, v) in graph.edges() {
        let du = graph.degree(u as usize) as f64 - mean;
        let dv = graph.degree(v as usize) as f64 - mean;
        var += du * du + dv * dv;
        cov += 2.0 * du * dv;
    }
    if var == 0.0 {
        return None;
    }
    Some(cov / var)
}

/// `3 * triangles / connected triples`; zero when there are no triples.
pub fn transitivity(graph: &VisibilityGraph) -> f64 {
    let mut triangles = 0u64;
    for &(u, v) in graph.edges() {
        let (a, b) = (graph.neighbors(u as usize), graph.neighbors(v as usize));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    triangles += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    triangles /= 3;
    let triples: u64 = (0..graph.node_count())
        .map(|v| {
            let d = graph.degree(v) as u64;
            d * (d.saturating_sub(1)) / 2
        })
        .sum();
    if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    }
}

/// Scalar structure summary of a graph.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GraphSummary {
    pub assortativity: Option<f64>,
    pub transitivity: f64,
    pub powerlaw: Option<PowerLawFit>,
}

pub fn graph_summary(graph: &VisibilityGraph) -> GraphSummary {
    GraphSummary {
        assortativity: assortativity(graph),
        transitivity: transitivity(graph),
        powerlaw: powerlaw_fit(&degree_correlation(graph)),
    }
}
