//! Graph generators, file formats, and global statistics (diameter and an
//! independence-number estimate) handed to the protocols as parameters.

mod alpha;

pub use alpha::{exact_alpha, greedy_alpha, greedy_mis};

use crate::error::GraphError;
use crate::sim::{Embedding, Graph};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Metric used by unit-ball style generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Norm {
    L1,
    #[default]
    L2,
    LInf,
}

fn dist(norm: Norm, a: &[f64], b: &[f64]) -> f64 {
    match norm {
        Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Norm::L2 => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Norm::LInf => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
    }
}

/// Geometric description of a graph instance. `r == big_r` with no ranges is
/// a plain unit-threshold graph; `r < big_r` is a quasi unit disk graph
/// (edges mandatory below `r`, forbidden above `big_r`, coin-flipped in the
/// annulus); `ranges` switches to the geometric-radio rule
/// `dist(u,v) <= min(r_u, r_v)` (mutual reach, so the graph is undirected).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometricSpec {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default)]
    pub ranges: Option<Vec<f64>>,
    #[serde(default = "default_annulus_prob")]
    pub annulus_edge_prob: f64,
    #[serde(default)]
    pub norm: Norm,
}

fn default_annulus_prob() -> f64 {
    0.5
}

impl GeometricSpec {
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.r > self.big_r {
            return Err(GraphError::BadGeometry(format!(
                "r = {} exceeds R = {}",
                self.r, self.big_r
            )));
        }
        if self.points.iter().any(|p| p.len() != self.dim) {
            return Err(GraphError::BadGeometry("point dimension mismatch".into()));
        }
        if let Some(ranges) = &self.ranges {
            if ranges.len() != self.points.len() {
                return Err(GraphError::BadGeometry("ranges length mismatch".into()));
            }
            if ranges.iter().any(|&r| r <= 0.0) {
                return Err(GraphError::BadGeometry("ranges must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Materialize the graph described by `spec`. The rng is consumed only for
/// annulus coin flips (quasi mode with `r < R`).
pub fn build_geometric<R: Rng>(spec: &GeometricSpec, rng: &mut R) -> Result<Graph, GraphError> {
    spec.validate()?;
    let n = spec.points.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let d = dist(spec.norm, &spec.points[u], &spec.points[v]);
            let edge = if let Some(ranges) = &spec.ranges {
                d <= ranges[u].min(ranges[v])
            } else if d < spec.r {
                true
            } else if d <= spec.big_r {
                // Annulus: both thresholds equal makes this unreachable
                // (d < r already matched everything up to R) except d == r.
                spec.r == spec.big_r && d == spec.r || {
                    spec.r < spec.big_r && rng.gen::<f64>() < spec.annulus_edge_prob
                }
            } else {
                false
            };
            if edge {
                edges.push((u as u32, v as u32));
            }
        }
    }
    let emb = Embedding {
        dim: spec.dim,
        points: spec.points.clone(),
        ranges: spec.ranges.clone(),
    };
    Ok(Graph::from_edges(n, edges)?.with_embedding(emb))
}

fn sample_points<R: Rng>(n: usize, area_side: f64, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>() * area_side).collect())
        .collect()
}

/// Unit disk graph: uniform points in the square, edge iff distance <= 1.
pub fn gen_udg<R: Rng>(n: usize, area_side: f64, rng: &mut R) -> Graph {
    gen_unit_ball(n, area_side, 2, Norm::L2, rng)
}

/// Unit ball graph in `dim` dimensions under the chosen norm.
pub fn gen_unit_ball<R: Rng>(n: usize, area_side: f64, dim: usize, norm: Norm, rng: &mut R) -> Graph {
    let spec = GeometricSpec {
        dim,
        points: sample_points(n, area_side, dim, rng),
        r: 1.0,
        big_r: 1.0,
        ranges: None,
        annulus_edge_prob: 0.0,
        norm,
    };
    build_geometric(&spec, rng).expect("unit ball spec is valid")
}

/// Quasi unit disk graph: edge iff dist < r, never if dist > R, coin with
/// `edge_prob_in_annulus` in between.
pub fn gen_quasi_udg<R: Rng>(
    n: usize,
    area_side: f64,
    r: f64,
    big_r: f64,
    edge_prob_in_annulus: f64,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    let spec = GeometricSpec {
        dim: 2,
        points: sample_points(n, area_side, 2, rng),
        r,
        big_r,
        ranges: None,
        annulus_edge_prob: edge_prob_in_annulus,
        norm: Norm::L2,
    };
    build_geometric(&spec, rng)
}

/// Geometric radio network restricted to mutual reach: edge iff
/// `dist(u,v) <= min(r_u, r_v)`, which keeps the graph undirected.
pub fn gen_geometric_radio<R: Rng, S: FnMut(&mut R) -> f64>(
    n: usize,
    area_side: f64,
    mut range_sampler: S,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    let points = sample_points(n, area_side, 2, rng);
    let ranges: Vec<f64> = (0..n).map(|_| range_sampler(rng)).collect();
    let spec = GeometricSpec {
        dim: 2,
        points,
        r: 1.0,
        big_r: 1.0,
        ranges: Some(ranges),
        annulus_edge_prob: 0.0,
        norm: Norm::L2,
    };
    build_geometric(&spec, rng)
}

/// Erdos-Renyi G(n, p).
pub fn gen_gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    if p > 0.0 {
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if p >= 1.0 || rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
    }
    Graph::from_edges(n, edges).expect("gnp edges are valid")
}

/// side x side grid with unit spacing and unit radius: the 4ate-neighbor grid
/// graph, with its embedding attached. alpha = Theta(D^2) on these.
pub fn gen_grid_udg(side: usize) -> Graph {
    let n = side * side;
    let mut points = Vec::with_capacity(n);
    for y in 0..side {
        for x in 0..side {
            points.push(vec![x as f64, y as f64]);
        }
    }
    let spec = GeometricSpec {
        dim: 2,
        points,
        r: 1.0,
        big_r: 1.0,
        ranges: None,
        annulus_edge_prob: 0.0,
        norm: Norm::L2,
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    use rand::SeedableRng;
    build_geometric(&spec, &mut rng).expect("grid spec is valid")
}

/// `arms` paths of `arm_len` nodes joined at a hub: diameter 2*arm_len with
/// independence number Theta(n); the high-alpha regime at fixed diameter.
pub fn gen_star_of_paths(arms: usize, arm_len: usize) -> Graph {
    assert!(arm_len >= 1);
    let n = 1 + arms * arm_len;
    let mut edges = Vec::new();
    for a in 0..arms {
        let base = (1 + a * arm_len) as u32;
        edges.push((0, base));
        for k in 1..arm_len as u32 {
            edges.push((base + k - 1, base + k));
        }
    }
    Graph::from_edges(n, edges).expect("star-of-paths edges are valid")
}

/// Edge-list text format: optional `n <count>` header line, then one
/// `u v` pair per line; `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut max_id = 0u32;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts[0] == "n" {
            if parts.len() != 2 {
                return Err(GraphError::Parse {
                    line: lineno,
                    msg: "header must be `n <count>`".into(),
                });
            }
            n = Some(parts[1].parse().map_err(|e| GraphError::Parse {
                line: lineno,
                msg: format!("bad node count: {e}"),
            })?);
            continue;
        }
        if parts.len() != 2 {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("expected `u v`, got {:?}", line),
            });
        }
        let u: u32 = parts[0].parse().map_err(|e| GraphError::Parse {
            line: lineno,
            msg: format!("bad node id: {e}"),
        })?;
        let v: u32 = parts[1].parse().map_err(|e| GraphError::Parse {
            line: lineno,
            msg: format!("bad node id: {e}"),
        })?;
        if u == v {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("self-loop at node {u}"),
            });
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v));
    }
    let n = n.unwrap_or(if edges.is_empty() { 0 } else { max_id as usize + 1 });
    if !edges.is_empty() && max_id as usize >= n {
        return Err(GraphError::NodeOutOfRange {
            id: max_id as usize,
            n,
        });
    }
    Graph::from_edges(n, edges)
}

pub fn format_edge_list(graph: &Graph) -> String {
    let mut out = format!("n {}\n", graph.n());
    for (u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn load_edge_list(path: &std::path::Path) -> Result<Graph, GraphError> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

pub fn save_edge_list(graph: &Graph, path: &std::path::Path) -> Result<(), GraphError> {
    Ok(std::fs::write(path, format_edge_list(graph))?)
}

pub fn load_geometric_json(path: &std::path::Path) -> Result<GeometricSpec, GraphError> {
    let text = std::fs::read_to_string(path)?;
    let spec: GeometricSpec =
        serde_json::from_str(&text).map_err(|e| GraphError::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
    spec.validate()?;
    Ok(spec)
}

pub fn save_geometric_json(spec: &GeometricSpec, path: &std::path::Path) -> Result<(), GraphError> {
    let text = serde_json::to_string_pretty(spec).expect("spec serializes");
    Ok(std::fs::write(path, text)?)
}

/// How the independence number estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    /// Branch-and-bound, exact; refused above 40 nodes.
    Exact,
    /// Greedy maximal independent set: within a (Delta+1) factor.
    Greedy,
}

/// Global parameters handed to protocols. Only polynomial accuracy of
/// `alpha` is ever relied on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    /// Hop diameter; max over components when disconnected.
    pub diameter: u32,
    pub alpha: u32,
    pub alpha_mode: AlphaMode,
    pub connected: bool,
    /// False when the diameter came from a double-sweep bound.
    pub diameter_exact: bool,
}

const DIAMETER_EXACT_LIMIT: usize = 10_000;
const EXACT_ALPHA_LIMIT: usize = 40;

pub fn compute_stats(graph: &Graph, alpha_mode: AlphaMode) -> Result<GraphStats, GraphError> {
    let n = graph.n();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let alpha = match alpha_mode {
        AlphaMode::Exact => {
            if n > EXACT_ALPHA_LIMIT {
                return Err(GraphError::ExactAlphaTooLarge(n));
            }
            exact_alpha(graph)
        }
        AlphaMode::Greedy => greedy_alpha(graph),
    };
    let (diameter, connected, diameter_exact) = diameter_of(graph);
    Ok(GraphStats {
        n,
        diameter,
        alpha,
        alpha_mode,
        connected,
        diameter_exact,
    })
}

fn diameter_of(graph: &Graph) -> (u32, bool, bool) {
    let n = graph.n();
    if n <= DIAMETER_EXACT_LIMIT {
        let mut diameter = 0u32;
        let mut connected = true;
        for v in 0..n {
            let dist = graph.bfs_distances(v);
            for &d in &dist {
                if d == u32::MAX {
                    connected = false;
                } else if d > diameter {
                    diameter = d;
                }
            }
        }
        (diameter, connected, true)
    } else {
        // Double sweep per component: BFS from a seed, then from the
        // farthest node found; a lower bound on the true diameter.
        let mut seen = vec![false; n];
        let mut diameter = 0u32;
        let mut components = 0usize;
        for v in 0..n {
            if seen[v] {
                continue;
            }
            components += 1;
            let d1 = graph.bfs_distances(v);
            let mut far = v;
            let mut far_d = 0;
            for (u, &d) in d1.iter().enumerate() {
                if d != u32::MAX {
                    seen[u] = true;
                    if d > far_d {
                        far_d = d;
                        far = u;
                    }
                }
            }
            let d2 = graph.bfs_distances(far);
            for &d in &d2 {
                if d != u32::MAX && d > diameter {
                    diameter = d;
                }
            }
        }
        (diameter, components == 1, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn points_graph(points: Vec<Vec<f64>>) -> Graph {
        let spec = GeometricSpec {
            dim: 2,
            points,
            r: 1.0,
            big_r: 1.0,
            ranges: None,
            annulus_edge_prob: 0.0,
            norm: Norm::L2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        build_geometric(&spec, &mut rng).unwrap()
    }

    #[test]
    fn udg_edge_by_distance() {
        let g = points_graph(vec![vec![0.0, 0.0], vec![0.5, 0.0]]);
        assert_eq!(g.edge_count(), 1);
        let g = points_graph(vec![vec![0.0, 0.0], vec![1.5, 0.0]]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn udg_small_area_is_clique() {
        // area 0.7: max pairwise distance 0.7 * sqrt(2) < 1, checked directly.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = gen_udg(100, 0.7, &mut rng);
        let emb = g.embedding().unwrap();
        for u in 0..100 {
            for v in (u + 1)..100 {
                let d = dist(Norm::L2, &emb.points[u], &emb.points[v]);
                assert!(d <= 1.0, "points {u},{v} at distance {d}");
            }
        }
        assert_eq!(g.edge_count(), 100 * 99 / 2);
    }

    #[test]
    fn quasi_with_equal_thresholds_matches_udg() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points = sample_points(60, 4.0, 2, &mut rng);
        let udg = points_graph(points.clone());
        let spec = GeometricSpec {
            dim: 2,
            points,
            r: 1.0,
            big_r: 1.0,
            ranges: None,
            annulus_edge_prob: 0.0,
            norm: Norm::L2,
        };
        let quasi = build_geometric(&spec, &mut rng).unwrap();
        let ue: Vec<_> = udg.edges().collect();
        let qe: Vec<_> = quasi.edges().collect();
        assert_eq!(ue, qe);
    }

    #[test]
    fn quasi_annulus_prob_bounds_are_nested() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points = sample_points(50, 5.0, 2, &mut rng);
        let mk = |prob: f64, rng: &mut ChaCha8Rng| {
            build_geometric(
                &GeometricSpec {
                    dim: 2,
                    points: points.clone(),
                    r: 1.0,
                    big_r: 1.8,
                    ranges: None,
                    annulus_edge_prob: prob,
                    norm: Norm::L2,
                },
                rng,
            )
            .unwrap()
        };
        let lo = mk(0.0, &mut rng);
        let hi = mk(1.0, &mut rng);
        let lo_edges: std::collections::HashSet<_> = lo.edges().collect();
        let hi_edges: std::collections::HashSet<_> = hi.edges().collect();
        assert!(lo_edges.is_subset(&hi_edges));
        // dist < r edges always present
        for (u, v) in &lo_edges {
            assert!(hi.has_edge(*u as usize, *v as usize));
        }
    }

    #[test]
    fn quasi_inner_radius_always_edges() {
        // two nodes at distance 0.5 * r: edge regardless of annulus prob
        let spec = GeometricSpec {
            dim: 2,
            points: vec![vec![0.0, 0.0], vec![0.5, 0.0]],
            r: 1.0,
            big_r: 2.0,
            ranges: None,
            annulus_edge_prob: 0.0,
            norm: Norm::L2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = build_geometric(&spec, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn geometric_radio_requires_mutual_reach() {
        let spec = GeometricSpec {
            dim: 2,
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            r: 1.0,
            big_r: 1.0,
            ranges: Some(vec![2.0, 0.5]),
            annulus_edge_prob: 0.0,
            norm: Norm::L2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = build_geometric(&spec, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 0, "one-way reach must not create an edge");
    }

    #[test]
    fn geometric_radio_equal_ranges_matches_udg_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let points = sample_points(40, 6.0, 2, &mut rng);
        let radio = build_geometric(
            &GeometricSpec {
                dim: 2,
                points: points.clone(),
                r: 1.0,
                big_r: 1.0,
                ranges: Some(vec![1.7; 40]),
                annulus_edge_prob: 0.0,
                norm: Norm::L2,
            },
            &mut rng,
        )
        .unwrap();
        // threshold-1.7 unit ball on the same points
        let mut edges = Vec::new();
        for u in 0..40 {
            for v in (u + 1)..40 {
                if dist(Norm::L2, &points[u], &points[v]) <= 1.7 {
                    edges.push((u as u32, v as u32));
                }
            }
        }
        let want = Graph::from_edges(40, edges).unwrap();
        assert_eq!(radio.edges().collect::<Vec<_>>(), want.edges().collect::<Vec<_>>());
    }

    #[test]
    fn gnp_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(gen_gnp(10, 0.0, &mut rng).edge_count(), 0);
        assert_eq!(gen_gnp(10, 1.0, &mut rng).edge_count(), 45);
    }

    #[test]
    fn edge_list_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = gen_gnp(20, 0.2, &mut rng);
        let text = format_edge_list(&g);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(g.n(), back.n());
        assert_eq!(g.edges().collect::<Vec<_>>(), back.edges().collect::<Vec<_>>());
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = parse_edge_list("0 1\n2 2\n").unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse_edge_list("0 1\nx y\n").unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn stats_on_known_graphs() {
        let s = compute_stats(&Graph::complete(5), AlphaMode::Exact).unwrap();
        assert_eq!((s.diameter, s.alpha), (1, 1));
        // Path P9: D = 8, alpha = 5 (both via independent routes).
        let s = compute_stats(&Graph::path(9), AlphaMode::Exact).unwrap();
        assert_eq!((s.diameter, s.alpha), (8, 5));
        let s = compute_stats(&Graph::cycle(5), AlphaMode::Exact).unwrap();
        assert_eq!((s.diameter, s.alpha), (2, 2));
    }

    #[test]
    fn exact_alpha_refused_for_large_n() {
        let g = Graph::path(41);
        assert!(matches!(
            compute_stats(&g, AlphaMode::Exact),
            Err(GraphError::ExactAlphaTooLarge(41))
        ));
        assert!(compute_stats(&g, AlphaMode::Greedy).is_ok());
    }

    #[test]
    fn disconnected_diameter_is_max_over_components() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let s = compute_stats(&g, AlphaMode::Exact).unwrap();
        assert!(!s.connected);
        assert_eq!(s.diameter, 2);
    }

    #[test]
    fn grid_udg_shape() {
        let g = gen_grid_udg(4);
        assert_eq!(g.n(), 16);
        // interior nodes have 4 neighbors, corners 2
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(5), 4);
        let s = compute_stats(&g, AlphaMode::Exact).unwrap();
        assert_eq!(s.diameter, 6);
        assert_eq!(s.alpha, 8);
    }

    #[test]
    fn star_of_paths_shape() {
        let g = gen_star_of_paths(4, 3);
        assert_eq!(g.n(), 13);
        let s = compute_stats(&g, AlphaMode::Exact).unwrap();
        assert_eq!(s.diameter, 6);
        assert!(s.alpha >= 8);
    }

    #[test]
    fn geometric_radio_ball_growth_is_polynomial() {
        // ratio max/min range 1.5: independent sets in 3-hop balls stay
        // below c * 3^2 for a modest constant, via exact search per ball.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let g = gen_geometric_radio(50, 4.0, |r| 1.0 + 0.5 * r.gen::<f64>(), &mut rng).unwrap();
        let c = 4;
        for v in 0..g.n() {
            let dist = g.bfs_distances(v);
            let ball: Vec<u32> = (0..g.n() as u32).filter(|&u| dist[u as usize] <= 3).collect();
            if ball.len() > 40 {
                continue; // exact search budget
            }
            let mut index = std::collections::HashMap::new();
            for (i, &u) in ball.iter().enumerate() {
                index.insert(u, i as u32);
            }
            let mut edges = Vec::new();
            for &u in &ball {
                for &w in g.neighbors(u as usize) {
                    if let Some(&wi) = index.get(&w) {
                        if index[&u] < wi {
                            edges.push((index[&u], wi));
                        }
                    }
                }
            }
            let sub = Graph::from_edges(ball.len(), edges).unwrap();
            let a = exact_alpha(&sub);
            assert!(a <= c * 9, "ball at {v} has alpha {a}");
        }
    }
}
