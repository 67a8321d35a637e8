//! Source-sink paths in a directed acyclic graph.
//!
//! Components of the ambient space are the edges, in construction order. The
//! shortest path under a signed cost vector is found by backward dynamic
//! programming from the sink; ties are broken toward the lexicographically
//! smallest edge-incidence vector by greedily excluding low-index edges while
//! an optimal path avoiding them still exists. Tie detection compares the
//! exact DP sums, so it is exact whenever the cost arithmetic is (e.g. integer
//! or dyadic costs); perturbed costs are continuous and never tie.

use crate::action::Action;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Dag {
    num_nodes: usize,
    source: usize,
    sink: usize,
    edges: Vec<(usize, usize)>,
    /// Outgoing edge indices per node.
    out_edges: Vec<Vec<usize>>,
    /// Nodes in a topological order.
    topo: Vec<usize>,
    /// Largest number of edges on any source-sink path.
    max_path_edges: usize,
}

impl Dag {
    pub fn new(
        num_nodes: usize,
        edges: Vec<(usize, usize)>,
        source: usize,
        sink: usize,
    ) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidParameter("DAG needs at least one node".into()));
        }
        if source >= num_nodes || sink >= num_nodes {
            return Err(Error::InvalidParameter(format!(
                "source {source} or sink {sink} out of range for {num_nodes} nodes"
            )));
        }
        if source == sink {
            return Err(Error::InvalidParameter(
                "source and sink must be distinct".into(),
            ));
        }
        if edges.is_empty() {
            return Err(Error::InvalidParameter("DAG has no edges".into()));
        }
        let mut out_edges = vec![Vec::new(); num_nodes];
        let mut indegree = vec![0usize; num_nodes];
        for (idx, &(u, w)) in edges.iter().enumerate() {
            if u >= num_nodes || w >= num_nodes {
                return Err(Error::InvalidParameter(format!(
                    "edge {idx} = ({u}, {w}) out of range for {num_nodes} nodes"
                )));
            }
            if u == w {
                return Err(Error::InvalidParameter(format!(
                    "edge {idx} is a self-loop at node {u}"
                )));
            }
            out_edges[u].push(idx);
            indegree[w] += 1;
        }
        // Kahn's algorithm: a complete topological order certifies acyclicity.
        let mut topo = Vec::with_capacity(num_nodes);
        let mut queue: Vec<usize> = (0..num_nodes).filter(|&u| indegree[u] == 0).collect();
        while let Some(u) = queue.pop() {
            topo.push(u);
            for &e in &out_edges[u] {
                let w = edges[e].1;
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    queue.push(w);
                }
            }
        }
        if topo.len() != num_nodes {
            return Err(Error::InvalidParameter("graph contains a cycle".into()));
        }
        let dag = Dag {
            num_nodes,
            source,
            sink,
            edges,
            out_edges,
            topo,
            max_path_edges: 0,
        };
        let reaches_sink = dag.longest_edges_to_sink();
        if reaches_sink[source].is_none() {
            return Err(Error::InvalidParameter(
                "sink is not reachable from source".into(),
            ));
        }
        let max_path_edges = reaches_sink[source].unwrap();
        Ok(Dag {
            max_path_edges,
            ..dag
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn max_path_edges(&self) -> usize {
        self.max_path_edges
    }

    /// Longest (in edge count) path to the sink from each node, `None` when
    /// the sink is unreachable.
    fn longest_edges_to_sink(&self) -> Vec<Option<usize>> {
        let mut len = vec![None; self.num_nodes];
        len[self.sink] = Some(0);
        for &u in self.topo.iter().rev() {
            for &e in &self.out_edges[u] {
                if let Some(lw) = len[self.edges[e].1] {
                    let cand = lw + 1;
                    if len[u].map_or(true, |cur| cand > cur) {
                        len[u] = Some(cand);
                    }
                }
            }
        }
        len
    }

    /// Shortest-path value to the sink from each node under `costs`
    /// (`+inf` where the sink is unreachable).
    fn dist_to_sink(&self, costs: &[f64]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.num_nodes];
        dist[self.sink] = 0.0;
        for &u in self.topo.iter().rev() {
            if u == self.sink {
                continue;
            }
            for &e in &self.out_edges[u] {
                let w = self.edges[e].1;
                if dist[w].is_finite() {
                    let cand = costs[e] + dist[w];
                    if cand < dist[u] {
                        dist[u] = cand;
                    }
                }
            }
        }
        dist
    }

    /// Writes the edge support of the minimum-cost source-sink path into
    /// `out`, breaking exact-value ties toward the lexicographically smallest
    /// edge-incidence vector.
    pub(crate) fn minimizer_support(&self, costs: &[f64], out: &mut Vec<usize>) {
        let dist = self.dist_to_sink(costs);
        // An edge is "tight" when it lies on some optimal path by the DP's
        // own arithmetic: dist[u] == costs[e] + dist[w] exactly as computed.
        let tight: Vec<bool> = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(u, w))| {
                dist[w].is_finite() && dist[u].is_finite() && costs[e] + dist[w] == dist[u]
            })
            .collect();
        // Greedily exclude low-index edges while an optimal path avoiding all
        // exclusions still exists; what survives is the lexicographic minimum.
        let mut excluded = vec![false; self.edges.len()];
        for e in 0..self.edges.len() {
            if !tight[e] || excluded[e] {
                continue;
            }
            excluded[e] = true;
            if !self.sink_reachable(&tight, &excluded) {
                excluded[e] = false;
            }
        }
        out.clear();
        // Walk the unique surviving optimal path.
        let mut u = self.source;
        while u != self.sink {
            let e = self.out_edges[u]
                .iter()
                .copied()
                .find(|&e| {
                    tight[e] && !excluded[e] && self.reaches_sink_from(self.edges[e].1, &tight, &excluded)
                })
                .expect("tight subgraph must contain a source-sink path");
            out.push(e);
            u = self.edges[e].1;
        }
        out.sort_unstable();
    }

    fn sink_reachable(&self, tight: &[bool], excluded: &[bool]) -> bool {
        self.reaches_sink_from(self.source, tight, excluded)
    }

    /// DFS over tight, non-excluded edges.
    fn reaches_sink_from(&self, start: usize, tight: &[bool], excluded: &[bool]) -> bool {
        if start == self.sink {
            return true;
        }
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &e in &self.out_edges[u] {
                if !tight[e] || excluded[e] {
                    continue;
                }
                let w = self.edges[e].1;
                if w == self.sink {
                    return true;
                }
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Does this edge-incidence vector form a single source-sink path?
    pub(crate) fn is_path(&self, action: &Action) -> bool {
        if action.dim() != self.edges.len() {
            return false;
        }
        let picked: Vec<usize> = action.support().collect();
        let mut used = vec![false; self.edges.len()];
        let mut u = self.source;
        let mut steps = 0;
        while u != self.sink {
            let mut next = None;
            for &e in &self.out_edges[u] {
                if action.get(e) && !used[e] {
                    if next.is_some() {
                        return false; // branching
                    }
                    next = Some(e);
                }
            }
            match next {
                Some(e) => {
                    used[e] = true;
                    u = self.edges[e].1;
                    steps += 1;
                }
                None => return false, // dead end before the sink
            }
        }
        steps == picked.len() && picked.iter().all(|&e| used[e])
    }

    /// Enumerates all source-sink paths as edge supports, refusing once more
    /// than `cap` have been found.
    pub(crate) fn enumerate_paths(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        let mut paths = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        self.enumerate_from(self.source, &mut stack, &mut paths, cap)?;
        Ok(paths)
    }

    fn enumerate_from(
        &self,
        u: usize,
        stack: &mut Vec<usize>,
        paths: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if u == self.sink {
            if paths.len() >= cap {
                return Err(Error::NotEnumerable { cap });
            }
            let mut support = stack.clone();
            support.sort_unstable();
            paths.push(support);
            return Ok(());
        }
        for &e in &self.out_edges[u] {
            stack.push(e);
            self.enumerate_from(self.edges[e].1, stack, paths, cap)?;
            stack.pop();
        }
        Ok(())
    }
}
