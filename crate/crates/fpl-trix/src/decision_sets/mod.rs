//! Combinatorial decision sets and their exact linear minimization oracles.
//!
//! Four families share one interface: single arms (the bandit case), m-sets
//! (all subsets of fixed size m), perfect matchings on an n x n bipartite
//! graph (components are the n^2 edges, row-major), and source-sink paths in
//! a DAG (components are the edges). Every oracle accepts arbitrary signed
//! finite costs and breaks exact-value ties toward the lexicographically
//! smallest incidence vector, so repeated calls are deterministic.

mod dag;
mod hungarian;

pub use dag::Dag;

use rand::Rng;

use crate::action::Action;
use crate::error::{check_dim, check_finite, Error, Result};

/// Refuse to materialize decision sets larger than this.
pub const ENUMERATION_CAP: usize = 1_000_000;

#[derive(Clone, Debug)]
pub enum DecisionSet {
    /// `d` single arms; actions are the unit incidence vectors.
    Mab { arms: usize },
    /// All subsets of size `m` out of `d` components.
    MSet { d: usize, m: usize },
    /// Perfect matchings in the complete n x n bipartite graph; component
    /// `r * n + c` is the edge from left node `r` to right node `c`.
    Matching { n: usize },
    /// Source-sink paths in a DAG; components are the edges.
    DagPath(Dag),
}

impl DecisionSet {
    pub fn mab(arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidParameter("need at least one arm".into()));
        }
        Ok(DecisionSet::Mab { arms })
    }

    pub fn mset(d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 || m > d {
            return Err(Error::InvalidParameter(format!(
                "m-set requires 1 <= m <= d, got d={d}, m={m}"
            )));
        }
        Ok(DecisionSet::MSet { d, m })
    }

    pub fn matching(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "matching requires at least one node per side".into(),
            ));
        }
        Ok(DecisionSet::Matching { n })
    }

    pub fn dag_path(
        num_nodes: usize,
        edges: Vec<(usize, usize)>,
        source: usize,
        sink: usize,
    ) -> Result<Self> {
        Ok(DecisionSet::DagPath(Dag::new(num_nodes, edges, source, sink)?))
    }

    /// Ambient dimension: number of loss components.
    pub fn dim(&self) -> usize {
        match self {
            DecisionSet::Mab { arms } => *arms,
            DecisionSet::MSet { d, .. } => *d,
            DecisionSet::Matching { n } => n * n,
            DecisionSet::DagPath(dag) => dag.num_edges(),
        }
    }

    /// Largest action weight `m = max_v ||v||_1`.
    pub fn max_weight(&self) -> usize {
        match self {
            DecisionSet::Mab { .. } => 1,
            DecisionSet::MSet { m, .. } => *m,
            DecisionSet::Matching { n } => *n,
            DecisionSet::DagPath(dag) => dag.max_path_edges(),
        }
    }

    /// Short structural descriptor, e.g. `mset:d=8:m=2`.
    pub fn descriptor(&self) -> String {
        match self {
            DecisionSet::Mab { arms } => format!("mab:d={arms}"),
            DecisionSet::MSet { d, m } => format!("mset:d={d}:m={m}"),
            DecisionSet::Matching { n } => format!("matching:n={n}"),
            DecisionSet::DagPath(dag) => {
                let edges: Vec<String> = dag
                    .edges()
                    .iter()
                    .map(|&(u, w)| format!("{u}-{w}"))
                    .collect();
                format!(
                    "dagpath:nodes={}:source={}:sink={}:edges={}",
                    dag.num_nodes(),
                    dag.source(),
                    dag.sink(),
                    edges.join(";")
                )
            }
        }
    }

    fn check_costs(&self, costs: &[f64]) -> Result<()> {
        check_dim(costs, self.dim())?;
        check_finite(costs)
    }

    /// Exact linear minimization: the action minimizing `v . costs`, with
    /// exact-value ties broken toward the lexicographically smallest
    /// incidence vector. Costs may be negative; NaN/inf or a wrong dimension
    /// is an error.
    pub fn linear_minimizer(&self, costs: &[f64]) -> Result<Action> {
        self.check_costs(costs)?;
        let mut support = Vec::with_capacity(self.max_weight());
        self.minimizer_support(costs, &mut support);
        Action::from_support(self.dim(), &support)
    }

    /// Validation-free minimizer core writing the support into `out`
    /// (ascending). Used directly by resampling hot loops.
    pub(crate) fn minimizer_support(&self, costs: &[f64], out: &mut Vec<usize>) {
        out.clear();
        match self {
            DecisionSet::Mab { arms } => {
                let mut best = 0usize;
                let mut best_cost = costs[0];
                for (i, &c) in costs.iter().enumerate().take(*arms).skip(1) {
                    // `<=` so the largest index wins exact ties, which makes
                    // the unit incidence vector lexicographically smallest.
                    if c <= best_cost {
                        best_cost = c;
                        best = i;
                    }
                }
                out.push(best);
            }
            DecisionSet::MSet { d, m } => {
                out.extend(0..*d);
                // Cheapest m components; on exact cost ties the larger index
                // is taken first (smaller incidence vector).
                out.sort_unstable_by(|&i, &j| {
                    costs[i]
                        .partial_cmp(&costs[j])
                        .expect("finite costs")
                        .then(j.cmp(&i))
                });
                out.truncate(*m);
                out.sort_unstable();
            }
            DecisionSet::Matching { n } => {
                let assignment = hungarian::lexicographic_min_assignment(*n, costs);
                out.extend(assignment.iter().enumerate().map(|(r, &c)| r * n + c));
                out.sort_unstable();
            }
            DecisionSet::DagPath(dag) => dag.minimizer_support(costs, out),
        }
    }

    /// All actions, lexicographically sorted; errors beyond
    /// [`ENUMERATION_CAP`].
    pub fn enumerate_actions(&self) -> Result<Vec<Action>> {
        let d = self.dim();
        let mut actions = match self {
            DecisionSet::Mab { arms } => (0..*arms)
                .map(|i| Action::from_support(d, &[i]))
                .collect::<Result<Vec<_>>>()?,
            DecisionSet::MSet { d, m } => {
                if binomial_exceeds(*d, *m, ENUMERATION_CAP) {
                    return Err(Error::NotEnumerable {
                        cap: ENUMERATION_CAP,
                    });
                }
                let mut out = Vec::new();
                let mut combo: Vec<usize> = (0..*m).collect();
                loop {
                    out.push(Action::from_support(*d, &combo)?);
                    // Advance to the next combination in colex order.
                    let mut i = *m;
                    loop {
                        if i == 0 {
                            return sorted(out);
                        }
                        i -= 1;
                        if combo[i] != i + d - m {
                            break;
                        }
                    }
                    combo[i] += 1;
                    for j in (i + 1)..*m {
                        combo[j] = combo[j - 1] + 1;
                    }
                }
            }
            DecisionSet::Matching { n } => {
                if factorial_exceeds(*n, ENUMERATION_CAP) {
                    return Err(Error::NotEnumerable {
                        cap: ENUMERATION_CAP,
                    });
                }
                let mut out = Vec::new();
                let mut cols: Vec<usize> = (0..*n).collect();
                permute(&mut cols, 0, &mut |perm| {
                    let support: Vec<usize> =
                        perm.iter().enumerate().map(|(r, &c)| r * n + c).collect();
                    out.push(Action::from_support(d, &support));
                });
                out.into_iter().collect::<Result<Vec<_>>>()?
            }
            DecisionSet::DagPath(dag) => dag
                .enumerate_paths(ENUMERATION_CAP)?
                .into_iter()
                .map(|support| Action::from_support(d, &support))
                .collect::<Result<Vec<_>>>()?,
        };
        actions.sort_unstable();
        Ok(actions)
    }

    /// Membership test.
    pub fn contains(&self, action: &Action) -> bool {
        if action.dim() != self.dim() {
            return false;
        }
        match self {
            DecisionSet::Mab { .. } => action.weight() == 1,
            DecisionSet::MSet { m, .. } => action.weight() == *m,
            DecisionSet::Matching { n } => {
                let mut row_seen = vec![false; *n];
                let mut col_seen = vec![false; *n];
                for i in action.support() {
                    let (r, c) = (i / n, i % n);
                    if row_seen[r] || col_seen[c] {
                        return false;
                    }
                    row_seen[r] = true;
                    col_seen[c] = true;
                }
                row_seen.iter().all(|&b| b)
            }
            DecisionSet::DagPath(dag) => dag.is_path(action),
        }
    }

    /// Best fixed action in hindsight for a cumulative loss vector, returned
    /// with its total loss. Rejects negative entries: cumulative losses of
    /// per-round losses in [0, 1] cannot be negative.
    pub fn best_fixed_action(&self, cumulative: &[f64]) -> Result<(Action, f64)> {
        self.check_costs(cumulative)?;
        if let Some(i) = cumulative.iter().position(|&c| c < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cumulative loss has negative entry {} at component {i}",
                cumulative[i]
            )));
        }
        let action = self.linear_minimizer(cumulative)?;
        let value = action.dot(cumulative)?;
        Ok((action, value))
    }

    /// Uniform draw from the decision set.
    pub fn sample_uniform(&self, rng: &mut impl Rng) -> Result<Action> {
        let d = self.dim();
        match self {
            DecisionSet::Mab { arms } => Action::from_support(d, &[rng.gen_range(0..*arms)]),
            DecisionSet::MSet { d, m } => {
                let support = rand::seq::index::sample(rng, *d, *m).into_vec();
                Action::from_support(*d, &support)
            }
            DecisionSet::Matching { n } => {
                use rand::seq::SliceRandom;
                let mut cols: Vec<usize> = (0..*n).collect();
                cols.shuffle(rng);
                let support: Vec<usize> =
                    cols.iter().enumerate().map(|(r, &c)| r * n + c).collect();
                Action::from_support(d, &support)
            }
            DecisionSet::DagPath(_) => {
                // Uniform over the enumerated paths; errors when too many.
                let actions = self.enumerate_actions()?;
                Ok(actions[rng.gen_range(0..actions.len())].clone())
            }
        }
    }
}

fn sorted(mut actions: Vec<Action>) -> Result<Vec<Action>> {
    actions.sort_unstable();
    Ok(actions)
}

fn binomial_exceeds(d: usize, m: usize, cap: usize) -> bool {
    let m = m.min(d - m);
    let mut value: u128 = 1;
    for k in 0..m {
        value = value * (d - k) as u128 / (k + 1) as u128;
        if value > cap as u128 {
            return true;
        }
    }
    false
}

fn factorial_exceeds(n: usize, cap: usize) -> bool {
    let mut value: u128 = 1;
    for k in 2..=n {
        value *= k as u128;
        if value > cap as u128 {
            return true;
        }
    }
    false
}

/// Heap's algorithm over `items[at..]`.
fn permute(items: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, visit);
        items.swap(at, i);
    }
}
