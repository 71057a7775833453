//! Urban checkpoint-placement game on a road graph.
//!
//! Attackers walk shortest paths from entry nodes to targets; the defender
//! spreads an expected number of checkpoints over edges and scores 1
//! whenever a checkpoint sits on the chosen path. Edge-by-path incidence
//! gives the payoff matrix, the budgeted canonical form gives the LP, and
//! new targets feed the incremental machinery one payoff column at a time.

use std::collections::BTreeSet;
use std::fmt;

use crate::incremental::{iterative_solve, ExtensionEvent, IncrementalError};
use crate::lp::{canonicalize_budgeted, CanonicalLp, LpError, PayoffMatrix, Solution};
use crate::simplex::{solve, SearchPath, SolveError};

#[derive(Debug)]
pub enum ScenarioError {
    Parse { line: usize, message: String },
    Validation(String),
    /// More than the global cap of 10,000 attack paths.
    TooManyPaths,
    /// The new target contributes no path that is not already present.
    NoNewPaths,
    Lp(LpError),
    Solve(SolveError),
    Incremental(IncrementalError),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ScenarioError::Validation(msg) => write!(f, "{msg}"),
            ScenarioError::TooManyPaths => write!(f, "more than {PATH_CAP} attack paths"),
            ScenarioError::NoNewPaths => write!(f, "target adds no new attack path"),
            ScenarioError::Lp(e) => write!(f, "{e}"),
            ScenarioError::Solve(e) => write!(f, "{e}"),
            ScenarioError::Incremental(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<LpError> for ScenarioError {
    fn from(e: LpError) -> Self {
        ScenarioError::Lp(e)
    }
}

impl From<SolveError> for ScenarioError {
    fn from(e: SolveError) -> Self {
        ScenarioError::Solve(e)
    }
}

impl From<IncrementalError> for ScenarioError {
    fn from(e: IncrementalError) -> Self {
        ScenarioError::Incremental(e)
    }
}

pub const PATH_CAP: usize = 10_000;

/// Undirected road graph with entry nodes, targets, and a checkpoint budget.
#[derive(Clone, Debug)]
pub struct SecurityGraph {
    pub nodes: usize,
    /// Edge list; the position in this vector is the edge's stable index.
    pub edges: Vec<(usize, usize)>,
    pub sources: BTreeSet<usize>,
    pub targets: BTreeSet<usize>,
    pub budget: f64,
}

impl SecurityGraph {
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        for list in &mut adj {
            list.sort_by_key(|&(_, e)| e);
        }
        adj
    }

    fn bfs_distances(&self, from: usize, adj: &[Vec<(usize, usize)>]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.nodes];
        dist[from] = 0;
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn reachable_from_any_source(&self, node: usize) -> bool {
        let adj = self.adjacency();
        self.sources.iter().any(|&s| self.bfs_distances(s, &adj)[node] != usize::MAX)
    }
}

/// Parse the graph text format:
///
/// ```text
/// # comments start with '#'
/// nodes <N> budget <B>
/// edge <u> <v>
/// source <u>
/// target <u>
/// ```
pub fn load_graph(text: &str) -> Result<SecurityGraph, ScenarioError> {
    let parse_err = |line: usize, message: &str| ScenarioError::Parse {
        line,
        message: message.to_string(),
    };
    let mut nodes = None;
    let mut budget = 0.0;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut sources = BTreeSet::new();
    let mut targets: Vec<(usize, usize)> = Vec::new(); // (node, declaration line)

    for (idx, raw) in text.lines().enumerate() {
        let lno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "nodes" => {
                if nodes.is_some() {
                    return Err(parse_err(lno, "duplicate header"));
                }
                if tokens.len() != 4 || tokens[2] != "budget" {
                    return Err(parse_err(lno, "expected 'nodes <N> budget <B>'"));
                }
                let count: usize =
                    tokens[1].parse().map_err(|_| parse_err(lno, "bad node count"))?;
                let b: f64 = tokens[3].parse().map_err(|_| parse_err(lno, "bad budget"))?;
                if !b.is_finite() || b < 0.0 {
                    return Err(parse_err(lno, "budget must be a non-negative number"));
                }
                nodes = Some(count);
                budget = b;
            }
            "edge" => {
                let n = nodes.ok_or_else(|| parse_err(lno, "header must come first"))?;
                if tokens.len() != 3 {
                    return Err(parse_err(lno, "expected 'edge <u> <v>'"));
                }
                let u: usize = tokens[1].parse().map_err(|_| parse_err(lno, "bad node id"))?;
                let v: usize = tokens[2].parse().map_err(|_| parse_err(lno, "bad node id"))?;
                if u >= n || v >= n {
                    return Err(parse_err(lno, "node id out of range"));
                }
                if u == v {
                    return Err(parse_err(lno, "self-loop"));
                }
                let key = (u.min(v), u.max(v));
                if !edge_set.insert(key) {
                    return Err(parse_err(lno, "duplicate edge"));
                }
                edges.push((u, v));
            }
            "source" | "target" => {
                let n = nodes.ok_or_else(|| parse_err(lno, "header must come first"))?;
                if tokens.len() != 2 {
                    return Err(parse_err(lno, "expected one node id"));
                }
                let u: usize = tokens[1].parse().map_err(|_| parse_err(lno, "bad node id"))?;
                if u >= n {
                    return Err(parse_err(lno, "node id out of range"));
                }
                if tokens[0] == "source" {
                    sources.insert(u);
                } else {
                    targets.push((u, lno));
                }
            }
            other => return Err(parse_err(lno, &format!("unknown directive '{other}'"))),
        }
    }

    let nodes = nodes.ok_or_else(|| parse_err(1, "missing 'nodes <N> budget <B>' header"))?;
    if sources.is_empty() {
        return Err(parse_err(1, "no source nodes"));
    }
    if targets.is_empty() {
        return Err(parse_err(1, "no target nodes"));
    }
    for &(t, lno) in &targets {
        if sources.contains(&t) {
            return Err(parse_err(lno, "node is both source and target"));
        }
    }
    let graph = SecurityGraph {
        nodes,
        edges,
        sources,
        targets: targets.iter().map(|&(t, _)| t).collect(),
        budget,
    };
    for &(t, lno) in &targets {
        if !graph.reachable_from_any_source(t) {
            return Err(parse_err(lno, "target unreachable from every source"));
        }
    }
    Ok(graph)
}

/// One attack route: the edges of a shortest path for its (source, target)
/// pair, in walking order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackPath {
    pub source: usize,
    pub target: usize,
    pub edges: Vec<usize>,
}

/// All attack routes of a scenario, one LP column each.
#[derive(Clone, Debug, Default)]
pub struct PathSet {
    pub paths: Vec<AttackPath>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Enumerate every minimum-hop path from `source` to `target`, walking the
/// BFS distance field backwards. Neighbor order follows edge indices, so the
/// output order is deterministic.
fn paths_for_pair(
    adj: &[Vec<(usize, usize)>],
    dist: &[usize],
    source: usize,
    target: usize,
    seen: &mut BTreeSet<Vec<usize>>,
    out: &mut Vec<AttackPath>,
) -> Result<(), ScenarioError> {
    if dist[target] == usize::MAX {
        return Ok(());
    }
    let mut stack: Vec<usize> = Vec::new();
    fn recurse(
        adj: &[Vec<(usize, usize)>],
        dist: &[usize],
        node: usize,
        source: usize,
        target: usize,
        stack: &mut Vec<usize>,
        seen: &mut BTreeSet<Vec<usize>>,
        out: &mut Vec<AttackPath>,
    ) -> Result<(), ScenarioError> {
        if node == source {
            // stack holds edges target-to-source; flip to walking order
            let edges: Vec<usize> = stack.iter().rev().copied().collect();
            let mut key = edges.clone();
            key.sort_unstable();
            if seen.insert(key) {
                if out.len() >= PATH_CAP {
                    return Err(ScenarioError::TooManyPaths);
                }
                out.push(AttackPath { source, target, edges });
            }
            return Ok(());
        }
        for &(prev, edge) in &adj[node] {
            if dist[prev] + 1 == dist[node] {
                stack.push(edge);
                recurse(adj, dist, prev, source, target, stack, seen, out)?;
                stack.pop();
            }
        }
        Ok(())
    }
    recurse(adj, dist, target, source, target, &mut stack, seen, out)
}

/// All shortest attack paths, per (source, target) pair, without duplicate
/// edge sets. Capped at [`PATH_CAP`] paths.
pub fn enumerate_shortest_paths(graph: &SecurityGraph) -> Result<PathSet, ScenarioError> {
    let adj = graph.adjacency();
    let mut seen = BTreeSet::new();
    let mut paths = Vec::new();
    for &s in &graph.sources {
        let dist = graph.bfs_distances(s, &adj);
        for &t in &graph.targets {
            paths_for_pair(&adj, &dist, s, t, &mut seen, &mut paths)?;
        }
    }
    Ok(PathSet { paths })
}

/// Edge-by-path 0/1 incidence payoff: entry (e, p) is 1 when edge `e` lies
/// on path `p`.
pub fn build_payoff(paths: &PathSet, edge_count: usize) -> Result<PayoffMatrix, ScenarioError> {
    if paths.is_empty() {
        return Err(ScenarioError::Validation("empty path set".into()));
    }
    let mut rows = vec![vec![0.0; paths.len()]; edge_count];
    for (p, path) in paths.paths.iter().enumerate() {
        for &e in &path.edges {
            rows[e][p] = 1.0;
        }
    }
    PayoffMatrix::new(rows).map_err(ScenarioError::Lp)
}

/// A solved checkpoint game, updatable in place when targets appear.
#[derive(Clone, Debug)]
pub struct ScenarioState {
    pub graph: SecurityGraph,
    pub paths: PathSet,
    pub payoff: PayoffMatrix,
    pub lp: CanonicalLp,
    pub solution: Solution,
    pub path: SearchPath,
}

impl ScenarioState {
    /// Per-edge checkpoint probabilities of the current solution.
    pub fn edge_probabilities(&self) -> &[f64] {
        &self.solution.strategy
    }
}

/// Build and solve the checkpoint game for a graph.
pub fn solve_checkpoint_game(graph: &SecurityGraph) -> Result<ScenarioState, ScenarioError> {
    let paths = enumerate_shortest_paths(graph)?;
    let payoff = build_payoff(&paths, graph.edges.len())?;
    let lp = canonicalize_budgeted(&payoff, graph.budget)?;
    let (solution, path) = solve(&lp)?;
    Ok(ScenarioState { graph: graph.clone(), paths, payoff, lp, solution, path })
}

/// Summary of one target addition.
#[derive(Clone, Debug)]
pub struct AddTargetReport {
    pub columns_added: usize,
    /// Every added column kept the old optimum.
    pub retained_all: bool,
    pub pivots_used: usize,
    pub value: f64,
}

/// Add a target: enumerate its new shortest paths and feed them to the
/// warm-started solver one payoff column at a time, in enumeration order.
pub fn add_target(
    state: &mut ScenarioState,
    new_target: usize,
) -> Result<AddTargetReport, ScenarioError> {
    if new_target >= state.graph.nodes {
        return Err(ScenarioError::Validation(format!("node {new_target} out of range")));
    }
    if state.graph.sources.contains(&new_target) {
        return Err(ScenarioError::Validation(format!("node {new_target} is a source")));
    }
    if state.graph.targets.contains(&new_target) {
        return Err(ScenarioError::Validation(format!("node {new_target} is already a target")));
    }
    if !state.graph.reachable_from_any_source(new_target) {
        return Err(ScenarioError::Validation(format!(
            "node {new_target} unreachable from every source"
        )));
    }

    let adj = state.graph.adjacency();
    let mut seen: BTreeSet<Vec<usize>> = state
        .paths
        .paths
        .iter()
        .map(|p| {
            let mut key = p.edges.clone();
            key.sort_unstable();
            key
        })
        .collect();
    let mut new_paths = Vec::new();
    for &s in &state.graph.sources {
        let dist = state.graph.bfs_distances(s, &adj);
        paths_for_pair(&adj, &dist, s, new_target, &mut seen, &mut new_paths)?;
    }
    if new_paths.is_empty() {
        return Err(ScenarioError::NoNewPaths);
    }

    let mut retained_all = true;
    let mut pivots_used = 0;
    for path in &new_paths {
        let mut column = vec![0.0; state.graph.edges.len()];
        for &e in &path.edges {
            column[e] = 1.0;
        }
        let event = ExtensionEvent::new(
            state.lp.clone(),
            &column,
            state.solution.clone(),
            state.path.clone(),
        )?;
        let result = iterative_solve(&event)?;
        retained_all &= result.retained;
        pivots_used += result.pivots_used;
        state.lp = event.new_lp;
        state.payoff = state.payoff.with_column(&column)?;
        state.solution = result.solution;
        state.path = result.path;
        state.paths.paths.push(path.clone());
    }
    state.graph.targets.insert(new_target);
    Ok(AddTargetReport {
        columns_added: new_paths.len(),
        retained_all,
        pivots_used,
        value: state.solution.value,
    })
}
