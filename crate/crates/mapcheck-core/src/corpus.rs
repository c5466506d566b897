//! Deterministic model corpus and reference oracles.
//!
//! Seeded Erdős–Rényi graphs small enough for the transitive-closure brute
//! force, a few handcrafted graphs, and helpers to enumerate any model into
//! an [`ExplicitGraph`]. Tests and benchmarks share these; the closure check
//! is the independent oracle every cycle-detection result is compared to.

use std::collections::BTreeMap;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::SearchError;
use crate::model::{builtin_model, ExplicitGraph, GraphSystem, TransitionSystem};

/// The four-state graph with states 1..4, accepting {2, 4}, edges
/// 4→3, 3→1, 1→2, 2→3 and initial state 4. Its single cycle 2→3→1→2 runs
/// through accepting state 2, which is dominated by accepting state 4 in
/// the first MAP iteration.
pub fn fig2_graph() -> ExplicitGraph {
    let mut g = ExplicitGraph::new(5);
    g.add_initial(4);
    g.set_accepting(2);
    g.set_accepting(4);
    g.add_edge(4, 3);
    g.add_edge(3, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g
}

pub fn fig2_system() -> GraphSystem {
    GraphSystem::new(fig2_graph())
}

/// Chain 0→1→2 with accepting 1: an accepting state on no cycle.
pub fn chain_graph() -> ExplicitGraph {
    let mut g = ExplicitGraph::new(3);
    g.add_initial(0);
    g.set_accepting(1);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g
}

/// Lasso 0→1→2→1 with accepting 2: a single accepting cycle.
pub fn lasso_graph() -> ExplicitGraph {
    let mut g = ExplicitGraph::new(3);
    g.add_initial(0);
    g.set_accepting(2);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 1);
    g
}

/// Diamond DAG with an accepting sink: reachable accepting state, no cycle.
pub fn diamond_graph() -> ExplicitGraph {
    let mut g = ExplicitGraph::new(4);
    g.add_initial(0);
    g.set_accepting(3);
    g.add_edge(0, 1);
    g.add_edge(0, 2);
    g.add_edge(1, 3);
    g.add_edge(2, 3);
    g
}

/// Readers/writers builtin with the usual parameter names.
pub fn readers_writers(r: i64, w: i64, buggy: bool) -> Box<dyn TransitionSystem> {
    let params: BTreeMap<String, i64> = [
        ("R".to_string(), r),
        ("W".to_string(), w),
        ("ERROR".to_string(), buggy as i64),
    ]
    .into_iter()
    .collect();
    builtin_model("readers_writers", &params).expect("valid parameters")
}

pub fn token_ring(n: i64) -> Box<dyn TransitionSystem> {
    let params: BTreeMap<String, i64> = [("N".to_string(), n)].into_iter().collect();
    builtin_model("token_ring", &params).expect("valid parameters")
}

pub fn counter_cycle(n: i64) -> Box<dyn TransitionSystem> {
    let params: BTreeMap<String, i64> = [("N".to_string(), n)].into_iter().collect();
    builtin_model("counter_cycle", &params).expect("valid parameters")
}

/// Seeded Erdős–Rényi digraph (self-loops allowed): every ordered pair is
/// an edge with probability `edge_prob`, every state accepting with
/// probability `accept_prob`, state 0 initial.
pub fn random_graph(seed: u64, n: u32, edge_prob: f64, accept_prob: f64) -> ExplicitGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ExplicitGraph::new(n);
    g.add_initial(0);
    for s in 0..n {
        if rng.gen_bool(accept_prob) {
            g.set_accepting(s);
        }
    }
    for src in 0..n {
        for dst in 0..n {
            if rng.gen_bool(edge_prob) {
                g.add_edge(src, dst);
            }
        }
    }
    g
}

/// Deterministic corpus of `count` random graphs cycling through sizes up
/// to 50 states and edge probabilities {0.02, 0.05, 0.1}.
pub fn random_corpus(count: usize, base_seed: u64) -> Vec<ExplicitGraph> {
    let probs = [0.02, 0.05, 0.1];
    (0..count)
        .map(|i| {
            let n = 5 + (i as u32 * 7) % 46; // 5..=50
            let p = probs[i % probs.len()];
            random_graph(base_seed.wrapping_add(i as u64), n, p, 0.2)
        })
        .collect()
}

/// Enumerate a model's reachable states into an explicit graph, assigning
/// ids in BFS visit order.
pub fn enumerate_graph(model: &dyn TransitionSystem, cap: u64) -> Result<ExplicitGraph, SearchError> {
    let mut ids: HashMap<crate::model::EncodedState, u32> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for s in model.initial_states() {
        if !ids.contains_key(&s) {
            let id = ids.len() as u32;
            ids.insert(s.clone(), id);
            order.push(s.clone());
            queue.push_back(s);
        }
    }
    let mut edges: Vec<(u32, u32)> = Vec::new();
    while let Some(s) = queue.pop_front() {
        let sid = ids[&s];
        for t in model.successors(&s)? {
            let tid = match ids.get(&t) {
                Some(&id) => id,
                None => {
                    if ids.len() as u64 >= cap {
                        return Err(SearchError::Capped {
                            cap,
                            visited: ids.len() as u64,
                        });
                    }
                    let id = ids.len() as u32;
                    ids.insert(t.clone(), id);
                    order.push(t.clone());
                    queue.push_back(t);
                    id
                }
            };
            edges.push((sid, tid));
        }
    }
    let mut g = ExplicitGraph::new(ids.len() as u32);
    for s in model.initial_states() {
        g.add_initial(ids[&s]);
    }
    for (i, s) in order.iter().enumerate() {
        if model.is_accepting(s)? {
            g.set_accepting(i as u32);
        }
    }
    for (src, dst) in edges {
        g.add_edge(src, dst);
    }
    Ok(g)
}

/// Brute-force accepting-cycle oracle: true iff some reachable accepting
/// state can reach itself through at least one edge. Quadratic; intended
/// for graphs of at most a few hundred states.
pub fn closure_has_accepting_cycle(g: &ExplicitGraph) -> bool {
    let n = g.num_states() as usize;
    let mut reachable = vec![false; n];
    let mut stack: Vec<u32> = g.initial().to_vec();
    while let Some(s) = stack.pop() {
        if reachable[s as usize] {
            continue;
        }
        reachable[s as usize] = true;
        stack.extend(g.successors_of(s));
    }
    for s in 0..g.num_states() {
        if !reachable[s as usize] || !g.is_accepting(s) {
            continue;
        }
        // Can s reach itself via >= 1 edge?
        let mut seen = vec![false; n];
        let mut stack: Vec<u32> = g.successors_of(s).to_vec();
        while let Some(t) = stack.pop() {
            if t == s {
                return true;
            }
            if seen[t as usize] {
                continue;
            }
            seen[t as usize] = true;
            stack.extend(g.successors_of(t));
        }
    }
    false
}

/// Number of reachable accepting states (for iteration-bound checks).
pub fn reachable_accepting_count(g: &ExplicitGraph) -> u64 {
    let n = g.num_states() as usize;
    let mut reachable = vec![false; n];
    let mut stack: Vec<u32> = g.initial().to_vec();
    while let Some(s) = stack.pop() {
        if reachable[s as usize] {
            continue;
        }
        reachable[s as usize] = true;
        stack.extend(g.successors_of(s));
    }
    (0..g.num_states())
        .filter(|&s| reachable[s as usize] && g.is_accepting(s))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{bfs_reach, ndfs_cycle};

    #[test]
    fn oracle_agrees_on_handcrafted_graphs() {
        assert!(closure_has_accepting_cycle(&fig2_graph()));
        assert!(!closure_has_accepting_cycle(&chain_graph()));
        assert!(closure_has_accepting_cycle(&lasso_graph()));
        assert!(!closure_has_accepting_cycle(&diamond_graph()));
    }

    #[test]
    fn oracle_ignores_unreachable_cycles() {
        let mut g = ExplicitGraph::new(4);
        g.add_initial(0);
        g.add_edge(0, 1);
        // Accepting self-loop not reachable from 0.
        g.set_accepting(3);
        g.add_edge(3, 3);
        assert!(!closure_has_accepting_cycle(&g));
    }

    #[test]
    fn random_graphs_are_reproducible() {
        let a = random_graph(42, 20, 0.1, 0.2);
        let b = random_graph(42, 20, 0.1, 0.2);
        assert_eq!(a, b);
        let c = random_graph(43, 20, 0.1, 0.2);
        assert_ne!(a, c);
    }

    #[test]
    fn enumerate_graph_preserves_counts() {
        let model = readers_writers(2, 2, true);
        let g = enumerate_graph(model.as_ref(), 1 << 20).unwrap();
        let stats = bfs_reach(model.as_ref(), 1 << 20).unwrap();
        assert_eq!(g.num_states() as u64, stats.states);
        let edge_total: u64 = (0..g.num_states())
            .map(|s| g.successors_of(s).len() as u64)
            .sum();
        assert_eq!(edge_total, stats.transitions);
        // Enumerated graph has the same verdict as the original model.
        assert_eq!(
            closure_has_accepting_cycle(&g),
            ndfs_cycle(model.as_ref(), 1 << 20).unwrap().found
        );
    }
}
