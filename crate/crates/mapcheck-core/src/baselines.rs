//! Sequential reference algorithms: BFS/DFS reachability, nested-DFS
//! accepting-cycle detection, and the sequential form of the maximal
//! accepting predecessors (MAP) iteration.
//!
//! These are single-threaded and favor clarity; the distributed checker is
//! validated against them.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};

use crate::model::{EncodedState, ModelError, TransitionSystem};
use crate::store::map_order;

/// Reachability statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachStats {
    /// Distinct reachable states.
    pub states: u64,
    /// Successor pairs explored (each visited state contributes its full
    /// out-degree exactly once).
    pub transitions: u64,
    /// Peak size of the frontier (queue or stack).
    pub peak_frontier: u64,
}

/// Outcome of a cycle search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleVerdict {
    pub found: bool,
    /// Accepting state witnessing the cycle (its own maximal accepting
    /// predecessor, or the seed of the successful inner search).
    pub witness: Option<EncodedState>,
    /// MAP iterations executed (1 for nested DFS).
    pub iterations: u32,
    /// Accepting states excluded over the whole run, sorted.
    pub excluded: Vec<EncodedState>,
    pub states: u64,
    pub transitions: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("state cap of {cap} exceeded after visiting {visited} states")]
    Capped { cap: u64, visited: u64 },

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Breadth-first reachability.
pub fn bfs_reach(model: &dyn TransitionSystem, cap: u64) -> Result<ReachStats, SearchError> {
    let mut visited: HashSet<EncodedState> = HashSet::new();
    let mut queue: VecDeque<EncodedState> = VecDeque::new();
    let mut transitions = 0u64;
    let mut peak = 0u64;
    for s in model.initial_states() {
        if visited.insert(s.clone()) {
            check_cap(&visited, cap)?;
            queue.push_back(s);
        }
    }
    peak = peak.max(queue.len() as u64);
    while let Some(s) = queue.pop_front() {
        for t in model.successors(&s)? {
            transitions += 1;
            if visited.insert(t.clone()) {
                check_cap(&visited, cap)?;
                queue.push_back(t);
            }
        }
        peak = peak.max(queue.len() as u64);
    }
    Ok(ReachStats {
        states: visited.len() as u64,
        transitions,
        peak_frontier: peak,
    })
}

/// Depth-first reachability. Same states/transitions as [`bfs_reach`],
/// different traversal order. Recomputes successors through the
/// encode/decode contract rather than undoing transitions.
pub fn dfs_reach(model: &dyn TransitionSystem, cap: u64) -> Result<ReachStats, SearchError> {
    let mut visited: HashSet<EncodedState> = HashSet::new();
    let mut stack: Vec<EncodedState> = Vec::new();
    let mut transitions = 0u64;
    let mut peak = 0u64;
    for s in model.initial_states() {
        if visited.insert(s.clone()) {
            check_cap(&visited, cap)?;
            stack.push(s);
        }
    }
    peak = peak.max(stack.len() as u64);
    while let Some(s) = stack.pop() {
        for t in model.successors(&s)? {
            transitions += 1;
            if visited.insert(t.clone()) {
                check_cap(&visited, cap)?;
                stack.push(t);
            }
        }
        peak = peak.max(stack.len() as u64);
    }
    Ok(ReachStats {
        states: visited.len() as u64,
        transitions,
        peak_frontier: peak,
    })
}

fn check_cap(visited: &HashSet<EncodedState>, cap: u64) -> Result<(), SearchError> {
    if visited.len() as u64 > cap {
        return Err(SearchError::Capped {
            cap,
            visited: visited.len() as u64,
        });
    }
    Ok(())
}

struct DfsFrame {
    state: EncodedState,
    succs: Vec<EncodedState>,
    next: usize,
}

/// Two-phase nested depth-first search.
///
/// The outer DFS visits states in post-order; when an accepting state
/// finishes, an inner DFS (sharing one visited set across all inner
/// searches) looks for a path back to it. Reports `found = true` iff some
/// reachable accepting state lies on a cycle.
pub fn ndfs_cycle(model: &dyn TransitionSystem, cap: u64) -> Result<CycleVerdict, SearchError> {
    let mut outer_visited: HashSet<EncodedState> = HashSet::new();
    let mut inner_visited: HashSet<EncodedState> = HashSet::new();
    let mut transitions = 0u64;

    for init in model.initial_states() {
        if !outer_visited.insert(init.clone()) {
            continue;
        }
        check_cap(&outer_visited, cap)?;
        let succs = model.successors(&init)?;
        transitions += succs.len() as u64;
        let mut stack = vec![DfsFrame {
            state: init,
            succs,
            next: 0,
        }];
        while let Some(frame) = stack.last_mut() {
            if frame.next < frame.succs.len() {
                let t = frame.succs[frame.next].clone();
                frame.next += 1;
                if outer_visited.insert(t.clone()) {
                    check_cap(&outer_visited, cap)?;
                    let succs = model.successors(&t)?;
                    transitions += succs.len() as u64;
                    stack.push(DfsFrame {
                        state: t,
                        succs,
                        next: 0,
                    });
                }
            } else {
                let state = stack.pop().expect("frame exists").state;
                if model.is_accepting(&state)?
                    && inner_cycle_search(model, &state, &mut inner_visited)?
                {
                    return Ok(CycleVerdict {
                        found: true,
                        witness: Some(state),
                        iterations: 1,
                        excluded: Vec::new(),
                        states: outer_visited.len() as u64,
                        transitions,
                    });
                }
            }
        }
    }
    Ok(CycleVerdict {
        found: false,
        witness: None,
        iterations: 1,
        excluded: Vec::new(),
        states: outer_visited.len() as u64,
        transitions,
    })
}

fn inner_cycle_search(
    model: &dyn TransitionSystem,
    seed: &EncodedState,
    inner_visited: &mut HashSet<EncodedState>,
) -> Result<bool, SearchError> {
    let mut stack = vec![seed.clone()];
    while let Some(s) = stack.pop() {
        if !inner_visited.insert(s.clone()) {
            continue;
        }
        for t in model.successors(&s)? {
            if &t == seed {
                return Ok(true);
            }
            if !inner_visited.contains(&t) {
                stack.push(t);
            }
        }
    }
    Ok(false)
}

#[derive(Debug, Clone)]
struct SeqMeta {
    map_value: Option<EncodedState>,
    iteration_tag: u32,
    excluded: bool,
    dominated: bool,
}

/// Sequential MAP: the distributed iteration semantics on a single worker
/// with a local work stack.
///
/// Each iteration propagates, along all edges, the greatest accepting
/// predecessor seen so far; an accepting state receiving its own encoding
/// is its own predecessor and witnesses a cycle. At iteration end the
/// not-dominated accepting states (the shrink set) are provably cycle-free
/// and become excluded; the run terminates when an iteration dominates
/// nothing.
pub fn map_sequential(model: &dyn TransitionSystem, cap: u64) -> Result<CycleVerdict, SearchError> {
    let mut meta: HashMap<EncodedState, SeqMeta> = HashMap::new();
    let mut excluded_log: Vec<EncodedState> = Vec::new();
    let mut transitions = 0u64;
    let mut iteration = 1u32;

    loop {
        let mut stack: Vec<(EncodedState, Option<EncodedState>)> = model
            .initial_states()
            .into_iter()
            .map(|s| (s, None))
            .collect();
        let mut shrink: HashSet<EncodedState> = HashSet::new();
        let mut dominated_count = 0u64;

        while let Some((s, p)) = stack.pop() {
            if p.as_ref() == Some(&s) {
                excluded_log.sort_unstable();
                return Ok(CycleVerdict {
                    found: true,
                    witness: Some(s),
                    iterations: iteration,
                    excluded: excluded_log,
                    states: meta.len() as u64,
                    transitions,
                });
            }
            if !meta.contains_key(&s) && meta.len() as u64 >= cap {
                return Err(SearchError::Capped {
                    cap,
                    visited: meta.len() as u64,
                });
            }
            let accepting = model.is_accepting(&s)?;
            let entry = meta.entry(s.clone()).or_insert_with(|| SeqMeta {
                map_value: None,
                iteration_tag: 0,
                excluded: false,
                dominated: false,
            });
            let first_visit = entry.iteration_tag != iteration;
            if first_visit {
                entry.iteration_tag = iteration;
                entry.map_value = None;
                entry.dominated = false;
            }
            let active = accepting && !entry.excluded;
            if first_visit && active {
                shrink.insert(s.clone());
            }
            let new_val = match map_order(entry.map_value.as_ref(), p.as_ref()) {
                Ordering::Less => p.clone(),
                _ => entry.map_value.clone(),
            };
            if active
                && !entry.dominated
                && map_order(new_val.as_ref(), Some(&s)) == Ordering::Greater
            {
                entry.dominated = true;
                shrink.remove(&s);
                dominated_count += 1;
            }
            let changed = map_order(new_val.as_ref(), entry.map_value.as_ref()) == Ordering::Greater;
            if changed || first_visit {
                entry.map_value = new_val.clone();
                let propagate = if active {
                    match map_order(new_val.as_ref(), Some(&s)) {
                        Ordering::Less => Some(s.clone()),
                        _ => new_val,
                    }
                } else {
                    new_val
                };
                if propagate.is_some() || first_visit {
                    let succs = model.successors(&s)?;
                    if iteration == 1 && first_visit {
                        transitions += succs.len() as u64;
                    }
                    for t in succs {
                        stack.push((t, propagate.clone()));
                    }
                }
            }
        }

        if dominated_count == 0 {
            excluded_log.sort_unstable();
            return Ok(CycleVerdict {
                found: false,
                witness: None,
                iterations: iteration,
                excluded: excluded_log,
                states: meta.len() as u64,
                transitions,
            });
        }
        // The shrink set is added to the exclude set before the next
        // iteration; dominated accepting states stay accepting since they
        // may lie on an undetected cycle.
        let mut newly: Vec<EncodedState> = shrink.into_iter().collect();
        newly.sort_unstable();
        for s in newly {
            meta.get_mut(&s).expect("shrink states are interned").excluded = true;
            excluded_log.push(s);
        }
        iteration += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::model::encode_id;

    const CAP: u64 = 1 << 20;

    #[test]
    fn fig2_reachability() {
        let sys = corpus::fig2_system();
        let bfs = bfs_reach(&sys, CAP).unwrap();
        assert_eq!((bfs.states, bfs.transitions), (4, 4));
        let dfs = dfs_reach(&sys, CAP).unwrap();
        assert_eq!((dfs.states, dfs.transitions), (4, 4));
    }

    #[test]
    fn isolated_initial_state() {
        let sys = crate::model::load_graph("states 1\ninit 0\n").unwrap();
        let stats = bfs_reach(&sys, CAP).unwrap();
        assert_eq!(stats, ReachStats { states: 1, transitions: 0, peak_frontier: 1 });
    }

    #[test]
    fn fig2_ndfs_finds_the_cycle() {
        let verdict = ndfs_cycle(&corpus::fig2_system(), CAP).unwrap();
        assert!(verdict.found);
        // The only cycle is 2 -> 3 -> 1 -> 2 through accepting state 2.
        assert_eq!(verdict.witness, Some(encode_id(2, 4).unwrap()));
    }

    #[test]
    fn accepting_chain_has_no_cycle() {
        let sys = crate::model::load_graph("states 3\ninit 0\naccept 1\nedge 0 1\nedge 1 2\n").unwrap();
        let verdict = ndfs_cycle(&sys, CAP).unwrap();
        assert!(!verdict.found);
        assert_eq!(verdict.witness, None);
    }

    #[test]
    fn fig2_map_sequential_matches_the_narrative() {
        let verdict = map_sequential(&corpus::fig2_system(), CAP).unwrap();
        assert!(verdict.found);
        assert_eq!(verdict.witness, Some(encode_id(2, 4).unwrap()));
        assert_eq!(verdict.iterations, 2);
        // State 4 dominates nothing but itself is undominated: it is the
        // sole exclusion after iteration 1.
        assert_eq!(verdict.excluded, vec![encode_id(4, 4).unwrap()]);
    }

    #[test]
    fn map_sequential_without_accepting_states_stops_after_one_iteration() {
        let sys = crate::model::load_graph("states 3\ninit 0\nedge 0 1\nedge 1 2\nedge 2 0\n").unwrap();
        let verdict = map_sequential(&sys, CAP).unwrap();
        assert!(!verdict.found);
        assert_eq!(verdict.iterations, 1);
        assert!(verdict.excluded.is_empty());
    }

    #[test]
    fn state_cap_is_reported() {
        let sys = corpus::fig2_system();
        assert!(matches!(
            bfs_reach(&sys, 2),
            Err(SearchError::Capped { cap: 2, .. })
        ));
        assert!(matches!(
            map_sequential(&sys, 2),
            Err(SearchError::Capped { cap: 2, .. })
        ));
    }

    #[test]
    fn readers_writers_verdicts() {
        let buggy = corpus::readers_writers(2, 2, true);
        let safe = corpus::readers_writers(2, 2, false);
        assert!(ndfs_cycle(buggy.as_ref(), CAP).unwrap().found);
        assert!(!ndfs_cycle(safe.as_ref(), CAP).unwrap().found);
        assert!(map_sequential(buggy.as_ref(), CAP).unwrap().found);
        assert!(!map_sequential(safe.as_ref(), CAP).unwrap().found);
        assert_eq!(
            bfs_reach(buggy.as_ref(), CAP).unwrap().states,
            dfs_reach(buggy.as_ref(), CAP).unwrap().states
        );
    }
}
