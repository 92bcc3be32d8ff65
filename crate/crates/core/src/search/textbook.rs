use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use super::queue::FrontierKey;
use super::{
    check_endpoints, sum_path_cost, PlanError, PlanOptions, PlanResult, PopEvent, SearchStatus,
    DEADLINE_POLL, G_EPS,
};
use crate::grid::{Cell, GridMap};
use crate::heuristics::HeuristicSpec;

#[derive(Debug, Clone, Copy)]
enum Membership {
    Open(FrontierKey),
    Closed,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    g: f64,
    parent: Option<Cell>,
    list: Membership,
}

pub fn plan_textbook(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    spec: &HeuristicSpec,
) -> Result<PlanResult, PlanError> {
    plan_textbook_with(map, start, goal, spec, &PlanOptions::default())
}

/// Classic open/closed-list A*.
///
/// The open list is an ordered set keyed like the fast planner's heap, and
/// node records live in a hash map that answers "is n' in open/closed".
/// A successor is discarded when open or closed already holds it with an
/// equal or lower g; otherwise every occurrence is removed and it is
/// (re)inserted into open, so closed nodes are re-opened on improvement.
/// All state is allocated per call.
pub fn plan_textbook_with(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    spec: &HeuristicSpec,
    opts: &PlanOptions,
) -> Result<PlanResult, PlanError> {
    let clock = Instant::now();
    check_endpoints(map, start, goal)?;

    let mut out = PlanResult::empty(SearchStatus::Unreachable);
    let mut open: BTreeSet<Reverse<FrontierKey>> = BTreeSet::new();
    let mut nodes: HashMap<Cell, Node> = HashMap::new();
    let mut expanded: HashSet<Cell> = HashSet::new();
    let mut seq = 0u64;
    let mut key_for = |f: f64, g: f64, c: Cell| {
        seq += 1;
        FrontierKey {
            f,
            g,
            seq: seq - 1,
            cell: map.index(c) as u32,
        }
    };

    let k = key_for(spec.h(start, goal), 0.0, start);
    open.insert(Reverse(k));
    nodes.insert(
        start,
        Node {
            g: 0.0,
            parent: None,
            list: Membership::Open(k),
        },
    );
    out.heap_pushes = 1;

    let mut found = false;
    while let Some(Reverse(key)) = open.pop_first() {
        if out.expansions % DEADLINE_POLL == DEADLINE_POLL - 1 {
            if let Some(deadline) = opts.deadline {
                if Instant::now() >= deadline {
                    out.status = SearchStatus::TimedOut;
                    break;
                }
            }
        }
        let n = map.cell_at(key.cell as usize);
        if opts.record_pops {
            out.pops.push(PopEvent {
                cell: n,
                f: key.f,
                g: key.g,
                seq: key.seq,
                pushes: out.heap_pushes,
                stale: false,
            });
        }
        let node = nodes.get_mut(&n).expect("open node has a record");
        node.list = Membership::Closed;
        let g_n = node.g;
        out.expansions += 1;
        if !expanded.insert(n) {
            out.reexpansions += 1;
        }
        if n == goal {
            found = true;
            break;
        }

        for (succ, step) in map.neighbors(n, spec.diagonals) {
            let g = g_n + step;
            let f = g + spec.h(succ, goal);
            if let Some(existing) = nodes.get(&succ) {
                if existing.g <= g + G_EPS {
                    continue;
                }
                if let Membership::Open(old) = existing.list {
                    open.remove(&Reverse(old));
                }
            }
            let k = key_for(f, g, succ);
            open.insert(Reverse(k));
            nodes.insert(
                succ,
                Node {
                    g,
                    parent: Some(n),
                    list: Membership::Open(k),
                },
            );
            out.heap_pushes += 1;
        }
    }

    if found {
        let mut path = vec![goal];
        let mut at = goal;
        while let Some(p) = nodes[&at].parent {
            path.push(p);
            at = p;
            debug_assert!(path.len() <= map.len(), "parent chain has a cycle");
        }
        path.reverse();
        out.status = SearchStatus::Found;
        out.cost = sum_path_cost(map, &path, spec.diagonals);
        out.path = path;
    }
    out.elapsed = clock.elapsed();
    Ok(out)
}
