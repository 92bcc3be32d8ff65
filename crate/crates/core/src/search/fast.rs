use std::time::Instant;

use super::workspace::NO_PARENT;
use super::{
    check_endpoints, sum_path_cost, PlanError, PlanOptions, PlanResult, PlannerConfig, PopEvent,
    SearchStatus, SearchWorkspace, DEADLINE_POLL, G_EPS,
};
use crate::grid::{Cell, GridMap};

pub fn plan_fast(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    cfg: &PlannerConfig,
    ws: &mut SearchWorkspace,
) -> Result<PlanResult, PlanError> {
    plan_fast_with(map, start, goal, cfg, ws, &PlanOptions::default())
}

/// A* with a binary-heap frontier and lazy deletion.
///
/// Improving an open cell pushes a fresh entry and leaves the old one in the
/// heap. At pop time an entry is stale when its g no longer matches the cell's
/// best g, or (with a closed list) when the cell was already expanded.
pub fn plan_fast_with(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    cfg: &PlannerConfig,
    ws: &mut SearchWorkspace,
    opts: &PlanOptions,
) -> Result<PlanResult, PlanError> {
    let clock = Instant::now();
    check_endpoints(map, start, goal)?;

    let spec = cfg.spec;
    let use_closed = cfg.use_closed_list;
    let s = map.index(start);
    let t = map.index(goal);
    let id = ws.begin(map, s);

    let mut out = PlanResult::empty(SearchStatus::Unreachable);
    ws.g[s] = 0.0;
    ws.parent[s] = NO_PARENT;
    ws.open_mark[s] = id;
    ws.push(spec.h(start, goal), 0.0, s);
    out.heap_pushes = 1;

    let mut pops = 0u64;
    let mut found = false;
    while let Some(entry) = ws.queue.pop() {
        pops += 1;
        if pops.is_multiple_of(DEADLINE_POLL) {
            if let Some(deadline) = opts.deadline {
                if Instant::now() >= deadline {
                    out.status = SearchStatus::TimedOut;
                    break;
                }
            }
        }
        let i = entry.cell as usize;
        let stale = entry.g != ws.g[i] || (use_closed && ws.closed_mark[i] == id);
        if opts.record_pops {
            out.pops.push(PopEvent {
                cell: map.cell_at(i),
                f: entry.f,
                g: entry.g,
                seq: entry.seq,
                pushes: ws.seq,
                stale,
            });
        }
        if stale {
            out.stale_pops += 1;
            continue;
        }
        if ws.closed_mark[i] == id {
            out.reexpansions += 1;
        } else {
            ws.closed_mark[i] = id;
        }
        out.expansions += 1;
        if i == t {
            found = true;
            break;
        }

        let g = entry.g;
        let diagonals = spec.diagonals;
        let SearchWorkspace {
            g: g_arr,
            parent,
            open_mark,
            closed_mark,
            ..
        } = ws;
        let mut fresh: [(usize, f64); 8] = [(0, 0.0); 8];
        let mut n_fresh = 0;
        map.for_each_successor(i, diagonals, |j, step| {
            if use_closed && closed_mark[j] == id {
                return;
            }
            let ng = g + step;
            if open_mark[j] == id && g_arr[j] <= ng + G_EPS {
                return;
            }
            g_arr[j] = ng;
            parent[j] = i as u32;
            open_mark[j] = id;
            fresh[n_fresh] = (j, ng);
            n_fresh += 1;
        });
        for &(j, ng) in &fresh[..n_fresh] {
            ws.push(ng + spec.h(map.cell_at(j), goal), ng, j);
        }
        out.heap_pushes += n_fresh as u64;
    }

    if found {
        out.status = SearchStatus::Found;
        out.path = ws.path_to(map, t);
        out.cost = sum_path_cost(map, &out.path, spec.diagonals);
    }
    out.elapsed = clock.elapsed();
    Ok(out)
}
