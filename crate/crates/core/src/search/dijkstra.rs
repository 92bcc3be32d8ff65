use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{check_endpoints, sum_path_cost, PlanError, PlanResult, SearchStatus};
use crate::grid::{Cell, GridMap};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    cell: Cell,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist)
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Plain Dijkstra with its own state, used as the reference for optimal costs.
pub fn plan_dijkstra(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    diagonals: bool,
) -> Result<PlanResult, PlanError> {
    let clock = Instant::now();
    check_endpoints(map, start, goal)?;

    let mut out = PlanResult::empty(SearchStatus::Unreachable);
    let mut dist = vec![f64::INFINITY; map.len()];
    let mut parent: Vec<Option<Cell>> = vec![None; map.len()];
    let mut done = vec![false; map.len()];
    let mut heap = BinaryHeap::new();

    dist[map.index(start)] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        cell: start,
    });
    out.heap_pushes = 1;

    while let Some(Entry { dist: d, cell }) = heap.pop() {
        let i = map.index(cell);
        if done[i] {
            out.stale_pops += 1;
            continue;
        }
        done[i] = true;
        out.expansions += 1;
        if cell == goal {
            out.status = SearchStatus::Found;
            break;
        }
        for (next, step) in map.neighbors(cell, diagonals) {
            let j = map.index(next);
            let nd = d + step;
            if !done[j] && nd < dist[j] {
                dist[j] = nd;
                parent[j] = Some(cell);
                heap.push(Entry {
                    dist: nd,
                    cell: next,
                });
                out.heap_pushes += 1;
            }
        }
    }

    if out.found() {
        let mut path = vec![goal];
        while let Some(p) = parent[map.index(*path.last().unwrap())] {
            path.push(p);
        }
        path.reverse();
        out.cost = sum_path_cost(map, &path, diagonals);
        out.path = path;
    }
    out.elapsed = clock.elapsed();
    Ok(out)
}
