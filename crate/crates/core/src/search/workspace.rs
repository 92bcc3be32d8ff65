use std::collections::BinaryHeap;

use super::queue::FrontierKey;
use super::PlanError;
use crate::grid::{Cell, GridMap};

pub(crate) const NO_PARENT: u32 = u32::MAX;

/// Reusable scratch state for the fast planner.
///
/// Open and closed membership live in per-cell stamp arrays. A cell is open
/// (closed) in the current search iff its stamp equals `current_id`; starting
/// a new search just bumps the id, so nothing is cleared between searches.
/// Entries of `g` and `parent` are meaningful only for cells stamped open in
/// the current search.
#[derive(Debug, Default)]
pub struct SearchWorkspace {
    pub(crate) queue: BinaryHeap<FrontierKey>,
    pub(crate) g: Vec<f64>,
    pub(crate) parent: Vec<u32>,
    pub(crate) open_mark: Vec<u64>,
    pub(crate) closed_mark: Vec<u64>,
    pub(crate) current_id: u64,
    pub(crate) seq: u64,
    width: u32,
    height: u32,
    start: Option<usize>,
}

impl SearchWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn for_map(map: &GridMap) -> Self {
        let mut ws = Self::new();
        ws.fit(map);
        ws
    }

    pub fn current_id(&self) -> u64 {
        self.current_id
    }

    /// Number of cells the scratch arrays currently cover.
    pub fn capacity(&self) -> usize {
        self.g.len()
    }

    fn fit(&mut self, map: &GridMap) {
        if self.width == map.width() && self.height == map.height() {
            return;
        }
        let n = map.len();
        self.width = map.width();
        self.height = map.height();
        // Fresh zeroed stamps never match an id handed out by `begin`.
        self.g = vec![f64::INFINITY; n];
        self.parent = vec![NO_PARENT; n];
        self.open_mark = vec![0; n];
        self.closed_mark = vec![0; n];
    }

    /// Starts a new search and returns its id.
    pub(crate) fn begin(&mut self, map: &GridMap, start: usize) -> u64 {
        self.fit(map);
        self.queue.clear();
        self.seq = 0;
        self.current_id += 1;
        self.start = Some(start);
        self.current_id
    }

    #[inline]
    pub(crate) fn push(&mut self, f: f64, g: f64, cell: usize) {
        self.queue.push(FrontierKey {
            f,
            g,
            seq: self.seq,
            cell: cell as u32,
        });
        self.seq += 1;
    }

    pub fn is_open(&self, map: &GridMap, c: Cell) -> bool {
        self.shape_matches(map) && self.open_mark[map.index(c)] == self.current_id
    }

    pub fn is_closed(&self, map: &GridMap, c: Cell) -> bool {
        self.shape_matches(map) && self.closed_mark[map.index(c)] == self.current_id
    }

    /// Best known cost from the start to `c` in the current search.
    pub fn g_value(&self, map: &GridMap, c: Cell) -> Option<f64> {
        self.is_open(map, c).then(|| self.g[map.index(c)])
    }

    fn shape_matches(&self, map: &GridMap) -> bool {
        self.current_id > 0 && self.width == map.width() && self.height == map.height()
    }

    pub(crate) fn path_to(&self, map: &GridMap, goal: usize) -> Vec<Cell> {
        let mut out = Vec::new();
        let mut at = goal as u32;
        while at != NO_PARENT {
            out.push(map.cell_at(at as usize));
            debug_assert!(out.len() <= map.len(), "parent chain has a cycle");
            at = self.parent[at as usize];
        }
        out.reverse();
        out
    }
}

/// Walks parent links from `goal` back to the start of the last search.
/// `goal` must have been expanded by that search.
pub fn reconstruct_path(
    ws: &SearchWorkspace,
    map: &GridMap,
    goal: Cell,
) -> Result<Vec<Cell>, PlanError> {
    if !map.in_bounds(goal) || !ws.is_closed(map, goal) || ws.start.is_none() {
        return Err(PlanError::GoalNotReached(goal));
    }
    Ok(ws.path_to(map, map.index(goal)))
}
