//! Weighted occupancy grid, its text format, and hidden-obstacle overlays.
//!
//! Cells are addressed `(x, y)` with the origin in the top-left corner and
//! stored row-major. Every cell is either impassable or carries an integer
//! traversal weight in `1..=9`. Entering a cell costs its weight times the
//! geometric step length (1 for cardinal moves, √2 for diagonal moves).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_CELL_SIZE_MM: u32 = 100;
pub const MAX_WEIGHT: u8 = 9;

/// Cardinal moves first, then diagonals. The order is part of the planners'
/// determinism: it fixes the insertion sequence of successors.
pub(crate) const STEPS: [(i32, i32); 8] = [
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, 0),
    (1, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expected `x,y` with non-negative integers, got `{0}`")]
pub struct ParseCellError(String);

impl FromStr for Cell {
    type Err = ParseCellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| ParseCellError(s.to_string()))?;
        let x = x.trim().parse().map_err(|_| ParseCellError(s.to_string()))?;
        let y = y.trim().parse().map_err(|_| ParseCellError(s.to_string()))?;
        Ok(Cell { x, y })
    }
}

/// Traversal weight of one cell; `0` encodes impassable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellWeight(u8);

impl CellWeight {
    pub const IMPASSABLE: CellWeight = CellWeight(0);
    pub const FREE: CellWeight = CellWeight(1);

    /// `None` unless `w` is in `1..=9`.
    pub fn passable(w: u8) -> Option<Self> {
        (1..=MAX_WEIGHT).contains(&w).then_some(CellWeight(w))
    }

    pub fn is_passable(self) -> bool {
        self.0 != 0
    }

    /// Weight of a passable cell, `None` for impassable cells.
    pub fn weight(self) -> Option<u8> {
        self.is_passable().then_some(self.0)
    }

    fn to_char(self) -> char {
        match self.0 {
            0 => '#',
            1 => '.',
            w => char::from(b'0' + w),
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            '#' => Some(CellWeight::IMPASSABLE),
            '.' => Some(CellWeight::FREE),
            '1'..='9' => CellWeight::passable(c as u8 - b'0'),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: expected {expected} characters, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: illegal cell character {ch:?}")]
    IllegalChar {
        line: usize,
        column: usize,
        ch: char,
    },
    #[error("map dimensions and cell size must be positive")]
    ZeroDimension,
    #[error("cell data has {found} entries, expected {expected}")]
    CellCount { expected: usize, found: usize },
    #[error("obstacle `{id}` ({x0},{y0})-({x1},{y1}) does not lie inside the {width}x{height} map")]
    OverlayOutOfBounds {
        id: String,
        x0: u32,
        y0: u32,
        x1: u32,
        y1: u32,
        width: u32,
        height: u32,
    },
    #[error("duplicate obstacle id `{0}`")]
    DuplicateObstacle(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: u32,
    height: u32,
    cell_size_mm: u32,
    cells: Vec<CellWeight>,
}

impl GridMap {
    pub fn new(
        width: u32,
        height: u32,
        cell_size_mm: u32,
        cells: Vec<CellWeight>,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 || cell_size_mm == 0 {
            return Err(MapError::ZeroDimension);
        }
        let expected = width as usize * height as usize;
        if cells.len() != expected {
            return Err(MapError::CellCount {
                expected,
                found: cells.len(),
            });
        }
        Ok(GridMap {
            width,
            height,
            cell_size_mm,
            cells,
        })
    }

    /// All-free map with weight 1 everywhere.
    pub fn open(width: u32, height: u32) -> Self {
        Self::filled(width, height, CellWeight::FREE)
    }

    pub fn filled(width: u32, height: u32, fill: CellWeight) -> Self {
        assert!(width > 0 && height > 0, "map dimensions must be positive");
        GridMap {
            width,
            height,
            cell_size_mm: DEFAULT_CELL_SIZE_MM,
            cells: vec![fill; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cell_size_mm(&self) -> u32 {
        self.cell_size_mm
    }

    pub fn with_cell_size_mm(mut self, mm: u32) -> Self {
        assert!(mm > 0, "cell size must be positive");
        self.cell_size_mm = mm;
        self
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// Row-major index of an in-bounds cell.
    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index % w) as u32, (index / w) as u32)
    }

    /// Weight of `c`; out-of-bounds cells read as impassable.
    pub fn get(&self, c: Cell) -> CellWeight {
        if self.in_bounds(c) {
            self.cells[self.index(c)]
        } else {
            CellWeight::IMPASSABLE
        }
    }

    pub fn set(&mut self, c: Cell, w: CellWeight) {
        assert!(self.in_bounds(c), "cell {c} outside {}x{} map", self.width, self.height);
        let i = self.index(c);
        self.cells[i] = w;
    }

    pub fn is_passable(&self, c: Cell) -> bool {
        self.get(c).is_passable()
    }

    pub fn cells(&self) -> &[CellWeight] {
        &self.cells
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn impassable_count(&self) -> usize {
        self.cells.iter().filter(|w| !w.is_passable()).count()
    }

    /// Passable successors of `c` with their step costs.
    ///
    /// Diagonal moves are only offered when both flanking cardinal cells are
    /// passable, so paths never cut obstacle corners.
    pub fn neighbors(&self, c: Cell, diagonals: bool) -> Vec<(Cell, f64)> {
        let mut out = Vec::with_capacity(8);
        if !self.in_bounds(c) || !self.is_passable(c) {
            return out;
        }
        self.for_each_successor(self.index(c), diagonals, |j, cost| {
            out.push((self.cell_at(j), cost))
        });
        out
    }

    /// Index-level successor enumeration used by the planners.
    /// `from` must be in bounds; passability of `from` itself is not checked.
    #[inline]
    pub(crate) fn for_each_successor(
        &self,
        from: usize,
        diagonals: bool,
        mut visit: impl FnMut(usize, f64),
    ) {
        let w = self.width as i64;
        let h = self.height as i64;
        let x = (from % self.width as usize) as i64;
        let y = (from / self.width as usize) as i64;
        let free = |nx: i64, ny: i64| -> Option<(usize, u8)> {
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                return None;
            }
            let j = (ny * w + nx) as usize;
            self.cells[j].weight().map(|wt| (j, wt))
        };
        for &(dx, dy) in &STEPS[..4] {
            if let Some((j, wt)) = free(x + dx as i64, y + dy as i64) {
                visit(j, f64::from(wt));
            }
        }
        if !diagonals {
            return;
        }
        for &(dx, dy) in &STEPS[4..] {
            let (dx, dy) = (dx as i64, dy as i64);
            if free(x + dx, y).is_none() || free(x, y + dy).is_none() {
                continue;
            }
            if let Some((j, wt)) = free(x + dx, y + dy) {
                visit(j, f64::from(wt) * std::f64::consts::SQRT_2);
            }
        }
    }

    /// Step cost of moving from `a` to the adjacent cell `b`, if that move is legal.
    pub fn step_cost(&self, a: Cell, b: Cell, diagonals: bool) -> Option<f64> {
        self.neighbors(a, diagonals)
            .into_iter()
            .find(|(n, _)| *n == b)
            .map(|(_, cost)| cost)
    }

    /// Sum of step costs along `path`, `None` if any step is illegal.
    pub fn path_cost(&self, path: &[Cell], diagonals: bool) -> Option<f64> {
        if let Some(first) = path.first() {
            if !self.is_passable(*first) {
                return None;
            }
        }
        path.windows(2)
            .map(|w| self.step_cost(w[0], w[1], diagonals))
            .sum()
    }

    /// Copy of this map with every overlay cell made impassable.
    pub fn apply_overlay(&self, overlay: &ObstacleOverlay) -> Result<GridMap, MapError> {
        overlay.check_bounds(self)?;
        let mut out = self.clone();
        for rect in overlay.rects() {
            for c in rect.cells() {
                out.set(c, CellWeight::IMPASSABLE);
            }
        }
        Ok(out)
    }

    /// Canonical text form: header line, then one line per row, each newline-terminated.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() + self.height as usize + 32);
        s.push_str(&format!(
            "w {} h {} cell {}\n",
            self.width, self.height, self.cell_size_mm
        ));
        for row in self.cells.chunks(self.width as usize) {
            s.extend(row.iter().map(|w| w.to_char()));
            s.push('\n');
        }
        s
    }

    /// Text rendering with `path` drawn as `*` (start `S`, goal `G`).
    pub fn render_with_path(&self, path: &[Cell]) -> String {
        let mut rows: Vec<Vec<char>> = self
            .cells
            .chunks(self.width as usize)
            .map(|row| row.iter().map(|w| w.to_char()).collect())
            .collect();
        for c in path {
            if self.in_bounds(*c) {
                rows[c.y as usize][c.x as usize] = '*';
            }
        }
        if let (Some(s), Some(g)) = (path.first(), path.last()) {
            rows[s.y as usize][s.x as usize] = 'S';
            rows[g.y as usize][g.x as usize] = 'G';
        }
        let mut out = String::new();
        for row in rows {
            out.extend(row);
            out.push('\n');
        }
        out
    }
}

impl FromStr for GridMap {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_map(s)
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_header(line: &str) -> Result<(u32, u32, u32), MapError> {
    let syntax = |msg: String| MapError::Syntax { line: 1, msg };
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "w" || toks[2] != "h" || toks[4] != "cell" {
        return Err(syntax(format!(
            "expected header `w <int> h <int> cell <int>`, found `{line}`"
        )));
    }
    let num = |name: &str, tok: &str| -> Result<u32, MapError> {
        let v: u32 = tok
            .parse()
            .map_err(|_| syntax(format!("invalid {name} value `{tok}`")))?;
        if v == 0 {
            return Err(syntax(format!("{name} must be positive")));
        }
        Ok(v)
    };
    Ok((
        num("width", toks[1])?,
        num("height", toks[3])?,
        num("cell size", toks[5])?,
    ))
}

/// Parses the text map format. Digits `1`-`9` are weights, `.` is weight 1
/// and `#` is impassable. Serializing the result yields canonical text, where
/// weight 1 is always written as `.`.
pub fn parse_map(text: &str) -> Result<GridMap, MapError> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines.next().ok_or(MapError::Syntax {
        line: 1,
        msg: "empty input".into(),
    })?;
    let (width, height, cell_size_mm) = parse_header(header)?;
    let mut cells = Vec::with_capacity(width as usize * height as usize);
    for row in 0..height as usize {
        let line_no = row + 2;
        let line = lines.next().ok_or_else(|| MapError::Syntax {
            line: line_no,
            msg: format!("expected {height} rows, found {row}"),
        })?;
        let found = line.chars().count();
        if found != width as usize {
            return Err(MapError::RaggedRow {
                line: line_no,
                expected: width as usize,
                found,
            });
        }
        for (col, ch) in line.chars().enumerate() {
            let w = CellWeight::from_char(ch).ok_or(MapError::IllegalChar {
                line: line_no,
                column: col + 1,
                ch,
            })?;
            cells.push(w);
        }
    }
    if let Some((i, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(MapError::Syntax {
            line: height as usize + 2 + i,
            msg: format!("unexpected data after {height} rows: `{extra}`"),
        });
    }
    GridMap::new(width, height, cell_size_mm, cells)
}

/// Inclusive axis-aligned rectangle of cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstacleRect {
    pub id: String,
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl ObstacleRect {
    pub fn new(id: impl Into<String>, x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        ObstacleRect {
            id: id.into(),
            x0: x0.min(x1),
            y0: y0.min(y1),
            x1: x0.max(x1),
            y1: y0.max(y1),
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.x0..=self.x1).contains(&c.x) && (self.y0..=self.y1).contains(&c.y)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| Cell::new(x, y)))
    }
}

/// Named obstacles that exist in the world but not on the planner's map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObstacleOverlay {
    rects: Vec<ObstacleRect>,
}

impl ObstacleOverlay {
    pub fn new(rects: Vec<ObstacleRect>) -> Result<Self, MapError> {
        let mut seen = HashSet::new();
        for r in &rects {
            if !seen.insert(r.id.as_str()) {
                return Err(MapError::DuplicateObstacle(r.id.clone()));
            }
        }
        Ok(ObstacleOverlay { rects })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rects(&self) -> &[ObstacleRect] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.rects.iter().any(|r| r.contains(c))
    }

    pub fn check_bounds(&self, map: &GridMap) -> Result<(), MapError> {
        for r in &self.rects {
            if r.x1 >= map.width() || r.y1 >= map.height() {
                return Err(MapError::OverlayOutOfBounds {
                    id: r.id.clone(),
                    x0: r.x0,
                    y0: r.y0,
                    x1: r.x1,
                    y1: r.y1,
                    width: map.width(),
                    height: map.height(),
                });
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.rects
            .iter()
            .map(|r| format!("{} {} {} {} {}\n", r.id, r.x0, r.y0, r.x1, r.y1))
            .collect()
    }
}

/// Parses `<id> <x0> <y0> <x1> <y1>` lines; blank lines and `#` comments are skipped.
pub fn parse_overlay(text: &str) -> Result<ObstacleOverlay, MapError> {
    let mut rects = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| MapError::Syntax { line: i + 1, msg };
        if toks.len() != 5 {
            return Err(bad(format!(
                "expected `<id> <x0> <y0> <x1> <y1>`, found `{line}`"
            )));
        }
        let mut coords = [0u32; 4];
        for (slot, tok) in coords.iter_mut().zip(&toks[1..]) {
            *slot = tok
                .parse()
                .map_err(|_| bad(format!("invalid coordinate `{tok}`")))?;
        }
        rects.push(ObstacleRect::new(
            toks[0], coords[0], coords[1], coords[2], coords[3],
        ));
    }
    ObstacleOverlay::new(rects)
}

impl FromStr for ObstacleOverlay {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_overlay(s)
    }
}

/// Seeded random map: each cell independently impassable with probability
/// `density`, otherwise weight 1.
pub fn random_map(width: u32, height: u32, density: f64, seed: u64) -> GridMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = GridMap::open(width, height);
    for w in map.cells.iter_mut() {
        if rng.gen_bool(density) {
            *w = CellWeight::IMPASSABLE;
        }
    }
    map
}

/// Seeded random map with weighted terrain: impassable with probability
/// `density`, otherwise a uniform weight in `1..=max_weight`.
pub fn random_weighted_map(
    width: u32,
    height: u32,
    density: f64,
    max_weight: u8,
    seed: u64,
) -> GridMap {
    let max_weight = max_weight.clamp(1, MAX_WEIGHT);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = GridMap::open(width, height);
    for w in map.cells.iter_mut() {
        if rng.gen_bool(density) {
            *w = CellWeight::IMPASSABLE;
        } else {
            *w = CellWeight(rng.gen_range(1..=max_weight));
        }
    }
    map
}

/// Picks two distinct passable cells with a seeded RNG. `None` if the map has
/// fewer than two passable cells.
pub fn random_endpoints(map: &GridMap, seed: u64) -> Option<(Cell, Cell)> {
    let free: Vec<Cell> = map.iter_cells().filter(|c| map.is_passable(*c)).collect();
    if free.len() < 2 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.gen_range(0..free.len());
    let mut b = rng.gen_range(0..free.len() - 1);
    if b >= a {
        b += 1;
    }
    Some((free[a], free[b]))
}
