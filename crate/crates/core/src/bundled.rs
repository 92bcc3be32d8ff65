//! Maps shipped with the crate.
//!
//! * `figure1.map`: 160x128 offline test map. Obstacles are ringed by bands of
//!   decreasing weight (9, 7, 5, 3) plus a few shallow weighted patches. The
//!   start is the top-left corner, the goal sits near the centre.
//! * `room_known.map`: a 6 m x 8 m room at 10 cm cells as the planner knows it.
//! * `room_o1.txt`, `room_o1_o2.txt`: hidden obstacles for that room.
//! * `room_sealed.txt`: hidden walls that cut the destination off.

use crate::grid::{parse_map, parse_overlay, Cell, GridMap, ObstacleOverlay};

pub const FIGURE1_MAP: &str = include_str!("../maps/figure1.map");
pub const ROOM_KNOWN_MAP: &str = include_str!("../maps/room_known.map");
pub const ROOM_O1: &str = include_str!("../maps/room_o1.txt");
pub const ROOM_O1_O2: &str = include_str!("../maps/room_o1_o2.txt");
pub const ROOM_SEALED: &str = include_str!("../maps/room_sealed.txt");
pub const CORRIDOR_MAP: &str = include_str!("../maps/corridor.map");
pub const WALLED_MAP: &str = include_str!("../maps/walled.map");

pub const FIGURE1_START: Cell = Cell::new(0, 0);
pub const FIGURE1_GOAL: Cell = Cell::new(80, 64);
/// Robot start (R) and destination (D) in the room.
pub const ROOM_START: Cell = Cell::new(8, 72);
pub const ROOM_GOAL: Cell = Cell::new(50, 8);

/// Every bundled map by file name, for round-trip checks.
pub const ALL_MAPS: [(&str, &str); 4] = [
    ("figure1.map", FIGURE1_MAP),
    ("room_known.map", ROOM_KNOWN_MAP),
    ("corridor.map", CORRIDOR_MAP),
    ("walled.map", WALLED_MAP),
];

fn map(text: &str) -> GridMap {
    parse_map(text).expect("bundled map parses")
}

fn overlay(text: &str) -> ObstacleOverlay {
    parse_overlay(text).expect("bundled overlay parses")
}

pub fn figure1() -> GridMap {
    map(FIGURE1_MAP)
}

pub fn room_known() -> GridMap {
    map(ROOM_KNOWN_MAP)
}

pub fn room_o1() -> ObstacleOverlay {
    overlay(ROOM_O1)
}

pub fn room_o1_o2() -> ObstacleOverlay {
    overlay(ROOM_O1_O2)
}

pub fn room_sealed() -> ObstacleOverlay {
    overlay(ROOM_SEALED)
}

pub fn corridor() -> GridMap {
    map(CORRIDOR_MAP)
}

pub fn walled() -> GridMap {
    map(WALLED_MAP)
}
