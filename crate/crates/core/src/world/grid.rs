//! Occupancy grid and deterministic 4-connected shortest paths.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::WorldError;

/// Grid coordinate, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell(pub i32, pub i32);

impl Cell {
    pub fn x(&self) -> i32 {
        self.0
    }

    pub fn y(&self) -> i32 {
        self.1
    }
}

/// Fixed neighbor expansion order: north, east, south, west (y grows south).
pub const DIRECTIONS: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

/// Occupancy map. Out-of-bounds cells count as blocked; all motion is
/// 4-connected at unit cost per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: i32,
    height: i32,
    cell_size: f64,
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn new(width: i32, height: i32, cell_size: f64) -> Result<GridMap, WorldError> {
        if width <= 0 || height <= 0 {
            return Err(WorldError::Invariant(format!(
                "map dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(cell_size > 0.0) {
            return Err(WorldError::Invariant(format!(
                "cell_size must be positive, got {cell_size}"
            )));
        }
        Ok(GridMap {
            width,
            height,
            cell_size,
            blocked: vec![false; (width * height) as usize],
        })
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Floor area in square meters.
    pub fn area_m2(&self) -> f64 {
        f64::from(self.width) * f64::from(self.height) * self.cell_size * self.cell_size
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && c.0 < self.width && c.1 < self.height
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.blocked[self.idx(c)]
    }

    pub fn set_blocked(&mut self, c: Cell, blocked: bool) {
        let i = self.idx(c);
        self.blocked[i] = blocked;
    }

    fn idx(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c));
        (c.1 * self.width + c.0) as usize
    }

    fn cell_at(&self, idx: usize) -> Cell {
        Cell(idx as i32 % self.width, idx as i32 / self.width)
    }

    /// Blocked cells in row-major order (stable serialization).
    pub fn blocked_cells(&self) -> Vec<Cell> {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.cell_at(i))
            .collect()
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| self.cell_at(i))
    }

    /// Minimal-length 4-connected path between free cells, ties broken by the
    /// fixed neighbor order. The path includes both endpoints.
    pub fn shortest_path(&self, from: Cell, to: Cell) -> Result<Vec<Cell>, WorldError> {
        if !self.is_free(from) {
            return Err(WorldError::BlockedEndpoint(from));
        }
        if !self.is_free(to) {
            return Err(WorldError::BlockedEndpoint(to));
        }
        let field = self.bfs_field(&[to]);
        field
            .path_from(self, from)
            .ok_or(WorldError::Unreachable { from, to })
    }

    /// Multi-source BFS distance/predecessor field. `dist[c]` is the cell
    /// count to the nearest source; following `parent` from any reached cell
    /// walks a shortest path toward that source.
    pub(crate) fn bfs_field(&self, sources: &[Cell]) -> DistField {
        let n = self.blocked.len();
        let mut dist = vec![u32::MAX; n];
        let mut parent = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !self.is_free(s) {
                continue;
            }
            let i = self.idx(s);
            if dist[i] == u32::MAX {
                dist[i] = 0;
                queue.push_back(i);
            }
        }
        while let Some(u) = queue.pop_front() {
            let uc = self.cell_at(u);
            for (dx, dy) in DIRECTIONS {
                let vc = Cell(uc.0 + dx, uc.1 + dy);
                if !self.is_free(vc) {
                    continue;
                }
                let v = self.idx(vc);
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u as u32;
                    queue.push_back(v);
                }
            }
        }
        DistField { dist, parent }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct DistField {
    dist: Vec<u32>,
    parent: Vec<u32>,
}

impl DistField {
    pub fn distance(&self, map: &GridMap, c: Cell) -> Option<u32> {
        if !map.in_bounds(c) {
            return None;
        }
        match self.dist[map.idx(c)] {
            u32::MAX => None,
            d => Some(d),
        }
    }

    /// Shortest path from `c` to the nearest source, including both ends.
    pub fn path_from(&self, map: &GridMap, c: Cell) -> Option<Vec<Cell>> {
        self.distance(map, c)?;
        let mut path = vec![c];
        let mut i = map.idx(c);
        while self.dist[i] > 0 {
            i = self.parent[i] as usize;
            path.push(map.cell_at(i));
        }
        Some(path)
    }
}
