//! Integer grid coordinates and breadth-first search.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// North, east, south, west: the fixed expansion order of every search.
    pub fn neighbors(self) -> [Pos; 4] {
        [
            Pos::new(self.x, self.y - 1),
            Pos::new(self.x + 1, self.y),
            Pos::new(self.x, self.y + 1),
            Pos::new(self.x - 1, self.y),
        ]
    }

    pub fn manhattan(self, other: Pos) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn in_bounds(self, width: i32, height: i32) -> bool {
        self.x >= 0 && self.y >= 0 && self.x < width && self.y < height
    }
}

/// Distances from `start` to every reachable cell; `None` when unreachable.
pub fn distances(
    width: i32,
    height: i32,
    start: Pos,
    passable: impl Fn(Pos) -> bool,
) -> Vec<Option<u32>> {
    let idx = |p: Pos| (p.y * width + p.x) as usize;
    let mut dist = vec![None; (width * height) as usize];
    if !start.in_bounds(width, height) {
        return dist;
    }
    dist[idx(start)] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        let d = dist[idx(p)].expect("visited");
        for n in p.neighbors() {
            if n.in_bounds(width, height) && dist[idx(n)].is_none() && passable(n) {
                dist[idx(n)] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Shortest path from `start` to `goal`, excluding `start`, including `goal`.
pub fn shortest_path(
    width: i32,
    height: i32,
    start: Pos,
    goal: Pos,
    passable: impl Fn(Pos) -> bool,
) -> Option<Vec<Pos>> {
    let idx = |p: Pos| (p.y * width + p.x) as usize;
    if !start.in_bounds(width, height) || !goal.in_bounds(width, height) {
        return None;
    }
    let mut prev: Vec<Option<Pos>> = vec![None; (width * height) as usize];
    let mut seen = vec![false; (width * height) as usize];
    seen[idx(start)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        if p == goal {
            let mut path = Vec::new();
            let mut cur = goal;
            while cur != start {
                path.push(cur);
                cur = prev[idx(cur)].expect("predecessor");
            }
            path.reverse();
            return Some(path);
        }
        for n in p.neighbors() {
            if n.in_bounds(width, height) && !seen[idx(n)] && passable(n) {
                seen[idx(n)] = true;
                prev[idx(n)] = Some(p);
                queue.push_back(n);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_around_obstacle() {
        // 3x3 with a wall in the middle column except the bottom row.
        let wall = |p: Pos| p.x == 1 && p.y < 2;
        let path = shortest_path(3, 3, Pos::new(0, 0), Pos::new(2, 0), |p| !wall(p)).unwrap();
        assert_eq!(path.len(), 6);
        assert_eq!(*path.last().unwrap(), Pos::new(2, 0));
        let d = distances(3, 3, Pos::new(0, 0), |p| !wall(p));
        assert_eq!(d[2], Some(6));
        assert_eq!(d[1], None);
        assert_eq!(
            shortest_path(3, 3, Pos::new(0, 0), Pos::new(0, 0), |_| true),
            Some(vec![])
        );
    }
}
