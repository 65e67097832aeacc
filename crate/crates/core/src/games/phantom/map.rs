use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::round_limit;
use crate::engine::{Difficulty, GameId};
use crate::error::{Error, Result};
use crate::games::grid::{self, Pos};
use crate::rng::{substream, Substream};

pub const BLOCKED_FRACTION: f64 = 0.12;
pub const SCOUT_VISION_BOOST: i32 = 2;
/// Round from which the hard-mode bonus objective is active.
pub const BONUS_SPAWN_ROUND: u32 = 6;
pub const BONUS_FRACTION: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Scout,
    Infantry,
}

impl UnitKind {
    pub fn speed(self) -> u32 {
        match self {
            UnitKind::Scout => 3,
            UnitKind::Infantry => 2,
        }
    }

    pub fn vision(self) -> i32 {
        match self {
            UnitKind::Scout => 4,
            UnitKind::Infantry => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitKind::Scout => "scout",
            UnitKind::Infantry => "infantry",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub kind: UnitKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub id: String,
    pub pos: Pos,
    pub points: f64,
    pub hidden: bool,
    /// Spawned mid-mission; not part of the base score.
    pub bonus: bool,
    pub active_from: u32,
    pub discovered: bool,
    pub completed: bool,
}

impl Objective {
    pub fn is_active(&self, round: u32) -> bool {
        round >= self.active_from
    }

    /// Known to the commander and still open.
    pub fn is_open(&self, round: u32) -> bool {
        self.is_active(round) && self.discovered && !self.completed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TacticalMap {
    pub width: i32,
    pub height: i32,
    pub passable: Vec<bool>,
    pub units: Vec<Unit>,
    pub objectives: Vec<Objective>,
    /// Cells any unit has ever seen.
    pub explored: Vec<bool>,
}

pub fn map_size(difficulty: Difficulty) -> Option<i32> {
    match difficulty {
        Difficulty::Easy => Some(12),
        Difficulty::Medium => Some(14),
        Difficulty::Hard => Some(16),
        Difficulty::None => None,
    }
}

/// (objectives, hidden, units).
pub fn roster(difficulty: Difficulty) -> Option<(usize, usize, Vec<UnitKind>)> {
    use UnitKind::*;
    match difficulty {
        Difficulty::Easy => Some((3, 0, vec![Infantry, Infantry, Infantry])),
        Difficulty::Medium => Some((4, 1, vec![Scout, Infantry, Infantry, Infantry])),
        Difficulty::Hard => Some((5, 2, vec![Scout, Infantry, Infantry, Infantry])),
        Difficulty::None => None,
    }
}

impl TacticalMap {
    pub fn in_bounds(&self, p: Pos) -> bool {
        p.in_bounds(self.width, self.height)
    }

    fn index(&self, p: Pos) -> usize {
        (p.y * self.width + p.x) as usize
    }

    pub fn is_passable(&self, p: Pos) -> bool {
        self.in_bounds(p) && self.passable[self.index(p)]
    }

    pub fn is_explored(&self, p: Pos) -> bool {
        self.in_bounds(p) && self.explored[self.index(p)]
    }

    pub fn unit(&self, id: &str) -> Option<&Unit> {
        self.units.iter().find(|u| u.id.eq_ignore_ascii_case(id))
    }

    pub fn path(&self, from: Pos, to: Pos) -> Option<Vec<Pos>> {
        grid::shortest_path(self.width, self.height, from, to, |p| self.is_passable(p))
    }

    pub fn path_length(&self, from: Pos, to: Pos) -> Option<u32> {
        self.path(from, to).map(|p| p.len() as u32)
    }

    pub fn base_score(&self) -> f64 {
        self.objectives
            .iter()
            .filter(|o| !o.bonus)
            .map(|o| o.points)
            .sum()
    }

    pub fn bonus_pool(&self) -> f64 {
        self.objectives
            .iter()
            .filter(|o| o.bonus)
            .map(|o| o.points)
            .sum()
    }

    /// Cells within any unit's vision; `boosted[i]` extends unit `i`'s radius.
    pub fn visible(&self, boosted: &[bool]) -> Vec<bool> {
        let mut vis = vec![false; (self.width * self.height) as usize];
        for (i, u) in self.units.iter().enumerate() {
            let r = u.kind.vision()
                + if boosted.get(i).copied().unwrap_or(false) {
                    SCOUT_VISION_BOOST
                } else {
                    0
                };
            for y in (u.pos.y - r).max(0)..=(u.pos.y + r).min(self.height - 1) {
                for x in (u.pos.x - r).max(0)..=(u.pos.x + r).min(self.width - 1) {
                    let (dx, dy) = (x - u.pos.x, y - u.pos.y);
                    if dx * dx + dy * dy <= r * r {
                        vis[(y * self.width + x) as usize] = true;
                    }
                }
            }
        }
        vis
    }

    /// Marks seen cells explored and reveals hidden objectives in view.
    pub fn update_fog(&mut self, boosted: &[bool], round: u32) -> Vec<String> {
        let vis = self.visible(boosted);
        for (e, v) in self.explored.iter_mut().zip(&vis) {
            *e |= *v;
        }
        let width = self.width;
        let mut revealed = Vec::new();
        for o in &mut self.objectives {
            let seen = vis[(o.pos.y * width + o.pos.x) as usize];
            if !o.discovered && o.is_active(round) && (seen || o.bonus) {
                o.discovered = true;
                revealed.push(o.id.clone());
            }
        }
        revealed
    }

    /// Where a move order ends within `speed` steps. An impassable target
    /// is replaced by the last passable cell on the straight line to it.
    pub fn move_destination(&self, from: Pos, target: Pos, speed: u32) -> Vec<Pos> {
        let goal = if self.is_passable(target) {
            target
        } else {
            let mut last = from;
            for p in line(from, target).into_iter().skip(1) {
                if !self.is_passable(p) {
                    break;
                }
                last = p;
            }
            last
        };
        let mut path = self.path(from, goal).unwrap_or_default();
        path.truncate(speed as usize);
        path
    }
}

/// Bresenham line from `a` to `b`, inclusive.
pub fn line(a: Pos, b: Pos) -> Vec<Pos> {
    let (dx, dy) = ((b.x - a.x).abs(), -(b.y - a.y).abs());
    let (sx, sy) = (
        if a.x < b.x { 1 } else { -1 },
        if a.y < b.y { 1 } else { -1 },
    );
    let (mut x, mut y, mut err) = (a.x, a.y, dx + dy);
    let mut out = vec![a];
    while (x, y) != (b.x, b.y) {
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
        out.push(Pos::new(x, y));
    }
    out
}

fn objective_id(i: usize) -> String {
    ((b'A' + i as u8) as char).to_string()
}

pub fn generate_scenario(seed: u64, difficulty: Difficulty) -> Result<TacticalMap> {
    let unsupported = Error::UnsupportedDifficulty {
        game: GameId::Phantom,
        difficulty,
    };
    let size = map_size(difficulty).ok_or(unsupported)?;
    let (n_obj, n_hidden, kinds) = roster(difficulty).expect("sized difficulties have a roster");
    let mut rng = substream(seed, Substream::Layout);

    let spawn: Vec<Pos> = [(1, size - 2), (2, size - 2), (1, size - 3), (2, size - 3)]
        .into_iter()
        .map(|(x, y)| Pos::new(x, y))
        .collect();
    let spawn_zone = |p: Pos| p.x <= 3 && p.y >= size - 4;

    let mut passable = vec![true; (size * size) as usize];
    let target_blocked = (BLOCKED_FRACTION * (size * size) as f64).round() as usize;
    let mut blocked = 0;
    while blocked < target_blocked {
        let p = Pos::new(rng.random_range(0..size), rng.random_range(0..size));
        let i = (p.y * size + p.x) as usize;
        if passable[i] && !spawn_zone(p) {
            passable[i] = false;
            blocked += 1;
        }
    }
    // Seal pockets the squad could never reach.
    let reach = grid::distances(size, size, spawn[0], |p| {
        passable[(p.y * size + p.x) as usize]
    });
    for (i, d) in reach.iter().enumerate() {
        if d.is_none() {
            passable[i] = false;
        }
    }

    let units: Vec<Unit> = kinds
        .iter()
        .enumerate()
        .map(|(i, k)| Unit {
            id: format!("U{}", i + 1),
            kind: *k,
            pos: spawn[i],
        })
        .collect();

    let min_spread = size / 3;
    let mut candidates: Vec<Pos> = (0..size)
        .flat_map(|y| (0..size).map(move |x| Pos::new(x, y)))
        .filter(|p| passable[(p.y * size + p.x) as usize] && !spawn_zone(*p))
        .filter(|p| p.manhattan(spawn[0]) as i32 >= min_spread)
        .collect();
    candidates.shuffle(&mut rng);
    let total = n_obj + usize::from(difficulty == Difficulty::Hard);
    let mut chosen: Vec<Pos> = Vec::new();
    for p in candidates {
        if chosen.iter().all(|c| c.manhattan(p) >= 3) {
            chosen.push(p);
        }
        if chosen.len() == total {
            break;
        }
    }

    // The farthest objectives are the hidden ones.
    let split = chosen.len().min(n_obj);
    chosen[..split].sort_by_key(|p| (p.manhattan(spawn[0]), *p));
    let mut objectives: Vec<Objective> = chosen
        .iter()
        .take(n_obj)
        .enumerate()
        .map(|(i, &pos)| Objective {
            id: objective_id(i),
            pos,
            points: (20 + 5 * rng.random_range(0..=4)) as f64,
            hidden: i >= n_obj - n_hidden,
            bonus: false,
            active_from: 0,
            discovered: i < n_obj - n_hidden,
            completed: false,
        })
        .collect();
    if let Some(&pos) = chosen.get(n_obj) {
        let base: f64 = objectives.iter().map(|o| o.points).sum();
        objectives.push(Objective {
            id: "X".into(),
            pos,
            points: BONUS_FRACTION * base,
            hidden: false,
            bonus: true,
            active_from: BONUS_SPAWN_ROUND.min(round_limit(difficulty).unwrap_or(1) - 1),
            discovered: false,
            completed: false,
        });
    }

    let mut map = TacticalMap {
        width: size,
        height: size,
        passable,
        units,
        objectives,
        explored: vec![false; (size * size) as usize],
    };
    map.update_fog(&[], 0);
    Ok(map)
}
