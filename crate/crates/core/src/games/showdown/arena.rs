use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ArenaAction;
use crate::engine::CueKind;
use crate::games::grid::Pos;
use crate::rng::{substream, Substream};

pub const SIZE: i32 = 13;
pub const PLAYERS: usize = 4;
pub const FUSE_TICKS: u32 = 8;
pub const START_RANGE: u32 = 2;
pub const MAX_RANGE: u32 = 5;
pub const BOMBS_PER_PLAYER: u32 = 1;
pub const CRATE_FRACTION: f64 = 0.6;
pub const POWERUP_CHANCE: f64 = 0.15;
pub const SPAWNS: [Pos; PLAYERS] = [
    Pos::new(1, 1),
    Pos::new(SIZE - 2, 1),
    Pos::new(1, SIZE - 2),
    Pos::new(SIZE - 2, SIZE - 2),
];
pub const COLORS: [&str; PLAYERS] = ["red", "blue", "green", "yellow"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Empty,
    Crate,
    Solid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub seat: usize,
    pub pos: Pos,
    pub alive: bool,
    pub bombs_available: u32,
    pub blast_range: u32,
    pub kills: u32,
    pub deaths: u32,
    /// Tick of elimination.
    pub died_at: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bomb {
    pub owner: usize,
    pub pos: Pos,
    pub fuse: u32,
    pub range: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueRecord {
    pub cue: CueKind,
    pub pos: Pos,
    pub tick: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeathRecord {
    pub seat: usize,
    pub tick: u32,
    /// Owner of the bomb whose blast killed the player.
    pub by: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arena {
    pub cells: Vec<CellKind>,
    /// Power-ups under crates (hidden) or lying in the open.
    pub powerups: Vec<Pos>,
    pub players: Vec<Player>,
    pub bombs: Vec<Bomb>,
    pub tick: u32,
    pub cue_log: Vec<CueRecord>,
    pub deaths: Vec<DeathRecord>,
    /// Cells covered by blasts during the last tick.
    pub last_blast: Vec<Pos>,
}

impl Arena {
    pub fn generate(seed: u64) -> Self {
        let mut rng = substream(seed, Substream::Layout);
        let mut cells = vec![CellKind::Empty; (SIZE * SIZE) as usize];
        let mut powerups = Vec::new();
        let near_spawn = |p: Pos| SPAWNS.iter().any(|s| s.manhattan(p) <= 1);
        for y in 0..SIZE {
            for x in 0..SIZE {
                let p = Pos::new(x, y);
                let border = x == 0 || y == 0 || x == SIZE - 1 || y == SIZE - 1;
                let pillar = x % 2 == 0 && y % 2 == 0;
                let i = (y * SIZE + x) as usize;
                if border || pillar {
                    cells[i] = CellKind::Solid;
                } else if !near_spawn(p) && rng.random_bool(CRATE_FRACTION) {
                    cells[i] = CellKind::Crate;
                    if rng.random_bool(POWERUP_CHANCE) {
                        powerups.push(p);
                    }
                }
            }
        }
        let players = SPAWNS
            .iter()
            .enumerate()
            .map(|(seat, &pos)| Player {
                seat,
                pos,
                alive: true,
                bombs_available: BOMBS_PER_PLAYER,
                blast_range: START_RANGE,
                kills: 0,
                deaths: 0,
                died_at: None,
            })
            .collect();
        Self {
            cells,
            powerups,
            players,
            bombs: Vec::new(),
            tick: 0,
            cue_log: Vec::new(),
            deaths: Vec::new(),
            last_blast: Vec::new(),
        }
    }

    pub fn cell(&self, p: Pos) -> CellKind {
        if p.in_bounds(SIZE, SIZE) {
            self.cells[(p.y * SIZE + p.x) as usize]
        } else {
            CellKind::Solid
        }
    }

    pub fn bomb_at(&self, p: Pos) -> Option<&Bomb> {
        self.bombs.iter().find(|b| b.pos == p)
    }

    /// Open floor without a bomb.
    pub fn walkable(&self, p: Pos) -> bool {
        self.cell(p) == CellKind::Empty && self.bomb_at(p).is_none()
    }

    pub fn alive_count(&self) -> usize {
        self.players.iter().filter(|p| p.alive).count()
    }

    pub fn is_over(&self) -> bool {
        self.alive_count() <= 1
    }

    pub fn winner(&self) -> Option<usize> {
        if self.alive_count() == 1 {
            self.players.iter().find(|p| p.alive).map(|p| p.seat)
        } else {
            None
        }
    }

    pub fn visible_powerups(&self) -> impl Iterator<Item = &Pos> {
        self.powerups
            .iter()
            .filter(|p| self.cell(**p) == CellKind::Empty)
    }

    /// Cells a blast of `range` from `origin` reaches: it stops before solid
    /// blocks and on the first crate.
    pub fn blast_cells(&self, origin: Pos, range: u32) -> Vec<Pos> {
        let mut out = vec![origin];
        for (dx, dy) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
            for r in 1..=range as i32 {
                let p = Pos::new(origin.x + dx * r, origin.y + dy * r);
                match self.cell(p) {
                    CellKind::Solid => break,
                    CellKind::Crate => {
                        out.push(p);
                        break;
                    }
                    CellKind::Empty => out.push(p),
                }
            }
        }
        out
    }

    /// One simultaneous tick: moves, bomb placement, pick-ups, then fuses and
    /// chained detonations. Dead players' actions are ignored.
    pub fn showdown_tick(&mut self, actions: &[ArenaAction; PLAYERS]) {
        self.tick += 1;
        let tick = self.tick;
        for (seat, action) in actions.iter().enumerate() {
            if !self.players[seat].alive {
                continue;
            }
            let pos = self.players[seat].pos;
            let target = match action {
                ArenaAction::Up => Pos::new(pos.x, pos.y - 1),
                ArenaAction::Down => Pos::new(pos.x, pos.y + 1),
                ArenaAction::Left => Pos::new(pos.x - 1, pos.y),
                ArenaAction::Right => Pos::new(pos.x + 1, pos.y),
                ArenaAction::Bomb | ArenaAction::Wait => continue,
            };
            if self.walkable(target) {
                self.players[seat].pos = target;
            }
        }
        for (seat, &action) in actions.iter().enumerate() {
            let p = &self.players[seat];
            if p.alive
                && action == ArenaAction::Bomb
                && p.bombs_available > 0
                && self.bomb_at(p.pos).is_none()
            {
                let bomb = Bomb {
                    owner: seat,
                    pos: p.pos,
                    fuse: FUSE_TICKS,
                    range: p.blast_range,
                };
                self.cue_log.push(CueRecord {
                    cue: CueKind::BombPlaced,
                    pos: bomb.pos,
                    tick,
                });
                self.players[seat].bombs_available -= 1;
                self.bombs.push(bomb);
            }
        }
        for seat in 0..PLAYERS {
            let pos = self.players[seat].pos;
            if !self.players[seat].alive || self.cell(pos) != CellKind::Empty {
                continue;
            }
            if let Some(i) = self.powerups.iter().position(|p| *p == pos) {
                self.powerups.remove(i);
                let player = &mut self.players[seat];
                player.blast_range = (player.blast_range + 1).min(MAX_RANGE);
                self.cue_log.push(CueRecord {
                    cue: CueKind::Powerup,
                    pos,
                    tick,
                });
            }
        }
        self.detonate(tick);
    }

    fn detonate(&mut self, tick: u32) {
        for b in &mut self.bombs {
            b.fuse = b.fuse.saturating_sub(1);
        }
        let mut queue: Vec<usize> = (0..self.bombs.len())
            .filter(|&i| self.bombs[i].fuse == 0)
            .collect();
        let mut exploded = vec![false; self.bombs.len()];
        for &i in &queue {
            exploded[i] = true;
        }
        // Cell -> owner of the first blast that reached it.
        let mut hit: Vec<(Pos, usize)> = Vec::new();
        let mut k = 0;
        while k < queue.len() {
            let bomb = self.bombs[queue[k]].clone();
            k += 1;
            self.cue_log.push(CueRecord {
                cue: CueKind::Explosion,
                pos: bomb.pos,
                tick,
            });
            for cell in self.blast_cells(bomb.pos, bomb.range) {
                if !hit.iter().any(|(p, _)| *p == cell) {
                    hit.push((cell, bomb.owner));
                }
                for (j, other) in self.bombs.iter().enumerate() {
                    if !exploded[j] && other.pos == cell {
                        exploded[j] = true;
                        queue.push(j);
                    }
                }
            }
        }
        for (cell, _) in &hit {
            let i = (cell.y * SIZE + cell.x) as usize;
            if self.cells[i] == CellKind::Crate {
                self.cells[i] = CellKind::Empty;
            }
        }
        for seat in 0..PLAYERS {
            let pos = self.players[seat].pos;
            if !self.players[seat].alive {
                continue;
            }
            if let Some(&(_, owner)) = hit.iter().find(|(p, _)| *p == pos) {
                let player = &mut self.players[seat];
                player.alive = false;
                player.deaths += 1;
                player.died_at = Some(tick);
                self.deaths.push(DeathRecord {
                    seat,
                    tick,
                    by: owner,
                });
                if owner != seat {
                    self.players[owner].kills += 1;
                }
            }
        }
        let mut returned = Vec::new();
        let mut kept = Vec::new();
        for (j, b) in std::mem::take(&mut self.bombs).into_iter().enumerate() {
            if exploded[j] {
                returned.push(b.owner);
            } else {
                kept.push(b);
            }
        }
        self.bombs = kept;
        for owner in returned {
            self.players[owner].bombs_available += 1;
        }
        self.last_blast = hit.into_iter().map(|(p, _)| p).collect();
    }

    /// Final placement per seat: 1 for the survivor(s); eliminated players
    /// rank by elimination tick, later is better, ties share a place.
    pub fn placements(&self) -> Vec<u32> {
        self.players
            .iter()
            .map(|p| {
                let better = self
                    .players
                    .iter()
                    .filter(|q| match (p.died_at, q.died_at) {
                        (None, _) => false,
                        (Some(_), None) => true,
                        (Some(a), Some(b)) => b > a,
                    })
                    .count();
                better as u32 + 1
            })
            .collect()
    }
}
