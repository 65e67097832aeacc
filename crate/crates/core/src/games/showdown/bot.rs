//! Rule-based arena player: flee blasts, bomb crates and rivals when an
//! escape exists, otherwise advance.

use std::collections::{HashMap, VecDeque};

use rand::Rng;

use super::arena::{Arena, Bomb, CellKind, FUSE_TICKS};
use super::ArenaAction;
use crate::games::grid::Pos;
use crate::rng::StreamRng;

const WANDER_PROB: f64 = 0.1;

/// Ticks until each threatened cell is hit, chain reactions included.
pub fn danger_map(arena: &Arena) -> HashMap<Pos, u32> {
    let mut effective: Vec<u32> = arena.bombs.iter().map(|b| b.fuse).collect();
    loop {
        let mut changed = false;
        for i in 0..arena.bombs.len() {
            let cells = arena.blast_cells(arena.bombs[i].pos, arena.bombs[i].range);
            for j in 0..arena.bombs.len() {
                if cells.contains(&arena.bombs[j].pos) && effective[i] < effective[j] {
                    effective[j] = effective[i];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = HashMap::new();
    for (b, &t) in arena.bombs.iter().zip(&effective) {
        for c in arena.blast_cells(b.pos, b.range) {
            let e = out.entry(c).or_insert(t);
            *e = (*e).min(t);
        }
    }
    out
}

fn step_toward(from: Pos, to: Pos) -> ArenaAction {
    match (to.x - from.x, to.y - from.y) {
        (0, -1) => ArenaAction::Up,
        (0, 1) => ArenaAction::Down,
        (-1, 0) => ArenaAction::Left,
        (1, 0) => ArenaAction::Right,
        _ => ArenaAction::Wait,
    }
}

/// Breadth-first search over walkable cells; returns the first step and
/// distance to the nearest cell satisfying `goal`.
fn search(
    arena: &Arena,
    start: Pos,
    avoid: &dyn Fn(Pos, u32) -> bool,
    goal: &dyn Fn(Pos) -> bool,
) -> Option<(Pos, u32)> {
    let mut seen = vec![start];
    let mut queue = VecDeque::from([(start, None::<Pos>, 0u32)]);
    while let Some((p, first, d)) = queue.pop_front() {
        if d > 0 && goal(p) {
            return Some((first.unwrap_or(p), d));
        }
        for n in p.neighbors() {
            if seen.contains(&n) || !arena.walkable(n) || avoid(n, d + 1) {
                continue;
            }
            seen.push(n);
            queue.push_back((n, first.or(Some(n)), d + 1));
        }
    }
    None
}

/// Whether a fresh bomb at `pos` leaves a reachable safe cell in time.
fn has_escape(arena: &Arena, seat: usize, pos: Pos) -> bool {
    let mut trial = arena.clone();
    trial.bombs.push(Bomb {
        owner: seat,
        pos,
        fuse: FUSE_TICKS,
        range: arena.players[seat].blast_range,
    });
    let danger = danger_map(&trial);
    let lethal = |p: Pos, d: u32| danger.get(&p).is_some_and(|&t| t <= d);
    search(&trial, pos, &lethal, &|p| !danger.contains_key(&p)).is_some_and(|(_, d)| d < FUSE_TICKS)
}

fn rival_in_line(arena: &Arena, seat: usize) -> bool {
    let me = &arena.players[seat];
    let reach = arena.blast_cells(me.pos, me.blast_range);
    arena
        .players
        .iter()
        .any(|p| p.alive && p.seat != seat && reach.contains(&p.pos))
}

pub fn survivor_action(arena: &Arena, seat: usize, rng: &mut StreamRng) -> ArenaAction {
    let me = &arena.players[seat];
    if !me.alive {
        return ArenaAction::Wait;
    }
    let danger = danger_map(arena);
    let lethal = |p: Pos, d: u32| danger.get(&p).is_some_and(|&t| t <= d);
    if danger.contains_key(&me.pos) {
        return search(arena, me.pos, &lethal, &|p| !danger.contains_key(&p))
            .map(|(step, _)| step_toward(me.pos, step))
            .unwrap_or(ArenaAction::Wait);
    }
    let next_to_crate = me
        .pos
        .neighbors()
        .iter()
        .any(|n| arena.cell(*n) == CellKind::Crate);
    if me.bombs_available > 0
        && arena.bomb_at(me.pos).is_none()
        && (next_to_crate || rival_in_line(arena, seat))
        && has_escape(arena, seat, me.pos)
    {
        return ArenaAction::Bomb;
    }
    let unsafe_cell = |p: Pos, _d: u32| danger.contains_key(&p);
    if rng.random_bool(WANDER_PROB) {
        let options: Vec<Pos> = me
            .pos
            .neighbors()
            .into_iter()
            .filter(|n| arena.walkable(*n) && !danger.contains_key(n))
            .collect();
        if !options.is_empty() {
            return step_toward(me.pos, options[rng.random_range(0..options.len())]);
        }
    }
    let rivals: Vec<Pos> = arena
        .players
        .iter()
        .filter(|p| p.alive && p.seat != seat)
        .map(|p| p.pos)
        .collect();
    let target = |p: Pos| {
        p.neighbors()
            .iter()
            .any(|n| arena.cell(*n) == CellKind::Crate)
            || rivals.iter().any(|r| r.manhattan(p) <= 1)
            || arena.visible_powerups().any(|u| *u == p)
    };
    search(arena, me.pos, &unsafe_cell, &target)
        .map(|(step, _)| step_toward(me.pos, step))
        .unwrap_or(ArenaAction::Wait)
}
