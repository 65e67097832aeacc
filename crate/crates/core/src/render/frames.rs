//! Per-game frame renderers. All are pure functions of world state.

use image::Rgb;

use super::raster::{
    canvas, draw_glyph, fill_disc, fill_rect, shade, stroke_rect, Color, BLACK, WHITE,
};
use crate::engine::Frame;
use crate::games::echoes::{GridCoord, IconGrid};
use crate::games::grid::Pos;
use crate::games::melody::ColorId;
use crate::games::pathfinding::{self, Maze, NavState, Relative};
use crate::games::phantom::{TacticalMap, UnitKind};
use crate::games::showdown::{Arena, CellKind};

pub const VIEW_WIDTH: u32 = 320;
pub const VIEW_HEIGHT: u32 = 240;
const SKY: Color = [70, 80, 110];
const FLOOR: Color = [90, 75, 60];
const WALL: Color = [200, 200, 190];
const TARGET: Color = [30, 210, 60];
const ARROW: Color = [250, 220, 40];

fn fill_triangle(frame: &mut Frame, pts: [(f64, f64); 3], color: Color) {
    let edge = |a: (f64, f64), b: (f64, f64), p: (f64, f64)| {
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
    };
    let (w, h) = (frame.width(), frame.height());
    let x0 = pts
        .iter()
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min)
        .floor()
        .max(0.0) as u32;
    let x1 = pts
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .min(w as f64 - 1.0) as u32;
    let y0 = pts
        .iter()
        .map(|p| p.1)
        .fold(f64::INFINITY, f64::min)
        .floor()
        .max(0.0) as u32;
    let y1 = pts
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .min(h as f64 - 1.0) as u32;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let e = [
                edge(pts[0], pts[1], p),
                edge(pts[1], pts[2], p),
                edge(pts[2], pts[0], p),
            ];
            if e.iter().all(|v| *v >= 0.0) || e.iter().all(|v| *v <= 0.0) {
                frame.put_pixel(x, y, Rgb(color));
            }
        }
    }
}

/// First-person raycast view with the target marker and a guidance arrow.
pub fn pathfinding_view(maze: &Maze, state: &NavState, guidance: Relative) -> Frame {
    let (w, h) = (VIEW_WIDTH, VIEW_HEIGHT);
    let mut frame = canvas(w, h, SKY);
    fill_rect(&mut frame, 0, h as i64 / 2, w as i64, h as i64 / 2, FLOOR);
    let max = (maze.width + maze.height) as f64 * 2.0;
    let mut depth = vec![f64::INFINITY; w as usize];
    for col in 0..w {
        let offset = (col as f64 + 0.5) / w as f64 - 0.5;
        let angle = state.heading + offset * pathfinding::FOV_DEG;
        let (dx, dy) = pathfinding::direction(angle);
        let ray = maze.cast(state.x, state.y, dx, dy, max);
        if !ray.hit {
            continue;
        }
        let perp = (ray.distance * (offset * pathfinding::FOV_DEG).to_radians().cos()).max(0.05);
        depth[col as usize] = perp;
        let wall_h = (h as f64 / perp).min(h as f64);
        let top = ((h as f64 - wall_h) / 2.0) as i64;
        let tone = if ray.vertical_face { 0.75 } else { 1.0 };
        let fog = (1.0 - perp / max).clamp(0.3, 1.0);
        fill_rect(
            &mut frame,
            col as i64,
            top,
            1,
            wall_h as i64,
            shade(WALL, tone * fog),
        );
    }
    let dist = pathfinding::target_distance(state, maze);
    let rel = pathfinding::target_relative(state, maze);
    if rel.abs() <= pathfinding::FOV_DEG / 2.0 {
        let sx = (0.5 + rel / pathfinding::FOV_DEG) * w as f64;
        let col = (sx as usize).min(w as usize - 1);
        if dist <= depth[col] + 0.5 {
            let r = (h as f64 / 4.0 / dist.max(0.5)).clamp(3.0, h as f64 / 4.0);
            fill_disc(&mut frame, sx, h as f64 / 2.0 + r * 0.5, r, TARGET);
        }
    }
    let (cx, cy, s) = (w as f64 / 2.0, h as f64 - 22.0, 14.0);
    let tri = match guidance {
        Relative::Ahead => [(cx, cy - s), (cx + s, cy + s), (cx - s, cy + s)],
        Relative::Behind => [(cx, cy + s), (cx + s, cy - s), (cx - s, cy - s)],
        Relative::Left => [(cx - s, cy), (cx + s, cy - s), (cx + s, cy + s)],
        Relative::Right => [(cx + s, cy), (cx - s, cy - s), (cx - s, cy + s)],
    };
    fill_triangle(&mut frame, tri, ARROW);
    frame
}

pub const ECHOES_SIZE: u32 = 256;
const ICON_COLOR: Color = [40, 40, 60];
const HIGHLIGHT: Color = [255, 210, 60];
const TILE: Color = [235, 235, 235];

/// Icon grid, optionally with one cell highlighted.
pub fn echoes_grid(grid: &IconGrid, highlight: Option<GridCoord>) -> Frame {
    let mut frame = canvas(ECHOES_SIZE, ECHOES_SIZE, [60, 60, 70]);
    let cell = ECHOES_SIZE as i64 / grid.cols.max(grid.rows) as i64;
    for c in grid.coords() {
        let (x0, y0) = (c.col as i64 * cell, c.row as i64 * cell);
        let bg = if highlight == Some(c) {
            HIGHLIGHT
        } else {
            TILE
        };
        fill_rect(&mut frame, x0 + 2, y0 + 2, cell - 4, cell - 4, bg);
        let pad = cell / 6;
        draw_glyph(
            &mut frame,
            grid.icon_at(c),
            x0 + pad,
            y0 + pad,
            cell - 2 * pad,
            ICON_COLOR,
        );
    }
    frame
}

pub const MELODY_WIDTH: u32 = 350;
pub const MELODY_HEIGHT: u32 = 120;

/// Seven colored blocks; the last clicked one is outlined.
pub fn melody_blocks(last: Option<ColorId>) -> Frame {
    let mut frame = canvas(MELODY_WIDTH, MELODY_HEIGHT, [30, 30, 30]);
    let bw = MELODY_WIDTH as i64 / ColorId::ALL.len() as i64;
    for (i, c) in ColorId::ALL.iter().enumerate() {
        let x0 = i as i64 * bw;
        fill_rect(
            &mut frame,
            x0 + 4,
            20,
            bw - 8,
            MELODY_HEIGHT as i64 - 40,
            c.rgb(),
        );
        if last == Some(*c) {
            stroke_rect(
                &mut frame,
                x0 + 1,
                16,
                bw - 2,
                MELODY_HEIGHT as i64 - 32,
                3,
                WHITE,
            );
        }
    }
    frame
}

pub const PHANTOM_SIZE: u32 = 320;

/// Top-down tactical map under fog. Unexplored cells are black, explored but
/// unseen cells are dimmed.
pub fn phantom_map(map: &TacticalMap, visible: &[bool], positions: &[Pos], round: u32) -> Frame {
    let mut frame = canvas(PHANTOM_SIZE, PHANTOM_SIZE, BLACK);
    let cell = PHANTOM_SIZE as i64 / map.width.max(map.height) as i64;
    for y in 0..map.height {
        for x in 0..map.width {
            let p = Pos::new(x, y);
            let i = (y * map.width + x) as usize;
            if !map.is_explored(p) && !visible[i] {
                continue;
            }
            let base = if map.is_passable(p) {
                [120, 160, 100]
            } else {
                [70, 60, 50]
            };
            let color = if visible[i] { base } else { shade(base, 0.45) };
            fill_rect(
                &mut frame,
                x as i64 * cell,
                y as i64 * cell,
                cell,
                cell,
                color,
            );
        }
    }
    for o in &map.objectives {
        let i = (o.pos.y * map.width + o.pos.x) as usize;
        if !o.discovered || !o.is_active(round) || !(visible[i] || map.is_explored(o.pos)) {
            continue;
        }
        let color = match (o.completed, o.bonus) {
            (true, _) => [150, 150, 150],
            (false, true) => [230, 120, 230],
            (false, false) => [240, 200, 40],
        };
        let (x0, y0) = (o.pos.x as i64 * cell, o.pos.y as i64 * cell);
        stroke_rect(&mut frame, x0 + 1, y0 + 1, cell - 2, cell - 2, 2, color);
    }
    for (u, p) in map.units.iter().zip(positions) {
        let color = match u.kind {
            UnitKind::Scout => [60, 160, 250],
            UnitKind::Infantry => [230, 60, 50],
        };
        let c = cell as f64;
        fill_disc(
            &mut frame,
            (p.x as f64 + 0.5) * c,
            (p.y as f64 + 0.5) * c,
            c * 0.35,
            color,
        );
    }
    frame
}

pub const ARENA_CELL: u32 = 24;
pub const PLAYER_COLORS: [Color; 4] =
    [[220, 50, 50], [50, 100, 230], [50, 190, 70], [235, 210, 40]];

/// Whole arena, top-down. Eliminated players are not drawn.
pub fn showdown_arena(arena: &Arena) -> Frame {
    use crate::games::showdown::arena::SIZE;
    let cell = ARENA_CELL as i64;
    let mut frame = canvas(
        SIZE as u32 * ARENA_CELL,
        SIZE as u32 * ARENA_CELL,
        [40, 110, 50],
    );
    for y in 0..SIZE {
        for x in 0..SIZE {
            let (x0, y0) = (x as i64 * cell, y as i64 * cell);
            match arena.cell(Pos::new(x, y)) {
                CellKind::Solid => fill_rect(&mut frame, x0, y0, cell, cell, [90, 90, 95]),
                CellKind::Crate => {
                    fill_rect(
                        &mut frame,
                        x0 + 1,
                        y0 + 1,
                        cell - 2,
                        cell - 2,
                        [160, 110, 60],
                    );
                    stroke_rect(
                        &mut frame,
                        x0 + 1,
                        y0 + 1,
                        cell - 2,
                        cell - 2,
                        2,
                        [110, 70, 35],
                    );
                }
                CellKind::Empty => {}
            }
        }
    }
    for p in &arena.last_blast {
        fill_rect(
            &mut frame,
            p.x as i64 * cell,
            p.y as i64 * cell,
            cell,
            cell,
            [250, 150, 30],
        );
    }
    for p in arena.visible_powerups() {
        let c = cell as f64;
        fill_disc(
            &mut frame,
            (p.x as f64 + 0.5) * c,
            (p.y as f64 + 0.5) * c,
            c * 0.25,
            [250, 250, 120],
        );
    }
    for b in &arena.bombs {
        let c = cell as f64;
        fill_disc(
            &mut frame,
            (b.pos.x as f64 + 0.5) * c,
            (b.pos.y as f64 + 0.5) * c,
            c * 0.38,
            BLACK,
        );
    }
    for p in arena.players.iter().filter(|p| p.alive) {
        let (x0, y0) = (p.pos.x as i64 * cell, p.pos.y as i64 * cell);
        fill_rect(
            &mut frame,
            x0 + 5,
            y0 + 5,
            cell - 10,
            cell - 10,
            PLAYER_COLORS[p.seat],
        );
        stroke_rect(&mut frame, x0 + 4, y0 + 4, cell - 8, cell - 8, 1, WHITE);
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Difficulty;

    #[test]
    fn arena_hides_eliminated_players() {
        let mut a = Arena::generate(1);
        let before = showdown_arena(&a);
        a.players[2].alive = false;
        let after = showdown_arena(&a);
        assert_ne!(before, after);
        let p = a.players[2].pos;
        let px = *after.get_pixel(
            p.x as u32 * ARENA_CELL + ARENA_CELL / 2,
            p.y as u32 * ARENA_CELL + ARENA_CELL / 2,
        );
        assert_ne!(px.0, PLAYER_COLORS[2]);
    }

    #[test]
    fn view_depends_on_heading() {
        let maze = pathfinding::generate_maze(4, Difficulty::Easy).unwrap();
        let (x, y) = (maze.start.x as f64 + 0.5, maze.start.y as f64 + 0.5);
        let s = |heading| NavState {
            x,
            y,
            heading,
            steps_taken: 0,
            invalid_count: 0,
            target_visible: false,
        };
        let a = pathfinding_view(&maze, &s(0.0), Relative::Ahead);
        let b = pathfinding_view(&maze, &s(90.0), Relative::Ahead);
        assert_eq!(a.dimensions(), (VIEW_WIDTH, VIEW_HEIGHT));
        assert_ne!(a, b);
    }
}
