//! First-person maze navigation guided by spoken directions.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{self, Pos};
use crate::digest::{ContentHasher, Digest};
use crate::engine::{
    ActionEnvelope, ActionPayload, ActionSpace, AudioPayload, Difficulty, EnvDescriptor,
    Environment, GameId, MetricMap, ObservationBundle, Outcome, Privileged, Status,
};
use crate::error::{Error, Result};
use crate::grammar;
use crate::render::{frames, prompt};
use crate::rng::{substream, substream_at, Substream};

pub const STEP_CAP: u32 = 500;
pub const GOAL_RADIUS: f64 = 0.5;
pub const FOV_DEG: f64 = 60.0;
pub const RANDOM_ROTATIONS: [f64; 5] = [-90.0, -45.0, 0.0, 45.0, 90.0];
pub const RANDOM_MOVES: [f64; 2] = [0.0, 1.0];
const WALL_CLEARANCE: f64 = 1e-9;

pub fn maze_size(difficulty: Difficulty) -> Option<i32> {
    match difficulty {
        Difficulty::Easy => Some(7),
        Difficulty::Medium => Some(11),
        Difficulty::Hard => Some(15),
        Difficulty::None => None,
    }
}

pub fn min_distance(difficulty: Difficulty) -> Option<u32> {
    match difficulty {
        Difficulty::Easy => Some(5),
        Difficulty::Medium => Some(8),
        Difficulty::Hard => Some(14),
        Difficulty::None => None,
    }
}

/// Wall grid with rooms on odd coordinates and a solid outer border.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Maze {
    pub width: i32,
    pub height: i32,
    pub walls: Vec<bool>,
    pub start: Pos,
    pub target: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    /// The ray crossed a vertical grid line (an east or west wall face).
    pub vertical_face: bool,
    pub hit: bool,
}

impl Maze {
    pub fn is_wall(&self, p: Pos) -> bool {
        !p.in_bounds(self.width, self.height) || self.walls[(p.y * self.width + p.x) as usize]
    }

    pub fn open_cells(&self) -> Vec<Pos> {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| Pos::new(x, y)))
            .filter(|&p| !self.is_wall(p))
            .collect()
    }

    pub fn path(&self, from: Pos, to: Pos) -> Option<Vec<Pos>> {
        grid::shortest_path(self.width, self.height, from, to, |p| !self.is_wall(p))
    }

    pub fn distance(&self, from: Pos, to: Pos) -> Option<u32> {
        self.path(from, to).map(|p| p.len() as u32)
    }

    /// Walks a ray from `(ox, oy)` along the unit vector `(dx, dy)` and
    /// returns the distance to the first wall face, or `max` if none is hit.
    /// A ray passing exactly through a corner is blocked if either cell
    /// beside the corner is a wall.
    pub fn cast(&self, ox: f64, oy: f64, dx: f64, dy: f64, max: f64) -> RayHit {
        let mut cx = ox.floor() as i32;
        let mut cy = oy.floor() as i32;
        let step_x = if dx > 0.0 { 1 } else { -1 };
        let step_y = if dy > 0.0 { 1 } else { -1 };
        let t_dx = if dx == 0.0 {
            f64::INFINITY
        } else {
            1.0 / dx.abs()
        };
        let t_dy = if dy == 0.0 {
            f64::INFINITY
        } else {
            1.0 / dy.abs()
        };
        let mut t_x = if dx > 0.0 {
            (cx as f64 + 1.0 - ox) / dx
        } else if dx < 0.0 {
            (ox - cx as f64) / -dx
        } else {
            f64::INFINITY
        };
        let mut t_y = if dy > 0.0 {
            (cy as f64 + 1.0 - oy) / dy
        } else if dy < 0.0 {
            (oy - cy as f64) / -dy
        } else {
            f64::INFINITY
        };
        loop {
            let t = t_x.min(t_y);
            if t > max {
                return RayHit {
                    distance: max,
                    vertical_face: false,
                    hit: false,
                };
            }
            if (t_x - t_y).abs() < 1e-12 {
                let side_x = Pos::new(cx + step_x, cy);
                let side_y = Pos::new(cx, cy + step_y);
                if self.is_wall(side_x) || self.is_wall(side_y) {
                    return RayHit {
                        distance: t,
                        vertical_face: self.is_wall(side_x),
                        hit: true,
                    };
                }
                cx += step_x;
                cy += step_y;
                t_x += t_dx;
                t_y += t_dy;
                if self.is_wall(Pos::new(cx, cy)) {
                    return RayHit {
                        distance: t,
                        vertical_face: true,
                        hit: true,
                    };
                }
            } else if t_x < t_y {
                cx += step_x;
                if self.is_wall(Pos::new(cx, cy)) {
                    return RayHit {
                        distance: t_x,
                        vertical_face: true,
                        hit: true,
                    };
                }
                t_x += t_dx;
            } else {
                cy += step_y;
                if self.is_wall(Pos::new(cx, cy)) {
                    return RayHit {
                        distance: t_y,
                        vertical_face: false,
                        hit: true,
                    };
                }
                t_y += t_dy;
            }
        }
    }
}

/// Recursive-backtracker maze with a start/target pair at least the
/// difficulty's minimum BFS distance apart.
pub fn generate_maze(seed: u64, difficulty: Difficulty) -> Result<Maze> {
    let unsupported = Error::UnsupportedDifficulty {
        game: GameId::Pathfinding,
        difficulty,
    };
    let size = maze_size(difficulty).ok_or(unsupported)?;
    let min_dist = min_distance(difficulty).expect("sized difficulties have a floor");
    let mut rng = substream(seed, Substream::Layout);

    let mut walls = vec![true; (size * size) as usize];
    let idx = |p: Pos| (p.y * size + p.x) as usize;
    let rooms = size / 2;
    let room = |i: i32, j: i32| Pos::new(2 * i + 1, 2 * j + 1);
    let first = room(rng.random_range(0..rooms), rng.random_range(0..rooms));
    walls[idx(first)] = false;
    let mut stack = vec![first];
    while let Some(&cur) = stack.last() {
        let mut options: Vec<Pos> = [(0, -2), (2, 0), (0, 2), (-2, 0)]
            .iter()
            .map(|(dx, dy)| Pos::new(cur.x + dx, cur.y + dy))
            .filter(|p| p.x > 0 && p.y > 0 && p.x < size - 1 && p.y < size - 1 && walls[idx(*p)])
            .collect();
        if options.is_empty() {
            stack.pop();
            continue;
        }
        options.shuffle(&mut rng);
        let next = options[0];
        walls[idx(Pos::new((cur.x + next.x) / 2, (cur.y + next.y) / 2))] = false;
        walls[idx(next)] = false;
        stack.push(next);
    }

    let mut maze = Maze {
        width: size,
        height: size,
        walls,
        start: first,
        target: first,
    };
    let all_rooms: Vec<Pos> = (0..rooms)
        .flat_map(|j| (0..rooms).map(move |i| room(i, j)))
        .collect();
    for _ in 0..1000 {
        let a = all_rooms[rng.random_range(0..all_rooms.len())];
        let b = all_rooms[rng.random_range(0..all_rooms.len())];
        if a != b && maze.distance(a, b).is_some_and(|d| d >= min_dist) {
            maze.start = a;
            maze.target = b;
            return Ok(maze);
        }
    }
    // Fall back to the two ends of a diameter.
    let far = |from: Pos, m: &Maze| {
        let d = grid::distances(size, size, from, |p| !m.is_wall(p));
        *all_rooms
            .iter()
            .max_by_key(|p| (d[idx(**p)].unwrap_or(0), std::cmp::Reverse(**p)))
            .expect("rooms exist")
    };
    maze.start = far(first, &maze);
    maze.target = far(maze.start, &maze);
    Ok(maze)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub steps_taken: u32,
    pub invalid_count: u32,
    pub target_visible: bool,
}

impl NavState {
    pub fn cell(&self) -> Pos {
        Pos::new(self.x.floor() as i32, self.y.floor() as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavAction {
    pub rotate_deg: f64,
    pub move_units: f64,
}

impl NavAction {
    pub fn is_valid(&self) -> bool {
        self.rotate_deg.is_finite()
            && self.move_units.is_finite()
            && (-180.0..=180.0).contains(&self.rotate_deg)
            && (0.0..=1.0).contains(&self.move_units)
    }
}

pub fn normalize_heading(deg: f64) -> f64 {
    let h = deg.rem_euclid(360.0);
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Maps an angle into (-180, 180].
pub fn signed_angle(deg: f64) -> f64 {
    let h = normalize_heading(deg);
    if h > 180.0 {
        h - 360.0
    } else {
        h
    }
}

/// Unit vector for a heading; 0 faces north (-y), angles grow clockwise.
pub fn direction(heading: f64) -> (f64, f64) {
    let r = heading.to_radians();
    let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    (snap(r.sin()), snap(-r.cos()))
}

/// Heading that faces along `(dx, dy)`; exact for axis-aligned vectors.
pub fn bearing(dx: f64, dy: f64) -> f64 {
    match (dx == 0.0, dy == 0.0) {
        (true, _) if dy < 0.0 => 0.0,
        (true, _) if dy > 0.0 => 180.0,
        (_, true) if dx > 0.0 => 90.0,
        (_, true) if dx < 0.0 => 270.0,
        _ => normalize_heading(dx.atan2(-dy).to_degrees()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relative {
    Ahead,
    Right,
    Left,
    Behind,
}

impl Relative {
    pub fn of(angle: f64) -> Self {
        let a = signed_angle(angle);
        if a.abs() <= 45.0 {
            Relative::Ahead
        } else if a > 45.0 && a <= 135.0 {
            Relative::Right
        } else if (-135.0..-45.0).contains(&a) {
            Relative::Left
        } else {
            Relative::Behind
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Relative::Ahead => "ahead",
            Relative::Right => "right",
            Relative::Left => "left",
            Relative::Behind => "behind",
        }
    }
}

pub(crate) fn cell_center(p: Pos) -> (f64, f64) {
    (p.x as f64 + 0.5, p.y as f64 + 0.5)
}

pub(crate) fn target_distance(state: &NavState, maze: &Maze) -> f64 {
    let (tx, ty) = cell_center(maze.target);
    (tx - state.x).hypot(ty - state.y)
}

pub(crate) fn target_relative(state: &NavState, maze: &Maze) -> f64 {
    let (tx, ty) = cell_center(maze.target);
    signed_angle(bearing(tx - state.x, ty - state.y) - state.heading)
}

pub fn target_visible(state: &NavState, maze: &Maze) -> bool {
    let dist = target_distance(state, maze);
    if dist < 1e-12 {
        return true;
    }
    if target_relative(state, maze).abs() > FOV_DEG / 2.0 {
        return false;
    }
    let (tx, ty) = cell_center(maze.target);
    let (dx, dy) = ((tx - state.x) / dist, (ty - state.y) / dist);
    !maze.cast(state.x, state.y, dx, dy, dist).hit
}

pub fn goal_reached(state: &NavState, maze: &Maze) -> bool {
    target_distance(state, maze) <= GOAL_RADIUS + 1e-12
}

/// Rotate, then walk forward until the requested distance or the first wall.
/// `None` is an invalid action: only the counters move.
pub fn nav_step(state: &NavState, maze: &Maze, action: Option<NavAction>) -> NavState {
    let mut next = *state;
    next.steps_taken += 1;
    match action.filter(NavAction::is_valid) {
        None => next.invalid_count += 1,
        Some(a) => {
            next.heading = normalize_heading(state.heading + a.rotate_deg);
            if a.move_units > 0.0 {
                let (dx, dy) = direction(next.heading);
                let hit = maze.cast(state.x, state.y, dx, dy, a.move_units);
                let travel = if hit.hit {
                    (hit.distance - WALL_CLEARANCE).max(0.0)
                } else {
                    a.move_units
                };
                next.x = state.x + dx * travel;
                next.y = state.y + dy * travel;
            }
            next.target_visible = target_visible(&next, maze);
        }
    }
    next
}

/// The waypoint the guidance talks about and how many straight cells follow.
fn next_leg(state: &NavState, maze: &Maze) -> ((f64, f64), usize) {
    let path = maze.path(state.cell(), maze.target).unwrap_or_default();
    let Some(&first) = path.first() else {
        return (cell_center(maze.target), 1);
    };
    let from = state.cell();
    let step = (first.x - from.x, first.y - from.y);
    let mut run = 1;
    let mut prev = first;
    for &p in &path[1..] {
        if (p.x - prev.x, p.y - prev.y) != step {
            break;
        }
        run += 1;
        prev = p;
    }
    (cell_center(first), run)
}

pub fn guidance_relative(state: &NavState, maze: &Maze) -> Relative {
    let ((wx, wy), _) = next_leg(state, maze);
    if (wx - state.x).abs() < 1e-12 && (wy - state.y).abs() < 1e-12 {
        return Relative::Ahead;
    }
    Relative::of(bearing(wx - state.x, wy - state.y) - state.heading)
}

/// Spoken directions toward the next waypoint of the shortest path.
pub fn guidance_transcript(state: &NavState, maze: &Maze) -> String {
    let (_, run) = next_leg(state, maze);
    let unit = if run == 1 { "step" } else { "steps" };
    let first = match guidance_relative(state, maze) {
        Relative::Ahead => format!("Move forward {run} {unit}."),
        Relative::Right => format!("Turn right, then move forward {run} {unit}."),
        Relative::Left => format!("Turn left, then move forward {run} {unit}."),
        Relative::Behind => format!("Turn around, then move forward {run} {unit}."),
    };
    let remaining = maze.distance(state.cell(), maze.target).unwrap_or(0);
    let side = match Relative::of(target_relative(state, maze)) {
        Relative::Ahead => "ahead".to_string(),
        Relative::Behind => "behind".to_string(),
        r => format!("to the {}", r.word()),
    };
    format!("{first} The target is {side}, {remaining} cells away along the path.")
}

/// Fixed-order state report. Coordinates and heading print with full
/// precision so the report parses back exactly.
pub fn nav_state_description(state: &NavState, maze: &Maze) -> String {
    let (tx, ty) = cell_center(maze.target);
    format!(
        "Position: x={}, y={}\n\
         Heading: {} degrees\n\
         Steps taken: {}\n\
         Target direction: {}\n\
         Target bearing: {:.1} degrees\n\
         Target distance: {:.2} cells\n\
         Target cell: x={}, y={}\n\
         Target visible: {}",
        state.x,
        state.y,
        state.heading,
        state.steps_taken,
        Relative::of(target_relative(state, maze)).word(),
        bearing(tx - state.x, ty - state.y),
        target_distance(state, maze),
        maze.target.x,
        maze.target.y,
        if state.target_visible { "yes" } else { "no" },
    )
}

/// Recovers `(x, y, heading)` from a state report.
pub fn parse_state_description(text: &str) -> Option<(f64, f64, f64)> {
    let mut pos = None;
    let mut heading = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("Position: x=") {
            let (x, y) = rest.split_once(", y=")?;
            pos = Some((x.parse().ok()?, y.parse().ok()?));
        } else if let Some(rest) = line.strip_prefix("Heading: ") {
            heading = rest.strip_suffix(" degrees")?.parse().ok();
        }
    }
    let (x, y) = pos?;
    Some((x, y, heading?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub maze: Maze,
    pub state: NavState,
}

pub fn parse_nav(body: &str) -> Option<NavAction> {
    let words = grammar::words(body);
    let mut rotate = None;
    let mut movement = None;
    let mut i = 0;
    while i < words.len() {
        let slot = match words[i].as_str() {
            "rotate" | "turn" => &mut rotate,
            "move" | "forward" => &mut movement,
            "degrees" | "deg" | "cells" | "cell" | "units" | "unit" | "steps" | "step" => {
                i += 1;
                continue;
            }
            _ => return None,
        };
        let value = grammar::number(words.get(i + 1)?)?;
        if slot.replace(value).is_some() {
            return None;
        }
        i += 2;
    }
    if rotate.is_none() && movement.is_none() {
        return None;
    }
    let action = NavAction {
        rotate_deg: rotate.unwrap_or(0.0),
        move_units: movement.unwrap_or(0.0),
    };
    action.is_valid().then_some(action)
}

pub struct PathfindingEnv {
    descriptor: EnvDescriptor,
    maze: Maze,
    state: NavState,
    reached: bool,
}

impl PathfindingEnv {
    pub fn new(descriptor: EnvDescriptor) -> Result<Self> {
        let maze = generate_maze(descriptor.seed, descriptor.difficulty)?;
        let mut rng = substream_at(descriptor.seed, Substream::Layout, 1);
        let heading = [0.0, 90.0, 180.0, 270.0][rng.random_range(0..4)];
        let (x, y) = cell_center(maze.start);
        let mut state = NavState {
            x,
            y,
            heading,
            steps_taken: 0,
            invalid_count: 0,
            target_visible: false,
        };
        state.target_visible = target_visible(&state, &maze);
        Ok(Self {
            descriptor,
            maze,
            state,
            reached: false,
        })
    }

    pub fn maze(&self) -> &Maze {
        &self.maze
    }

    pub fn state(&self) -> &NavState {
        &self.state
    }
}

impl Environment for PathfindingEnv {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.descriptor
    }

    fn system_prompt(&self) -> String {
        prompt::PATHFINDING.system_text.to_string()
    }

    fn observe(&self) -> ObservationBundle {
        let step = (self.state.steps_taken + 1).to_string();
        let dump = nav_state_description(&self.state, &self.maze);
        let text = prompt::PATHFINDING
            .turn(&[("step", &step), ("state_description", &dump)])
            .expect("pathfinding template fields");
        let mut obs = ObservationBundle::new(prompt::PATHFINDING.action_request);
        obs.frame = Some(frames::pathfinding_view(
            &self.maze,
            &self.state,
            guidance_relative(&self.state, &self.maze),
        ));
        obs.audio = Some(AudioPayload::transcript(guidance_transcript(
            &self.state,
            &self.maze,
        )));
        obs.text = Some(text);
        obs
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(
            RANDOM_ROTATIONS
                .iter()
                .flat_map(|r| {
                    RANDOM_MOVES
                        .iter()
                        .map(move |m| format!("rotate {r} move {m}"))
                })
                .collect(),
        )
    }

    fn parse_action(&self, raw: &str) -> ActionEnvelope {
        match grammar::first_action(raw).as_deref().and_then(parse_nav) {
            Some(a) => ActionEnvelope::valid(
                GameId::Pathfinding,
                ActionPayload::Nav {
                    rotate_deg: a.rotate_deg,
                    move_units: a.move_units,
                },
                raw,
            ),
            None => ActionEnvelope::invalid(GameId::Pathfinding, raw),
        }
    }

    fn apply(&mut self, action: &ActionEnvelope) -> String {
        let nav = match (&action.payload, action.valid) {
            (
                ActionPayload::Nav {
                    rotate_deg,
                    move_units,
                },
                true,
            ) => Some(NavAction {
                rotate_deg: *rotate_deg,
                move_units: *move_units,
            }),
            _ => None,
        };
        let before = self.state;
        self.state = nav_step(&before, &self.maze, nav);
        let Some(nav) = nav.filter(NavAction::is_valid) else {
            return "invalid action ignored".into();
        };
        let moved = (self.state.x - before.x).hypot(self.state.y - before.y);
        if goal_reached(&self.state, &self.maze) {
            self.reached = true;
            return format!("moved {moved:.2} cells and reached the target");
        }
        if moved + 1e-6 < nav.move_units {
            format!(
                "heading {}; blocked by a wall after {moved:.2} cells",
                self.state.heading
            )
        } else {
            format!("heading {}; moved {moved:.2} cells", self.state.heading)
        }
    }

    fn status(&self) -> Status {
        if self.reached {
            Status::Finished(Outcome::GoalReached)
        } else {
            Status::Running
        }
    }

    fn world_digest(&self) -> Digest {
        let mut h = ContentHasher::new("pathfinding-world");
        h.json(&self.maze)
            .f64(self.state.x)
            .f64(self.state.y)
            .f64(self.state.heading)
            .bool(self.reached);
        h.finish()
    }

    fn raw_metrics(&self) -> MetricMap {
        let mut m = MetricMap::new();
        m.insert("goal_reached".into(), if self.reached { 1.0 } else { 0.0 });
        m.insert(
            "shortest_path".into(),
            self.maze
                .distance(self.maze.start, self.maze.target)
                .unwrap_or(0) as f64,
        );
        m
    }

    fn privileged(&self) -> Privileged {
        Privileged::Pathfinding(Truth {
            maze: self.maze.clone(),
            state: self.state,
        })
    }
}
