//! Agents that read ground truth. They bound what a perfect perceiver can
//! score and exercise every game end to end.

use super::{AgentConnector, AgentError, AgentRequest, Capabilities};
use crate::engine::{EnvDescriptor, GameId, Privileged};
use crate::games::echoes::{self, Phase};
use crate::games::grid::Pos;
use crate::games::melody::{self, ColorId};
use crate::games::pathfinding::{self, bearing, signed_angle};
use crate::games::phantom;
use crate::games::showdown;
use crate::rng::{keyed, StreamRng, Substream};

fn truth<'a>(request: &'a AgentRequest<'_>) -> Result<&'a Privileged, AgentError> {
    request
        .privileged
        .ok_or_else(|| AgentError::Protocol("oracle agents need privileged state".into()))
}

fn mismatch() -> AgentError {
    AgentError::Protocol("privileged state is for a different game".into())
}

fn privileged_caps() -> Capabilities {
    Capabilities {
        channels: Vec::new(),
        privileged: true,
    }
}

/// The oracle used for `game`.
pub fn oracle_agent(game: GameId) -> Box<dyn AgentConnector> {
    match game {
        GameId::Pathfinding => Box::new(PathfindingOracle),
        GameId::Echoes => Box::new(EchoesOracle),
        GameId::Melody => Box::new(MelodyDeducer),
        GameId::Phantom => Box::new(PhantomPlanner),
        GameId::Showdown => Box::new(ShowdownSurvivor::default()),
    }
}

/// Follows the shortest path cell centre to cell centre.
pub struct PathfindingOracle;

impl AgentConnector for PathfindingOracle {
    fn agent_id(&self) -> &str {
        "oracle"
    }

    fn capabilities(&self) -> Capabilities {
        privileged_caps()
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {}

    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError> {
        let Privileged::Pathfinding(t) = truth(request)? else {
            return Err(mismatch());
        };
        let path = t
            .maze
            .path(t.state.cell(), t.maze.target)
            .unwrap_or_default();
        let next = path.first().copied().unwrap_or(t.maze.target);
        let (tx, ty) = pathfinding::cell_center(next);
        let (dx, dy) = (tx - t.state.x, ty - t.state.y);
        let dist = dx.hypot(dy);
        if dist < 1e-9 {
            return Ok("ACTION: rotate 0 move 0".into());
        }
        let turn = signed_angle(bearing(dx, dy) - t.state.heading);
        Ok(format!("ACTION: rotate {} move {}", turn, dist.min(1.0)))
    }
}

/// Transcribes the true sequence, then clicks it back.
pub struct EchoesOracle;

impl AgentConnector for EchoesOracle {
    fn agent_id(&self) -> &str {
        "oracle"
    }

    fn capabilities(&self) -> Capabilities {
        privileged_caps()
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {}

    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError> {
        let Privileged::Echoes(t) = truth(request)? else {
            return Err(mismatch());
        };
        Ok(match t.phase {
            Phase::Transcribe => {
                let items: Vec<String> = t
                    .sequence
                    .items
                    .iter()
                    .map(|i| format!("({},{},{})", i.coord.row, i.coord.col, i.icon_name()))
                    .collect();
                format!("ACTION: sequence {}", items.join(" "))
            }
            Phase::Execute | Phase::Done => {
                let item: &echoes::EchoItem = t
                    .sequence
                    .items
                    .get(t.cursor)
                    .or(t.sequence.items.last())
                    .ok_or_else(|| AgentError::Protocol("empty sequence".into()))?;
                format!("ACTION: click {} {}", item.coord.row, item.coord.col)
            }
        })
    }
}

/// Knows the mapping and plays the scale without a miss.
#[derive(Default)]
pub struct MelodyPerfect;

impl AgentConnector for MelodyPerfect {
    fn agent_id(&self) -> &str {
        "oracle-perfect"
    }

    fn capabilities(&self) -> Capabilities {
        privileged_caps()
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {}

    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError> {
        let Privileged::Melody(t) = truth(request)? else {
            return Err(mismatch());
        };
        let note = melody::SCALE[t.cursor.min(melody::SCALE.len() - 1)];
        let color = t
            .mapping
            .color_of(note)
            .ok_or_else(|| AgentError::Protocol("scale note missing from mapping".into()))?;
        Ok(format!("ACTION: click {}", color.name()))
    }
}

/// Learns the mapping only from the tones its own clicks produced: probes
/// untried colors until the next needed note is known, then plays it.
pub struct MelodyDeducer;

impl AgentConnector for MelodyDeducer {
    fn agent_id(&self) -> &str {
        "oracle"
    }

    fn capabilities(&self) -> Capabilities {
        privileged_caps()
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {}

    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError> {
        let Privileged::Melody(t) = truth(request)? else {
            return Err(mismatch());
        };
        let mut heard: Vec<(ColorId, crate::engine::NoteId)> = Vec::new();
        for c in &t.clicks {
            if !heard.iter().any(|(col, _)| *col == c.color) {
                heard.push((c.color, c.note));
            }
        }
        let needed = melody::SCALE[t.cursor.min(melody::SCALE.len() - 1)];
        let untried: Vec<ColorId> = ColorId::ALL
            .into_iter()
            .filter(|c| !heard.iter().any(|(h, _)| h == c))
            .collect();
        let known = heard.iter().find(|(_, n)| *n == needed).map(|(c, _)| *c);
        let color = match (known, untried.as_slice()) {
            (Some(c), _) => c,
            (None, [only]) => *only,
            (None, untried) => untried[0],
        };
        Ok(format!("ACTION: click {}", color.name()))
    }
}

/// Captures where it stands, otherwise walks toward the first objective of
/// its route, otherwise explores the nearest unexplored cell. Routes come
/// from an exhaustive search minimizing the rounds until the last capture.
#[derive(Default)]
pub struct PhantomPlanner;

/// Best routes found so far: (makespan, total rounds, route per unit).
type Routes = (u32, u32, Vec<Vec<usize>>);

struct RouteSearch<'a> {
    speeds: Vec<u32>,
    /// `legs[u][o]`: rounds for unit `u` to walk from its start to objective `o`.
    legs: Vec<Vec<Option<u32>>>,
    /// `hops[a][b]`: path length between objectives `a` and `b`.
    hops: &'a [Vec<Option<u32>>],
    best: Option<Routes>,
}

impl RouteSearch<'_> {
    fn leg(&self, unit: usize, from: Option<usize>, to: usize) -> Option<u32> {
        match from {
            None => self.legs[unit][to],
            Some(f) => self.hops[f][to].map(|len| len.div_ceil(self.speeds[unit])),
        }
    }

    fn search(&mut self, left: &mut Vec<usize>, routes: &mut Vec<Vec<usize>>, busy: &mut Vec<u32>) {
        let makespan = busy.iter().copied().max().unwrap_or(0);
        let total: u32 = busy.iter().sum();
        if self
            .best
            .as_ref()
            .is_some_and(|(m, t, _)| (makespan, total) >= (*m, *t))
        {
            return;
        }
        if left.is_empty() {
            self.best = Some((makespan, total, routes.clone()));
            return;
        }
        for k in 0..left.len() {
            let o = left.remove(k);
            for u in 0..routes.len() {
                let Some(rounds) = self.leg(u, routes[u].last().copied(), o) else {
                    continue;
                };
                let cost = rounds + 1;
                routes[u].push(o);
                busy[u] += cost;
                self.search(left, routes, busy);
                busy[u] -= cost;
                routes[u].pop();
            }
            left.insert(k, o);
        }
    }
}

fn plan_routes(map: &phantom::TacticalMap, open: &[usize]) -> Vec<Vec<usize>> {
    let units = &map.units;
    let hops: Vec<Vec<Option<u32>>> = open
        .iter()
        .map(|&a| {
            open.iter()
                .map(|&b| map.path_length(map.objectives[a].pos, map.objectives[b].pos))
                .collect()
        })
        .collect();
    let mut search = RouteSearch {
        speeds: units.iter().map(|u| u.kind.speed()).collect(),
        legs: units
            .iter()
            .map(|u| {
                open.iter()
                    .map(|&o| {
                        map.path_length(u.pos, map.objectives[o].pos)
                            .map(|len| len.div_ceil(u.kind.speed()))
                    })
                    .collect()
            })
            .collect(),
        hops: &hops,
        best: None,
    };
    let mut left: Vec<usize> = (0..open.len()).collect();
    search.search(
        &mut left,
        &mut vec![Vec::new(); units.len()],
        &mut vec![0; units.len()],
    );
    let routes = search
        .best
        .map(|(_, _, r)| r)
        .unwrap_or_else(|| vec![Vec::new(); units.len()]);
    routes
        .into_iter()
        .map(|r| r.into_iter().map(|k| open[k]).collect())
        .collect()
}

impl AgentConnector for PhantomPlanner {
    fn agent_id(&self) -> &str {
        "oracle"
    }

    fn capabilities(&self) -> Capabilities {
        privileged_caps()
    }

    fn begin_episode(&mut self, _descriptor: &EnvDescriptor, _seat: usize) {}

    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError> {
        let Privileged::Phantom(t) = truth(request)? else {
            return Err(mismatch());
        };
        let map = &t.map;
        let open: Vec<usize> = (0..map.objectives.len())
            .filter(|&i| map.objectives[i].is_open(t.round))
            .collect();
        let routes = plan_routes(map, &open);

        let mut lines = Vec::new();
        let mut capturing: Vec<Pos> = Vec::new();
        let mut exploring: Vec<Pos> = Vec::new();
        for (u, unit) in map.units.iter().enumerate() {
            let here = open.iter().find(|&&i| map.objectives[i].pos == unit.pos);
            if let Some(&i) = here.filter(|&&i| !capturing.contains(&map.objectives[i].pos)) {
                capturing.push(map.objectives[i].pos);
                lines.push(format!("ACTION: capture {}", unit.id));
                continue;
            }
            let goal = routes[u]
                .first()
                .map(|&o| map.objectives[o].pos)
                .or_else(|| {
                    nearest_unexplored(map, unit.pos, &exploring).inspect(|p| exploring.push(*p))
                });
            lines.push(match goal {
                Some(p) => format!("ACTION: move {} {} {}", unit.id, p.x, p.y),
                None => format!("ACTION: hold {}", unit.id),
            });
        }
        Ok(lines.join("\n"))
    }
}

fn nearest_unexplored(map: &phantom::TacticalMap, from: Pos, taken: &[Pos]) -> Option<Pos> {
    let mut best: Option<(u32, Pos)> = None;
    for y in 0..map.height {
        for x in 0..map.width {
            let p = Pos::new(x, y);
            if map.is_explored(p) || !map.is_passable(p) || taken.contains(&p) {
                continue;
            }
            if let Some(d) = map.path_length(from, p) {
                if best.is_none_or(|(bd, bp)| (d, p) < (bd, bp)) {
                    best = Some((d, p));
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

/// The built-in arena bot playing the agent's seat.
#[derive(Default)]
pub struct ShowdownSurvivor {
    seed: u64,
}

impl AgentConnector for ShowdownSurvivor {
    fn agent_id(&self) -> &str {
        "oracle"
    }

    fn capabilities(&self) -> Capabilities {
        privileged_caps()
    }

    fn begin_episode(&mut self, descriptor: &EnvDescriptor, _seat: usize) {
        self.seed = descriptor.seed;
    }

    fn act(&mut self, request: &AgentRequest<'_>) -> Result<String, AgentError> {
        let Privileged::Showdown(t) = truth(request)? else {
            return Err(mismatch());
        };
        let mut rng: StreamRng = keyed(
            self.seed,
            Substream::Agent.label(),
            t.arena.tick as u64 * 8 + t.seat as u64,
        );
        let action = showdown::survivor_action(&t.arena, t.seat, &mut rng);
        Ok(format!("ACTION: {}", action.as_str()))
    }
}
