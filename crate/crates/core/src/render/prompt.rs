//! Versioned prompt templates and placeholder assembly.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::{Captures, Regex};

use crate::engine::GameId;
use crate::error::{Error, Result};

pub const TEMPLATE_VERSION: u32 = 1;

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{([a-z_]+)\}").expect("placeholder pattern"));

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PromptTemplate {
    pub game_id: GameId,
    pub name: &'static str,
    pub version: u32,
    pub system_text: &'static str,
    pub turn_skeleton: &'static str,
    /// Closing instruction; survives text ablation.
    pub action_request: &'static str,
}

impl PromptTemplate {
    pub fn placeholders(&self) -> BTreeSet<String> {
        placeholders(self.turn_skeleton)
    }

    pub fn turn(&self, fields: &[(&str, &str)]) -> Result<String> {
        assemble_prompt(self.turn_skeleton, fields)
    }
}

pub fn placeholders(skeleton: &str) -> BTreeSet<String> {
    PLACEHOLDER
        .captures_iter(skeleton)
        .map(|c| c[1].to_string())
        .collect()
}

/// Substitutes every `{name}` in `skeleton`. Values are inserted verbatim and
/// never re-scanned.
pub fn assemble_prompt(skeleton: &str, fields: &[(&str, &str)]) -> Result<String> {
    for name in placeholders(skeleton) {
        if !fields.iter().any(|(k, _)| *k == name) {
            return Err(Error::MissingPlaceholder(name));
        }
    }
    Ok(PLACEHOLDER
        .replace_all(skeleton, |c: &Captures| {
            let key = &c[1];
            fields
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| v.to_string())
                .unwrap_or_default()
        })
        .into_owned())
}

pub const SUBSTITUTION_HEADER: &str = "[AUDIO GUIDANCE (TEXT)]";
pub const AIDED_PROGRESS_HEADER: &str = "[PROGRESS]";
pub const AIDED_MAPPING_HEADER: &str = "[LEARNED MAPPING]";

pub const PATHFINDING: PromptTemplate = PromptTemplate {
    game_id: GameId::Pathfinding,
    name: "turn",
    version: TEMPLATE_VERSION,
    system_text: "You are an explorer inside a three-dimensional maze, seen in first person. \
Each turn you receive a view of the corridor ahead, spoken guidance from a companion who knows \
the way, and a text report of your position and heading. Reach the target location in as few \
steps as possible.

Coordinates: x grows to the east, y grows to the south. A heading of 0 degrees faces north and \
headings increase clockwise, so 90 is east.

Each step you first rotate in place by an angle between -180 and 180 degrees (negative turns \
left, positive turns right), then walk forward between 0 and 1 cell. Walls stop you.

Finish every reply with exactly one line of the form:
ACTION: rotate <degrees> move <cells>",
    turn_skeleton: "Step {step}.

Current state:
{state_description}

Use the view, the spoken guidance and the state above to choose your next move.",
    action_request:
        "Reply with one line: ACTION: rotate <degrees from -180 to 180> move <cells from 0 to 1>",
};

pub const ECHOES_SYSTEM: &str = "You are playing a memory game on a grid of icons. Rows and \
columns are numbered from 0, starting at the top-left cell.

Phase 1: a video shows the grid while cells light up one at a time, each with its own tone. \
Write down the full sequence of highlighted cells in order, naming each cell's row, column and icon.

Phase 2: the sequence is given to you as text. Reproduce it by clicking the cells in order, one \
click per turn. A wrong click ends the game.

Icons: circle, square, triangle, diamond, star, plus, ring, cross, stripes, bars, hourglass, \
checker, dots, moon, frame, arrow.";

pub const ECHOES_TRANSCRIBE: PromptTemplate = PromptTemplate {
    game_id: GameId::Echoes,
    name: "transcribe",
    version: TEMPLATE_VERSION,
    system_text: ECHOES_SYSTEM,
    turn_skeleton: "Phase {phase_label}: transcription.
The grid has {rows} rows and {cols} columns.
Watch the highlighted cells and listen to the tones, then report all {length} highlights in order.",
    action_request: "Reply with one line: ACTION: sequence (row,col,icon) (row,col,icon) ...",
};

pub const ECHOES_EXECUTE: PromptTemplate = PromptTemplate {
    game_id: GameId::Echoes,
    name: "execute",
    version: TEMPLATE_VERSION,
    system_text: ECHOES_SYSTEM,
    turn_skeleton: "Phase 2 of 2: execution.
Click the cells in this exact order:
{sequence_text}

{feedback}",
    action_request: "Reply with one line: ACTION: click <row> <col>",
};

pub const MELODY: PromptTemplate = PromptTemplate {
    game_id: GameId::Melody,
    name: "turn",
    version: TEMPLATE_VERSION,
    system_text: "You are an alchemist standing before seven colored crystal blocks: red, orange, \
yellow, green, blue, purple and pink. Each color secretly produces one note of the C major \
scale, and the assignment changes every game. Clicking a block plays its note.

Your goal is to play the ascending scale C4 D4 E4 F4 G4 A4 B4 in order. A note that is not the \
next one required resets your progress to the start. Learn the mapping by listening and by \
reading the feedback, then play the scale with as few clicks as possible.

Finish every reply with exactly one line of the form:
ACTION: click <color>",
    turn_skeleton: "Target melody: C4 D4 E4 F4 G4 A4 B4

{state_dump}",
    action_request: "Reply with one line: ACTION: click <color> (red, orange, yellow, green, blue, purple or pink)",
};

pub const PHANTOM: PromptTemplate = PromptTemplate {
    game_id: GameId::Phantom,
    name: "turn",
    version: TEMPLATE_VERSION,
    system_text: "You are the commander of a small squad operating under fog of war. The map is a \
grid seen from above; x grows to the east and y grows to the south, both starting at 0. You only \
see terrain and objectives within the vision radius of your units. Some objectives start hidden \
and appear once a unit sees them.

Each round you may give one command to every unit:
- move <unit> <x> <y>: walk toward the cell, up to the unit's speed, around obstacles.
- scout <unit>: stay in place and extend vision by 2 this round.
- capture <unit>: complete the visible objective the unit is standing on.
- hold <unit>: stay in place.

Unit types: infantry (speed 2, vision 2) and scouts (speed 3, vision 4). Completing objectives \
earns their points. Finishing all objectives in fewer rounds earns a bonus, and rounds in which \
every command is valid count toward an efficiency bonus. The mission ends when every objective \
is complete or the round limit is reached.

Give one command per line, each starting with ACTION:",
    turn_skeleton: "ROUND {round} of {max_rounds}

{situation}",
    action_request: "Reply with one line per unit:
ACTION: move <unit> <x> <y> | ACTION: scout <unit> | ACTION: capture <unit> | ACTION: hold <unit>
Units without a command hold position.",
};

pub const SHOWDOWN_SYSTEM: &str = "You are one of four bombers in a walled arena. The arena is \
a 13 by 13 grid; x grows to the east and y grows to the south. Solid pillars never break, crates \
break when caught in a blast. Each turn you may move one cell up, down, left or right, drop a bomb \
on your cell, or wait. A bomb explodes 8 ticks after it is placed and the blast reaches its range \
in the four straight directions, stopping at pillars and at the first crate. Blasts set off other \
bombs. Anyone caught in a blast is eliminated. Picking up a power-up extends your blast range. \
The last bomber standing wins. Listen for the sounds of bombs being placed and exploding.

Finish every reply with exactly one line of the form:
ACTION: <up|down|left|right|bomb|wait>";

pub const SHOWDOWN_ACTIVE: PromptTemplate = PromptTemplate {
    game_id: GameId::Showdown,
    name: "active",
    version: TEMPLATE_VERSION,
    system_text: SHOWDOWN_SYSTEM,
    turn_skeleton: "You are Player {seat} ({color}). Tick {tick} of {max_ticks}.

{situation}",
    action_request: "Reply with one line: ACTION: <up|down|left|right|bomb|wait>",
};

pub const SHOWDOWN_OBSERVER: PromptTemplate = PromptTemplate {
    game_id: GameId::Showdown,
    name: "observer",
    version: TEMPLATE_VERSION,
    system_text: SHOWDOWN_SYSTEM,
    turn_skeleton:
        "You have been eliminated and are watching the rest of the match as Player {seat} \
({color}). Tick {tick} of {max_ticks}.

{situation}",
    action_request: "No action is needed. Reply with: ACTION: wait",
};

pub const ALL: [&PromptTemplate; 7] = [
    &PATHFINDING,
    &ECHOES_TRANSCRIBE,
    &ECHOES_EXECUTE,
    &MELODY,
    &PHANTOM,
    &SHOWDOWN_ACTIVE,
    &SHOWDOWN_OBSERVER,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_and_missing() {
        let out = assemble_prompt("a {x} b {y} {x}", &[("x", "1"), ("y", "{x}")]).unwrap();
        assert_eq!(out, "a 1 b {x} 1");
        let err = assemble_prompt("{missing}", &[]).unwrap_err();
        assert!(matches!(err, Error::MissingPlaceholder(n) if n == "missing"));
    }

    #[test]
    fn templates_have_no_system_placeholders() {
        for t in ALL {
            assert!(placeholders(t.system_text).is_empty(), "{}", t.name);
            assert!(placeholders(t.action_request).is_empty(), "{}", t.name);
            assert!(!t.placeholders().is_empty());
        }
    }

    #[test]
    fn pathfinding_dump_is_verbatim() {
        let dump = "Position: x=1.5, y=2.5\nHeading: 90";
        let out = PATHFINDING
            .turn(&[("step", "3"), ("state_description", dump)])
            .unwrap();
        assert!(out.contains(dump));
    }
}
