//! The five environments.

pub mod echoes;
pub mod grid;
pub mod melody;
pub mod pathfinding;
pub mod phantom;
pub mod showdown;
