//! Deterministic 2D multi-robot navigation workbench.
//!
//! The crate combines a reactive bug-style planner with a learned turn
//! optimizer. A robot navigates toward its goal using only a local lidar
//! field of view; whenever an obstacle blocks the frontal safe cone (a
//! *key point*), a graph-attention network fuses the robot's own local map
//! with maps shared by nearby teammates and recommends turning left or
//! right. The network is trained by imitation on labels extracted from
//! globally optimal grid paths.
//!
//! # Layout
//!
//! - [`world`]: procedural obstacle maps, occupancy grids, raycasting and
//!   the global shortest-path oracle
//! - [`sensing`]: simulated lidar, goal-aligned local maps, communication
//!   graphs and the positional grid encoding
//! - [`planner`]: safe-zone geometry, the mode state machine, priority
//!   collision avoidance and episode simulation
//! - [`nn`]: a minimal deterministic tensor/layer substrate with
//!   hand-written backward passes
//! - [`giwt`]: the graph-attention-with-information-gain network and its
//!   CNN-only baseline, plus training
//! - [`dataset`]: expert sample generation, labeling, filtering and the
//!   binary dataset format
//! - [`eval`]: episode-level metrics (accuracy, path length, success
//!   rate, flowtime), CSV/SVG export
//! - [`config`]: the `key = value` configuration file shared by the CLI
//!
//! Everything is seedable and single-run deterministic: identical seeds
//! produce byte-identical maps, datasets, checkpoints and metrics.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod eval;
pub mod giwt;
pub mod nn;
pub mod planner;
pub mod sensing;
pub mod world;

