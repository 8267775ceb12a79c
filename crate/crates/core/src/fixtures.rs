//! The four-user photography-store example used throughout the tests, docs and CLI demos.
//!
//! Users are Alice, Bob, Charlie and Dave (0..4). Items are the tripod, DSLR
//! camera, portable storage device, memory card and self-portrait camera
//! (0..5). There are three display slots and λ = ½.

use crate::lp::FractionalSolution;
use crate::model::{Configuration, Edge, Instance};
use crate::rounding::FocalParams;

pub const ALICE: usize = 0;
pub const BOB: usize = 1;
pub const CHARLIE: usize = 2;
pub const DAVE: usize = 3;

pub const USER_NAMES: [&str; 4] = ["Alice", "Bob", "Charlie", "Dave"];
pub const ITEM_NAMES: [&str; 5] = ["tripod", "DSLR camera", "PSD", "memory card", "SP camera"];

/// Preference p(u, c); rows are users.
const PREF: [[f64; 5]; 4] = [
    [0.8, 0.85, 0.1, 0.05, 1.0],
    [0.7, 1.0, 0.15, 0.2, 0.1],
    [0.0, 0.15, 0.7, 0.6, 0.1],
    [0.1, 0.0, 0.3, 1.0, 0.95],
];

// Directed social utilities per item (c1..c5).
const TAU_AB: [f64; 5] = [0.2, 0.05, 0.1, 0.0, 0.05];
const TAU_BA: [f64; 5] = [0.2, 0.05, 0.1, 0.05, 0.05];
const TAU_AC: [f64; 5] = [0.0, 0.05, 0.1, 0.0, 0.3];
const TAU_CA: [f64; 5] = [0.0, 0.05, 0.1, 0.05, 0.3];
const TAU_AD: [f64; 5] = [0.2, 0.05, 0.1, 0.05, 0.2];
const TAU_DA: [f64; 5] = [0.3, 0.05, 0.05, 0.0, 0.25];
const TAU_BC: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.0];
const TAU_CB: [f64; 5] = [0.1, 0.05, 0.1, 0.2, 0.05];

pub fn running_example() -> Instance {
    let edge = |u, v, a: [f64; 5], b: [f64; 5]| Edge { u, v, tau_uv: a.to_vec(), tau_vu: b.to_vec() };
    let edges = vec![
        edge(ALICE, BOB, TAU_AB, TAU_BA),
        edge(ALICE, CHARLIE, TAU_AC, TAU_CA),
        edge(ALICE, DAVE, TAU_AD, TAU_DA),
        edge(BOB, CHARLIE, TAU_BC, TAU_CB),
    ];
    Instance::new(4, 5, 3, 0.5, PREF.iter().map(|r| r.to_vec()).collect(), edges)
        .expect("fixture instance is valid")
}

/// The optimal fractional solution, identical at every slot: each user spreads
/// 1/3 over three items.
pub fn running_example_fractional() -> FractionalSolution {
    const T: f64 = 1.0 / 3.0;
    let per_slot = [
        [T, T, 0.0, 0.0, T],
        [T, T, 0.0, T, 0.0],
        [0.0, 0.0, T, T, T],
        [T, 0.0, 0.0, T, T],
    ];
    let nested = per_slot
        .iter()
        .map(|row| row.iter().map(|&x| vec![x; 3]).collect())
        .collect();
    FractionalSolution::from_nested(nested).expect("fixture tensor is valid")
}

/// The seven effective focal parameter draws of the randomized walkthrough
/// (zero-based item and slot indices).
pub fn printed_replay_sequence() -> Vec<FocalParams> {
    [(0, 2, 0.06), (3, 1, 0.22), (2, 0, 0.04), (4, 2, 0.2), (4, 0, 0.31), (1, 0, 0.01), (1, 1, 0.19)]
        .into_iter()
        .map(|(c, s, alpha)| FocalParams { c, s, alpha })
        .collect()
}

fn config(inst: &Instance, one_based: [[usize; 3]; 4]) -> Configuration {
    let rows = one_based.iter().map(|r| r.iter().map(|c| c - 1).collect()).collect();
    Configuration::new(rows, inst).expect("fixture configuration is feasible")
}

/// The optimal configuration drawn in the illustrative figure (unit-sum 10.35).
pub fn figure_savg_configuration(inst: &Instance) -> Configuration {
    config(inst, [[5, 1, 2], [2, 1, 4], [5, 3, 4], [5, 1, 4]])
}

/// Configuration produced by the randomized walkthrough (unit-sum 9.75).
pub fn avg_table_configuration(inst: &Instance) -> Configuration {
    config(inst, [[5, 2, 1], [2, 4, 1], [3, 4, 5], [5, 4, 1]])
}

/// Configuration printed for the deterministic variant (unit-sum 9.85).
pub fn avgd_table_configuration(inst: &Instance) -> Configuration {
    config(inst, [[5, 1, 2], [5, 1, 2], [5, 3, 2], [5, 1, 4]])
}

pub fn personalized_configuration(inst: &Instance) -> Configuration {
    config(inst, [[5, 2, 1], [2, 1, 4], [3, 4, 2], [4, 5, 3]])
}

pub fn group_configuration(inst: &Instance) -> Configuration {
    config(inst, [[5, 1, 2]; 4])
}

pub fn friendship_subgroup_configuration(inst: &Instance) -> Configuration {
    config(inst, [[5, 1, 4], [2, 4, 3], [2, 4, 3], [5, 1, 4]])
}

pub fn preference_subgroup_configuration(inst: &Instance) -> Configuration {
    config(inst, [[2, 1, 5], [2, 1, 5], [4, 5, 3], [4, 5, 3]])
}

/// {Alice, Dave}, {Bob, Charlie}
pub fn friendship_partition() -> Vec<Vec<usize>> {
    vec![vec![ALICE, DAVE], vec![BOB, CHARLIE]]
}

/// {Alice, Bob}, {Charlie, Dave}
pub fn preference_partition() -> Vec<Vec<usize>> {
    vec![vec![ALICE, BOB], vec![CHARLIE, DAVE]]
}
