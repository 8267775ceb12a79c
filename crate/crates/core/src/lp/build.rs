//! Relaxed models of the configuration problem.
//!
//! All builders use the unit-sum objective on the instance they receive: pass
//! a preference-scaled instance when λ ≠ ½.

use super::model::{LpModel, Sense};
use crate::error::{Error, Result};
use crate::model::Instance;

struct FullColumns {
    x: Vec<usize>,
    xu: Vec<usize>,
    y: Vec<usize>,
    ye: Vec<usize>,
}

/// Per-slot model. Column order: x_u_c_s, xu_u_c, y_e_c_s, ye_e_c.
fn full_model(inst: &Instance, social_scale: f64) -> (LpModel, FullColumns) {
    let (n, m, k) = (inst.n(), inst.m(), inst.k());
    let edges = inst.edges();
    let mut lp = LpModel::maximize();
    let mut cols = FullColumns { x: vec![], xu: vec![], y: vec![], ye: vec![] };
    for u in 0..n {
        for c in 0..m {
            for s in 0..k {
                cols.x.push(lp.add_var(format!("x_{u}_{c}_{s}"), 0.0, 1.0));
            }
        }
    }
    for u in 0..n {
        for c in 0..m {
            let j = lp.add_var(format!("xu_{u}_{c}"), 0.0, 1.0);
            lp.set_objective(j, inst.pref(u, c));
            cols.xu.push(j);
        }
    }
    for e in 0..edges.len() {
        for c in 0..m {
            for s in 0..k {
                cols.y.push(lp.add_var(format!("y_{e}_{c}_{s}"), 0.0, 1.0));
            }
        }
    }
    for (e, edge) in edges.iter().enumerate() {
        for c in 0..m {
            let j = lp.add_var(format!("ye_{e}_{c}"), 0.0, 1.0);
            lp.set_objective(j, social_scale * edge.weight(c));
            cols.ye.push(j);
        }
    }
    let x = |u: usize, c: usize, s: usize| cols.x[(u * m + c) * k + s];
    let y = |e: usize, c: usize, s: usize| cols.y[(e * m + c) * k + s];

    for u in 0..n {
        for c in 0..m {
            let row = (0..k).map(|s| (x(u, c, s), 1.0)).collect();
            lp.add_constraint(format!("once_{u}_{c}"), row, Sense::Le, 1.0);
        }
    }
    for u in 0..n {
        for s in 0..k {
            let row = (0..m).map(|c| (x(u, c, s), 1.0)).collect();
            lp.add_constraint(format!("slot_{u}_{s}"), row, Sense::Eq, 1.0);
        }
    }
    for u in 0..n {
        for c in 0..m {
            let mut row: Vec<_> = (0..k).map(|s| (x(u, c, s), -1.0)).collect();
            row.push((cols.xu[u * m + c], 1.0));
            lp.add_constraint(format!("shown_{u}_{c}"), row, Sense::Eq, 0.0);
        }
    }
    for e in 0..edges.len() {
        for c in 0..m {
            let mut row: Vec<_> = (0..k).map(|s| (y(e, c, s), -1.0)).collect();
            row.push((cols.ye[e * m + c], 1.0));
            lp.add_constraint(format!("codisp_{e}_{c}"), row, Sense::Eq, 0.0);
        }
    }
    for (e, edge) in edges.iter().enumerate() {
        for c in 0..m {
            for s in 0..k {
                let yj = y(e, c, s);
                lp.add_constraint(format!("yu_{e}_{c}_{s}"), vec![(yj, 1.0), (x(edge.u, c, s), -1.0)], Sense::Le, 0.0);
                lp.add_constraint(format!("yv_{e}_{c}_{s}"), vec![(yj, 1.0), (x(edge.v, c, s), -1.0)], Sense::Le, 0.0);
            }
        }
    }
    (lp, cols)
}

/// The per-slot relaxation with O((n + |E|)·m·k) columns.
pub fn build_full_lp(inst: &Instance) -> LpModel {
    full_model(inst, 1.0).0
}

/// The slot-free relaxation: xu_u_c ∈ [0,1], Σ_c xu = k, ye ≤ xu on both endpoints.
/// Column order: xu_u_c then ye_e_c.
pub fn build_simplified_lp(inst: &Instance) -> LpModel {
    let (n, m, k) = (inst.n(), inst.m(), inst.k());
    let mut lp = LpModel::maximize();
    for u in 0..n {
        for c in 0..m {
            let j = lp.add_var(format!("xu_{u}_{c}"), 0.0, 1.0);
            lp.set_objective(j, inst.pref(u, c));
        }
    }
    for (e, edge) in inst.edges().iter().enumerate() {
        for c in 0..m {
            let j = lp.add_var(format!("ye_{e}_{c}"), 0.0, 1.0);
            lp.set_objective(j, edge.weight(c));
        }
    }
    for u in 0..n {
        let row = (0..m).map(|c| (u * m + c, 1.0)).collect();
        lp.add_constraint(format!("count_{u}"), row, Sense::Eq, k as f64);
    }
    let base = n * m;
    for (e, edge) in inst.edges().iter().enumerate() {
        for c in 0..m {
            let yj = base + e * m + c;
            lp.add_constraint(format!("yu_{e}_{c}"), vec![(yj, 1.0), (edge.u * m + c, -1.0)], Sense::Le, 0.0);
            lp.add_constraint(format!("yv_{e}_{c}"), vec![(yj, 1.0), (edge.v * m + c, -1.0)], Sense::Le, 0.0);
        }
    }
    lp
}

/// Per-slot relaxation of the teleportation variant.
///
/// Adds z_e_c (both endpoints see c at some slot); direct co-display earns
/// (1 − d)·w through ye and indirect d·w through z. Every (c, s) also gets the
/// size cut Σ_u x_u_c_s ≤ M, which removes no integral configuration.
pub fn build_st_lp(inst: &Instance) -> Result<LpModel> {
    let st = inst.st().ok_or(Error::MissingSt)?;
    let d = st.d_tel;
    let (n, m, k) = (inst.n(), inst.m(), inst.k());
    let (mut lp, cols) = full_model(inst, 1.0 - d);
    for (e, edge) in inst.edges().iter().enumerate() {
        for c in 0..m {
            let z = lp.add_var(format!("z_{e}_{c}"), 0.0, 1.0);
            lp.set_objective(z, d * edge.weight(c));
            lp.add_constraint(format!("zu_{e}_{c}"), vec![(z, 1.0), (cols.xu[edge.u * m + c], -1.0)], Sense::Le, 0.0);
            lp.add_constraint(format!("zv_{e}_{c}"), vec![(z, 1.0), (cols.xu[edge.v * m + c], -1.0)], Sense::Le, 0.0);
        }
    }
    for c in 0..m {
        for s in 0..k {
            let row = (0..n).map(|u| (cols.x[(u * m + c) * k + s], 1.0)).collect();
            lp.add_constraint(format!("size_{c}_{s}"), row, Sense::Le, st.max_size as f64);
        }
    }
    Ok(lp)
}
