//! Canned sweeps reproducing the published figures.
//!
//! Each figure is a list of named panels; every panel is an ordinary
//! [`SweepSpec`] and can be run, saved or convergence-checked on its own.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::ModelKind;
use crate::sweep::{Axis, Link, SweepSpec};

pub const KERR_CUTOFF: usize = 4;
pub const JC_CUTOFF: usize = 3;
pub const FIGURES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

#[derive(Debug, Clone, Serialize)]
pub struct Panel {
    pub name: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureRecipe {
    pub name: String,
    pub panels: Vec<Panel>,
}

impl FigureRecipe {
    pub fn panel(&self, name: &str) -> Option<&SweepSpec> {
        self.panels.iter().find(|p| p.name == name).map(|p| &p.spec)
    }
}

fn kerr() -> SweepSpec {
    SweepSpec::new(ModelKind::Kerr)
        .cutoff(KERR_CUTOFF)
        .param("delta1", 0.0)
        .param("u", 20.0)
        .param("delta", 40.0)
        .param("eps", 0.1)
        .param("kappa", 1.0)
        .param("phi", PI)
}

fn jc() -> SweepSpec {
    SweepSpec::new(ModelKind::Jc)
        .cutoff(JC_CUTOFF)
        .param("g", 20.0)
        .param("delta1", -20.0)
        .param("delta_a", -20.0)
        .param("delta2", -40.0 / 3.0)
        .param("eps", 0.1)
        .param("kappa", 1.0)
        .param("kappa_a", 2.0)
        .param("phi", PI)
}

fn panel(name: &str, spec: SweepSpec) -> Panel {
    Panel { name: name.into(), spec }
}

pub fn figure_recipe(name: &str) -> Result<FigureRecipe> {
    let panels = match name {
        "fig1" => vec![panel("bc", kerr().axis(Axis::linear("delta1", -10.0, 10.0, 201)))],
        "fig2" => vec![
            panel(
                "a",
                kerr().axis(Axis::linear("phi", 0.0, TAU, 101)).axis(Axis::linear("delta", -80.0, 80.0, 161)),
            ),
            panel("b", kerr().axis(Axis::linear("phi", 0.0, TAU, 201))),
            panel("cd", kerr().axis(Axis::linear("delta", -80.0, 80.0, 321))),
        ],
        "fig3" => vec![panel(
            "main",
            kerr().axis(Axis::log("u", 10.0, 100.0, 10)).link(Link::new("delta", "u", 2.0)),
        )],
        "fig4" => vec![
            panel(
                "b",
                jc().axis(Axis::linear("phi", 0.0, TAU, 101)).axis(Axis::linear("delta2", -40.0, 20.0, 121)),
            ),
            panel("c", jc().axis(Axis::linear("phi", 0.0, TAU, 201))),
            panel("d", jc().axis(Axis::linear("delta2", -40.0, 20.0, 241))),
            panel(
                "e",
                jc().axis(Axis::log("g", 10.0, 100.0, 10))
                    .link(Link::new("delta1", "g", -1.0))
                    .link(Link::new("delta_a", "g", -1.0))
                    .link(Link::new("delta2", "g", -2.0 / 3.0)),
            ),
        ],
        other => return Err(invalid(format!("unknown figure {other:?}, expected one of {FIGURES:?}"))),
    };
    Ok(FigureRecipe { name: name.into(), panels })
}

/// Log-spaced strength scan along the optimal line of `kind`.
pub fn scaling_sweep(kind: ModelKind, min: f64, max: f64, points: usize) -> Result<SweepSpec> {
    if !(min > 0.0 && max > min) || points < 2 {
        return Err(invalid(format!("need 0 < min < max and points >= 2, got {min}, {max}, {points}")));
    }
    Ok(match kind {
        ModelKind::Kerr => kerr().axis(Axis::log("u", min, max, points)).link(Link::new("delta", "u", 2.0)),
        ModelKind::Jc => jc()
            .axis(Axis::log("g", min, max, points))
            .link(Link::new("delta1", "g", -1.0))
            .link(Link::new("delta_a", "g", -1.0))
            .link(Link::new("delta2", "g", -2.0 / 3.0)),
    })
}
