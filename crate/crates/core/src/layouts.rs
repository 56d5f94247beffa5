//! Preset spacetime layouts used by the case studies, demos and CLI.

use serde::{Deserialize, Serialize};

use crate::boxes::{Alphabet, Srv};
use crate::causal_geometry::{Backend, Event, TerminatedDiagram};
use crate::rational::{int, rat};
use crate::Rational;

/// Named input and output locations in a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub name: &'static str,
    pub backend: Backend,
    pub inputs: Vec<(String, Event)>,
    pub outputs: Vec<(String, Event)>,
}

impl Layout {
    pub fn input_events(&self) -> Vec<Event> {
        self.inputs.iter().map(|(_, e)| e.clone()).collect()
    }

    pub fn output_events(&self) -> Vec<Event> {
        self.outputs.iter().map(|(_, e)| e.clone()).collect()
    }

    /// Binary variables at the input locations.
    pub fn binary_inputs(&self) -> Vec<Srv> {
        binary(&self.inputs)
    }

    /// Binary variables at the output locations.
    pub fn binary_outputs(&self) -> Vec<Srv> {
        binary(&self.outputs)
    }
}

fn binary(v: &[(String, Event)]) -> Vec<Srv> {
    v.iter()
        .map(|(n, e)| Srv::new(n.clone(), Alphabet::binary(), e.clone()))
        .collect()
}

/// Preset identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    BellStandard,
    JammingTriangle,
    FourParty,
    Compass,
    SixConfig,
    DegenerateLoop,
    Fig5,
    BlackHole,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::BellStandard,
        Preset::JammingTriangle,
        Preset::FourParty,
        Preset::Compass,
        Preset::SixConfig,
        Preset::DegenerateLoop,
        Preset::Fig5,
        Preset::BlackHole,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::BellStandard => "bell_standard",
            Preset::JammingTriangle => "jamming_triangle",
            Preset::FourParty => "four_party",
            Preset::Compass => "compass",
            Preset::SixConfig => "six_config",
            Preset::DegenerateLoop => "degenerate_loop",
            Preset::Fig5 => "fig5",
            Preset::BlackHole => "black_hole",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim_end_matches(".json").replace('-', "_");
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn layout(&self) -> Layout {
        match self {
            Preset::BellStandard => one_plus_one(
                "bell_standard",
                &[("X", 0, -10), ("Y", 0, 10)],
                &[("A", 1, -10), ("B", 1, 10)],
            ),
            Preset::JammingTriangle => one_plus_one("jamming_triangle", &[("X", 0, 0)], &[("A1", 1, -2), ("A2", 1, 2)]),
            Preset::FourParty => one_plus_one(
                "four_party",
                &[("X1", 0, 0), ("X2", 0, 10), ("X3", 0, 20), ("X4", 0, 30)],
                &[("A1", 1, 0), ("A2", 1, 10), ("A3", 1, 20), ("A4", 1, 30)],
            ),
            Preset::Compass => one_plus_one(
                "compass",
                &[("X", 0, -2), ("Xm", 0, -2), ("Y", 0, 2), ("Ym", 0, 2)],
                &[("A", 0, -4), ("B", 0, 0), ("C", 0, 4)],
            ),
            Preset::SixConfig => {
                let p = |t: i64, x: Rational, y: Rational| Event::point(int(t), vec![x, y]);
                Layout {
                    name: "six_config",
                    backend: Backend::minkowski(2),
                    inputs: vec![
                        ("X".into(), p(-1, int(2), rat(7, 2))),
                        ("Y".into(), p(-1, int(-2), rat(7, 2))),
                        ("Z".into(), p(-1, int(0), int(0))),
                    ],
                    outputs: vec![
                        ("A".into(), p(0, int(-4), int(0))),
                        ("B".into(), p(0, int(4), int(0))),
                        ("C".into(), p(0, int(0), int(7))),
                    ],
                }
            }
            Preset::DegenerateLoop => one_plus_one(
                "degenerate_loop",
                &[("I_A", 0, -1), ("I_B", 1, 0), ("I_C", 0, 1)],
                &[("A", 0, -1), ("B", 1, 0), ("C", 0, 1)],
            ),
            Preset::Fig5 => one_plus_one(
                "fig5",
                &[("I_A", 0, -2), ("I_B", 0, 0), ("I_C", 0, 2)],
                &[("A", 1, -2), ("B", 3, 0), ("C", 1, 2)],
            ),
            Preset::BlackHole => {
                let diagram = TerminatedDiagram::new(vec![(int(-10), int(1)), (int(0), rat(3, 2)), (int(10), int(1))])
                    .expect("valid singularity polyline");
                let mut l = one_plus_one("black_hole", &[], &[("A", 0, -3), ("B", 0, -2), ("C", 0, 3)]);
                l.backend = Backend::Terminated(diagram);
                l
            }
        }
    }
}

fn one_plus_one(name: &'static str, inputs: &[(&str, i64, i64)], outputs: &[(&str, i64, i64)]) -> Layout {
    let conv = |v: &[(&str, i64, i64)]| {
        v.iter()
            .map(|(n, t, x)| (n.to_string(), Event::point(int(*t), vec![int(*x)])))
            .collect()
    };
    Layout {
        name,
        backend: Backend::minkowski(1),
        inputs: conv(inputs),
        outputs: conv(outputs),
    }
}
