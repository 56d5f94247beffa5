//! The loop model embedded at the collocated (degenerate) layout and at a
//! layout where every intervention strictly precedes its readout.

use serde::{Deserialize, Serialize};

use super::mechanisms::{build_model, Model};
use super::CaseStudyError;
use crate::boxes::CorrelationBox;
use crate::causal_geometry::{operationally_separated, Event, SeparationVerdict};
use crate::layouts::{Layout, Preset};
use crate::ons::{check_ons, enumerate_constraints, ViolationReport};
use crate::protocol::{build_protocol, SignallingProtocol};
use crate::rational::{int, rat};

fn events3(v: Vec<Event>) -> [Event; 3] {
    v.try_into().expect("three events")
}

/// The loop model's box at a layout.
pub fn loop_model_at(layout: &Layout) -> Result<CorrelationBox, CaseStudyError> {
    Ok(build_model(
        Model::Loop,
        layout.backend.clone(),
        &events3(layout.input_events()),
        &events3(layout.output_events()),
    )?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateReport {
    pub violations: Vec<ViolationReport>,
    /// `P(b = 0 | idle, idle, idle) = 1/2` against `P(b = 0 | idle, do(0),
    /// idle) = 1` with the gathering point `Q = p_2`.
    pub headline: ViolationReport,
    pub protocol: SignallingProtocol,
    /// `(q_1, q_3)` against `p_2`: separated, gathered at `p_2`.
    pub ac_from_ib: SeparationVerdict,
    /// `B`'s readout point against `(p_1, p_3)`: not separated, since both
    /// reach `q_2` along light rays.
    pub b_from_iac: SeparationVerdict,
}

fn pick_headline(violations: &[ViolationReport]) -> Option<&ViolationReport> {
    let half = rat(1, 2);
    let one = int(1);
    violations
        .iter()
        .find(|v| v.instance.g == [1] && v.a == [0] && ((v.p1 == half && v.p2 == one) || (v.p1 == one && v.p2 == half)))
        .or_else(|| violations.first())
}

/// Runs every constraint of the collocated layout (`p_i = q_i`, with `q_2`
/// the apex of the common future of `q_1, q_3`) against the loop model.
pub fn degenerate_embedding_check() -> Result<DegenerateReport, CaseStudyError> {
    let layout = Preset::DegenerateLoop.layout();
    let b = loop_model_at(&layout)?;
    let violations = check_ons(&b)?;
    let headline = pick_headline(&violations)
        .cloned()
        .ok_or_else(|| CaseStudyError::Unexpected("the collocated layout produced no violation".into()))?;
    let protocol = build_protocol(&b, &headline)?;
    let q = layout.output_events();
    let p = layout.input_events();
    let ac_from_ib = operationally_separated(&layout.backend, &[q[0].clone(), q[2].clone()], &[p[1].clone()])?;
    let b_from_iac = operationally_separated(&layout.backend, &[q[1].clone()], &[p[0].clone(), p[2].clone()])?;
    Ok(DegenerateReport {
        violations,
        headline,
        protocol,
        ac_from_ib,
        b_from_iac,
    })
}

/// One of the two influences the loop model exhibits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermittedInfluence {
    pub interventions: Vec<String>,
    pub outputs: Vec<String>,
    /// Whether any generated constraint forbids it.
    pub constrained: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafeReport {
    pub layout: String,
    pub instances: usize,
    pub violations: Vec<ViolationReport>,
    pub permitted: Vec<PermittedInfluence>,
}

impl SafeReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty() && self.permitted.iter().all(|p| !p.constrained)
    }
}

fn check_relations(b: &CorrelationBox) -> Result<(), CaseStudyError> {
    let backend = b.backend();
    let p = b.input_locations();
    let q = b.output_locations();
    let mismatch = |d: &str| Err(CaseStudyError::LayoutMismatch(d.to_string()));
    for i in 0..3 {
        if !backend.precedes(&p[i], &q[i])? {
            return mismatch(&format!("p_{} must strictly precede q_{}", i + 1, i + 1));
        }
    }
    if !backend.precedes(&p[0], &q[1])? || !backend.precedes(&p[2], &q[1])? {
        return mismatch("q_2 must lie in the future of both p_1 and p_3");
    }
    let v = operationally_separated(backend, &[q[0].clone(), q[2].clone()], &[p[1].clone()])?;
    if !v.is_not_separated() {
        return mismatch("(q_1, q_3) must not be operationally separated from p_2");
    }
    Ok(())
}

/// Relocates the loop model's table to `layout` (the displayed default is
/// [`Preset::Fig5`]) and checks it against every generated constraint.
pub fn safe_embedding_check(layout: &Layout) -> Result<SafeReport, CaseStudyError> {
    let degenerate = loop_model_at(&Preset::DegenerateLoop.layout())?;
    let b = degenerate.relocated(layout.backend.clone(), &layout.input_events(), &layout.output_events())?;
    check_relations(&b)?;
    let instances = enumerate_constraints(&b)?;
    let violations = check_ons(&b)?;
    let influence = |f: Vec<usize>, g: Vec<usize>| PermittedInfluence {
        interventions: f.iter().map(|&i| b.inputs()[i].name.clone()).collect(),
        outputs: g.iter().map(|&j| b.outputs()[j].name.clone()).collect(),
        constrained: instances.iter().any(|c| c.g == g && f.iter().all(|i| c.f.contains(i))),
    };
    Ok(SafeReport {
        layout: layout.name.to_string(),
        instances: instances.len(),
        permitted: vec![influence(vec![0, 2], vec![1]), influence(vec![1], vec![0, 2])],
        violations,
    })
}
