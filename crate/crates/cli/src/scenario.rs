//! Scenario ingestion: preset names, `njam(n, h)` and JSON scenario files.

use std::collections::BTreeMap;
use std::path::Path;

use causalbox::boxes::{
    backend_from_json, backend_to_json, box_from_json, canonical_box, loop_box, pr_box, srv_from_spec, srv_spec,
    BackendSpec, BoxFile, CanonicalBox, CorrelationBox, Srv, SrvSpec,
};
use causalbox::case_studies::loop_model_at;
use causalbox::causal_geometry::{Backend, Event};
use causalbox::layouts::{Layout, Preset};
use causalbox::monogamy::template_box;
use causalbox::rational::{parse_rational, rat};
use causalbox::Rational;
use serde::Deserialize;

use crate::CliError;

/// The on-disk scenario format. Every field is optional: a `preset`
/// supplies the backend and variables, explicit fields describe them
/// directly, and either `table` or `canonical` supplies the box.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub backend: Option<BackendSpec>,
    #[serde(default)]
    pub inputs: Option<Vec<SrvSpec>>,
    #[serde(default)]
    pub outputs: Option<Vec<SrvSpec>>,
    #[serde(default)]
    pub pairing: Vec<(usize, usize)>,
    #[serde(default)]
    pub table: Option<BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(default)]
    pub canonical: Option<String>,
}

/// A parsed preset reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PresetRef {
    Layout(Preset),
    NJam { n: usize, h: Rational },
}

impl PresetRef {
    pub fn parse(s: &str) -> Option<PresetRef> {
        let s = s.trim();
        let s = s.strip_suffix(".json").unwrap_or(s);
        if let Some(args) = s.strip_prefix("njam(").and_then(|r| r.strip_suffix(')')) {
            let (n, h) = args.split_once(',')?;
            let n = n.trim().parse().ok()?;
            let h = parse_rational(h.trim()).ok()?;
            return Some(PresetRef::NJam { n, h });
        }
        Preset::parse(s).map(PresetRef::Layout)
    }
}

/// A resolved scenario: geometry, variables and (optionally) a box.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub backend: Option<Backend>,
    pub inputs: Vec<Srv>,
    pub outputs: Vec<Srv>,
    pub correlation_box: Option<CorrelationBox>,
    pub njam: Option<(usize, Rational)>,
}

impl Scenario {
    fn empty() -> Self {
        Scenario {
            name: "empty".into(),
            backend: None,
            inputs: vec![],
            outputs: vec![],
            correlation_box: None,
            njam: None,
        }
    }

    fn from_layout(layout: &Layout, b: Option<CorrelationBox>) -> Self {
        let (inputs, outputs) = match &b {
            Some(b) => (b.inputs().to_vec(), b.outputs().to_vec()),
            None => (layout.binary_inputs(), layout.binary_outputs()),
        };
        Scenario {
            name: layout.name.to_string(),
            backend: Some(layout.backend.clone()),
            inputs,
            outputs,
            correlation_box: b,
            njam: None,
        }
    }

    /// The box, or a usage error naming the scenario.
    pub fn require_box(&self) -> Result<&CorrelationBox, CliError> {
        self.correlation_box
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("scenario `{}` does not define a box", self.name)))
    }
}

/// Loads `--scenario`: an existing file path, or a preset name.
pub fn load(arg: &str) -> Result<Scenario, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{arg}: {e}")))?;
        let file = parse_scenario(&text, arg)?;
        return resolve(&file);
    }
    match PresetRef::parse(arg) {
        Some(p) => preset_scenario(&p),
        None => Err(CliError::Usage(format!(
            "`{arg}` is neither a readable file nor a preset (known: {}, njam(n, h))",
            Preset::ALL.map(|p| p.name()).join(", ")
        ))),
    }
}

/// Parses scenario JSON, reporting the line and column of any error.
pub fn parse_scenario(text: &str, source: &str) -> Result<ScenarioFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Json {
        file: source.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// The default box shipped with each preset.
pub fn preset_box(preset: Preset) -> Result<Option<CorrelationBox>, CliError> {
    let l = preset.layout();
    let b = match preset {
        Preset::BellStandard => pr_box(l.backend.clone(), &l.input_events(), &l.output_events())?,
        Preset::JammingTriangle => {
            // `A1`, `A2` uniform with `A1 ⊕ A2 = X`
            CorrelationBox::from_fn(
                l.backend.clone(),
                l.binary_inputs(),
                l.binary_outputs(),
                vec![],
                |x, a| {
                    if a[0] ^ a[1] == x[0] {
                        rat(1, 2)
                    } else {
                        rat(0, 1)
                    }
                },
            )?
        }
        Preset::FourParty => {
            // every proper subset of outputs uniform; full parity equals the
            // parity of the inputs
            CorrelationBox::from_fn(
                l.backend.clone(),
                l.binary_inputs(),
                l.binary_outputs(),
                vec![],
                |x, a| {
                    let px = x.iter().fold(0, |acc, v| acc ^ v);
                    let pa = a.iter().fold(0, |acc, v| acc ^ v);
                    if px == pa {
                        rat(1, 8)
                    } else {
                        rat(0, 1)
                    }
                },
            )?
        }
        Preset::Compass => canonical_box(
            &CanonicalBox::JamX(rat(1, 2)),
            l.backend.clone(),
            &distinct(&l.input_events()),
            &l.output_events(),
        )?,
        Preset::SixConfig => template_box(&l).map_err(|e| CliError::Domain(e.to_string()))?,
        Preset::DegenerateLoop | Preset::Fig5 => loop_model_at(&l).map_err(|e| CliError::Domain(e.to_string()))?,
        Preset::BlackHole => loop_box(l.backend.clone(), &l.output_events())?,
    };
    Ok(Some(b))
}

fn preset_scenario(p: &PresetRef) -> Result<Scenario, CliError> {
    match p {
        PresetRef::Layout(preset) => Ok(Scenario::from_layout(&preset.layout(), preset_box(*preset)?)),
        PresetRef::NJam { n, h } => Ok(Scenario {
            name: format!("njam({n}, {})", causalbox::rational::format_rational(h)),
            njam: Some((*n, h.clone())),
            ..Scenario::empty()
        }),
    }
}

/// Locations in order of first appearance.
fn distinct(events: &[Event]) -> Vec<Event> {
    let mut out: Vec<Event> = Vec::new();
    for e in events {
        if !out.contains(e) {
            out.push(e.clone());
        }
    }
    out
}

fn srv_specs(v: &[Srv]) -> Vec<SrvSpec> {
    v.iter().map(srv_spec).collect()
}

fn srvs(v: &[SrvSpec]) -> Result<Vec<Srv>, CliError> {
    Ok(v.iter().map(srv_from_spec).collect::<Result<_, _>>()?)
}

/// Expands a scenario file into concrete module inputs.
pub fn resolve(file: &ScenarioFile) -> Result<Scenario, CliError> {
    let mut sc = match &file.preset {
        Some(name) => {
            let p = PresetRef::parse(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            if file.backend.is_some() {
                return Err(CliError::Usage("`preset` and `backend` are mutually exclusive".into()));
            }
            let mut sc = preset_scenario(&p)?;
            if file.table.is_some() || file.canonical.is_some() {
                // the file supplies its own box over the preset geometry
                sc.correlation_box = None;
                if let PresetRef::Layout(preset) = p {
                    let l = preset.layout();
                    sc.inputs = l.binary_inputs();
                    sc.outputs = l.binary_outputs();
                }
            }
            sc
        }
        None => match &file.backend {
            Some(spec) => Scenario {
                name: "scenario".into(),
                backend: Some(backend_from_json(spec)?),
                ..Scenario::empty()
            },
            None => Scenario::empty(),
        },
    };
    if let Some(v) = &file.inputs {
        sc.inputs = srvs(v)?;
    }
    if let Some(v) = &file.outputs {
        sc.outputs = srvs(v)?;
    }
    if file.table.is_some() && file.canonical.is_some() {
        return Err(CliError::Usage("`table` and `canonical` are mutually exclusive".into()));
    }
    let backend = || {
        sc.backend
            .clone()
            .ok_or_else(|| CliError::Usage("a box needs a backend or a coordinate preset".into()))
    };
    if let Some(table) = &file.table {
        let bf = BoxFile {
            backend: backend_to_json(&backend()?),
            inputs: srv_specs(&sc.inputs),
            outputs: srv_specs(&sc.outputs),
            pairing: file.pairing.clone(),
            table: table.clone(),
        };
        sc.correlation_box = Some(box_from_json(&bf)?);
    } else if let Some(name) = &file.canonical {
        let which = CanonicalBox::parse(name)?;
        let ins = distinct(&sc.inputs.iter().map(|s| s.location.clone()).collect::<Vec<_>>());
        let outs: Vec<Event> = sc.outputs.iter().map(|s| s.location.clone()).collect();
        let b = canonical_box(&which, backend()?, &ins, &outs)?;
        sc.inputs = b.inputs().to_vec();
        sc.outputs = b.outputs().to_vec();
        sc.correlation_box = Some(b);
    }
    Ok(sc)
}
