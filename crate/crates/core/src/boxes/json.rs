//! JSON form of backends and boxes. Rationals are `"num/den"` strings and
//! table keys are comma-joined value labels.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Alphabet, BoxError, CorrelationBox, Srv};
use crate::causal_geometry::{Backend, Event, FiniteOrder, TerminatedDiagram};
use crate::rational::{format_rational, parse_rational};
use crate::Rational;

/// Serialized backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Minkowski {
        d: usize,
    },
    FiniteOrder {
        elements: usize,
        /// Pairs `[a, b]` meaning `a ≺ b`; the transitive closure is taken.
        order: Vec<(usize, usize)>,
    },
    Terminated {
        /// Singularity polyline vertices `[x, t]`.
        singularity: Vec<(String, String)>,
    },
}

pub fn backend_to_json(b: &Backend) -> BackendSpec {
    match b {
        Backend::Minkowski { d } => BackendSpec::Minkowski { d: *d },
        Backend::FiniteOrder(o) => BackendSpec::FiniteOrder {
            elements: o.len(),
            order: o.pairs(),
        },
        Backend::Terminated(t) => BackendSpec::Terminated {
            singularity: t
                .vertices()
                .iter()
                .map(|(x, t)| (format_rational(x), format_rational(t)))
                .collect(),
        },
    }
}

pub fn backend_from_json(s: &BackendSpec) -> Result<Backend, BoxError> {
    Ok(match s {
        BackendSpec::Minkowski { d } => Backend::minkowski(*d),
        BackendSpec::FiniteOrder { elements, order } => {
            Backend::FiniteOrder(FiniteOrder::from_covers(*elements, order)?)
        }
        BackendSpec::Terminated { singularity } => {
            let verts = singularity
                .iter()
                .map(|(x, t)| Ok((parse(x)?, parse(t)?)))
                .collect::<Result<Vec<_>, BoxError>>()?;
            Backend::Terminated(TerminatedDiagram::new(verts)?)
        }
    })
}

fn parse(s: &str) -> Result<Rational, BoxError> {
    parse_rational(s).map_err(|e| BoxError::Format(e.to_string()))
}

/// Serialized alphabet: a label list, or an intervention alphabet over a
/// target label list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphabetSpec {
    Labels(Vec<String>),
    Intervention { intervention: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrvSpec {
    pub name: String,
    pub alphabet: AlphabetSpec,
    pub point: Event,
}

/// The on-disk box format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxFile {
    pub backend: BackendSpec,
    #[serde(default)]
    pub inputs: Vec<SrvSpec>,
    #[serde(default)]
    pub outputs: Vec<SrvSpec>,
    #[serde(default)]
    pub pairing: Vec<(usize, usize)>,
    pub table: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn srv_spec(s: &Srv) -> SrvSpec {
    let alphabet = match s.alphabet.target() {
        Some(t) => AlphabetSpec::Intervention {
            intervention: t.to_vec(),
        },
        None => AlphabetSpec::Labels(s.alphabet.labels().to_vec()),
    };
    SrvSpec {
        name: s.name.clone(),
        alphabet,
        point: s.location.clone(),
    }
}

pub fn srv_from_spec(s: &SrvSpec) -> Result<Srv, BoxError> {
    let alphabet = match &s.alphabet {
        AlphabetSpec::Labels(l) => Alphabet::new(l.iter().cloned())?,
        AlphabetSpec::Intervention { intervention } => {
            Alphabet::intervention(&Alphabet::new(intervention.iter().cloned())?)
        }
    };
    Ok(Srv::new(s.name.clone(), alphabet, s.point.clone()))
}

pub fn box_to_json(b: &CorrelationBox) -> BoxFile {
    let xr = b.setting_radix();
    let ar = b.outcome_radix();
    let mut table = BTreeMap::new();
    for (xi, x) in xr.iter().enumerate() {
        if !b.defined[xi] {
            continue;
        }
        let row = b.row(xi);
        let mut entries = BTreeMap::new();
        for (ai, p) in row.iter().enumerate() {
            if !p.is_zero() {
                entries.insert(b.outcome_key(&ar.decode(ai)), format_rational(p));
            }
        }
        table.insert(b.setting_key(&x), entries);
    }
    BoxFile {
        backend: backend_to_json(b.backend()),
        inputs: b.inputs().iter().map(srv_spec).collect(),
        outputs: b.outputs().iter().map(srv_spec).collect(),
        pairing: b.pairing().to_vec(),
        table,
    }
}

fn parse_key(key: &str, alphabets: &[&Alphabet]) -> Result<Vec<usize>, BoxError> {
    let parts: Vec<&str> = if alphabets.is_empty() {
        if !key.is_empty() {
            return Err(BoxError::Format(format!("key `{key}` given for an empty tuple")));
        }
        vec![]
    } else {
        key.split(',').map(str::trim).collect()
    };
    if parts.len() != alphabets.len() {
        return Err(BoxError::Format(format!(
            "key `{key}` has {} labels, expected {}",
            parts.len(),
            alphabets.len()
        )));
    }
    parts
        .iter()
        .zip(alphabets)
        .map(|(p, al)| {
            al.index_of(p)
                .ok_or_else(|| BoxError::Format(format!("unknown label `{p}` in key `{key}`")))
        })
        .collect()
}

/// Parses a box. Settings absent from the table are recorded as missing
/// (reported by `validate_box`); absent outcomes have probability 0.
pub fn box_from_json(f: &BoxFile) -> Result<CorrelationBox, BoxError> {
    let backend = backend_from_json(&f.backend)?;
    let inputs: Vec<Srv> = f.inputs.iter().map(srv_from_spec).collect::<Result<_, _>>()?;
    let outputs: Vec<Srv> = f.outputs.iter().map(srv_from_spec).collect::<Result<_, _>>()?;
    let in_al: Vec<&Alphabet> = inputs.iter().map(|s| &s.alphabet).collect();
    let out_al: Vec<&Alphabet> = outputs.iter().map(|s| &s.alphabet).collect();
    let n_x: usize = in_al.iter().map(|a| a.radix()).product();
    let n_a: usize = out_al.iter().map(|a| a.radix()).product();
    let xr = super::Radix::new(in_al.iter().map(|a| a.radix()).collect());
    let ar = super::Radix::new(out_al.iter().map(|a| a.radix()).collect());
    let mut table = vec![Rational::zero(); n_x * n_a];
    let mut seen = vec![false; n_x];
    for (xk, row) in &f.table {
        let x = xr.encode(&parse_key(xk, &in_al)?);
        if seen[x] {
            return Err(BoxError::Format(format!("setting `{xk}` listed twice")));
        }
        seen[x] = true;
        for (ak, p) in row {
            let a = ar.encode(&parse_key(ak, &out_al)?);
            table[x * n_a + a] = parse(p)?;
        }
    }
    let mut b = CorrelationBox::from_table(backend, inputs, outputs, f.pairing.clone(), table)?;
    for (x, s) in seen.iter().enumerate() {
        if !s {
            b.mark_undefined(x);
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{pr_box, validate_box, ValidationIssue};
    use crate::causal_geometry::ev;
    use crate::rational::int;

    #[test]
    fn pr_roundtrip() {
        let ins = vec![ev(int(0), int(0)), ev(int(0), int(10))];
        let outs = vec![ev(int(1), int(0)), ev(int(1), int(10))];
        let b = pr_box(Backend::minkowski(1), &ins, &outs).unwrap();
        let f = box_to_json(&b);
        let text = serde_json::to_string_pretty(&f).unwrap();
        let back: BoxFile = serde_json::from_str(&text).unwrap();
        assert_eq!(box_from_json(&back).unwrap(), b);
    }

    #[test]
    fn missing_setting_is_reported() {
        let ins = vec![ev(int(0), int(0)), ev(int(0), int(10))];
        let outs = vec![ev(int(1), int(0)), ev(int(1), int(10))];
        let b = pr_box(Backend::minkowski(1), &ins, &outs).unwrap();
        let mut f = box_to_json(&b);
        f.table.remove("1,1");
        let parsed = box_from_json(&f).unwrap();
        let rep = validate_box(&parsed);
        assert!(matches!(&rep.issues[..], [ValidationIssue::MissingSetting { setting }] if setting == "1,1"));
    }
}
