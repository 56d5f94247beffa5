//! Operational no-signalling (ONS) constraints: generating every instance a
//! scenario implies and checking a box against them.
//!
//! For input indices `F` and output indices `G`, if the output locations
//! `q^G` are operationally separated from the input locations `p^F`, the
//! marginal `P(a^G | x)` must not depend on `x^F`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::boxes::{marginal_of_row, BoxError, CorrelationBox, Marginal, Radix};
use crate::causal_geometry::{
    operationally_separated, Backend, Event, GeometryError, SeparationStatus, SeparationVerdict,
};
use crate::rational::format_rational;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OnsError {
    #[error("separation undecidable for (F, G) pairs {pairs:?}")]
    UndecidableScenario { pairs: Vec<(Vec<usize>, Vec<usize>)> },
    #[error("layout does not generate the `{family}` family: {detail}")]
    LayoutMismatch { family: String, detail: String },
    #[error("unknown constraint family `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// One equality `P(a^G | x) = P(a^G | x′)` for all `a^G`, where `x` and
/// `x′` agree outside `F`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintInstance {
    #[serde(rename = "F")]
    pub f: Vec<usize>,
    #[serde(rename = "G")]
    pub g: Vec<usize>,
    pub certificate: SeparationVerdict,
    pub x: Vec<usize>,
    pub x_prime: Vec<usize>,
}

impl ConstraintInstance {
    /// Re-checks the structural invariants and the separation certificate.
    pub fn verify(&self, b: &CorrelationBox) -> Result<bool, GeometryError> {
        let outside_ok = (0..self.x.len()).all(|i| self.f.contains(&i) || self.x[i] == self.x_prime[i]);
        let (qs, ps) = locations(b, &self.f, &self.g);
        Ok(outside_ok && self.certificate.is_separated() && self.certificate.verify(b.backend(), &qs, &ps)?)
    }
}

/// A violated instance, with the two exact marginal probabilities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub instance: ConstraintInstance,
    pub a: Vec<usize>,
    #[serde(with = "crate::rational::serde_str")]
    pub p1: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub p2: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub difference: Rational,
}

/// All nonempty subsets of `0..n`, ordered by size then lexicographically.
pub fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u64..(1 << n))
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn locations(b: &CorrelationBox, f: &[usize], g: &[usize]) -> (Vec<Event>, Vec<Event>) {
    let qs = g.iter().map(|&j| b.outputs()[j].location.clone()).collect();
    let ps = f.iter().map(|&i| b.inputs()[i].location.clone()).collect();
    (qs, ps)
}

/// Separation verdict for every nonempty `(F, G)`.
pub fn separation_table(b: &CorrelationBox) -> Result<Vec<((Vec<usize>, Vec<usize>), SeparationVerdict)>, OnsError> {
    let mut cache: HashMap<(Vec<Event>, Vec<Event>), SeparationVerdict> = HashMap::new();
    let mut out = Vec::new();
    for f in nonempty_subsets(b.inputs().len()) {
        for g in nonempty_subsets(b.outputs().len()) {
            let v = verdict_cached(b.backend(), b, &f, &g, &mut cache)?;
            out.push(((f.clone(), g), v));
        }
    }
    Ok(out)
}

fn verdict_cached(
    backend: &Backend,
    b: &CorrelationBox,
    f: &[usize],
    g: &[usize],
    cache: &mut HashMap<(Vec<Event>, Vec<Event>), SeparationVerdict>,
) -> Result<SeparationVerdict, GeometryError> {
    let (qs, ps) = locations(b, f, g);
    let key = (qs, ps);
    if let Some(v) = cache.get(&key) {
        return Ok(v.clone());
    }
    let v = operationally_separated(backend, &key.0, &key.1)?;
    cache.insert(key, v.clone());
    Ok(v)
}

/// Setting pairs `(x, x′)` differing only inside `f`: every single-coordinate
/// move, plus (for `|f| ≥ 2`) every move changing all of `f` at once. Each
/// unordered pair appears once, with `x < x′`.
pub fn setting_moves(radix: &Radix, f: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for xi in 0..radix.size() {
        let x = radix.decode(xi);
        for &i in f {
            for v in x[i] + 1..radix.radices()[i] {
                let mut xp = x.clone();
                xp[i] = v;
                out.push((x.clone(), xp));
            }
        }
        if f.len() >= 2 {
            let sub = Radix::new(f.iter().map(|&i| radix.radices()[i]).collect());
            for s in sub.iter() {
                if f.iter().zip(&s).any(|(&i, &v)| x[i] == v) {
                    continue;
                }
                let mut xp = x.clone();
                for (&i, &v) in f.iter().zip(&s) {
                    xp[i] = v;
                }
                if radix.encode(&xp) > xi {
                    out.push((x.clone(), xp));
                }
            }
        }
    }
    out
}

/// Every ONS instance the box's geometry implies.
pub fn enumerate_constraints(b: &CorrelationBox) -> Result<Vec<ConstraintInstance>, OnsError> {
    let table = separation_table(b)?;
    let unknown: Vec<(Vec<usize>, Vec<usize>)> = table
        .iter()
        .filter(|(_, v)| v.status == SeparationStatus::Unknown)
        .map(|(k, _)| k.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(OnsError::UndecidableScenario { pairs: unknown });
    }
    let radix = b.setting_radix();
    let mut out = Vec::new();
    for ((f, g), v) in table {
        if v.is_separated() {
            push_instances(&mut out, &radix, &f, &g, &v);
        }
    }
    Ok(out)
}

fn push_instances(out: &mut Vec<ConstraintInstance>, radix: &Radix, f: &[usize], g: &[usize], v: &SeparationVerdict) {
    for (x, x_prime) in setting_moves(radix, f) {
        out.push(ConstraintInstance {
            f: f.to_vec(),
            g: g.to_vec(),
            certificate: v.clone(),
            x,
            x_prime,
        });
    }
}

/// Checks the box against explicit instances.
pub fn check_instances(b: &CorrelationBox, instances: &[ConstraintInstance]) -> Vec<ViolationReport> {
    let orad = b.outcome_radix();
    let xrad = b.setting_radix();
    let mut cache: HashMap<(Vec<usize>, usize), Marginal> = HashMap::new();
    let mut marginal = |g: &[usize], x: &[usize]| -> Marginal {
        let xi = xrad.encode(x);
        cache
            .entry((g.to_vec(), xi))
            .or_insert_with(|| marginal_of_row(b.row(xi), &orad, g))
            .clone()
    };
    let mut out = Vec::new();
    for inst in instances {
        let m1 = marginal(&inst.g, &inst.x);
        let m2 = marginal(&inst.g, &inst.x_prime);
        for (ai, (p1, p2)) in m1.probs.iter().zip(&m2.probs).enumerate() {
            if p1 != p2 {
                out.push(ViolationReport {
                    instance: inst.clone(),
                    a: m1.radix.decode(ai),
                    p1: p1.clone(),
                    p2: p2.clone(),
                    difference: p1 - p2,
                });
            }
        }
    }
    out
}

/// Checks the box against every instance its geometry implies.
pub fn check_ons(b: &CorrelationBox) -> Result<Vec<ViolationReport>, OnsError> {
    let instances = enumerate_constraints(b)?;
    Ok(check_instances(b, &instances))
}

/// The standard no-signalling conditions: for each input, the marginal of
/// all outputs not paired with it does not depend on its value.
pub fn check_standard_ns(b: &CorrelationBox) -> bool {
    let orad = b.outcome_radix();
    let xrad = b.setting_radix();
    for i in 0..b.inputs().len() {
        let others: Vec<usize> = (0..b.outputs().len())
            .filter(|j| !b.pairing().contains(&(i, *j)))
            .collect();
        for (x, xp) in setting_moves(&xrad, &[i]) {
            let m1 = marginal_of_row(b.row_of(&x), &orad, &others);
            let m2 = marginal_of_row(b.row_of(&xp), &orad, &others);
            if m1.probs != m2.probs {
                return false;
            }
        }
    }
    true
}

/// The two displayed constraint families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// Inputs `(X, Y, Z)`, outputs `(A, B, C)`.
    SixConfigTriangle,
    /// Inputs `(X, X_m, Y, Y_m)`, outputs `(A, B, C)`.
    Compass,
}

impl ConstraintFamily {
    pub fn parse(s: &str) -> Result<Self, OnsError> {
        match s {
            "six_config_triangle" => Ok(ConstraintFamily::SixConfigTriangle),
            "compass" => Ok(ConstraintFamily::Compass),
            other => Err(OnsError::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintFamily::SixConfigTriangle => "six_config_triangle",
            ConstraintFamily::Compass => "compass",
        }
    }

    /// `(F, G)` of each displayed equality, in display order.
    pub fn equalities(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        match self {
            ConstraintFamily::SixConfigTriangle => vec![
                (vec![0, 1], vec![0, 1]),
                (vec![0, 2], vec![0, 2]),
                (vec![1, 2], vec![1, 2]),
                (vec![0, 1, 2], vec![0]),
                (vec![0, 1, 2], vec![1]),
                (vec![0, 1, 2], vec![2]),
            ],
            ConstraintFamily::Compass => vec![
                (vec![2, 3], vec![0, 1]),
                (vec![0, 1], vec![1, 2]),
                (vec![0, 1, 2, 3], vec![0]),
                (vec![0, 1, 2, 3], vec![1]),
                (vec![0, 1, 2, 3], vec![2]),
            ],
        }
    }

    /// `(F, G)` pairs the family presupposes to be not separated (the
    /// jamming directions it leaves unconstrained).
    pub fn presupposed_open(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        match self {
            ConstraintFamily::SixConfigTriangle => {
                vec![(vec![2], vec![0, 1]), (vec![1], vec![0, 2]), (vec![0], vec![1, 2])]
            }
            ConstraintFamily::Compass => vec![(vec![0, 1], vec![0, 1]), (vec![2, 3], vec![1, 2])],
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            ConstraintFamily::SixConfigTriangle => (3, 3),
            ConstraintFamily::Compass => (4, 3),
        }
    }
}

/// Emits exactly the family's equalities as instances, after checking that
/// the box's geometry generates each of them and leaves the presupposed
/// jamming directions unconstrained.
pub fn named_constraints(family: ConstraintFamily, b: &CorrelationBox) -> Result<Vec<ConstraintInstance>, OnsError> {
    let mismatch = |detail: String| OnsError::LayoutMismatch {
        family: family.name().to_string(),
        detail,
    };
    let (ni, no) = family.shape();
    if b.inputs().len() != ni || b.outputs().len() != no {
        return Err(mismatch(format!(
            "expected {ni} inputs and {no} outputs, found {} and {}",
            b.inputs().len(),
            b.outputs().len()
        )));
    }
    let mut cache = HashMap::new();
    for (f, g) in family.presupposed_open() {
        let v = verdict_cached(b.backend(), b, &f, &g, &mut cache)?;
        if v.status != SeparationStatus::NotSeparated {
            return Err(mismatch(format!(
                "outputs {g:?} must not be separated from inputs {f:?} (verdict {:?})",
                v.status
            )));
        }
    }
    let radix = b.setting_radix();
    let mut out = Vec::new();
    for (f, g) in family.equalities() {
        let v = verdict_cached(b.backend(), b, &f, &g, &mut cache)?;
        if !v.is_separated() {
            return Err(mismatch(format!(
                "outputs {g:?} are not separated from inputs {f:?} (verdict {:?})",
                v.status
            )));
        }
        push_instances(&mut out, &radix, &f, &g, &v);
    }
    Ok(out)
}

/// CLI-facing summary of a check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnsReport {
    pub instances: usize,
    pub violations: Vec<ViolationEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationEntry {
    #[serde(rename = "F")]
    pub f: Vec<String>,
    #[serde(rename = "G")]
    pub g: Vec<String>,
    pub x: String,
    pub x_prime: String,
    pub a: String,
    pub p1: String,
    pub p2: String,
}

impl OnsReport {
    pub fn new(b: &CorrelationBox, instances: usize, violations: &[ViolationReport]) -> Self {
        let violations = violations
            .iter()
            .map(|v| ViolationEntry {
                f: v.instance.f.iter().map(|&i| b.inputs()[i].name.clone()).collect(),
                g: v.instance.g.iter().map(|&j| b.outputs()[j].name.clone()).collect(),
                x: b.setting_key(&v.instance.x),
                x_prime: b.setting_key(&v.instance.x_prime),
                a: crate::boxes::key(v.instance.g.iter().map(|&j| &b.outputs()[j].alphabet), &v.a),
                p1: format_rational(&v.p1),
                p2: format_rational(&v.p2),
            })
            .collect();
        OnsReport { instances, violations }
    }
}
