//! Correlation boxes: exact conditional probability tables over spacetime
//! random variables.
//!
//! A box has input variables (settings chosen at points `p_i`) and output
//! variables (values read at points `q_j`). The table stores, for every
//! joint setting, a distribution over joint outcomes. Tables are dense and
//! indexed in mixed radix with the first variable most significant.

mod canonical;
mod embed;
mod intervention;
mod json;
mod sampling;

use serde::{Deserialize, Serialize};

use crate::causal_geometry::{Backend, Event, GeometryError};
use crate::rational::format_rational;
use crate::Rational;
use num_traits::{One, Signed, Zero};

pub use canonical::{canonical_box, jam_mechanism_x, jam_mechanism_y, loop_box, pr_box, CanonicalBox};
pub use embed::{embed_general, EmbeddedBox};
pub use intervention::{extend_with_intervention, InterventionExtension, PostTables};
pub use json::{
    backend_from_json, backend_to_json, box_from_json, box_to_json, srv_from_spec, srv_spec, AlphabetSpec, BackendSpec,
    BoxFile, SrvSpec,
};
pub use sampling::{random_causal_box, random_table_box};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoxError {
    #[error("index error: {0}")]
    Index(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown canonical box `{0}`")]
    UnknownCanonical(String),
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("malformed box file: {0}")]
    Format(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Finite ordered set of value labels.
///
/// An intervention alphabet is `{idle, do(v) for v in target}` and remembers
/// its target alphabet. The empty alphabet (an agent without output) counts
/// as a single trivial value in tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    labels: Vec<String>,
    target: Option<Vec<String>>,
}

/// Label used in table keys for the single value of an empty alphabet.
pub const EMPTY_LABEL: &str = "-";
pub const IDLE: &str = "idle";

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, BoxError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(BoxError::Alphabet(format!("duplicate label `{l}`")));
            }
            if l.contains(',') {
                return Err(BoxError::Alphabet(format!("label `{l}` contains a comma")));
            }
        }
        Ok(Alphabet { labels, target: None })
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        Self::range(2)
    }

    /// `{0, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        Alphabet {
            labels: (0..n).map(|i| i.to_string()).collect(),
            target: None,
        }
    }

    /// The passive-agent alphabet `{idle}`.
    pub fn idle() -> Self {
        Alphabet {
            labels: vec![IDLE.to_string()],
            target: None,
        }
    }

    pub fn empty() -> Self {
        Alphabet {
            labels: vec![],
            target: None,
        }
    }

    /// `{idle, do(v) ...}` for the values of `target`.
    pub fn intervention(target: &Alphabet) -> Self {
        let mut labels = vec![IDLE.to_string()];
        labels.extend(target.labels.iter().map(|l| format!("do({l})")));
        Alphabet {
            labels,
            target: Some(target.labels.clone()),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of table slots: empty alphabets still take one.
    pub fn radix(&self) -> usize {
        self.labels.len().max(1)
    }

    pub fn is_intervention(&self) -> bool {
        self.target.is_some()
    }

    pub fn target(&self) -> Option<&[String]> {
        self.target.as_deref()
    }

    pub fn label(&self, i: usize) -> &str {
        if self.labels.is_empty() {
            EMPTY_LABEL
        } else {
            &self.labels[i]
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        if self.labels.is_empty() {
            return (label == EMPTY_LABEL).then_some(0);
        }
        self.labels.iter().position(|l| l == label)
    }
}

/// A spacetime random variable: a named variable pinned to an event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Srv {
    pub name: String,
    pub alphabet: Alphabet,
    pub location: Event,
}

impl Srv {
    pub fn new(name: impl Into<String>, alphabet: Alphabet, location: Event) -> Self {
        Srv {
            name: name.into(),
            alphabet,
            location,
        }
    }
}

/// Mixed-radix index helper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    radices: Vec<usize>,
}

impl Radix {
    pub fn new(radices: Vec<usize>) -> Self {
        Radix { radices }
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn size(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.radices.len());
        digits.iter().zip(&self.radices).fold(0, |acc, (d, r)| acc * r + d)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        for (k, r) in self.radices.iter().enumerate().rev() {
            digits[k] = idx % r;
            idx /= r;
        }
        digits
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size()).map(|i| self.decode(i))
    }
}

/// A correlation box `P(a | x)` with inputs, outputs and a partial pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationBox {
    backend: Backend,
    inputs: Vec<Srv>,
    outputs: Vec<Srv>,
    pairing: Vec<(usize, usize)>,
    table: Vec<Rational>,
    defined: Vec<bool>,
}

impl CorrelationBox {
    /// Builds a box from a function of the (setting, outcome) digit tuples.
    pub fn from_fn(
        backend: Backend,
        inputs: Vec<Srv>,
        outputs: Vec<Srv>,
        pairing: Vec<(usize, usize)>,
        mut f: impl FnMut(&[usize], &[usize]) -> Rational,
    ) -> Result<Self, BoxError> {
        let xr = Radix::new(inputs.iter().map(|s| s.alphabet.radix()).collect());
        let ar = Radix::new(outputs.iter().map(|s| s.alphabet.radix()).collect());
        let mut table = Vec::with_capacity(xr.size() * ar.size());
        for x in xr.iter() {
            for a in ar.iter() {
                table.push(f(&x, &a));
            }
        }
        Self::from_table(backend, inputs, outputs, pairing, table)
    }

    /// Builds a box from a dense row-major table.
    pub fn from_table(
        backend: Backend,
        inputs: Vec<Srv>,
        outputs: Vec<Srv>,
        pairing: Vec<(usize, usize)>,
        table: Vec<Rational>,
    ) -> Result<Self, BoxError> {
        let n_x: usize = inputs.iter().map(|s| s.alphabet.radix()).product();
        let n_a: usize = outputs.iter().map(|s| s.alphabet.radix()).product();
        if table.len() != n_x * n_a {
            return Err(BoxError::Shape(format!(
                "table has {} entries, expected {}",
                table.len(),
                n_x * n_a
            )));
        }
        for &(i, j) in &pairing {
            if i >= inputs.len() || j >= outputs.len() {
                return Err(BoxError::Index(format!("pairing ({i}, {j}) out of range")));
            }
        }
        for s in inputs.iter().chain(&outputs) {
            backend.validate(&s.location)?;
        }
        Ok(CorrelationBox {
            backend,
            inputs,
            outputs,
            pairing,
            table,
            defined: vec![true; n_x],
        })
    }

    pub(crate) fn mark_undefined(&mut self, setting: usize) {
        self.defined[setting] = false;
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn inputs(&self) -> &[Srv] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Srv] {
        &self.outputs
    }

    pub fn pairing(&self) -> &[(usize, usize)] {
        &self.pairing
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn setting_radix(&self) -> Radix {
        Radix::new(self.inputs.iter().map(|s| s.alphabet.radix()).collect())
    }

    pub fn outcome_radix(&self) -> Radix {
        Radix::new(self.outputs.iter().map(|s| s.alphabet.radix()).collect())
    }

    pub fn setting_count(&self) -> usize {
        self.setting_radix().size()
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_radix().size()
    }

    pub fn row(&self, x: usize) -> &[Rational] {
        let n = self.outcome_count();
        &self.table[x * n..(x + 1) * n]
    }

    pub fn row_of(&self, x: &[usize]) -> &[Rational] {
        self.row(self.setting_radix().encode(x))
    }

    pub fn prob(&self, x: &[usize], a: &[usize]) -> &Rational {
        let n = self.outcome_count();
        &self.table[self.setting_radix().encode(x) * n + self.outcome_radix().encode(a)]
    }

    /// Replaces the whole table, keeping the variables.
    pub fn with_table(&self, table: Vec<Rational>) -> Result<Self, BoxError> {
        Self::from_table(
            self.backend.clone(),
            self.inputs.clone(),
            self.outputs.clone(),
            self.pairing.clone(),
            table,
        )
    }

    /// Same table, variables relocated to new events.
    pub fn relocated(
        &self,
        backend: Backend,
        input_locations: &[Event],
        output_locations: &[Event],
    ) -> Result<Self, BoxError> {
        if input_locations.len() != self.inputs.len() || output_locations.len() != self.outputs.len() {
            return Err(BoxError::Shape("location count mismatch".into()));
        }
        let inputs = self
            .inputs
            .iter()
            .zip(input_locations)
            .map(|(s, l)| Srv::new(s.name.clone(), s.alphabet.clone(), l.clone()))
            .collect();
        let outputs = self
            .outputs
            .iter()
            .zip(output_locations)
            .map(|(s, l)| Srv::new(s.name.clone(), s.alphabet.clone(), l.clone()))
            .collect();
        Self::from_table(backend, inputs, outputs, self.pairing.clone(), self.table.clone())
    }

    pub fn input_locations(&self) -> Vec<Event> {
        self.inputs.iter().map(|s| s.location.clone()).collect()
    }

    pub fn output_locations(&self) -> Vec<Event> {
        self.outputs.iter().map(|s| s.location.clone()).collect()
    }

    pub fn setting_key(&self, x: &[usize]) -> String {
        key(self.inputs.iter().map(|s| &s.alphabet), x)
    }

    pub fn outcome_key(&self, a: &[usize]) -> String {
        key(self.outputs.iter().map(|s| &s.alphabet), a)
    }
}

pub(crate) fn key<'a>(alphabets: impl Iterator<Item = &'a Alphabet>, digits: &[usize]) -> String {
    alphabets
        .zip(digits)
        .map(|(al, &d)| al.label(d).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One well-formedness failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum ValidationIssue {
    Normalization {
        setting: String,
        sum: String,
    },
    Negative {
        setting: String,
        outcome: String,
        value: String,
    },
    MissingSetting {
        setting: String,
    },
    CausalOrdering {
        input: String,
        output: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Lists every normalization, negativity, missing-setting and
/// causal-ordering problem of a box.
pub fn validate_box(b: &CorrelationBox) -> ValidationReport {
    let mut issues = Vec::new();
    let xr = b.setting_radix();
    for x in 0..b.setting_count() {
        let digits = xr.decode(x);
        let sk = b.setting_key(&digits);
        if !b.defined[x] {
            issues.push(ValidationIssue::MissingSetting { setting: sk });
            continue;
        }
        let row = b.row(x);
        let ar = b.outcome_radix();
        for (ai, p) in row.iter().enumerate() {
            if p.is_negative() {
                issues.push(ValidationIssue::Negative {
                    setting: sk.clone(),
                    outcome: b.outcome_key(&ar.decode(ai)),
                    value: format_rational(p),
                });
            }
        }
        let sum: Rational = row.iter().sum();
        if !sum.is_one() {
            issues.push(ValidationIssue::Normalization {
                setting: sk,
                sum: format_rational(&sum),
            });
        }
    }
    for &(i, j) in &b.pairing {
        let ok = b
            .backend
            .precedes(&b.inputs[i].location, &b.outputs[j].location)
            .unwrap_or(false);
        if !ok {
            issues.push(ValidationIssue::CausalOrdering {
                input: b.inputs[i].name.clone(),
                output: b.outputs[j].name.clone(),
            });
        }
    }
    ValidationReport { issues }
}

/// Distribution over the outcomes of a subset of outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginal {
    pub outputs: Vec<usize>,
    pub radix: Radix,
    pub probs: Vec<Rational>,
}

impl Marginal {
    pub fn prob(&self, a: &[usize]) -> &Rational {
        &self.probs[self.radix.encode(a)]
    }
}

fn check_subset(g: &[usize], n: usize) -> Result<(), BoxError> {
    for (k, &j) in g.iter().enumerate() {
        if j >= n {
            return Err(BoxError::Index(format!("output index {j} out of range 0..{n}")));
        }
        if g[..k].contains(&j) {
            return Err(BoxError::Index(format!("output index {j} repeated")));
        }
    }
    Ok(())
}

/// Marginal of a single row onto the outputs `g` (in the order given).
pub fn marginal_of_row(row: &[Rational], outcome_radix: &Radix, g: &[usize]) -> Marginal {
    let radix = Radix::new(g.iter().map(|&j| outcome_radix.radices()[j]).collect());
    let mut probs = vec![Rational::zero(); radix.size()];
    for (ai, p) in row.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let a = outcome_radix.decode(ai);
        let sub: Vec<usize> = g.iter().map(|&j| a[j]).collect();
        probs[radix.encode(&sub)] += p;
    }
    Marginal {
        outputs: g.to_vec(),
        radix,
        probs,
    }
}

/// `P(a^G | x)` by exact summation over the outputs outside `G`.
pub fn marginalize(b: &CorrelationBox, g: &[usize], x: &[usize]) -> Result<Marginal, BoxError> {
    check_subset(g, b.outputs.len())?;
    if x.len() != b.inputs.len() {
        return Err(BoxError::Index(format!(
            "setting has {} entries, box has {} inputs",
            x.len(),
            b.inputs.len()
        )));
    }
    for (k, (&xi, s)) in x.iter().zip(&b.inputs).enumerate() {
        if xi >= s.alphabet.radix() {
            return Err(BoxError::Index(format!("input {k} value {xi} out of range")));
        }
    }
    Ok(marginal_of_row(b.row_of(x), &b.outcome_radix(), g))
}

/// Marginalizes an existing marginal further onto `g2`, given as positions
/// of output indices (which must all be contained in `m.outputs`).
pub fn marginalize_further(m: &Marginal, g2: &[usize]) -> Result<Marginal, BoxError> {
    let positions: Vec<usize> = g2
        .iter()
        .map(|j| {
            m.outputs
                .iter()
                .position(|o| o == j)
                .ok_or_else(|| BoxError::Index(format!("output {j} not in the marginal")))
        })
        .collect::<Result<_, _>>()?;
    let mut out = marginal_of_row(&m.probs, &m.radix, &positions);
    out.outputs = g2.to_vec();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal_geometry::ev;
    use crate::rational::{int, rat};

    #[test]
    fn radix_roundtrip() {
        let r = Radix::new(vec![2, 3, 1, 2]);
        for i in 0..r.size() {
            assert_eq!(r.encode(&r.decode(i)), i);
        }
    }

    #[test]
    fn alphabets() {
        assert!(Alphabet::new(["a", "a"]).is_err());
        let iv = Alphabet::intervention(&Alphabet::binary());
        assert_eq!(iv.labels(), ["idle", "do(0)", "do(1)"]);
        assert_eq!(Alphabet::empty().radix(), 1);
    }

    #[test]
    fn validation_reports_each_problem() {
        let b = Backend::minkowski(1);
        let x = Srv::new("X", Alphabet::binary(), ev(int(0), int(0)));
        let a = Srv::new("A", Alphabet::binary(), ev(int(0), int(0)));
        let bx = CorrelationBox::from_fn(b, vec![x], vec![a], vec![(0, 0)], |x, a| {
            if x[0] == 1 && a[0] == 0 {
                rat(3, 8)
            } else {
                rat(1, 2)
            }
        })
        .unwrap();
        let rep = validate_box(&bx);
        assert_eq!(rep.issues.len(), 2);
        assert!(matches!(&rep.issues[0], ValidationIssue::Normalization { sum, .. } if sum == "7/8"));
        assert!(matches!(&rep.issues[1], ValidationIssue::CausalOrdering { .. }));
    }
}
