//! The one-time-pad, jamming and loop causal mechanisms over binary
//! observed variables `A, B, C`, and their intervention boxes.

use serde::{Deserialize, Serialize};

use crate::boxes::{marginal_of_row, Alphabet, BoxError, CorrelationBox, Srv};
use crate::causal_geometry::{Backend, Event};
use crate::ons::nonempty_subsets;
use crate::rational::rat;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// `A = E_A, C = E_C, B = A ⊕ C`.
    Otp,
    /// `A = Λ, B = E_B, C = B ⊕ Λ`.
    Jam,
    /// `A = Λ, C = B ⊕ Λ, B = A ⊕ C` (cyclic).
    Loop,
}

impl Model {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "otp" => Some(Model::Otp),
            "jam" => Some(Model::Jam),
            "loop" => Some(Model::Loop),
            _ => None,
        }
    }
}

/// A summand of a structural assignment (all assignments are XORs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    /// Observed variable `A`, `B` or `C` (0, 1, 2).
    Observed(usize),
    /// The latent `Λ = E_Λ`.
    Lambda,
    /// Uniform noise `E_A`, `E_B`, `E_C` (0, 1, 2).
    Noise(usize),
}

/// How a distribution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// The post-intervention structure is acyclic and was evaluated.
    Structural,
    /// Cyclic without interventions: the model's stated observed law.
    Observational,
    /// Cyclic under a partial intervention the model leaves open: point
    /// masses on the intervened variables, uniform on the rest.
    Filled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalMechanism {
    pub model: Model,
    pub assignments: [Vec<Term>; 3],
}

/// Intervention pattern: `Some(v)` is `do(v)`, `None` is idle.
pub type Pattern = [Option<u8>; 3];

fn outcome_index(a: u8, b: u8, c: u8) -> usize {
    (a as usize) << 2 | (b as usize) << 1 | c as usize
}

/// `P(a, b, c) = 1/4 · [b = a ⊕ c]`.
pub fn observed_law() -> Vec<Rational> {
    (0..8)
        .map(|o| {
            let (a, b, c) = (o >> 2 & 1, o >> 1 & 1, o & 1);
            if b == a ^ c {
                rat(1, 4)
            } else {
                rat(0, 1)
            }
        })
        .collect()
}

impl CausalMechanism {
    pub fn new(model: Model) -> Self {
        use Term::*;
        let assignments = match model {
            Model::Otp => [vec![Noise(0)], vec![Observed(0), Observed(2)], vec![Noise(2)]],
            Model::Jam => [vec![Lambda], vec![Noise(1)], vec![Observed(1), Lambda]],
            Model::Loop => [vec![Lambda], vec![Observed(0), Observed(2)], vec![Observed(1), Lambda]],
        };
        CausalMechanism { model, assignments }
    }

    /// Evaluates the post-intervention structure over the 16 equally likely
    /// noise values `(E_A, E_B, E_C, E_Λ)`; `None` if it is cyclic.
    pub fn structural(&self, pattern: &Pattern) -> Option<Vec<Rational>> {
        let mut dist = vec![rat(0, 1); 8];
        for noise in 0..16u8 {
            let e = [noise >> 3 & 1, noise >> 2 & 1, noise >> 1 & 1];
            let lambda = noise & 1;
            let mut val: [Option<u8>; 3] = *pattern;
            loop {
                let mut progressed = false;
                for v in 0..3 {
                    if val[v].is_some() {
                        continue;
                    }
                    let mut acc = Some(0u8);
                    for t in &self.assignments[v] {
                        let x = match *t {
                            Term::Observed(o) => val[o],
                            Term::Lambda => Some(lambda),
                            Term::Noise(k) => Some(e[k]),
                        };
                        acc = acc.zip(x).map(|(a, b)| a ^ b);
                    }
                    if acc.is_some() {
                        val[v] = acc;
                        progressed = true;
                    }
                }
                if val.iter().all(Option::is_some) {
                    break;
                }
                if !progressed {
                    return None;
                }
            }
            let [a, b, c] = val.map(|v| v.expect("resolved"));
            dist[outcome_index(a, b, c)] += rat(1, 16);
        }
        Some(dist)
    }

    /// Distribution over `(a, b, c)` under the pattern, and how it arose.
    pub fn distribution(&self, pattern: &Pattern) -> (Vec<Rational>, Evaluation) {
        if let Some(d) = self.structural(pattern) {
            return (d, Evaluation::Structural);
        }
        if pattern.iter().all(Option::is_none) {
            return (observed_law(), Evaluation::Observational);
        }
        let free = pattern.iter().filter(|v| v.is_none()).count() as i64;
        let d = (0..8)
            .map(|o| {
                let bits = [(o >> 2 & 1) as u8, (o >> 1 & 1) as u8, (o & 1) as u8];
                if bits.iter().zip(pattern).all(|(b, p)| p.is_none_or(|v| v == *b)) {
                    rat(1, 1 << free)
                } else {
                    rat(0, 1)
                }
            })
            .collect();
        (d, Evaluation::Filled)
    }
}

/// Decodes an intervention-alphabet index (`0 = idle`, `1 + v = do(v)`).
fn pattern_of(x: &[usize]) -> Pattern {
    [0, 1, 2].map(|i| x[i].checked_sub(1).map(|v| v as u8))
}

/// The intervention box over `(I_A, p_1), (I_B, p_2), (I_C, p_3)` with
/// outputs `(A, q_1), (B, q_2), (C, q_3)`.
pub fn build_model(
    model: Model,
    backend: Backend,
    inputs: &[Event; 3],
    outputs: &[Event; 3],
) -> Result<CorrelationBox, BoxError> {
    let mech = CausalMechanism::new(model);
    let names = ["A", "B", "C"];
    let ins = names
        .iter()
        .zip(inputs)
        .map(|(n, p)| Srv::new(format!("I_{n}"), Alphabet::intervention(&Alphabet::binary()), p.clone()))
        .collect();
    let outs = names
        .iter()
        .zip(outputs)
        .map(|(n, q)| Srv::new(*n, Alphabet::binary(), q.clone()))
        .collect();
    let table: Vec<Vec<Rational>> = (0..27)
        .map(|xi| mech.distribution(&pattern_of(&[xi / 9, xi / 3 % 3, xi % 3])).0)
        .collect();
    CorrelationBox::from_fn(backend, ins, outs, vec![(0, 0), (1, 1), (2, 2)], |x, a| {
        table[x[0] * 9 + x[1] * 3 + x[2]][a[0] << 2 | a[1] << 1 | a[2]].clone()
    })
}

/// Whether interventions on `interventions` can change the marginal of
/// `targets`, compared against the all-idle row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffectsEntry {
    pub interventions: Vec<String>,
    pub targets: Vec<String>,
    pub affects: bool,
    /// A setting whose marginal differs, when one exists.
    pub witness: Option<String>,
}

fn intervention_target(b: &CorrelationBox, i: usize) -> Option<usize> {
    let name = &b.inputs()[i].name;
    name.strip_prefix("I_")
        .and_then(|t| b.outputs().iter().position(|o| o.name == t))
        .or_else(|| b.pairing().iter().find(|(ii, _)| *ii == i).map(|(_, o)| *o))
}

/// For every nonempty set `S` of intervention inputs and every nonempty set
/// `T` of outputs not targeted by `S`: does some setting with every input of
/// `S` at a `do` value (all other inputs idle) change the `T`-marginal?
pub fn affects_relations(b: &CorrelationBox) -> Vec<AffectsEntry> {
    let iv: Vec<usize> = (0..b.inputs().len())
        .filter(|&i| b.inputs()[i].alphabet.is_intervention())
        .collect();
    let radix = b.setting_radix();
    let orad = b.outcome_radix();
    let idle_setting = vec![0usize; b.inputs().len()];
    let idle_row = b.row(radix.encode(&idle_setting));
    let mut out = Vec::new();
    for s in nonempty_subsets(iv.len()) {
        let s: Vec<usize> = s.iter().map(|&k| iv[k]).collect();
        let targeted: Vec<usize> = s.iter().filter_map(|&i| intervention_target(b, i)).collect();
        let free: Vec<usize> = (0..b.outputs().len()).filter(|o| !targeted.contains(o)).collect();
        for t in nonempty_subsets(free.len()) {
            let t: Vec<usize> = t.iter().map(|&k| free[k]).collect();
            let base = marginal_of_row(idle_row, &orad, &t).probs;
            let witness = (0..radix.size()).map(|xi| radix.decode(xi)).find(|x| {
                (0..x.len()).all(|i| if s.contains(&i) { x[i] != 0 } else { x[i] == 0 })
                    && marginal_of_row(b.row(radix.encode(x)), &orad, &t).probs != base
            });
            out.push(AffectsEntry {
                interventions: s.iter().map(|&i| b.inputs()[i].name.clone()).collect(),
                targets: t.iter().map(|&o| b.outputs()[o].name.clone()).collect(),
                affects: witness.is_some(),
                witness: witness.map(|x| b.setting_key(&x)),
            });
        }
    }
    out
}

/// Looks up one relation by names.
pub fn affects(entries: &[AffectsEntry], interventions: &[&str], targets: &[&str]) -> Option<bool> {
    entries
        .iter()
        .find(|e| e.interventions == interventions && e.targets == targets)
        .map(|e| e.affects)
}
