//! Extending a box by an intervention input on one of its outputs.

use num_traits::{One, Signed, Zero};

use super::{marginal_of_row, Alphabet, BoxError, CorrelationBox, Radix, Srv};
use crate::causal_geometry::Event;
use crate::Rational;

/// Post-intervention distributions: `tables[v][x]` is the distribution of
/// the remaining outputs (all outputs except the target, in order) given
/// the base setting `x` and `do(v)` on the target.
pub type PostTables = Vec<Vec<Vec<Rational>>>;

/// A box together with its extension by an intervention input `I_{A_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterventionExtension {
    pub base: CorrelationBox,
    pub target: usize,
    pub extended: CorrelationBox,
}

impl InterventionExtension {
    /// Index of the intervention input inside `extended`.
    pub fn intervention_input(&self) -> usize {
        self.extended.inputs().len() - 1
    }

    /// `P(a | x, I = idle) = P(a | x)`.
    pub fn check_ppre(&self) -> bool {
        let n = self.base.setting_count();
        let iv = self.extended.inputs()[self.intervention_input()].alphabet.radix();
        (0..n).all(|x| self.extended.row(x * iv) == self.base.row(x))
    }

    /// `P(a_j | x, do(v)) = δ_{a_j, v}` for every setting and value.
    pub fn check_ppost(&self) -> bool {
        let iv = self.extended.inputs()[self.intervention_input()].alphabet.radix();
        let orad = self.extended.outcome_radix();
        (0..self.base.setting_count()).all(|x| {
            (1..iv).all(|k| {
                let m = marginal_of_row(self.extended.row(x * iv + k), &orad, &[self.target]);
                m.probs
                    .iter()
                    .enumerate()
                    .all(|(a, p)| if a == k - 1 { p.is_one() } else { p.is_zero() })
            })
        })
    }
}

/// Adds the input `(I_{A_j}, q′)` with alphabet `{idle, do(a′)}`. Rows with
/// `idle` repeat the base table; rows with `do(a′)` are
/// `δ_{a_j,a′} · post[a′][x](rest)`. Requires `q′ ⪯ q_j`.
pub fn extend_with_intervention(
    base: &CorrelationBox,
    j: usize,
    location: Event,
    post: &PostTables,
) -> Result<InterventionExtension, BoxError> {
    let outputs = base.outputs();
    if j >= outputs.len() {
        return Err(BoxError::Index(format!("output index {j} out of range")));
    }
    let target = &outputs[j];
    if target.alphabet.is_empty() {
        return Err(BoxError::Alphabet(format!(
            "output `{}` has an empty alphabet",
            target.name
        )));
    }
    let backend = base.backend();
    if !backend.precedes_eq(&location, &target.location)? {
        return Err(BoxError::Validation(format!(
            "intervention location must causally precede or equal the location of `{}`",
            target.name
        )));
    }
    let k = target.alphabet.len();
    let rest: Vec<usize> = (0..outputs.len()).filter(|&o| o != j).collect();
    let orad = base.outcome_radix();
    let rest_rad = Radix::new(rest.iter().map(|&o| orad.radices()[o]).collect());
    if post.len() != k {
        return Err(BoxError::Shape(format!("expected {k} post-intervention families")));
    }
    for (v, fam) in post.iter().enumerate() {
        if fam.len() != base.setting_count() {
            return Err(BoxError::Shape(format!(
                "post-intervention family {v} has {} settings, expected {}",
                fam.len(),
                base.setting_count()
            )));
        }
        for (x, dist) in fam.iter().enumerate() {
            if dist.len() != rest_rad.size() {
                return Err(BoxError::Shape(format!(
                    "post-intervention distribution ({v}, {x}) has wrong length"
                )));
            }
            let sum: Rational = dist.iter().sum();
            if !sum.is_one() || dist.iter().any(|p| p.is_negative()) {
                return Err(BoxError::Validation(format!(
                    "post-intervention distribution ({v}, {x}) is not a probability distribution"
                )));
            }
        }
    }

    let mut inputs = base.inputs().to_vec();
    let iname = format!("I_{}", target.name);
    inputs.push(Srv::new(iname, Alphabet::intervention(&target.alphabet), location));
    let iv = k + 1;
    let n_a = base.outcome_count();
    let mut table = Vec::with_capacity(base.setting_count() * iv * n_a);
    for x in 0..base.setting_count() {
        table.extend_from_slice(base.row(x));
        for (v, fam) in post.iter().enumerate() {
            for ai in 0..n_a {
                let a = orad.decode(ai);
                if a[j] != v {
                    table.push(Rational::zero());
                } else {
                    let r: Vec<usize> = rest.iter().map(|&o| a[o]).collect();
                    table.push(fam[x][rest_rad.encode(&r)].clone());
                }
            }
        }
    }
    let extended = CorrelationBox::from_table(
        backend.clone(),
        inputs,
        outputs.to_vec(),
        base.pairing().to_vec(),
        table,
    )?;
    Ok(InterventionExtension {
        base: base.clone(),
        target: j,
        extended,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{loop_box, validate_box};
    use crate::causal_geometry::{ev, Backend};
    use crate::rational::{int, rat};

    #[test]
    fn extension_satisfies_pre_and_post() {
        let outs: Vec<Event> = (0..3).map(|i| ev(int(1), int(10 * i))).collect();
        let b = loop_box(Backend::minkowski(1), &outs).unwrap();
        let uniform = vec![rat(1, 4); 4];
        let post = vec![vec![uniform.clone()], vec![uniform]];
        let ext = extend_with_intervention(&b, 0, ev(int(0), int(0)), &post).unwrap();
        assert!(ext.check_ppre());
        assert!(ext.check_ppost());
        assert!(validate_box(&ext.extended).is_valid());
        assert_eq!(ext.extended.setting_count(), 3);
        // spacelike intervention point is rejected
        assert!(extend_with_intervention(&b, 0, ev(int(0), int(5)), &post).is_err());
    }
}
