//! Embedding an arbitrary box into the standard scenario `B(n, m, k)`.

use num_traits::Zero;

use super::{CorrelationBox, Radix};
use crate::Rational;

/// A box of the standard scenario: `n` parties, each with `m` settings and
/// `k` outcomes.
///
/// Party `i` owns at most one original input and at most one original
/// output (`None` stands for the empty alphabet, of size 1). Paired
/// variables share a party; unpaired ones get a party of their own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedBox {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Original input index of each party.
    pub party_inputs: Vec<Option<usize>>,
    /// Original output index of each party.
    pub party_outputs: Vec<Option<usize>>,
    /// `m_i`: number of meaningful settings of party `i`.
    pub setting_sizes: Vec<usize>,
    /// `k_i`: number of meaningful outcomes of party `i`.
    pub outcome_sizes: Vec<usize>,
    /// `P(b | y)` over `y ∈ [m]^n`, `b ∈ [k]^n` (0-based, row-major).
    pub table: Vec<Rational>,
}

impl EmbeddedBox {
    pub fn setting_radix(&self) -> Radix {
        Radix::new(vec![self.m; self.n])
    }

    pub fn outcome_radix(&self) -> Radix {
        Radix::new(vec![self.k; self.n])
    }

    pub fn prob(&self, y: &[usize], b: &[usize]) -> &Rational {
        let nb = self.outcome_radix().size();
        &self.table[self.setting_radix().encode(y) * nb + self.outcome_radix().encode(b)]
    }

    /// Whether `(y, b)` lies in the image of the ordering maps.
    pub fn in_support(&self, y: &[usize], b: &[usize]) -> bool {
        (0..self.n).all(|i| y[i] < self.setting_sizes[i] && b[i] < self.outcome_sizes[i])
    }

    /// Recovers the original dense table through the ordering maps.
    pub fn restrict(&self, original: &CorrelationBox) -> Vec<Rational> {
        let xr = original.setting_radix();
        let ar = original.outcome_radix();
        let mut out = Vec::with_capacity(xr.size() * ar.size());
        for x in xr.iter() {
            for a in ar.iter() {
                let (y, b) = self.lift(&x, &a);
                out.push(self.prob(&y, &b).clone());
            }
        }
        out
    }

    fn lift(&self, x: &[usize], a: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let y = self.party_inputs.iter().map(|i| i.map_or(0, |i| x[i])).collect();
        let b = self.party_outputs.iter().map(|j| j.map_or(0, |j| a[j])).collect();
        (y, b)
    }
}

/// Builds the standard-scenario box: entries with some `y_i ≥ m_i` or
/// `b_i ≥ k_i` are 0, all others copy the original probability at the
/// corresponding (identity-ordered) values.
pub fn embed_general(b: &CorrelationBox) -> EmbeddedBox {
    let mut party_inputs = Vec::new();
    let mut party_outputs = Vec::new();
    for &(i, j) in b.pairing() {
        party_inputs.push(Some(i));
        party_outputs.push(Some(j));
    }
    for i in 0..b.inputs().len() {
        if !b.pairing().iter().any(|&(pi, _)| pi == i) {
            party_inputs.push(Some(i));
            party_outputs.push(None);
        }
    }
    for j in 0..b.outputs().len() {
        if !b.pairing().iter().any(|&(_, pj)| pj == j) {
            party_inputs.push(None);
            party_outputs.push(Some(j));
        }
    }
    let setting_sizes: Vec<usize> = party_inputs
        .iter()
        .map(|i| i.map_or(1, |i| b.inputs()[i].alphabet.radix()))
        .collect();
    let outcome_sizes: Vec<usize> = party_outputs
        .iter()
        .map(|j| j.map_or(1, |j| b.outputs()[j].alphabet.radix()))
        .collect();
    let n = party_inputs.len();
    let m = setting_sizes.iter().copied().max().unwrap_or(1);
    let k = outcome_sizes.iter().copied().max().unwrap_or(1);

    let yr = Radix::new(vec![m; n]);
    let br = Radix::new(vec![k; n]);
    let mut table = Vec::with_capacity(yr.size() * br.size());
    for y in yr.iter() {
        for bb in br.iter() {
            let inside = (0..n).all(|i| y[i] < setting_sizes[i] && bb[i] < outcome_sizes[i]);
            if !inside {
                table.push(Rational::zero());
                continue;
            }
            let mut x = vec![0; b.inputs().len()];
            let mut a = vec![0; b.outputs().len()];
            for p in 0..n {
                if let Some(i) = party_inputs[p] {
                    x[i] = y[p];
                }
                if let Some(j) = party_outputs[p] {
                    a[j] = bb[p];
                }
            }
            table.push(b.prob(&x, &a).clone());
        }
    }
    EmbeddedBox {
        n,
        m,
        k,
        party_inputs,
        party_outputs,
        setting_sizes,
        outcome_sizes,
        table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{pr_box, Alphabet, Srv};
    use crate::causal_geometry::{ev, Backend};
    use crate::rational::{int, rat};

    #[test]
    fn mixed_sizes_pad_with_zero() {
        let be = Backend::minkowski(1);
        let ins = vec![
            Srv::new("X1", Alphabet::range(2), ev(int(0), int(0))),
            Srv::new("X2", Alphabet::range(3), ev(int(0), int(10))),
        ];
        let outs = vec![
            Srv::new("A1", Alphabet::range(2), ev(int(1), int(0))),
            Srv::new("A2", Alphabet::range(2), ev(int(1), int(10))),
        ];
        let b = CorrelationBox::from_fn(be, ins, outs, vec![(0, 0), (1, 1)], |_, _| rat(1, 4)).unwrap();
        let e = embed_general(&b);
        assert_eq!((e.n, e.m, e.k), (2, 3, 2));
        assert_eq!(e.prob(&[2, 0], &[0, 0]), &rat(0, 1));
        assert_eq!(e.prob(&[1, 2], &[1, 0]), &rat(1, 4));
        assert_eq!(e.restrict(&b), b.table());
    }

    #[test]
    fn uniform_sizes_identity() {
        let be = Backend::minkowski(1);
        let ins = vec![ev(int(0), int(0)), ev(int(0), int(10))];
        let outs = vec![ev(int(1), int(0)), ev(int(1), int(10))];
        let b = pr_box(be, &ins, &outs).unwrap();
        let e = embed_general(&b);
        assert_eq!(e.table, b.table());
    }
}
