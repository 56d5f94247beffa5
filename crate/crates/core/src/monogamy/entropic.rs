//! Numerical probe of the entropic bound `I(AB:Z) + I(AC:Y) + I(BC:X) ≤ 1`
//! over the six-configuration constraint polytope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{var_index, MonogamyError};
use crate::boxes::CorrelationBox;
use crate::lp::{FloatLp, LpStatus};
use crate::ons::{named_constraints, ConstraintFamily};
use crate::rational::rat;

/// A behavior `P(a,b,c|x,y,z)` over binary variables, indexed by
/// [`var_index`] with `m = 2`.
pub type SixConfigPoint = Vec<f64>;

/// Slack allowed above the bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// Variables of the joint distribution, in bit order.
const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const X: usize = 3;
const Y: usize = 4;
const Z: usize = 5;

fn joint(p: &SixConfigPoint) -> [f64; 64] {
    // joint over (a, b, c, x, y, z) with uniform inputs
    let mut j = [0.0; 64];
    for s in 0..8 {
        let (x, y, z) = (s >> 2 & 1, s >> 1 & 1, s & 1);
        for o in 0..8 {
            let (a, b, c) = (o >> 2 & 1, o >> 1 & 1, o & 1);
            let bits = [a, b, c, x, y, z];
            let idx = bits.iter().enumerate().fold(0, |acc, (k, &v)| acc | v << k);
            j[idx] = p[var_index(2, (x, y, z), (a, b, c))] / 8.0;
        }
    }
    j
}

fn entropy(j: &[f64; 64], vars: &[usize]) -> f64 {
    let mut marg = vec![0.0; 1 << vars.len()];
    for (idx, &p) in j.iter().enumerate() {
        let k = vars
            .iter()
            .enumerate()
            .fold(0, |acc, (pos, &v)| acc | (idx >> v & 1) << pos);
        marg[k] += p;
    }
    marg.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// `I(L:R) = H(L) + H(R) - H(LR)` in bits, with uniform inputs.
pub fn mutual_information(p: &SixConfigPoint, left: &[usize], right: &[usize]) -> f64 {
    let j = joint(p);
    let both: Vec<usize> = left.iter().chain(right).copied().collect();
    entropy(&j, left) + entropy(&j, right) - entropy(&j, &both)
}

/// `I(AB:Z) + I(AC:Y) + I(BC:X)`.
pub fn entropic_sum(p: &SixConfigPoint) -> f64 {
    mutual_information(p, &[A, B], &[Z]) + mutual_information(p, &[A, C], &[Y]) + mutual_information(p, &[B, C], &[X])
}

fn mi_sane(p: &SixConfigPoint) -> bool {
    let j = joint(p);
    [([A, B], Z), ([A, C], Y), ([B, C], X)].iter().all(|(l, r)| {
        let i = mutual_information(p, l, &[*r]);
        i >= -1e-12 && i <= entropy(&j, l).min(entropy(&j, &[*r])) + 1e-12
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub samples: usize,
    pub local_steps: usize,
    /// Value at the jamming vertex `Z = A ⊕ B`.
    pub vertex_value: f64,
    pub max_found: f64,
    pub bound: f64,
    pub within_bound: bool,
    /// Largest constraint residual over all evaluated points.
    pub max_constraint_residual: f64,
    /// Mutual-information sanity (`0 ≤ I ≤ min H`) held at every point.
    pub mutual_information_sane: bool,
}

/// The jamming behavior: `A`, `C` uniform, `B = A ⊕ Z`.
pub fn jamming_vertex() -> SixConfigPoint {
    let mut p = vec![0.0; 64];
    for s in 0..8 {
        let (x, y, z) = (s >> 2 & 1, s >> 1 & 1, s & 1);
        for a in 0..2 {
            for c in 0..2 {
                p[var_index(2, (x, y, z), (a, a ^ z, c))] = 0.25;
            }
        }
    }
    p
}

/// Relabeling of a point that cycles the roles so each jammer gets a vertex.
fn rotate(p: &SixConfigPoint) -> SixConfigPoint {
    // (A, B, C; X, Y, Z) -> (B, C, A; Y, Z, X) keeps the constraint family
    let mut q = vec![0.0; 64];
    for s in 0..8 {
        let (x, y, z) = (s >> 2 & 1, s >> 1 & 1, s & 1);
        for o in 0..8 {
            let (a, b, c) = (o >> 2 & 1, o >> 1 & 1, o & 1);
            q[var_index(2, (y, z, x), (b, c, a))] = p[var_index(2, (x, y, z), (a, b, c))];
        }
    }
    q
}

fn constraint_rows(b: &CorrelationBox) -> Result<Vec<Vec<f64>>, MonogamyError> {
    let inst = named_constraints(ConstraintFamily::SixConfigTriangle, b)?;
    let orad = b.outcome_radix();
    let xrad = b.setting_radix();
    let mut rows = Vec::new();
    for c in &inst {
        let gr = crate::boxes::Radix::new(c.g.iter().map(|&j| orad.radices()[j]).collect());
        for ag in gr.iter() {
            let mut row = vec![0.0; 64];
            for ai in 0..orad.size() {
                let a = orad.decode(ai);
                if c.g.iter().zip(&ag).all(|(&j, &v)| a[j] == v) {
                    row[xrad.encode(&c.x) * 8 + ai] += 1.0;
                    row[xrad.encode(&c.x_prime) * 8 + ai] -= 1.0;
                }
            }
            rows.push(row);
        }
    }
    for s in 0..8 {
        let mut row = vec![0.0; 64];
        for v in row.iter_mut().skip(s * 8).take(8) {
            *v = 1.0;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn residual(rows: &[Vec<f64>], p: &SixConfigPoint) -> f64 {
    let n = rows.len();
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let rhs = if i + 8 >= n { 1.0 } else { 0.0 };
            let lhs: f64 = r.iter().zip(p).map(|(a, b)| a * b).sum();
            (lhs - rhs).abs()
        })
        .chain(p.iter().map(|v| (-v).max(0.0)))
        .fold(0.0, f64::max)
}

/// Probes the bound at the jamming vertex, at `samples` random points of
/// the polytope (convex combinations of LP vertices) and along
/// `local_steps` hill-climbing moves. `layout_box` fixes the geometry and
/// must generate the six-configuration family.
pub fn entropic_probe(
    layout_box: &CorrelationBox,
    samples: usize,
    seed: u64,
    local_steps: usize,
) -> Result<ProbeReport, MonogamyError> {
    let rows = constraint_rows(layout_box)?;
    let n_rows = rows.len();
    let rhs: Vec<f64> = (0..n_rows).map(|i| if i + 8 >= n_rows { 1.0 } else { 0.0 }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let v0 = jamming_vertex();
    let v1 = rotate(&v0);
    let v2 = rotate(&v1);
    let mut pool = vec![v0.clone(), v1, v2];
    for _ in 0..48 {
        let obj: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lp = FloatLp::new(obj, rows.clone(), rhs.clone()).map_err(|e| MonogamyError::Internal(e.to_string()))?;
        let sol = lp.solve();
        if sol.status == LpStatus::Optimal {
            pool.push(sol.x.iter().map(|v| v.max(0.0)).collect());
        }
    }

    let vertex_value = entropic_sum(&v0);
    let mut max_found = vertex_value;
    let mut best = v0.clone();
    let mut max_res = residual(&rows, &v0);
    let mut sane = mi_sane(&v0);
    let mut consider = |p: &SixConfigPoint, max_found: &mut f64, best: &mut SixConfigPoint| -> f64 {
        max_res = max_res.max(residual(&rows, p));
        sane &= mi_sane(p);
        let v = entropic_sum(p);
        if v > *max_found {
            *max_found = v;
            *best = p.clone();
        }
        v
    };

    for _ in 0..samples {
        let k = rng.gen_range(1..=4);
        let mut w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        let mut p = vec![0.0; 64];
        for wi in &w {
            let v = &pool[rng.gen_range(0..pool.len())];
            for (pi, vi) in p.iter_mut().zip(v) {
                *pi += wi * vi;
            }
        }
        consider(&p, &mut max_found, &mut best);
    }

    let mut current = best.clone();
    let mut current_val = entropic_sum(&current);
    for _ in 0..local_steps {
        let eps: f64 = rng.gen_range(0.0..0.5);
        let v = &pool[rng.gen_range(0..pool.len())];
        let cand: SixConfigPoint = current
            .iter()
            .zip(v)
            .map(|(c, vi)| (1.0 - eps) * c + eps * vi)
            .collect();
        let val = consider(&cand, &mut max_found, &mut best);
        if val > current_val {
            current = cand;
            current_val = val;
        }
    }

    let bound = 1.0;
    Ok(ProbeReport {
        seed,
        samples,
        local_steps,
        vertex_value,
        max_found,
        bound,
        within_bound: max_found <= bound + BOUND_SLACK,
        max_constraint_residual: max_res,
        mutual_information_sane: sane,
    })
}

/// Six-configuration template box (uniform table) on the given layout.
pub fn template_box(layout: &crate::layouts::Layout) -> Result<CorrelationBox, MonogamyError> {
    CorrelationBox::from_fn(
        layout.backend.clone(),
        layout.binary_inputs(),
        layout.binary_outputs(),
        vec![],
        |_, _| rat(1, 8),
    )
    .map_err(|e| MonogamyError::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layouts::Preset;

    #[test]
    fn vertex_and_uniform() {
        assert!((entropic_sum(&jamming_vertex()) - 1.0).abs() < 1e-12);
        assert!(entropic_sum(&vec![0.125; 64]).abs() < 1e-12);
    }

    #[test]
    fn probe_respects_bound() {
        let b = template_box(&Preset::SixConfig.layout()).unwrap();
        let r = entropic_probe(&b, 500, 7, 200).unwrap();
        assert!(r.within_bound, "{r:?}");
        assert!((r.vertex_value - 1.0).abs() < 1e-12);
        assert!(r.max_constraint_residual < 1e-9);
        assert!(r.mutual_information_sane);
    }
}
