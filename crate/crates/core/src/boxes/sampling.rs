//! Random boxes for property tests and demonstrations.

use rand::Rng;

use super::{BoxError, CorrelationBox, Radix, Srv};
use crate::causal_geometry::Backend;
use crate::rational::rat;
use crate::Rational;

/// Every row is an independent random distribution with small integer
/// weights; such boxes almost always signal.
pub fn random_table_box<R: Rng + ?Sized>(
    backend: Backend,
    inputs: Vec<Srv>,
    outputs: Vec<Srv>,
    rng: &mut R,
) -> Result<CorrelationBox, BoxError> {
    let no: usize = outputs.iter().map(|o| o.alphabet.radix()).product();
    let ni: usize = inputs.iter().map(|i| i.alphabet.radix()).product();
    let mut table = Vec::with_capacity(ni * no);
    for _ in 0..ni {
        let mut w: Vec<i64> = (0..no).map(|_| rng.gen_range(0..4)).collect();
        if w.iter().all(|&v| v == 0) {
            w[rng.gen_range(0..no)] = 1;
        }
        let total: i64 = w.iter().sum();
        table.extend(w.into_iter().map(|v| rat(v, total)));
    }
    CorrelationBox::from_table(backend, inputs, outputs, vec![], table)
}

/// A mixture of `strategies` deterministic strategies in which each output
/// is a function of the inputs located in its strict causal past only.
/// Such boxes satisfy every operational no-signalling constraint.
pub fn random_causal_box<R: Rng + ?Sized>(
    backend: Backend,
    inputs: Vec<Srv>,
    outputs: Vec<Srv>,
    strategies: usize,
    rng: &mut R,
) -> Result<CorrelationBox, BoxError> {
    let mut past = Vec::new();
    for o in &outputs {
        let mut ps = Vec::new();
        for (i, inp) in inputs.iter().enumerate() {
            if backend.precedes(&inp.location, &o.location)? {
                ps.push(i);
            }
        }
        past.push(ps);
    }
    let irad = Radix::new(inputs.iter().map(|i| i.alphabet.radix()).collect());
    let orad = Radix::new(outputs.iter().map(|o| o.alphabet.radix()).collect());
    let weights: Vec<i64> = (0..strategies.max(1)).map(|_| rng.gen_range(1..4)).collect();
    let total: i64 = weights.iter().sum();
    let mut table = vec![Rational::default(); irad.size() * orad.size()];
    for w in &weights {
        // one response table per output, indexed by its past inputs
        let responses: Vec<Vec<usize>> = past
            .iter()
            .zip(orad.radices())
            .map(|(ps, &k)| {
                let n: usize = ps.iter().map(|&i| irad.radices()[i]).product();
                (0..n).map(|_| rng.gen_range(0..k)).collect()
            })
            .collect();
        for xi in 0..irad.size() {
            let x = irad.decode(xi);
            let a: Vec<usize> = past
                .iter()
                .zip(&responses)
                .map(|(ps, resp)| {
                    let sub = Radix::new(ps.iter().map(|&i| irad.radices()[i]).collect());
                    resp[sub.encode(&ps.iter().map(|&i| x[i]).collect::<Vec<_>>())]
                })
                .collect();
            table[xi * orad.size() + orad.encode(&a)] += rat(*w, total);
        }
    }
    CorrelationBox::from_table(backend, inputs, outputs, vec![], table)
}
