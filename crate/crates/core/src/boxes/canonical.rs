//! Named boxes used throughout the toolkit.

use num_traits::{One, Zero};

use super::{Alphabet, BoxError, CorrelationBox, Srv};
use crate::causal_geometry::{Backend, Event};
use crate::rational::rat;
use crate::Rational;

/// Selector for [`canonical_box`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanonicalBox {
    /// `P(a,b,c) = 1/4` iff `b = a ⊕ c`; outputs at 3 points, no inputs.
    Loop,
    /// `a ⊕ b = x·y` with uniform marginals; inputs at `p1, p2`, outputs at
    /// `q1, q2`.
    Pr,
    /// Compass scenario with the jamming mechanism controlled by `X_m`.
    JamX(Rational),
    /// Compass scenario with the jamming mechanism controlled by `Y_m`.
    JamY(Rational),
}

impl CanonicalBox {
    pub fn parse(name: &str) -> Result<Self, BoxError> {
        let name = name.trim();
        let param = |prefix: &str| -> Option<Result<Rational, BoxError>> {
            let rest = name.strip_prefix(prefix)?;
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            Some(crate::rational::parse_rational(inner).map_err(|e| BoxError::UnknownCanonical(e.to_string())))
        };
        match name {
            "loop_box" => return Ok(CanonicalBox::Loop),
            "pr_box" => return Ok(CanonicalBox::Pr),
            _ => {}
        }
        if let Some(l) = param("jam_mechanism_X") {
            return Ok(CanonicalBox::JamX(l?));
        }
        if let Some(m) = param("jam_mechanism_Y") {
            return Ok(CanonicalBox::JamY(m?));
        }
        Err(BoxError::UnknownCanonical(name.to_string()))
    }
}

/// Locations for a canonical box: inputs then outputs, in declaration order.
pub fn canonical_box(
    which: &CanonicalBox,
    backend: Backend,
    inputs: &[Event],
    outputs: &[Event],
) -> Result<CorrelationBox, BoxError> {
    match which {
        CanonicalBox::Loop => {
            need(inputs, 0, outputs, 3)?;
            loop_box(backend, outputs)
        }
        CanonicalBox::Pr => {
            need(inputs, 2, outputs, 2)?;
            pr_box(backend, inputs, outputs)
        }
        CanonicalBox::JamX(l) => {
            need(inputs, 2, outputs, 3)?;
            jam_mechanism_x(backend, inputs, outputs, l)
        }
        CanonicalBox::JamY(m) => {
            need(inputs, 2, outputs, 3)?;
            jam_mechanism_y(backend, inputs, outputs, m)
        }
    }
}

fn need(inputs: &[Event], ni: usize, outputs: &[Event], no: usize) -> Result<(), BoxError> {
    if inputs.len() != ni || outputs.len() != no {
        return Err(BoxError::Shape(format!(
            "expected {ni} input and {no} output locations, got {} and {}",
            inputs.len(),
            outputs.len()
        )));
    }
    Ok(())
}

fn delta(a: usize, b: usize) -> Rational {
    if a == b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// The observed distribution shared by the one-time-pad, jamming and loop
/// causal models.
pub fn loop_box(backend: Backend, outputs: &[Event]) -> Result<CorrelationBox, BoxError> {
    let outs = ["A", "B", "C"]
        .iter()
        .zip(outputs)
        .map(|(n, l)| Srv::new(*n, Alphabet::binary(), l.clone()))
        .collect();
    CorrelationBox::from_fn(backend, vec![], outs, vec![], |_, a| {
        delta(a[1], a[0] ^ a[2]) * rat(1, 4)
    })
}

/// The Popescu–Rohrlich box, paired `X -> A`, `Y -> B`.
pub fn pr_box(backend: Backend, inputs: &[Event], outputs: &[Event]) -> Result<CorrelationBox, BoxError> {
    let ins = vec![
        Srv::new("X", Alphabet::binary(), inputs[0].clone()),
        Srv::new("Y", Alphabet::binary(), inputs[1].clone()),
    ];
    let outs = vec![
        Srv::new("A", Alphabet::binary(), outputs[0].clone()),
        Srv::new("B", Alphabet::binary(), outputs[1].clone()),
    ];
    CorrelationBox::from_fn(backend, ins, outs, vec![(0, 0), (1, 1)], |x, a| {
        delta(a[0] ^ a[1], x[0] & x[1]) * rat(1, 2)
    })
}

fn compass_variables(inputs: &[Event], outputs: &[Event]) -> (Vec<Srv>, Vec<Srv>) {
    let ins = vec![
        Srv::new("X", Alphabet::binary(), inputs[0].clone()),
        Srv::new("Xm", Alphabet::binary(), inputs[0].clone()),
        Srv::new("Y", Alphabet::binary(), inputs[1].clone()),
        Srv::new("Ym", Alphabet::binary(), inputs[1].clone()),
    ];
    let outs = ["A", "B", "C"]
        .iter()
        .zip(outputs)
        .map(|(n, l)| Srv::new(*n, Alphabet::binary(), l.clone()))
        .collect();
    (ins, outs)
}

/// Compass box whose rows with `X_m = 1` follow
/// `P(a,b,c|x,1,y,y_m) = δ_{a⊕b,x} (λ δ_{x,0} + (1-λ) δ_{x,1}) P(c|·)` with
/// `C` uniform; all other rows are uniform. Rows are normalized exactly
/// when `λ = 1/2`.
pub fn jam_mechanism_x(
    backend: Backend,
    inputs: &[Event],
    outputs: &[Event],
    lambda: &Rational,
) -> Result<CorrelationBox, BoxError> {
    let (ins, outs) = compass_variables(inputs, outputs);
    let lambda = lambda.clone();
    CorrelationBox::from_fn(backend, ins, outs, vec![], move |x, a| {
        let (xv, xm) = (x[0], x[1]);
        if xm == 1 {
            let weight = if xv == 0 {
                lambda.clone()
            } else {
                Rational::one() - &lambda
            };
            delta(a[0] ^ a[1], xv) * weight * rat(1, 2)
        } else {
            rat(1, 8)
        }
    })
}

/// Compass box whose rows with `Y_m = 1` follow
/// `P(a,b,c|x,x_m,y,1) = δ_{b⊕c,y} (μ δ_{y,0} + (1-μ) δ_{y,1}) P(a|·)` with
/// `A` uniform; all other rows are uniform.
pub fn jam_mechanism_y(
    backend: Backend,
    inputs: &[Event],
    outputs: &[Event],
    mu: &Rational,
) -> Result<CorrelationBox, BoxError> {
    let (ins, outs) = compass_variables(inputs, outputs);
    let mu = mu.clone();
    CorrelationBox::from_fn(backend, ins, outs, vec![], move |x, a| {
        let (yv, ym) = (x[2], x[3]);
        if ym == 1 {
            let weight = if yv == 0 { mu.clone() } else { Rational::one() - &mu };
            delta(a[1] ^ a[2], yv) * weight * rat(1, 2)
        } else {
            rat(1, 8)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{marginalize, validate_box};
    use crate::causal_geometry::ev;
    use crate::rational::int;

    fn pts(n: i64) -> Vec<Event> {
        (0..n).map(|i| ev(int(1), int(10 * i))).collect()
    }

    #[test]
    fn loop_box_values_and_marginals() {
        let b = loop_box(Backend::minkowski(1), &pts(3)).unwrap();
        assert_eq!(b.prob(&[], &[0, 0, 0]), &rat(1, 4));
        assert_eq!(b.prob(&[], &[0, 1, 0]), &rat(0, 1));
        for j in 0..3 {
            let m = marginalize(&b, &[j], &[]).unwrap();
            assert_eq!(m.probs, vec![rat(1, 2), rat(1, 2)]);
        }
        assert!(validate_box(&b).is_valid());
    }

    #[test]
    fn pr_box_relation() {
        let ins = vec![ev(int(0), int(0)), ev(int(0), int(10))];
        let outs = vec![ev(int(1), int(0)), ev(int(1), int(10))];
        let b = pr_box(Backend::minkowski(1), &ins, &outs).unwrap();
        assert!(validate_box(&b).is_valid());
        let win: Rational = [[0, 1], [1, 0]].iter().map(|a| b.prob(&[1, 1], a).clone()).sum();
        assert_eq!(win, Rational::one());
    }

    #[test]
    fn jam_x_row_at_one_half() {
        let ins = vec![ev(int(0), int(0)), ev(int(0), int(10))];
        let b = jam_mechanism_x(Backend::minkowski(1), &ins, &pts(3), &rat(1, 2)).unwrap();
        assert!(validate_box(&b).is_valid());
        assert_eq!(b.prob(&[0, 1, 0, 0], &[1, 1, 0]), &rat(1, 4));
        assert_eq!(b.prob(&[0, 1, 0, 0], &[0, 1, 0]), &rat(0, 1));
        let skewed = jam_mechanism_x(Backend::minkowski(1), &ins, &pts(3), &rat(1, 3)).unwrap();
        assert!(!validate_box(&skewed).is_valid());
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            CanonicalBox::parse("jam_mechanism_X(1/2)").unwrap(),
            CanonicalBox::JamX(rat(1, 2))
        );
        assert!(CanonicalBox::parse("mystery").is_err());
    }
}
