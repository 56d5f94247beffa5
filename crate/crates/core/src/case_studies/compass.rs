//! Exact symbolic derivation showing that the two jamming assumptions of
//! the compass scenario contradict its no-signalling equalities.
//!
//! Unknowns are the 128 probabilities `P(a,b,c | x, x_m, y, y_m)`;
//! coefficients are polynomials in the symbols `λ` and `μ`. Every derived
//! equation is rebuilt from its sources by exact linear combination and
//! checked against the expected closed form.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::CaseStudyError;
use crate::boxes::jam_mechanism_x;
use crate::layouts::Preset;
use crate::ons::{named_constraints, ConstraintFamily, ConstraintInstance};
use crate::rational::format_rational;
use crate::Rational;

/// Polynomial in `(λ, μ)`, keyed by exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(BTreeMap<(u32, u32), Rational>);

impl Poly {
    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::default();
        p.add_term((0, 0), c);
        p
    }

    pub fn lambda() -> Self {
        let mut p = Poly::default();
        p.add_term((1, 0), Rational::one());
        p
    }

    pub fn mu() -> Self {
        let mut p = Poly::default();
        p.add_term((0, 1), Rational::one());
        p
    }

    fn add_term(&mut self, k: (u32, u32), c: Rational) {
        let e = self.0.entry(k).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (k, c) in &o.0 {
            r.add_term(*k, c.clone());
        }
        r
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        let mut r = Poly::default();
        for (k, c) in &self.0 {
            r.add_term(*k, c * s);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::default();
        for ((i, j), c) in &self.0 {
            for ((k, l), d) in &o.0 {
                r.add_term((i + k, j + l), c * d);
            }
        }
        r
    }

    pub fn eval(&self, lambda: &Rational, mu: &Rational) -> Rational {
        self.0
            .iter()
            .map(|((i, j), c)| {
                c * num_traits::pow(lambda.clone(), *i as usize) * num_traits::pow(mu.clone(), *j as usize)
            })
            .sum()
    }

    /// The root of `a + b·μ` when the polynomial has that form with `b ≠ 0`.
    pub fn linear_mu_root(&self) -> Option<Rational> {
        if self.0.keys().any(|k| *k != (0, 0) && *k != (0, 1)) {
            return None;
        }
        let b = self.0.get(&(0, 1))?;
        let a = self.0.get(&(0, 0)).cloned().unwrap_or_else(Rational::zero);
        Some(-a / b)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (n, ((i, j), c)) in self.0.iter().enumerate() {
            let mono: String = ["λ".repeat(*i as usize), "μ".repeat(*j as usize)].concat();
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{}", format_rational(&mag))?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{}·{mono}", format_rational(&mag))?,
            }
        }
        Ok(())
    }
}

/// `(setting index, outcome index)` of `P(a,b,c | x, x_m, y, y_m)`, with
/// settings encoded as `x·8 + x_m·4 + y·2 + y_m` and outcomes as
/// `a·4 + b·2 + c`.
type Atom = (usize, usize);

/// An affine expression `Σ coeff·P + constant`, read as `expr = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Expr {
    terms: BTreeMap<Atom, Poly>,
    constant: Poly,
}

impl Expr {
    fn atom(s: usize, o: usize) -> Self {
        let mut e = Expr::default();
        e.terms.insert((s, o), Poly::constant(Rational::one()));
        e
    }

    fn constant(p: Poly) -> Self {
        Expr {
            terms: BTreeMap::new(),
            constant: p,
        }
    }

    fn add(&self, o: &Expr) -> Expr {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            let v = r.terms.entry(*k).or_default().add(c);
            if v.is_zero() {
                r.terms.remove(k);
            } else {
                r.terms.insert(*k, v);
            }
        }
        r.constant = r.constant.add(&o.constant);
        r
    }

    fn times(&self, p: &Poly) -> Expr {
        let mut r = Expr::default();
        for (k, c) in &self.terms {
            let v = c.mul(p);
            if !v.is_zero() {
                r.terms.insert(*k, v);
            }
        }
        r.constant = self.constant.mul(p);
        r
    }

    fn neg(&self) -> Expr {
        self.times(&Poly::constant(-Rational::one()))
    }

    fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    fn sum<I: IntoIterator<Item = Expr>>(it: I) -> Expr {
        it.into_iter().fold(Expr::default(), |acc, e| acc.add(&e))
    }
}

fn setting(x: usize, xm: usize, y: usize, ym: usize) -> usize {
    x * 8 + xm * 4 + y * 2 + ym
}

fn outcome(a: usize, b: usize, c: usize) -> usize {
    a * 4 + b * 2 + c
}

fn delta(a: usize, b: usize) -> Poly {
    Poly::constant(if a == b { Rational::one() } else { Rational::zero() })
}

/// `P(c | s)` as a sum of atoms.
fn c_marginal(s: usize, c: usize) -> Expr {
    Expr::sum((0..4).map(|ab| Expr::atom(s, outcome(ab >> 1, ab & 1, c))))
}

/// `P(a | s)` as a sum of atoms.
fn a_marginal(s: usize, a: usize) -> Expr {
    Expr::sum((0..4).map(|bc| Expr::atom(s, outcome(a, bc >> 1, bc & 1))))
}

fn normalization(s: usize) -> Expr {
    Expr::sum((0..8).map(|o| Expr::atom(s, o))).sub(&Expr::constant(Poly::constant(Rational::one())))
}

/// The first jamming assumption at `(x, x_m = 1, y, y_m)`:
/// `P(a,b,c|x,1,y,y_m) = δ_{a⊕b,x}(λ P(c|0,1,y,y_m) δ_{x,0} + (1-λ) P(c|1,1,y,y_m) δ_{x,1})`.
fn jam_x(x: usize, y: usize, ym: usize, a: usize, b: usize, c: usize) -> Expr {
    let one_minus = Poly::constant(Rational::one()).add(&Poly::lambda().scale(&-Rational::one()));
    let rhs = c_marginal(setting(0, 1, y, ym), c)
        .times(&Poly::lambda().mul(&delta(x, 0)))
        .add(&c_marginal(setting(1, 1, y, ym), c).times(&one_minus.mul(&delta(x, 1))))
        .times(&delta(a ^ b, x));
    Expr::atom(setting(x, 1, y, ym), outcome(a, b, c)).sub(&rhs)
}

/// The second jamming assumption at `(x, x_m, y, y_m = 1)`:
/// `P(a,b,c|x,x_m,y,1) = δ_{b⊕c,y}(μ P(a|x,x_m,0,1) δ_{y,0} + (1-μ) P(a|x,x_m,1,1) δ_{y,1})`.
fn jam_y(x: usize, xm: usize, y: usize, a: usize, b: usize, c: usize) -> Expr {
    let one_minus = Poly::constant(Rational::one()).add(&Poly::mu().scale(&-Rational::one()));
    let rhs = a_marginal(setting(x, xm, 0, 1), a)
        .times(&Poly::mu().mul(&delta(y, 0)))
        .add(&a_marginal(setting(x, xm, 1, 1), a).times(&one_minus.mul(&delta(y, 1))))
        .times(&delta(b ^ c, y));
    Expr::atom(setting(x, xm, y, 1), outcome(a, b, c)).sub(&rhs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub statement: String,
    pub source: String,
    /// Number of scalar equations (one per outcome tuple).
    pub equations: usize,
    /// Rebuilt from its sources and matched against the statement exactly.
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalCondition {
    pub b: usize,
    pub c: usize,
    pub equation: String,
    /// The unique `μ` satisfying the equation.
    #[serde(with = "crate::rational::serde_str")]
    pub mu: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TraceOutcome {
    Contradiction {
        terminal: (TerminalCondition, TerminalCondition),
    },
    Open {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionTrace {
    #[serde(with = "crate::rational::serde_str")]
    pub lambda: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub mu: Rational,
    /// Index into the compass equalities that was withheld, if any.
    pub ablated: Option<usize>,
    pub steps: Vec<TraceStep>,
    pub outcome: TraceOutcome,
}

impl ContradictionTrace {
    pub fn is_contradiction(&self) -> bool {
        matches!(self.outcome, TraceOutcome::Contradiction { .. })
    }
}

const FAMILY_LINES: [&str; 5] = [
    "P(a,b | ·) independent of (y, y_m)",
    "P(b,c | ·) independent of (x, x_m)",
    "P(a | ·) independent of all inputs",
    "P(b | ·) independent of all inputs",
    "P(c | ·) independent of all inputs",
];

/// Finds an available instance relating settings `s0` and `s1` whose
/// outputs include `C`, and returns the `C`-marginal equality it implies.
fn c_marginal_equality<'a>(
    instances: &[(usize, &'a ConstraintInstance)],
    s0: usize,
    s1: usize,
) -> Option<(usize, &'a ConstraintInstance, Vec<Expr>)> {
    let enc = |x: &[usize]| setting(x[0], x[1], x[2], x[3]);
    instances.iter().find_map(|(line, inst)| {
        let pair = (enc(&inst.x), enc(&inst.x_prime));
        if (pair != (s0, s1) && pair != (s1, s0)) || !inst.g.contains(&2) {
            return None;
        }
        // the instance equates G-marginals; summing out the rest of G
        // leaves the C-marginal
        Some((
            *line,
            *inst,
            (0..2).map(|c| c_marginal(s0, c).sub(&c_marginal(s1, c))).collect(),
        ))
    })
}

/// Derives, for rational `λ, μ ∈ [0, 1]`, the chain
/// jam_X at `x = 0` → equal joints at `y = 0, 1` (via the compass family) →
/// `δ_{b⊕c,0} μ = δ_{b⊕c,1}(1 - μ)` for all `b, c`, and the terminal pair
/// `μ = 0` (from `b = c = 0`) and `μ = 1` (from `b = 0, c = 1`).
/// `ablate` withholds one of the five compass equalities.
pub fn compass_contradiction(
    lambda: &Rational,
    mu: &Rational,
    ablate: Option<usize>,
) -> Result<ContradictionTrace, CaseStudyError> {
    let in_unit = |r: &Rational| !r.is_negative() && *r <= Rational::one();
    if !in_unit(lambda) || !in_unit(mu) {
        return Err(CaseStudyError::Parameter("λ and μ must lie in [0, 1]".into()));
    }
    if ablate.is_some_and(|k| k >= FAMILY_LINES.len()) {
        return Err(CaseStudyError::Parameter(format!(
            "ablation index must be below {}",
            FAMILY_LINES.len()
        )));
    }
    let layout = Preset::Compass.layout();
    let ins = layout.input_events();
    let b = jam_mechanism_x(
        layout.backend.clone(),
        &[ins[0].clone(), ins[2].clone()],
        &layout.output_events(),
        lambda,
    )?;
    let family = ConstraintFamily::Compass.equalities();
    let all = named_constraints(ConstraintFamily::Compass, &b)?;
    let available: Vec<(usize, &ConstraintInstance)> = all
        .iter()
        .filter_map(|inst| {
            let line = family.iter().position(|(f, g)| *f == inst.f && *g == inst.g)?;
            (Some(line) != ablate).then_some((line, inst))
        })
        .collect();

    let s0 = setting(0, 1, 0, 1);
    let s1 = setting(0, 1, 1, 1);
    let abc = || (0..8).map(|o| (o >> 2, o >> 1 & 1, o & 1));
    let mut steps = Vec::new();

    // jam_X at x = 0, x_m = 1, y_m = 1
    let e1: Vec<[Expr; 2]> = abc()
        .map(|(a, b, c)| [jam_x(0, 0, 1, a, b, c), jam_x(0, 1, 1, a, b, c)])
        .collect();
    let e1_ok = abc().zip(&e1).all(|((a, b, c), e)| {
        (0..2).all(|y| {
            let s = [s0, s1][y];
            e[y] == Expr::atom(s, outcome(a, b, c)).sub(&c_marginal(s, c).times(&Poly::lambda().mul(&delta(a ^ b, 0))))
        })
    });
    steps.push(TraceStep {
        statement: "P(a,b,c | 0,1,y,1) = δ_{a⊕b,0} · λ · P(c | 0,1,y,1) for y = 0, 1".into(),
        source: "first jamming assumption at x = 0, x_m = 1, y_m = 1".into(),
        equations: 16,
        verified: e1_ok,
    });

    // jam_Y at x = 0, x_m = 1, y = 0 and y = 1
    let e2: Vec<[Expr; 2]> = abc()
        .map(|(a, b, c)| [jam_y(0, 1, 0, a, b, c), jam_y(0, 1, 1, a, b, c)])
        .collect();
    let one_minus_mu = Poly::constant(Rational::one()).add(&Poly::mu().scale(&-Rational::one()));
    let e2_ok = abc().zip(&e2).all(|((a, b, c), e)| {
        e[0] == Expr::atom(s0, outcome(a, b, c)).sub(&a_marginal(s0, a).times(&Poly::mu().mul(&delta(b ^ c, 0))))
            && e[1]
                == Expr::atom(s1, outcome(a, b, c)).sub(&a_marginal(s1, a).times(&one_minus_mu.mul(&delta(b ^ c, 1))))
    });
    steps.push(TraceStep {
        statement:
            "P(a,b,c | 0,1,0,1) = δ_{b⊕c,0}·μ·P(a | 0,1,0,1) and P(a,b,c | 0,1,1,1) = δ_{b⊕c,1}·(1 - μ)·P(a | 0,1,1,1)"
                .into(),
        source: "second jamming assumption at x = 0, x_m = 1".into(),
        equations: 16,
        verified: e2_ok,
    });

    let Some((line, inst, e3)) = c_marginal_equality(&available, s0, s1) else {
        return Ok(ContradictionTrace {
            lambda: lambda.clone(),
            mu: mu.clone(),
            ablated: ablate,
            steps,
            outcome: TraceOutcome::Open {
                reason: "no available equality relates P(c | 0,1,0,1) and P(c | 0,1,1,1), so the two joints cannot be identified".into(),
            },
        });
    };
    steps.push(TraceStep {
        statement: "P(c | 0,1,0,1) = P(c | 0,1,1,1)".into(),
        source: format!("compass equality: {}", FAMILY_LINES[line]),
        equations: 2,
        verified: inst.verify(&b)?,
    });

    // D4 = E1_0 - E1_1 + δ_{a⊕b,0} λ E3(c): leaves P(abc|s0) - P(abc|s1)
    let d4: Vec<Expr> = abc()
        .zip(&e1)
        .map(|((a, b, c), e)| e[0].sub(&e[1]).add(&e3[c].times(&Poly::lambda().mul(&delta(a ^ b, 0)))))
        .collect();
    let d4_ok = abc()
        .zip(&d4)
        .all(|((a, b, c), d)| *d == Expr::atom(s0, outcome(a, b, c)).sub(&Expr::atom(s1, outcome(a, b, c))));
    steps.push(TraceStep {
        statement: "P(a,b,c | 0,1,0,1) = P(a,b,c | 0,1,1,1)".into(),
        source: "steps 1 and 3".into(),
        equations: 8,
        verified: d4_ok,
    });

    // D5 = D4 - E2_0 + E2_1
    let d5: Vec<Expr> = d4.iter().zip(&e2).map(|(d, e)| d.sub(&e[0]).add(&e[1])).collect();
    let d5_ok = abc().zip(&d5).all(|((a, b, c), d)| {
        *d == a_marginal(s0, a)
            .times(&Poly::mu().mul(&delta(b ^ c, 0)))
            .sub(&a_marginal(s1, a).times(&one_minus_mu.mul(&delta(b ^ c, 1))))
    });
    steps.push(TraceStep {
        statement: "δ_{b⊕c,0}·μ·P(a | 0,1,0,1) = δ_{b⊕c,1}·(1 - μ)·P(a | 0,1,1,1)".into(),
        source: "steps 2 and 4".into(),
        equations: 8,
        verified: d5_ok,
    });

    // D6(b, c) = Σ_a D5 - δ_{b⊕c,0} μ N(s0) + δ_{b⊕c,1}(1-μ) N(s1): constant only
    let d6: Vec<((usize, usize), Expr)> = (0..4)
        .map(|bc| {
            let (b, c) = (bc >> 1, bc & 1);
            let summed = Expr::sum((0..2).map(|a| d5[outcome(a, b, c)].clone()));
            let e = summed
                .sub(&normalization(s0).times(&Poly::mu().mul(&delta(b ^ c, 0))))
                .add(&normalization(s1).times(&one_minus_mu.mul(&delta(b ^ c, 1))));
            ((b, c), e)
        })
        .collect();
    let d6_ok = d6.iter().all(|((b, c), e)| {
        e.terms.is_empty()
            && e.constant
                == Poly::mu()
                    .mul(&delta(b ^ c, 0))
                    .add(&one_minus_mu.mul(&delta(b ^ c, 1)).scale(&-Rational::one()))
    });
    steps.push(TraceStep {
        statement: "δ_{b⊕c,0}·μ = δ_{b⊕c,1}·(1 - μ) for all b, c".into(),
        source: "step 5 summed over a, with normalization of both settings".into(),
        equations: 4,
        verified: d6_ok,
    });

    let terminal = |b: usize, c: usize| -> Option<TerminalCondition> {
        let p = &d6.iter().find(|(k, _)| *k == (b, c))?.1.constant;
        let root = p.linear_mu_root()?;
        Some(TerminalCondition {
            b,
            c,
            equation: format!("{p} = 0"),
            mu: root,
        })
    };
    let outcome = match (terminal(0, 0), terminal(0, 1)) {
        (Some(t0), Some(t1)) if t0.mu != t1.mu && steps.iter().all(|s| s.verified) => {
            TraceOutcome::Contradiction { terminal: (t0, t1) }
        }
        _ => TraceOutcome::Open {
            reason: "the derived conditions on μ are jointly satisfiable".into(),
        },
    };
    Ok(ContradictionTrace {
        lambda: lambda.clone(),
        mu: mu.clone(),
        ablated: ablate,
        steps,
        outcome,
    })
}

/// The 25-point grid `{0, 1/4, 1/2, 3/4, 1}²`.
pub fn parameter_grid() -> Vec<(Rational, Rational)> {
    let vals: Vec<Rational> = (0..5).map(|k| Rational::new(k.into(), 4.into())).collect();
    vals.iter()
        .flat_map(|l| vals.iter().map(move |m| (l.clone(), m.clone())))
        .collect()
}

/// Names of the five compass equalities, in display order.
pub fn family_lines() -> &'static [&'static str; 5] {
    &FAMILY_LINES
}
