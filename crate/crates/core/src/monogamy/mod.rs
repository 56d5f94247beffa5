//! Monogamy of two-player XOR games shared among three players.
//!
//! A game is a total function `f: [m]×[m] → {0,1}` with uniform inputs;
//! pair `(P, Q)` wins when `o_P ⊕ o_Q = f(i_P, i_Q)`. For three players we
//! study the pairwise games AB (`a⊕b = f(x,y)`), AC (`a⊕c = f(x,z)`) and BC
//! (`b⊕c = f(y,z)`).

mod entropic;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::lp::{ExactLp, LpStatus};
use crate::rational::{int, rat};
use crate::Rational;

pub use entropic::{
    entropic_probe, entropic_sum, jamming_vertex, mutual_information, template_box, ProbeReport, SixConfigPoint,
    BOUND_SLACK,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonogamyError {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("LP solver failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Ons(#[from] crate::ons::OnsError),
}

/// A total-function XOR game with `m` inputs per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorGame {
    #[serde(default)]
    pub name: Option<String>,
    pub m: usize,
    pub f: Vec<Vec<u8>>,
}

impl XorGame {
    pub fn new(m: usize, f: Vec<Vec<u8>>) -> Result<Self, MonogamyError> {
        let g = XorGame { name: None, m, f };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), MonogamyError> {
        if self.m == 0 {
            return Err(MonogamyError::InvalidGame("m must be positive".into()));
        }
        if self.f.len() != self.m || self.f.iter().any(|r| r.len() != self.m) {
            return Err(MonogamyError::InvalidGame(format!("f must be a {0}x{0} table", self.m)));
        }
        if self.f.iter().flatten().any(|&v| v > 1) {
            return Err(MonogamyError::InvalidGame("f must take values in {0, 1}".into()));
        }
        Ok(())
    }

    fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// `f(x, y) = x·y`.
    pub fn chsh() -> Self {
        XorGame::new(2, vec![vec![0, 0], vec![0, 1]]).unwrap().named("chsh")
    }

    /// `f(x, y) = x`: classically winnable by two players.
    pub fn g_cl() -> Self {
        XorGame::new(2, vec![vec![0, 0], vec![1, 1]]).unwrap().named("g_cl")
    }

    pub fn constant(m: usize, v: u8) -> Self {
        XorGame::new(m, vec![vec![v; m]; m]).unwrap()
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "chsh" => Some(Self::chsh()),
            "g_cl" | "gcl" => Some(Self::g_cl()),
            _ => None,
        }
    }

    pub fn f(&self, x: usize, y: usize) -> u8 {
        self.f[x][y]
    }

    /// `(f(x,y), f(y,z), f(x,z))`.
    pub fn pattern(&self, x: usize, y: usize, z: usize) -> (u8, u8, u8) {
        (self.f(x, y), self.f(y, z), self.f(x, z))
    }

    /// Number of pairwise games won by outputs `(a, b, c)` on `(x, y, z)`.
    pub fn triple_score(&self, (x, y, z): (usize, usize, usize), (a, b, c): (u8, u8, u8)) -> u32 {
        u32::from(a ^ b == self.f(x, y)) + u32::from(b ^ c == self.f(y, z)) + u32::from(a ^ c == self.f(x, z))
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let m = self.m;
        (0..m * m * m).map(move |i| (i / (m * m), i / m % m, i % m))
    }
}

/// Triple counts by frustration pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleClassification {
    pub aaa: usize,
    pub acc: usize,
    pub aac: usize,
    pub ccc: usize,
}

pub fn classify(g: &XorGame) -> TripleClassification {
    let mut c = TripleClassification {
        aaa: 0,
        acc: 0,
        aac: 0,
        ccc: 0,
    };
    for (x, y, z) in g.triples() {
        let (p, q, r) = g.pattern(x, y, z);
        match p + q + r {
            3 => c.aaa += 1,
            2 => c.aac += 1,
            1 => c.acc += 1,
            _ => c.ccc += 1,
        }
    }
    c
}

/// Deterministic behavior: outputs `(a, b, c)` for each triple, indexed as
/// [`XorGame::triples`].
pub type Assignment = Vec<(u8, u8, u8)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Deterministic {
        outputs: Assignment,
    },
    Lp {
        #[serde(with = "crate::rational::serde_vec")]
        primal: Vec<Rational>,
        #[serde(with = "crate::rational::serde_vec")]
        dual: Vec<Rational>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameValueReport {
    #[serde(with = "crate::rational::serde_str")]
    pub value: Rational,
    pub witness: Witness,
}

/// `Σ_triples score / m³` of a deterministic behavior.
pub fn evaluate_assignment(g: &XorGame, outputs: &Assignment) -> Rational {
    let total: u32 = g.triples().zip(outputs).map(|(t, &o)| g.triple_score(t, o)).sum();
    m3(g, total)
}

fn m3(g: &XorGame, total: u32) -> Rational {
    let m = g.m as i64;
    rat(total as i64, m * m * m)
}

/// Closed form `2/m³ (|S_AAA| + |S_ACC|) + 3/m³ (|S_CCC| + |S_AAC|)` with a
/// witness: `a = 0, b = f(x,y), c = f(x,z)` wins AB and AC always and BC
/// exactly on frustration-free triples.
pub fn signalling_monogamy(g: &XorGame) -> GameValueReport {
    let c = classify(g);
    let value = m3(g, (2 * (c.aaa + c.acc) + 3 * (c.ccc + c.aac)) as u32);
    let outputs: Assignment = g.triples().map(|(x, y, z)| (0, g.f(x, y), g.f(x, z))).collect();
    debug_assert_eq!(evaluate_assignment(g, &outputs), value);
    GameValueReport {
        value,
        witness: Witness::Deterministic { outputs },
    }
}

fn best_outputs(score: impl Fn((u8, u8, u8)) -> u32) -> ((u8, u8, u8), u32) {
    let mut best = ((0, 0, 0), 0);
    for o in 0..8u8 {
        let out = (o >> 2 & 1, o >> 1 & 1, o & 1);
        let s = score(out);
        if s > best.1 {
            best = (out, s);
        }
    }
    best
}

/// Per-triple maximization over all 8 output triples.
pub fn brute_force_signalling(g: &XorGame) -> GameValueReport {
    let mut total = 0;
    let mut outputs = Vec::new();
    for t in g.triples() {
        let (o, s) = best_outputs(|o| g.triple_score(t, o));
        total += s;
        outputs.push(o);
    }
    GameValueReport {
        value: m3(g, total),
        witness: Witness::Deterministic { outputs },
    }
}

fn specific_score(g: &XorGame, fixed: (usize, usize, usize), t: (usize, usize, usize), (a, b, c): (u8, u8, u8)) -> u32 {
    let (x0, y0, z0) = fixed;
    let (x, y, z) = t;
    u32::from(z == z0 && a ^ b == g.f(x, y))
        + u32::from(y == y0 && a ^ c == g.f(x, z))
        + u32::from(x == x0 && b ^ c == g.f(y, z))
}

/// `ω(G_AB)|_{z=z₀} + ω(G_AC)|_{y=y₀} + ω(G_BC)|_{x=x₀}` of a deterministic
/// behavior.
pub fn evaluate_specific(g: &XorGame, fixed: (usize, usize, usize), outputs: &Assignment) -> Rational {
    let total: u32 = g
        .triples()
        .zip(outputs)
        .map(|(t, &o)| specific_score(g, fixed, t, o))
        .sum();
    let m = g.m as i64;
    rat(total as i64, m * m)
}

/// Maximum over deterministic signalling behaviors of the specific-input
/// sum, by per-triple enumeration. `None` gives the averaged value.
pub fn specific_input_value(g: &XorGame, fixed: Option<(usize, usize, usize)>) -> GameValueReport {
    let Some(fixed) = fixed else {
        return brute_force_signalling(g);
    };
    let mut outputs = Vec::new();
    for t in g.triples() {
        let (o, _) = best_outputs(|o| specific_score(g, fixed, t, o));
        outputs.push(o);
    }
    GameValueReport {
        value: evaluate_specific(g, fixed, &outputs),
        witness: Witness::Deterministic { outputs },
    }
}

/// Pairwise game selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pair {
    AB,
    AC,
    BC,
}

/// Index of `P(a,b,c|x,y,z)` in the LP variable vector.
pub fn var_index(m: usize, (x, y, z): (usize, usize, usize), (a, b, c): (usize, usize, usize)) -> usize {
    ((((x * m + y) * m + z) * 2 + a) * 2 + b) * 2 + c
}

/// The tripartite no-signalling polytope as equality rows `A p = b`:
/// normalization per setting, and each pair's marginal independent of the
/// third player's input.
pub fn ns_constraints(m: usize) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let nv = 8 * m * m * m;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let triples: Vec<(usize, usize, usize)> = (0..m * m * m).map(|i| (i / (m * m), i / m % m, i % m)).collect();
    for &t in &triples {
        let mut row = vec![Rational::zero(); nv];
        for o in 0..8 {
            row[var_index(m, t, (o >> 2 & 1, o >> 1 & 1, o & 1))] = Rational::one();
        }
        rows.push(row);
        rhs.push(Rational::one());
    }
    // pair marginal (outputs kept, summed output position) independent of
    // the third input
    for pair in [Pair::AB, Pair::AC, Pair::BC] {
        for &(x, y, z) in &triples {
            let third = match pair {
                Pair::AB => z,
                Pair::AC => y,
                Pair::BC => x,
            };
            if third == 0 {
                continue;
            }
            let base = match pair {
                Pair::AB => (x, y, 0),
                Pair::AC => (x, 0, z),
                Pair::BC => (0, y, z),
            };
            for u in 0..2 {
                for v in 0..2 {
                    let mut row = vec![Rational::zero(); nv];
                    for s in 0..2 {
                        let out = match pair {
                            Pair::AB => (u, v, s),
                            Pair::AC => (u, s, v),
                            Pair::BC => (s, u, v),
                        };
                        row[var_index(m, (x, y, z), out)] += Rational::one();
                        row[var_index(m, base, out)] -= Rational::one();
                    }
                    rows.push(row);
                    rhs.push(Rational::zero());
                }
            }
        }
    }
    (rows, rhs)
}

/// Objective coefficients of `Σ_pairs ω(G_pair)` (averaged over the third
/// player's input).
pub fn pair_objective(g: &XorGame, pairs: &[Pair]) -> Vec<Rational> {
    let m = g.m;
    let w = rat(1, (m * m * m) as i64);
    let mut c = vec![Rational::zero(); 8 * m * m * m];
    for (x, y, z) in g.triples() {
        for o in 0..8usize {
            let (a, b, cc) = ((o >> 2 & 1) as u8, (o >> 1 & 1) as u8, (o & 1) as u8);
            let mut wins = 0;
            for p in pairs {
                wins += match p {
                    Pair::AB => u32::from(a ^ b == g.f(x, y)),
                    Pair::AC => u32::from(a ^ cc == g.f(x, z)),
                    Pair::BC => u32::from(b ^ cc == g.f(y, z)),
                };
            }
            c[var_index(m, (x, y, z), (a.into(), b.into(), cc.into()))] = &w * int(wins as i64);
        }
    }
    c
}

/// Exact maximum of the given pair objective over tripartite NS boxes.
pub fn ns_value(g: &XorGame, pairs: &[Pair]) -> Result<GameValueReport, MonogamyError> {
    let (a, b) = ns_constraints(g.m);
    let lp = ExactLp::new(pair_objective(g, pairs), a, b).map_err(|e| MonogamyError::Internal(e.to_string()))?;
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(MonogamyError::Internal(format!("unexpected status {:?}", sol.status)));
    }
    if !lp.is_feasible(&sol.x) || !lp.certifies(&sol.dual, &sol.value) {
        return Err(MonogamyError::Internal("optimality certificate failed".into()));
    }
    Ok(GameValueReport {
        value: sol.value,
        witness: Witness::Lp {
            primal: sol.x,
            dual: sol.dual,
        },
    })
}

/// `max ω(G_AB) + ω(G_AC)` over tripartite NS boxes.
pub fn ns_monogamy_lp(g: &XorGame) -> Result<GameValueReport, MonogamyError> {
    ns_value(g, &[Pair::AB, Pair::AC])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify(&XorGame::chsh()),
            TripleClassification {
                aaa: 1,
                acc: 3,
                aac: 0,
                ccc: 4
            }
        );
        assert_eq!(
            classify(&XorGame::g_cl()),
            TripleClassification {
                aaa: 2,
                acc: 2,
                aac: 2,
                ccc: 2
            }
        );
        let z = XorGame::constant(3, 0);
        assert_eq!(classify(&z).ccc, 27);
    }

    #[test]
    fn signalling_values() {
        assert_eq!(signalling_monogamy(&XorGame::chsh()).value, rat(5, 2));
        assert_eq!(signalling_monogamy(&XorGame::g_cl()).value, rat(5, 2));
        assert_eq!(signalling_monogamy(&XorGame::constant(2, 0)).value, int(3));
        assert_eq!(brute_force_signalling(&XorGame::chsh()).value, rat(5, 2));
        let frustrated = XorGame::constant(1, 1);
        assert_eq!(brute_force_signalling(&frustrated).value, int(2));
    }

    #[test]
    fn specific_inputs() {
        let g = XorGame::chsh();
        assert_eq!(specific_input_value(&g, Some((0, 0, 0))).value, int(3));
        // the displayed optimal behavior, triples in (x, y, z) order
        let explicit: Assignment = vec![
            (0, 0, 0), // 000
            (0, 0, 0), // 001
            (0, 0, 0), // 010
            (0, 0, 1), // 011
            (1, 1, 1), // 100
            (1, 1, 0), // 101
            (1, 0, 1), // 110
            (1, 1, 1), // 111
        ];
        assert_eq!(evaluate_specific(&g, (0, 0, 0), &explicit), int(3));
        assert_eq!(specific_input_value(&g, None).value, rat(5, 2));
    }

    #[test]
    fn ns_lp_values() {
        let g = XorGame::chsh();
        let r = ns_monogamy_lp(&g).unwrap();
        assert_eq!(r.value, rat(3, 2));
        assert_eq!(ns_value(&g, &[Pair::AB]).unwrap().value, int(1));
        // all-zero deterministic strategy is NS and reaches 3/4 + 3/4
        let mut p = vec![Rational::zero(); 64];
        for t in g.triples() {
            p[var_index(2, t, (0, 0, 0))] = Rational::one();
        }
        let (a, b) = ns_constraints(2);
        let lp = ExactLp::new(pair_objective(&g, &[Pair::AB, Pair::AC]), a, b).unwrap();
        assert!(lp.is_feasible(&p));
        assert_eq!(lp.objective_at(&p), rat(3, 2));
    }
}
