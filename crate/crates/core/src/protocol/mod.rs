//! Turning a violated operational no-signalling constraint into an explicit
//! superluminal signalling protocol, simulating it, and closing it into a
//! causal loop where the geometry allows.
//!
//! A violation changes the inputs in `F` all at once. Walking from `x` to
//! `x′` one coordinate at a time (in the listed order of `F`) produces a
//! hybrid list whose end points have different `G`-marginals, so some
//! adjacent pair differs too. That pair changes a single input `i_k`, and
//! since `q^G` has a gathering point outside the future of every `p_i`,
//! `i ∈ F`, the sender at `p_{i_k}` can signal to that gathering point.

mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boxes::{marginal_of_row, BoxError, CorrelationBox};
use crate::causal_geometry::{
    find_loop_transform, operationally_separated, strictly_precedes, Backend, Event, GeometryError, LoopTransform,
};
use crate::ons::{nonempty_subsets, separation_table, OnsError, ViolationReport};
use crate::rational::{format_rational, to_f64};
use crate::Rational;

pub use stats::{homogeneity_test, HomogeneityTest, TestMethod, MONTE_CARLO_RESAMPLES};

/// Default significance level of the homogeneity test.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Ons(#[from] OnsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// The first unequal adjacent pair of the hybrid list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridStep {
    /// 1-based position of the step within `F`.
    pub k: usize,
    /// Input index `i_k` changed by the step.
    pub input: usize,
    pub before: Vec<usize>,
    pub after: Vec<usize>,
}

/// The hybrid list `x = h_0, h_1, …, h_r = x′`, where `h_k` takes the first
/// `k` coordinates of `F` from `x′`.
pub fn hybrid_list(f: &[usize], x: &[usize], x_prime: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![x.to_vec()];
    let mut h = x.to_vec();
    for &i in f {
        h[i] = x_prime[i];
        out.push(h.clone());
    }
    out
}

fn g_marginal(b: &CorrelationBox, g: &[usize], x: &[usize]) -> Vec<Rational> {
    marginal_of_row(b.row(b.setting_radix().encode(x)), &b.outcome_radix(), g).probs
}

fn check_violation(b: &CorrelationBox, v: &ViolationReport) -> Result<(), ProtocolError> {
    let c = &v.instance;
    if !c.verify(b)? {
        return Err(ProtocolError::PreconditionViolated(
            "the instance or its separation certificate does not verify".into(),
        ));
    }
    if g_marginal(b, &c.g, &c.x) == g_marginal(b, &c.g, &c.x_prime) {
        return Err(ProtocolError::PreconditionViolated(
            "the G-marginals at x and x′ coincide".into(),
        ));
    }
    Ok(())
}

/// Finds the first hybrid step whose `G`-marginals differ.
pub fn hybrid_localize(b: &CorrelationBox, v: &ViolationReport) -> Result<HybridStep, ProtocolError> {
    check_violation(b, v)?;
    let c = &v.instance;
    let hs = hybrid_list(&c.f, &c.x, &c.x_prime);
    for (k, w) in hs.windows(2).enumerate() {
        if g_marginal(b, &c.g, &w[0]) != g_marginal(b, &c.g, &w[1]) {
            return Ok(HybridStep {
                k: k + 1,
                input: c.f[k],
                before: w[0].clone(),
                after: w[1].clone(),
            });
        }
    }
    unreachable!("end points differ, so some adjacent pair differs")
}

/// An exact receiver distribution over `a^G`, in mixed-radix order of `G`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverDistribution {
    /// Sender value producing this distribution (alphabet label).
    pub sender_value: String,
    #[serde(with = "crate::rational::serde_vec")]
    pub probs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignallingProtocol {
    /// Sender input index `i_k`.
    pub sender: usize,
    pub sender_name: String,
    pub sender_location: Event,
    /// Alphabet indices of the two sender values.
    pub values: (usize, usize),
    /// Full setting with the sender at its first value; every other input
    /// stays frozen at these values.
    pub context: Vec<usize>,
    pub context_key: String,
    pub receivers: Vec<usize>,
    pub receiver_names: Vec<String>,
    /// Outcome labels in the order of `distributions[*].probs`.
    pub receiver_outcomes: Vec<String>,
    pub gathering: Event,
    pub distributions: [ReceiverDistribution; 2],
    pub step: HybridStep,
}

impl SignallingProtocol {
    /// The setting with the sender at value `which` (0 or 1).
    pub fn setting(&self, which: usize) -> Vec<usize> {
        let mut x = self.context.clone();
        x[self.sender] = if which == 0 { self.values.0 } else { self.values.1 };
        x
    }

    /// Exact total-variation distance between the two receiver
    /// distributions.
    pub fn exact_tv(&self) -> Rational {
        let [d0, d1] = &self.distributions;
        let s: Rational = d0
            .probs
            .iter()
            .zip(&d1.probs)
            .map(|(p, q)| crate::rational::rational_abs(&(p - q)))
            .sum();
        s / crate::rational::int(2)
    }

    /// Re-verifies the stored invariants against the box.
    pub fn verify(&self, b: &CorrelationBox) -> Result<bool, ProtocolError> {
        let backend = b.backend();
        let p = &b.inputs()[self.sender].location;
        let gathers = self
            .receivers
            .iter()
            .map(|&j| backend.precedes_eq(&b.outputs()[j].location, &self.gathering))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|v| v);
        let open = !backend.precedes(p, &self.gathering)?;
        let d0 = g_marginal(b, &self.receivers, &self.setting(0));
        let d1 = g_marginal(b, &self.receivers, &self.setting(1));
        Ok(gathers && open && d0 != d1 && d0 == self.distributions[0].probs && d1 == self.distributions[1].probs)
    }
}

fn gathering_for(b: &CorrelationBox, v: &ViolationReport, sender: usize) -> Result<Event, ProtocolError> {
    let backend = b.backend();
    let qs: Vec<Event> = v.instance.g.iter().map(|&j| b.outputs()[j].location.clone()).collect();
    let p = b.inputs()[sender].location.clone();
    // the instance's gathering point avoids every sender in F, so in
    // particular p_{i_k}
    if let Some(q) = v.instance.certificate.gathering_point() {
        if !backend.precedes(&p, q)? && qs.iter().all(|qj| backend.precedes_eq(qj, q).unwrap_or(false)) {
            return Ok(q.clone());
        }
    }
    let verdict = operationally_separated(backend, &qs, std::slice::from_ref(&p))?;
    match verdict.gathering_point() {
        Some(q) if verdict.is_separated() => Ok(q.clone()),
        _ if verdict.is_unknown() => Err(OnsError::UndecidableScenario {
            pairs: vec![(vec![sender], v.instance.g.clone())],
        }
        .into()),
        _ => Err(ProtocolError::PreconditionViolated(
            "receivers are not separated from the localized sender".into(),
        )),
    }
}

/// Builds the single-sender protocol for a violation.
pub fn build_protocol(b: &CorrelationBox, v: &ViolationReport) -> Result<SignallingProtocol, ProtocolError> {
    let step = hybrid_localize(b, v)?;
    let sender = step.input;
    let gathering = gathering_for(b, v, sender)?;
    let g = v.instance.g.clone();
    let alphabet = &b.inputs()[sender].alphabet;
    let orad = b.outcome_radix();
    let grad = crate::boxes::Radix::new(g.iter().map(|&j| orad.radices()[j]).collect());
    let receiver_outcomes = grad
        .iter()
        .map(|a| {
            a.iter()
                .zip(&g)
                .map(|(&v, &j)| b.outputs()[j].alphabet.label(v).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let dist = |x: &[usize]| ReceiverDistribution {
        sender_value: alphabet.label(x[sender]).to_string(),
        probs: g_marginal(b, &g, x),
    };
    let protocol = SignallingProtocol {
        sender,
        sender_name: b.inputs()[sender].name.clone(),
        sender_location: b.inputs()[sender].location.clone(),
        values: (step.before[sender], step.after[sender]),
        context: step.before.clone(),
        context_key: b.setting_key(&step.before),
        receiver_names: g.iter().map(|&j| b.outputs()[j].name.clone()).collect(),
        distributions: [dist(&step.before), dist(&step.after)],
        receivers: g.clone(),
        receiver_outcomes,
        gathering,
        step,
    };
    debug_assert!(protocol.verify(b).unwrap_or(false));
    Ok(protocol)
}

/// Builds a protocol for every separated `(F, G)`, every setting pair that
/// differs only inside `F` and every unequal hybrid step. Empty exactly when
/// the box satisfies all operational no-signalling constraints.
pub fn exhaustive_protocol_search(b: &CorrelationBox) -> Result<Vec<SignallingProtocol>, ProtocolError> {
    let table = separation_table(b)?;
    let undecided: Vec<_> = table
        .iter()
        .filter(|(_, v)| v.is_unknown())
        .map(|(k, _)| k.clone())
        .collect();
    if !undecided.is_empty() {
        return Err(OnsError::UndecidableScenario { pairs: undecided }.into());
    }
    let radix = b.setting_radix();
    let mut out = Vec::new();
    for ((f, g), verdict) in table.iter().filter(|(_, v)| v.is_separated()) {
        for xi in 0..radix.size() {
            let x = radix.decode(xi);
            for xpi in xi + 1..radix.size() {
                let xp = radix.decode(xpi);
                if (0..x.len()).any(|i| !f.contains(&i) && x[i] != xp[i]) {
                    continue;
                }
                let hs = hybrid_list(f, &x, &xp);
                for (k, w) in hs.windows(2).enumerate() {
                    if g_marginal(b, g, &w[0]) == g_marginal(b, g, &w[1]) {
                        continue;
                    }
                    // localize on the adjacent pair itself
                    let v = ViolationReport {
                        instance: crate::ons::ConstraintInstance {
                            f: vec![f[k]],
                            g: g.clone(),
                            certificate: verdict.clone(),
                            x: w[0].clone(),
                            x_prime: w[1].clone(),
                        },
                        a: vec![],
                        p1: Rational::default(),
                        p2: Rational::default(),
                        difference: Rational::default(),
                    };
                    out.push(build_protocol(b, &v)?);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Counts over `a^G` per sender value.
    pub counts: [Vec<u64>; 2],
    /// Empirical frequencies per sender value.
    pub frequencies: [Vec<f64>; 2],
    pub empirical_tv: f64,
    pub exact_tv: f64,
    pub test: HomogeneityTest,
    /// Whether equality of the two receiver distributions is rejected.
    pub reject_null: bool,
}

fn sample_index(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let u: f64 = rng.gen::<f64>() * cumulative.last().copied().unwrap_or(1.0);
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// Samples the box `trials` times at each sender value under the frozen
/// context, keeps the outcomes of `G` as gathered at `Q`, and tests whether
/// the two empirical distributions differ. Trial `t` draws from its own
/// stream `(seed, t)`, so results do not depend on evaluation order.
pub fn simulate(
    protocol: &SignallingProtocol,
    b: &CorrelationBox,
    trials: usize,
    seed: u64,
    alpha: f64,
) -> Result<SimulationResult, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::PreconditionViolated("trials must be at least 1".into()));
    }
    let orad = b.outcome_radix();
    let gsizes: Vec<usize> = protocol.receivers.iter().map(|&j| orad.radices()[j]).collect();
    let grad = crate::boxes::Radix::new(gsizes);
    let mut counts = [vec![0u64; grad.size()], vec![0u64; grad.size()]];
    let cumulative: Vec<Vec<f64>> = (0..2)
        .map(|w| {
            let row = b.row(b.setting_radix().encode(&protocol.setting(w)));
            row.iter()
                .scan(0.0, |acc, p| {
                    *acc += to_f64(p);
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        for (w, c) in counts.iter_mut().enumerate() {
            let a = orad.decode(sample_index(&mut rng, &cumulative[w]));
            let ag: Vec<usize> = protocol.receivers.iter().map(|&j| a[j]).collect();
            c[grad.encode(&ag)] += 1;
        }
    }
    let frequencies = counts
        .clone()
        .map(|c| c.iter().map(|&k| k as f64 / trials as f64).collect::<Vec<_>>());
    let empirical_tv = frequencies[0]
        .iter()
        .zip(&frequencies[1])
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
        / 2.0;
    let test = homogeneity_test(&counts[0], &counts[1], seed);
    Ok(SimulationResult {
        trials,
        seed,
        alpha,
        reject_null: test.p_value < alpha,
        counts,
        frequencies,
        empirical_tv,
        exact_tv: to_f64(&protocol.exact_tv()),
        test,
    })
}

/// One relation of the loop, machine-verified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopLeg {
    pub description: String,
    pub from: Event,
    pub to: Event,
    /// `channel`: `from ⊀ to` (signalled by the protocol); `relay`:
    /// `from ≺ to` (ordinary subluminal transport).
    pub kind: LegKind,
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegKind {
    Channel,
    Relay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LoopOutcome {
    Certificate {
        protocol: Box<SignallingProtocol>,
        transform: LoopTransform,
        legs: Vec<LoopLeg>,
        narrative: String,
    },
    Obstruction {
        protocol: Box<SignallingProtocol>,
        reason: String,
    },
}

impl LoopOutcome {
    pub fn is_certificate(&self) -> bool {
        matches!(self, LoopOutcome::Certificate { .. })
    }
}

/// Closes the protocol of the first violation into a causal loop: the
/// protocol signals `p ⇝ Q`, a relay carries the result to `L(p)`, the
/// transformed protocol signals `L(p) ⇝ L(Q)`, and a relay returns to `p`.
/// The sender's free choice at `p` would then be determined by its own
/// outcome, so either the selection is paradoxical or the box is not
/// reproducible at transformed locations.
pub fn loop_paradox_certificate(
    b: &CorrelationBox,
    violations: &[ViolationReport],
    allow_reflection: bool,
) -> Result<LoopOutcome, ProtocolError> {
    let Some(v) = violations.first() else {
        return Err(ProtocolError::PreconditionViolated(
            "no violation: the box satisfies every constraint".into(),
        ));
    };
    let backend = b.backend();
    if !matches!(backend, Backend::Minkowski { .. }) {
        return Err(ProtocolError::PreconditionViolated(
            "loop certificates need a Minkowski backend".into(),
        ));
    }
    let protocol = build_protocol(b, v)?;
    let p = protocol.sender_location.clone();
    let q = protocol.gathering.clone();
    let Some(t) = find_loop_transform(backend, &p, &q, allow_reflection)? else {
        let d = backend.spatial_dim().unwrap_or(0);
        let reason = if d == 1 && !allow_reflection {
            "in 1+1 dimensions every proper orthochronous transformation preserves the spatial \
             orientation of a spacelike interval, so no map sends Q into the future of L(p) and \
             L(Q) into the past of p; a spatial reflection is required"
                .to_string()
        } else {
            "no admissible transformation places Q before L(p) and L(Q) before p".to_string()
        };
        return Ok(LoopOutcome::Obstruction {
            protocol: Box::new(protocol),
            reason,
        });
    };
    let lp = t.image_of_p.clone();
    let lq = t.image_of_q.clone();
    let legs = vec![
        LoopLeg {
            description: "protocol channel p ⇝ Q".into(),
            verified: !backend.precedes(&p, &q)?,
            from: p.clone(),
            to: q.clone(),
            kind: LegKind::Channel,
        },
        LoopLeg {
            description: "relay Q ≺ L(p)".into(),
            verified: strictly_precedes(backend, &q, &lp)?,
            from: q.clone(),
            to: lp.clone(),
            kind: LegKind::Relay,
        },
        LoopLeg {
            description: "transformed channel L(p) ⇝ L(Q)".into(),
            verified: !backend.precedes(&lp, &lq)?,
            from: lp.clone(),
            to: lq.clone(),
            kind: LegKind::Channel,
        },
        LoopLeg {
            description: "relay L(Q) ≺ p".into(),
            verified: strictly_precedes(backend, &lq, &p)?,
            from: lq,
            to: p,
            kind: LegKind::Relay,
        },
    ];
    let narrative = format!(
        "The agent at {} selects {} from the value relayed back along the loop. Because the two \
         receiver distributions differ (total variation {}), the value gathered at L(Q) depends on \
         that very selection with non-zero probability: either the free selection is forced by its \
         own future (a paradox), or the box cannot be reproduced at the transformed locations (an \
         operational violation of Poincaré symmetry).",
        protocol.sender_name,
        protocol.sender_name,
        format_rational(&protocol.exact_tv()),
    );
    Ok(LoopOutcome::Certificate {
        protocol: Box::new(protocol),
        transform: t,
        legs,
        narrative,
    })
}

/// All `(F, G)` pairs of the box, for reporting.
pub fn pair_count(b: &CorrelationBox) -> usize {
    nonempty_subsets(b.inputs().len()).len() * nonempty_subsets(b.outputs().len()).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::pr_box;
    use crate::layouts::Preset;
    use crate::ons::check_ons;
    use crate::rational::{int, rat};

    fn bell_signalling() -> CorrelationBox {
        let l = Preset::BellStandard.layout();
        // A copies Y
        CorrelationBox::from_fn(
            l.backend.clone(),
            l.binary_inputs(),
            l.binary_outputs(),
            vec![(0, 0), (1, 1)],
            |x, a| {
                if a[0] == x[1] {
                    rat(1, 2)
                } else {
                    Rational::default()
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn two_party_protocol() {
        let b = bell_signalling();
        let v = check_ons(&b).unwrap();
        let p = build_protocol(&b, &v[0]).unwrap();
        assert_eq!(p.step.k, 1);
        assert_eq!(p.sender, 1);
        assert_eq!(p.receivers, vec![0]);
        assert_eq!(p.exact_tv(), int(1));
        assert!(p.verify(&b).unwrap());
        let s = simulate(&p, &b, 200, 3, DEFAULT_ALPHA).unwrap();
        assert!(s.reject_null);
        assert_eq!(s.empirical_tv, 1.0);
        assert_eq!(s, simulate(&p, &b, 200, 3, DEFAULT_ALPHA).unwrap());
    }

    #[test]
    fn last_step_differs() {
        let l = Preset::FourParty.layout();
        // A2 copies X4; everything else uniform
        let b = CorrelationBox::from_fn(
            l.backend.clone(),
            l.binary_inputs(),
            l.binary_outputs(),
            vec![],
            |x, a| {
                if a[1] == x[3] {
                    rat(1, 8)
                } else {
                    Rational::default()
                }
            },
        )
        .unwrap();
        let v = check_ons(&b).unwrap();
        let full = v
            .iter()
            .find(|r| r.instance.f == [0, 3] && r.instance.g == [1, 2] && r.instance.x[0] != r.instance.x_prime[0])
            .expect("full-F violation");
        let step = hybrid_localize(&b, full).unwrap();
        assert_eq!(step.k, 2);
        assert_eq!(step.input, 3);
        let p = build_protocol(&b, full).unwrap();
        assert!(p.verify(&b).unwrap());
    }

    #[test]
    fn ons_box_has_no_protocol() {
        let l = Preset::BellStandard.layout();
        let b = pr_box(l.backend.clone(), &l.input_events(), &l.output_events()).unwrap();
        assert!(exhaustive_protocol_search(&b).unwrap().is_empty());
        assert!(matches!(
            loop_paradox_certificate(&b, &[], false),
            Err(ProtocolError::PreconditionViolated(_))
        ));
        assert!(!exhaustive_protocol_search(&bell_signalling()).unwrap().is_empty());
    }

    #[test]
    fn loop_in_two_plus_one_and_obstruction_in_one_plus_one() {
        let b = bell_signalling();
        let v = check_ons(&b).unwrap();
        assert!(!loop_paradox_certificate(&b, &v, false).unwrap().is_certificate());
        assert!(loop_paradox_certificate(&b, &v, true).unwrap().is_certificate());

        let p = |t: i64, x: i64| Event::point(int(t), vec![int(x), int(0)]);
        let b2 = b
            .relocated(Backend::minkowski(2), &[p(0, 0), p(0, 10)], &[p(1, 0), p(1, 10)])
            .unwrap();
        let v2 = check_ons(&b2).unwrap();
        let LoopOutcome::Certificate { legs, .. } = loop_paradox_certificate(&b2, &v2, false).unwrap() else {
            panic!("expected a certificate");
        };
        assert!(legs.iter().all(|l| l.verified));
    }
}
