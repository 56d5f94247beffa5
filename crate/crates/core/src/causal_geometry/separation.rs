//! Gathering points and the operational-separation decision procedures.

use serde::{Deserialize, Serialize};

use super::timeslice;
use super::{minkowski_precedes, Backend, Event, GeometryError, Point};
use crate::interval::Precision;
use crate::rational::int;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeparationStatus {
    Separated,
    NotSeparated,
    Unknown,
}

/// Why every gathering point of the receivers lies in some sender's future.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum CoverReason {
    /// A sender strictly precedes a receiver, so it precedes every gathering
    /// point of the tuple.
    SenderPrecedesReceiver { p_index: usize, q_index: usize },
    /// The receivers have no common future at all.
    EmptyCommonFuture,
    /// 1+1 null-coordinate apex of the common future lies in a sender's
    /// strict future, hence so does the whole common future.
    ApexCovered { p_index: usize, apex: Event },
    /// Every element of a finite order above all receivers was checked.
    FiniteExhaustion { candidates: usize },
    /// Timeslice sweep: the monotone margin between the sender's future and
    /// the receivers' common future has a nonnegative limit (certified lower
    /// bound given as a rational string).
    DirectionalLimit { p_index: usize, limit_lower_bound: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeparationCertificate {
    /// A gathering point outside every sender's strict future.
    Gathering {
        point: Event,
    },
    Covered(CoverReason),
    Diagnostic {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationVerdict {
    pub status: SeparationStatus,
    pub certificate: SeparationCertificate,
}

impl SeparationVerdict {
    pub fn separated(point: Event) -> Self {
        SeparationVerdict {
            status: SeparationStatus::Separated,
            certificate: SeparationCertificate::Gathering { point },
        }
    }

    pub fn not_separated(reason: CoverReason) -> Self {
        SeparationVerdict {
            status: SeparationStatus::NotSeparated,
            certificate: SeparationCertificate::Covered(reason),
        }
    }

    pub fn unknown(message: impl Into<String>) -> Self {
        SeparationVerdict {
            status: SeparationStatus::Unknown,
            certificate: SeparationCertificate::Diagnostic {
                message: message.into(),
            },
        }
    }

    pub fn is_separated(&self) -> bool {
        self.status == SeparationStatus::Separated
    }

    pub fn is_not_separated(&self) -> bool {
        self.status == SeparationStatus::NotSeparated
    }

    pub fn is_unknown(&self) -> bool {
        self.status == SeparationStatus::Unknown
    }

    pub fn gathering_point(&self) -> Option<&Event> {
        match &self.certificate {
            SeparationCertificate::Gathering { point } => Some(point),
            _ => None,
        }
    }

    /// Re-checks a gathering certificate with `strictly_precedes`; verdicts
    /// without a gathering point are accepted as-is.
    pub fn verify(&self, backend: &Backend, qs: &[Event], ps: &[Event]) -> Result<bool, GeometryError> {
        match (&self.status, self.gathering_point()) {
            (SeparationStatus::Separated, Some(q)) => {
                for qj in qs {
                    if !backend.precedes_eq(qj, q)? {
                        return Ok(false);
                    }
                }
                for pi in ps {
                    if backend.precedes(pi, q)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (SeparationStatus::Separated, None) => Ok(false),
            _ => Ok(true),
        }
    }
}

fn points(es: &[Event]) -> Vec<&Point> {
    es.iter().filter_map(Event::as_point).collect()
}

/// Null-coordinate apex of the common future of 1+1 points.
pub(crate) fn apex_1d(qs: &[&Point]) -> Point {
    let u = qs.iter().map(|q| &q.t - &q.x[0]).max().expect("non-empty");
    let v = qs.iter().map(|q| &q.t + &q.x[0]).max().expect("non-empty");
    let two = int(2);
    Point::new((&u + &v) / &two, vec![(&v - &u) / &two])
}

/// Whether the receivers share a common future, with a witness if so.
pub fn common_future_nonempty(backend: &Backend, qs: &[Event]) -> Result<(bool, Option<Event>), GeometryError> {
    backend.validate_all(qs)?;
    match backend {
        Backend::Minkowski { d } => {
            let pts = points(qs);
            if *d == 1 {
                return Ok((true, Some(Event::Point(apex_1d(&pts)))));
            }
            let n = Rational::from_integer(pts.len().into());
            let centroid: Vec<Rational> = (0..*d)
                .map(|i| pts.iter().map(|p| p.x[i].clone()).sum::<Rational>() / &n)
                .collect();
            let t = pts
                .iter()
                .map(|p| {
                    let l1: Rational =
                        p.x.iter()
                            .zip(&centroid)
                            .map(|(a, c)| num_traits::Signed::abs(&(a - c)))
                            .sum();
                    &p.t + l1
                })
                .max()
                .expect("non-empty");
            Ok((true, Some(Event::point(t, centroid))))
        }
        Backend::Terminated(diag) => {
            let c = apex_1d(&points(qs));
            if diag.contains(&c.t, &c.x[0]) {
                Ok((true, Some(Event::Point(c))))
            } else {
                Ok((false, None))
            }
        }
        Backend::FiniteOrder(order) => {
            for e in 0..order.len() {
                let cand = Event::element(e);
                let mut all = true;
                for q in qs {
                    if !backend.precedes_eq(q, &cand)? {
                        all = false;
                        break;
                    }
                }
                if all {
                    return Ok((true, Some(cand)));
                }
            }
            Ok((false, None))
        }
    }
}

/// Drops duplicate receivers and receivers implied by a later one
/// (`q_j ⪯ q_k` means every gathering point of `q_k` already gathers `q_j`).
fn reduce_receivers(backend: &Backend, qs: &[Event]) -> Result<Vec<usize>, GeometryError> {
    let mut keep = Vec::new();
    for (j, qj) in qs.iter().enumerate() {
        let mut implied = false;
        for (k, qk) in qs.iter().enumerate() {
            if j == k {
                continue;
            }
            if backend.precedes(qj, qk)? || (qj == qk && k < j) {
                implied = true;
                break;
            }
        }
        if !implied {
            keep.push(j);
        }
    }
    Ok(keep)
}

/// Decides whether the tuple `qs` is operationally separated from `ps`:
/// some gathering point `Q` of `qs` has `p_i ⊀ Q` for every sender.
pub fn operationally_separated(
    backend: &Backend,
    qs: &[Event],
    ps: &[Event],
) -> Result<SeparationVerdict, GeometryError> {
    operationally_separated_with(backend, qs, ps, Precision::from_env())
}

/// As [`operationally_separated`], starting the certified arithmetic at the
/// given precision.
pub fn operationally_separated_with(
    backend: &Backend,
    qs: &[Event],
    ps: &[Event],
    precision: Precision,
) -> Result<SeparationVerdict, GeometryError> {
    backend.validate_all(qs)?;
    backend.validate_all(ps)?;

    // prop1: a sender preceding a receiver precedes every gathering point.
    for (i, p) in ps.iter().enumerate() {
        for (j, q) in qs.iter().enumerate() {
            if backend.precedes(p, q)? {
                return Ok(SeparationVerdict::not_separated(CoverReason::SenderPrecedesReceiver {
                    p_index: i,
                    q_index: j,
                }));
            }
        }
    }

    let keep = reduce_receivers(backend, qs)?;
    if keep.len() == 1 {
        // rel3: the receiver itself is a gathering point, and no sender
        // precedes it (checked above).
        return Ok(SeparationVerdict::separated(qs[keep[0]].clone()));
    }
    let reduced: Vec<Event> = keep.iter().map(|&j| qs[j].clone()).collect();

    match backend {
        Backend::FiniteOrder(order) => {
            let mut candidates = 0;
            for e in 0..order.len() {
                let cand = Event::element(e);
                let mut gathers = true;
                for q in &reduced {
                    if !backend.precedes_eq(q, &cand)? {
                        gathers = false;
                        break;
                    }
                }
                if !gathers {
                    continue;
                }
                candidates += 1;
                let mut excluded = true;
                for p in ps {
                    if backend.precedes(p, &cand)? {
                        excluded = false;
                        break;
                    }
                }
                if excluded {
                    return Ok(SeparationVerdict::separated(cand));
                }
            }
            if candidates == 0 {
                Ok(SeparationVerdict::not_separated(CoverReason::EmptyCommonFuture))
            } else {
                Ok(SeparationVerdict::not_separated(CoverReason::FiniteExhaustion {
                    candidates,
                }))
            }
        }
        Backend::Terminated(_) | Backend::Minkowski { d: 1 } => {
            let c = apex_1d(&points(&reduced));
            if let Backend::Terminated(diag) = backend {
                if !diag.contains(&c.t, &c.x[0]) {
                    return Ok(SeparationVerdict::not_separated(CoverReason::EmptyCommonFuture));
                }
            }
            // Every gathering point lies in J+(C); if some sender precedes C
            // it precedes all of them, otherwise C itself is a certificate.
            for (i, p) in points(ps).into_iter().enumerate() {
                if minkowski_precedes(p, &c) {
                    return Ok(SeparationVerdict::not_separated(CoverReason::ApexCovered {
                        p_index: i,
                        apex: Event::Point(c),
                    }));
                }
            }
            Ok(SeparationVerdict::separated(Event::Point(c)))
        }
        Backend::Minkowski { d } => {
            let q_pts: Vec<Point> = points(&reduced).into_iter().cloned().collect();
            let p_pts: Vec<Point> = points(ps).into_iter().cloned().collect();
            Ok(timeslice::decide(*d, &q_pts, &p_pts, precision))
        }
    }
}
