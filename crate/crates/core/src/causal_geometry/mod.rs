//! Spacetime events under pluggable causal backends.
//!
//! Three backends are supported: flat Minkowski space of any spatial
//! dimension, an abstract finite strict order, and a 1+1 Minkowski region
//! terminated from above by a spacelike singularity polyline (a causal model
//! of a black-hole interior). All comparisons are exact.

mod poincare;
mod separation;
mod timeslice;

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, serde_str, serde_vec};
use crate::Rational;

pub use poincare::{apply_poincare, find_loop_transform, LoopTransform, PoincareMap};
pub use separation::{
    common_future_nonempty, operationally_separated, CoverReason, SeparationCertificate, SeparationStatus,
    SeparationVerdict,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("operation not supported on this backend: {0}")]
    UnsupportedBackend(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid backend: {0}")]
    InvalidBackend(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("event tuple must be non-empty")]
    EmptyTuple,
}

/// A point of a coordinate backend: time plus `d` spatial coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "serde_str")]
    pub t: Rational,
    #[serde(with = "serde_vec")]
    pub x: Vec<Rational>,
}

impl Point {
    pub fn new(t: Rational, x: Vec<Rational>) -> Self {
        Point { t, x }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// All `d + 1` components, time first.
    pub fn components(&self) -> Vec<Rational> {
        let mut v = Vec::with_capacity(self.x.len() + 1);
        v.push(self.t.clone());
        v.extend(self.x.iter().cloned());
        v
    }

    pub fn from_components(c: &[Rational]) -> Self {
        Point {
            t: c[0].clone(),
            x: c[1..].to_vec(),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", format_rational(&self.t))?;
        for x in &self.x {
            write!(f, ", {}", format_rational(x))?;
        }
        write!(f, ")")
    }
}

/// An event: a coordinate point or an element of a finite order.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Event {
    Point(Point),
    Element { element: usize },
}

impl Event {
    pub fn point(t: Rational, x: Vec<Rational>) -> Self {
        Event::Point(Point { t, x })
    }

    pub fn element(id: usize) -> Self {
        Event::Element { element: id }
    }

    pub fn as_point(&self) -> Option<&Point> {
        match self {
            Event::Point(p) => Some(p),
            Event::Element { .. } => None,
        }
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Point(p) => p.fmt(f),
            Event::Element { element } => write!(f, "e{element}"),
        }
    }
}

/// Convenience constructor for 1+1 events from small integers / fractions.
pub fn ev(t: Rational, x: Rational) -> Event {
    Event::point(t, vec![x])
}

/// A finite strict partial order on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteOrder {
    n: usize,
    less: Vec<Vec<bool>>,
}

impl FiniteOrder {
    /// Builds the order from the full list of related pairs `(a, b)` meaning
    /// `a ≺ b`; rejects relations that are not irreflexive and transitive.
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GeometryError> {
        let mut less = vec![vec![false; n]; n];
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(GeometryError::InvalidBackend(format!("pair ({a}, {b}) outside 0..{n}")));
            }
            less[a][b] = true;
        }
        for (a, row) in less.iter().enumerate() {
            if row[a] {
                return Err(GeometryError::InvalidBackend(format!(
                    "relation is not irreflexive at {a}"
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !less[a][b] {
                    continue;
                }
                for c in 0..n {
                    if less[b][c] && !less[a][c] {
                        return Err(GeometryError::InvalidBackend(format!(
                            "relation is not transitive: {a}<{b}<{c}"
                        )));
                    }
                }
            }
        }
        Ok(FiniteOrder { n, less })
    }

    /// Builds the order generated by the given covering pairs (transitive
    /// closure); fails if the generated relation has a cycle.
    pub fn from_covers(n: usize, covers: &[(usize, usize)]) -> Result<Self, GeometryError> {
        let mut less = vec![vec![false; n]; n];
        for &(a, b) in covers {
            if a >= n || b >= n {
                return Err(GeometryError::InvalidBackend(format!("pair ({a}, {b}) outside 0..{n}")));
            }
            less[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if less[i][k] {
                    for j in 0..n {
                        if less[k][j] {
                            less[i][j] = true;
                        }
                    }
                }
            }
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| less[a][b])
            .collect();
        Self::new(n, &pairs)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.less[a][b]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| (0..self.n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.less[a][b])
            .collect()
    }
}

/// A 1+1 Minkowski region lying strictly below a spacelike polyline.
///
/// The polyline is given by vertices `(x, t)` with increasing `x`; beyond its
/// end vertices it continues horizontally. Because every segment has
/// `|dt/dx| < 1`, the region is past-closed and its causal relation is the
/// ambient Minkowski one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminatedDiagram {
    vertices: Vec<(Rational, Rational)>,
}

impl TerminatedDiagram {
    pub fn new(vertices: Vec<(Rational, Rational)>) -> Result<Self, GeometryError> {
        if vertices.is_empty() {
            return Err(GeometryError::InvalidBackend(
                "singularity polyline needs at least one vertex".into(),
            ));
        }
        for w in vertices.windows(2) {
            let dx = &w[1].0 - &w[0].0;
            if !dx.is_positive() {
                return Err(GeometryError::InvalidBackend(
                    "polyline vertices must have strictly increasing x".into(),
                ));
            }
            let dt = &w[1].1 - &w[0].1;
            if dt.abs() >= dx {
                return Err(GeometryError::InvalidBackend(
                    "polyline segment is not spacelike".into(),
                ));
            }
        }
        Ok(TerminatedDiagram { vertices })
    }

    /// A flat singularity at time `t`.
    pub fn flat(t: Rational) -> Self {
        TerminatedDiagram {
            vertices: vec![(Rational::zero(), t)],
        }
    }

    pub fn vertices(&self) -> &[(Rational, Rational)] {
        &self.vertices
    }

    /// Time of the singularity above spatial position `x`.
    pub fn singularity_time(&self, x: &Rational) -> Rational {
        let first = &self.vertices[0];
        let last = self.vertices.last().expect("non-empty polyline");
        if x <= &first.0 {
            return first.1.clone();
        }
        if x >= &last.0 {
            return last.1.clone();
        }
        for w in self.vertices.windows(2) {
            let (x0, t0) = &w[0];
            let (x1, t1) = &w[1];
            if x <= x1 {
                return t0 + (t1 - t0) * (x - x0) / (x1 - x0);
            }
        }
        last.1.clone()
    }

    pub fn contains(&self, t: &Rational, x: &Rational) -> bool {
        t < &self.singularity_time(x)
    }
}

/// The causal structure a scenario lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Minkowski { d: usize },
    FiniteOrder(FiniteOrder),
    Terminated(TerminatedDiagram),
}

impl Backend {
    pub fn minkowski(d: usize) -> Self {
        Backend::Minkowski { d }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Minkowski { .. } => "minkowski",
            Backend::FiniteOrder(_) => "finite_order",
            Backend::Terminated(_) => "terminated",
        }
    }

    /// Spatial dimension of a coordinate backend.
    pub fn spatial_dim(&self) -> Option<usize> {
        match self {
            Backend::Minkowski { d } => Some(*d),
            Backend::Terminated(_) => Some(1),
            Backend::FiniteOrder(_) => None,
        }
    }

    /// Checks that the event belongs to this backend.
    pub fn validate(&self, e: &Event) -> Result<(), GeometryError> {
        match (self, e) {
            (Backend::Minkowski { d }, Event::Point(p)) => {
                if p.dim() == *d {
                    Ok(())
                } else {
                    Err(GeometryError::BackendMismatch(format!(
                        "event {p:?} has {} spatial coordinates, backend has {d}",
                        p.dim()
                    )))
                }
            }
            (Backend::Terminated(diag), Event::Point(p)) => {
                if p.dim() != 1 {
                    return Err(GeometryError::BackendMismatch(format!(
                        "event {p:?} is not a 1+1 event"
                    )));
                }
                if diag.contains(&p.t, &p.x[0]) {
                    Ok(())
                } else {
                    Err(GeometryError::InvalidEvent(format!(
                        "event {p:?} does not lie below the singularity"
                    )))
                }
            }
            (Backend::FiniteOrder(order), Event::Element { element }) => {
                if *element < order.len() {
                    Ok(())
                } else {
                    Err(GeometryError::InvalidEvent(format!(
                        "element {element} outside 0..{}",
                        order.len()
                    )))
                }
            }
            _ => Err(GeometryError::BackendMismatch(format!(
                "event {e:?} does not belong to a {} backend",
                self.name()
            ))),
        }
    }

    pub fn validate_all(&self, es: &[Event]) -> Result<(), GeometryError> {
        if es.is_empty() {
            return Err(GeometryError::EmptyTuple);
        }
        es.iter().try_for_each(|e| self.validate(e))
    }

    /// Strict causal precedence `p ≺ q`.
    pub fn precedes(&self, p: &Event, q: &Event) -> Result<bool, GeometryError> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(match (self, p, q) {
            (Backend::FiniteOrder(order), Event::Element { element: a }, Event::Element { element: b }) => {
                order.less(*a, *b)
            }
            (_, Event::Point(a), Event::Point(b)) => minkowski_precedes(a, b),
            _ => unreachable!("validated above"),
        })
    }

    /// Reflexive closure `p ⪯ q`.
    pub fn precedes_eq(&self, p: &Event, q: &Event) -> Result<bool, GeometryError> {
        Ok(p == q || self.precedes(p, q)?)
    }
}

/// The Minkowski rule with null separation counting as causal.
pub(crate) fn minkowski_precedes(p: &Point, q: &Point) -> bool {
    if p == q {
        return false;
    }
    let dt = &q.t - &p.t;
    if dt.is_negative() {
        return false;
    }
    let dx2: Rational =
        p.x.iter()
            .zip(&q.x)
            .map(|(a, b)| {
                let d = b - a;
                &d * &d
            })
            .sum();
    &dt * &dt >= dx2
}

/// Strict causal precedence `p ≺ q` on the given backend.
pub fn strictly_precedes(backend: &Backend, p: &Event, q: &Event) -> Result<bool, GeometryError> {
    backend.precedes(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn minkowski_examples() {
        let b = Backend::minkowski(1);
        let o = ev(int(0), int(0));
        assert!(b.precedes(&o, &ev(int(1), int(0))).unwrap());
        assert!(!b.precedes(&o, &o).unwrap());
        assert!(!b.precedes(&o, &ev(int(1), int(2))).unwrap());
        // null separation is causal
        assert!(b.precedes(&o, &ev(int(1), int(1))).unwrap());
    }

    #[test]
    fn mixed_backends_are_rejected() {
        let b = Backend::minkowski(2);
        let e = ev(int(0), int(0));
        assert!(matches!(b.precedes(&e, &e), Err(GeometryError::BackendMismatch(_))));
        assert!(matches!(
            b.precedes(&Event::element(0), &Event::element(1)),
            Err(GeometryError::BackendMismatch(_))
        ));
    }

    #[test]
    fn finite_order_is_checked_and_closed() {
        assert!(FiniteOrder::new(3, &[(0, 1), (1, 2)]).is_err());
        assert!(FiniteOrder::new(2, &[(0, 0)]).is_err());
        let o = FiniteOrder::from_covers(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(o.less(0, 2));
        assert!(FiniteOrder::from_covers(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn terminated_diagram_polyline() {
        assert!(TerminatedDiagram::new(vec![(int(0), int(0)), (int(1), int(1))]).is_err());
        let d = TerminatedDiagram::new(vec![(int(-2), int(1)), (int(0), rat(3, 2)), (int(2), int(1))]).unwrap();
        assert_eq!(d.singularity_time(&int(-1)), rat(5, 4));
        assert_eq!(d.singularity_time(&int(10)), int(1));
        let b = Backend::Terminated(d);
        assert!(b.validate(&ev(int(1), int(0))).is_ok());
        assert!(b.validate(&ev(int(2), int(0))).is_err());
    }
}
