//! Exact rational Poincaré maps and the loop construction.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::timeslice::rational_unit_near;
use super::{minkowski_precedes, Backend, Event, GeometryError, Point};
use crate::rational::{int, serde_vec};
use crate::Rational;

/// `x -> lambda x + translation` on `(d+1)`-dimensional Minkowski space,
/// coordinates ordered `(t, x_1, ..., x_d)`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoincareMap {
    pub lambda: Vec<RatRow>,
    #[serde(with = "serde_vec")]
    pub translation: Vec<Rational>,
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatRow(#[serde(with = "serde_vec")] pub Vec<Rational>);

impl std::fmt::Debug for PoincareMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<Vec<String>> = self
            .lambda
            .iter()
            .map(|r| r.0.iter().map(crate::rational::format_rational).collect())
            .collect();
        let tr: Vec<String> = self.translation.iter().map(crate::rational::format_rational).collect();
        f.debug_struct("PoincareMap")
            .field("lambda", &rows)
            .field("translation", &tr)
            .finish()
    }
}

impl PoincareMap {
    fn from_matrix(m: Vec<Vec<Rational>>) -> Self {
        let n = m.len();
        PoincareMap {
            lambda: m.into_iter().map(RatRow).collect(),
            translation: vec![Rational::zero(); n],
        }
    }

    fn identity_matrix(n: usize) -> Vec<Vec<Rational>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect()
    }

    pub fn identity(d: usize) -> Self {
        Self::from_matrix(Self::identity_matrix(d + 1))
    }

    pub fn spatial_dim(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.lambda[i].0[j]
    }

    /// Boost along spatial axis `axis` (1-based) with rational parameter
    /// `k > 0`: `cosh = (k + 1/k)/2`, `sinh = (k - 1/k)/2`.
    pub fn boost(d: usize, axis: usize, k: &Rational) -> Self {
        assert!(k.is_positive(), "boost parameter must be positive");
        assert!((1..=d).contains(&axis), "boost axis out of range");
        let two = int(2);
        let inv = k.recip();
        let c = (k + &inv) / &two;
        let s = (k - &inv) / &two;
        let mut m = Self::identity_matrix(d + 1);
        m[0][0] = c.clone();
        m[axis][axis] = c;
        m[0][axis] = -s.clone();
        m[axis][0] = -s;
        Self::from_matrix(m)
    }

    /// Rotation in the plane of spatial axes `i`, `j` (1-based) by the angle
    /// with `cos = a/c`, `sin = b/c` for a Pythagorean triple.
    pub fn rotation(d: usize, i: usize, j: usize, cos: &Rational, sin: &Rational) -> Self {
        assert!(i != j && (1..=d).contains(&i) && (1..=d).contains(&j));
        assert_eq!(cos * cos + sin * sin, Rational::one(), "not a rational rotation");
        let mut m = Self::identity_matrix(d + 1);
        m[i][i] = cos.clone();
        m[j][j] = cos.clone();
        m[i][j] = -sin.clone();
        m[j][i] = sin.clone();
        Self::from_matrix(m)
    }

    /// Rotation whose Pythagorean angle comes from the triple `(a, b, c)`.
    pub fn pythagorean_rotation(d: usize, i: usize, j: usize, a: i64, b: i64, c: i64) -> Self {
        Self::rotation(d, i, j, &crate::rational::rat(a, c), &crate::rational::rat(b, c))
    }

    /// Reflection of spatial axis `axis` (1-based).
    pub fn reflection(d: usize, axis: usize) -> Self {
        let mut m = Self::identity_matrix(d + 1);
        m[axis][axis] = -Rational::one();
        Self::from_matrix(m)
    }

    /// Exchange of spatial axes `i` and `j`.
    pub fn swap_axes(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::identity_matrix(d + 1);
        m[i][i] = Rational::zero();
        m[j][j] = Rational::zero();
        m[i][j] = Rational::one();
        m[j][i] = Rational::one();
        Self::from_matrix(m)
    }

    pub fn translation(v: Vec<Rational>) -> Self {
        let mut m = Self::identity(v.len() - 1);
        m.translation = v;
        m
    }

    pub fn with_translation(mut self, v: Vec<Rational>) -> Self {
        self.translation = v;
        self
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PoincareMap) -> PoincareMap {
        let n = self.lambda.len();
        let m: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.entry(i, k) * other.entry(k, j)).sum())
                    .collect()
            })
            .collect();
        let t = self.apply_vec(&other.translation);
        PoincareMap {
            lambda: m.into_iter().map(RatRow).collect(),
            translation: t,
        }
    }

    fn linear(&self, v: &[Rational]) -> Vec<Rational> {
        self.lambda
            .iter()
            .map(|row| row.0.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn apply_vec(&self, v: &[Rational]) -> Vec<Rational> {
        self.linear(v)
            .into_iter()
            .zip(&self.translation)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Exact check of `Λᵀ η Λ = η` with `η = diag(1, -1, ..., -1)`.
    pub fn is_lorentz(&self) -> bool {
        let n = self.lambda.len();
        let eta = |i: usize| if i == 0 { Rational::one() } else { -Rational::one() };
        for i in 0..n {
            for j in 0..n {
                let g: Rational = (0..n).map(|k| eta(k) * self.entry(k, i) * self.entry(k, j)).sum();
                let expected = if i == j { eta(i) } else { Rational::zero() };
                if g != expected {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_orthochronous(&self) -> bool {
        self.entry(0, 0) >= &Rational::one()
    }

    /// Determinant of the spatial part's orientation: the sign of `det Λ`.
    pub fn is_proper(&self) -> bool {
        determinant(self.lambda.iter().map(|r| r.0.clone()).collect()).is_positive()
    }

    /// Inverse of a Lorentz map: `Λ⁻¹ = η Λᵀ η`.
    pub fn inverse(&self) -> PoincareMap {
        let n = self.lambda.len();
        let eta = |i: usize| if i == 0 { Rational::one() } else { -Rational::one() };
        let m: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| eta(i) * self.entry(j, i) * eta(j)).collect())
            .collect();
        let linear_inv = PoincareMap::from_matrix(m);
        let t: Vec<Rational> = linear_inv.linear(&self.translation).iter().map(|c| -c).collect();
        linear_inv.with_translation(t)
    }
}

fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det *= &pv;
        for r in col + 1..n {
            let f = &m[r][col] / &pv;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let delta = &f * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Image of an event under a Poincaré map.
pub fn apply_poincare(backend: &Backend, map: &PoincareMap, e: &Event) -> Result<Event, GeometryError> {
    let Backend::Minkowski { d } = backend else {
        return Err(GeometryError::UnsupportedBackend(format!(
            "Poincaré maps act on Minkowski space, not {}",
            backend.name()
        )));
    };
    backend.validate(e)?;
    if map.spatial_dim() != *d {
        return Err(GeometryError::BackendMismatch(format!(
            "map acts on {}+1 dimensions, backend has {d}+1",
            map.spatial_dim()
        )));
    }
    let p = e.as_point().expect("validated");
    Ok(Event::Point(Point::from_components(&map.apply_vec(&p.components()))))
}

/// A verified tachyonic-antitelephone transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopTransform {
    pub map: PoincareMap,
    pub image_of_p: Event,
    pub image_of_q: Event,
}

fn is_past_causal_nonzero(v: &[Rational]) -> bool {
    let space: Rational = v[1..].iter().map(|c| c * c).sum();
    v[0].is_negative() && &v[0] * &v[0] >= space
}

/// Finds `L` with `Q ≺ L(p)` and `L(Q) ≺ p`, when one exists in the
/// allowed group (proper orthochronous, plus spatial reflections if
/// `allow_reflection`).
///
/// With `w = Q - p`, such an `L` exists as soon as some Lorentz image `Λw`
/// makes `w + Λw` past-causal; then the translation splits `-(w + Λw)`
/// evenly between the two legs. `Λ` is built by boosting `w` until its time
/// component is negative, applying a spatial half-turn there, and boosting
/// back. In 1+1 dimensions the half-turn is a reflection, so without
/// reflections no such map is produced.
pub fn find_loop_transform(
    backend: &Backend,
    p: &Event,
    q: &Event,
    allow_reflection: bool,
) -> Result<Option<LoopTransform>, GeometryError> {
    let Backend::Minkowski { d } = backend else {
        return Err(GeometryError::UnsupportedBackend(
            "loop transforms need a Minkowski backend".into(),
        ));
    };
    let d = *d;
    if backend.precedes(p, q)? {
        return Err(GeometryError::PreconditionViolated(
            "the gathering point lies in the sender's strict future".into(),
        ));
    }
    let pp = p.as_point().expect("validated");
    let qp = q.as_point().expect("validated");
    let w: Vec<Rational> = qp
        .components()
        .iter()
        .zip(pp.components())
        .map(|(a, b)| a - b)
        .collect();
    if w.iter().all(Zero::is_zero) {
        return Ok(None);
    }
    let lambda = if is_past_causal_nonzero(&w) {
        PoincareMap::identity(d)
    } else {
        if d == 1 && !allow_reflection {
            return Ok(None);
        }
        match half_turn_conjugate(d, &w, allow_reflection) {
            Some(l) => l,
            None => return Ok(None),
        }
    };
    let lw = lambda.linear(&w);
    let s: Vec<Rational> = w.iter().zip(&lw).map(|(a, b)| -(a + b) / int(2)).collect();
    let lq = lambda.linear(&qp.components());
    let a: Vec<Rational> = pp
        .components()
        .iter()
        .zip(&lq)
        .zip(&s)
        .map(|((pc, lqc), sc)| pc - lqc - sc)
        .collect();
    let map = lambda.with_translation(a);
    let lp = Point::from_components(&map.apply_vec(&pp.components()));
    let lq = Point::from_components(&map.apply_vec(&qp.components()));
    if !(map.is_lorentz() && minkowski_precedes(qp, &lp) && minkowski_precedes(&lq, pp)) {
        return Ok(None);
    }
    if !allow_reflection && !(map.is_proper() && map.is_orthochronous()) {
        return Ok(None);
    }
    Ok(Some(LoopTransform {
        map,
        image_of_p: Event::Point(lp),
        image_of_q: Event::Point(lq),
    }))
}

/// Builds `M⁻¹ Λ̃ M` where `M` makes the time component of `w` negative and
/// `Λ̃` is a spatial half-turn (or full spatial inversion) that makes
/// `M w + Λ̃ M w` past-causal.
fn half_turn_conjugate(d: usize, w: &[Rational], allow_reflection: bool) -> Option<PoincareMap> {
    let full_inversion = d.is_multiple_of(2) || allow_reflection;
    // Odd d without reflections keeps axis 1 fixed under the half-turn, so
    // the boost must act on a different axis.
    let boost_axis = if full_inversion { 1 } else { 2 };
    // Rotate the spatial part of `w` (approximately) onto the boost axis.
    let mut m = align_to_axis(d, &w[1..], boost_axis);
    let v = m.linear(w);
    let x = v[boost_axis].clone();
    if x.is_zero() {
        return None;
    }
    let kept = if full_inversion { Rational::zero() } else { v[1].abs() };
    // Boost along the axis until the time component is negative and
    // dominates whatever the half-turn leaves untouched.
    let mut k = int(2);
    for _ in 0..200 {
        let kk = if x.is_positive() { k.clone() } else { k.recip() };
        let b = PoincareMap::boost(d, boost_axis, &kk);
        let vb = b.linear(&v);
        if vb[0].is_negative() && -&vb[0] > kept {
            m = b.compose(&m);
            let mut tilde = PoincareMap::identity(d);
            let first = if full_inversion { 1 } else { 2 };
            for i in first..=d {
                tilde = PoincareMap::reflection(d, i).compose(&tilde);
            }
            return Some(m.inverse().compose(&tilde).compose(&m));
        }
        k *= int(2);
    }
    None
}

/// Exact rational rotation taking the spatial vector `u` close to the
/// positive `axis` direction, as a product of plane rotations whose cosines
/// and sines are rational approximations of the ideal ones.
fn align_to_axis(d: usize, u: &[Rational], axis: usize) -> PoincareMap {
    let mut map = PoincareMap::identity(d);
    let mut full = vec![Rational::zero()];
    full.extend(u.iter().cloned());
    for i in 1..=d {
        if i == axis {
            continue;
        }
        let cur = map.linear(&full);
        let a = cur[axis].clone();
        let b = cur[i].clone();
        if b.is_zero() {
            continue;
        }
        let n2 = &a * &a + &b * &b;
        let (cos, sin) = match exact_sqrt(&n2) {
            Some(r) => (&a / &r, &b / &r),
            None => match rational_unit_near(&[a.clone(), b.clone()], 48) {
                Some(unit) => (unit[0].clone(), unit[1].clone()),
                None => continue,
            },
        };
        // R(cos, -sin) maps (a, b) to (|(a, b)|, 0) in the (axis, i) plane.
        let rot = PoincareMap::rotation(d, axis, i, &cos, &-sin);
        map = rot.compose(&map);
    }
    map
}

fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let dd = r.denom().sqrt();
    (&n * &n == *r.numer() && &dd * &dd == *r.denom()).then(|| Rational::new(n, dd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal_geometry::ev;
    use crate::rational::rat;

    #[test]
    fn identity_and_translation() {
        let b = Backend::minkowski(2);
        let e = Event::point(int(3), vec![int(1), int(7)]);
        assert_eq!(apply_poincare(&b, &PoincareMap::identity(2), &e).unwrap(), e);
        let b1 = Backend::minkowski(1);
        let tr = PoincareMap::translation(vec![int(1), int(0)]);
        assert_eq!(
            apply_poincare(&b1, &tr, &ev(int(0), int(0))).unwrap(),
            ev(int(1), int(0))
        );
    }

    #[test]
    fn boost_with_k_two() {
        let b = Backend::minkowski(1);
        let l = PoincareMap::boost(1, 1, &int(2));
        assert_eq!(l.entry(0, 0), &rat(5, 4));
        assert_eq!(l.entry(0, 1), &rat(-3, 4));
        let img = apply_poincare(&b, &l, &ev(int(0), int(1))).unwrap();
        assert_eq!(img, ev(rat(-3, 4), rat(5, 4)));
        let p = img.as_point().unwrap();
        assert_eq!(&p.t * &p.t - &p.x[0] * &p.x[0], int(-1));
        assert!(l.is_lorentz() && l.is_orthochronous() && l.is_proper());
    }

    #[test]
    fn rotations_and_inverses_are_exact() {
        let r = PoincareMap::pythagorean_rotation(3, 1, 2, 3, 4, 5);
        let b = PoincareMap::boost(3, 3, &rat(3, 7));
        let m = r.compose(&b).with_translation(vec![int(1), int(2), int(3), int(4)]);
        assert!(m.is_lorentz());
        let id = m.compose(&m.inverse());
        assert_eq!(id, PoincareMap::identity(3));
    }

    #[test]
    fn loop_transform_in_two_plus_one() {
        let b = Backend::minkowski(2);
        let p = Event::point(int(0), vec![int(0), int(0)]);
        let q = Event::point(int(1), vec![int(5), int(0)]);
        let l = find_loop_transform(&b, &p, &q, false).unwrap().unwrap();
        assert!(b.precedes(&q, &l.image_of_p).unwrap());
        assert!(b.precedes(&l.image_of_q, &p).unwrap());
        assert!(l.map.is_lorentz() && l.map.is_orthochronous() && l.map.is_proper());
    }

    #[test]
    fn loop_transform_in_one_plus_one_needs_reflection() {
        let b = Backend::minkowski(1);
        let p = ev(int(0), int(0));
        let q = ev(int(1), int(5));
        assert!(find_loop_transform(&b, &p, &q, false).unwrap().is_none());
        let l = find_loop_transform(&b, &p, &q, true).unwrap().unwrap();
        assert!(b.precedes(&q, &l.image_of_p).unwrap());
        assert!(b.precedes(&l.image_of_q, &p).unwrap());
    }

    #[test]
    fn loop_transform_in_three_plus_one() {
        let b = Backend::minkowski(3);
        let p = Event::point(int(0), vec![int(0), int(0), int(0)]);
        let q = Event::point(int(1), vec![int(1), int(1), int(1)]);
        let l = find_loop_transform(&b, &p, &q, false).unwrap().unwrap();
        assert!(b.precedes(&q, &l.image_of_p).unwrap());
        assert!(b.precedes(&l.image_of_q, &p).unwrap());
        assert!(l.map.is_proper());
    }

    #[test]
    fn loop_transform_precondition() {
        let b = Backend::minkowski(1);
        assert!(matches!(
            find_loop_transform(&b, &ev(int(0), int(0)), &ev(int(2), int(0)), false),
            Err(GeometryError::PreconditionViolated(_))
        ));
    }
}
