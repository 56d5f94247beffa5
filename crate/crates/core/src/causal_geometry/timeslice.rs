//! Operational separation in Minkowski space with two or more spatial
//! dimensions.
//!
//! For a single sender `p` in 2+1 dimensions the decision is complete and
//! certified. On the timeslice `t`, the receivers' common future is an
//! intersection of closed discs and the sender's strict future is the disc of
//! radius `t - t_p` around `x_p`. The margin
//! `phi(t) = (t - t_p) - max{|x - x_p| : x in the intersection}` is
//! nonincreasing in `t` (each disc grows by the same amount as the sender's
//! disc), so the tuple is covered for every `t` exactly when the limit of
//! `phi` is nonnegative. The limit has the closed form
//! `-t_p - max_{|u|=1} min_j(<u, x_j - x_p> - t_j)`, whose maximiser is one of
//! finitely many explicit directions.
//!
//! Everything else (several senders, or three or more spatial dimensions) is
//! handled by cheap implications plus a certificate search, and may end in
//! `Unknown`.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::separation::{CoverReason, SeparationVerdict};
use super::{minkowski_precedes, Event, Point};
use crate::interval::{round_down, Interval, Precision};
use crate::rational::format_rational;
use crate::Rational;

/// Exact rational unit vector close to `v` (which need not be normalised),
/// using the inverse stereographic projection
/// `y -> (2y, |y|^2 - 1) / (|y|^2 + 1)`.
pub(crate) fn rational_unit_near(v: &[Rational], bits: u32) -> Option<Vec<Rational>> {
    let d = v.len();
    let norm2: Rational = v.iter().map(|c| c * c).sum();
    if norm2.is_zero() {
        return None;
    }
    if d == 1 {
        return Some(vec![if v[0].is_positive() {
            Rational::one()
        } else {
            -Rational::one()
        }]);
    }
    // Work with an approximately normalised copy so the chart is well
    // conditioned; exactness of the result does not depend on this.
    let norm = Interval::point(norm2).sqrt(Precision(bits)).expect("nonnegative");
    let scale = (norm.lo() + norm.hi()) / Rational::from_integer(2.into());
    let w: Vec<Rational> = v.iter().map(|c| c / &scale).collect();
    // Use the chart centred away from the last axis' sign to avoid the pole.
    let flip = w[d - 1].is_positive();
    let w: Vec<Rational> = if flip { w.iter().map(|c| -c).collect() } else { w };
    let denom = Rational::one() - &w[d - 1];
    let y: Vec<Rational> = w[..d - 1].iter().map(|c| round_down(&(c / &denom), bits)).collect();
    let r: Rational = y.iter().map(|c| c * c).sum();
    let one = Rational::one();
    let mut u: Vec<Rational> = y
        .iter()
        .map(|c| Rational::from_integer(2.into()) * c / (&r + &one))
        .collect();
    u.push((&r - &one) / (&r + &one));
    if flip {
        u = u.iter().map(|c| -c).collect();
    }
    Some(u)
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn gathers(qs: &[Point], q: &Point) -> bool {
    qs.iter().all(|qj| qj == q || minkowski_precedes(qj, q))
}

fn excluded(ps: &[Point], q: &Point) -> bool {
    ps.iter().all(|p| !minkowski_precedes(p, q))
}

/// Tries to turn an asymptotic escape direction into an exact gathering
/// point: along unit direction `u`, receivers allow `|x| - t <= m_q(u)` and
/// senders exclude `|x| - t > m_p(u)` asymptotically.
fn certificate_along(qs: &[Point], ps: &[Point], u: &[Rational]) -> Option<Point> {
    let m_q = qs.iter().map(|q| dot(u, &q.x) - &q.t).min().expect("non-empty");
    let m_p = ps.iter().map(|p| dot(u, &p.x) - &p.t).max().expect("non-empty");
    if m_q <= m_p {
        return None;
    }
    let sigma = (&m_q + &m_p) / Rational::from_integer(2.into());
    let t0 = qs.iter().chain(ps).map(|e| e.t.clone()).max().expect("non-empty");
    let mut step = Rational::one();
    for _ in 0..96 {
        let t = &t0 + &step;
        let s = &t + &sigma;
        if s.is_positive() {
            let q = Point::new(t, u.iter().map(|c| c * &s).collect());
            if gathers(qs, &q) && excluded(ps, &q) {
                return Some(q);
            }
        }
        step *= Rational::from_integer(2.into());
    }
    None
}

struct PlaneLimit {
    /// Enclosure of `max_u min_j (<u, d_j> - t_j)`.
    value: Interval,
    /// Candidate maximising directions (enclosures of unit vectors).
    directions: Vec<[Interval; 2]>,
}

fn plane_limit(qs: &[Point], p: &Point, prec: Precision) -> PlaneLimit {
    let ds: Vec<[Rational; 2]> = qs.iter().map(|q| [&q.x[0] - &p.x[0], &q.x[1] - &p.x[1]]).collect();
    let mut directions: Vec<[Interval; 2]> = Vec::new();
    for dj in &ds {
        let n2 = &dj[0] * &dj[0] + &dj[1] * &dj[1];
        if n2.is_zero() {
            continue;
        }
        let r = Interval::point(n2).sqrt(prec).expect("nonnegative");
        let inv = Interval::one().checked_div(&r).expect("positive");
        directions.push([inv.scale(&dj[0]), inv.scale(&dj[1])]);
    }
    for j in 0..qs.len() {
        for k in j + 1..qs.len() {
            let w = [&ds[j][0] - &ds[k][0], &ds[j][1] - &ds[k][1]];
            let c = &qs[j].t - &qs[k].t;
            let n2 = &w[0] * &w[0] + &w[1] * &w[1];
            if n2.is_zero() {
                continue;
            }
            let rad = Rational::one() - &c * &c / &n2;
            if rad.is_negative() {
                continue;
            }
            let base = [&c * &w[0] / &n2, &c * &w[1] / &n2];
            let root = Interval::point(rad).sqrt(prec).expect("nonnegative");
            let norm = Interval::point(n2).sqrt(prec).expect("nonnegative");
            let inv = Interval::one().checked_div(&norm).expect("positive");
            let perp = [inv.scale(&(-&w[1])), inv.scale(&w[0])];
            for sign in [1i64, -1] {
                let sr = root.scale(&Rational::from_integer(sign.into()));
                directions.push([
                    &Interval::point(base[0].clone()) + &(&sr * &perp[0]),
                    &Interval::point(base[1].clone()) + &(&sr * &perp[1]),
                ]);
            }
        }
    }
    if directions.is_empty() {
        directions.push([Interval::one(), Interval::zero()]);
    }
    let mut value: Option<Interval> = None;
    for u in &directions {
        let m = ds
            .iter()
            .zip(qs)
            .map(|(dj, q)| &(&u[0].scale(&dj[0]) + &u[1].scale(&dj[1])) - &Interval::point(q.t.clone()))
            .reduce(|a, b| a.min(&b))
            .expect("non-empty");
        value = Some(match value {
            None => m,
            Some(v) => v.max(&m),
        });
    }
    PlaneLimit {
        value: value.expect("non-empty").rounded(prec),
        directions,
    }
}

/// Certified decision for one sender in 2+1 dimensions.
fn single_sender_plane(qs: &[Point], p: &Point, p_index: usize, start: Precision) -> SeparationVerdict {
    if gathers(qs, p) {
        return SeparationVerdict::separated(Event::Point(p.clone()));
    }
    let mut prec = start;
    loop {
        let lim = plane_limit(qs, p, prec);
        let limit = &Interval::point(-&p.t) - &lim.value;
        if !limit.lo().is_negative() {
            return SeparationVerdict::not_separated(CoverReason::DirectionalLimit {
                p_index,
                limit_lower_bound: format_rational(limit.lo()),
            });
        }
        if limit.hi().is_negative() {
            for u in &lim.directions {
                let mid: Vec<Rational> = u
                    .iter()
                    .map(|c| (c.lo() + c.hi()) / Rational::from_integer(2.into()))
                    .collect();
                if let Some(unit) = rational_unit_near(&mid, prec.bits()) {
                    if let Some(q) = certificate_along(qs, std::slice::from_ref(p), &unit) {
                        return SeparationVerdict::separated(Event::Point(q));
                    }
                }
            }
        }
        match prec.escalate() {
            Some(next) => prec = next,
            None => {
                return SeparationVerdict::unknown(format!(
                    "directional limit enclosure [{}, {}] undecided at maximum precision",
                    limit.lo().to_f64().unwrap_or(f64::NAN),
                    limit.hi().to_f64().unwrap_or(f64::NAN)
                ))
            }
        }
    }
}

fn float_unit(v: &[f64]) -> Option<Vec<Rational>> {
    let r: Vec<Rational> = v
        .iter()
        .map(|c| Rational::from_float(*c).unwrap_or_else(Rational::zero))
        .collect();
    rational_unit_near(&r, 40)
}

/// Deterministic and seeded-random escape directions for the search.
fn search_directions(d: usize, qs: &[Point], ps: &[Point]) -> Vec<Vec<Rational>> {
    let mut dirs = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[i] = s;
            dirs.extend(float_unit(&v));
        }
    }
    let n = qs.len() as f64;
    let centroid: Vec<f64> = (0..d)
        .map(|i| qs.iter().map(|q| q.x[i].to_f64().unwrap_or(0.0)).sum::<f64>() / n)
        .collect();
    for q in qs {
        let v: Vec<f64> = (0..d).map(|i| q.x[i].to_f64().unwrap_or(0.0) - centroid[i]).collect();
        dirs.extend(float_unit(&v));
        for p in ps {
            let v: Vec<Rational> = sub(&q.x, &p.x);
            let fv: Vec<f64> = v.iter().map(|c| c.to_f64().unwrap_or(0.0)).collect();
            dirs.extend(float_unit(&fv));
            dirs.extend(float_unit(&fv.iter().map(|c| -c).collect::<Vec<_>>()));
        }
    }
    for p in ps {
        let v: Vec<f64> = (0..d).map(|i| centroid[i] - p.x[i].to_f64().unwrap_or(0.0)).collect();
        dirs.extend(float_unit(&v));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_9a7e);
    for _ in 0..256 {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        dirs.extend(float_unit(&v));
    }
    dirs
}

pub(super) fn decide(d: usize, qs: &[Point], ps: &[Point], precision: Precision) -> SeparationVerdict {
    if d == 2 && ps.len() == 1 {
        return single_sender_plane(qs, &ps[0], 0, precision);
    }
    if d == 2 {
        // Monotonicity in the senders: covered by one sender => covered.
        for (i, p) in ps.iter().enumerate() {
            let v = single_sender_plane(qs, p, i, precision);
            if v.is_not_separated() {
                return v;
            }
        }
    }
    // Certificate search: the receivers themselves, then asymptotic rays.
    for q in qs {
        if gathers(qs, q) && excluded(ps, q) {
            return SeparationVerdict::separated(Event::Point(q.clone()));
        }
    }
    for u in search_directions(d, qs, ps) {
        if let Some(q) = certificate_along(qs, ps, &u) {
            return SeparationVerdict::separated(Event::Point(q));
        }
    }
    SeparationVerdict::unknown(format!(
        "no certificate found for {} receivers and {} senders in {}+1 dimensions",
        qs.len(),
        ps.len(),
        d
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal_geometry::{operationally_separated, Backend};
    use crate::rational::{int, rat};

    fn pt(t: Rational, x: Rational, y: Rational) -> Event {
        Event::point(t, vec![x, y])
    }

    #[test]
    fn rational_units_are_exact() {
        for v in [
            [int(3), int(4)],
            [int(-1), int(2)],
            [int(0), int(-5)],
            [rat(1, 3), int(0)],
        ] {
            let u = rational_unit_near(&v, 32).unwrap();
            let n2: Rational = u.iter().map(|c| c * c).sum();
            assert_eq!(n2, Rational::one());
            let cos = dot(&u, &v);
            assert!(cos.is_positive());
        }
    }

    #[test]
    fn square_of_receivers_is_jammed_below_cos_pi_over_four() {
        // receivers at (±1, 0), (0, ±1); the jamming window is (0, cos(pi/4)]
        let b = Backend::minkowski(2);
        let qs = [
            pt(int(0), int(1), int(0)),
            pt(int(0), int(0), int(1)),
            pt(int(0), int(-1), int(0)),
            pt(int(0), int(0), int(-1)),
        ];
        let p = [pt(rat(7, 10), int(0), int(0))];
        let v = operationally_separated(&b, &qs, &p).unwrap();
        assert!(v.is_not_separated(), "{v:?}");
        // removing one receiver opens an escape route
        let v = operationally_separated(&b, &qs[..3], &p).unwrap();
        assert!(v.is_separated(), "{v:?}");
        assert!(v.verify(&b, &qs[..3], &p).unwrap());
        // raising the sender above cos(pi/4) opens one for the full tuple
        let p = [pt(rat(3, 4), int(0), int(0))];
        let v = operationally_separated(&b, &qs, &p).unwrap();
        assert!(v.is_separated());
        assert!(v.verify(&b, &qs, &p).unwrap());
    }

    #[test]
    fn sender_inside_common_future_is_its_own_certificate() {
        let b = Backend::minkowski(2);
        let qs = [pt(int(0), int(1), int(0)), pt(int(0), int(-1), int(0))];
        let p = [pt(int(5), int(0), int(0))];
        let v = operationally_separated(&b, &qs, &p).unwrap();
        assert!(v.is_separated());
        assert_eq!(v.gathering_point(), Some(&p[0]));
    }

    #[test]
    fn three_dimensional_search_finds_escape() {
        let b = Backend::minkowski(3);
        let qs = [
            Event::point(int(0), vec![int(1), int(0), int(0)]),
            Event::point(int(0), vec![int(-1), int(0), int(0)]),
        ];
        // a sender between the receivers covers their common future
        let p = [Event::point(int(0), vec![int(0), int(0), int(0)])];
        assert!(!operationally_separated(&b, &qs, &p).unwrap().is_separated());
        let p = [Event::point(int(0), vec![int(0), int(5), int(0)])];
        let v = operationally_separated(&b, &qs, &p).unwrap();
        assert!(v.is_separated());
        assert!(v.verify(&b, &qs, &p).unwrap());
    }
}
