//! Symmetric jamming configurations in 1+2 Minkowski space: a jammer
//! `p = (h, 0, 0)` and receivers `q_j = (0, cos(2jπ/n), sin(2jπ/n))` such
//! that the full tuple is not operationally separated from `p` while every
//! `(n-1)`-subtuple is.
//!
//! Two independent routes decide the configuration: the closed-form route
//! compares `h` with the limits `cos(π/n)` and `cos(2π/n)`, and the
//! timeslice oracle enumerates the extreme points of the receivers'
//! disc intersection on a grid of time slices and adds the asymptotic
//! directional margin.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::causal_geometry::{PoincareMap, SeparationStatus};
use crate::interval::{cos_pi, sin_pi, Certified, Interval, Precision};
use crate::rational::{format_rational, int, rat, to_f64};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JamError {
    #[error("n = {0} is not supported: the construction needs n >= 3")]
    Unsupported(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("height h must lie in (0, 1), got {0}")]
    InvalidHeight(String),
    #[error("unsupported transform: {0}")]
    Transform(String),
}

/// A point with enclosed coordinates `(t, x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IPoint {
    pub t: Interval,
    pub x: Interval,
    pub y: Interval,
}

/// The admissible heights `(cos 2π/n, cos π/n]`: lower open, upper closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HRange {
    pub lower: Interval,
    pub upper: Interval,
}

fn check_n(n: usize) -> Result<(), JamError> {
    if n < 3 {
        Err(JamError::Unsupported(n))
    } else {
        Ok(())
    }
}

/// Enclosures of `cos(2π/n)` (open end) and `cos(π/n)` (closed end).
pub fn valid_h_range(n: usize, prec: Precision) -> Result<HRange, JamError> {
    check_n(n)?;
    let n = n as i64;
    Ok(HRange {
        lower: cos_pi(&rat(2, n), prec),
        upper: cos_pi(&rat(1, n), prec),
    })
}

/// Enclosures of `f(t)` and `g(t)`:
/// `f(t) = t - sqrt(t² + cos(2π/n) - 2 cos(π/n) sqrt(t² - sin²(π/n)))`,
/// `g(t) = t + cos(2π/n) - sqrt(t² - sin²(2π/n))`.
pub fn boundary_functions(n: usize, t: &Rational, prec: Precision) -> Result<(Interval, Interval), JamError> {
    check_n(n)?;
    if *t < Rational::one() {
        return Err(JamError::Domain(format!("t = {} < 1", format_rational(t))));
    }
    let ni = n as i64;
    let c1 = cos_pi(&rat(1, ni), prec);
    let c2 = cos_pi(&rat(2, ni), prec);
    let s1 = sin_pi(&rat(1, ni), prec);
    let s2 = sin_pi(&rat(2, ni), prec);
    let tt = Interval::point(t * t);
    let ti = Interval::point(t.clone());
    let inner = (&tt - &s1.square())
        .sqrt(prec)
        .expect("t >= 1 keeps the radicand nonnegative");
    let radicand = (&(&tt + &c2) - &(&c1 * &inner).scale(&int(2))).rounded(prec);
    let f = &ti - &radicand.sqrt(prec).expect("radicand is a square of a radius");
    let g_root = (&tt - &s2.square())
        .sqrt(prec)
        .expect("t >= 1 keeps the radicand nonnegative");
    let g = &(&ti + &c2) - &g_root;
    Ok((f.rounded(prec), g.rounded(prec)))
}

/// Whether `h` lies in the admissible range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMembership {
    Inside,
    Outside,
    Unknown,
}

/// A jamming configuration, possibly moved by a rigid motion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NJamConfig {
    pub n: usize,
    pub h: Rational,
    pub precision: Precision,
    pub jammer: IPoint,
    pub receivers: Vec<IPoint>,
    pub in_range: RangeMembership,
    /// Rigid motion applied to the standard placement, if any.
    pub motion: Option<PoincareMap>,
}

fn membership(h: &Rational, range: &HRange) -> RangeMembership {
    let hp = Interval::point(h.clone());
    let above_lower = hp.compare(&range.lower);
    let below_upper = hp.compare(&range.upper);
    match (above_lower, below_upper) {
        (Certified::Greater, Certified::Less | Certified::Equal) => RangeMembership::Inside,
        (Certified::Less | Certified::Equal, _) | (_, Certified::Greater) => RangeMembership::Outside,
        _ => RangeMembership::Unknown,
    }
}

/// Builds the configuration at the environment's starting precision,
/// escalating until range membership is certified.
pub fn build_config(n: usize, h: &Rational) -> Result<NJamConfig, JamError> {
    let mut prec = Precision::from_env();
    loop {
        let c = build_config_with(n, h, prec)?;
        if c.in_range != RangeMembership::Unknown {
            return Ok(c);
        }
        match prec.escalate() {
            Some(p) => prec = p,
            None => return Ok(c),
        }
    }
}

pub fn build_config_with(n: usize, h: &Rational, prec: Precision) -> Result<NJamConfig, JamError> {
    check_n(n)?;
    if *h <= Rational::zero() || *h >= Rational::one() {
        return Err(JamError::InvalidHeight(format_rational(h)));
    }
    let range = valid_h_range(n, prec)?;
    let ni = n as i64;
    let receivers = (1..=ni)
        .map(|j| IPoint {
            t: Interval::zero(),
            x: cos_pi(&rat(2 * j, ni), prec),
            y: sin_pi(&rat(2 * j, ni), prec),
        })
        .collect();
    Ok(NJamConfig {
        n,
        h: h.clone(),
        precision: prec,
        jammer: IPoint {
            t: Interval::point(h.clone()),
            x: Interval::zero(),
            y: Interval::zero(),
        },
        receivers,
        in_range: membership(h, &range),
        motion: None,
    })
}

impl NJamConfig {
    /// Image under a time-preserving Poincaré map (spatial rotation or
    /// reflection plus translation).
    pub fn transformed(&self, map: &PoincareMap) -> Result<NJamConfig, JamError> {
        if map.spatial_dim() != 2 || !map.is_lorentz() {
            return Err(JamError::Transform("expected a 1+2 Poincaré map".into()));
        }
        let time_preserving =
            map.entry(0, 0).is_one() && (1..3).all(|i| map.entry(0, i).is_zero() && map.entry(i, 0).is_zero());
        if !time_preserving {
            return Err(JamError::Transform("boosts are not supported".into()));
        }
        let apply = |p: &IPoint| -> IPoint {
            let c = [&p.t, &p.x, &p.y];
            let row = |i: usize| -> Interval {
                let mut acc = Interval::point(map.translation[i].clone());
                for (j, cj) in c.iter().enumerate() {
                    acc = &acc + &cj.scale(map.entry(i, j));
                }
                acc.rounded(self.precision)
            };
            IPoint {
                t: row(0),
                x: row(1),
                y: row(2),
            }
        };
        let motion = match &self.motion {
            Some(m0) => map.compose(m0),
            None => map.clone(),
        };
        Ok(NJamConfig {
            jammer: apply(&self.jammer),
            receivers: self.receivers.iter().map(apply).collect(),
            motion: Some(motion),
            ..self.clone()
        })
    }

    /// The same configuration rebuilt at another precision.
    pub fn with_precision(&self, prec: Precision) -> NJamConfig {
        let base = build_config_with(self.n, &self.h, prec).expect("parameters were valid");
        match &self.motion {
            Some(m) => base.transformed(m).expect("motion was accepted before"),
            None => base,
        }
    }
}

/// Verdicts of one route: the full tuple and each subtuple omitting `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteVerdict {
    pub full: SeparationStatus,
    pub subtuples: Vec<SeparationStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleStatus {
    Agree,
    Disagreement,
    Unknown,
}

/// Both routes' verdicts plus their agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictBundle {
    pub n: usize,
    pub h: String,
    pub in_range: RangeMembership,
    pub h_range: (f64, f64),
    pub closed_form: RouteVerdict,
    pub oracle: RouteVerdict,
    pub status: BundleStatus,
    pub precision_bits: u32,
}

impl VerdictBundle {
    /// Full tuple not separated and every subtuple separated, agreed by both
    /// routes.
    pub fn theorem_holds(&self) -> bool {
        self.status == BundleStatus::Agree
            && self.closed_form.full == SeparationStatus::NotSeparated
            && self
                .closed_form
                .subtuples
                .iter()
                .all(|s| *s == SeparationStatus::Separated)
    }
}

fn closed_form_route(n: usize, h: &Rational, prec: Precision) -> RouteVerdict {
    let range = valid_h_range(n, prec).expect("n checked at construction");
    let hp = Interval::point(h.clone());
    let full = match hp.compare(&range.upper) {
        Certified::Less | Certified::Equal => SeparationStatus::NotSeparated,
        Certified::Greater => SeparationStatus::Separated,
        Certified::Unknown => SeparationStatus::Unknown,
    };
    let sub = match hp.compare(&range.lower) {
        Certified::Greater => SeparationStatus::Separated,
        Certified::Less | Certified::Equal => SeparationStatus::NotSeparated,
        Certified::Unknown => SeparationStatus::Unknown,
    };
    RouteVerdict {
        full,
        subtuples: vec![sub; n],
    }
}

/// Relative slice times `s = t - t_q` sampled by the oracle.
pub fn oracle_grid() -> Vec<Rational> {
    (-2i32..=20)
        .map(|i| {
            let p = if i >= 0 {
                Rational::from_integer(num_bigint::BigInt::one() << i as usize)
            } else {
                Rational::new(num_bigint::BigInt::one(), num_bigint::BigInt::one() << (-i) as usize)
            };
            Rational::one() + p
        })
        .collect()
}

/// Outcome of one slice: certified escape from the jammer's future, certified
/// containment, or neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SliceOutcome {
    Escapes,
    Contained,
    Unknown,
}

fn sq_dist(ax: &Interval, ay: &Interval, bx: &Interval, by: &Interval) -> Interval {
    &(ax - bx).square() + &(ay - by).square()
}

/// One slice at relative time `s`: the receiver discs have radius `s`, the
/// jammer's future has radius `s - h_eff` around its spatial position.
fn slice(
    centers: &[(Interval, Interval)],
    jam: &(Interval, Interval),
    h_eff: &Rational,
    s: &Rational,
    prec: Precision,
) -> SliceOutcome {
    let s2 = Interval::point(s * s);
    let r = s - h_eff;
    if r < Rational::zero() {
        // the jammer's future does not reach this slice yet; the receivers'
        // intersection is non-empty, so the slice escapes
        return SliceOutcome::Escapes;
    }
    let r2 = Interval::point(&r * &r);
    // candidates: (point, index of circles it lies on)
    let mut candidates: Vec<((Interval, Interval), Vec<usize>)> = Vec::new();
    for (j, c) in centers.iter().enumerate() {
        let d2 = sq_dist(&c.0, &c.1, &jam.0, &jam.1);
        let Some(d) = d2.sqrt(prec) else { continue };
        let Some(inv) = Interval::one().checked_div(&d) else {
            continue;
        };
        let k = Interval::point(s.clone());
        let px = (&c.0 + &(&(&(&c.0 - &jam.0) * &inv) * &k)).rounded(prec);
        let py = (&c.1 + &(&(&(&c.1 - &jam.1) * &inv) * &k)).rounded(prec);
        candidates.push(((px, py), vec![j]));
    }
    for i in 0..centers.len() {
        for k in i + 1..centers.len() {
            let (a, b) = (&centers[i], &centers[k]);
            let half = rat(1, 2);
            let mx = (&a.0 + &b.0).scale(&half);
            let my = (&a.1 + &b.1).scale(&half);
            let dx = &b.0 - &a.0;
            let dy = &b.1 - &a.1;
            let d2 = (&dx.square() + &dy.square()).rounded(prec);
            let Some(quarter) = d2.checked_div(&Interval::point(int(4))) else {
                continue;
            };
            let Some(hc) = (&s2 - &quarter).sqrt(prec) else {
                continue;
            };
            let Some(d) = d2.sqrt(prec) else { continue };
            let Some(scale) = hc.checked_div(&d) else { continue };
            for sign in [1i64, -1] {
                let sg = int(sign);
                let px = (&mx - &(&dy * &scale).scale(&sg)).rounded(prec);
                let py = (&my + &(&dx * &scale).scale(&sg)).rounded(prec);
                candidates.push(((px, py), vec![i, k]));
            }
        }
    }
    let mut any_escape = false;
    let mut all_contained = true;
    for ((px, py), on) in &candidates {
        let mut certain_member = true;
        let mut excluded = false;
        for (m, c) in centers.iter().enumerate() {
            if on.contains(&m) {
                continue;
            }
            let d2 = sq_dist(px, py, &c.0, &c.1);
            match d2.compare(&s2) {
                Certified::Less | Certified::Equal => {}
                Certified::Greater => {
                    excluded = true;
                    break;
                }
                Certified::Unknown => certain_member = false,
            }
        }
        if excluded {
            continue;
        }
        let dj = sq_dist(px, py, &jam.0, &jam.1);
        if certain_member && dj.certainly_gt(&r2) {
            any_escape = true;
        }
        if !dj.certainly_le(&r2) {
            all_contained = false;
        }
    }
    if any_escape {
        SliceOutcome::Escapes
    } else if all_contained {
        SliceOutcome::Contained
    } else {
        SliceOutcome::Unknown
    }
}

fn oracle_tuple(config: &NJamConfig, members: &[usize], gap_over_pi: &Rational) -> SeparationStatus {
    let prec = config.precision;
    let tq = config.receivers[0].t.clone();
    let h_eff_i = &config.jammer.t - &tq;
    let Some(h_eff) = h_eff_i.exact().cloned() else {
        return SeparationStatus::Unknown;
    };
    let centers: Vec<(Interval, Interval)> = members
        .iter()
        .map(|&j| (config.receivers[j].x.clone(), config.receivers[j].y.clone()))
        .collect();
    let jam = (config.jammer.x.clone(), config.jammer.y.clone());
    let mut escaped = false;
    let mut all_contained = true;
    for s in oracle_grid() {
        match slice(&centers, &jam, &h_eff, &s, prec) {
            SliceOutcome::Escapes => {
                escaped = true;
                break;
            }
            SliceOutcome::Contained => {}
            SliceOutcome::Unknown => all_contained = false,
        }
    }
    // asymptotic margin cos(G/2) - h, G the largest angular gap
    let limit = &cos_pi(&(gap_over_pi / int(2)), prec) - &Interval::point(h_eff);
    if escaped || limit.certainly_lt(&Interval::zero()) {
        return SeparationStatus::Separated;
    }
    let limit_nonneg = matches!(limit.compare(&Interval::zero()), Certified::Greater | Certified::Equal)
        || limit.lo() >= &Rational::zero();
    if all_contained && limit_nonneg {
        SeparationStatus::NotSeparated
    } else {
        SeparationStatus::Unknown
    }
}

fn oracle_route(config: &NJamConfig) -> RouteVerdict {
    let n = config.n as i64;
    let all: Vec<usize> = (0..config.n).collect();
    let full = oracle_tuple(config, &all, &rat(2, n));
    let subtuples = (0..config.n)
        .map(|skip| {
            let members: Vec<usize> = all.iter().copied().filter(|&j| j != skip).collect();
            oracle_tuple(config, &members, &rat(4, n))
        })
        .collect();
    RouteVerdict { full, subtuples }
}

fn agree(a: &RouteVerdict, b: &RouteVerdict) -> BundleStatus {
    let pairs = std::iter::once((a.full, b.full)).chain(a.subtuples.iter().copied().zip(b.subtuples.iter().copied()));
    let mut unknown = false;
    for (x, y) in pairs {
        if x == SeparationStatus::Unknown || y == SeparationStatus::Unknown {
            unknown = true;
        } else if x != y {
            return BundleStatus::Disagreement;
        }
    }
    if unknown {
        BundleStatus::Unknown
    } else {
        BundleStatus::Agree
    }
}

/// Runs both routes, escalating precision while anything is undecided.
pub fn verify_config(config: &NJamConfig) -> VerdictBundle {
    let mut current = config.clone();
    loop {
        let closed_form = closed_form_route(current.n, &current.h, current.precision);
        let oracle = oracle_route(&current);
        let status = agree(&closed_form, &oracle);
        let range = valid_h_range(current.n, current.precision).expect("n checked");
        let bundle = VerdictBundle {
            n: current.n,
            h: format_rational(&current.h),
            in_range: current.in_range,
            h_range: (range.lower.mid_f64(), range.upper.mid_f64()),
            closed_form,
            oracle,
            status,
            precision_bits: current.precision.bits(),
        };
        if status != BundleStatus::Unknown {
            return bundle;
        }
        match current.precision.escalate() {
            Some(p) => current = current.with_precision(p),
            None => return bundle,
        }
    }
}

/// Floating-point picture of one time slice, for rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeslicePicture {
    pub t: f64,
    /// Receiver discs `(x, y, r)`.
    pub discs: Vec<(f64, f64, f64)>,
    /// The jammer's future on this slice.
    pub jammer_disc: (f64, f64, f64),
}

pub fn timeslice_picture(config: &NJamConfig, t: &Rational) -> TimeslicePicture {
    let tf = to_f64(t);
    let discs = config
        .receivers
        .iter()
        .map(|q| (q.x.mid_f64(), q.y.mid_f64(), (tf - q.t.mid_f64()).max(0.0)))
        .collect();
    let j = &config.jammer;
    TimeslicePicture {
        t: tf,
        discs,
        jammer_disc: (j.x.mid_f64(), j.y.mid_f64(), (tf - j.t.mid_f64()).max(0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    #[test]
    fn ranges() {
        let r3 = valid_h_range(3, p()).unwrap();
        assert_eq!(r3.lower.exact(), Some(&rat(-1, 2)));
        assert_eq!(r3.upper.exact(), Some(&rat(1, 2)));
        let r4 = valid_h_range(4, p()).unwrap();
        assert_eq!(r4.lower.exact(), Some(&rat(0, 1)));
        assert!((r4.upper.mid_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(valid_h_range(2, p()), Err(JamError::Unsupported(2)));
    }

    #[test]
    fn f_at_one_is_one() {
        for n in 3..=12 {
            let (f, _) = boundary_functions(n, &int(1), p()).unwrap();
            assert!(f.contains(&int(1)), "n = {n}: {f:?}");
            assert!(f.width_f64() < 1e-9);
        }
        assert!(boundary_functions(5, &rat(1, 2), p()).is_err());
    }

    #[test]
    fn f_decreasing_g_limit() {
        let vals: Vec<Interval> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&t| boundary_functions(5, &int(t), p()).unwrap().0)
            .collect();
        for w in vals.windows(2) {
            assert!(w[1].certainly_lt(&w[0]));
        }
        let (_, g) = boundary_functions(5, &int(1_000_000), p()).unwrap();
        let c = (2.0 * std::f64::consts::PI / 5.0).cos();
        assert!((g.mid_f64() - c).abs() < 1e-4);
    }

    #[test]
    fn membership_examples() {
        assert_eq!(build_config(3, &rat(1, 2)).unwrap().in_range, RangeMembership::Inside);
        assert_eq!(build_config(3, &rat(1, 4)).unwrap().in_range, RangeMembership::Inside);
        assert_eq!(build_config(3, &rat(3, 4)).unwrap().in_range, RangeMembership::Outside);
    }

    #[test]
    fn bundles() {
        let b = verify_config(&build_config(3, &rat(1, 2)).unwrap());
        assert_eq!(b.status, BundleStatus::Agree, "{b:?}");
        assert!(b.theorem_holds());
        let b = verify_config(&build_config(5, &rat(7, 10)).unwrap());
        assert!(b.theorem_holds(), "{b:?}");
        let b = verify_config(&build_config(3, &rat(3, 4)).unwrap());
        assert_eq!(b.status, BundleStatus::Agree);
        assert_eq!(b.closed_form.full, SeparationStatus::Separated);
    }

    #[test]
    fn rigid_motion_keeps_verdicts() {
        let c = build_config(5, &rat(7, 10)).unwrap();
        let base = verify_config(&c);
        let m = PoincareMap::pythagorean_rotation(2, 1, 2, 3, 4, 5).with_translation(vec![int(3), rat(1, 2), int(-7)]);
        let moved = c.transformed(&m).unwrap();
        let b = verify_config(&moved);
        assert_eq!(b.closed_form, base.closed_form);
        assert_eq!(b.oracle, base.oracle);
    }
}
