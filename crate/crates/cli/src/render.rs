//! Static SVG figures. Output depends only on the inputs: coordinates are
//! printed with a fixed number of decimals and elements are emitted in a
//! fixed order, so identical scenarios give byte-identical files.

use std::fmt::Write as _;

use causalbox::boxes::Srv;
use causalbox::causal_geometry::{Backend, Event, FiniteOrder, TerminatedDiagram};
use causalbox::jamming::{build_config, timeslice_picture};
use causalbox::rational::{int, to_f64};
use causalbox::Rational;
use clap::ValueEnum;

use crate::scenario::Scenario;
use crate::CliError;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;
const INPUT_COLOR: &str = "#1f5fbf";
const OUTPUT_COLOR: &str = "#555555";
const SINGULARITY_COLOR: &str = "#c0392b";

/// Figure kinds. `Auto` picks the natural figure for the backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Auto,
    Cone,
    Timeslice,
    Conformal,
    Hasse,
}

/// Affine map from a world rectangle onto the drawing area, time upward.
struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    fn fit(xs: (f64, f64), ys: (f64, f64)) -> Frame {
        let span = (xs.1 - xs.0).max(ys.1 - ys.0).max(1e-9);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        // center the shorter side
        let x0 = xs.0 - ((span - (xs.1 - xs.0)) / 2.0);
        let y0 = ys.0 - ((span - (ys.1 - ys.0)) / 2.0);
        Frame { x0, y0, scale }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.scale
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - MARGIN - (y - self.y0) * self.scale
    }

    fn len(&self, l: f64) -> f64 {
        l * self.scale
    }

    fn top(&self) -> f64 {
        self.y0 + (SIZE - 2.0 * MARGIN) / self.scale
    }

    fn right(&self) -> f64 {
        self.x0 + (SIZE - 2.0 * MARGIN) / self.scale
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Svg {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE:.0}" height="{SIZE:.0}" viewBox="0 0 {SIZE:.0} {SIZE:.0}">"#
        );
        let _ = writeln!(body, "<title>{}</title>", escape(title));
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        Svg { body }
    }

    fn raw(&mut self, s: &str) {
        self.body.push_str(s);
        self.body.push('\n');
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" {style}/>"#,
            a.0, a.1, b.0, b.1
        );
    }

    fn text(&mut self, at: (f64, f64), s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{}</text>"#,
            at.0,
            at.1,
            escape(s)
        );
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str) {
        let style = r#"stroke="black" stroke-width="1""#;
        self.line((MARGIN, SIZE - MARGIN), (SIZE - MARGIN, SIZE - MARGIN), style);
        self.line((MARGIN, SIZE - MARGIN), (MARGIN, MARGIN), style);
        self.text((SIZE - MARGIN + 6.0, SIZE - MARGIN + 4.0), xlabel);
        self.text((MARGIN - 4.0, MARGIN - 8.0), ylabel);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn coords(e: &Event) -> Option<(f64, Vec<f64>)> {
    e.as_point().map(|p| (to_f64(&p.t), p.x.iter().map(to_f64).collect()))
}

/// Renders a scenario. Finite orders always give their Hasse diagram.
pub fn render(sc: &Scenario, figure: Figure, t: Option<&Rational>) -> Result<String, CliError> {
    if let Some((n, h)) = &sc.njam {
        return njam_timeslice(*n, h, t);
    }
    let Some(backend) = &sc.backend else {
        let mut svg = Svg::new("empty scenario");
        svg.axes("x", "t");
        return Ok(svg.finish());
    };
    match (backend, figure) {
        (Backend::FiniteOrder(o), _) => Ok(hasse(o, sc)),
        (Backend::Minkowski { d: 2 }, Figure::Auto | Figure::Timeslice) => Ok(minkowski_timeslice(sc, t)),
        (Backend::Minkowski { d: 1 }, Figure::Auto | Figure::Cone) => Ok(cone_diagram(sc, None)),
        (Backend::Terminated(diagram), Figure::Auto | Figure::Conformal | Figure::Cone) => {
            Ok(cone_diagram(sc, Some(diagram)))
        }
        (b, f) => Err(CliError::Usage(format!(
            "figure `{}` is not available for the {} backend",
            f.to_possible_value()
                .map(|v| v.get_name().to_string())
                .unwrap_or_default(),
            b.name()
        ))),
    }
}

fn all_points(sc: &Scenario) -> Vec<(&Srv, bool)> {
    sc.inputs
        .iter()
        .map(|s| (s, true))
        .chain(sc.outputs.iter().map(|s| (s, false)))
        .collect()
}

/// 1+1 diagram: events with their future light cones, inputs in blue.
/// With a terminated backend the singularity polyline is drawn and cones
/// are clipped below it.
fn cone_diagram(sc: &Scenario, singularity: Option<&TerminatedDiagram>) -> String {
    let pts: Vec<(String, bool, f64, f64)> = all_points(sc)
        .into_iter()
        .filter_map(|(s, is_in)| coords(&s.location).map(|(t, x)| (s.name.clone(), is_in, t, x[0])))
        .collect();
    let (mut xmin, mut xmax, mut tmin, mut tmax) = (-1.0f64, 1.0f64, 0.0f64, 1.0f64);
    for (_, _, t, x) in &pts {
        xmin = xmin.min(*x);
        xmax = xmax.max(*x);
        tmin = tmin.min(*t);
        tmax = tmax.max(*t);
    }
    if let Some(d) = singularity {
        for (x, t) in d.vertices() {
            xmin = xmin.min(to_f64(x));
            xmax = xmax.max(to_f64(x));
            tmax = tmax.max(to_f64(t));
        }
    }
    let frame = Frame::fit((xmin - 1.0, xmax + 1.0), (tmin - 1.0, tmax + 2.0));
    let title = match singularity {
        Some(_) => format!("{}: causal diagram with singularity", sc.name),
        None => format!("{}: light-cone diagram", sc.name),
    };
    let mut svg = Svg::new(&title);
    svg.axes("x", "t");
    let (left, right, top) = (frame.x0, frame.right(), frame.top());

    if let Some(d) = singularity {
        // region below the singularity, used to clip the cones
        let mut path = String::new();
        let mut xs: Vec<f64> = vec![left];
        xs.extend(
            d.vertices()
                .iter()
                .map(|(x, _)| to_f64(x))
                .filter(|x| *x > left && *x < right),
        );
        xs.push(right);
        let sing = |x: f64| to_f64(&d.singularity_time(&rational_of(x)));
        let _ = write!(path, "M {:.3} {:.3}", frame.px(left), frame.py(frame.y0));
        for &x in &xs {
            let _ = write!(path, " L {:.3} {:.3}", frame.px(x), frame.py(sing(x)));
        }
        let _ = write!(path, " L {:.3} {:.3} Z", frame.px(right), frame.py(frame.y0));
        svg.raw(&format!(r#"<clipPath id="below"><path d="{path}"/></clipPath>"#));
        let poly: Vec<String> = xs
            .iter()
            .map(|&x| format!("{:.3},{:.3}", frame.px(x), frame.py(sing(x))))
            .collect();
        svg.raw(&format!(
            r#"<polyline points="{}" fill="none" stroke="{SINGULARITY_COLOR}" stroke-width="3" stroke-dasharray="6 3"/>"#,
            poly.join(" ")
        ));
        svg.raw(r#"<g clip-path="url(#below)">"#);
    } else {
        svg.raw("<g>");
    }
    for (_, is_in, t, x) in &pts {
        let color = if *is_in { INPUT_COLOR } else { OUTPUT_COLOR };
        let h = top - t;
        let style = format!(r#"stroke="{color}" stroke-width="1" stroke-opacity="0.6""#);
        svg.line((frame.px(*x), frame.py(*t)), (frame.px(x - h), frame.py(top)), &style);
        svg.line((frame.px(*x), frame.py(*t)), (frame.px(x + h), frame.py(top)), &style);
    }
    svg.raw("</g>");
    draw_markers(
        &mut svg,
        &pts.iter()
            .map(|(n, i, t, x)| (n.clone(), *i, frame.px(*x), frame.py(*t)))
            .collect::<Vec<_>>(),
    );
    svg.finish()
}

fn draw_markers(svg: &mut Svg, pts: &[(String, bool, f64, f64)]) {
    // collocated variables share one marker and a joined label
    let mut done: Vec<(i64, i64)> = Vec::new();
    for (_, is_in, px, py) in pts {
        let key = ((px * 1000.0).round() as i64, (py * 1000.0).round() as i64);
        if done.contains(&key) {
            continue;
        }
        done.push(key);
        let names: Vec<&str> = pts
            .iter()
            .filter(|(_, _, qx, qy)| ((qx * 1000.0).round() as i64, (qy * 1000.0).round() as i64) == key)
            .map(|(n, _, _, _)| n.as_str())
            .collect();
        let color = if *is_in { INPUT_COLOR } else { OUTPUT_COLOR };
        svg.raw(&format!(r#"<circle cx="{px:.3}" cy="{py:.3}" r="4" fill="{color}"/>"#));
        svg.text((px + 6.0, py - 6.0), &names.join(", "));
    }
}

fn rational_of(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(|| int(0))
}

fn disc_svg(frame: &Frame, (x, y, r): (f64, f64, f64), attrs: &str) -> String {
    format!(
        r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" {attrs}/>"#,
        frame.px(x),
        frame.py(y),
        frame.len(r)
    )
}

/// Gray discs, their common intersection (nested clip paths) and the
/// blue disc.
fn disc_picture(
    title: &str,
    frame: &Frame,
    gray: &[(f64, f64, f64)],
    blue: &[(f64, f64, f64)],
    marks: &[(String, bool, f64, f64)],
) -> String {
    let mut svg = Svg::new(title);
    svg.axes("x", "y");
    for (i, d) in gray.iter().enumerate() {
        let parent = if i == 0 {
            String::new()
        } else {
            format!(r#" clip-path="url(#cap{})""#, i - 1)
        };
        svg.raw(&format!(
            r#"<clipPath id="cap{i}"{parent}>{}</clipPath>"#,
            disc_svg(frame, *d, "")
        ));
    }
    for d in gray {
        svg.raw(&disc_svg(
            frame,
            *d,
            r##"fill="#999999" fill-opacity="0.2" stroke="#666666""##,
        ));
    }
    if !gray.is_empty() {
        svg.raw(&format!(
            r##"<rect x="0" y="0" width="{SIZE:.0}" height="{SIZE:.0}" fill="#333333" fill-opacity="0.45" clip-path="url(#cap{})"/>"##,
            gray.len() - 1
        ));
    }
    for d in blue {
        svg.raw(&disc_svg(
            frame,
            *d,
            &format!(r#"fill="{INPUT_COLOR}" fill-opacity="0.3" stroke="{INPUT_COLOR}""#),
        ));
    }
    draw_markers(&mut svg, marks);
    svg.finish()
}

fn njam_timeslice(n: usize, h: &Rational, t: Option<&Rational>) -> Result<String, CliError> {
    let config = build_config(n, h).map_err(|e| CliError::Domain(e.to_string()))?;
    let t = t.cloned().unwrap_or_else(|| int(2));
    let pic = timeslice_picture(&config, &t);
    let reach = pic
        .discs
        .iter()
        .map(|(x, y, r)| x.abs().max(y.abs()) + r)
        .fold(1.0, f64::max);
    let frame = Frame::fit((-reach, reach), (-reach, reach));
    let mut marks: Vec<(String, bool, f64, f64)> = pic
        .discs
        .iter()
        .enumerate()
        .map(|(i, (x, y, _))| (format!("q{}", i + 1), false, frame.px(*x), frame.py(*y)))
        .collect();
    marks.push((
        "p".into(),
        true,
        frame.px(pic.jammer_disc.0),
        frame.py(pic.jammer_disc.1),
    ));
    let title = format!(
        "njam({n}, {}) timeslice at t = {}",
        causalbox::rational::format_rational(h),
        causalbox::rational::format_rational(&t)
    );
    Ok(disc_picture(&title, &frame, &pic.discs, &[pic.jammer_disc], &marks))
}

/// 1+2 timeslice at `t` (default: one unit after the latest event): each
/// event's future is a disc of radius `t − t_e`.
fn minkowski_timeslice(sc: &Scenario, t: Option<&Rational>) -> String {
    let pts: Vec<(String, bool, f64, f64, f64)> = all_points(sc)
        .into_iter()
        .filter_map(|(s, is_in)| coords(&s.location).map(|(t, x)| (s.name.clone(), is_in, t, x[0], x[1])))
        .collect();
    let t = t
        .map(to_f64)
        .unwrap_or_else(|| pts.iter().map(|p| p.2).fold(0.0, f64::max) + 1.0);
    let disc = |p: &(String, bool, f64, f64, f64)| (p.3, p.4, (t - p.2).max(0.0));
    let gray: Vec<_> = pts.iter().filter(|p| !p.1).map(disc).collect();
    let blue: Vec<_> = pts.iter().filter(|p| p.1).map(disc).collect();
    let reach = gray
        .iter()
        .chain(&blue)
        .map(|(x, y, r)| x.abs().max(y.abs()) + r)
        .fold(1.0, f64::max);
    let frame = Frame::fit((-reach, reach), (-reach, reach));
    let marks: Vec<_> = pts
        .iter()
        .map(|p| (p.0.clone(), p.1, frame.px(p.3), frame.py(p.4)))
        .collect();
    disc_picture(
        &format!("{}: timeslice at t = {t:.3}", sc.name),
        &frame,
        &gray,
        &blue,
        &marks,
    )
}

/// Hasse diagram: elements ranked by the longest chain below them.
fn hasse(o: &FiniteOrder, sc: &Scenario) -> String {
    let n = o.len();
    let mut rank = vec![0usize; n];
    // elements sorted so that predecessors come first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&a| (0..n).filter(|&b| o.less(b, a)).count());
    for &a in &order {
        rank[a] = (0..n).filter(|&b| o.less(b, a)).map(|b| rank[b] + 1).max().unwrap_or(0);
    }
    let levels = rank.iter().copied().max().map_or(1, |r| r + 1);
    let mut pos = vec![(0.0, 0.0); n];
    for r in 0..levels {
        let members: Vec<usize> = (0..n).filter(|&a| rank[a] == r).collect();
        for (k, &a) in members.iter().enumerate() {
            let x = MARGIN + (SIZE - 2.0 * MARGIN) * (k as f64 + 1.0) / (members.len() as f64 + 1.0);
            let y = SIZE - MARGIN - (SIZE - 2.0 * MARGIN) * (r as f64 + 0.5) / levels as f64;
            pos[a] = (x, y);
        }
    }
    let mut svg = Svg::new(&format!("{}: Hasse diagram", sc.name));
    for (a, b) in o.pairs() {
        let covered = (0..n).any(|c| o.less(a, c) && o.less(c, b));
        if !covered {
            svg.line(pos[a], pos[b], r#"stroke="black" stroke-width="1""#);
        }
    }
    for (e, p) in pos.iter().enumerate() {
        let names: Vec<String> = all_points(sc)
            .into_iter()
            .filter(|(s, _)| s.location == Event::element(e))
            .map(|(s, _)| s.name.clone())
            .collect();
        let is_in = all_points(sc)
            .iter()
            .any(|(s, i)| *i && s.location == Event::element(e));
        let color = if is_in { INPUT_COLOR } else { OUTPUT_COLOR };
        svg.raw(&format!(
            r#"<circle cx="{:.3}" cy="{:.3}" r="5" fill="{color}"/>"#,
            p.0, p.1
        ));
        let label = if names.is_empty() {
            e.to_string()
        } else {
            format!("{e}: {}", names.join(", "))
        };
        svg.text((p.0 + 7.0, p.1 - 7.0), &label);
    }
    svg.finish()
}
