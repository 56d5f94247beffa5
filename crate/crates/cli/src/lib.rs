//! Command-line front end: scenario ingestion, JSON reports and SVG
//! figures.
//!
//! Exit codes: 0 pass or satisfied, 1 violation or contradiction found,
//! 2 undecidable or unknown, 3 usage error.

pub mod render;
pub mod scenario;

use std::path::{Path, PathBuf};

use causalbox::case_studies::{
    compass_contradiction, degenerate_embedding_check, safe_embedding_check, CaseStudyError,
};
use causalbox::jamming::{build_config, timeslice_picture, verify_config, BundleStatus};
use causalbox::layouts::Preset;
use causalbox::monogamy::{
    classify, ns_monogamy_lp, signalling_monogamy, specific_input_value, MonogamyError, XorGame,
};
use causalbox::ons::{check_ons, enumerate_constraints, OnsError, OnsReport};
use causalbox::protocol::{build_protocol, loop_paradox_certificate, simulate, ProtocolError};
use causalbox::rational::{format_rational, parse_rational, to_f64};
use causalbox::Rational;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::render::Figure;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{file}:{line}:{column}: malformed JSON: {message}")]
    Json {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("undecidable: {0}")]
    Undecidable(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitStatus {
        match self {
            CliError::Undecidable(_) => ExitStatus::Undecidable,
            _ => ExitStatus::Usage,
        }
    }
}

impl From<causalbox::boxes::BoxError> for CliError {
    fn from(e: causalbox::boxes::BoxError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<OnsError> for CliError {
    fn from(e: OnsError) -> Self {
        match e {
            OnsError::UndecidableScenario { .. } => CliError::Undecidable(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Ons(o) => o.into(),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<CaseStudyError> for CliError {
    fn from(e: CaseStudyError) -> Self {
        match e {
            CaseStudyError::Ons(o) => o.into(),
            CaseStudyError::Protocol(p) => p.into(),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<MonogamyError> for CliError {
    fn from(e: MonogamyError) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Violation = 1,
    Undecidable = 2,
    Usage = 3,
}

#[derive(Debug, Parser)]
#[command(
    name = "causalbox",
    version,
    about = "Operational no-signalling analysis of correlation boxes in spacetime"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario JSON file, preset name, or `njam(n, h)`.
    #[arg(long)]
    pub scenario: String,
    /// Directory for report files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every operational no-signalling constraint.
    Check(ScenarioArgs),
    /// List the constraint instances implied by the geometry.
    Constraints(ScenarioArgs),
    /// Build a signalling protocol and loop certificate from a violation.
    Protocol {
        #[command(flatten)]
        common: ScenarioArgs,
        /// Also search over spatial reflections for the loop transform.
        #[arg(long)]
        allow_reflection: bool,
    },
    /// Run the signalling protocol by sampling the box.
    Simulate {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Significance level, as a rational such as `1/100`.
        #[arg(long, default_value = "1/100")]
        alpha: String,
    },
    /// Verdict bundle for the n-receiver jamming configuration.
    JamGeometry {
        #[arg(long)]
        n: usize,
        /// Jammer height, as a rational.
        #[arg(long)]
        h: String,
        /// Slice time for the emitted figure.
        #[arg(long, default_value = "2")]
        t: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Values of tripartite XOR monogamy games.
    Monogamy {
        /// `chsh`, `g_cl`, or a JSON file `{"m": .., "f": [[..]]}`.
        #[arg(long)]
        game: String,
        #[arg(long, value_enum)]
        theory: Theory,
        /// Fixed inputs `x,y,z` for the specific-input theory.
        #[arg(long, default_value = "0,0,0")]
        fixed: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The worked case studies.
    CaseStudy {
        #[command(subcommand)]
        study: CaseStudy,
    },
    /// Static SVG figure of a scenario.
    Render {
        #[command(flatten)]
        common: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = Figure::Auto)]
        figure: Figure,
        /// Slice time for timeslice figures, as a rational.
        #[arg(long)]
        t: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theory {
    Signalling,
    Ns,
    Specific,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LoopLayout {
    Degenerate,
    Fig5,
}

#[derive(Debug, Subcommand)]
pub enum CaseStudy {
    /// The loop model embedded in a layout.
    Loop {
        #[arg(long, value_enum)]
        layout: LoopLayout,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The compass contradiction at `(λ, μ)`.
    Compass {
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        mu: String,
        /// Drop the compass equality with this index (0-based).
        #[arg(long)]
        ablate: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Result of one command: a JSON report (printed to stdout) or a figure,
/// plus any additional files for `--out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn report(status: ExitStatus, name: &str, v: &Value) -> Outcome {
        let text = pretty(v);
        Outcome {
            status,
            stdout: text.clone(),
            files: vec![(format!("{name}.json"), text)],
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn parse_rat(flag: &str, s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

/// Writes each file through a temporary name and a rename.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, contents).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, &target).map_err(|e| CliError::Io(format!("{}: {e}", target.display())))?;
    }
    Ok(())
}

/// Runs a parsed command, writing `--out` files when requested.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (outcome, out) = execute(&cli.command)?;
    if let Some(dir) = out {
        write_files(dir, &outcome.files)?;
    }
    Ok(outcome)
}

fn execute(cmd: &Command) -> Result<(Outcome, Option<&PathBuf>), CliError> {
    Ok(match cmd {
        Command::Check(a) => (check(&a.scenario)?, a.out.as_ref()),
        Command::Constraints(a) => (constraints(&a.scenario)?, a.out.as_ref()),
        Command::Protocol {
            common,
            allow_reflection,
        } => (protocol(&common.scenario, *allow_reflection)?, common.out.as_ref()),
        Command::Simulate {
            common,
            seed,
            trials,
            alpha,
        } => (
            simulate_cmd(&common.scenario, *seed, *trials, alpha)?,
            common.out.as_ref(),
        ),
        Command::JamGeometry { n, h, t, out } => (jam_geometry(*n, h, t)?, out.as_ref()),
        Command::Monogamy {
            game,
            theory,
            fixed,
            out,
        } => (monogamy(game, *theory, fixed)?, out.as_ref()),
        Command::CaseStudy { study } => match study {
            CaseStudy::Loop { layout, out } => (loop_study(*layout)?, out.as_ref()),
            CaseStudy::Compass {
                lambda,
                mu,
                ablate,
                out,
            } => (compass(lambda, mu, *ablate)?, out.as_ref()),
        },
        Command::Render { common, figure, t } => (
            render_cmd(&common.scenario, *figure, t.as_deref())?,
            common.out.as_ref(),
        ),
    })
}

pub fn check(scenario: &str) -> Result<Outcome, CliError> {
    let sc = scenario::load(scenario)?;
    let b = sc.require_box()?;
    let instances = match enumerate_constraints(b) {
        Ok(i) => i,
        Err(OnsError::UndecidableScenario { pairs }) => {
            let v = json!({ "scenario": sc.name, "undecidable": pairs });
            return Ok(Outcome::report(ExitStatus::Undecidable, "check", &v));
        }
        Err(e) => return Err(e.into()),
    };
    let violations = causalbox::ons::check_instances(b, &instances);
    let report = OnsReport::new(b, instances.len(), &violations);
    let status = if violations.is_empty() {
        ExitStatus::Pass
    } else {
        ExitStatus::Violation
    };
    Ok(Outcome::report(status, "check", &to_value(&report)))
}

pub fn constraints(scenario: &str) -> Result<Outcome, CliError> {
    let sc = scenario::load(scenario)?;
    let b = sc.require_box()?;
    match enumerate_constraints(b) {
        Ok(list) => {
            let v = json!({ "scenario": sc.name, "instances": list.len(), "constraints": to_value(&list) });
            Ok(Outcome::report(ExitStatus::Pass, "constraints", &v))
        }
        Err(OnsError::UndecidableScenario { pairs }) => {
            let v = json!({ "scenario": sc.name, "undecidable": pairs });
            Ok(Outcome::report(ExitStatus::Undecidable, "constraints", &v))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn protocol(scenario: &str, allow_reflection: bool) -> Result<Outcome, CliError> {
    let sc = scenario::load(scenario)?;
    let b = sc.require_box()?;
    let violations = check_ons(b)?;
    let Some(first) = violations.first() else {
        let v = json!({ "scenario": sc.name, "violations": 0, "protocol": null });
        return Ok(Outcome::report(ExitStatus::Pass, "protocol", &v));
    };
    let p = build_protocol(b, first)?;
    let certificate = loop_paradox_certificate(b, &violations, allow_reflection)?;
    let v = json!({
        "scenario": sc.name,
        "violations": violations.len(),
        "exact_tv": format_rational(&p.exact_tv()),
        "protocol": to_value(&p),
        "loop": to_value(&certificate),
    });
    Ok(Outcome::report(ExitStatus::Violation, "protocol", &v))
}

pub fn simulate_cmd(scenario: &str, seed: u64, trials: usize, alpha: &str) -> Result<Outcome, CliError> {
    let alpha = parse_rat("alpha", alpha)?;
    let a = to_f64(&alpha);
    if !(a > 0.0 && a < 1.0) {
        return Err(CliError::Usage("--alpha must lie strictly between 0 and 1".into()));
    }
    let sc = scenario::load(scenario)?;
    let b = sc.require_box()?;
    let violations = check_ons(b)?;
    let Some(first) = violations.first() else {
        let v = json!({ "scenario": sc.name, "violations": 0, "simulation": null });
        return Ok(Outcome::report(ExitStatus::Pass, "simulate", &v));
    };
    let p = build_protocol(b, first)?;
    let r = simulate(&p, b, trials, seed, a)?;
    let status = if r.reject_null {
        ExitStatus::Violation
    } else {
        ExitStatus::Pass
    };
    let v = json!({ "scenario": sc.name, "protocol": to_value(&p), "simulation": to_value(&r) });
    Ok(Outcome::report(status, "simulate", &v))
}

pub fn jam_geometry(n: usize, h: &str, t: &str) -> Result<Outcome, CliError> {
    let h = parse_rat("h", h)?;
    let t = parse_rat("t", t)?;
    let config = build_config(n, &h).map_err(|e| CliError::Domain(e.to_string()))?;
    let bundle = verify_config(&config);
    let status = match bundle.status {
        BundleStatus::Agree => ExitStatus::Pass,
        BundleStatus::Disagreement => ExitStatus::Violation,
        BundleStatus::Unknown => ExitStatus::Undecidable,
    };
    let v = json!({
        "bundle": to_value(&bundle),
        "theorem_holds": bundle.theorem_holds(),
        "timeslice": to_value(&timeslice_picture(&config, &t)),
    });
    let mut out = Outcome::report(status, "jam_geometry", &v);
    let sc = scenario::load(&format!("njam({n}, {})", format_rational(&h)))?;
    out.files.push((
        "timeslice.svg".into(),
        render::render(&sc, Figure::Timeslice, Some(&t))?,
    ));
    Ok(out)
}

/// Loads a game by name or from a JSON file.
pub fn load_game(spec: &str) -> Result<XorGame, CliError> {
    if let Some(g) = XorGame::by_name(spec) {
        return Ok(g);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| {
        CliError::Usage(format!(
            "--game `{spec}` is neither a known game nor a readable file: {e}"
        ))
    })?;
    let g: XorGame = serde_json::from_str(&text).map_err(|e| CliError::Json {
        file: spec.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    g.validate()?;
    Ok(g)
}

pub fn monogamy(game: &str, theory: Theory, fixed: &str) -> Result<Outcome, CliError> {
    let g = load_game(game)?;
    let (report, fixed_json) = match theory {
        Theory::Signalling => (signalling_monogamy(&g), Value::Null),
        Theory::Ns => (ns_monogamy_lp(&g)?, Value::Null),
        Theory::Specific => {
            let parts: Vec<usize> = fixed
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("--fixed: {e}")))?;
            let [x, y, z] = parts[..] else {
                return Err(CliError::Usage("--fixed expects three comma-separated inputs".into()));
            };
            if [x, y, z].iter().any(|&v| v >= g.m) {
                return Err(CliError::Usage(format!("--fixed inputs must be below m = {}", g.m)));
            }
            (specific_input_value(&g, Some((x, y, z))), json!([x, y, z]))
        }
    };
    let v = json!({
        "game": g.name.clone().unwrap_or_else(|| game.to_string()),
        "theory": theory.to_possible_value().map(|p| p.get_name().to_string()),
        "fixed": fixed_json,
        "value": format_rational(&report.value),
        "classification": to_value(&classify(&g)),
        "report": to_value(&report),
    });
    Ok(Outcome::report(ExitStatus::Pass, "monogamy", &v))
}

pub fn loop_study(layout: LoopLayout) -> Result<Outcome, CliError> {
    match layout {
        LoopLayout::Degenerate => {
            let r = degenerate_embedding_check()?;
            let status = if r.violations.is_empty() {
                ExitStatus::Pass
            } else {
                ExitStatus::Violation
            };
            Ok(Outcome::report(status, "case_study_loop", &to_value(&r)))
        }
        LoopLayout::Fig5 => {
            let r = safe_embedding_check(&Preset::Fig5.layout())?;
            let status = if r.passes() {
                ExitStatus::Pass
            } else {
                ExitStatus::Violation
            };
            Ok(Outcome::report(status, "case_study_loop", &to_value(&r)))
        }
    }
}

pub fn compass(lambda: &str, mu: &str, ablate: Option<usize>) -> Result<Outcome, CliError> {
    let l = parse_rat("lambda", lambda)?;
    let m = parse_rat("mu", mu)?;
    let trace = compass_contradiction(&l, &m, ablate)?;
    let status = if trace.is_contradiction() {
        ExitStatus::Violation
    } else {
        ExitStatus::Pass
    };
    Ok(Outcome::report(status, "case_study_compass", &to_value(&trace)))
}

pub fn render_cmd(scenario: &str, figure: Figure, t: Option<&str>) -> Result<Outcome, CliError> {
    let sc = scenario::load(scenario)?;
    let t = t.map(|s| parse_rat("t", s)).transpose()?;
    let svg = render::render(&sc, figure, t.as_ref())?;
    let name: String = sc
        .name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    Ok(Outcome {
        status: ExitStatus::Pass,
        stdout: svg.clone(),
        files: vec![(format!("{}.svg", name.trim_matches('_')), svg)],
    })
}
