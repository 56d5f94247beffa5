//! Acceptance suite: fourteen end-to-end criteria, each with a pinned
//! tolerance and wall-clock limit. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::time::{Duration, Instant};

use causalbox::boxes::{random_causal_box, random_table_box, CorrelationBox};
use causalbox::case_studies::{
    compass_contradiction, degenerate_embedding_check, loop_model_at, parameter_grid, safe_embedding_check,
    TraceOutcome,
};
use causalbox::causal_geometry::{
    common_future_nonempty, operationally_separated, strictly_precedes, Backend, Event, FiniteOrder,
};
use causalbox::interval::Precision;
use causalbox::jamming::{boundary_functions, build_config, oracle_grid, verify_config, BundleStatus};
use causalbox::layouts::{Layout, Preset};
use causalbox::monogamy::{
    brute_force_signalling, classify, entropic_probe, entropic_sum, evaluate_specific, jamming_vertex, ns_constraints,
    pair_objective, signalling_monogamy, specific_input_value, template_box, Pair, Witness, XorGame, BOUND_SLACK,
};
use causalbox::ons::check_ons;
use causalbox::protocol::{build_protocol, exhaustive_protocol_search, simulate, SignallingProtocol};
use causalbox::rational::{int, rat, to_f64};
use causalbox::{ExactLp, Rational};
use causalbox_cli::{monogamy, ExitStatus, Theory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest admissible mean |empirical − exact| TV over the seeds.
const TV_TOLERANCE: f64 = 0.02;
/// Significance level of the homogeneity test.
const ALPHA: f64 = 0.01;
/// Upper bound on the entropic sum, up to [`BOUND_SLACK`].
const ENTROPIC_BOUND: f64 = 1.0;
/// Largest admissible width of the `f(1)` enclosures.
const F_AT_ONE_WIDTH: f64 = 1e-12;

type Verdict = Result<String, String>;

/// Name, wall-clock limit and check of one criterion.
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli_value(game: &str, theory: Theory) -> Result<(ExitStatus, serde_json::Value), String> {
    let out = monogamy(game, theory, "0,0,0").map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
    Ok((out.status, v))
}

fn c1_chsh_signalling() -> Verdict {
    let (status, v) = cli_value("chsh", Theory::Signalling)?;
    ensure(status == ExitStatus::Pass, || format!("exit status {status:?}"))?;
    ensure(v["value"] == "5/2", || format!("value {}", v["value"]))?;
    let c = classify(&XorGame::chsh());
    ensure((c.ccc, c.aaa, c.aac, c.acc) == (4, 1, 0, 3), || {
        format!("classification {c:?}")
    })?;
    Ok("value 5/2, (S_CCC, S_AAA, S_AAC, S_ACC) = (4, 1, 0, 3)".into())
}

fn c2_gcl_signalling() -> Verdict {
    let (_, v) = cli_value("g_cl", Theory::Signalling)?;
    ensure(v["value"] == "5/2", || format!("value {}", v["value"]))?;
    let c = classify(&XorGame::g_cl());
    ensure([c.ccc, c.aaa, c.aac, c.acc] == [2; 4], || {
        format!("classification {c:?}")
    })?;
    Ok("value 5/2, all four classes of size 2".into())
}

fn c3_specific_input() -> Verdict {
    let (_, v) = cli_value("chsh", Theory::Specific)?;
    ensure(v["value"] == "3", || format!("value {}", v["value"]))?;
    let g = XorGame::chsh();
    ensure(specific_input_value(&g, Some((0, 0, 0))).value == int(3), || {
        "library value differs".into()
    })?;
    // the displayed behavior, triples in (x, y, z) order
    let explicit = vec![
        (0, 0, 0),
        (0, 0, 0),
        (0, 0, 0),
        (0, 0, 1),
        (1, 1, 1),
        (1, 1, 0),
        (1, 0, 1),
        (1, 1, 1),
    ];
    let e = evaluate_specific(&g, (0, 0, 0), &explicit);
    ensure(e == int(3), || format!("explicit behavior scores {e}"))?;
    Ok("value 3; explicit behavior scores 3".into())
}

fn c4_ns_lp() -> Verdict {
    let (_, v) = cli_value("chsh", Theory::Ns)?;
    ensure(v["value"] == "3/2", || format!("value {}", v["value"]))?;
    let g = XorGame::chsh();
    let report = causalbox::monogamy::ns_monogamy_lp(&g).map_err(|e| e.to_string())?;
    let Witness::Lp { primal, dual } = &report.witness else {
        return Err("missing LP witness".into());
    };
    let (a, b) = ns_constraints(2);
    let lp = ExactLp::new(pair_objective(&g, &[Pair::AB, Pair::AC]), a, b).map_err(|e| e.to_string())?;
    ensure(lp.objective.len() == 64, || format!("{} variables", lp.objective.len()))?;
    ensure(lp.is_feasible(primal), || "primal infeasible".into())?;
    ensure(lp.objective_at(primal) == rat(3, 2), || "primal value differs".into())?;
    ensure(lp.certifies(dual, &rat(3, 2)), || "dual does not certify 3/2".into())?;
    Ok("value 3/2; exact primal and zero-gap dual certificate".into())
}

fn c5_oracle_equivalence() -> Verdict {
    for bits in 0..16u8 {
        let f = vec![vec![bits >> 3 & 1, bits >> 2 & 1], vec![bits >> 1 & 1, bits & 1]];
        let g = XorGame::new(2, f).map_err(|e| e.to_string())?;
        ensure(
            signalling_monogamy(&g).value == brute_force_signalling(&g).value,
            || format!("m = 2 game {bits}"),
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..200 {
        let f = (0..3).map(|_| (0..3).map(|_| rng.gen_range(0..2)).collect()).collect();
        let g = XorGame::new(3, f).map_err(|e| e.to_string())?;
        ensure(
            signalling_monogamy(&g).value == brute_force_signalling(&g).value,
            || format!("m = 3 game {k}"),
        )?;
    }
    Ok("16 games at m = 2 and 200 random games at m = 3 agree".into())
}

fn c6_jamming_geometry() -> Verdict {
    for (n, h) in [(3, rat(1, 2)), (4, rat(7, 10)), (5, rat(4, 5)), (6, rat(3, 4))] {
        let b = verify_config(&build_config(n, &h).map_err(|e| e.to_string())?);
        ensure(b.status == BundleStatus::Agree, || {
            format!("n = {n}: routes {:?}", b.status)
        })?;
        ensure(b.theorem_holds(), || format!("n = {n}: {b:?}"))?;
        ensure(b.oracle == b.closed_form, || format!("n = {n}: oracle {:?}", b.oracle))?;
    }
    let b = verify_config(&build_config(3, &rat(3, 4)).map_err(|e| e.to_string())?);
    ensure(b.status == BundleStatus::Agree, || format!("(3, 3/4): {:?}", b.status))?;
    ensure(
        b.closed_form.full == causalbox::causal_geometry::SeparationStatus::Separated,
        || format!("(3, 3/4): {b:?}"),
    )?;
    Ok("four in-range bundles hold on both routes; (3, 3/4) full tuple separated".into())
}

fn c7_boundary_functions() -> Verdict {
    let prec = Precision::DEFAULT;
    for n in 3..=12 {
        let (f, _) = boundary_functions(n, &int(1), prec).map_err(|e| e.to_string())?;
        ensure(f.contains(&int(1)) && f.width_f64() < F_AT_ONE_WIDTH, || {
            format!("n = {n}: f(1) = {f:?}")
        })?;
        let mut grid = vec![int(1)];
        grid.extend(oracle_grid());
        let vals: Vec<_> = grid
            .iter()
            .map(|t| boundary_functions(n, t, prec))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (k, w) in vals.windows(2).enumerate() {
            ensure(w[1].0.certainly_lt(&w[0].0), || {
                format!("n = {n}: f not decreasing at grid index {k}")
            })?;
            ensure(w[1].1.certainly_le(&w[0].1), || {
                format!("n = {n}: g increasing at grid index {k}")
            })?;
        }
    }
    Ok("f(1) = 1 with width < 1e-12 for n = 3..12; f decreasing, g nonincreasing".into())
}

fn c8_case_study_loop() -> Verdict {
    let r = degenerate_embedding_check().map_err(|e| e.to_string())?;
    let h = &r.headline;
    let pair = [h.p1.clone(), h.p2.clone()];
    ensure(pair.contains(&int(1)) && pair.contains(&rat(1, 2)), || {
        format!("headline {} vs {}", h.p1, h.p2)
    })?;
    ensure(r.protocol.exact_tv() == rat(1, 2), || {
        format!("protocol TV {}", r.protocol.exact_tv())
    })?;
    let safe = safe_embedding_check(&Preset::Fig5.layout()).map_err(|e| e.to_string())?;
    ensure(safe.violations.is_empty() && safe.passes(), || {
        format!("{} violations on the fig5 layout", safe.violations.len())
    })?;
    Ok(format!(
        "degenerate: {} violations, headline 1 vs 1/2, TV 1/2; fig5: 0 of {} instances violated",
        r.violations.len(),
        safe.instances
    ))
}

fn c9_compass() -> Verdict {
    for (l, m) in parameter_grid() {
        let t = compass_contradiction(&l, &m, None).map_err(|e| e.to_string())?;
        let TraceOutcome::Contradiction { terminal } = &t.outcome else {
            return Err(format!("(λ, μ) = ({l}, {m}): no contradiction"));
        };
        let mus = (terminal.0.mu.clone(), terminal.1.mu.clone());
        ensure(mus == (int(0), int(1)) || mus == (int(1), int(0)), || {
            format!("({l}, {m}): terminal {mus:?}")
        })?;
    }
    let opening: Vec<usize> = (0..5)
        .filter(|&k| {
            parameter_grid().iter().all(|(l, m)| {
                compass_contradiction(l, m, Some(k))
                    .map(|t| !t.is_contradiction())
                    .unwrap_or(false)
            })
        })
        .collect();
    ensure(!opening.is_empty(), || {
        "no single ablation removes the contradiction".into()
    })?;
    Ok(format!(
        "terminal μ = 0 and μ = 1 on all 25 grid points; ablating equality {opening:?} opens the trace"
    ))
}

fn random_box(l: &Layout, rng: &mut ChaCha8Rng, k: usize) -> CorrelationBox {
    let (ins, outs) = (l.binary_inputs(), l.binary_outputs());
    if k.is_multiple_of(2) {
        random_table_box(l.backend.clone(), ins, outs, rng).expect("layout boxes are well formed")
    } else {
        let strategies = rng.gen_range(1..5);
        random_causal_box(l.backend.clone(), ins, outs, strategies, rng).expect("layout boxes are well formed")
    }
}

fn c10_theorem_one() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut violating, mut satisfying) = (0, 0);
    for preset in [Preset::JammingTriangle, Preset::FourParty, Preset::BellStandard] {
        let l = preset.layout();
        for k in 0..100 {
            let b = random_box(&l, &mut rng, k);
            let violations = check_ons(&b).map_err(|e| e.to_string())?;
            for v in &violations {
                let p = build_protocol(&b, v).map_err(|e| format!("{}: {e}", l.name))?;
                ensure(p.verify(&b).map_err(|e| e.to_string())?, || {
                    format!("{} box {k}: invalid protocol", l.name)
                })?;
                ensure(p.exact_tv() > int(0), || {
                    format!("{} box {k}: zero-TV protocol", l.name)
                })?;
            }
            let found = exhaustive_protocol_search(&b).map_err(|e| e.to_string())?;
            ensure(found.is_empty() == violations.is_empty(), || {
                format!(
                    "{} box {k}: {} violations but {} protocols",
                    l.name,
                    violations.len(),
                    found.len()
                )
            })?;
            if violations.is_empty() {
                satisfying += 1;
            } else {
                violating += 1;
            }
        }
    }
    Ok(format!(
        "{violating} violating boxes, every violation yields a protocol; {satisfying} satisfying boxes admit none"
    ))
}

fn otp_protocol() -> Result<(CorrelationBox, SignallingProtocol), String> {
    // the collocated loop layout: the A and C interventionists signal to B,
    // whose post-intervention structure is the one-time pad B = A ⊕ C
    let b = loop_model_at(&Preset::DegenerateLoop.layout()).map_err(|e| e.to_string())?;
    let r = degenerate_embedding_check().map_err(|e| e.to_string())?;
    ensure(r.headline.instance.g == [1], || {
        format!("headline receivers {:?}", r.headline.instance.g)
    })?;
    ensure(r.protocol.exact_tv() == rat(1, 2), || {
        format!("protocol TV {}", r.protocol.exact_tv())
    })?;
    ensure(r.protocol.verify(&b).map_err(|e| e.to_string())?, || {
        "protocol does not verify".into()
    })?;
    Ok((b, r.protocol))
}

fn c11_simulation() -> Verdict {
    let (b, p) = otp_protocol()?;
    let exact = to_f64(&p.exact_tv());
    let (mut dev, mut rejections) = (0.0, 0);
    for seed in 0..100 {
        let r = simulate(&p, &b, 10_000, seed, ALPHA).map_err(|e| e.to_string())?;
        dev += (r.empirical_tv - exact).abs();
        rejections += usize::from(r.reject_null);
    }
    let mean = dev / 100.0;
    ensure(mean < TV_TOLERANCE, || {
        format!("mean |empirical − exact| TV = {mean:.4}")
    })?;
    ensure(rejections >= 99, || format!("only {rejections}/100 rejections"))?;

    // null protocol: the second sender value reproduces the first row
    let (r0, r1) = (
        b.setting_radix().encode(&p.setting(0)),
        b.setting_radix().encode(&p.setting(1)),
    );
    let n = b.outcome_count();
    let mut table = b.table().to_vec();
    let first: Vec<Rational> = table[r0 * n..(r0 + 1) * n].to_vec();
    table[r1 * n..(r1 + 1) * n].clone_from_slice(&first);
    let null_box = b.with_table(table).map_err(|e| e.to_string())?;
    let mut false_rejections = 0;
    for seed in 0..100 {
        let r = simulate(&p, &null_box, 10_000, 1_000 + seed, ALPHA).map_err(|e| e.to_string())?;
        false_rejections += usize::from(r.reject_null);
    }
    ensure(false_rejections <= 3, || {
        format!("null rejected in {false_rejections}/100 seeds")
    })?;
    Ok(format!(
        "mean TV deviation {mean:.4}, {rejections}/100 rejections, null rejected {false_rejections}/100"
    ))
}

fn c12_black_hole() -> Verdict {
    let l = Preset::BlackHole.layout();
    let q = l.output_events();
    let backend = &l.backend;
    let (gathers, _) = common_future_nonempty(backend, &q[0..2]).map_err(|e| e.to_string())?;
    ensure(gathers, || "(q1, q2) has no gathering point".into())?;
    let gatherless = [
        vec![q[0].clone(), q[2].clone()],
        vec![q[1].clone(), q[2].clone()],
        q.clone(),
    ];
    let mut probes = 0;
    for qs in &gatherless {
        let (nonempty, _) = common_future_nonempty(backend, qs).map_err(|e| e.to_string())?;
        ensure(!nonempty, || format!("{qs:?} has a gathering point"))?;
        for i in 0..10 {
            for j in 0..10 {
                // 10×10 grid below the singularity
                let p = Event::point(rat(j - 10, 2), vec![int(2 * i - 9)]);
                let v = operationally_separated(backend, qs, std::slice::from_ref(&p)).map_err(|e| e.to_string())?;
                ensure(v.is_not_separated(), || format!("{qs:?} separated from {p:?}"))?;
                probes += 1;
            }
        }
    }
    Ok(format!(
        "(q1, q2) gathers; three gatherless tuples not separated from {probes} probes"
    ))
}

fn c13_entropic() -> Verdict {
    let v = entropic_sum(&jamming_vertex());
    ensure(v == ENTROPIC_BOUND, || format!("vertex value {v:e}"))?;
    let b = template_box(&Preset::SixConfig.layout()).map_err(|e| e.to_string())?;
    let r = entropic_probe(&b, 10_000, 13, 2_000).map_err(|e| e.to_string())?;
    ensure(r.max_found <= ENTROPIC_BOUND + BOUND_SLACK, || {
        format!("max {} exceeds the bound", r.max_found)
    })?;
    ensure(r.max_constraint_residual < 1e-9, || {
        format!("constraint residual {:e}", r.max_constraint_residual)
    })?;
    ensure(r.mutual_information_sane, || "mutual information out of range".into())?;
    Ok(format!(
        "vertex value 1; max over 10^4 samples and 2000 climbs = {:.12}",
        r.max_found
    ))
}

fn random_event(backend: &Backend, rng: &mut ChaCha8Rng) -> Event {
    match backend {
        Backend::FiniteOrder(o) => Event::element(rng.gen_range(0..o.len())),
        Backend::Terminated(_) => Event::point(rat(rng.gen_range(-12..2), 2), vec![rat(rng.gen_range(-16..=16), 2)]),
        _ => Event::point(rat(rng.gen_range(-8..=8), 2), vec![rat(rng.gen_range(-8..=8), 2)]),
    }
}

fn random_order(rng: &mut ChaCha8Rng) -> Backend {
    let mut covers = Vec::new();
    for a in 0..7 {
        for b in a + 1..7 {
            if rng.gen_bool(0.3) {
                covers.push((a, b));
            }
        }
    }
    Backend::FiniteOrder(FiniteOrder::from_covers(7, &covers).expect("covers go upward"))
}

fn axioms_hold(backend: &Backend, e: &[Event]) -> Result<(), String> {
    let prec = |p: &Event, q: &Event| strictly_precedes(backend, p, q).map_err(|e| e.to_string());
    let sep = |qs: &[Event], ps: &[Event]| operationally_separated(backend, qs, ps).map_err(|e| e.to_string());
    ensure(!prec(&e[0], &e[0])?, || "reflexive".into())?;
    if prec(&e[0], &e[1])? && prec(&e[1], &e[2])? {
        ensure(prec(&e[0], &e[2])?, || "not transitive".into())?;
    }
    let (qs, ps) = (&e[0..3], &e[3..5]);
    // rel3
    let single = sep(&qs[..1], ps)?;
    let free = !prec(&ps[0], &qs[0])? && !prec(&ps[1], &qs[0])?;
    ensure(single.is_separated() == free, || "rel3 fails".into())?;
    // prop1
    let full = sep(qs, ps)?;
    let mut blocked = false;
    for p in ps {
        for q in qs {
            blocked |= prec(p, q)?;
        }
    }
    if blocked || single.is_not_separated() {
        ensure(full.is_not_separated(), || "prop1 fails".into())?;
    }
    // monotonicity in the receivers and in the senders
    if full.is_separated() {
        ensure(sep(&qs[..2], ps)?.is_separated(), || {
            "receiver monotonicity fails".into()
        })?;
    }
    let few = sep(qs, &ps[..1])?;
    if few.is_not_separated() {
        ensure(full.is_not_separated(), || "sender monotonicity fails".into())?;
    }
    Ok(())
}

fn c14_relation_axioms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let black_hole = Preset::BlackHole.layout().backend;
    let mut order = random_order(&mut rng);
    let mut counts = [0usize; 3];
    for k in 0..100_000 {
        let which = k % 3;
        let backend = match which {
            0 => Backend::minkowski(1),
            1 => black_hole.clone(),
            _ => {
                if k % 300 == 2 {
                    order = random_order(&mut rng);
                }
                order.clone()
            }
        };
        let e: Vec<Event> = (0..5).map(|_| random_event(&backend, &mut rng)).collect();
        axioms_hold(&backend, &e).map_err(|m| format!("configuration {k} on {}: {m}: {e:?}", backend.name()))?;
        counts[which] += 1;
    }
    Ok(format!(
        "{} configurations (Minkowski {}, terminated {}, finite order {})",
        counts.iter().sum::<usize>(),
        counts[0],
        counts[1],
        counts[2]
    ))
}

fn main() {
    let criteria: [Criterion; 14] = [
        ("1 signalling CHSH monogamy", Duration::from_secs(1), c1_chsh_signalling),
        ("2 signalling G^cl monogamy", Duration::from_secs(1), c2_gcl_signalling),
        ("3 specific-input monogamy", Duration::from_secs(1), c3_specific_input),
        ("4 no-signalling LP monogamy", Duration::from_secs(10), c4_ns_lp),
        (
            "5 closed form vs brute force",
            Duration::from_secs(30),
            c5_oracle_equivalence,
        ),
        (
            "6 n-party jamming geometry",
            Duration::from_secs(60),
            c6_jamming_geometry,
        ),
        ("7 boundary functions", Duration::from_secs(60), c7_boundary_functions),
        ("8 loop case study", Duration::from_secs(5), c8_case_study_loop),
        ("9 compass case study", Duration::from_secs(5), c9_compass),
        ("10 violations and protocols", Duration::from_secs(120), c10_theorem_one),
        ("11 simulation statistics", Duration::from_secs(120), c11_simulation),
        ("12 black-hole gathering", Duration::from_secs(5), c12_black_hole),
        ("13 entropic probe", Duration::from_secs(60), c13_entropic),
        ("14 relation axioms", Duration::from_secs(60), c14_relation_axioms),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let verdict = match verdict {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?} > {limit:?}")),
            v => v,
        };
        match verdict {
            Ok(detail) => println!("PASS [{name}] {detail} ({elapsed:.2?})"),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{name}] {reason} ({elapsed:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 14 criteria failed");
        std::process::exit(1);
    }
    println!("all 14 criteria passed");
}
