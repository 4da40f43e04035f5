//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use num_traits::Zero;
use rotlab::engine::{enumerate_traces, Corruption, Trace};
use rotlab::extract::{check_choice_extraction, check_sender_extraction};
use rotlab::prob::{fmt_prob, ratio, statistical_distance, statistical_information, to_f64, Prob};
use rotlab::protolib::{clear_choice_rot, derandomize, erasure_rot, leaky_rot, passthrough_rot, ProtocolSpec};
use rotlab::report::to_canonical_json;
use rotlab::ucharness::{distinguishing_advantage, GameMode, GameResult};
use rotlab::verifier::{StandaloneReport, VerifyOptions};
use rotlab::{JointDist, Value};

use common::{binomial_half_range, random_pair, rng, subset_max_distance, uniform_statistical_information};

const BOUND: u64 = 100_000_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn one() -> Prob {
    ratio(1, 1)
}

fn games(p: &ProtocolSpec, mode: GameMode) -> Result<Vec<GameResult>, String> {
    let mut out = Vec::new();
    for case in Corruption::ALL {
        for adv in p.curated(case) {
            out.push(distinguishing_advantage(p, case, &adv, mode, &one(), BOUND).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn standalone(p: &ProtocolSpec) -> Result<StandaloneReport, String> {
    StandaloneReport::build(p, &VerifyOptions::default()).map_err(|e| e.to_string())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(0xacce_0001);
    for i in 0..1000 {
        let (p, q) = random_pair(&mut r, 12);
        let got = statistical_distance(&p.to_dist(), &q.to_dist());
        let want = subset_max_distance(&p, &q);
        ensure(got == want, format!("pair {i}: {} vs oracle {}", fmt_prob(&got), fmt_prob(&want)))?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("1000 pairs agree exactly ({:.2?})", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = passthrough_rot();
    let s = standalone(&p)?;
    let c = &s.correctness;
    for (name, v) in [("eps", &c.eps), ("abort", &c.abort), ("defect_b", &c.defect_b), ("defect_c", &c.defect_c)] {
        ensure(v.is_zero(), format!("correctness {name} = {}", fmt_prob(v)))?;
    }
    for r in &s.alice {
        ensure(r.worst().is_zero(), format!("alice row {} = {}", r.adversary, fmt_prob(&r.worst())))?;
    }
    for r in &s.bob {
        ensure(r.worst().is_zero(), format!("bob row {} = {}", r.adversary, fmt_prob(&r.worst())))?;
    }
    let sender = check_sender_extraction(&p, &one(), BOUND).map_err(|e| e.to_string())?;
    let choice = check_choice_extraction(&p, &one(), BOUND).map_err(|e| e.to_string())?;
    ensure(sender.success == one(), format!("sender extraction {}", fmt_prob(&sender.success)))?;
    ensure(choice.agreement == one(), format!("choice extraction {}", fmt_prob(&choice.agreement)))?;
    let g = games(&p, GameMode::Exact)?;
    for r in &g {
        ensure(r.advantage.is_zero(), format!("{} {}: advantage {}", r.case, r.adversary, fmt_prob(&r.advantage)))?;
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("all eps 0, extraction 1/1, {} games at 0 ({:.2?})", g.len(), start.elapsed()))
}

fn bob_choice_joint(p: &ProtocolSpec, traces: &[Trace]) -> JointDist {
    let atoms = traces.iter().map(|t| {
        let c = p.bob_choice(t).map(Value::bit).unwrap_or(Value::Bot);
        (vec![c, t.output_a.clone()], t.weight.clone())
    });
    JointDist::new(["C", "output_A"], atoms).unwrap()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (n, k) = (6u64, 2u64);
    // honest abort: fewer than k received or fewer than k erased
    let oracle_eps = one() - binomial_half_range(n, k, n - k);
    // Bob learns both bits when at least 2k positions arrive
    let oracle_both = binomial_half_range(n, 2 * k, n);
    ensure(oracle_eps == ratio(7, 32) && oracle_both == ratio(11, 32), "oracle self-check")?;

    let p = erasure_rot(n as usize, k as usize).map_err(|e| e.to_string())?;
    let s = standalone(&p)?;
    ensure(
        s.correctness.eps == oracle_eps,
        format!("eps_c {} vs oracle {}", fmt_prob(&s.correctness.eps), fmt_prob(&oracle_eps)),
    )?;
    let attack = p.curated(Corruption::Bob).into_iter().find(|a| a.name == "both-sets").ok_or("no both-sets attack")?;
    let (a, b) = attack.programs(&p.alice, &p.bob);
    let traces = enumerate_traces(a, b, &p.channel, &p.limits, BOUND).map_err(|e| e.to_string())?;
    let both: Prob = traces
        .iter()
        .filter(|t| {
            t.output_b.get(0) == Some(&Value::sym("both")) && t.output_b.get(1) == Some(&t.output_a) && !t.output_a.is_bot()
        })
        .map(|t| t.weight.clone())
        .sum();
    ensure(both == oracle_both, format!("both-sets success {} vs oracle {}", fmt_prob(&both), fmt_prob(&oracle_both)))?;
    let row = s.alice.iter().find(|r| r.adversary == "both-sets").ok_or("no both-sets row")?;
    ensure(
        row.extraction_failure == oracle_both,
        format!("both-sets extraction failure {}", fmt_prob(&row.extraction_failure)),
    )?;
    let honest = enumerate_traces(&p.alice, &p.bob, &p.channel, &p.limits, BOUND).map_err(|e| e.to_string())?;
    let is = statistical_information(&bob_choice_joint(&p, &honest), &["C"], &["output_A"], &[]).map_err(|e| e.to_string())?;
    ensure(is.is_zero(), format!("honest I_S(C; output_A) = {}", fmt_prob(&is)))?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "eps_c {} and both-sets {} match binomial oracle, I_S(C;out_A) 0 ({:.2?})",
        fmt_prob(&oracle_eps),
        fmt_prob(&oracle_both),
        start.elapsed()
    ))
}

fn criterion_4() -> Outcome {
    // hand oracle over the 8 equally likely (b0, b1, c):
    // leaky: Bob's view holds b_{1-c}, so I_S(b_{1-c}; view | c, b_c) with the
    // view reduced to that bit; clear choice: Alice's view holds c given (b0, b1)
    let mut leak = Vec::new();
    let mut clear = Vec::new();
    for i in 0..8u8 {
        let (b0, b1, c) = (i >> 2 & 1, i >> 1 & 1, i & 1);
        let (bc, other) = if c == 0 { (b0, b1) } else { (b1, b0) };
        leak.push(((c, bc), other, other));
        clear.push(((b0, b1), c, c));
    }
    let hand = ratio(1, 2);
    ensure(uniform_statistical_information(&leak) == hand && uniform_statistical_information(&clear) == hand, "hand oracle")?;
    let mut detail = Vec::new();
    for p in [leaky_rot(), clear_choice_rot()] {
        let s = standalone(&p)?;
        ensure(s.worst == hand, format!("{}: worst {} vs hand count 1/2", p.name, fmt_prob(&s.worst)))?;
        ensure(!s.passes(&ratio(1, 8)), format!("{} passes at 1/8", p.name))?;
        let best = games(&p, GameMode::Exact)?.into_iter().map(|g| g.advantage).max().unwrap();
        ensure(best >= ratio(1, 4), format!("{}: best advantage {}", p.name, fmt_prob(&best)))?;
        detail.push(format!("{} I_S {} advantage {}", p.name, fmt_prob(&s.worst), fmt_prob(&best)));
    }
    Ok(detail.join("; "))
}

fn criterion_5() -> Outcome {
    let mut worst_gap = Vec::new();
    for p in [passthrough_rot(), erasure_rot(6, 2).unwrap()] {
        let eps = standalone(&p)?.worst;
        let g = games(&p, GameMode::Exact)?;
        for r in &g {
            let bound = &eps + &r.failure;
            ensure(
                r.advantage <= bound,
                format!(
                    "{} {} {}: advantage {} > eps {} + failure {}",
                    p.label(),
                    r.case,
                    r.adversary,
                    fmt_prob(&r.advantage),
                    fmt_prob(&eps),
                    fmt_prob(&r.failure)
                ),
            )?;
        }
        let top = g.iter().max_by(|a, b| a.advantage.cmp(&b.advantage)).unwrap();
        worst_gap.push(format!(
            "{}: max advantage {} ({} {}) <= eps {} + failure {}",
            p.label(),
            fmt_prob(&top.advantage),
            top.case,
            top.adversary,
            fmt_prob(&eps),
            fmt_prob(&top.failure)
        ));
    }
    Ok(worst_gap.join("; "))
}

fn criterion_6() -> Outcome {
    let mut detail = Vec::new();
    for p in [passthrough_rot(), erasure_rot(6, 2).unwrap()] {
        let c = check_choice_extraction(&p, &one(), BOUND).map_err(|e| e.to_string())?;
        ensure(
            c.last_message_violations == 0 && c.equivocation_violations == 0,
            format!(
                "{}: {} last-message and {} equivocation violations",
                p.label(),
                c.last_message_violations,
                c.equivocation_violations
            ),
        )?;
        detail.push(format!("{} {} traces", p.label(), c.traces));
    }
    Ok(format!("0 violations ({})", detail.join(", ")))
}

fn criterion_7() -> Outcome {
    // receiver correctness on every (m0, m1, b0, b1, c) and choice
    let mut sender_view = Vec::new();
    let mut receiver_view = Vec::new();
    for i in 0..64u8 {
        let (m0, m1, b0, b1, c, choice) = (i >> 5 & 1, i >> 4 & 1, i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
        let bc = if c == 0 { b0 } else { b1 };
        let r = derandomize((b0, b1), (c, bc), (m0, m1), choice);
        let want = if choice == 0 { m0 } else { m1 };
        ensure(r.output == want, format!("case {i}: output {} vs m_choice {want}", r.output))?;
        // sender sees its inputs, its ROT output and Bob's message
        sender_view.push(((m0, m1), choice, (b0, b1, r.e)));
        // receiver sees choice, its ROT output and Alice's reply
        let other = if choice == 0 { m1 } else { m0 };
        receiver_view.push((choice, other, (c, bc, r.z)));
    }
    let s = uniform_statistical_information(&sender_view);
    let r = uniform_statistical_information(&receiver_view);
    ensure(s.is_zero(), format!("I_S(choice; sender view) = {}", fmt_prob(&s)))?;
    ensure(r.is_zero(), format!("I_S(m_(1-choice); receiver view) = {}", fmt_prob(&r)))?;
    Ok("64 runs correct; 32 cases per choice; both I_S 0".into())
}

fn criterion_8() -> Outcome {
    let erasure = erasure_rot(6, 2).unwrap();
    // byte-identical reports
    let a = to_canonical_json(&standalone(&erasure)?).map_err(|e| e.to_string())?;
    let b = to_canonical_json(&standalone(&erasure)?).map_err(|e| e.to_string())?;
    ensure(a == b, "stand-alone report bytes differ")?;
    let mode = GameMode::Sampling { seed: 0xacce_0008, samples: 2000 };
    let mut checked = 0;
    for p in [passthrough_rot(), leaky_rot(), clear_choice_rot(), erasure] {
        let first = games(&p, mode)?;
        let again = games(&p, mode)?;
        ensure(
            to_canonical_json(&first).unwrap() == to_canonical_json(&again).unwrap(),
            format!("{}: sampled game bytes differ", p.label()),
        )?;
        for g in &first {
            for e in &g.environments {
                let Some(exact) = &e.exact else { continue };
                let radius: f64 = e.radius.as_deref().unwrap().parse().unwrap();
                let gap = (to_f64(&e.estimate) - to_f64(exact)).abs();
                ensure(
                    gap <= radius,
                    format!(
                        "{} {} {} env {}: estimate {} vs exact {} (radius {radius})",
                        p.label(),
                        g.case,
                        g.adversary,
                        e.name,
                        to_f64(&e.estimate),
                        fmt_prob(exact)
                    ),
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("reports byte-identical; {checked} sampled estimates within 3σ of exact"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("metric exactness", criterion_1),
        ("passthrough full pass", criterion_2),
        ("erasure oracle match", criterion_3),
        ("negative controls", criterion_4),
        ("advantage bounded by eps plus failure", criterion_5),
        ("extraction index and equivocation", criterion_6),
        ("derandomizer", criterion_7),
        ("reproducibility", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
