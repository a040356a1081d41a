//! One line per acceptance criterion, each checked at its stated tolerance.
//! Runs without the libtest harness so the report lines always print.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use common::{in_process, login, recording, system};
use crossbeam_channel::{unbounded, Sender};
use medagent::bench::{
    calibrate_kappa, f_measure, generate_suite, oracle_judgments, perfect_oracle_corpus, run_benchmark, run_suite,
    BenchmarkConfig, MetricsReport, ModelInputs, SchedulerModeName, REFERENCE_RATIO,
};
use medagent::corpus::generate_corpus;
use medagent::personalization::UserProfile;
use medagent::platform::{
    Behavior, Context, LifecycleKind, Location, Message, Performative, Platform, PlatformConfig, SchedulerMode,
    SpawnOptions,
};
use medagent::query::{annotate, fixture_dictionary, spellcheck, Dictionary};
use medagent::security::{derive_record_key, AssuranceLevel, PlatformSecret, SearchNonce};
use medagent::topology::{
    choreography, filter_locations, matches_static_pattern, OutboundRequest, Topology, TopologyKind,
};
use medagent::Category;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_categories(terms: &[&str]) -> OutboundRequest {
    OutboundRequest {
        search_id: "acceptance".into(),
        record_key: None,
        terms: terms.iter().map(|t| t.to_string()).collect(),
        categories: Category::ALL.into_iter().collect(),
        required_assurance: 0,
    }
}

fn metric_consistency() -> Outcome {
    let f = f_measure(0.96, 0.91);
    check((f - 0.9343).abs() <= 0.0005, || format!("f = {f}"))?;
    check((f * 100.0).round() == 93.0, || format!("{f} does not round to 93%"))?;
    Ok(format!("f_measure(0.96, 0.91) = {f:.5}"))
}

fn reference_ordering() -> Outcome {
    let corpus = Arc::new(generate_corpus(2026, 1, 4));
    let request = all_categories(&["fever"]);
    let inputs = ModelInputs::for_request(&corpus, &request);
    let base = BenchmarkConfig {
        repetitions: 10,
        mode: SchedulerModeName::Threaded,
        ..Default::default()
    };
    let kappa = calibrate_kappa(&base, &inputs, REFERENCE_RATIO).ok_or("no non-negative kappa reaches the ratio")?;
    let cfg = BenchmarkConfig { kappa, ..base };
    let s = run_benchmark(TopologyKind::Static, &cfg, &corpus, in_process(&corpus), &request).map_err(|e| e.to_string())?;
    let m = run_benchmark(TopologyKind::Mobile, &cfg, &corpus, in_process(&corpus), &request).map_err(|e| e.to_string())?;
    let (ms, mm) = (s.median_ms(), m.median_ms());
    let ratio = mm / ms;
    let detail = format!(
        "kappa = {kappa:.4}, median static {ms:.1} ms, median mobile {mm:.1} ms, ratio {ratio:.4} (modeled {:.4})",
        inputs.model_ratio(&cfg)
    );
    check(mm < ms, || format!("mobile not faster: {detail}"))?;
    check((0.88..=0.99).contains(&ratio), || format!("ratio outside [0.88, 0.99]: {detail}"))?;
    Ok(detail)
}

fn timing_model_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst: f64 = 0.0;
    for round in 0..50 {
        let mut corpus = generate_corpus(rng.gen(), 1, 3);
        corpus.sites.shuffle(&mut rng);
        corpus.sites.truncate(rng.gen_range(1..=13));
        for s in &mut corpus.sites {
            s.collect_latency_ms = rng.gen_range(20..=120);
        }
        let corpus = Arc::new(corpus);
        let cfg = BenchmarkConfig {
            c_msg: rng.gen_range(0.0..1.0),
            c_move: rng.gen_range(0.0..5.0),
            kappa: rng.gen_range(0.0..0.3),
            repetitions: 3,
            mode: SchedulerModeName::Deterministic,
        };
        let terms: Vec<&str> = ["fever", "pain", "cough"][..rng.gen_range(1..=3)].to_vec();
        let request = all_categories(&terms);
        for kind in TopologyKind::ALL {
            let r = run_benchmark(kind, &cfg, &corpus, in_process(&corpus), &request).map_err(|e| e.to_string())?;
            let err = (r.median_ms() - r.modeled_ms).abs() / r.modeled_ms;
            worst = worst.max(err);
            check(err <= 0.2, || format!("round {round} {kind}: median {} vs model {}", r.median_ms(), r.modeled_ms))?;
        }
        if corpus.sites.len() >= 2 {
            let flat = BenchmarkConfig {
                kappa: 0.0,
                c_move: 0.0,
                repetitions: 1,
                ..cfg
            };
            let inputs = ModelInputs::for_request(&corpus, &request);
            let s = run_benchmark(TopologyKind::Static, &flat, &corpus, in_process(&corpus), &request)
                .map_err(|e| e.to_string())?;
            let m = run_benchmark(TopologyKind::Mobile, &flat, &corpus, in_process(&corpus), &request)
                .map_err(|e| e.to_string())?;
            check(
                inputs.model(&flat, TopologyKind::Static) <= inputs.model(&flat, TopologyKind::Mobile),
                || format!("round {round}: modeled static exceeds mobile without contention"),
            )?;
            check(s.median_ms() <= m.median_ms(), || {
                format!("round {round}: measured static {} > mobile {}", s.median_ms(), m.median_ms())
            })?;
        }
    }
    Ok(format!("50 configs, worst relative deviation {:.2}%", worst * 100.0))
}

fn random_profile(rng: &mut ChaCha8Rng, user: &str) -> UserProfile {
    let mut p = UserProfile::new(user);
    for c in Category::ALL {
        if rng.gen_bool(0.3) {
            p.set_preference(c, rng.gen_range(0.0..1.0));
        }
    }
    if rng.gen_bool(0.3) {
        p.health_conditions = vec![["asthma", "diabetes", "hypertension"].choose(rng).unwrap().to_string()];
    }
    p
}

fn content_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut nonempty = 0;
    for round in 0..100 {
        let corpus = Arc::new(generate_corpus(rng.gen(), rng.gen_range(1..=2), rng.gen_range(2..=8)));
        let (suite, _) = generate_suite(rng.gen(), &corpus);
        let query = suite.queries.choose(&mut rng).unwrap().raw.clone();
        let required = rng.gen_range(0..=3);
        let profile = random_profile(&mut rng, "triple-user");
        let mut keys = Vec::new();
        for kind in TopologyKind::ALL {
            let sys = system(&corpus, in_process(&corpus), kind, required, PlatformConfig::default());
            sys.profiles.save(&profile).map_err(|e| e.to_string())?;
            let s = login(&sys.sessions, "triple-user");
            let resp = sys.end_to_end_search(&s.token, &query).map_err(|e| format!("{query}: {e}"))?;
            keys.push((resp.outcome.record_keys(), resp.results));
        }
        check(keys[0] == keys[1], || format!("round {round}: `{query}` differs between topologies"))?;
        nonempty += usize::from(!keys[0].0.is_empty());
    }
    Ok(format!("100 triples identical, {nonempty} with nonempty record sets"))
}

fn choreography_golden() -> Outcome {
    let corpus = Arc::new(generate_corpus(5, 1, 4));
    let request = OutboundRequest {
        categories: BTreeSet::from([Category::Cardiovascular, Category::Digestive, Category::Urinary]),
        ..all_categories(&["fever"])
    };
    let st = Topology::boot(TopologyKind::Static, &corpus, in_process(&corpus), PlatformConfig::default())
        .map_err(|e| e.to_string())?;
    let out = st.collect(&request).map_err(|e| e.to_string())?;
    let proj = choreography(&st.sniffer_trace(), &out.conversation_id);
    check(matches_static_pattern(&proj), || format!("static trace {proj:?}"))?;
    check(proj.len() == 2 + 2 * 3, || format!("expected 8 messages, saw {}", proj.len()))?;
    let mo = Topology::boot(TopologyKind::Mobile, &corpus, in_process(&corpus), PlatformConfig::default())
        .map_err(|e| e.to_string())?;
    let out = mo.collect(&request).map_err(|e| e.to_string())?;
    let informs = mo
        .sniffer_trace()
        .iter()
        .filter(|e| e.conversation == out.conversation_id && e.performative == Performative::Inform)
        .count();
    check(informs == 1, || format!("mobile run sent {informs} INFORM messages"))?;
    Ok(format!("static {} messages in REQUEST REQUEST+ CONFIRM+ CONFIRM order; mobile one INFORM", proj.len()))
}

/// Plain Levenshtein distance, full table.
fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn exhaustive_correction(word: &str, dict: &Dictionary, lang: &str) -> String {
    if dict.contains(lang, word) {
        return word.to_string();
    }
    dict.terms(lang)
        .map(|t| (levenshtein(word, t), t))
        .filter(|(d, _)| *d <= 2)
        .min()
        .map_or_else(|| word.to_string(), |(_, t)| t.to_string())
}

fn fuzz(rng: &mut ChaCha8Rng, word: &str) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    for _ in 0..rng.gen_range(1..=3) {
        let letter = rng.gen_range(b'a'..=b'z') as char;
        match rng.gen_range(0..3) {
            0 if !chars.is_empty() => {
                let i = rng.gen_range(0..chars.len());
                chars[i] = letter;
            }
            1 if chars.len() > 1 => {
                chars.remove(rng.gen_range(0..chars.len()));
            }
            _ => chars.insert(rng.gen_range(0..=chars.len()), letter),
        }
    }
    chars.into_iter().collect()
}

fn pipeline_oracles() -> Outcome {
    let dict = fixture_dictionary();
    let words: Vec<&str> = dict.terms("en").filter(|t| t.chars().all(|c| c.is_ascii_lowercase())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for i in 0..1000 {
        let word = *words.choose(&mut rng).unwrap();
        let typo = fuzz(&mut rng, word);
        let got = spellcheck(&typo, &dict, "en");
        let want = exhaustive_correction(&typo, &dict, "en");
        check(got == want, || format!("case {i}: `{typo}` -> `{got}`, exhaustive `{want}`"))?;
    }
    let banned = ["between", "do", "on"];
    for i in 0..300 {
        let n = rng.gen_range(1..=4);
        let mut toks: Vec<&str> = (0..n).map(|_| *words.choose(&mut rng).unwrap()).collect();
        for _ in 0..rng.gen_range(1..=3) {
            let at = rng.gen_range(0..=toks.len());
            toks.insert(at, banned.choose(&mut rng).unwrap());
        }
        let raw = toks.join(" ");
        let Ok(a) = annotate(&raw, &dict, None) else {
            continue;
        };
        check(
            a.terms.iter().all(|t| !banned.contains(&t.corrected.as_str())),
            || format!("case {i}: stopword survived in `{raw}`"),
        )?;
        let again = annotate(&raw, &dict, None).map_err(|e| e.to_string())?;
        check(a.canonical_json() == again.canonical_json(), || format!("case {i}: `{raw}` not reproducible"))?;
    }
    Ok("1000 misspellings match exhaustive search; stopwords removed; reruns byte-identical".into())
}

fn security_principles() -> Outcome {
    let secret = PlatformSecret::generate();
    let keys: BTreeSet<String> = (0..10_000)
        .map(|_| derive_record_key(&secret, "one-user", SearchNonce::fresh()).to_hex())
        .collect();
    check(keys.len() == 10_000, || format!("only {} distinct keys", keys.len()))?;

    let corpus = Arc::new(generate_corpus(77, 1, 8));
    let (suite, judgments) = generate_suite(77, &corpus);
    let rec = recording(&corpus);
    let sys = system(&corpus, rec.clone(), TopologyKind::Mobile, 1, PlatformConfig::default());
    let user = "patient-4417";
    let mut profile = UserProfile::new(user);
    profile.common_info.insert("name".into(), "Zorbaq Vintelli".into());
    profile.common_info.insert("city".into(), "Quibbleton".into());
    profile.medical_info.insert("blood_type".into(), "AB-negative-7".into());
    profile.set_preference(Category::RespiratoryChest, 0.8);
    sys.profiles.save(&profile).map_err(|e| e.to_string())?;
    let session = login(&sys.sessions, user);
    let run = run_suite(&suite, &judgments, &sys, &session.token).map_err(|e| e.to_string())?;
    let mut secrets: Vec<String> = vec![user.to_string(), session.token.clone()];
    secrets.extend(profile.private_values().map(str::to_string));
    let secrets: Vec<String> = secrets.iter().map(|s| s.to_lowercase()).collect();
    let mut payloads: Vec<String> = rec
        .requests()
        .iter()
        .map(|p| {
            form_urlencoded::parse(p.replace('?', "&").as_bytes())
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("&")
        })
        .collect();
    payloads.extend(rec.requests());
    payloads.extend(run.outbound.iter().map(|v| v.to_string()));
    for p in &payloads {
        let lower = p.to_lowercase();
        if let Some(s) = secrets.iter().find(|s| lower.contains(s.as_str())) {
            return Err(format!("`{s}` found in site-bound payload {p}"));
        }
    }

    let mono = Arc::new(generate_corpus(78, 3, 2));
    let locations: Vec<Location> = mono.sites.iter().cloned().map(Location::for_site).collect();
    let cats: BTreeSet<Category> = Category::ALL.into_iter().collect();
    let mut previous: Option<BTreeSet<String>> = None;
    for level in 0..=3u8 {
        let allowed: BTreeSet<String> = filter_locations(&locations, &cats, AssuranceLevel::new(level).unwrap())
            .into_iter()
            .map(|l| l.location_id)
            .collect();
        if let Some(prev) = &previous {
            check(allowed.is_subset(prev), || format!("level {level} admits sites level {} rejected", level - 1))?;
        }
        let topo = Topology::boot(TopologyKind::Mobile, &mono, in_process(&mono), PlatformConfig::default())
            .map_err(|e| e.to_string())?;
        let out = topo
            .collect(&OutboundRequest {
                required_assurance: level,
                ..all_categories(&["fever"])
            })
            .map_err(|e| e.to_string())?;
        for stop in &out.itinerary {
            let site = locations.iter().find(|l| &l.location_id == stop).unwrap();
            check(site.assurance_level() >= level, || format!("{stop} visited at required level {level}"))?;
        }
        previous = Some(allowed);
    }
    Ok(format!(
        "10000 distinct keys; {} site-bound payloads clean over {} queries; assurance filter monotone",
        payloads.len(),
        run.outcomes.len()
    ))
}

fn evaluation_harness() -> Outcome {
    let corpus = Arc::new(generate_corpus(225, 1, 8));
    let (suite, judgments) = generate_suite(225, &corpus);
    check(suite.len() == 225, || format!("{} queries", suite.len()))?;
    let sys = system(&corpus, in_process(&corpus), TopologyKind::Static, 1, PlatformConfig::default());
    let s = login(&sys.sessions, "eval-user");
    let run = run_suite(&suite, &judgments, &sys, &s.token).map_err(|e| e.to_string())?;

    // Independent fold over the raw per-query sets.
    let (mut hits, mut ret, mut rel) = (0usize, 0usize, 0usize);
    let mut per: BTreeMap<Category, (usize, usize, usize)> = BTreeMap::new();
    for o in &run.outcomes {
        let h = o.retrieved.iter().filter(|r| o.relevant.contains(*r)).count();
        hits += h;
        ret += o.retrieved.len();
        rel += o.relevant.len();
        let e = per.entry(o.category).or_default();
        e.0 += h;
        e.1 += o.retrieved.len();
        e.2 += o.relevant.len();
    }
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let f = |p: f64, r: f64| if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    let (p, r) = (div(hits, ret), div(hits, rel));
    let rep = &run.report;
    check(rep.precision == p && rep.recall == r && rep.f_measure == f(p, r), || {
        format!("report {}/{}/{} vs fold {p}/{r}/{}", rep.precision, rep.recall, rep.f_measure, f(p, r))
    })?;
    for (c, (h, rt, rl)) in per {
        let m = &rep.per_category[&c];
        check(m.precision == div(h, rt) && m.recall == div(h, rl), || format!("category {c} differs"))?;
    }
    check(MetricsReport::parse_document(&rep.to_document()).as_ref() == Ok(rep), || "document round trip".into())?;

    let oracle = Arc::new(perfect_oracle_corpus(225));
    let (osuite, _) = generate_suite(225, &oracle);
    let ojudg = oracle_judgments(&osuite, &oracle, &fixture_dictionary(), None, AssuranceLevel::new(0).unwrap());
    let osys = system(&oracle, in_process(&oracle), TopologyKind::Mobile, 0, PlatformConfig::default());
    let os = login(&osys.sessions, "eval-user");
    let orun = run_suite(&osuite, &ojudg, &osys, &os.token).map_err(|e| e.to_string())?;
    let o = &orun.report;
    check((o.precision, o.recall, o.f_measure) == (1.0, 1.0, 1.0), || o.to_table())?;
    Ok(format!(
        "suite P={:.4} R={:.4} F={:.4} equals brute-force fold; oracle fixture P=R=F=1 over {} queries",
        rep.precision, rep.recall, rep.f_measure, o.overall.queries
    ))
}

struct Sink(Sender<Message>);
impl Behavior for Sink {
    fn handle(&mut self, _ctx: &mut Context<'_>, msg: Message) {
        let _ = self.0.send(msg);
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Handle(u32),
    Save,
    Restore,
    Hook(String),
}

/// Walks the places listed in a REQUEST and logs every callback.
struct Walker {
    plan: Vec<String>,
    next: usize,
    log: Arc<Mutex<Vec<Step>>>,
}

impl Walker {
    fn step(&mut self, ctx: &mut Context<'_>) {
        self.next += 1;
        if let Some(dest) = self.plan.get(self.next).cloned() {
            ctx.move_to(&dest).unwrap();
        } else {
            ctx.send("sink", Performative::Inform, "walk", json!(null)).unwrap();
        }
    }
}

impl Behavior for Walker {
    fn handle(&mut self, ctx: &mut Context<'_>, msg: Message) {
        self.log.lock().unwrap().push(Step::Handle(ctx.me().incarnation));
        if msg.performative == Performative::Request {
            self.plan = serde_json::from_value(msg.content).unwrap();
            self.next = 0;
            let first = self.plan[0].clone();
            ctx.move_to(&first).unwrap();
        }
    }
    fn after_move(&mut self, ctx: &mut Context<'_>, dest: &Location) {
        self.log.lock().unwrap().push(Step::Hook(dest.location_id.clone()));
        self.step(ctx);
    }
    fn save_state(&self) -> Vec<u8> {
        self.log.lock().unwrap().push(Step::Save);
        serde_json::to_vec(&(&self.plan, self.next)).unwrap()
    }
    fn restore_state(&mut self, state: &[u8]) {
        self.log.lock().unwrap().push(Step::Restore);
        (self.plan, self.next) = serde_json::from_slice(state).unwrap();
    }
}

fn platform_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for mode in [SchedulerMode::Deterministic, SchedulerMode::Threaded] {
        let p = Arc::new(Platform::new(PlatformConfig { mode, ..Default::default() }, vec![]));
        let (tx, rx) = unbounded();
        p.spawn("dst", Box::new(Sink(tx)), SpawnOptions::default()).map_err(|e| e.to_string())?;
        let senders = 8;
        for s in 0..senders {
            p.spawn(&format!("src{s}"), Box::new(Sink(unbounded().0)), SpawnOptions::default())
                .map_err(|e| e.to_string())?;
        }
        let per = 1000 / senders;
        let mut order: Vec<usize> = (0..senders).flat_map(|s| std::iter::repeat_n(s, per)).collect();
        order.shuffle(&mut rng);
        match mode {
            SchedulerMode::Deterministic => {
                let mut seq = vec![0usize; senders];
                for s in order {
                    p.send(&format!("src{s}"), "dst", Performative::Inform, "fifo", json!([s, seq[s]]))
                        .map_err(|e| e.to_string())?;
                    seq[s] += 1;
                }
            }
            SchedulerMode::Threaded => {
                let handles: Vec<_> = (0..senders)
                    .map(|s| {
                        let p = p.clone();
                        let pause = rng.gen_range(0..50u64);
                        std::thread::spawn(move || {
                            for i in 0..per {
                                if i % 25 == 0 {
                                    std::thread::sleep(Duration::from_micros(pause));
                                }
                                p.send(&format!("src{s}"), "dst", Performative::Inform, "fifo", json!([s, i]))
                                    .unwrap();
                            }
                        })
                    })
                    .collect();
                for h in handles {
                    h.join().map_err(|_| "sender thread panicked")?;
                }
            }
        }
        let mut next = vec![0usize; senders];
        for _ in 0..senders * per {
            let m = p.wait_for(&rx, Duration::from_secs(5)).map_err(|e| e.to_string())?;
            let (s, i): (usize, usize) = serde_json::from_value(m.content).map_err(|e| e.to_string())?;
            check(i == next[s], || format!("{mode:?}: from src{s} got #{i}, expected #{}", next[s]))?;
            next[s] += 1;
        }
        p.run_until_idle();
        check(rx.try_recv().is_err(), || format!("{mode:?}: duplicate delivery"))?;

        let places: Vec<Location> = generate_corpus(3, 1, 1).sites.into_iter().map(Location::for_site).collect();
        let walk = Arc::new(Platform::new(PlatformConfig { mode, c_move: 2.0, ..Default::default() }, places.clone()));
        let log = Arc::new(Mutex::new(Vec::new()));
        walk.spawn(
            "walker",
            Box::new(Walker {
                plan: vec![],
                next: 0,
                log: log.clone(),
            }),
            SpawnOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let (tx, rx) = unbounded();
        walk.spawn("sink", Box::new(Sink(tx)), SpawnOptions::default()).map_err(|e| e.to_string())?;
        let mut plan: Vec<String> = places.iter().map(|l| l.location_id.clone()).collect();
        plan.shuffle(&mut rng);
        walk.send("sink", "walker", Performative::Request, "walk", json!(plan)).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            walk.send("sink", "walker", Performative::Inform, "noise", json!(null)).map_err(|e| e.to_string())?;
        }
        let started = Instant::now();
        walk.wait_for(&rx, Duration::from_secs(10)).map_err(|e| e.to_string())?;
        walk.run_until_idle();
        while mode == SchedulerMode::Threaded
            && log.lock().unwrap().iter().filter(|s| matches!(s, Step::Handle(_))).count() < 21
            && started.elapsed() < Duration::from_secs(5)
        {
            std::thread::sleep(Duration::from_millis(5));
        }
        let log = log.lock().unwrap().clone();
        let hooks: Vec<String> = log
            .iter()
            .filter_map(|s| match s {
                Step::Hook(d) => Some(d.clone()),
                _ => None,
            })
            .collect();
        check(hooks == plan, || format!("{mode:?}: hooks {hooks:?} for plan {plan:?}"))?;
        let mut migrating = false;
        let mut last_incarnation = 0;
        for s in &log {
            match s {
                Step::Save => migrating = true,
                Step::Hook(_) => migrating = false,
                Step::Handle(inc) => {
                    check(!migrating, || format!("{mode:?}: handler ran during migration: {log:?}"))?;
                    check(*inc >= last_incarnation, || format!("{mode:?}: stale incarnation {inc}"))?;
                    last_incarnation = *inc;
                }
                Step::Restore => {}
            }
        }
        let lifecycle = walk.lifecycle();
        let arrived = lifecycle
            .iter()
            .filter(|e| e.agent == "walker" && matches!(e.kind, LifecycleKind::Arrived { .. }))
            .count();
        check(arrived == plan.len(), || format!("{mode:?}: {arrived} arrivals for {} places", plan.len()))?;
    }
    Ok("1000 messages FIFO and exactly once in both schedulers; 13-stop itinerary hooks once each, none during migration".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("metric consistency", metric_consistency),
        ("reference ordering and ratio", reference_ordering),
        ("timing model fidelity", timing_model_fidelity),
        ("topology content equivalence", content_equivalence),
        ("collection choreography", choreography_golden),
        ("pipeline oracles", pipeline_oracles),
        ("security principles", security_principles),
        ("evaluation harness", evaluation_harness),
        ("platform invariants", platform_invariants),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} PASS [{name}] ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL [{name}] ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
