//! Acceptance run: one line per criterion, criteria run one after another
//! so the timing bounds are not disturbed by other tests.

mod common;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use minibrowser::display::{paint, to_json, DisplayItem};
use minibrowser::dom::{NodeId, NodeKind};
use minibrowser::engine::{
    benchmark, format_bench_table, parse_document, run_pipeline, synth, AppendPayload, NodePath, Page, PipelineOptions,
    ScriptCommand,
};
use minibrowser::scheduler::{
    channel, traverse_bottom_up, traverse_top_down, NodeSlots, Scope, SmallBuffer, TraversalOptions, TraversalTree,
    TreeShape, INLINE_CAPACITY,
};
use minibrowser::style::{compute_styles, parse_stylesheet, Rgb, Selector, Specificity};
use minibrowser::tokenizer::{drain, tokenize, StepResult, TokenizerMachine};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use common::{corpus, corpus_dir, elements, oracle_matches, random_dom, random_parents, random_selector};

const LISTING_TIME: Duration = Duration::from_secs(1);
const CHUNK_TIME: Duration = Duration::from_secs(30);
const CHUNK_PARTITIONS: usize = 500;
const MIN_CORPUS: usize = 10;
const DETERMINISM_TIME: Duration = Duration::from_secs(60);
const DETERMINISM_WORKERS: [usize; 4] = [1, 2, 4, 8];
const SYNTH_MAX_FLOWS: usize = 10_000;
const SCHEDULER_TIME: Duration = Duration::from_secs(30);
const SCHEDULER_TREES: usize = 100;
const SCHEDULER_MAX_NODES: usize = 5_000;
const SPEEDUP_MIN_CORES: usize = 4;
const SPEEDUP_FLOWS: usize = 10_000;
const SPEEDUP_BRANCHING: usize = 8;
const SPEEDUP_REPS: usize = 5;
const SPEEDUP_RATIO: f64 = 0.9;
const MUTATION_TIME: Duration = Duration::from_secs(60);
const MUTATION_SEQUENCES: usize = 200;
const MUTATION_MAX_COMMANDS: usize = 10;
const LEAF_PAGE_NODES: usize = 1_000;
const LEAF_VISIT_RATIO: f64 = 0.2;
const CASCADE_MIN_CASES: usize = 30;
const SELECTOR_PAIRS: usize = 1_000;
const SELECTOR_MAX_NODES: usize = 200;
const SELECTOR_MAX_COMPOUNDS: usize = 3;
const SMALL_OPS: usize = 10_000;
const CHANNEL_WRITERS: usize = 4;
const CHANNEL_MESSAGES: usize = 25_000;

enum Verdict {
    Pass(String),
    Fail(String),
    /// The precondition for the measurement does not hold on this machine.
    Unverified(String),
}

type Check = fn() -> Verdict;

fn main() {
    let criteria: [(&str, Option<Duration>, Check); 10] = [
        ("script reentrancy", Some(LISTING_TIME), script_reentrancy),
        ("tokenizer chunk invariance", Some(CHUNK_TIME), chunk_invariance),
        ("parallel determinism", Some(DETERMINISM_TIME), parallel_determinism),
        ("scheduler exactly-once", Some(SCHEDULER_TIME), scheduler_exactly_once),
        ("layout speedup shape", None, speedup_shape),
        ("incremental/full equivalence", Some(MUTATION_TIME), incremental_equivalence),
        ("cascade and specificity", None, cascade_oracle),
        ("small buffer equivalence", None, small_buffer),
        ("channel contract", None, channel_contract),
        ("painter correctness", None, painter),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let verdict = match (verdict, limit) {
            (Verdict::Pass(d), Some(l)) if elapsed > *l => {
                Verdict::Fail(format!("{d}; took {:.2}s, limit {:.0}s", elapsed.as_secs_f64(), l.as_secs_f64()))
            }
            (v, _) => v,
        };
        let (label, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Unverified(d) => ("UNVERIFIED", d),
        };
        println!("criterion {:>2} {label:<10} {name} ({:.2}s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn verdict(failures: Vec<String>, ok: String) -> Verdict {
    match failures.first() {
        None => Verdict::Pass(ok),
        Some(first) => {
            for f in &failures {
                eprintln!("  {f}");
            }
            Verdict::Fail(format!("{} failures, first: {first}", failures.len()))
        }
    }
}

fn listing() -> String {
    std::fs::read_to_string(corpus_dir().join("03_script_write.html")).unwrap()
}

fn script_reentrancy() -> Verdict {
    let parsed = parse_document(&listing(), 16, |_| {});
    let tree = &parsed.tree;
    let mut failures = Vec::new();
    let h1s: Vec<NodeId> = tree.elements_named("h1").collect();
    if h1s.len() != 1 {
        failures.push(format!("expected one h1, found {}", h1s.len()));
    } else {
        let h1 = h1s[0];
        let kinds: Vec<&NodeKind> = tree.children(h1).iter().map(|&c| &tree.node(c).unwrap().kind).collect();
        let expected = [
            NodeKind::text("\n  This is a h1 title\n\n  "),
            NodeKind::element("script"),
            NodeKind::Comment("\n  This is commented\n  ".into()),
            NodeKind::text("\n\n"),
        ];
        let same = kinds.len() == expected.len()
            && kinds.iter().zip(&expected).all(|(k, e)| match (k, e) {
                (NodeKind::Element { name, .. }, NodeKind::Element { name: n, .. }) => name == n,
                (k, e) => *k == e,
            });
        if !same {
            failures.push(format!("h1 children {kinds:?}"));
        }
    }
    let comments = tree
        .descendants(tree.root())
        .into_iter()
        .filter(|&n| matches!(tree.node(n).unwrap().kind, NodeKind::Comment(_)))
        .count();
    if comments != 1 {
        failures.push(format!("expected one comment, found {comments}"));
    }
    match Page::load(&listing(), &[], 800.0, TraversalOptions::with_workers(2)) {
        Ok(page) => {
            let shown = page
                .display_list()
                .unwrap()
                .iter()
                .any(|i| matches!(i, DisplayItem::TextRun { text, .. } if text.contains("This is a h1 title")));
            if !shown {
                failures.push("title text missing from the display list".into());
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    verdict(failures, "h1 spliced from \"<h\"+\"1>\", comment from \"<!-\"+\"-\"".into())
}

fn tokenize_chunked(text: &str, cuts: &[usize]) -> Vec<minibrowser::tokenizer::Token> {
    let mut machine = TokenizerMachine::new();
    let mut out = Vec::new();
    let mut last = 0;
    for &c in cuts.iter().chain(std::iter::once(&text.len())) {
        machine.feed(&text[last..c]).unwrap();
        out.extend(drain(&mut machine));
        last = c;
    }
    machine.end_stream().unwrap();
    out.extend(drain(&mut machine));
    assert_eq!(machine.next_token(), StepResult::Finished);
    out
}

fn random_cuts(rng: &mut impl Rng, text: &str) -> Vec<usize> {
    let boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).skip(1).collect();
    if boundaries.is_empty() {
        return Vec::new();
    }
    let mut cuts: Vec<usize> = match rng.gen_range(0..4) {
        // every character its own chunk
        0 => boundaries.clone(),
        1 => (0..rng.gen_range(1..=3)).map(|_| boundaries[rng.gen_range(0..boundaries.len())]).collect(),
        _ => (0..rng.gen_range(1..=40)).map(|_| boundaries[rng.gen_range(0..boundaries.len())]).collect(),
    };
    cuts.sort_unstable();
    cuts.dedup();
    cuts
}

fn chunk_invariance() -> Verdict {
    let pages = corpus();
    if pages.len() < MIN_CORPUS {
        return Verdict::Fail(format!("corpus has {} documents, need {MIN_CORPUS}", pages.len()));
    }
    let mut rng = SmallRng::seed_from_u64(2);
    let mut failures = Vec::new();
    for page in &pages {
        let whole = tokenize(&page.html);
        for _ in 0..CHUNK_PARTITIONS {
            let cuts = random_cuts(&mut rng, &page.html);
            if tokenize_chunked(&page.html, &cuts) != whole {
                failures.push(format!("{} cuts {cuts:?}", page.name));
                break;
            }
        }
    }
    verdict(failures, format!("{} documents x {CHUNK_PARTITIONS} partitions", pages.len()))
}

fn render_dumps(html: &str, css: &[String], workers: usize) -> Result<(String, String), String> {
    // A small cutoff makes the parallel runs actually split work.
    let options = TraversalOptions { workers, cutoff: if workers == 1 { 1 << 20 } else { 2 } };
    let page = Page::load(html, css, 800.0, options).map_err(|e| e.to_string())?;
    Ok((page.dump_layout(), to_json(&page.display_list().map_err(|e| e.to_string())?)))
}

fn parallel_determinism() -> Verdict {
    let mut docs: Vec<(String, String, Vec<String>)> = corpus().into_iter().map(|p| (p.name, p.html, p.css)).collect();
    for (seed, elements) in [(1u64, 50usize), (2, 400), (3, 2_000), (4, 4_500)] {
        docs.push((format!("random-{seed}"), synth::random_page(seed, elements), vec![synth::random_css(seed, 40)]));
    }
    docs.push(("wide-10k".into(), synth::wide_tree_page(SYNTH_MAX_FLOWS, 8), vec![synth::wide_tree_css()]));
    let mut failures = Vec::new();
    let mut max_flows = 0;
    for (name, html, css) in &docs {
        let reference = match render_dumps(html, css, 1) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        max_flows = max_flows.max(reference.0.lines().count());
        for &w in &DETERMINISM_WORKERS[1..] {
            match render_dumps(html, css, w) {
                Ok(r) if r == reference => {}
                Ok(_) => failures.push(format!("{name}: workers {w} differ from 1")),
                Err(e) => failures.push(format!("{name} workers {w}: {e}")),
            }
        }
    }
    if !(SYNTH_MAX_FLOWS * 9 / 10..=SYNTH_MAX_FLOWS + SYNTH_MAX_FLOWS / 10).contains(&max_flows) {
        failures.push(format!("largest synthetic tree has {max_flows} flows"));
    }
    verdict(failures, format!("{} pages, up to {max_flows} flows, workers {DETERMINISM_WORKERS:?}", docs.len()))
}

fn scheduler_exactly_once() -> Verdict {
    let mut rng = SmallRng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut total_nodes = 0;
    for i in 0..SCHEDULER_TREES {
        let n = if i == 0 { SCHEDULER_MAX_NODES } else { rng.gen_range(1..=SCHEDULER_MAX_NODES) };
        total_nodes += n;
        let shape = TreeShape::from_parents(&random_parents(&mut rng, n));
        let options = TraversalOptions { workers: [1, 2, 4, 8][i % 4], cutoff: rng.gen_range(1..=32) };

        let visits: Vec<AtomicUsize> = (0..n).map(|_| AtomicUsize::new(0)).collect();
        let violations = AtomicUsize::new(0);
        let mut slots = NodeSlots::<bool>::with_len(n);
        let run = traverse_top_down(&shape, &mut slots, Scope::Full, options, |node, done, parent| {
            visits[node].fetch_add(1, Ordering::Relaxed);
            if parent.is_some_and(|p| !*p) {
                violations.fetch_add(1, Ordering::Relaxed);
            }
            *done = true;
            true
        });
        if let Err(e) = run {
            failures.push(format!("tree {i}: {e}"));
            continue;
        }
        let wrong = visits.iter().filter(|v| v.load(Ordering::Relaxed) != 1).count();
        if wrong + violations.load(Ordering::Relaxed) > 0 {
            failures
                .push(format!("tree {i} top-down: {wrong} miscounted, {} order violations", violations.into_inner()));
        }

        let visits: Vec<AtomicUsize> = (0..n).map(|_| AtomicUsize::new(0)).collect();
        let finished: Vec<AtomicUsize> = (0..n).map(|_| AtomicUsize::new(0)).collect();
        let violations = AtomicUsize::new(0);
        let mut slots = NodeSlots::<bool>::with_len(n);
        let run = traverse_bottom_up(&shape, &mut slots, Scope::Full, options, |node, done, children| {
            visits[node].fetch_add(1, Ordering::Relaxed);
            let early = children.iter().any(|c| !*c)
                || shape.children(node).iter().any(|&c| finished[c].load(Ordering::Acquire) == 0);
            if early {
                violations.fetch_add(1, Ordering::Relaxed);
            }
            *done = true;
            finished[node].store(1, Ordering::Release);
        });
        if let Err(e) = run {
            failures.push(format!("tree {i}: {e}"));
            continue;
        }
        let wrong = visits.iter().filter(|v| v.load(Ordering::Relaxed) != 1).count();
        if wrong + violations.load(Ordering::Relaxed) > 0 {
            failures
                .push(format!("tree {i} bottom-up: {wrong} miscounted, {} order violations", violations.into_inner()));
        }
    }
    verdict(failures, format!("{SCHEDULER_TREES} trees, {total_nodes} nodes, zero violations"))
}

fn speedup_shape() -> Verdict {
    let html = synth::wide_tree_page(SPEEDUP_FLOWS, SPEEDUP_BRANCHING);
    let css = vec![synth::wide_tree_css()];
    let row = match benchmark("wide-10k", &html, &css, &[1, 4], SPEEDUP_REPS, 800.0) {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    print!("{}", format_bench_table(std::slice::from_ref(&row)));
    let (one, four) = (row.cells[0].median_ms, row.cells[1].median_ms);
    let detail = format!("{} flows, median 1 worker {one:.2} ms, 4 workers {four:.2} ms", row.flows);
    if row.flows < SPEEDUP_FLOWS {
        return Verdict::Fail(format!("{detail}; page too small"));
    }
    let cores = num_cpus::get_physical();
    if cores < SPEEDUP_MIN_CORES {
        return Verdict::Unverified(format!("{detail}; {cores} physical core(s), need {SPEEDUP_MIN_CORES}"));
    }
    if four <= SPEEDUP_RATIO * one {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; need ratio <= {SPEEDUP_RATIO}"))
    }
}

const MUTATION_STYLES: &[&str] = &[
    "width: 120px",
    "width: 40px; padding: 3px",
    "display: none",
    "display: block",
    "display: inline",
    "display: list-item",
    "font-size: 22px",
    "margin: 2px 5px",
    "height: 17px",
    "color: red",
    "background-color: #ccc",
    "padding: 1em",
];
const MUTATION_CLASSES: &[&str] = &["a", "b", "c", "item", "note", "row", "cell", "lead", "small", "inner"];
const MUTATION_TAGS: &[&str] = &["div", "p", "span", "li", "b", "ul"];
const MUTATION_TEXT: &[&str] =
    &["x", "two words", "  spaced   out  ", "a much longer sentence that should wrap eventually"];

fn random_command(rng: &mut impl Rng, page: &Page) -> ScriptCommand {
    let dom = &page.dom;
    let nodes: Vec<NodeId> = dom.descendants(dom.root()).into_iter().filter(|&n| n != dom.root()).collect();
    let els: Vec<NodeId> = nodes.iter().copied().filter(|&n| dom.element_name(n).is_some()).collect();
    let pick_el = |rng: &mut dyn rand::RngCore| NodePath::of(dom, els[rng.gen_range(0..els.len())]).unwrap();
    if els.is_empty() {
        return ScriptCommand::AppendChild {
            parent: NodePath(Vec::new()),
            payload: AppendPayload::Element("div".into()),
        };
    }
    match rng.gen_range(0..10) {
        0..=2 => ScriptCommand::SetAttribute {
            path: pick_el(rng),
            name: "style".into(),
            value: MUTATION_STYLES[rng.gen_range(0..MUTATION_STYLES.len())].into(),
        },
        3 => ScriptCommand::SetAttribute {
            path: pick_el(rng),
            name: "class".into(),
            value: MUTATION_CLASSES[rng.gen_range(0..MUTATION_CLASSES.len())].into(),
        },
        4..=5 => ScriptCommand::AppendChild {
            parent: pick_el(rng),
            payload: AppendPayload::Element(MUTATION_TAGS[rng.gen_range(0..MUTATION_TAGS.len())].into()),
        },
        6..=7 => ScriptCommand::AppendChild {
            parent: pick_el(rng),
            payload: AppendPayload::Text(MUTATION_TEXT[rng.gen_range(0..MUTATION_TEXT.len())].into()),
        },
        _ => ScriptCommand::RemoveNode { path: NodePath::of(dom, nodes[rng.gen_range(0..nodes.len())]).unwrap() },
    }
}

fn incremental_equivalence() -> Verdict {
    let pages = corpus();
    let mut rng = SmallRng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut commands_run = 0;
    for i in 0..MUTATION_SEQUENCES {
        let doc = &pages[i % pages.len()];
        let options = TraversalOptions { workers: 1 + i % 4, cutoff: 4 };
        let mut page = match Page::load(&doc.html, &doc.css, 800.0, options) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("{}: {e}", doc.name));
                continue;
            }
        };
        let len = rng.gen_range(1..=MUTATION_MAX_COMMANDS);
        let mut applied = Vec::new();
        let result = (|| {
            for _ in 0..len {
                let command = random_command(&mut rng, &page);
                applied.push(command.to_string());
                page.apply_mutations(std::slice::from_ref(&command))?;
                // relayout part way through some sequences as well
                if rng.gen_bool(0.2) {
                    page.incremental_relayout()?;
                }
            }
            page.incremental_relayout()?;
            page.from_scratch_dump()
        })();
        commands_run += applied.len();
        match result {
            Ok(expected) if expected == page.dump_layout() => {}
            Ok(_) => failures.push(format!("{} after {applied:?}", doc.name)),
            Err(e) => failures.push(format!("{} after {applied:?}: {e}", doc.name)),
        }
    }
    let mut detail = format!("{MUTATION_SEQUENCES} sequences, {commands_run} commands, bit-equal dumps");
    match single_leaf_ratio() {
        Ok((ratio, incremental, full, nodes)) => {
            detail.push_str(&format!(
                "; leaf mutation on {nodes}-node page: {incremental}/{full} visits = {:.1}%",
                ratio * 100.0
            ));
            if ratio >= LEAF_VISIT_RATIO {
                failures.push(format!("leaf mutation ratio {ratio:.3} >= {LEAF_VISIT_RATIO}"));
            }
        }
        Err(e) => failures.push(e),
    }
    verdict(failures, detail)
}

/// Incremental over full visit counts for one style change on a leaf.
fn single_leaf_ratio() -> Result<(f64, usize, usize, usize), String> {
    // wide_tree_page counts flows; a leaf div and its text add two nodes and
    // two flows, so flows track DOM nodes closely.
    let html = synth::wide_tree_page(LEAF_PAGE_NODES, 8);
    let mut page = Page::load(&html, &[synth::wide_tree_css()], 800.0, TraversalOptions::with_workers(2))
        .map_err(|e| e.to_string())?;
    let nodes = page.dom.live_count();
    if nodes < LEAF_PAGE_NODES {
        return Err(format!("page has only {nodes} nodes"));
    }
    let leaf = elements(&page.dom)
        .into_iter()
        .rev()
        .find(|&n| {
            page.dom.element_name(n) == Some("div")
                && page.dom.children(n).iter().all(|&c| page.dom.element_name(c).is_none())
        })
        .ok_or("no leaf div")?;
    let path = NodePath::of(&page.dom, leaf).unwrap();
    let command = ScriptCommand::SetAttribute { path, name: "style".into(), value: "padding: 5px".into() };
    page.apply_mutations(&[command]).map_err(|e| e.to_string())?;
    let incremental = page.incremental_relayout().map_err(|e| e.to_string())?.total();
    if page.dump_layout() != page.from_scratch_dump().map_err(|e| e.to_string())? {
        return Err("leaf mutation diverged from a full rebuild".into());
    }
    let mut full_page = page.clone();
    full_page.flows.mark_all_dirty();
    let full = full_page.relayout().map_err(|e| e.to_string())?.total();
    Ok((incremental as f64 / full as f64, incremental, full, nodes))
}

/// (stylesheet, body markup, property of `#t`, expected computed value)
const CASCADE_CASES: &[(&str, &str, &str, &str)] = &[
    ("div {color: red} .a {color: blue}", "<div class=a id=t>x</div>", "color", "#0000ff"),
    (".a {color: blue} div {color: red}", "<div class=a id=t>x</div>", "color", "#0000ff"),
    ("div {width: 10px} div {width: 20px}", "<div id=t></div>", "width", "20.00px"),
    ("div {width: 20px} div {width: 10px}", "<div id=t></div>", "width", "10.00px"),
    ("div {color: green}", "<div><span id=t>x</span></div>", "color", "#008000"),
    ("#t {color: red} .a.b.c {color: blue}", "<p id=t class='a b c'>x</p>", "color", "#ff0000"),
    (".a.b {color: red} .b {color: blue}", "<p id=t class='a b'>x</p>", "color", "#ff0000"),
    ("p {color: red} body p {color: blue}", "<p id=t>x</p>", "color", "#0000ff"),
    ("body p {color: blue} p {color: red}", "<p id=t>x</p>", "color", "#0000ff"),
    ("div p {color: blue} div > p {color: red}", "<div><p id=t>x</p></div>", "color", "#ff0000"),
    ("div > p {color: red} div p {color: blue}", "<div><p id=t>x</p></div>", "color", "#0000ff"),
    ("* {color: red} p {color: blue}", "<p id=t>x</p>", "color", "#0000ff"),
    ("p {color: blue} * {color: red}", "<p id=t>x</p>", "color", "#0000ff"),
    ("#t {color: red}", "<p id=t style='color: olive'>x</p>", "color", "#808000"),
    ("#t#t {color: red}", "<p id=t style='color: olive'>x</p>", "color", "#808000"),
    ("p {color: red}", "<p id=t style='bogus: 3; color: navy'>x</p>", "color", "#000080"),
    ("div {font-size: 20px}", "<div><p id=t>x</p></div>", "font-size", "20.00px"),
    ("div {font-size: 20px} p {font-size: 1.5em}", "<div><p id=t>x</p></div>", "font-size", "30.00px"),
    ("p {font-size: 10px; width: 3em}", "<p id=t>x</p>", "width", "30.00px"),
    ("p {font-size: 2em; padding-left: 1em}", "<p id=t>x</p>", "padding-left", "32.00px"),
    ("div {width: 50px}", "<div><p id=t>x</p></div>", "width", "auto"),
    ("div {background-color: red}", "<div><p id=t>x</p></div>", "background-color", "transparent"),
    ("div {margin: 1px 2px 3px 4px}", "<div id=t></div>", "margin-left", "4.00px"),
    ("div {margin: 1px 2px}", "<div id=t></div>", "margin-bottom", "1.00px"),
    ("div {padding: 7px} div {padding-top: 1px}", "<div id=t></div>", "padding-top", "1.00px"),
    ("div {padding-top: 1px} div {padding: 7px}", "<div id=t></div>", "padding-top", "7.00px"),
    ("", "<span id=t>x</span>", "display", "inline"),
    ("", "<li id=t>x</li>", "display", "list-item"),
    ("span {display: block}", "<span id=t>x</span>", "display", "block"),
    ("", "<p id=t>x</p>", "font-size", "16.00px"),
    ("", "<p id=t>x</p>", "color", "#000000"),
    ("p {color: #abc}", "<p id=t>x</p>", "color", "#aabbcc"),
    (".x {color: red} .y {color: blue}", "<p id=t class='y x'>x</p>", "color", "#0000ff"),
    ("ul li {color: red} li {color: blue}", "<ul><li id=t>x</li></ul>", "color", "#ff0000"),
    ("div div {color: red}", "<div><p><div id=t>x</div></p></div>", "color", "#ff0000"),
    ("div > div {color: red}", "<div><span><span id=t>x</span></span></div>", "color", "#000000"),
    ("p {color: red; color: blue}", "<p id=t>x</p>", "color", "#0000ff"),
    ("p {width: -5px} p {height: 4px}", "<p id=t>x</p>", "width", "auto"),
];

/// (selector, expected specificity)
const SPECIFICITY_CASES: &[(&str, Specificity)] = &[
    ("*", Specificity(0, 0, 0)),
    ("div.note", Specificity(0, 1, 1)),
    ("#main .item", Specificity(1, 1, 0)),
    ("ul li", Specificity(0, 0, 2)),
    ("ul > li.a.b", Specificity(0, 2, 2)),
    ("#a #b", Specificity(2, 0, 0)),
    ("*.a", Specificity(0, 1, 0)),
    ("div p span > em", Specificity(0, 0, 4)),
];

fn cascade_oracle() -> Verdict {
    let mut failures = Vec::new();
    for (css, body, property, expected) in CASCADE_CASES {
        let html = format!("<html><body>{body}</body></html>");
        let page = Page::load(&html, &[css.to_string()], 800.0, TraversalOptions::with_workers(1));
        let got = page.ok().and_then(|p| {
            let t = p.dom.descendants(p.dom.root()).into_iter().find(|&n| p.dom.attr(n, "id") == Some("t"))?;
            let props = p.styles.get(t)?.properties();
            props.into_iter().find(|(k, _)| k == property).map(|(_, v)| v)
        });
        if got.as_deref() != Some(*expected) {
            failures.push(format!("{css:?} on {body:?}: {property} = {got:?}, expected {expected}"));
        }
    }
    for (text, expected) in SPECIFICITY_CASES {
        match Selector::parse(text) {
            Ok(s) if s.specificity() == *expected => {}
            Ok(s) => failures.push(format!("{text}: {}", s.specificity())),
            Err(e) => failures.push(format!("{text}: {e}")),
        }
    }
    let cases = CASCADE_CASES.len() + SPECIFICITY_CASES.len();
    if cases < CASCADE_MIN_CASES {
        failures.push(format!("only {cases} hand cases"));
    }

    let mut rng = SmallRng::seed_from_u64(7);
    let mut positives = 0;
    for _ in 0..SELECTOR_PAIRS {
        let n = rng.gen_range(1..=SELECTOR_MAX_NODES);
        let tree = random_dom(&mut rng, n);
        let els = elements(&tree);
        let node = els[rng.gen_range(0..els.len())];
        let text = random_selector(&mut rng, SELECTOR_MAX_COMPOUNDS);
        let selector = match Selector::parse(&text) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{text}: {e}"));
                continue;
            }
        };
        let want = oracle_matches(&text, &tree, node);
        positives += want as usize;
        if selector.matches(&tree, node) != Ok(want) {
            failures.push(format!("{text} on node {node} of a {n}-node tree: oracle says {want}"));
        }
    }
    // Also check the styles computed through the parallel pass agree with
    // the sheet order on random trees.
    let sheet = parse_stylesheet("div {color: red} .a {color: blue} div.a {color: green} #x {color: navy}");
    let tree = random_dom(&mut rng, 150);
    let styles = compute_styles(&tree, &sheet.rules, TraversalOptions::with_workers(4)).unwrap();
    for n in elements(&tree) {
        let is = |c: &str| tree.attr(n, "class").is_some_and(|v| v.split_whitespace().any(|x| x == c));
        let div = tree.element_name(n) == Some("div");
        let expected = if tree.attr(n, "id") == Some("x") {
            "#000080"
        } else if div && is("a") {
            "#008000"
        } else if is("a") {
            "#0000ff"
        } else if div {
            "#ff0000"
        } else {
            // inherited from the nearest element ancestor, or black
            let mut cur = tree.parent(n);
            let mut color = "#000000".to_string();
            while let Some(p) = cur {
                if let Some(s) = styles.get(p) {
                    color = s.color.to_string();
                    break;
                }
                cur = tree.parent(p);
            }
            if styles.get(n).map(|s| s.color.to_string()) != Some(color) {
                failures.push(format!("node {n} did not inherit"));
            }
            continue;
        };
        if styles.get(n).map(|s| s.color.to_string()).as_deref() != Some(expected) {
            failures.push(format!("node {n}: expected {expected}"));
        }
    }
    verdict(failures, format!("{cases} hand cases, {SELECTOR_PAIRS} random pairs ({positives} matching)"))
}

fn small_buffer() -> Verdict {
    let mut failures = Vec::new();
    let mut fresh: SmallBuffer<u32> = SmallBuffer::new();
    for i in 0..INLINE_CAPACITY as u32 {
        fresh.push(i);
        if !fresh.is_inline() {
            failures.push(format!("spilled at element {}", i + 1));
        }
    }
    fresh.push(99);
    if fresh.is_inline() {
        failures.push(format!("still inline after element {}", INLINE_CAPACITY + 1));
    }
    if INLINE_CAPACITY != 4 {
        failures.push(format!("inline capacity {INLINE_CAPACITY}"));
    }

    let mut rng = SmallRng::seed_from_u64(8);
    let mut buf: SmallBuffer<u32> = SmallBuffer::new();
    let mut oracle: Vec<u32> = Vec::new();
    let mut max_len = 0;
    for step in 0..SMALL_OPS {
        let op = rng.gen_range(0..8);
        let ok = match op {
            0..=2 => {
                let v = rng.gen();
                buf.push(v);
                oracle.push(v);
                true
            }
            3 => buf.pop() == oracle.pop(),
            4 => {
                let i = rng.gen_range(0..=oracle.len() + 1);
                let v = rng.gen();
                let r = buf.insert(i, v);
                if i <= oracle.len() {
                    oracle.insert(i, v);
                    r.is_ok()
                } else {
                    r.is_err()
                }
            }
            5 => {
                let i = rng.gen_range(0..=oracle.len());
                match (buf.get_mut(i), oracle.get_mut(i)) {
                    (Ok(a), Some(b)) => {
                        *a = a.wrapping_add(1);
                        *b = b.wrapping_add(1);
                        true
                    }
                    (Err(_), None) => true,
                    _ => false,
                }
            }
            6 => {
                let m = rng.gen_range(2..5);
                buf.retain(|v| *v % m != 0);
                oracle.retain(|v| *v % m != 0);
                true
            }
            _ => {
                let i = rng.gen_range(0..=oracle.len());
                buf.get(i).ok() == oracle.get(i)
            }
        };
        max_len = max_len.max(oracle.len());
        let inline_ok = buf.is_inline() == (max_len <= INLINE_CAPACITY);
        if !ok || buf.as_slice() != oracle.as_slice() || buf.len() != oracle.len() || !inline_ok {
            failures.push(format!("step {step} op {op}: {buf:?} vs {oracle:?}"));
            break;
        }
        // start over now and then so the inline range is exercised again
        if rng.gen_ratio(1, 200) {
            buf = SmallBuffer::new();
            oracle.clear();
            max_len = 0;
        }
    }
    verdict(failures, format!("{SMALL_OPS} operations, spill at element {}", INLINE_CAPACITY + 1))
}

fn channel_contract() -> Verdict {
    let (tx, rx) = channel::<(usize, usize)>();
    let writers: Vec<_> = (0..CHANNEL_WRITERS)
        .map(|w| {
            let tx = tx.clone();
            std::thread::spawn(move || {
                for seq in 0..CHANNEL_MESSAGES {
                    tx.send((w, seq)).expect("reader alive");
                }
            })
        })
        .collect();
    drop(tx);
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut failures = Vec::new();
    let mut received = 0;
    while let Ok((w, seq)) = rx.recv() {
        received += 1;
        let expected = next.entry(w).or_insert(0);
        if seq != *expected {
            failures.push(format!("writer {w}: got {seq}, expected {expected}"));
        }
        *expected = seq + 1;
    }
    for h in writers {
        h.join().unwrap();
    }
    if rx.recv().is_ok() {
        failures.push("message after close".into());
    }
    if received != CHANNEL_WRITERS * CHANNEL_MESSAGES {
        failures.push(format!("received {received}"));
    }
    if (0..CHANNEL_WRITERS).any(|w| next.get(&w) != Some(&CHANNEL_MESSAGES)) {
        failures.push(format!("per-writer counts {next:?}"));
    }
    verdict(
        failures,
        format!("{CHANNEL_WRITERS} writers x {CHANNEL_MESSAGES} messages, FIFO per writer, Closed at end"),
    )
}

fn painter() -> Verdict {
    let mut failures = Vec::new();
    let red = Rgb(255, 0, 0);
    let blue = Rgb(0, 0, 255);
    let a = DisplayItem::SolidRect { x: 0.0, y: 0.0, w: 6.0, h: 6.0, color: red };
    let b = DisplayItem::SolidRect { x: 3.0, y: 3.0, w: 6.0, h: 6.0, color: blue };
    let ab = paint(&[a.clone(), b.clone()], 10, 10);
    let ba = paint(&[b, a], 10, 10);
    for y in 0..10 {
        for x in 0..10 {
            let in_a = x < 6 && y < 6;
            let in_b = (3..9).contains(&x) && (3..9).contains(&y);
            let want = match (in_a, in_b) {
                (_, true) => blue,
                (true, false) => red,
                _ => Rgb::WHITE,
            };
            let want_swapped = if in_a { red } else { want };
            if ab.pixel(x, y) != want || ba.pixel(x, y) != want_swapped {
                failures.push(format!("pixel ({x}, {y})"));
            }
        }
    }
    let empty = paint(&[], 37, 11);
    if !empty.pixels.iter().all(|&v| v == 255) {
        failures.push("empty canvas not white".into());
    }

    let dir = corpus_dir();
    let page = dir.join("01_article.html").to_string_lossy().into_owned();
    let css = vec![dir.join("01_article.css").to_string_lossy().into_owned()];
    let mut images = Vec::new();
    for workers in [1, 4, 1] {
        let options =
            PipelineOptions { traversal: TraversalOptions::with_workers(workers), viewport: 800.0, raster: true };
        match run_pipeline(&page, &css, options) {
            Ok(out) => images.push(out.rendered.raster.expect("raster requested").to_ppm()),
            Err(e) => failures.push(e.to_string()),
        }
    }
    if images.windows(2).any(|w| w[0] != w[1]) {
        failures.push("PPM bytes differ between runs".into());
    }
    let size = images.first().map_or(0, Vec::len);
    verdict(failures, format!("overlap pixels exact, empty canvas white, {size}-byte PPM stable over 3 runs"))
}
