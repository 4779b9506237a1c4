//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use unijoin::corpus::corpus;
use unijoin::exec::{run, Opts, PlanKind, ResultBag, Strategy, StructurePolicy};
use unijoin::oracle::nested_loop;
use unijoin::query::{convert_left_deep, optimize_plan, parse_query, FreeJoinPlan, LeftDeepPlan, PlanMode};
use unijoin::storage::generate::{gen_adversarial_triangle, gen_job_like, seeded_rng};
use unijoin::storage::{Catalog, Relation};
use unijoin::trie::{build_trie, DictKind, LeafKind, NodeRef, SmallVec, SMALLVEC_CAPACITIES};

const AC1_INSTANCES: usize = 200;
const AC1_MAX_ROWS: usize = 1000;
const AC1_BUDGET_SECS: f64 = 300.0;
const AC3_NS: [usize; 4] = [20, 40, 80, 160];
const AC3_BINARY_MIN_SLOPE: f64 = 1.8;
const AC3_GJ_MAX_SLOPE: f64 = 1.6;
const AC4_KEYS: i64 = 10_000;
const AC4_PROBES: usize = 1_000;
const AC5_INSTANCES: usize = 200;
const AC5_FIG_K: i64 = 8;
const AC7_FACT_ROWS: usize = 100_000;
const AC7_RUNS: usize = 5;
const AC7_MARGIN: f64 = 0.10;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 7] = [
        ("AC1 oracle equivalence", ac1),
        ("AC2 plan golden files", ac2),
        ("AC3 asymptotic separation", ac3),
        ("AC4 data-structure differentials", ac4),
        ("AC5 factorization exactness", ac5),
        ("AC6 hybrid policy", ac6),
        ("AC7 build-time sanity", ac7),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        match f() {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn opt_grid() -> Vec<Opts> {
    let mut v = vec![Opts::all(), Opts::none()];
    v.extend((1..=5).map(|i| Opts::all().with(i, false)));
    v
}

fn cells() -> Vec<Strategy> {
    let mut v = Vec::new();
    for plan in PlanKind::ALL {
        for policy in [StructurePolicy::hash(), StructurePolicy::sorted(), StructurePolicy::hybrid()] {
            for opts in opt_grid() {
                v.push(Strategy { plan, policy: policy.clone(), opts });
            }
        }
    }
    v
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let queries = corpus();
    let cells = cells();
    let mut rng = seeded_rng(0xAC1);
    let mut runs = 0u64;
    for cq in &queries {
        let pq = cq.parse();
        let tree = cq.tree();
        for i in 0..AC1_INSTANCES {
            // Mostly small dense instances; every tenth is large and sparse.
            let (rows, domain) = if i % 10 == 9 { (AC1_MAX_ROWS, 500) } else { (30, 2 + (i % 7) as i64) };
            let cat = cq.instance(&mut rng, rows, domain);
            let oracle = nested_loop(&pq.query, &cat, &pq.agg).map_err(|e| format!("{}: oracle: {e}", cq.name))?;
            for s in &cells {
                let (got, _) =
                    run(&pq.query, &pq.agg, &cat, tree.as_ref(), s).map_err(|e| format!("{} {s}: {e}", cq.name))?;
                if let Some(d) = got.first_difference(&oracle) {
                    return Err(format!("{} instance {i} under {s}: {d}", cq.name));
                }
                runs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!(
        "{} queries x {AC1_INSTANCES} instances x {} cells = {runs} runs identical to the oracle in {secs:.1}s",
        queries.len(),
        cells.len()
    );
    if secs >= AC1_BUDGET_SECS {
        return Err(format!("{msg}, over the {AC1_BUDGET_SECS}s budget"));
    }
    Ok(msg)
}

fn ac2() -> Outcome {
    let q = parse_query("Q(x,a,b) :- R(x,a), S(x,b), T(x)").unwrap().query;
    let binary = convert_left_deep(&q, &LeftDeepPlan::new(["R", "S", "T"])).map_err(|e| e.to_string())?;
    let gj = optimize_plan(&q, &binary, PlanMode::GenericJoin).map_err(|e| e.to_string())?;
    let fj = optimize_plan(&q, &binary, PlanMode::FreeJoin).map_err(|e| e.to_string())?;
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
    for (file, got) in [("clover_binary.plan", &binary), ("clover_generic_join.plan", &gj), ("clover_free_join.plan", &fj)] {
        let text = std::fs::read_to_string(format!("{dir}/{file}")).map_err(|e| format!("{file}: {e}"))?;
        let want = FreeJoinPlan::parse(&text).map_err(|e| format!("{file}: {e}"))?;
        if *got != want {
            return Err(format!("{file}: expected {want}, got {got}"));
        }
    }
    Ok(format!("{binary} / {gj} / {fj}"))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn ac3() -> Outcome {
    let pq = parse_query("Q(a,b,c) :- R(a,b), S(b,c), T(c,a)").unwrap();
    let (mut xs, mut bin, mut gj) = (Vec::new(), Vec::new(), Vec::new());
    for n in AC3_NS {
        let cat: Catalog = gen_adversarial_triangle(n).map_err(|e| e.to_string())?.into_iter().collect();
        let strat = |plan| Strategy { plan, policy: StructurePolicy::hash(), opts: Opts::all() };
        let (rb, sb) = run(&pq.query, &pq.agg, &cat, None, &strat(PlanKind::Binary)).map_err(|e| e.to_string())?;
        let (rg, sg) = run(&pq.query, &pq.agg, &cat, None, &strat(PlanKind::GenericJoin)).map_err(|e| e.to_string())?;
        if rb != rg || rb.total_multiplicity() != Some(n as u64 / 2) {
            return Err(format!("n={n}: wrong triangle output"));
        }
        xs.push(n as f64);
        bin.push(sb.intermediate_tuples as f64);
        gj.push((sg.probes + sg.output_tuples) as f64);
    }
    let (sb, sg) = (slope(&xs, &bin), slope(&xs, &gj));
    let msg = format!(
        "binary intermediate_tuples {bin:?} slope {sb:.2} (>= {AC3_BINARY_MIN_SLOPE}); generic join probes+output {gj:?} slope {sg:.2} (<= {AC3_GJ_MAX_SLOPE})"
    );
    if sb >= AC3_BINARY_MIN_SLOPE && sg <= AC3_GJ_MAX_SLOPE {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac4() -> Outcome {
    // Small vectors against plain vectors across each inline capacity.
    let mut rng = seeded_rng(0xAC4);
    for &n in &SMALLVEC_CAPACITIES {
        for len in [n.saturating_sub(1), n, n + 1, 3 * n + 2] {
            let xs: Vec<u32> = (0..len).map(|_| rand::Rng::gen(&mut rng)).collect();
            let got = match n {
                1 => xs.iter().copied().collect::<SmallVec<u32, 1>>().to_vec(),
                2 => xs.iter().copied().collect::<SmallVec<u32, 2>>().to_vec(),
                4 => xs.iter().copied().collect::<SmallVec<u32, 4>>().to_vec(),
                8 => xs.iter().copied().collect::<SmallVec<u32, 8>>().to_vec(),
                _ => xs.iter().copied().collect::<SmallVec<u32, 16>>().to_vec(),
            };
            if got != xs {
                return Err(format!("SmallVec({n}) with {len} items iterated {got:?}"));
            }
        }
        let rows: Vec<Vec<i64>> = (0..3 * n as i64 + 2).map(|i| vec![i % 3]).collect();
        let rel = Relation::from_int_rows("R", &["x"], &rows);
        let keys = vec!["x".to_string()];
        let a = build_trie(&rel, &keys, DictKind::Hash, LeafKind::SmallVec(n)).unwrap();
        let b = build_trie(&rel, &keys, DictKind::Hash, LeafKind::OffsetVec).unwrap();
        let (mut da, mut db): (Vec<_>, Vec<_>) = (a.dump().lines().map(String::from).collect(), b.dump().lines().map(String::from).collect());
        da.sort();
        db.sort();
        if da != db {
            return Err(format!("SmallVec({n}) trie differs from OffsetVec trie"));
        }
    }

    // Sorted and hash levels over the same keys.
    let rows: Vec<Vec<i64>> = (0..AC4_KEYS).map(|i| vec![3 * i, i]).collect();
    let keys = vec!["x".to_string()];
    let rel = Relation::from_int_rows("R", &["x", "y"], &rows).with_sorted_by(keys.clone()).unwrap();
    let hash = build_trie(&rel, &keys, DictKind::Hash, LeafKind::OffsetVec).unwrap();
    let sorted = build_trie(&rel, &keys, DictKind::Sorted, LeafKind::Range).unwrap();
    let bound = (AC4_KEYS as f64).log2().ceil() as u64 + 1;
    let mut worst = 0;
    for _ in 0..AC4_PROBES {
        let key = unijoin::storage::Value::Int(rand::Rng::gen_range(&mut rng, -5..3 * AC4_KEYS + 5));
        let mut c = 0;
        let s = sorted.get(0, &key, &mut c);
        let h = hash.get(0, &key, &mut 0);
        worst = worst.max(c);
        let offs = |t: &unijoin::trie::Trie, r: Option<NodeRef>| {
            r.map(|r| match r {
                NodeRef::Leaf(l) => t.offsets(l).unwrap().collect::<Vec<_>>(),
                NodeRef::Inner(_) => unreachable!(),
            })
        };
        if offs(&sorted, s) != offs(&hash, h) {
            return Err(format!("lookup of {key:?} disagrees"));
        }
        if c > bound {
            return Err(format!("lookup of {key:?} took {c} comparisons, bound {bound}"));
        }
    }

    // Ranges over sorted random relations cover 0..size-1 in key order.
    for trial in 0..50 {
        let mut rows: Vec<Vec<i64>> =
            (0..rand::Rng::gen_range(&mut rng, 0..300)).map(|_| vec![rand::Rng::gen_range(&mut rng, 0..20), rand::Rng::gen_range(&mut rng, 0..5)]).collect();
        rows.sort();
        let k2 = vec!["x".to_string(), "y".to_string()];
        let rel = Relation::from_int_rows("R", &["x", "y"], &rows).with_sorted_by(k2.clone()).unwrap();
        for levels in [&k2[..1], &k2[..]] {
            let t = build_trie(&rel, levels, DictKind::Sorted, LeafKind::Range).unwrap();
            let mut all = Vec::new();
            for (_, leaf) in t.paths() {
                let offs: Vec<u32> = t.offsets(leaf).unwrap().collect();
                if offs.len() as u64 != t.multiplicity(leaf) {
                    return Err(format!("trial {trial}: range length mismatch"));
                }
                all.extend(offs);
            }
            if all != (0..rel.len() as u32).collect::<Vec<_>>() {
                return Err(format!("trial {trial}: ranges do not reassemble 0..{}", rel.len()));
            }
        }
    }
    Ok(format!(
        "SmallVec N in {SMALLVEC_CAPACITIES:?} at N-1, N, N+1; {AC4_PROBES} probes over {AC4_KEYS} keys agree, worst {worst} comparisons (bound {bound}); ranges reassemble"
    ))
}

fn ac5() -> Outcome {
    let mut rng = seeded_rng(0xAC5);
    let mut checked = 0;
    for cq in corpus() {
        let pq = cq.parse();
        if pq.agg.kind == unijoin::query::AggKind::FullTuples {
            continue;
        }
        let tree = cq.tree();
        for i in 0..AC5_INSTANCES {
            let cat = cq.instance(&mut rng, 40, 2 + (i % 9) as i64);
            for plan in PlanKind::ALL {
                let s = |o5| Strategy { plan, policy: StructurePolicy::hash(), opts: Opts::all().with(5, o5) };
                let (on, _) = run(&pq.query, &pq.agg, &cat, tree.as_ref(), &s(true)).map_err(|e| e.to_string())?;
                let (off, _) = run(&pq.query, &pq.agg, &cat, tree.as_ref(), &s(false)).map_err(|e| e.to_string())?;
                if on != off {
                    return Err(format!("{} instance {i} {plan}: {on} with O5, {off} without", cq.name));
                }
                checked += 1;
            }
        }
    }

    // One R row for x = 1 and k matching S rows: min(a), min(b).
    let pq = parse_query("Q(MIN(a,b)) :- R(x,a), S(x,b), T(x)").unwrap();
    let s_rows: Vec<Vec<i64>> = (0..AC5_FIG_K).map(|j| vec![1, 100 - j]).collect();
    let cat: Catalog = [
        Relation::from_int_rows("R", &["x", "a"], &[vec![1, 7]]),
        Relation::from_int_rows("S", &["x", "b"], &s_rows),
        Relation::from_int_rows("T", &["x"], &[vec![1]]),
    ]
    .into_iter()
    .collect();
    let s = |o5| Strategy { plan: PlanKind::FreeJoin, policy: StructurePolicy::hash(), opts: Opts::all().with(5, o5) };
    let (on, son) = run(&pq.query, &pq.agg, &cat, None, &s(true)).map_err(|e| e.to_string())?;
    let (off, soff) = run(&pq.query, &pq.agg, &cat, None, &s(false)).map_err(|e| e.to_string())?;
    let expect = ResultBag::Min { vars: vec!["a".into(), "b".into()], values: vec![7, 100 - AC5_FIG_K + 1], empty: false };
    if on != expect || off != expect {
        return Err(format!("min aggregate: {on} / {off}, expected {expect}"));
    }
    let msg = format!(
        "{checked} aggregate runs identical; k={AC5_FIG_K}: {} min ops factorized vs {} unfactorized",
        son.min_operations, soff.min_operations
    );
    if son.min_operations < soff.min_operations {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac6() -> Outcome {
    let cq = corpus().into_iter().find(|c| c.name == "bushy4").expect("bushy query in corpus");
    let pq = cq.parse();
    let tree = cq.tree();
    let mut rng = seeded_rng(0xAC6);
    let (mut sorts, mut nonempty) = (0, 0);
    for i in 0..50 {
        let base = cq.instance(&mut rng, 60, 6);
        // Every base relation arrives sorted on its attributes in schema order.
        let cat: Catalog = base
            .names()
            .map(|n| {
                let rel = base.get(n).unwrap();
                rel.sorted_copy(rel.attrs()).unwrap()
            })
            .collect();
        let oracle = nested_loop(&pq.query, &cat, &pq.agg).map_err(|e| e.to_string())?;
        nonempty += usize::from(!oracle.is_empty());
        let hybrid = Strategy { plan: PlanKind::FreeJoin, policy: StructurePolicy::hybrid(), opts: Opts::all() };
        let (got, st) = run(&pq.query, &pq.agg, &cat, tree.as_ref(), &hybrid).map_err(|e| e.to_string())?;
        if let Some(d) = got.first_difference(&oracle) {
            return Err(format!("instance {i}: {d}"));
        }
        if st.intermediate_sorts != 0 {
            return Err(format!("instance {i}: hybrid sorted {} intermediates", st.intermediate_sorts));
        }
        let sorted = Strategy { policy: StructurePolicy::sorted(), ..hybrid };
        sorts += run(&pq.query, &pq.agg, &cat, tree.as_ref(), &sorted).map_err(|e| e.to_string())?.1.intermediate_sorts;
    }
    Ok(format!(
        "50 bushy instances ({nonempty} non-empty) match the oracle with 0 intermediate sorts; the sorted policy sorted {sorts}"
    ))
}

fn ac7() -> Outcome {
    let mut rng = seeded_rng(0xAC7);
    let (rels, text) = gen_job_like(&mut rng, AC7_FACT_ROWS);
    let cat: Catalog = rels.into_iter().collect();
    let pq = parse_query(&text).unwrap();
    let o12 = Opts::none().with(1, true).with(2, true);
    let mut means = Vec::new();
    let mut answers = Vec::new();
    for opts in [Opts::none(), o12] {
        let s = Strategy { plan: PlanKind::FreeJoin, policy: StructurePolicy::hash(), opts };
        // One untimed warm-up run.
        run(&pq.query, &pq.agg, &cat, None, &s).map_err(|e| e.to_string())?;
        let mut total = 0.0;
        for _ in 0..AC7_RUNS {
            let (r, st) = run(&pq.query, &pq.agg, &cat, None, &s).map_err(|e| e.to_string())?;
            total += st.build_ms;
            answers.push(r);
        }
        means.push(total / AC7_RUNS as f64);
    }
    if answers.windows(2).any(|w| w[0] != w[1]) {
        return Err("O0 and O1+O2 disagree".into());
    }
    let (o0, fast) = (means[0], means[1]);
    let msg = format!("mean build over {AC7_RUNS} runs: O0 {o0:.2} ms, O1+O2 {fast:.2} ms ({:.0}% faster)", 100.0 * (1.0 - fast / o0));
    if fast <= (1.0 - AC7_MARGIN) * o0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}
