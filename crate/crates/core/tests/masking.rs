mod common;

use graphmask_core::linearize::Slot;
use graphmask_core::mask::entry_seed;
use graphmask_core::synthetic::{random_graph, synthetic_dataset, Shape};
use graphmask_core::{
    assign_levels, build_corpus, build_graph, linearize, mask, parse_linearized, reconstruct,
    LinearizeOptions, MaskPolicy, Strategy, Triple,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONE_PER_GRAPH: MaskPolicy = MaskPolicy {
    per_level: false,
    min_triples: 2,
};

const STRATEGIES: [Strategy; 3] = [Strategy::Triple, Strategy::Relation, Strategy::TripleRelation];

#[test]
fn golden_rows_byte_exact() {
    let lg = assign_levels(&common::baths());
    for ((name, input, target), seed) in common::GOLDEN_ROWS.iter().zip(common::GOLDEN_SEEDS) {
        let strategy: Strategy = name.parse().unwrap();
        let ex = mask(&lg, strategy, &ONE_PER_GRAPH, &LinearizeOptions::default(), seed).unwrap();
        assert_eq!(ex.input_text, *input, "{name}");
        assert_eq!(ex.target_text, *target, "{name}");
        assert_eq!(reconstruct(&ex).unwrap(), common::BATHS_LINEARIZED);
    }
}

/// Triples masked by `<X>` and `<Y>`, located through the parsed input.
fn masked_sets(plain: &str, input: &str) -> (Vec<Triple>, Vec<Triple>) {
    let full = parse_linearized(plain).unwrap().triples().unwrap();
    let parsed = parse_linearized(input).unwrap();
    let x = parsed.masked_triples().into_iter().map(|i| full[i].clone()).collect();
    let y = parsed.masked_relations().into_iter().map(|i| full[i].clone()).collect();
    (x, y)
}

#[test]
fn lossless_and_disjoint_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for i in 0..500 {
        let triples = rng.random_range(2..=12);
        let g = random_graph(&mut rng, Shape::ALL[i % 3], triples + 1, triples);
        if g.len() < 2 {
            continue;
        }
        let lg = assign_levels(&g);
        for markers in [true, false] {
            let opts = LinearizeOptions {
                include_level_markers: markers,
                ..LinearizeOptions::default()
            };
            let plain = linearize(&lg, &opts);
            for per_level in [true, false] {
                let policy = MaskPolicy {
                    per_level,
                    min_triples: 2,
                };
                for s in STRATEGIES {
                    let ex = mask(&lg, s, &policy, &opts, rng.random()).unwrap();
                    assert_eq!(reconstruct(&ex).unwrap(), plain);
                    assert!(ex.target_text.ends_with("<Z>"));
                    assert_eq!(ex.target_text.matches("<Z>").count(), 1);
                    assert_eq!(
                        ex.input_text.matches("[<X>").count(),
                        ex.target_text.matches("<X> [").count()
                    );
                    assert_eq!(
                        ex.input_text.matches("<Y>").count(),
                        ex.target_text.matches("<Y> P | ").count()
                    );
                    if s == Strategy::TripleRelation {
                        let (x, y) = masked_sets(&plain, &ex.input_text);
                        assert_eq!(x.len(), 1);
                        let xr: Vec<_> = x.iter().collect();
                        let yr: Vec<_> = y.iter().collect();
                        assert!(common::disjoint(&xr, &yr));
                        let eligible = g
                            .triples()
                            .iter()
                            .filter(|t| !x.contains(t) && common::disjoint(&xr, &[*t]))
                            .count();
                        assert_eq!(y.is_empty(), eligible == 0);
                    }
                }
            }
        }
    }
}

#[test]
fn per_level_masks_one_element_per_level() {
    let lg = assign_levels(&common::baths());
    let opts = LinearizeOptions::default();
    for seed in 0..50 {
        let ex = mask(&lg, Strategy::Triple, &MaskPolicy::default(), &opts, seed).unwrap();
        let masked_levels: Vec<u32> = parse_linearized(&ex.input_text)
            .unwrap()
            .groups
            .iter()
            .filter(|g| g.slot == Slot::Masked)
            .map(|g| g.level.unwrap())
            .collect();
        assert_eq!(masked_levels, [1, 2, 3]);

        let ex = mask(&lg, Strategy::Relation, &MaskPolicy::default(), &opts, seed).unwrap();
        assert_eq!(ex.target_text.matches("<Y>").count(), 3);
    }
}

#[test]
fn uniform_choice_within_a_level() {
    let t = |h: &str, r: &str, d: &str| Triple::new(h, r, d).unwrap();
    let g = build_graph(vec![t("R", "a", "A"), t("R", "b", "B"), t("R", "c", "C")]).unwrap();
    let lg = assign_levels(&g);
    let mut counts = [0usize; 3];
    let runs = 10_000;
    for seed in 0..runs {
        let ex = mask(&lg, Strategy::Relation, &MaskPolicy::default(), &LinearizeOptions::default(), seed).unwrap();
        let k = match ex.target_text.as_str() {
            "<Y> P | a <Z>" => 0,
            "<Y> P | b <Z>" => 1,
            "<Y> P | c <Z>" => 2,
            other => panic!("unexpected target {other}"),
        };
        counts[k] += 1;
    }
    for c in counts {
        let freq = c as f64 / runs as f64;
        assert!((freq - 1.0 / 3.0).abs() <= 0.02, "{counts:?}");
    }
}

#[test]
fn corpus_is_deterministic_across_thread_counts() {
    let d = synthetic_dataset(300, 7, 11);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut buf = Vec::new();
            let m = build_corpus(
                &d,
                Strategy::TripleRelation,
                &MaskPolicy::default(),
                &LinearizeOptions::default(),
                42,
                &mut buf,
            )
            .unwrap();
            (buf, m)
        })
    };
    let (a, ma) = run(1);
    let (b, mb) = run(4);
    assert_eq!(a, b);
    assert_eq!(ma, mb);
    assert_eq!(ma.emitted + ma.skipped, 300);
    let singletons = d.entries().iter().filter(|e| e.graph.len() < 2).count();
    assert_eq!(ma.skipped, singletons);

    let text = String::from_utf8(a).unwrap();
    let line: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let id = line["id"].as_str().unwrap();
    assert_eq!(line["seed"].as_str().unwrap(), entry_seed(42, id).to_string());
    assert_eq!(line["strategy"], "triple_relation");
}
