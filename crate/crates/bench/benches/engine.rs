use ahp_core::{find_matches, parse_strategy, run, AhpGraph, IdGen, PortGraph, Record, Rule};
use ahp_gen::{GenParams, ModelGen, RuleParams};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::collections::BTreeMap;
use std::hint::black_box;

fn medium_host(seed: u64, max_elements: usize) -> (AhpGraph, Rule) {
    let mut gen = ModelGen::new(seed);
    let host = gen.ahp(&GenParams {
        max_elements,
        max_depth: 3,
        ladder_prob: 0.5,
        edge_prob: 0.4,
    });
    let rule = gen.applicable_rule(&host, &RuleParams::default());
    (host, rule)
}

fn bench_matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_matches");
    for (seed, size) in [(7u64, 20usize), (8, 60), (9, 120)] {
        let (host, rule) = medium_host(seed, size);
        group.bench_function(
            format!("budget_{size}_elements_{}", host.element_count()),
            |b| b.iter(|| black_box(find_matches(&rule, &host)).len()),
        );
    }
    group.finish();
}

fn bench_flatten(c: &mut Criterion) {
    let mut group = c.benchmark_group("flatten");
    for (seed, size) in [(11u64, 30usize), (0, 90)] {
        let mut gen = ModelGen::new(seed);
        let g = gen.ahp(&GenParams {
            max_elements: size,
            max_depth: 4,
            ladder_prob: 0.7,
            edge_prob: 0.4,
        });
        group.bench_function(
            format!(
                "budget_{size}_elements_{}_level_{}",
                g.element_count(),
                g.level()
            ),
            |b| b.iter(|| black_box(g.flatten().unwrap()).node_count()),
        );
    }
    group.finish();
}

fn bench_rewrite(c: &mut Criterion) {
    let (host, rule) = medium_host(23, 60);
    let matches = find_matches(&rule, &host);
    c.bench_function("apply", |b| {
        b.iter_batched(
            || (host.clone(), matches[0].clone()),
            |(h, m)| black_box(ahp_core::apply(&rule, &h, &m).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

/// A chain of beta redexes, as in the lambda model.
fn redex_chain(n: usize) -> (AhpGraph, BTreeMap<String, Rule>) {
    let mut ids = IdGen::new();
    let mut g = PortGraph::new();
    let root = g.add_node(&mut ids, Record::new("root"));
    let mut hook = g.add_port(&mut ids, root, Record::new("t"));
    for _ in 0..n {
        let app = g.add_node(&mut ids, Record::new("app"));
        let out = g.add_port(&mut ids, app, Record::new("out"));
        let fun = g.add_port(&mut ids, app, Record::new("fun"));
        let arg = g.add_port(&mut ids, app, Record::new("arg"));
        let lam = g.add_node(&mut ids, Record::new("lam"));
        let l_out = g.add_port(&mut ids, lam, Record::new("out"));
        let l_body = g.add_port(&mut ids, lam, Record::new("body"));
        let l_var = g.add_port(&mut ids, lam, Record::new("var"));
        g.add_edge(&mut ids, hook, out, Record::new("wire"));
        g.add_edge(&mut ids, fun, l_out, Record::new("wire"));
        g.add_edge(&mut ids, l_body, l_var, Record::new("wire"));
        hook = arg;
    }
    let answer = g.add_node(&mut ids, Record::new("w"));
    let out = g.add_port(&mut ids, answer, Record::new("out"));
    g.add_edge(&mut ids, hook, out, Record::new("wire"));

    let mut lhs = PortGraph::new();
    let app = lhs.add_node(&mut ids, Record::new("app"));
    let a_out = lhs.add_port(&mut ids, app, Record::new("out"));
    let a_fun = lhs.add_port(&mut ids, app, Record::new("fun"));
    let a_arg = lhs.add_port(&mut ids, app, Record::new("arg"));
    let lam = lhs.add_node(&mut ids, Record::new("lam"));
    let l_out = lhs.add_port(&mut ids, lam, Record::new("out"));
    let l_body = lhs.add_port(&mut ids, lam, Record::new("body"));
    let l_var = lhs.add_port(&mut ids, lam, Record::new("var"));
    lhs.add_edge(&mut ids, a_fun, l_out, Record::new("wire"));
    let beta = Rule {
        name: "beta".into(),
        lhs: AhpGraph::flat(lhs),
        rhs: AhpGraph::new(),
        arrow: vec![
            ahp_core::ArrowPort::wire(a_out, l_body),
            ahp_core::ArrowPort::wire(a_arg, l_var),
        ],
        condition: None,
    };
    let mut rules = BTreeMap::new();
    rules.insert("beta".to_string(), beta);
    (AhpGraph::flat(g), rules)
}

fn bench_strategy(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_normalize");
    for n in [4usize, 12] {
        let (term, rules) = redex_chain(n);
        let strategy = parse_strategy("repeat(one(beta))").unwrap();
        group.bench_function(format!("redexes_{n}"), |b| {
            b.iter(|| {
                let d = run(&strategy, &term, &rules, 0, 10_000).unwrap();
                assert_eq!(d.steps.len(), n);
                black_box(d.final_graph.top().node_count())
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_matching,
    bench_flatten,
    bench_rewrite,
    bench_strategy
);
criterion_main!(benches);
