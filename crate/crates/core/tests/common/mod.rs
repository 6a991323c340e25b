#![allow(dead_code)]

use nilwalk::graph::{EdgePair, QuotientGraph, TransitionKernel};
use nilwalk::liegroup::{AlgebraSpec, BasisIndex, GradedAlgebra, GroupElement, StructureConstant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sc(a: [usize; 2], b: [usize; 2], out: [usize; 2], c: f64) -> StructureConstant {
    StructureConstant {
        a: BasisIndex::new(a[0], a[1]),
        b: BasisIndex::new(b[0], b[1]),
        out: BasisIndex::new(out[0], out[1]),
        c,
    }
}

/// Step-4 filiform algebra `[X1, X2] = X3, [X1, X3] = X4, [X1, X4] = X5`
/// plus `[X2, X3] = leak·X5`, which lies two layers above the grading.
pub fn filiform4(leak: f64) -> AlgebraSpec {
    let mut brackets = vec![
        sc([1, 1], [1, 2], [2, 1], 1.0),
        sc([1, 1], [2, 1], [3, 1], 1.0),
        sc([1, 1], [3, 1], [4, 1], 1.0),
    ];
    if leak != 0.0 {
        brackets.push(sc([1, 2], [2, 1], [4, 1], leak));
    }
    AlgebraSpec { dims: vec![2, 1, 1, 1], brackets }
}

/// Free step-3 algebra on two generators with a layer-3 leak in `[X1, X2]`.
pub fn leaky_step3() -> AlgebraSpec {
    AlgebraSpec {
        dims: vec![2, 1, 2],
        brackets: vec![
            sc([1, 1], [1, 2], [2, 1], 1.0),
            sc([1, 1], [1, 2], [3, 1], 0.5),
            sc([1, 1], [2, 1], [3, 1], 1.0),
            sc([1, 2], [2, 1], [3, 2], 1.0),
        ],
    }
}

pub fn random_element(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> GroupElement {
    GroupElement::new((0..dim).map(|_| rng.random_range(-scale..=scale)).collect())
}

/// A random connected quotient with `nv` vertices over `alg`: a spanning
/// cycle plus `extra` random pairs (loops allowed), small integer layer-1
/// voltages, random layer-2+ voltages, and a random positive kernel.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    alg: &GradedAlgebra,
    nv: usize,
    extra: usize,
) -> (QuotientGraph, TransitionKernel) {
    let names = (0..nv).map(|i| format!("v{i}")).collect();
    let d1 = alg.layer_range(1).len();
    let voltage = |rng: &mut ChaCha8Rng| {
        let mut z = vec![0.0; alg.dim()];
        for v in z.iter_mut().take(d1) {
            *v = rng.random_range(-2i32..=2) as f64;
        }
        for v in z.iter_mut().skip(d1) {
            *v = rng.random_range(-1.0..1.0);
        }
        GroupElement::new(z)
    };
    let mut pairs = Vec::new();
    for i in 0..nv {
        if nv > 1 {
            pairs.push(EdgePair { origin: i, terminus: (i + 1) % nv, voltage: voltage(rng) });
        }
    }
    for _ in 0..extra.max(if nv == 1 { 2 } else { 0 }) {
        let o = rng.random_range(0..nv);
        let t = rng.random_range(0..nv);
        pairs.push(EdgePair { origin: o, terminus: t, voltage: voltage(rng) });
    }
    let graph = QuotientGraph::new(alg.clone(), names, pairs).unwrap();
    let w: Vec<f64> = graph.edges().map(|_| rng.random_range(0.05..1.0)).collect();
    let mut totals = vec![0.0; nv];
    for e in graph.edges() {
        totals[graph.origin(e)] += w[e];
    }
    let p = graph.edges().map(|e| w[e] / totals[graph.origin(e)]).collect();
    (graph, TransitionKernel::new(p))
}

/// Random admissible hexagonal parameters, each probability at least 0.05.
pub fn random_hex(rng: &mut ChaCha8Rng) -> nilwalk::graph::HexParams {
    let mut triple = || {
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        let a = w[0] / s;
        let b = w[1] / s;
        (a, b, 1.0 - a - b)
    };
    let (a, b, c) = triple();
    let (a2, b2, c2) = triple();
    nilwalk::graph::HexParams::new(a, b, c, a2, b2, c2).unwrap()
}
