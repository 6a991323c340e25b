//! Finite quotient graphs with group-valued voltages, transition kernels on
//! them, invariant measures and first homology.
//!
//! The infinite covering graph is never built. A directed edge `e` with
//! voltage `σ` lifts from `γ·o(e)` to `γ·σ·t(e)`. Edges are stored as
//! involution pairs: directed edge `2k` is the stored orientation of pair
//! `k` and `2k + 1` is its reverse, so `ē = e ^ 1`.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroup::{AlgebraSource, GradedAlgebra, GroupElement, Product};

/// Row-sum and stationarity tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Index of a directed edge.
pub type EdgeId = usize;

#[inline]
pub fn reverse(e: EdgeId) -> EdgeId {
    e ^ 1
}

#[inline]
pub fn pair_of(e: EdgeId) -> usize {
    e >> 1
}

#[inline]
pub fn is_forward(e: EdgeId) -> bool {
    e & 1 == 0
}

/// One stored orientation of an edge pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePair {
    pub origin: usize,
    pub terminus: usize,
    pub voltage: GroupElement,
}

/// Quotient graph `X0 = Γ\X` together with voltages describing the cover.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    algebra: GradedAlgebra,
    names: Vec<String>,
    pairs: Vec<EdgePair>,
    voltages: Vec<GroupElement>,
    out_edges: Vec<Vec<EdgeId>>,
}

impl QuotientGraph {
    pub fn new(algebra: GradedAlgebra, names: Vec<String>, pairs: Vec<EdgePair>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut seen = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if let Some(j) = seen.insert(n.as_str(), i) {
                return Err(Error::InvalidGraph(format!(
                    "vertex name '{n}' used twice (indices {j} and {i})"
                )));
            }
        }
        let nv = names.len();
        let mut voltages = Vec::with_capacity(2 * pairs.len());
        let mut out_edges = vec![Vec::new(); nv];
        for (k, pair) in pairs.iter().enumerate() {
            if pair.origin >= nv || pair.terminus >= nv {
                return Err(Error::InvalidGraph(format!(
                    "edge pair {k} references a vertex outside 0..{nv}"
                )));
            }
            if pair.voltage.len() != algebra.dim() {
                return Err(Error::InvalidGraph(format!(
                    "edge pair {k} has a voltage of length {}, algebra dimension is {}",
                    pair.voltage.len(),
                    algebra.dim()
                )));
            }
            if pair.voltage.coords().iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge pair {k} has a non-finite voltage")));
            }
            voltages.push(pair.voltage.clone());
            voltages.push(algebra.inverse(&pair.voltage));
            out_edges[pair.origin].push(2 * k);
            out_edges[pair.terminus].push(2 * k + 1);
        }
        Ok(Self {
            algebra,
            names,
            pairs,
            voltages,
            out_edges,
        })
    }

    pub fn algebra(&self) -> &GradedAlgebra {
        &self.algebra
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Number of directed edges, `2 · num_pairs`.
    pub fn num_edges(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn pairs(&self) -> &[EdgePair] {
        &self.pairs
    }

    pub fn origin(&self, e: EdgeId) -> usize {
        let p = &self.pairs[pair_of(e)];
        if is_forward(e) {
            p.origin
        } else {
            p.terminus
        }
    }

    pub fn terminus(&self, e: EdgeId) -> usize {
        self.origin(reverse(e))
    }

    pub fn voltage(&self, e: EdgeId) -> &GroupElement {
        &self.voltages[e]
    }

    /// Directed edges leaving `x` (the set `E_x`).
    pub fn out_edges(&self, x: usize) -> &[EdgeId] {
        &self.out_edges[x]
    }

    pub fn edges(&self) -> std::ops::Range<EdgeId> {
        0..self.num_edges()
    }

    /// Connected components of the underlying undirected graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &e in self.out_edges(x) {
                    let y = self.terminus(e);
                    if comp[y] == usize::MAX {
                        comp[y] = id;
                        members.push(y);
                        queue.push_back(y);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Serializable description of this graph with the given kernel.
    pub fn to_spec(&self, kernel: &TransitionKernel) -> GraphSpec {
        GraphSpec {
            algebra: AlgebraSource::Explicit(self.algebra.spec().clone()),
            vertices: self.names.iter().cloned().map(VertexRef::Name).collect(),
            edge_pairs: self
                .pairs
                .iter()
                .enumerate()
                .map(|(k, p)| EdgePairSpec {
                    o: VertexRef::Name(self.names[p.origin].clone()),
                    t: VertexRef::Name(self.names[p.terminus].clone()),
                    voltage: p.voltage.coords().to_vec(),
                    p: kernel.p(2 * k),
                    p_rev: kernel.p(2 * k + 1),
                })
                .collect(),
        }
    }
}

/// Transition probabilities indexed by directed edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionKernel {
    p: Vec<f64>,
}

impl TransitionKernel {
    pub fn new(p: Vec<f64>) -> Self {
        Self { p }
    }

    /// Build from `(p(e), p(ē))` per stored pair.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            p: pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn p(&self, e: EdgeId) -> f64 {
        self.p[e]
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Whether `p(e) m(o(e)) = p(ē) m(t(e))` for every edge, within `tol`.
    pub fn is_symmetric(&self, graph: &QuotientGraph, m: &InvariantMeasure, tol: f64) -> bool {
        graph
            .edges()
            .all(|e| (m.edge_weight(graph, self, e) - m.edge_weight(graph, self, reverse(e))).abs() <= tol)
    }
}

/// Outcome of one structural check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        if self.all_pass {
            return "all checks passed".into();
        }
        self.failures()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn into_result(self) -> Result<()> {
        if self.all_pass {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

/// Check involution/voltage consistency, stochasticity, connectivity and
/// irreducibility. Nothing is repaired.
pub fn validate(graph: &QuotientGraph, kernel: &TransitionKernel) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, problems: Vec<String>, ok_detail: &str| {
        checks.push(CheckResult {
            name: name.to_string(),
            passed: problems.is_empty(),
            detail: if problems.is_empty() {
                ok_detail.to_string()
            } else {
                problems.join("; ")
            },
        });
    };

    let alg = graph.algebra();
    let mut inv = Vec::new();
    for e in graph.edges() {
        let r = reverse(e);
        if r == e || reverse(r) != e {
            inv.push(format!("edge {e} has no distinct reverse"));
        }
        if graph.origin(r) != graph.terminus(e) || graph.terminus(r) != graph.origin(e) {
            inv.push(format!("edge {e}: endpoints of reverse do not match"));
        }
        let prod = alg.mul(graph.voltage(r), graph.voltage(e), Product::Dot);
        let err = prod.coords().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err > 1e-12 {
            inv.push(format!("edge {e}: voltage of reverse is not the inverse (error {err:.3e})"));
        }
    }
    push("involution", inv, "fixed-point-free involution with inverse voltages");

    let size_ok = kernel.len() == graph.num_edges();
    push(
        "kernel_size",
        if size_ok {
            vec![]
        } else {
            vec![format!(
                "kernel has {} entries, graph has {} directed edges",
                kernel.len(),
                graph.num_edges()
            )]
        },
        "one probability per directed edge",
    );
    if !size_ok {
        return ValidationReport {
            all_pass: false,
            checks,
        };
    }

    let range: Vec<String> = graph
        .edges()
        .filter(|&e| !(kernel.p(e).is_finite() && (0.0..=1.0).contains(&kernel.p(e))))
        .map(|e| format!("p({e}) = {} outside [0, 1]", kernel.p(e)))
        .collect();
    push("probability_range", range, "all probabilities in [0, 1]");

    let rows: Vec<String> = (0..graph.num_vertices())
        .filter_map(|x| {
            let s: f64 = graph.out_edges(x).iter().map(|&e| kernel.p(e)).sum();
            ((s - 1.0).abs() > STOCHASTIC_TOL)
                .then(|| format!("vertex '{}' has outgoing mass {s}", graph.name(x)))
        })
        .collect();
    push("stochasticity", rows, "every row sums to 1");

    let pos: Vec<String> = (0..graph.num_pairs())
        .filter(|&k| kernel.p(2 * k) + kernel.p(2 * k + 1) <= 0.0)
        .map(|k| format!("edge pair {k} has p(e) + p(ē) = 0"))
        .collect();
    push("pair_positivity", pos, "p(e) + p(ē) > 0 for every edge");

    let comps = graph.components();
    push(
        "connectivity",
        if comps.len() == 1 {
            vec![]
        } else {
            vec![format!("{} connected components: {:?}", comps.len(), named(graph, &comps))]
        },
        "connected",
    );

    let sccs = strongly_connected_components(graph, kernel);
    push(
        "irreducibility",
        if sccs.len() == 1 {
            vec![]
        } else {
            vec![format!(
                "{} strongly connected components: {:?}",
                sccs.len(),
                named(graph, &sccs)
            )]
        },
        "positive-probability subgraph is strongly connected",
    );

    let all_pass = checks.iter().all(|c| c.passed);
    ValidationReport { checks, all_pass }
}

fn named(graph: &QuotientGraph, comps: &[Vec<usize>]) -> Vec<Vec<String>> {
    comps
        .iter()
        .map(|c| c.iter().map(|&x| graph.name(x).to_string()).collect())
        .collect()
}

/// Strongly connected components of the subgraph of edges with `p(e) > 0`,
/// each sorted by vertex index.
pub fn strongly_connected_components(graph: &QuotientGraph, kernel: &TransitionKernel) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(graph.num_vertices(), graph.num_edges());
    let nodes: Vec<_> = (0..graph.num_vertices()).map(|_| g.add_node(())).collect();
    for e in graph.edges() {
        if kernel.p(e) > 0.0 {
            g.add_edge(nodes[graph.origin(e)], nodes[graph.terminus(e)], ());
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    comps
}

fn ensure_irreducible(graph: &QuotientGraph, kernel: &TransitionKernel) -> Result<()> {
    if kernel.len() != graph.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_edges(),
            got: kernel.len(),
        });
    }
    let sccs = strongly_connected_components(graph, kernel);
    if sccs.len() != 1 {
        return Err(Error::NotIrreducible {
            components: named(graph, &sccs),
        });
    }
    Ok(())
}

/// Dense transition matrix `P[x][y] = Σ_{e: x→y} p(e)`.
pub fn transition_matrix(graph: &QuotientGraph, kernel: &TransitionKernel) -> DMatrix<f64> {
    let n = graph.num_vertices();
    let mut p = DMatrix::zeros(n, n);
    for e in graph.edges() {
        p[(graph.origin(e), graph.terminus(e))] += kernel.p(e);
    }
    p
}

/// Stationary probability measure `m` on the quotient vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InvariantMeasure {
    m: Vec<f64>,
}

impl InvariantMeasure {
    pub fn new(m: Vec<f64>) -> Self {
        Self { m }
    }

    pub fn get(&self, x: usize) -> f64 {
        self.m[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.m
    }

    /// `m̃(e) = p(e) m(o(e))`.
    pub fn edge_weight(&self, graph: &QuotientGraph, kernel: &TransitionKernel, e: EdgeId) -> f64 {
        kernel.p(e) * self.m[graph.origin(e)]
    }

    /// `max_x |m(x) − Σ_{e ∈ E_x} p(ē) m(t(e))|`.
    pub fn stationarity_residual(&self, graph: &QuotientGraph, kernel: &TransitionKernel) -> f64 {
        (0..graph.num_vertices())
            .map(|x| {
                let inflow: f64 = graph
                    .out_edges(x)
                    .iter()
                    .map(|&e| kernel.p(reverse(e)) * self.m[graph.terminus(e)])
                    .sum();
                (self.m[x] - inflow).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Solve `(I − Pᵀ) m = 0`, `Σ m = 1` by a dense LU with the last
/// stationarity row replaced by the normalization.
pub fn invariant_measure(graph: &QuotientGraph, kernel: &TransitionKernel) -> Result<InvariantMeasure> {
    ensure_irreducible(graph, kernel)?;
    let n = graph.num_vertices();
    let p = transition_matrix(graph, kernel);
    let mut a = DMatrix::<f64>::identity(n, n) - p.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let m = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("stationarity system".into()))?;
    if m.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Singular(format!("non-positive stationary solution {:?}", m.as_slice())));
    }
    Ok(InvariantMeasure::new(m.iter().copied().collect()))
}

/// Decomposition `p = p0 + q` into the `m`-symmetric part and the remainder,
/// with the interpolating family `p_ε = p0 + ε q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFamily {
    pub p0: TransitionKernel,
    pub q: Vec<f64>,
}

impl KernelFamily {
    pub fn at(&self, eps: f64) -> Result<TransitionKernel> {
        interpolate(&self.p0, &self.q, eps)
    }
}

/// `p0(e) = ½(p(e) + m(t(e)) p(ē) / m(o(e)))`, `q = ½(p(e) − m(t(e)) p(ē) / m(o(e)))`.
pub fn symmetrize(graph: &QuotientGraph, kernel: &TransitionKernel, m: &InvariantMeasure) -> Result<KernelFamily> {
    if m.values().len() != graph.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_vertices(),
            got: m.values().len(),
        });
    }
    let residual = m.stationarity_residual(graph, kernel);
    let mass: f64 = m.values().iter().sum();
    if residual > 1e-10 || (mass - 1.0).abs() > 1e-10 {
        return Err(Error::MeasureMismatch {
            residual: residual.max((mass - 1.0).abs()),
        });
    }
    let mut p0 = Vec::with_capacity(graph.num_edges());
    let mut q = Vec::with_capacity(graph.num_edges());
    for e in graph.edges() {
        let back = m.get(graph.terminus(e)) * kernel.p(reverse(e)) / m.get(graph.origin(e));
        p0.push(0.5 * (kernel.p(e) + back));
        q.push(0.5 * (kernel.p(e) - back));
    }
    Ok(KernelFamily {
        p0: TransitionKernel::new(p0),
        q,
    })
}

/// `p_ε = p0 + ε q` for `ε ∈ [0, 1]`.
pub fn interpolate(p0: &TransitionKernel, q: &[f64], eps: f64) -> Result<TransitionKernel> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("interpolation parameter {eps} outside [0, 1]")));
    }
    if p0.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p0.len(),
            got: q.len(),
        });
    }
    Ok(TransitionKernel::new(
        p0.probs().iter().zip(q).map(|(a, b)| a + eps * b).collect(),
    ))
}

/// Real 1-chain, stored on the forward orientation of each pair so that
/// `c(ē) = −c(e)` holds exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chain1 {
    coeffs: Vec<f64>,
}

impl Chain1 {
    pub fn zero(num_pairs: usize) -> Self {
        Self {
            coeffs: vec![0.0; num_pairs],
        }
    }

    pub fn from_pair_coefficients(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Coefficient of the directed edge `e`.
    pub fn get(&self, e: EdgeId) -> f64 {
        let c = self.coeffs[pair_of(e)];
        if is_forward(e) {
            c
        } else {
            -c
        }
    }

    /// Add `c · e` (equivalently `−c · ē`).
    pub fn add_edge(&mut self, e: EdgeId, c: f64) {
        let k = pair_of(e);
        if is_forward(e) {
            self.coeffs[k] += c;
        } else {
            self.coeffs[k] -= c;
        }
    }

    pub fn pair_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `∂c` as a vertex function, with `∂e = t(e) − o(e)`.
    pub fn boundary(&self, graph: &QuotientGraph) -> Vec<f64> {
        let mut b = vec![0.0; graph.num_vertices()];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let e = 2 * k;
            b[graph.terminus(e)] += c;
            b[graph.origin(e)] -= c;
        }
        b
    }
}

/// Fundamental cycles of a BFS spanning tree rooted at vertex 0. Ties are
/// broken by edge index, so the basis is reproducible.
pub fn cycle_basis(graph: &QuotientGraph) -> Result<Vec<Chain1>> {
    let n = graph.num_vertices();
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut tree_pair = vec![false; graph.num_pairs()];
    visited[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let mut out: Vec<EdgeId> = graph.out_edges(x).to_vec();
        out.sort_unstable_by_key(|&e| (pair_of(e), e));
        for e in out {
            let y = graph.terminus(e);
            if !visited[y] {
                visited[y] = true;
                parent_edge[y] = Some(e);
                tree_pair[pair_of(e)] = true;
                queue.push_back(y);
            }
        }
    }
    if visited.iter().any(|v| !v) {
        return Err(Error::InvalidGraph("cycle basis requires a connected graph".into()));
    }
    // Chain of the tree path from `x` up to the root.
    let to_root = |mut x: usize| {
        let mut c = Chain1::zero(graph.num_pairs());
        while let Some(e) = parent_edge[x] {
            c.add_edge(reverse(e), 1.0);
            x = graph.origin(e);
        }
        c
    };
    Ok((0..graph.num_pairs())
        .filter(|&k| !tree_pair[k])
        .map(|k| {
            let e = 2 * k;
            let mut c = to_root(graph.terminus(e)).sub(&to_root(graph.origin(e)));
            c.add_edge(e, 1.0);
            c
        })
        .collect())
}

/// `γ_p = Σ_{e ∈ E0} m̃(e) e`; the coefficient on a stored pair is
/// `m̃(e) − m̃(ē)`.
pub fn homological_direction(graph: &QuotientGraph, kernel: &TransitionKernel, m: &InvariantMeasure) -> Chain1 {
    Chain1::from_pair_coefficients(
        (0..graph.num_pairs())
            .map(|k| m.edge_weight(graph, kernel, 2 * k) - m.edge_weight(graph, kernel, 2 * k + 1))
            .collect(),
    )
}

/// Coordinates of `chain` in `basis` by least squares; fails if the chain is
/// not in the span.
pub fn coordinates_in_basis(chain: &Chain1, basis: &[Chain1]) -> Result<Vec<f64>> {
    if basis.is_empty() {
        return if chain.max_abs() <= 1e-12 {
            Ok(vec![])
        } else {
            Err(Error::NotInSpan {
                residual: chain.max_abs(),
            })
        };
    }
    let rows = chain.coeffs.len();
    let b = DMatrix::from_fn(rows, basis.len(), |i, j| basis[j].coeffs[i]);
    let x = DVector::from_column_slice(&chain.coeffs);
    let btb = b.transpose() * &b;
    let coords = btb
        .lu()
        .solve(&(b.transpose() * &x))
        .ok_or_else(|| Error::Singular("cycle basis is linearly dependent".into()))?;
    let residual = (&b * &coords - &x).amax();
    if residual > 1e-10 {
        return Err(Error::NotInSpan { residual });
    }
    Ok(coords.iter().copied().collect())
}

/// `ρ_ℝ(c) = Σ_k c_k · voltage(e_k)|_{g(1)}`, the abelianized voltage of a
/// 1-cycle.
pub fn abelianize(graph: &QuotientGraph, chain: &Chain1) -> Vec<f64> {
    let alg = graph.algebra();
    let r1 = alg.layer_range(1);
    let mut out = vec![0.0; r1.len()];
    for (k, &c) in chain.coeffs.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(&graph.voltage(2 * k).coords()[r1.clone()]) {
            *o += c * v;
        }
    }
    out
}

/// Vertex reference in a graph spec: a name or an integer id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Name(String),
    Index(u64),
}

impl VertexRef {
    pub fn key(&self) -> String {
        match self {
            VertexRef::Name(s) => s.clone(),
            VertexRef::Index(i) => i.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgePairSpec {
    pub o: VertexRef,
    pub t: VertexRef,
    pub voltage: Vec<f64>,
    pub p: f64,
    pub p_rev: f64,
}

/// JSON graph-spec file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub algebra: AlgebraSource,
    pub vertices: Vec<VertexRef>,
    pub edge_pairs: Vec<EdgePairSpec>,
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph spec: {e}")))
    }

    pub fn build(&self) -> Result<(QuotientGraph, TransitionKernel)> {
        let algebra = self.algebra.build()?;
        let names: Vec<String> = self.vertices.iter().map(VertexRef::key).collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let lookup = |v: &VertexRef| {
            let k = v.key();
            index
                .get(k.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex '{k}'")))
        };
        let mut pairs = Vec::with_capacity(self.edge_pairs.len());
        let mut probs = Vec::with_capacity(self.edge_pairs.len());
        for ep in &self.edge_pairs {
            pairs.push(EdgePair {
                origin: lookup(&ep.o)?,
                terminus: lookup(&ep.t)?,
                voltage: GroupElement::new(ep.voltage.clone()),
            });
            probs.push((ep.p, ep.p_rev));
        }
        let graph = QuotientGraph::new(algebra, names, pairs)?;
        Ok((graph, TransitionKernel::from_pairs(&probs)))
    }
}

/// Parameters of the Heisenberg hexagonal lattice: `(α, β, γ)` on the three
/// edges leaving `x` and `(α′, β′, γ′)` on their reverses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HexParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha_rev: f64,
    pub beta_rev: f64,
    pub gamma_rev: f64,
}

impl HexParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, alpha_rev: f64, beta_rev: f64, gamma_rev: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            alpha_rev,
            beta_rev,
            gamma_rev,
        };
        p.check()?;
        Ok(p)
    }

    pub fn uniform() -> Self {
        let t = 1.0 / 3.0;
        Self {
            alpha: t,
            beta: t,
            gamma: t,
            alpha_rev: t,
            beta_rev: t,
            gamma_rev: t,
        }
    }

    pub fn check(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.alpha_rev, self.beta_rev, self.gamma_rev];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter(format!("hexagonal parameters must be positive, got {all:?}")));
        }
        let s = self.alpha + self.beta + self.gamma;
        let s_rev = self.alpha_rev + self.beta_rev + self.gamma_rev;
        if (s - 1.0).abs() > STOCHASTIC_TOL || (s_rev - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidParameter(format!(
                "α+β+γ = {s} and α′+β′+γ′ = {s_rev} must both equal 1"
            )));
        }
        Ok(())
    }

    /// `(α̂, β̂, γ̂)` with `α̂ = α + α′`.
    pub fn hats(&self) -> [f64; 3] {
        [
            self.alpha + self.alpha_rev,
            self.beta + self.beta_rev,
            self.gamma + self.gamma_rev,
        ]
    }

    /// `(α̌, β̌, γ̌)` with `α̌ = α − α′`.
    pub fn checks(&self) -> [f64; 3] {
        [
            self.alpha - self.alpha_rev,
            self.beta - self.beta_rev,
            self.gamma - self.gamma_rev,
        ]
    }
}

/// The Heisenberg hexagonal lattice as a two-vertex quotient `{x, y}` with
/// three edge pairs `x → y`. Voltages are `γ1 = exp X1`, `1`, `γ2 = exp X2`,
/// so the cycles `e1 − e2` and `e3 − e2` abelianize to `X1` and `X2`.
pub fn build_hexagonal_heisenberg(params: &HexParams) -> Result<(QuotientGraph, TransitionKernel)> {
    params.check()?;
    let alg = GradedAlgebra::heisenberg();
    let pair = |voltage: [f64; 3]| EdgePair {
        origin: 0,
        terminus: 1,
        voltage: GroupElement::new(voltage.to_vec()),
    };
    let graph = QuotientGraph::new(
        alg,
        vec!["x".into(), "y".into()],
        vec![pair([1.0, 0.0, 0.0]), pair([0.0, 0.0, 0.0]), pair([0.0, 1.0, 0.0])],
    )?;
    let kernel = TransitionKernel::from_pairs(&[
        (params.alpha, params.alpha_rev),
        (params.beta, params.beta_rev),
        (params.gamma, params.gamma_rev),
    ]);
    Ok((graph, kernel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(p: &HexParams) -> (QuotientGraph, TransitionKernel) {
        build_hexagonal_heisenberg(p).unwrap()
    }

    fn skewed() -> HexParams {
        HexParams::new(0.5, 0.3, 0.2, 0.2, 0.3, 0.5).unwrap()
    }

    #[test]
    fn hex_validates() {
        let (g, k) = hex(&HexParams::uniform());
        let report = validate(&g, &k);
        assert!(report.all_pass, "{}", report.summary());
    }

    #[test]
    fn bad_row_sum_names_vertex() {
        let (g, _) = hex(&HexParams::uniform());
        let k = TransitionKernel::from_pairs(&[(0.3, 1.0 / 3.0), (0.3, 1.0 / 3.0), (0.3, 1.0 / 3.0)]);
        let report = validate(&g, &k);
        assert!(!report.all_pass);
        let c = report.check("stochasticity").unwrap();
        assert!(!c.passed);
        assert!(c.detail.contains("'x'"), "{}", c.detail);
        assert!(!c.detail.contains("'y'"), "{}", c.detail);
        assert!(report.clone().into_result().is_err());
    }

    #[test]
    fn two_components_fail_connectivity() {
        let alg = GradedAlgebra::heisenberg();
        let loop_pair = |x| EdgePair {
            origin: x,
            terminus: x,
            voltage: GroupElement::new(vec![1.0, 0.0, 0.0]),
        };
        let g = QuotientGraph::new(alg, vec!["a".into(), "b".into()], vec![loop_pair(0), loop_pair(1)]).unwrap();
        let k = TransitionKernel::from_pairs(&[(0.5, 0.5), (0.5, 0.5)]);
        let report = validate(&g, &k);
        assert!(!report.check("connectivity").unwrap().passed);
        assert!(!report.check("irreducibility").unwrap().passed);
        assert!(matches!(invariant_measure(&g, &k), Err(Error::NotIrreducible { .. })));
    }

    #[test]
    fn one_way_kernel_is_reducible() {
        let id = GroupElement::new(vec![0.0; 3]);
        let pair = |origin, terminus| EdgePair { origin, terminus, voltage: id.clone() };
        let g = QuotientGraph::new(
            GradedAlgebra::heisenberg(),
            vec!["a".into(), "b".into(), "c".into()],
            vec![pair(0, 1), pair(1, 2), pair(2, 2)],
        )
        .unwrap();
        // a → b → c, and c never leaves.
        let k = TransitionKernel::from_pairs(&[(1.0, 0.0), (1.0, 0.0), (0.5, 0.5)]);
        let r = validate(&g, &k);
        assert!(r.check("stochasticity").unwrap().passed);
        assert!(r.check("connectivity").unwrap().passed);
        assert!(!r.check("irreducibility").unwrap().passed);
        match invariant_measure(&g, &k) {
            Err(Error::NotIrreducible { components }) => assert_eq!(components.len(), 3),
            other => panic!("expected NotIrreducible, got {other:?}"),
        }
    }

    #[test]
    fn hex_measure_is_half() {
        for p in [HexParams::uniform(), skewed()] {
            let (g, k) = hex(&p);
            let m = invariant_measure(&g, &k).unwrap();
            assert!((m.get(0) - 0.5).abs() < 1e-14);
            assert!((m.get(1) - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn loop_pair_single_vertex() {
        let g = QuotientGraph::new(
            GradedAlgebra::heisenberg(),
            vec!["o".into()],
            vec![EdgePair {
                origin: 0,
                terminus: 0,
                voltage: GroupElement::new(vec![1.0, 0.0, 0.0]),
            }],
        )
        .unwrap();
        let k = TransitionKernel::from_pairs(&[(0.7, 0.3)]);
        assert!(validate(&g, &k).all_pass);
        let m = invariant_measure(&g, &k).unwrap();
        assert_eq!(m.values(), &[1.0]);
        let basis = cycle_basis(&g).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].boundary(&g), vec![0.0]);
    }

    #[test]
    fn symmetrize_hex() {
        let p = skewed();
        let (g, k) = hex(&p);
        let m = invariant_measure(&g, &k).unwrap();
        let fam = symmetrize(&g, &k, &m).unwrap();
        let [ah, bh, gh] = p.hats();
        let [ac, bc, gc] = p.checks();
        for (i, (h, c)) in [(ah, ac), (bh, bc), (gh, gc)].into_iter().enumerate() {
            assert!((fam.p0.p(2 * i) - h / 2.0).abs() < 1e-15);
            let half = fam.at(0.5).unwrap();
            assert!((half.p(2 * i) - (h + 0.5 * c) / 2.0).abs() < 1e-15);
            assert!((half.p(2 * i + 1) - (h - 0.5 * c) / 2.0).abs() < 1e-15);
        }
        assert_eq!(fam.at(0.0).unwrap(), fam.p0);
        let one = fam.at(1.0).unwrap();
        for e in g.edges() {
            assert!((one.p(e) - k.p(e)).abs() <= 1e-15);
        }
        assert!(fam.at(1.5).is_err());
        assert!(fam.at(-0.1).is_err());
    }

    #[test]
    fn symmetric_kernel_has_zero_q() {
        let (g, k) = hex(&HexParams::uniform());
        let m = invariant_measure(&g, &k).unwrap();
        let fam = symmetrize(&g, &k, &m).unwrap();
        assert!(fam.q.iter().all(|q| q.abs() < 1e-16));
        assert!(homological_direction(&g, &k, &m).max_abs() < 1e-16);
    }

    #[test]
    fn symmetrize_rejects_wrong_measure() {
        let (g, k) = hex(&skewed());
        assert!(matches!(
            symmetrize(&g, &k, &InvariantMeasure::new(vec![0.6, 0.4])),
            Err(Error::MeasureMismatch { .. })
        ));
    }

    #[test]
    fn hex_cycles_and_direction() {
        let p = skewed();
        let (g, k) = hex(&p);
        let m = invariant_measure(&g, &k).unwrap();
        let basis = cycle_basis(&g).unwrap();
        assert_eq!(basis.len(), 2);
        let c1 = Chain1::from_pair_coefficients(vec![1.0, -1.0, 0.0]);
        let c2 = Chain1::from_pair_coefficients(vec![0.0, -1.0, 1.0]);
        for c in &basis {
            assert!(coordinates_in_basis(c, &[c1.clone(), c2.clone()]).is_ok());
        }
        assert_eq!(abelianize(&g, &c1), vec![1.0, 0.0]);
        assert_eq!(abelianize(&g, &c2), vec![0.0, 1.0]);
        let gp = homological_direction(&g, &k, &m);
        let coords = coordinates_in_basis(&gp, &[c1, c2]).unwrap();
        assert!((coords[0] - 0.15).abs() < 1e-14);
        assert!((coords[1] + 0.15).abs() < 1e-14);
        assert!(gp.boundary(&g).iter().all(|b| b.abs() < 1e-15));
    }

    #[test]
    fn tree_has_no_cycles() {
        let alg = GradedAlgebra::heisenberg();
        let id = GroupElement::new(vec![0.0; 3]);
        let g = QuotientGraph::new(
            alg,
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                EdgePair { origin: 0, terminus: 1, voltage: id.clone() },
                EdgePair { origin: 1, terminus: 2, voltage: id },
            ],
        )
        .unwrap();
        assert!(cycle_basis(&g).unwrap().is_empty());
    }

    #[test]
    fn graph_spec_roundtrip() {
        let (g, k) = hex(&skewed());
        let spec = g.to_spec(&k);
        let text = serde_json::to_string(&spec).unwrap();
        let (g2, k2) = GraphSpec::from_json(&text).unwrap().build().unwrap();
        assert_eq!(k, k2);
        assert_eq!(g.pairs(), g2.pairs());
        assert!(GraphSpec::from_json(r#"{"algebra":"heisenberg","vertices":["a"]}"#).is_err());
        let unknown = r#"{"algebra":"heisenberg","vertices":["a"],"edge_pairs":[{"o":"a","t":"b","voltage":[0,0,0],"p":1,"p_rev":1}]}"#;
        assert!(GraphSpec::from_json(unknown).unwrap().build().is_err());
        let numeric = r#"{"algebra":"heisenberg","vertices":[0],"edge_pairs":[{"o":0,"t":0,"voltage":[1,0,0],"p":0.5,"p_rev":0.5}]}"#;
        let (g3, k3) = GraphSpec::from_json(numeric).unwrap().build().unwrap();
        assert!(validate(&g3, &k3).all_pass);
    }

    #[test]
    fn hex_params_constraints() {
        assert!(HexParams::new(0.5, 0.3, 0.3, 0.2, 0.3, 0.5).is_err());
        assert!(HexParams::new(1.0, 0.0, 0.0, 0.2, 0.3, 0.5).is_err());
    }
}
