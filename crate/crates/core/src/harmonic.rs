//! Modified harmonic realizations, Albanese metrics and the drift functional
//! of a realization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    self, abelianize, homological_direction, invariant_measure, reverse, strongly_connected_components, symmetrize,
    validate, Chain1, InvariantMeasure, KernelFamily, QuotientGraph, TransitionKernel,
};
use crate::liegroup::{GradedAlgebra, GroupElement, Product};

/// How the additive freedom of the layer-1 harmonic solve is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// `Σ_x m(x) φ(x) = c`, shared by every `ε` of a family.
    Mean(Vec<f64>),
    /// `φ(vertex) = 0`.
    Anchor(usize),
}

impl Default for Gauge {
    fn default() -> Self {
        Gauge::Mean(Vec::new())
    }
}

impl Gauge {
    fn mean_target(&self, d1: usize) -> Result<Vec<f64>> {
        match self {
            Gauge::Mean(c) if c.is_empty() => Ok(vec![0.0; d1]),
            Gauge::Mean(c) if c.len() == d1 => Ok(c.clone()),
            Gauge::Mean(c) => Err(Error::DimensionMismatch {
                expected: d1,
                got: c.len(),
            }),
            Gauge::Anchor(_) => Ok(vec![0.0; d1]),
        }
    }
}

/// Positions `Φ(x)` of the fundamental-domain vertices. The rest of the cover
/// follows from `Φ(σ·x) = σ·Φ(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PeriodicRealization {
    positions: Vec<GroupElement>,
}

impl PeriodicRealization {
    pub fn new(positions: Vec<GroupElement>) -> Self {
        Self { positions }
    }

    /// Every vertex at the identity; increments are then the bare voltages.
    pub fn trivial(graph: &QuotientGraph) -> Self {
        Self::new(vec![graph.algebra().identity(); graph.num_vertices()])
    }

    pub fn position(&self, x: usize) -> &GroupElement {
        &self.positions[x]
    }

    pub fn positions(&self) -> &[GroupElement] {
        &self.positions
    }

    pub fn position_mut(&mut self, x: usize) -> &mut GroupElement {
        &mut self.positions[x]
    }

    /// `dΦ(e) = Φ(o(e))⁻¹ · σ(e) · Φ(t(e))`.
    pub fn increment(&self, graph: &QuotientGraph, e: usize) -> GroupElement {
        let alg = graph.algebra();
        let a = alg.mul(&alg.inverse(&self.positions[graph.origin(e)]), graph.voltage(e), Product::Dot);
        alg.mul(&a, &self.positions[graph.terminus(e)], Product::Dot)
    }

    /// Increments of all directed edges; `ē` is filled with the inverse of
    /// `e` so the involution holds exactly.
    pub fn increments(&self, graph: &QuotientGraph) -> Vec<GroupElement> {
        let alg = graph.algebra();
        let mut out = vec![alg.identity(); graph.num_edges()];
        for k in 0..graph.num_pairs() {
            let inc = self.increment(graph, 2 * k);
            out[2 * k + 1] = alg.inverse(&inc);
            out[2 * k] = inc;
        }
        out
    }

    fn layer1(&self, alg: &GradedAlgebra, x: usize) -> Vec<f64> {
        alg.layer(self.positions[x].coords(), 1).to_vec()
    }
}

/// `Σ_{e ∈ E0} m̃(e) log(dΦ(e))|_{g(1)}`, which equals `ρ_ℝ(γ_p)` for any
/// periodic realization.
pub fn asymptotic_direction(
    graph: &QuotientGraph,
    kernel: &TransitionKernel,
    m: &InvariantMeasure,
    realization: &PeriodicRealization,
) -> Vec<f64> {
    let alg = graph.algebra();
    let r1 = alg.layer_range(1);
    let mut out = vec![0.0; r1.len()];
    for (e, inc) in realization.increments(graph).iter().enumerate() {
        let w = m.edge_weight(graph, kernel, e);
        for (o, v) in out.iter_mut().zip(&inc.coords()[r1.clone()]) {
            *o += w * v;
        }
    }
    out
}

/// `ρ_ℝ(γ_p)` computed from the homology class of `γ_p`.
pub fn rho_of(graph: &QuotientGraph, kernel: &TransitionKernel, m: &InvariantMeasure) -> Vec<f64> {
    abelianize(graph, &homological_direction(graph, kernel, m))
}

/// Solve for the modified harmonic realization of `kernel` with drift
/// `rho = ρ_ℝ(γ_{p_ε})`:
/// `Σ_{e ∈ E_x} p(e) log(dΦ(e))|_{g(1)} = rho` at every vertex.
///
/// The layer-1 system `(I − P)φ = b` is bordered with the gauge row and
/// solved by LU. Higher layers are 0 on the fundamental domain.
pub fn solve_modified_harmonic(
    graph: &QuotientGraph,
    kernel: &TransitionKernel,
    m: &InvariantMeasure,
    rho: &[f64],
    gauge: &Gauge,
) -> Result<PeriodicRealization> {
    let alg = graph.algebra();
    let r1 = alg.layer_range(1);
    let d1 = r1.len();
    let n = graph.num_vertices();
    if rho.len() != d1 {
        return Err(Error::DimensionMismatch { expected: d1, got: rho.len() });
    }
    if m.values().len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.values().len() });
    }
    let sccs = strongly_connected_components(graph, kernel);
    if sccs.len() != 1 {
        return Err(Error::NotIrreducible {
            components: sccs
                .iter()
                .map(|c| c.iter().map(|&x| graph.name(x).to_string()).collect())
                .collect(),
        });
    }
    let target = gauge.mean_target(d1)?;

    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut b = DMatrix::<f64>::zeros(n + 1, d1);
    for x in 0..n {
        a[(x, x)] += 1.0;
        a[(x, n)] = 1.0;
        for &e in graph.out_edges(x) {
            let p = kernel.p(e);
            a[(x, graph.terminus(e))] -= p;
            for (i, v) in graph.voltage(e).coords()[r1.clone()].iter().enumerate() {
                b[(x, i)] += p * v;
            }
        }
        for i in 0..d1 {
            b[(x, i)] -= rho[i];
        }
    }
    match gauge {
        Gauge::Mean(_) => {
            for x in 0..n {
                a[(n, x)] = m.get(x);
            }
            for i in 0..d1 {
                b[(n, i)] = target[i];
            }
        }
        Gauge::Anchor(v) => {
            if *v >= n {
                return Err(Error::InvalidParameter(format!("gauge anchor {v} is not a vertex")));
            }
            a[(n, *v)] = 1.0;
        }
    }

    let lu = a.clone().lu();
    let mut sol = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular("modified harmonic system".into()))?;
    // One step of iterative refinement.
    let resid = &b - &a * &sol;
    if let Some(corr) = lu.solve(&resid) {
        sol += corr;
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("modified harmonic system".into()));
    }
    // The border multiplier vanishes exactly when `rho` is the drift of `kernel`.
    let lambda = sol.row(n).amax();
    if lambda > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "drift {rho:?} is not the asymptotic direction of the kernel (border residual {lambda:.3e})"
        )));
    }

    let positions = (0..n)
        .map(|x| {
            let mut z = vec![0.0; alg.dim()];
            for i in 0..d1 {
                z[r1.start + i] = sol[(x, i)];
            }
            GroupElement::new(z)
        })
        .collect();
    Ok(PeriodicRealization::new(positions))
}

/// `max_{x, i} |Σ_{e ∈ E_x} p(e) log(dΦ(e))_i − rho_i|` over layer-1
/// coordinates.
pub fn harmonic_residual(
    graph: &QuotientGraph,
    kernel: &TransitionKernel,
    realization: &PeriodicRealization,
    rho: &[f64],
) -> f64 {
    let alg = graph.algebra();
    let r1 = alg.layer_range(1);
    let incs = realization.increments(graph);
    let mut worst = 0.0f64;
    for x in 0..graph.num_vertices() {
        let mut acc = vec![0.0; r1.len()];
        for &e in graph.out_edges(x) {
            for (a, v) in acc.iter_mut().zip(&incs[e].coords()[r1.clone()]) {
                *a += kernel.p(e) * v;
            }
        }
        for (a, r) in acc.iter().zip(rho) {
            worst = worst.max((a - r).abs());
        }
    }
    worst
}

/// A real 1-form, one value per directed edge, with `ω(ē) = −ω(e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OneForm {
    values: Vec<f64>,
}

impl OneForm {
    pub fn get(&self, e: usize) -> f64 {
        self.values[e]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_{e ∈ E_x} p(e) ω(e)`.
    pub fn weighted_at(&self, graph: &QuotientGraph, kernel: &TransitionKernel, x: usize) -> f64 {
        graph.out_edges(x).iter().map(|&e| kernel.p(e) * self.values[e]).sum()
    }
}

/// `⟨c, ω⟩ = Σ_k c(e_k) ω(e_k)` over stored orientations.
pub fn pairing(chain: &Chain1, form: &OneForm) -> f64 {
    chain
        .pair_coefficients()
        .iter()
        .enumerate()
        .map(|(k, c)| c * form.values[2 * k])
        .sum()
}

/// `ω_i(e) = log(dΦ(e))|_{g(1)}` in coordinate `i`, one form per basis
/// covector of `g(1)`. Modified harmonic when `realization` is.
pub fn modified_harmonic_forms(graph: &QuotientGraph, realization: &PeriodicRealization) -> Vec<OneForm> {
    let alg = graph.algebra();
    let r1 = alg.layer_range(1);
    let mut forms = vec![vec![0.0; graph.num_edges()]; r1.len()];
    for k in 0..graph.num_pairs() {
        let inc = realization.increment(graph, 2 * k);
        for (i, v) in inc.coords()[r1.clone()].iter().enumerate() {
            forms[i][2 * k] = *v;
            forms[i][2 * k + 1] = -*v;
        }
    }
    forms.into_iter().map(|values| OneForm { values }).collect()
}

/// `⟨⟨ω_i, ω_j⟩⟩_p = Σ_{e ∈ E0} m̃(e) ω_i(e) ω_j(e) − ⟨γ_p, ω_i⟩⟨γ_p, ω_j⟩`,
/// checked to be positive definite.
pub fn albanese_gram(
    graph: &QuotientGraph,
    kernel: &TransitionKernel,
    m: &InvariantMeasure,
    forms: &[OneForm],
) -> Result<DMatrix<f64>> {
    let d = forms.len();
    let gamma = homological_direction(graph, kernel, m);
    let pair: Vec<f64> = forms.iter().map(|w| pairing(&gamma, w)).collect();
    let weights: Vec<f64> = graph.edges().map(|e| m.edge_weight(graph, kernel, e)).collect();
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = weights
                .iter()
                .enumerate()
                .map(|(e, w)| w * forms[i].values[e] * forms[j].values[e])
                .sum();
            let v = s - pair[i] * pair[j];
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    if g.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite(format!(
            "Albanese Gram matrix {:?}",
            g.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>()
        )));
    }
    Ok(g)
}

/// `√det(gram)`, the inverse volume of the Albanese torus of the lattice
/// spanned by the layer-1 basis.
pub fn volume_inverse(gram: &DMatrix<f64>) -> f64 {
    gram.determinant().sqrt()
}

/// The flat metric on `g(1)` and an orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct AlbaneseMetric {
    /// `gram⁻¹` in the `X` basis.
    pub metric: DMatrix<f64>,
    /// Column `i` holds the `X` coordinates of `V_i`.
    pub frame: DMatrix<f64>,
}

impl AlbaneseMetric {
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        let v = DVector::from_column_slice(v);
        (u.transpose() * &self.metric * v)[(0, 0)]
    }

    pub fn frame_vectors(&self) -> Vec<Vec<f64>> {
        self.frame.column_iter().map(|c| c.iter().copied().collect()).collect()
    }
}

/// Metric and Gram–Schmidt frame with `X_1, X_2, …` processed in index order.
pub fn albanese_metric(gram: &DMatrix<f64>) -> Result<AlbaneseMetric> {
    let order: Vec<usize> = (0..gram.nrows()).collect();
    albanese_metric_ordered(gram, &order)
}

/// Like [`albanese_metric`] with the basis processed in `order`; `V_{order[k]}`
/// is the `k`-th vector produced, so `V_{order[0]}` is parallel to
/// `X_{order[0]}`.
pub fn albanese_metric_ordered(gram: &DMatrix<f64>, order: &[usize]) -> Result<AlbaneseMetric> {
    let d = gram.nrows();
    if gram.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: gram.ncols() });
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..d).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter(format!("frame order {order:?} is not a permutation of 0..{d}")));
    }
    let metric = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Albanese Gram matrix".into()))?;
    let metric = (&metric + metric.transpose()) * 0.5;
    let ip = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * &metric * v)[(0, 0)];
    let mut frame = DMatrix::zeros(d, d);
    let mut done: Vec<DVector<f64>> = Vec::with_capacity(d);
    for &i in order {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        for u in &done {
            let c = ip(&v, u);
            v -= u * c;
        }
        let norm2 = ip(&v, &v);
        if !(norm2 > 0.0) {
            return Err(Error::NotPositiveDefinite("Albanese metric".into()));
        }
        v /= norm2.sqrt();
        frame.set_column(i, &v);
        done.push(v);
    }
    Ok(AlbaneseMetric { metric, frame })
}

/// `β_(ε)(Φ) = Σ_{e ∈ E0} m̃(e) log(dΦ(e))|_{g(2)}`. Empty for step-1
/// algebras.
pub fn beta(
    graph: &QuotientGraph,
    kernel: &TransitionKernel,
    m: &InvariantMeasure,
    realization: &PeriodicRealization,
) -> Vec<f64> {
    let alg = graph.algebra();
    if alg.step() < 2 {
        return Vec::new();
    }
    let r2 = alg.layer_range(2);
    let mut out = vec![0.0; r2.len()];
    for k in 0..graph.num_pairs() {
        let e = 2 * k;
        let w = m.edge_weight(graph, kernel, e) - m.edge_weight(graph, kernel, reverse(e));
        let inc = realization.increment(graph, e);
        for (o, v) in out.iter_mut().zip(&inc.coords()[r2.clone()]) {
            *o += w * v;
        }
    }
    out
}

/// `Cor(x) = log Φ(x)|_{g(1)} − log Φ0(x)|_{g(1)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corrector {
    pub values: Vec<Vec<f64>>,
}

impl Corrector {
    pub fn new(alg: &GradedAlgebra, phi: &PeriodicRealization, phi0: &PeriodicRealization) -> Self {
        let values = (0..phi.positions.len())
            .map(|x| {
                phi.layer1(alg, x)
                    .iter()
                    .zip(phi0.layer1(alg, x))
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        Self { values }
    }

    /// `M = max_x ‖Cor(x)‖`.
    pub fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `Σ_x m(x) (Cor(x) − other(x))`; zero when both realizations have the same m-weighted mean.
    pub fn centring_difference(&self, other: &Corrector, m: &InvariantMeasure) -> Vec<f64> {
        let d = self.values.first().map_or(0, Vec::len);
        let mut out = vec![0.0; d];
        for (x, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            for i in 0..d {
                out[i] += m.get(x) * (a[i] - b[i]);
            }
        }
        out
    }
}

/// Coefficients `c` with `Σ c_i V_i = rho`.
pub fn generator_coefficients(frame: &DMatrix<f64>, rho: &[f64]) -> Result<Vec<f64>> {
    if rho.len() != frame.nrows() {
        return Err(Error::DimensionMismatch { expected: frame.nrows(), got: rho.len() });
    }
    let c = frame
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(rho))
        .ok_or_else(|| Error::Singular("frame matrix".into()))?;
    Ok(c.iter().copied().collect())
}

/// `max_e ‖dΦ(e)‖_Hom`.
pub fn sup_increment_norm(graph: &QuotientGraph, realization: &PeriodicRealization) -> f64 {
    let alg = graph.algebra();
    realization
        .increments(graph)
        .iter()
        .map(|g| alg.hom_norm(g))
        .fold(0.0, f64::max)
}

/// The family `ε ↦ (p_ε, Φ0^(ε))` for one kernel and gauge.
#[derive(Clone, Debug)]
pub struct RealizationFamily {
    graph: QuotientGraph,
    m: InvariantMeasure,
    kernels: KernelFamily,
    rho: Vec<f64>,
    gauge: Gauge,
}

impl RealizationFamily {
    /// Validates the kernel and prepares `m`, `p0`, `q` and `ρ_ℝ(γ_p)`.
    pub fn new(graph: QuotientGraph, kernel: &TransitionKernel, gauge: Gauge) -> Result<Self> {
        validate(&graph, kernel).into_result()?;
        let m = invariant_measure(&graph, kernel)?;
        let kernels = symmetrize(&graph, kernel, &m)?;
        let rho = rho_of(&graph, kernel, &m);
        Ok(Self {
            graph,
            m,
            kernels,
            rho,
            gauge,
        })
    }

    pub fn graph(&self) -> &QuotientGraph {
        &self.graph
    }

    pub fn measure(&self) -> &InvariantMeasure {
        &self.m
    }

    pub fn kernels(&self) -> &KernelFamily {
        &self.kernels
    }

    /// `ρ_ℝ(γ_p)` of the original kernel (`ε = 1`).
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn kernel(&self, eps: f64) -> Result<TransitionKernel> {
        self.kernels.at(eps)
    }

    pub fn rho_at(&self, eps: f64) -> Vec<f64> {
        self.rho.iter().map(|r| eps * r).collect()
    }

    pub fn realization(&self, eps: f64) -> Result<PeriodicRealization> {
        let k = self.kernel(eps)?;
        solve_modified_harmonic(&self.graph, &k, &self.m, &self.rho_at(eps), &self.gauge)
    }

    pub fn beta(&self, eps: f64) -> Result<Vec<f64>> {
        let k = self.kernel(eps)?;
        let phi = solve_modified_harmonic(&self.graph, &k, &self.m, &self.rho_at(eps), &self.gauge)?;
        Ok(beta(&self.graph, &k, &self.m, &phi))
    }

    pub fn gram(&self, eps: f64) -> Result<DMatrix<f64>> {
        let k = self.kernel(eps)?;
        let phi = solve_modified_harmonic(&self.graph, &k, &self.m, &self.rho_at(eps), &self.gauge)?;
        albanese_gram(&self.graph, &k, &self.m, &modified_harmonic_forms(&self.graph, &phi))
    }

    /// Frame of the limiting metric `g0^(0)` and the drift `ρ_ℝ(γ_p)`
    /// expanded in it.
    pub fn generator(&self, order: Option<&[usize]>) -> Result<Generator> {
        let gram = self.gram(0.0)?;
        let metric = match order {
            Some(o) => albanese_metric_ordered(&gram, o)?,
            None => albanese_metric(&gram)?,
        };
        let drift_coefficients = generator_coefficients(&metric.frame, &self.rho)?;
        Ok(Generator {
            frame: metric.frame_vectors(),
            drift: self.rho.clone(),
            drift_coefficients,
        })
    }
}

/// Data of the limiting generator `−½ Σ V_i² − ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// `frame[i]` is `V_i` in `X` coordinates.
    pub frame: Vec<Vec<f64>>,
    pub drift: Vec<f64>,
    pub drift_coefficients: Vec<f64>,
}

/// Everything the `analyze` command reports for one `ε`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Analysis {
    pub eps: f64,
    pub vertices: Vec<String>,
    pub invariant_measure: Vec<f64>,
    /// `γ_p` coefficients on the stored orientation of each edge pair.
    pub gamma_p: Vec<f64>,
    pub cycle_basis: Vec<Vec<f64>>,
    pub gamma_p_in_cycle_basis: Vec<f64>,
    pub rho: Vec<f64>,
    pub kernel: Vec<f64>,
    pub realization: Vec<Vec<f64>>,
    pub harmonic_residual: f64,
    pub gram: Vec<Vec<f64>>,
    pub volume_inverse: f64,
    pub metric: Vec<Vec<f64>>,
    pub frame: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub sup_increment_norm: f64,
    pub generator: Generator,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Run the full pipeline for one graph and kernel at `eps`.
pub fn analyze(
    graph: &QuotientGraph,
    kernel: &TransitionKernel,
    eps: f64,
    gauge: Gauge,
    frame_order: Option<&[usize]>,
) -> Result<Analysis> {
    let fam = RealizationFamily::new(graph.clone(), kernel, gauge)?;
    let m = fam.measure();
    let gamma = homological_direction(graph, kernel, m);
    let basis = graph::cycle_basis(graph)?;
    let gamma_coords = graph::coordinates_in_basis(&gamma, &basis)?;
    let k = fam.kernel(eps)?;
    let rho_eps = fam.rho_at(eps);
    let phi = solve_modified_harmonic(graph, &k, m, &rho_eps, fam.gauge())?;
    let gram = albanese_gram(graph, &k, m, &modified_harmonic_forms(graph, &phi))?;
    let metric = match frame_order {
        Some(o) => albanese_metric_ordered(&gram, o)?,
        None => albanese_metric(&gram)?,
    };
    Ok(Analysis {
        eps,
        vertices: graph.names().to_vec(),
        invariant_measure: m.values().to_vec(),
        gamma_p: gamma.pair_coefficients().to_vec(),
        cycle_basis: basis.iter().map(|c| c.pair_coefficients().to_vec()).collect(),
        gamma_p_in_cycle_basis: gamma_coords,
        rho: fam.rho().to_vec(),
        kernel: k.probs().to_vec(),
        harmonic_residual: harmonic_residual(graph, &k, &phi, &rho_eps),
        realization: phi.positions().iter().map(|g| g.coords().to_vec()).collect(),
        volume_inverse: volume_inverse(&gram),
        gram: rows(&gram),
        metric: rows(&metric.metric),
        frame: metric.frame_vectors(),
        beta: beta(graph, &k, m, &phi),
        sup_increment_norm: sup_increment_norm(graph, &phi),
        generator: fam.generator(frame_order)?,
    })
}
