//! Graded nilpotent Lie algebras and the two group laws on the simply
//! connected group `G = exp(g)`.
//!
//! Group elements are stored in exponential coordinates of the first kind,
//! so `log` and `exp` are the identity on coordinate vectors. The product
//! `(G, ·)` uses the full bracket; the limit product `(G, *)` uses the graded
//! bracket `[[·,·]]`, which keeps only the component of `[g(i), g(j)]` lying in
//! `g(i+j)`. Both are evaluated with the Baker–Campbell–Hausdorff series
//! truncated at the step of the algebra, which is exact for nilpotent groups.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest nilpotency step with a hardcoded BCH table.
pub const MAX_STEP: usize = 4;

/// Tolerance for the Jacobi identity check at construction.
pub const JACOBI_TOL: f64 = 1e-12;

/// Which group law to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Product {
    /// The given product `·`, built from the full bracket.
    Dot,
    /// The limit product `*`, built from the graded bracket.
    Star,
}

/// Address of a basis vector `X_index^(layer)`. Both fields are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct BasisIndex {
    pub layer: usize,
    pub index: usize,
}

impl BasisIndex {
    pub fn new(layer: usize, index: usize) -> Self {
        Self { layer, index }
    }
}

impl From<[usize; 2]> for BasisIndex {
    fn from(v: [usize; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<BasisIndex> for [usize; 2] {
    fn from(b: BasisIndex) -> Self {
        [b.layer, b.index]
    }
}

/// One structure constant: `[a, b] += c · out` (and `[b, a] -= c · out`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureConstant {
    pub a: BasisIndex,
    pub b: BasisIndex,
    pub out: BasisIndex,
    pub c: f64,
}

/// Serializable description of a graded algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub brackets: Vec<StructureConstant>,
}

/// Either a named preset or an explicit algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSource {
    Preset(String),
    Explicit(AlgebraSpec),
}

impl AlgebraSource {
    pub fn build(&self) -> Result<GradedAlgebra> {
        match self {
            AlgebraSource::Preset(name) => match name.to_ascii_lowercase().as_str() {
                "heisenberg" | "h3" => Ok(GradedAlgebra::heisenberg()),
                other => Err(Error::InvalidAlgebra(format!("unknown algebra preset '{other}'"))),
            },
            AlgebraSource::Explicit(spec) => GradedAlgebra::from_spec(spec),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Term {
    i: usize,
    j: usize,
    k: usize,
    c: f64,
}

/// A nilpotent Lie algebra `g = g(1) ⊕ … ⊕ g(r)` with structure constants.
#[derive(Clone, Debug)]
pub struct GradedAlgebra {
    spec: AlgebraSpec,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    layer_of: Vec<usize>,
    full: Vec<Term>,
    graded: Vec<Term>,
}

impl PartialEq for GradedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.full == other.full
    }
}

impl GradedAlgebra {
    /// The 3-dimensional Heisenberg algebra: `[X1, X2] = X3`.
    pub fn heisenberg() -> Self {
        let spec = AlgebraSpec {
            dims: vec![2, 1],
            brackets: vec![StructureConstant {
                a: BasisIndex::new(1, 1),
                b: BasisIndex::new(1, 2),
                out: BasisIndex::new(2, 1),
                c: 1.0,
            }],
        };
        Self::from_spec(&spec).expect("heisenberg preset is valid")
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<Self> {
        let dims = spec.dims.clone();
        if dims.is_empty() {
            return Err(Error::InvalidAlgebra("dims must be nonempty".into()));
        }
        if dims.len() > MAX_STEP {
            return Err(Error::InvalidAlgebra(format!(
                "step {} exceeds the supported maximum {MAX_STEP}",
                dims.len()
            )));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidAlgebra(format!("layer {} has dimension 0", k + 1)));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let layer_of: Vec<usize> = dims
            .iter()
            .enumerate()
            .flat_map(|(k, &d)| std::iter::repeat_n(k + 1, d))
            .collect();

        let flat = |b: &BasisIndex| -> Result<usize> {
            if b.layer == 0 || b.layer > dims.len() || b.index == 0 || b.index > dims[b.layer - 1] {
                return Err(Error::InvalidAlgebra(format!(
                    "basis index [{}, {}] out of range for dims {:?}",
                    b.layer, b.index, dims
                )));
            }
            Ok(offsets[b.layer - 1] + b.index - 1)
        };

        let mut full: Vec<Term> = Vec::new();
        for sc in &spec.brackets {
            if !sc.c.is_finite() {
                return Err(Error::InvalidAlgebra("non-finite structure constant".into()));
            }
            let (a, b, k) = (flat(&sc.a)?, flat(&sc.b)?, flat(&sc.out)?);
            if a == b {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket of [{}, {}] with itself must vanish",
                    sc.a.layer, sc.a.index
                )));
            }
            let (i, j, c) = if a < b { (a, b, sc.c) } else { (b, a, -sc.c) };
            if full.iter().any(|t| t.i == i && t.j == j && t.k == k) {
                return Err(Error::InvalidAlgebra(format!(
                    "duplicate structure constant for [{:?}, {:?}] -> {:?}",
                    sc.a, sc.b, sc.out
                )));
            }
            if c != 0.0 {
                full.push(Term { i, j, k, c });
            }
        }

        let r = dims.len();
        for t in &full {
            let (li, lj, lk) = (layer_of[t.i], layer_of[t.j], layer_of[t.k]);
            if li + lj > r || lk < li + lj {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket of layers {li} and {lj} has a component in layer {lk}; grading requires layer >= {} and <= {r}",
                    li + lj
                )));
            }
        }
        let graded = full
            .iter()
            .copied()
            .filter(|t| layer_of[t.k] == layer_of[t.i] + layer_of[t.j])
            .collect();

        let alg = Self {
            spec: spec.clone(),
            dims,
            offsets,
            layer_of,
            full,
            graded,
        };
        alg.check_jacobi()?;
        Ok(alg)
    }

    fn check_jacobi(&self) -> Result<()> {
        let d = self.dim();
        let basis = |i: usize| {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            v
        };
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    let (a, b, c) = (basis(i), basis(j), basis(k));
                    let t1 = self.bracket_raw(&a, &self.bracket_raw(&b, &c, Product::Dot), Product::Dot);
                    let t2 = self.bracket_raw(&b, &self.bracket_raw(&c, &a, Product::Dot), Product::Dot);
                    let t3 = self.bracket_raw(&c, &self.bracket_raw(&a, &b, Product::Dot), Product::Dot);
                    let err = (0..d).map(|n| (t1[n] + t2[n] + t3[n]).abs()).fold(0.0, f64::max);
                    if err > JACOBI_TOL {
                        return Err(Error::InvalidAlgebra(format!(
                            "Jacobi identity fails on basis triple ({i}, {j}, {k}) by {err:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    /// Nilpotency step `r`.
    pub fn step(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension `d1 + … + dr`.
    pub fn dim(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    /// Coordinate range of layer `k` (1-based).
    pub fn layer_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k - 1]..self.offsets[k]
    }

    /// Layer (1-based) of flat coordinate `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        self.layer_of[i]
    }

    pub fn layer<'a>(&self, z: &'a [f64], k: usize) -> &'a [f64] {
        &z[self.layer_range(k)]
    }

    fn terms(&self, kind: Product) -> &[Term] {
        match kind {
            Product::Dot => &self.full,
            Product::Star => &self.graded,
        }
    }

    fn check_len(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    fn bracket_raw(&self, x: &[f64], y: &[f64], kind: Product) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.bracket_acc(x, y, kind, 1.0, &mut out);
        out
    }

    /// `out += scale · [x, y]`.
    #[inline]
    fn bracket_acc(&self, x: &[f64], y: &[f64], kind: Product, scale: f64, out: &mut [f64]) {
        for t in self.terms(kind) {
            out[t.k] += scale * t.c * (x[t.i] * y[t.j] - x[t.j] * y[t.i]);
        }
    }

    /// Full bracket `[x, y]`.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_raw(x, y, Product::Dot))
    }

    /// Graded (limit) bracket `[[x, y]]`.
    pub fn graded_bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_raw(x, y, Product::Star))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0.0; self.dim()])
    }

    pub fn workspace(&self) -> BchWorkspace {
        BchWorkspace::new(self.dim())
    }

    /// `out = log(exp(x) ∘ exp(y))` for the chosen product. `out` must not
    /// alias `x` or `y`.
    ///
    /// BCH through degree 4:
    /// `x + y + ½[x,y] + (1/12)([x,[x,y]] − [y,[x,y]]) − (1/24)[y,[x,[x,y]]]`.
    /// Terms of degree above the step vanish identically and are skipped.
    pub fn mul_into(&self, x: &[f64], y: &[f64], kind: Product, out: &mut [f64], ws: &mut BchWorkspace) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
            *o = a + b;
        }
        let r = self.step();
        if r < 2 {
            return;
        }
        ws.xy.fill(0.0);
        self.bracket_acc(x, y, kind, 1.0, &mut ws.xy);
        for (o, v) in out.iter_mut().zip(&ws.xy) {
            *o += 0.5 * v;
        }
        if r < 3 {
            return;
        }
        ws.xxy.fill(0.0);
        self.bracket_acc(x, &ws.xy, kind, 1.0, &mut ws.xxy);
        self.bracket_acc(x, &ws.xy, kind, 1.0 / 12.0, out);
        self.bracket_acc(y, &ws.xy, kind, -1.0 / 12.0, out);
        if r < 4 {
            return;
        }
        self.bracket_acc(y, &ws.xxy, kind, -1.0 / 24.0, out);
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement, kind: Product) -> GroupElement {
        assert_eq!(g.0.len(), self.dim(), "group element dimension");
        assert_eq!(h.0.len(), self.dim(), "group element dimension");
        let mut out = vec![0.0; self.dim()];
        self.mul_into(&g.0, &h.0, kind, &mut out, &mut self.workspace());
        GroupElement(out)
    }

    /// Left-to-right product of a sequence of elements.
    pub fn mul_all<'a, I>(&self, elems: I, kind: Product) -> GroupElement
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        elems
            .into_iter()
            .fold(self.identity(), |acc, g| self.mul(&acc, g, kind))
    }

    /// `exp(Z)⁻¹ = exp(−Z)`, the same for both products.
    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        GroupElement(g.0.iter().map(|v| -v).collect())
    }

    /// Dilation `τ_ε`: scales layer `k` by `ε^k`.
    pub fn dilate(&self, g: &GroupElement, eps: f64) -> GroupElement {
        let mut out = g.0.clone();
        self.dilate_in_place(&mut out, eps);
        GroupElement(out)
    }

    pub fn dilate_in_place(&self, z: &mut [f64], eps: f64) {
        assert!(eps >= 0.0, "dilation parameter must be nonnegative, got {eps}");
        let mut f = 1.0;
        for k in 1..=self.step() {
            f *= eps;
            for v in &mut z[self.layer_range(k)] {
                *v *= f;
            }
        }
    }

    /// Homogeneous norm `Σ_k ‖Z^(k)‖^{1/k}` with Euclidean layer norms.
    pub fn hom_norm(&self, g: &GroupElement) -> f64 {
        self.hom_norm_coords(&g.0)
    }

    pub fn hom_norm_coords(&self, z: &[f64]) -> f64 {
        (1..=self.step())
            .map(|k| {
                let n = self.layer(z, k).iter().map(|v| v * v).sum::<f64>().sqrt();
                n.powf(1.0 / k as f64)
            })
            .sum()
    }

    /// `‖g⁻¹ * h‖_Hom`, a left-invariant distance equivalent to the
    /// Carnot–Carathéodory metric on `(G, *)`.
    pub fn dist(&self, g: &GroupElement, h: &GroupElement) -> f64 {
        self.hom_norm(&self.mul(&self.inverse(g), h, Product::Star))
    }

    /// Coordinate-slice variant of [`dist`](Self::dist) for hot loops.
    pub fn dist_coords(&self, g: &[f64], h: &[f64], ws: &mut BchWorkspace) -> f64 {
        let mut neg = std::mem::take(&mut ws.neg);
        let mut out = std::mem::take(&mut ws.out);
        for (n, v) in neg.iter_mut().zip(g) {
            *n = -v;
        }
        self.mul_into(&neg, h, Product::Star, &mut out, ws);
        let d = self.hom_norm_coords(&out);
        ws.neg = neg;
        ws.out = out;
        d
    }
}

/// Scratch buffers for BCH evaluation.
#[derive(Clone, Debug)]
pub struct BchWorkspace {
    xy: Vec<f64>,
    xxy: Vec<f64>,
    neg: Vec<f64>,
    out: Vec<f64>,
}

impl BchWorkspace {
    pub fn new(dim: usize) -> Self {
        Self {
            xy: vec![0.0; dim],
            xxy: vec![0.0; dim],
            neg: vec![0.0; dim],
            out: vec![0.0; dim],
        }
    }
}

/// Exponential coordinates `Z` of `g = exp(Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<f64>);

impl GroupElement {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for GroupElement {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
