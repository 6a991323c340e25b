//! Monte Carlo samplers for dilation-scaled random walks on the covering
//! graph and for the limiting diffusion on `(G, *)`, plus CSV/JSON storage
//! of the resulting path samples.
//!
//! Every path draws from its own ChaCha8 stream selected by the path index,
//! so results do not depend on the number of worker threads.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::RealizationFamily;
use crate::liegroup::{AlgebraSpec, GradedAlgebra, Product};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const WALK_STREAM: u64 = 0x7761_6c6b;
const SDE_STREAM: u64 = 0x7364_6500;
const GRID_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Walk,
    Sde,
}

/// Everything about a sample set except the samples themselves. Written as
/// the JSON sidecar of a CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub version: String,
    pub scheme: Scheme,
    pub algebra: AlgebraSpec,
    pub times: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    /// Walk length; the scale is `eps = n^{-1/2}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Euler steps on `[0, 1]` for the diffusion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_vertex: Option<String>,
    #[serde(default)]
    pub subtract_start: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
}

/// Group-valued samples indexed by (path, grid time), stored path-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSampleSet {
    pub header: SampleHeader,
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl PathSampleSet {
    pub fn new(header: SampleHeader, data: Vec<f64>) -> Result<Self> {
        let dims = header.algebra.dims.clone();
        let dim: usize = dims.iter().sum();
        let want = header.paths * header.times.len() * dim;
        if data.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: data.len() });
        }
        check_increasing(&header.times)?;
        Ok(Self { header, dims, data })
    }

    pub fn times(&self) -> &[f64] {
        &self.header.times
    }

    pub fn num_paths(&self) -> usize {
        self.header.paths
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Index of grid time `t`, matched to within `1e-9`.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.header
            .times
            .iter()
            .position(|s| (s - t).abs() <= GRID_TOL)
            .ok_or(Error::TimeNotOnGrid { t })
    }

    /// Coordinates of path `path` at grid index `ti`.
    pub fn get(&self, path: usize, ti: usize) -> &[f64] {
        let d = self.dim();
        let start = (path * self.header.times.len() + ti) * d;
        &self.data[start..start + d]
    }

    /// Flat coordinate `coord` of every path at grid index `ti`.
    pub fn column(&self, ti: usize, coord: usize) -> Vec<f64> {
        (0..self.num_paths()).map(|p| self.get(p, ti)[coord]).collect()
    }

    /// Flat coordinate range of layer `k` (1-based).
    pub fn layer_range(&self, k: usize) -> Result<std::ops::Range<usize>> {
        if k == 0 || k > self.dims.len() {
            return Err(Error::InvalidParameter(format!(
                "layer {k} outside 1..={}",
                self.dims.len()
            )));
        }
        let start: usize = self.dims[..k - 1].iter().sum();
        Ok(start..start + self.dims[k - 1])
    }

    pub fn algebra(&self) -> Result<GradedAlgebra> {
        GradedAlgebra::from_spec(&self.header.algebra)
    }
}

fn check_increasing(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    for t in times {
        if !(t.is_finite() && (0.0..=1.0 + GRID_TOL).contains(t)) {
            return Err(Error::InvalidParameter(format!("grid time {t} outside [0, 1]")));
        }
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("grid {times:?} is not strictly increasing")));
    }
    Ok(())
}

/// Step indices `t·steps` of a grid, which must be exact multiples of
/// `1/steps`.
pub fn grid_steps(times: &[f64], steps: u64) -> Result<Vec<u64>> {
    check_increasing(times)?;
    times
        .iter()
        .map(|&t| {
            let k = (t * steps as f64).round();
            if (t * steps as f64 - k).abs() > GRID_TOL * steps as f64 || k < 0.0 || k > steps as f64 {
                Err(Error::TimeNotOnGrid { t })
            } else {
                Ok(k as u64)
            }
        })
        .collect()
}

/// Parse a grid given as a comma-separated list of times, or as `k/m` for
/// all multiples `0, 1/m, …, 1` (with `m` a positive integer after the slash).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let s = spec.trim();
    if let Some(m) = s.strip_prefix("k/") {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::Parse(format!("grid '{spec}': expected k/<integer>")))?;
        if m == 0 {
            return Err(Error::Parse(format!("grid '{spec}': denominator must be positive")));
        }
        return Ok((0..=m).map(|k| k as f64 / m as f64).collect());
    }
    s.split(',')
        .map(|p| {
            let p = p.trim();
            if let Some((a, b)) = p.split_once('/') {
                let a: f64 = a.trim().parse().map_err(|_| Error::Parse(format!("grid entry '{p}'")))?;
                let b: f64 = b.trim().parse().map_err(|_| Error::Parse(format!("grid entry '{p}'")))?;
                Ok(a / b)
            } else {
                p.parse().map_err(|_| Error::Parse(format!("grid entry '{p}'")))
            }
        })
        .collect()
}

fn path_rng(seed: u64, domain: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.rotate_left(32));
    rng.set_stream(path as u64);
    rng
}

/// Fill one row of `row_len` values per path, in parallel.
fn run_paths<F>(paths: usize, row_len: usize, workers: Option<usize>, fill: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let mut data = vec![0.0; paths * row_len];
    if row_len == 0 {
        return Ok(data);
    }
    let work = |data: &mut Vec<f64>| {
        data.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(p, row)| fill(p, row));
    };
    match workers {
        Some(0) => return Err(Error::InvalidParameter("workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| work(&mut data)),
        None => work(&mut data),
    }
    Ok(data)
}

/// Settings for [`sample_walk`].
#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    pub n: u64,
    pub times: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    pub start_vertex: usize,
    /// Left-translate by `Φ(x*)⁻¹` so every walk starts at the identity.
    pub subtract_start: bool,
    pub workers: Option<usize>,
}

impl WalkConfig {
    pub fn new(n: u64, times: Vec<f64>, paths: usize, seed: u64) -> Self {
        Self {
            n,
            times,
            paths,
            seed,
            start_vertex: 0,
            subtract_start: false,
            workers: None,
        }
    }
}

/// Run `n` steps of the `p_ε` walk, `ε = n^{-1/2}`, from the start vertex,
/// accumulating `Φ(w_k)` through `·`-products of the increments `dΦ(e)`.
/// Records `τ_ε(Φ(w_{nt}))` at each grid time `t`.
pub fn sample_walk(family: &RealizationFamily, cfg: &WalkConfig) -> Result<PathSampleSet> {
    if cfg.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let graph = family.graph();
    if cfg.start_vertex >= graph.num_vertices() {
        return Err(Error::InvalidParameter(format!("start vertex {} out of range", cfg.start_vertex)));
    }
    let steps_at = grid_steps(&cfg.times, cfg.n)?;
    let eps = (cfg.n as f64).powf(-0.5);
    let kernel = family.kernel(eps)?;
    let phi = family.realization(eps)?;
    let alg = graph.algebra();
    let d = alg.dim();
    let incs = phi.increments(graph);

    // Cumulative out-edge tables for inverse-CDF sampling.
    let tables: Vec<Vec<(f64, usize)>> = (0..graph.num_vertices())
        .map(|x| {
            let mut acc = 0.0;
            graph
                .out_edges(x)
                .iter()
                .filter(|&&e| kernel.p(e) > 0.0)
                .map(|&e| {
                    acc += kernel.p(e);
                    (acc, e)
                })
                .collect()
        })
        .collect();
    let start = if cfg.subtract_start {
        alg.identity()
    } else {
        phi.position(cfg.start_vertex).clone()
    };
    let row_len = cfg.times.len() * d;
    let last_step = *steps_at.last().expect("grid is nonempty");

    let data = run_paths(cfg.paths, row_len, cfg.workers, |path, row| {
        let mut rng = path_rng(cfg.seed, WALK_STREAM, path);
        let mut ws = alg.workspace();
        let mut pos = start.coords().to_vec();
        let mut next = vec![0.0; d];
        let mut x = cfg.start_vertex;
        let mut slot = 0;
        for k in 0..=last_step {
            while slot < steps_at.len() && steps_at[slot] == k {
                let out = &mut row[slot * d..(slot + 1) * d];
                out.copy_from_slice(&pos);
                alg.dilate_in_place(out, eps);
                slot += 1;
            }
            if k == last_step {
                break;
            }
            let table = &tables[x];
            let u: f64 = rng.random();
            let e = table
                .iter()
                .find(|(c, _)| u < *c)
                .map_or(table[table.len() - 1].1, |&(_, e)| e);
            alg.mul_into(&pos, incs[e].coords(), Product::Dot, &mut next, &mut ws);
            std::mem::swap(&mut pos, &mut next);
            x = graph.terminus(e);
        }
    })?;

    let header = SampleHeader {
        version: VERSION.into(),
        scheme: Scheme::Walk,
        algebra: alg.spec().clone(),
        times: cfg.times.clone(),
        paths: cfg.paths,
        seed: cfg.seed,
        n: Some(cfg.n),
        eps: Some(eps),
        steps: None,
        start_vertex: Some(graph.name(cfg.start_vertex).to_string()),
        subtract_start: cfg.subtract_start,
        frame: None,
        drift: None,
    };
    PathSampleSet::new(header, data)
}

/// Settings for [`sample_diffusion`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionConfig {
    pub steps: usize,
    pub times: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl DiffusionConfig {
    pub fn new(steps: usize, times: Vec<f64>, paths: usize, seed: u64) -> Self {
        Self {
            steps,
            times,
            paths,
            seed,
            workers: None,
        }
    }
}

fn check_frame(alg: &GradedAlgebra, frame: &[Vec<f64>], drift: &[f64]) -> Result<usize> {
    let d1 = alg.layer_range(1).len();
    if drift.len() != d1 {
        return Err(Error::DimensionMismatch { expected: d1, got: drift.len() });
    }
    for v in frame {
        if v.len() != d1 {
            return Err(Error::DimensionMismatch { expected: d1, got: v.len() });
        }
    }
    if frame.is_empty() {
        return Err(Error::InvalidParameter("diffusion frame is empty".into()));
    }
    Ok(d1)
}

fn sde_header(
    alg: &GradedAlgebra,
    frame: &[Vec<f64>],
    drift: &[f64],
    cfg: &DiffusionConfig,
    steps: usize,
) -> SampleHeader {
    SampleHeader {
        version: VERSION.into(),
        scheme: Scheme::Sde,
        algebra: alg.spec().clone(),
        times: cfg.times.clone(),
        paths: cfg.paths,
        seed: cfg.seed,
        n: None,
        eps: None,
        steps: Some(steps),
        start_vertex: None,
        subtract_start: false,
        frame: Some(frame.to_vec()),
        drift: Some(drift.to_vec()),
    }
}

/// Exponential Euler scheme on `(G, *)` from the identity:
/// `Y ← Y * exp(Σ_i V_i ΔB_i + ρ h)` with `h = 1/steps`.
pub fn sample_diffusion(
    alg: &GradedAlgebra,
    frame: &[Vec<f64>],
    drift: &[f64],
    cfg: &DiffusionConfig,
) -> Result<PathSampleSet> {
    let mut out = sample_diffusion_coupled(alg, frame, drift, cfg, 1)?;
    Ok(out.pop().expect("one level"))
}

/// Run the scheme at `cfg.steps` and, on the same Brownian path, at
/// `cfg.steps / factor` (coarse increments are sums of `factor` fine ones).
/// Returns `[fine, coarse]`; with `factor == 1` only `[fine]`.
pub fn sample_diffusion_coupled(
    alg: &GradedAlgebra,
    frame: &[Vec<f64>],
    drift: &[f64],
    cfg: &DiffusionConfig,
    factor: usize,
) -> Result<Vec<PathSampleSet>> {
    check_frame(alg, frame, drift)?;
    if cfg.steps == 0 || factor == 0 || !cfg.steps.is_multiple_of(factor) {
        return Err(Error::InvalidParameter(format!(
            "steps {} must be a positive multiple of the refinement factor {factor}",
            cfg.steps
        )));
    }
    let coarse_steps = cfg.steps / factor;
    let fine_at = grid_steps(&cfg.times, cfg.steps as u64)?;
    let coarse_at = if factor > 1 {
        grid_steps(&cfg.times, coarse_steps as u64)?
    } else {
        Vec::new()
    };
    let d = alg.dim();
    let r1 = alg.layer_range(1);
    let h = 1.0 / cfg.steps as f64;
    let sqrt_h = h.sqrt();
    let nt = cfg.times.len();
    let levels = if factor > 1 { 2 } else { 1 };
    let row_len = levels * nt * d;
    let last = *fine_at.last().expect("grid is nonempty");

    let data = run_paths(cfg.paths, row_len, cfg.workers, |path, row| {
        let mut rng = path_rng(cfg.seed, SDE_STREAM, path);
        let mut ws = alg.workspace();
        let (fine_row, coarse_row) = row.split_at_mut(nt * d);
        let mut y = vec![0.0; d];
        let mut yc = vec![0.0; d];
        let mut next = vec![0.0; d];
        let mut step = vec![0.0; d];
        let mut coarse_step = vec![0.0; d];
        let mut db = vec![0.0; frame.len()];
        let (mut slot, mut cslot) = (0, 0);
        for k in 0..=last {
            while slot < nt && fine_at[slot] == k {
                fine_row[slot * d..(slot + 1) * d].copy_from_slice(&y);
                slot += 1;
            }
            if levels == 2 && k % factor as u64 == 0 {
                let kc = k / factor as u64;
                while cslot < nt && coarse_at[cslot] == kc {
                    coarse_row[cslot * d..(cslot + 1) * d].copy_from_slice(&yc);
                    cslot += 1;
                }
            }
            if k == last {
                break;
            }
            for b in db.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *b = z * sqrt_h;
            }
            for (i, s) in step[r1.clone()].iter_mut().enumerate() {
                *s = drift[i] * h + frame.iter().zip(&db).map(|(v, b)| v[i] * b).sum::<f64>();
            }
            alg.mul_into(&y, &step, Product::Star, &mut next, &mut ws);
            std::mem::swap(&mut y, &mut next);
            if levels == 2 {
                for (c, s) in coarse_step.iter_mut().zip(&step) {
                    *c += s;
                }
                if (k + 1) % factor as u64 == 0 {
                    alg.mul_into(&yc, &coarse_step, Product::Star, &mut next, &mut ws);
                    std::mem::swap(&mut yc, &mut next);
                    coarse_step.fill(0.0);
                }
            }
        }
    })?;

    let mut fine = Vec::with_capacity(cfg.paths * nt * d);
    let mut coarse = Vec::with_capacity(if levels == 2 { cfg.paths * nt * d } else { 0 });
    for row in data.chunks(row_len) {
        fine.extend_from_slice(&row[..nt * d]);
        coarse.extend_from_slice(&row[nt * d..]);
    }
    let mut out = vec![PathSampleSet::new(sde_header(alg, frame, drift, cfg, cfg.steps), fine)?];
    if levels == 2 {
        out.push(PathSampleSet::new(sde_header(alg, frame, drift, cfg, coarse_steps), coarse)?);
    }
    Ok(out)
}

/// Sample mean and standard error of a scalar function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

/// Estimate `E[f(X_t)]` over the paths of `samples`.
pub fn semigroup_expectation<F>(samples: &PathSampleSet, t: f64, f: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64,
{
    let n = samples.num_paths();
    if n == 0 {
        return Err(Error::InsufficientSamples("sample set has no paths".into()));
    }
    let ti = samples.time_index(t)?;
    let vals: Vec<f64> = (0..n).map(|p| f(samples.get(p, ti))).collect();
    let mean = crate::stats::pairwise_sum(&vals) / n as f64;
    let se = if n > 1 {
        let dev: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
        (crate::stats::pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { mean, se, count: n })
}

/// Column names `g{k}_{i}` for the graded coordinates.
pub fn coordinate_names(dims: &[usize]) -> Vec<String> {
    dims.iter()
        .enumerate()
        .flat_map(|(k, &d)| (1..=d).map(move |i| format!("g{}_{}", k + 1, i)))
        .collect()
}

/// Path of the JSON sidecar for a CSV file: `samples.csv` → `samples.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Write `path_id, t, g1_1, …` rows and the JSON sidecar.
pub fn write_samples(samples: &PathSampleSet, csv_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(csv_path)?));
    let mut head = vec!["path_id".to_string(), "t".to_string()];
    head.extend(coordinate_names(samples.dims()));
    w.write_record(&head)?;
    let mut rec = Vec::with_capacity(head.len());
    for p in 0..samples.num_paths() {
        for (ti, t) in samples.times().iter().enumerate() {
            rec.clear();
            rec.push(p.to_string());
            rec.push(t.to_string());
            rec.extend(samples.get(p, ti).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    let mut side = BufWriter::new(File::create(sidecar_path(csv_path))?);
    serde_json::to_writer_pretty(&mut side, &samples.header)?;
    side.write_all(b"\n")?;
    side.flush()?;
    Ok(())
}

/// Read a CSV written by [`write_samples`] together with its sidecar.
pub fn read_samples(csv_path: &Path) -> Result<PathSampleSet> {
    let side = sidecar_path(csv_path);
    let header: SampleHeader = serde_json::from_reader(BufReader::new(File::open(&side).map_err(|e| {
        Error::Parse(format!("cannot open sidecar {}: {e}", side.display()))
    })?))?;
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(csv_path)?));
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut want = vec!["path_id".to_string(), "t".to_string()];
    want.extend(coordinate_names(&header.algebra.dims));
    if names != want {
        return Err(Error::Parse(format!(
            "{}: columns {names:?} do not match the sidecar algebra (expected {want:?})",
            csv_path.display()
        )));
    }
    let nt = header.times.len();
    let d: usize = header.algebra.dims.iter().sum();
    let mut data = Vec::with_capacity(header.paths * nt * d);
    for (row_idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let (p, ti) = (row_idx / nt.max(1), row_idx % nt.max(1));
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{}: bad number '{s}' in row {}", csv_path.display(), row_idx + 2)))
        };
        let pid: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad path_id in row {}", row_idx + 2)))?;
        let t = parse(&rec[1])?;
        if pid != p || ti >= nt || (t - header.times[ti]).abs() > GRID_TOL {
            return Err(Error::Parse(format!(
                "{}: row {} is (path {pid}, t {t}), expected (path {p}, t {})",
                csv_path.display(),
                row_idx + 2,
                header.times.get(ti).copied().unwrap_or(f64::NAN)
            )));
        }
        for s in rec.iter().skip(2) {
            data.push(parse(s)?);
        }
    }
    PathSampleSet::new(header, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_hexagonal_heisenberg, HexParams};
    use crate::harmonic::Gauge;

    fn family(p: &HexParams) -> RealizationFamily {
        let (g, k) = build_hexagonal_heisenberg(p).unwrap();
        RealizationFamily::new(g, &k, Gauge::default()).unwrap()
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.5, 1").unwrap(), vec![0.5, 1.0]);
        assert_eq!(parse_grid("1/4,1").unwrap(), vec![0.25, 1.0]);
        assert_eq!(parse_grid("k/4").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("a").is_err());
        assert!(matches!(grid_steps(&[0.3], 4), Err(Error::TimeNotOnGrid { .. })));
        assert_eq!(grid_steps(&[0.25, 1.0], 4).unwrap(), vec![1, 4]);
        assert!(grid_steps(&[1.0, 0.5], 4).is_err());
    }

    #[test]
    fn one_step_walk() {
        let fam = family(&HexParams::new(0.5, 0.3, 0.2, 0.2, 0.3, 0.5).unwrap());
        let s = sample_walk(&fam, &WalkConfig::new(1, vec![0.0, 1.0], 1, 7)).unwrap();
        let phi = fam.realization(1.0).unwrap();
        let g = fam.graph();
        let alg = g.algebra();
        assert_eq!(s.get(0, 0), phi.position(0).coords());
        let candidates: Vec<_> = g
            .out_edges(0)
            .iter()
            .map(|&e| alg.mul(phi.position(0), &phi.increment(g, e), Product::Dot))
            .collect();
        assert!(candidates.iter().any(|c| c.coords() == s.get(0, 1)));
    }

    #[test]
    fn walk_is_reproducible_across_workers() {
        let fam = family(&HexParams::new(0.5, 0.3, 0.2, 0.2, 0.3, 0.5).unwrap());
        let mut cfg = WalkConfig::new(64, vec![0.5, 1.0], 37, 11);
        cfg.workers = Some(1);
        let a = sample_walk(&fam, &cfg).unwrap();
        cfg.workers = Some(4);
        let b = sample_walk(&fam, &cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 12;
        assert_ne!(a.data(), sample_walk(&fam, &cfg).unwrap().data());
    }

    #[test]
    fn subtract_start_begins_at_identity() {
        let fam = family(&HexParams::new(0.5, 0.3, 0.2, 0.2, 0.3, 0.5).unwrap());
        let mut cfg = WalkConfig::new(16, vec![0.0, 1.0], 3, 1);
        cfg.subtract_start = true;
        let s = sample_walk(&fam, &cfg).unwrap();
        for p in 0..3 {
            assert_eq!(s.get(p, 0), &[0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn coupled_diffusion_levels_agree_at_coarse_resolution() {
        let alg = GradedAlgebra::heisenberg();
        let frame = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let cfg = DiffusionConfig::new(8, vec![0.5, 1.0], 5, 3);
        let sets = sample_diffusion_coupled(&alg, &frame, &[0.0, 0.0], &cfg, 2).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[1].header.steps, Some(4));
        for p in 0..5 {
            for ti in 0..2 {
                let (f, c) = (sets[0].get(p, ti), sets[1].get(p, ti));
                // Layer 1 is the Brownian path itself at both resolutions.
                assert!((f[0] - c[0]).abs() < 1e-12 && (f[1] - c[1]).abs() < 1e-12);
            }
        }
        let single = sample_diffusion(&alg, &frame, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(single.data(), sets[0].data());
        assert!(sample_diffusion_coupled(&alg, &frame, &[0.0, 0.0], &cfg, 3).is_err());
    }

    #[test]
    fn drift_only_flow() {
        let alg = GradedAlgebra::heisenberg();
        let frame = vec![vec![1e-9, 0.0], vec![0.0, 1e-9]];
        let cfg = DiffusionConfig::new(16, vec![0.5, 1.0], 2, 3);
        let s = sample_diffusion(&alg, &frame, &[0.4, -0.2], &cfg).unwrap();
        let y = s.get(1, 1);
        assert!((y[0] - 0.4).abs() < 1e-7 && (y[1] + 0.2).abs() < 1e-7 && y[2].abs() < 1e-7);
    }

    #[test]
    fn constant_expectation() {
        let alg = GradedAlgebra::heisenberg();
        let frame = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let s = sample_diffusion(&alg, &frame, &[0.0, 0.0], &DiffusionConfig::new(4, vec![1.0], 10, 0)).unwrap();
        let e = semigroup_expectation(&s, 1.0, |_| 1.0).unwrap();
        assert_eq!((e.mean, e.se), (1.0, 0.0));
        assert!(matches!(semigroup_expectation(&s, 0.5, |_| 1.0), Err(Error::TimeNotOnGrid { .. })));
    }

    #[test]
    fn csv_roundtrip() {
        let fam = family(&HexParams::uniform());
        let s = sample_walk(&fam, &WalkConfig::new(4, vec![0.5, 1.0], 2, 5)).unwrap();
        let dir = std::env::temp_dir().join(format!("nilwalk-sim-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("walk.csv");
        write_samples(&s, &path).unwrap();
        let back = read_samples(&path).unwrap();
        assert_eq!(back, s);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("path_id,t,g1_1,g1_2,g2_1\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
