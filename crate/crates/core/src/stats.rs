//! Moments, two-sample Kolmogorov–Smirnov distances and moment-scaling
//! exponent fits over path samples.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::{coordinate_names, PathSampleSet, SampleHeader, VERSION};

/// Default constant `c` in the KS flag threshold `c·√((Na+Nb)/(Na·Nb))`,
/// the asymptotic 1% level.
pub const KS_C_1PCT: f64 = 1.63;

/// Summation by recursive halving; the result does not depend on how the
/// input was produced, only on its order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean, unbiased covariance and standard errors of the mean for one
/// layer at one grid time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerMoments {
    pub layer: usize,
    pub t: f64,
    pub count: usize,
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

pub fn layer_moments(samples: &PathSampleSet, layer: usize, t: f64) -> Result<LayerMoments> {
    let n = samples.num_paths();
    if n < 2 {
        return Err(Error::InsufficientSamples(format!("need at least 2 paths, have {n}")));
    }
    let ti = samples.time_index(t)?;
    let range = samples.layer_range(layer)?;
    let cols: Vec<Vec<f64>> = range.clone().map(|c| samples.column(ti, c)).collect();
    let mean: Vec<f64> = cols.iter().map(|c| pairwise_sum(c) / n as f64).collect();
    let d = cols.len();
    let mut cov = vec![vec![0.0; d]; d];
    let mut buf = vec![0.0; n];
    for i in 0..d {
        for j in 0..=i {
            for (b, (x, y)) in buf.iter_mut().zip(cols[i].iter().zip(&cols[j])) {
                *b = (x - mean[i]) * (y - mean[j]);
            }
            let v = pairwise_sum(&buf) / (n - 1) as f64;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    let mean_se = (0..d).map(|i| (cov[i][i] / n as f64).sqrt()).collect();
    Ok(LayerMoments {
        layer,
        t,
        count: n,
        mean,
        mean_se,
        covariance: cov,
    })
}

/// Express a layer-1 covariance given in `X` coordinates in the frame whose
/// columns are the `V_i` (`frame[i]` = `V_i`): `F⁻¹ Σ F⁻ᵀ`.
pub fn frame_covariance(cov: &[Vec<f64>], frame: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = cov.len();
    if frame.len() != d || frame.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: frame.len() });
    }
    let f = DMatrix::from_fn(d, d, |i, j| frame[j][i]);
    let finv = f.try_inverse().ok_or_else(|| Error::Singular("frame matrix".into()))?;
    let s = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    let out = &finv * s * finv.transpose();
    Ok(out.row_iter().map(|r| r.iter().copied().collect()).collect())
}

/// Coordinates of `v` in the frame, `F⁻¹ v`.
pub fn frame_coordinates(v: &[f64], frame: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = v.len();
    let f = DMatrix::from_fn(d, d, |i, j| frame[j][i]);
    let c = f
        .lu()
        .solve(&DVector::from_column_slice(v))
        .ok_or_else(|| Error::Singular("frame matrix".into()))?;
    Ok(c.iter().copied().collect())
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) − F_b(x)|`.
/// Returns 0 if either sample is empty.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `c·√((Na+Nb)/(Na·Nb))`.
pub fn ks_threshold(na: usize, nb: usize, c: f64) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    c * ((na + nb) / (na * nb)).sqrt()
}

/// Least-squares fit of `log E[dist(Y_s, Y_t)^power]` against `log(t − s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub power: f64,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// 95% interval from the t distribution on `points − 2` degrees of freedom.
    pub slope_ci95: [f64; 2],
    /// `(gap, moment)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
    /// Largest gaps excluded to reduce boundary bias.
    pub dropped_gaps: Vec<f64>,
}

fn t_quantile_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
        2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    match df {
        0 => f64::INFINITY,
        1..=30 => TABLE[df - 1],
        _ => 1.96,
    }
}

/// Fit the moment-scaling exponent from `(s, t)` pairs on the sample grid.
/// Pairs with equal gaps are pooled; the `drop_largest` largest gaps are
/// excluded and at least three distinct gaps must remain.
pub fn moment_exponent_fit(
    samples: &PathSampleSet,
    pairs: &[(f64, f64)],
    power: f64,
    drop_largest: usize,
) -> Result<ExponentFit> {
    let n = samples.num_paths();
    if n == 0 {
        return Err(Error::InsufficientSamples("sample set has no paths".into()));
    }
    let alg = samples.algebra()?;
    // (gap, sum of per-pair moments, number of pairs)
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    let mut ws = alg.workspace();
    let mut buf = vec![0.0; n];
    for &(s, t) in pairs {
        if !(t > s) {
            return Err(Error::DegenerateGaps(format!("pair ({s}, {t}) has a non-positive gap")));
        }
        let (si, ti) = (samples.time_index(s)?, samples.time_index(t)?);
        for (p, b) in buf.iter_mut().enumerate() {
            *b = alg.dist_coords(samples.get(p, si), samples.get(p, ti), &mut ws).powf(power);
        }
        let moment = pairwise_sum(&buf) / n as f64;
        let gap = samples.times()[ti] - samples.times()[si];
        match groups.iter_mut().find(|g| (g.0 - gap).abs() <= 1e-9 * gap.max(1.0)) {
            Some(g) => {
                g.1 += moment;
                g.2 += 1;
            }
            None => groups.push((gap, moment, 1)),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let keep = groups.len().saturating_sub(drop_largest);
    if keep < 3 {
        return Err(Error::DegenerateGaps(format!(
            "{} distinct gaps, {} left after dropping the {drop_largest} largest; need 3",
            groups.len(),
            keep
        )));
    }
    let dropped_gaps = groups[keep..].iter().map(|g| g.0).collect();
    let points: Vec<(f64, f64)> = groups[..keep].iter().map(|g| (g.0, g.1 / g.2 as f64)).collect();
    if let Some(&(g, _)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(Error::DegenerateGaps(format!("moment at gap {g} is zero or non-finite")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, slope_se) = ols(&xs, &ys);
    let half = t_quantile_975(points.len() - 2) * slope_se;
    Ok(ExponentFit {
        power,
        slope,
        intercept,
        slope_se,
        slope_ci95: [slope - half, slope + half],
        points,
        dropped_gaps,
    })
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, se(b))`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let se = if xs.len() > 2 {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (b, a, se)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub t: f64,
    pub coordinate: String,
    pub distance: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerComparison {
    pub a: LayerMoments,
    pub b: LayerMoments,
    /// `(mean_a − mean_b) / √(se_a² + se_b²)` per coordinate.
    pub mean_z: Vec<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub ks_c: f64,
    pub max_mean_z: f64,
    /// Fit the moment exponent of this power on both sample sets, using all
    /// grid pairs and dropping the two largest gaps.
    pub fit_power: Option<f64>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            ks_c: KS_C_1PCT,
            max_mean_z: 4.0,
            fit_power: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub version: String,
    pub a: SampleHeader,
    pub b: SampleHeader,
    pub options: CompareOptions,
    pub times: Vec<f64>,
    pub layers: Vec<LayerComparison>,
    pub ks: Vec<KsResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_a: Option<ExponentFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_b: Option<ExponentFit>,
    pub pass: bool,
}

fn common_times(a: &PathSampleSet, b: &PathSampleSet) -> Vec<f64> {
    a.times()
        .iter()
        .copied()
        .filter(|&t| b.time_index(t).is_ok())
        .collect()
}

fn all_pairs(times: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &s) in times.iter().enumerate() {
        for &t in &times[i + 1..] {
            out.push((s, t));
        }
    }
    out
}

/// Compare two sample sets over the algebra they share: per-layer moments,
/// KS distances per coordinate at every common grid time, and optional
/// exponent fits.
pub fn compare(a: &PathSampleSet, b: &PathSampleSet, opts: &CompareOptions) -> Result<ComparisonReport> {
    if a.header.algebra != b.header.algebra {
        return Err(Error::InvalidParameter(format!(
            "sample sets use different algebras: {:?} vs {:?}",
            a.header.algebra, b.header.algebra
        )));
    }
    let times = common_times(a, b);
    if times.is_empty() {
        return Err(Error::InvalidParameter("sample sets share no grid times".into()));
    }
    let names = coordinate_names(a.dims());
    let mut layers = Vec::new();
    let mut ks = Vec::new();
    for &t in &times {
        for k in 1..=a.dims().len() {
            let ma = layer_moments(a, k, t)?;
            let mb = layer_moments(b, k, t)?;
            let mean_z: Vec<f64> = (0..ma.mean.len())
                .map(|i| {
                    let se = (ma.mean_se[i].powi(2) + mb.mean_se[i].powi(2)).sqrt();
                    let diff = ma.mean[i] - mb.mean[i];
                    if se > 0.0 {
                        diff / se
                    } else if diff == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let pass = mean_z.iter().all(|z| z.abs() <= opts.max_mean_z);
            layers.push(LayerComparison { a: ma, b: mb, mean_z, pass });
        }
        let (ta, tb) = (a.time_index(t)?, b.time_index(t)?);
        let threshold = ks_threshold(a.num_paths(), b.num_paths(), opts.ks_c);
        for (c, name) in names.iter().enumerate() {
            let distance = ks_distance(&a.column(ta, c), &b.column(tb, c));
            ks.push(KsResult {
                t,
                coordinate: name.clone(),
                distance,
                threshold,
                pass: distance <= threshold,
            });
        }
    }
    let (fit_a, fit_b) = match opts.fit_power {
        Some(p) => {
            let pairs = all_pairs(&times);
            (
                Some(moment_exponent_fit(a, &pairs, p, 2)?),
                Some(moment_exponent_fit(b, &pairs, p, 2)?),
            )
        }
        None => (None, None),
    };
    let pass = layers.iter().all(|l| l.pass) && ks.iter().all(|k| k.pass);
    Ok(ComparisonReport {
        version: VERSION.into(),
        a: a.header.clone(),
        b: b.header.clone(),
        options: opts.clone(),
        times,
        layers,
        ks,
        fit_a,
        fit_b,
        pass,
    })
}

/// Write empirical CDF points `t, coordinate, sample, x, F` for every
/// coordinate of both sample sets at their common grid times.
pub fn write_ecdf(a: &PathSampleSet, b: &PathSampleSet, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["t", "coordinate", "sample", "x", "F"])?;
    let names = coordinate_names(a.dims());
    for t in common_times(a, b) {
        for (c, name) in names.iter().enumerate() {
            for (label, set) in [("a", a), ("b", b)] {
                let mut col = set.column(set.time_index(t)?, c);
                col.sort_by(f64::total_cmp);
                let n = col.len() as f64;
                for (i, x) in col.iter().enumerate() {
                    w.write_record(&[
                        t.to_string(),
                        name.clone(),
                        label.to_string(),
                        x.to_string(),
                        ((i + 1) as f64 / n).to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::GradedAlgebra;
    use crate::simulate::Scheme;

    fn set(times: Vec<f64>, data: Vec<f64>, paths: usize) -> PathSampleSet {
        let header = SampleHeader {
            version: VERSION.into(),
            scheme: Scheme::Sde,
            algebra: GradedAlgebra::heisenberg().spec().clone(),
            times,
            paths,
            seed: 0,
            n: None,
            eps: None,
            steps: None,
            start_vertex: None,
            subtract_start: false,
            frame: None,
            drift: None,
        };
        PathSampleSet::new(header, data).unwrap()
    }

    #[test]
    fn ks_hand_values() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[5.0, 6.0, 7.0]), 1.0);
        assert!((ks_distance(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ks_distance(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]), 1.0 / 3.0);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&xs), 249750.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn constant_samples_have_zero_covariance() {
        let s = set(vec![1.0], [0.5, -1.0, 2.0].repeat(4), 4);
        let m = layer_moments(&s, 1, 1.0).unwrap();
        assert_eq!(m.mean, vec![0.5, -1.0]);
        assert_eq!(m.covariance, vec![vec![0.0; 2]; 2]);
        assert_eq!(m.mean_se, vec![0.0, 0.0]);
        let one = set(vec![1.0], vec![0.0; 3], 1);
        assert!(matches!(layer_moments(&one, 1, 1.0), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn linear_path_fit_is_exact() {
        // Y_t = t·X1 on a dyadic grid: dist(Y_s, Y_t) = t − s.
        let times: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
        let data: Vec<f64> = times.iter().flat_map(|&t| [t, 0.0, 0.0]).collect();
        let s = set(times, data, 1);
        let pairs: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|k| (0.0, k / 16.0))
            .collect();
        let fit = moment_exponent_fit(&s, &pairs, 4.0, 2).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-12);
        assert_eq!(fit.points.len(), 3);
        assert_eq!(fit.dropped_gaps, vec![0.5, 1.0]);
        assert!(matches!(
            moment_exponent_fit(&s, &pairs[..4], 4.0, 2),
            Err(Error::DegenerateGaps(_))
        ));
    }

    #[test]
    fn compare_self_is_zero() {
        let data: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let s = set(vec![0.5, 1.0], data, 5);
        let r = compare(&s, &s, &CompareOptions::default()).unwrap();
        assert!(r.pass);
        assert!(r.ks.iter().all(|k| k.distance == 0.0));
        assert!(r.layers.iter().all(|l| l.mean_z.iter().all(|z| *z == 0.0)));
    }

    #[test]
    fn frame_transform() {
        let frame = vec![vec![2.0, 0.0], vec![1.0, 1.0]];
        let cov = vec![vec![5.0, 1.0], vec![1.0, 1.0]];
        // F Fᵀ = cov, so the frame covariance is the identity.
        let c = frame_covariance(&cov, &frame).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert_eq!(frame_coordinates(&[3.0, 1.0], &frame).unwrap(), vec![1.0, 1.0]);
    }
}
