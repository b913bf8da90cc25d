//! Locally weighted polynomial regression with tricube weights.

use crate::error::{Error, Result};

/// Tricube kernel `(1 - u³)³` on `[0, 1)`, zero beyond.
pub fn tricube_weight(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::domain(format!("tricube weight needs u >= 0, got {u}")));
    }
    Ok(tricube(u))
}

#[inline]
fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let v = 1.0 - u * u * u;
        v * v * v
    }
}

fn neighbourhood_size(n: usize, span: f64, degree: usize) -> Result<usize> {
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::param(format!("loess span must lie in (0, 1], got {span}")));
    }
    if degree > MAX_DEGREE {
        return Err(Error::param(format!("loess degree must be 0, 1 or 2, got {degree}")));
    }
    if n < degree + 1 {
        return Err(Error::param(format!(
            "loess of degree {degree} needs at least {} observations, got {n}",
            degree + 1
        )));
    }
    Ok(((span * n as f64).ceil() as usize).clamp(1, n))
}

/// Permutation sorting `xs` ascending; rejects non-finite inputs.
fn sort_permutation(xs: &[f64]) -> Result<Vec<usize>> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Estimator("loess regressor contains non-finite values".into()));
    }
    let mut perm: Vec<usize> = (0..xs.len()).collect();
    perm.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    Ok(perm)
}

/// Locates the `k` nearest sorted points to `x`.
///
/// Returns the half-open index range `[lo, hi)` and the `k`-th smallest
/// distance. The range is widened to every point tied at that distance so the
/// result does not depend on how ties were ordered.
fn neighbourhood(xs: &[f64], x: f64, k: usize) -> (usize, usize, f64) {
    let n = xs.len();
    let pos = xs.partition_point(|&v| v < x);
    let (mut lo, mut hi) = (pos, pos);
    let mut h = 0.0;
    for _ in 0..k {
        let left = (lo > 0).then(|| x - xs[lo - 1]);
        let right = (hi < n).then(|| xs[hi] - x);
        match (left, right) {
            (Some(l), Some(r)) if l <= r => {
                lo -= 1;
                h = l;
            }
            (_, Some(r)) => {
                hi += 1;
                h = r;
            }
            (Some(l), None) => {
                lo -= 1;
                h = l;
            }
            (None, None) => break,
        }
    }
    while lo > 0 && x - xs[lo - 1] <= h {
        lo -= 1;
    }
    while hi < n && xs[hi] - x <= h {
        hi += 1;
    }
    (lo, hi, h)
}

const MAX_DEGREE: usize = 2;

/// Solves the `(d+1)×(d+1)` moment system by Gaussian elimination.
/// Returns `None` when a pivot collapses relative to `scale`.
fn solve_moments(s: &[f64; 2 * MAX_DEGREE + 1], rhs: &[f64], d: usize, scale: f64) -> Option<f64> {
    let m = d + 1;
    let mut a = [[0.0; MAX_DEGREE + 2]; MAX_DEGREE + 1];
    for r in 0..m {
        a[r][..m].copy_from_slice(&s[r..r + m]);
        a[r][m] = rhs[r];
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..=m {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut sol = [0.0; MAX_DEGREE + 1];
    for r in (0..m).rev() {
        let mut v = a[r][m];
        for c in r + 1..m {
            v -= a[r][c] * sol[c];
        }
        sol[r] = v / a[r][r];
    }
    Some(sol[0])
}

/// Local polynomial fit at `x` for several responses sharing the same weights.
///
/// `xs` must be sorted; each response is aligned with `xs`.
fn local_fit(xs: &[f64], responses: &[&[f64]], x: f64, k: usize, degree: usize, out: &mut [f64]) {
    let (lo, hi, h) = neighbourhood(xs, x, k);
    let scale = if h > 0.0 { h } else { 1.0 };

    let mut s = [0.0; 2 * MAX_DEGREE + 1];
    let mut rhs = vec![[0.0; MAX_DEGREE + 1]; responses.len()];
    let mut distinct = 0usize;
    let mut last_x = f64::NAN;
    for i in lo..hi {
        let d = (xs[i] - x).abs();
        let w = if h > 0.0 {
            tricube(d / h)
        } else if d == 0.0 {
            1.0
        } else {
            0.0
        };
        if w <= 0.0 {
            continue;
        }
        if xs[i] != last_x {
            distinct += 1;
            last_x = xs[i];
        }
        let u = (xs[i] - x) / scale;
        let mut p = w;
        for slot in s.iter_mut().take(2 * degree + 1) {
            *slot += p;
            p *= u;
        }
        for (acc, ys) in rhs.iter_mut().zip(responses) {
            let mut p = w * ys[i];
            for slot in acc.iter_mut().take(degree + 1) {
                *slot += p;
                p *= u;
            }
        }
    }

    if distinct == 0 {
        // every weight vanished: average the nearest points
        let cnt = (hi - lo) as f64;
        for (o, ys) in out.iter_mut().zip(responses) {
            *o = ys[lo..hi].iter().sum::<f64>() / cnt;
        }
        return;
    }

    let start = degree.min(distinct - 1);
    for (o, acc) in out.iter_mut().zip(&rhs) {
        let mut value = None;
        for d in (0..=start).rev() {
            value = if d == 0 {
                Some(acc[0] / s[0])
            } else {
                solve_moments(&s, acc, d, s[0])
            };
            if value.is_some() {
                break;
            }
        }
        *o = value.unwrap_or(acc[0] / s[0]);
    }
}

/// A LOESS smoother over a fixed training sample.
#[derive(Debug, Clone)]
pub struct LoessModel {
    xs: Vec<f64>,
    ys: Vec<f64>,
    span: f64,
    degree: usize,
    k: usize,
}

impl LoessModel {
    pub fn new(xs: &[f64], ys: &[f64], span: f64, degree: usize) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::param("loess inputs differ in length"));
        }
        let k = neighbourhood_size(xs.len(), span, degree)?;
        let perm = sort_permutation(xs)?;
        Ok(LoessModel {
            xs: perm.iter().map(|&i| xs[i]).collect(),
            ys: perm.iter().map(|&i| ys[i]).collect(),
            span,
            degree,
            k,
        })
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of neighbours `ceil(span * n)`.
    pub fn neighbours(&self) -> usize {
        self.k
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut out = [0.0];
        local_fit(&self.xs, &[&self.ys], x, self.k, self.degree, &mut out);
        out[0]
    }

    /// Evaluates at `x` clamped into the training range.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let lo = self.xs[0];
        let hi = self.xs[self.xs.len() - 1];
        self.eval(x.clamp(lo, hi))
    }
}

/// Piecewise-linear interpolant through LOESS values at a set of vertices.
/// Flat outside the vertex range.
#[derive(Debug, Clone, PartialEq)]
pub struct LoessSurface {
    vertices: Vec<f64>,
    values: Vec<f64>,
}

impl LoessSurface {
    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        if x <= v[0] {
            return self.values[0];
        }
        if x >= v[n - 1] {
            return self.values[n - 1];
        }
        let j = v.partition_point(|&a| a <= x);
        let (x0, x1) = (v[j - 1], v[j]);
        let (y0, y1) = (self.values[j - 1], self.values[j]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Fits one LOESS surface per response on the shared regressor `xs`.
///
/// The smoother is evaluated exactly at up to `max_vertices` points placed at
/// sample quantiles of `xs` (all distinct values when `max_vertices` is 0 or
/// at least their number) and interpolated linearly in between.
pub fn fit_surfaces(
    xs: &[f64],
    responses: &[Vec<f64>],
    span: f64,
    degree: usize,
    max_vertices: usize,
) -> Result<Vec<LoessSurface>> {
    if responses.iter().any(|r| r.len() != xs.len()) {
        return Err(Error::param("loess responses differ in length from the regressor"));
    }
    let n = xs.len();
    let k = neighbourhood_size(n, span, degree)?;
    let perm = sort_permutation(xs)?;
    let sx: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
    let sorted: Vec<Vec<f64>> = responses.iter().map(|r| perm.iter().map(|&i| r[i]).collect()).collect();
    let refs: Vec<&[f64]> = sorted.iter().map(|r| r.as_slice()).collect();

    let mut distinct = sx.clone();
    distinct.dedup();
    let vertices = if max_vertices == 0 || distinct.len() <= max_vertices {
        distinct
    } else {
        let g = max_vertices.max(2);
        let mut v: Vec<f64> = (0..g)
            .map(|i| sx[((i as f64) * (n - 1) as f64 / (g - 1) as f64).round() as usize])
            .collect();
        v.dedup();
        v
    };

    let mut values = vec![Vec::with_capacity(vertices.len()); responses.len()];
    let mut out = vec![0.0; responses.len()];
    for &x in &vertices {
        local_fit(&sx, &refs, x, k, degree, &mut out);
        for (col, &o) in values.iter_mut().zip(&out) {
            if !o.is_finite() {
                return Err(Error::Estimator(format!("loess produced a non-finite value at x={x}")));
            }
            col.push(o);
        }
    }
    Ok(values
        .into_iter()
        .map(|values| LoessSurface {
            vertices: vertices.clone(),
            values,
        })
        .collect())
}
