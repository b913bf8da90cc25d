use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A basis function of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisFn {
    Constant,
    Power(u32),
}

impl BasisFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            BasisFn::Constant => 1.0,
            BasisFn::Power(k) => x.powi(k as i32),
        }
    }
}

/// Ordered set of basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    functions: Vec<BasisFn>,
}

impl BasisSpec {
    pub fn new(functions: Vec<BasisFn>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::param("basis needs at least one function"));
        }
        Ok(BasisSpec { functions })
    }

    /// `{1, x}`.
    pub fn linear() -> Self {
        Self::polynomial(1)
    }

    /// `{1, x, ..., x^degree}`.
    pub fn polynomial(degree: u32) -> Self {
        let mut functions = vec![BasisFn::Constant];
        functions.extend((1..=degree).map(BasisFn::Power));
        BasisSpec { functions }
    }

    pub fn functions(&self) -> &[BasisFn] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Least-squares predictor `x ↦ Σ c_j φ_j(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    basis: BasisSpec,
    coefficients: Vec<f64>,
    active: Vec<bool>,
}

impl LinearFit {
    /// Coefficients in basis order; dropped columns carry 0.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Which basis functions survived the collinearity screen.
    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.basis
            .functions()
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| c * f.eval(x))
            .sum()
    }
}

const COLLINEAR_TOL: f64 = 1e-10;

/// Regress-now least squares of `ys` on `basis(xs)`.
///
/// Columns that are numerically collinear with earlier ones are dropped and
/// the reduced basis is fitted; dropped coefficients are zero.
pub fn regress_now(xs: &[f64], ys: &[f64], basis: &BasisSpec) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::param(format!(
            "regression inputs differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.is_empty() {
        return Err(Error::param("regression needs at least one observation"));
    }
    let n = xs.len();
    let columns: Vec<DVector<f64>> = basis
        .functions()
        .iter()
        .map(|f| DVector::from_iterator(n, xs.iter().map(|&x| f.eval(x))))
        .collect();

    // modified Gram-Schmidt screen for collinear columns
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    let mut active = vec![false; columns.len()];
    for (j, col) in columns.iter().enumerate() {
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            continue;
        }
        let mut v = col.clone();
        for q in &ortho {
            let proj = q.dot(&v);
            v.axpy(-proj, q, 1.0);
        }
        let rest = v.norm();
        if rest > COLLINEAR_TOL * norm {
            ortho.push(v / rest);
            active[j] = true;
        }
    }

    let kept: Vec<usize> = (0..columns.len()).filter(|&j| active[j]).collect();
    let mut coefficients = vec![0.0; columns.len()];
    if !kept.is_empty() {
        let design = DMatrix::from_fn(n, kept.len(), |i, c| columns[kept[c]][i]);
        let rhs = DVector::from_column_slice(ys);
        let (q, r) = design.qr().unpack();
        let qtb = q.tr_mul(&rhs);
        let sol = r
            .solve_upper_triangular(&qtb)
            .ok_or_else(|| Error::Estimator("singular least-squares system".into()))?;
        for (c, &j) in kept.iter().enumerate() {
            coefficients[j] = sol[c];
        }
    }
    Ok(LinearFit {
        basis: basis.clone(),
        coefficients,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64 * 0.7 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        let fit = regress_now(&xs, &ys, &BasisSpec::linear()).unwrap();
        assert!((fit.coefficients()[0] - 3.0).abs() < 1e-12);
        assert!((fit.coefficients()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_response() {
        let xs = [0.1, 0.5, 0.9, 1.4];
        let fit = regress_now(&xs, &[5.0; 4], &BasisSpec::linear()).unwrap();
        assert!((fit.coefficients()[0] - 5.0).abs() < 1e-12);
        assert!(fit.coefficients()[1].abs() < 1e-12);
    }

    #[test]
    fn constant_regressor_drops_slope() {
        let xs = [1.0; 5];
        let ys = [1.0, 2.0, 3.0, 4.0, 10.0];
        let fit = regress_now(&xs, &ys, &BasisSpec::linear()).unwrap();
        assert_eq!(fit.active(), &[true, false]);
        assert!((fit.coefficients()[0] - 4.0).abs() < 1e-12);
        assert_eq!(fit.coefficients()[1], 0.0);
    }

    /// Normal equations `(XᵀX) c = Xᵀy` for `{1, x}` solved by Cramer's rule.
    fn normal_equations_oracle(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        ((sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det)
    }

    #[test]
    fn random_sample_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let xs: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..3.0)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| 0.3 - 1.7 * x + rng.random_range(-1.0..1.0)).collect();
            let fit = regress_now(&xs, &ys, &BasisSpec::linear()).unwrap();
            let (a, b) = normal_equations_oracle(&xs, &ys);
            let c = fit.coefficients();
            assert!((c[0] - a).abs() <= 1e-10 * a.abs().max(1.0));
            assert!((c[1] - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn predictor_invariant_to_sample_order() {
        let xs = [0.3, 1.2, -0.4, 2.2, 0.9, 1.7];
        let ys = [1.0, 0.2, 3.1, -0.5, 0.8, 0.1];
        let fit = regress_now(&xs, &ys, &BasisSpec::polynomial(2)).unwrap();
        let mut idx: Vec<usize> = (0..6).collect();
        idx.reverse();
        idx.swap(1, 4);
        let xr: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let yr: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
        let fit2 = regress_now(&xr, &yr, &BasisSpec::polynomial(2)).unwrap();
        for x in [-1.0, 0.0, 0.5, 3.0] {
            assert!((fit.predict(x) - fit2.predict(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(regress_now(&[1.0, 2.0], &[1.0], &BasisSpec::linear()).is_err());
        assert!(BasisSpec::new(vec![]).is_err());
    }
}
