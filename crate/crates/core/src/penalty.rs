//! Packing/covering data and the exponential penalty used to drive updates.
//!
//! For a packing matrix `P̃` (already divided by the trial scale Γ) the
//! penalty is the log-sum-exp of the row loads,
//! `est(x) = ln Σ_k exp((P̃x)_k)`, which lies within `ln m` above the
//! largest load. Its gradient, the *rate* of each variable, is the
//! softmax-weighted column of `P̃`.

use crate::{Error, Result};

/// Offline packing constraints `Px <= λ`, stored dense and row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingSystem {
    rows: usize,
    cols: usize,
    coeffs: Vec<f64>,
    max_row_nnz: usize,
    max_coeff: f64,
    min_positive: f64,
}

impl PackingSystem {
    /// Builds a system from a dense row-major coefficient vector.
    pub fn new(rows: usize, cols: usize, coeffs: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Structural(format!(
                "packing system needs at least one row and column, got {rows}x{cols}"
            )));
        }
        if coeffs.len() != rows * cols {
            return Err(Error::Structural(format!(
                "expected {} packing coefficients, got {}",
                rows * cols,
                coeffs.len()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::Domain(format!(
                "packing coefficients must be finite and nonnegative, found {bad}"
            )));
        }
        let mut max_coeff = 0.0f64;
        let mut min_positive = f64::INFINITY;
        for &c in coeffs.iter().filter(|c| **c > 0.0) {
            max_coeff = max_coeff.max(c);
            min_positive = min_positive.min(c);
        }
        if max_coeff == 0.0 {
            return Err(Error::Structural("packing matrix is all zero".into()));
        }
        let max_row_nnz = coeffs
            .chunks(cols)
            .map(|row| row.iter().filter(|c| **c > 0.0).count())
            .max()
            .unwrap_or(0);
        Ok(Self {
            rows,
            cols,
            coeffs,
            max_row_nnz,
            max_coeff,
            min_positive,
        })
    }

    /// Builds a system from `(row, col, coefficient)` triplets; repeated
    /// positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut coeffs = vec![0.0; rows * cols];
        for &(k, j, p) in triplets {
            if k >= rows || j >= cols {
                return Err(Error::Structural(format!(
                    "triplet ({k}, {j}) outside a {rows}x{cols} packing system"
                )));
            }
            coeffs[k * cols + j] += p;
        }
        Self::new(rows, cols, coeffs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.coeffs[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.coeffs[row * self.cols..(row + 1) * self.cols]
    }

    /// Largest number of nonzeros in any packing row.
    pub fn max_row_nnz(&self) -> usize {
        self.max_row_nnz
    }

    pub fn max_coeff(&self) -> f64 {
        self.max_coeff
    }

    /// Ratio of the largest to the smallest strictly positive coefficient.
    pub fn rho(&self) -> f64 {
        self.max_coeff / self.min_positive
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0.0)
            .map(move |(idx, &c)| (idx / self.cols, idx % self.cols, c))
    }

    /// True when variable `col` appears in no packing row.
    pub fn column_is_zero(&self, col: usize) -> bool {
        (0..self.rows).all(|k| self.get(k, col) == 0.0)
    }

    /// The system divided by `gamma`.
    pub fn scaled(&self, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {gamma}")));
        }
        Self::new(
            self.rows,
            self.cols,
            self.coeffs.iter().map(|c| c / gamma).collect(),
        )
    }

    /// Row loads `Px`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(self
            .coeffs
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(p, v)| p * v).sum())
            .collect())
    }

    /// `P^T z`.
    pub fn apply_transpose(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.rows {
            return Err(Error::Structural(format!(
                "expected {} packing duals, got {}",
                self.rows,
                z.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (row, &zk) in self.coeffs.chunks(self.cols).zip(z) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p * zk;
            }
        }
        Ok(out)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::Structural(format!(
                "vector has length {}, packing system has {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok(())
    }
}

/// One online covering constraint `Σ_j c_ij x_j >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringRow {
    entries: Vec<(usize, f64)>,
}

impl CoveringRow {
    /// Entries are `(column, coefficient)`; coefficients must be strictly
    /// positive and columns distinct.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Structural("covering row has no entries".into()));
        }
        if let Some((j, c)) = entries.iter().find(|(_, c)| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Domain(format!(
                "covering coefficient for column {j} must be positive, got {c}"
            )));
        }
        entries.sort_by_key(|(j, _)| *j);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Structural("covering row repeats a column".into()));
        }
        Ok(Self { entries })
    }

    /// A row with unit coefficients on `cols`.
    pub fn unit(cols: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(cols.into_iter().map(|j| (j, 1.0)).collect())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_coeff(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn min_coeff(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max_col(&self) -> usize {
        self.entries.last().map(|e| e.0).unwrap_or(0)
    }

    /// `Σ_j c_ij x_j`.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

/// Ratio of the largest to the smallest covering coefficient over `rows`.
pub fn kappa<'a>(rows: impl IntoIterator<Item = &'a CoveringRow>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
    for row in rows {
        hi = hi.max(row.max_coeff());
        lo = lo.min(row.min_coeff());
    }
    if hi == 0.0 {
        1.0
    } else {
        hi / lo
    }
}

/// Step constant `μ = 1 + 1/(3 ln(em))` for `m` packing rows.
pub fn step_constant(m: usize) -> f64 {
    1.0 + 1.0 / (3.0 * (std::f64::consts::E * m as f64).ln())
}

/// `σ = e² ln(μ d² ρ κ)`.
pub fn dual_scale(mu: f64, d: usize, rho: f64, kappa: f64) -> f64 {
    let e2 = std::f64::consts::E.powi(2);
    e2 * (mu * (d as f64).powi(2) * rho * kappa).ln()
}

/// Log-sum-exp of the row loads at one point, with the normalised weights
/// `exp(load_k) / Σ exp(load)` that make up the gradient.
#[derive(Clone, Debug)]
pub struct Penalty {
    pub loads: Vec<f64>,
    pub weights: Vec<f64>,
    pub value: f64,
    pub max_load: f64,
}

impl Penalty {
    /// Evaluates the penalty; the largest load is subtracted before
    /// exponentiating.
    pub fn evaluate(p: &PackingSystem, x: &[f64]) -> Result<Self> {
        let loads = p.apply(x)?;
        let max_load = loads.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut weights: Vec<f64> = loads.iter().map(|l| (l - max_load).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            value: max_load + total.ln(),
            loads,
            weights,
            max_load,
        })
    }

    /// Gradient of the penalty with respect to every variable.
    pub fn rates(&self, p: &PackingSystem) -> Vec<f64> {
        p.apply_transpose(&self.weights)
            .expect("weights have one entry per packing row")
    }
}

/// `λ(x) = max_k (Px)_k`.
pub fn violation(p: &PackingSystem, x: &[f64]) -> Result<f64> {
    Ok(p.apply(x)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `est(x) = ln Σ_k exp((Px)_k)`.
pub fn smooth_max(p: &PackingSystem, x: &[f64]) -> Result<f64> {
    Ok(Penalty::evaluate(p, x)?.value)
}

/// `rate_j = Σ_k p_kj exp((Px)_k) / Σ_k exp((Px)_k)`.
pub fn rates(p: &PackingSystem, x: &[f64]) -> Result<Vec<f64>> {
    Ok(Penalty::evaluate(p, x)?.rates(p))
}

/// Step size `ε = (μ-1) min_j rate_j / c_ij` over the row's variables with a
/// positive rate. Variables with zero rate (columns absent from every
/// packing row) are skipped.
pub fn step_size(row: &CoveringRow, rates: &[f64], mu: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for &(j, c) in row.entries() {
        let r = *rates.get(j).ok_or_else(|| {
            Error::Structural(format!("covering column {j} has no rate"))
        })?;
        if r > 0.0 {
            best = best.min(r / c);
        }
    }
    if best.is_finite() {
        Ok((mu - 1.0) * best)
    } else {
        Err(Error::Domain(
            "covering row shares no variable with positive rate".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(m: usize) -> PackingSystem {
        let mut c = vec![0.0; m * m];
        for k in 0..m {
            c[k * m + k] = 1.0;
        }
        PackingSystem::new(m, m, c).unwrap()
    }

    #[test]
    fn smooth_max_of_zero_is_ln_m() {
        let est = smooth_max(&identity(2), &[0.0, 0.0]).unwrap();
        assert!((est - 2f64.ln()).abs() < 1e-15);
        assert!((est - 0.693147).abs() < 1e-6);
    }

    #[test]
    fn single_row_smooth_max_is_exact() {
        let p = PackingSystem::new(1, 1, vec![1.0]).unwrap();
        for t in [0.0, 0.5, 3.0, 700.0, 1e5] {
            assert_eq!(smooth_max(&p, &[t]).unwrap(), t);
            assert_eq!(rates(&p, &[t]).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn smooth_max_survives_large_loads() {
        // exp(1000) overflows without the shift
        let est = smooth_max(&identity(2), &[1000.0, 1000.0]).unwrap();
        assert!((est - (1000.0 + 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn equal_weights_give_half_rate() {
        let p = PackingSystem::new(2, 1, vec![1.0, 0.0]).unwrap();
        assert!((rates(&p, &[0.0]).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn violation_examples() {
        let p = identity(2);
        assert_eq!(violation(&p, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(violation(&p, &[1.0, 2.0]).unwrap(), 2.0);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let p = identity(2);
        assert!(matches!(smooth_max(&p, &[1.0]), Err(Error::Structural(_))));
        assert!(matches!(rates(&p, &[1.0, 2.0, 3.0]), Err(Error::Structural(_))));
    }

    #[test]
    fn step_size_examples() {
        let row = CoveringRow::new(vec![(0, 1.0)]).unwrap();
        assert!((step_size(&row, &[0.5], 1.2).unwrap() - 0.1).abs() < 1e-12);

        let row = CoveringRow::new(vec![(0, 1.0), (1, 2.0)]).unwrap();
        let eps = step_size(&row, &[1.0, 1.0], 1.3).unwrap();
        assert!((eps - 0.3 / 2.0).abs() < 1e-15);
        let worst = row
            .entries()
            .iter()
            .map(|&(j, c)| eps * c / [1.0, 1.0][j])
            .fold(0.0, f64::max);
        assert!((worst - 0.3).abs() < 1e-15);
    }

    #[test]
    fn step_size_without_rates_is_domain_error() {
        let row = CoveringRow::new(vec![(0, 1.0), (1, 1.0)]).unwrap();
        assert!(matches!(step_size(&row, &[0.0, 0.0], 1.2), Err(Error::Domain(_))));
    }

    #[test]
    fn packing_statistics() {
        let p = PackingSystem::from_triplets(2, 3, &[(0, 0, 2.0), (0, 2, 0.5), (1, 1, 1.0)]).unwrap();
        assert_eq!(p.max_row_nnz(), 2);
        assert_eq!(p.rho(), 4.0);
        assert!(!p.column_is_zero(1));
        assert!(PackingSystem::new(1, 2, vec![0.0, 0.0]).is_err());
        assert!(PackingSystem::new(1, 2, vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn covering_row_validation() {
        assert!(CoveringRow::new(vec![]).is_err());
        assert!(CoveringRow::new(vec![(0, 0.0)]).is_err());
        assert!(CoveringRow::new(vec![(1, 1.0), (1, 2.0)]).is_err());
        let row = CoveringRow::new(vec![(3, 2.0), (1, 1.0)]).unwrap();
        assert_eq!(row.entries()[0].0, 1);
        assert_eq!(row.dot(&[0.0, 1.0, 0.0, 0.5]), 2.0);
    }

    #[test]
    fn step_constant_for_two_rows() {
        assert!((step_constant(2) - 1.196_872).abs() < 1e-5);
    }
}
