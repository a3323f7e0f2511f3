//! Adjacency and Laplacian spectra: closed forms for tori, a dense symmetric
//! eigensolver used as the reference oracle, power iteration, and
//! characteristic-polynomial values in sign/log-magnitude form.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::math::{self, PI};
use crate::topology::{Graph, TorusSpec};

/// Largest graph handed to the dense eigensolver or dense determinant.
pub const ORACLE_MAX_NODES: usize = 4000;

/// Eigenvalues closer than this are reported as one value with multiplicity.
pub const MULTIPLICITY_TOL: f64 = 1e-7;

/// A factor `x - λ` smaller than this in magnitude is treated as exactly zero.
pub const EXACT_ZERO_TOL: f64 = 1e-12;

/// Seed of the start vector used by [`spectral_radius_power`].
pub const POWER_ITERATION_SEED: u64 = 0x70_7275_7321;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has {n} nodes, dense oracle limit is {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Real eigenvalues sorted in descending order, optionally with an
/// orthonormal eigenvector per value (column `k` belongs to `eigenvalues[k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    basis: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues, basis: None }
    }

    /// Pairs eigenvalue `k` with column `k` of `vectors`, then sorts both.
    pub fn with_basis(eigenvalues: Vec<f64>, vectors: DMatrix<f64>) -> Self {
        assert_eq!(eigenvalues.len(), vectors.ncols(), "one eigenvector per eigenvalue");
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]).then(a.cmp(&b)));
        let sorted = order.iter().map(|&k| eigenvalues[k]).collect();
        let basis = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| vectors[(r, order[c])]);
        Self { eigenvalues: sorted, basis: Some(basis) }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> Option<&DMatrix<f64>> {
        self.basis.as_ref()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn smallest(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    /// `max |λ|`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, &v| acc.max(math::abs(v)))
    }

    pub fn trace(&self) -> f64 {
        math::pairwise_sum(&self.eigenvalues)
    }

    /// Distinct values with multiplicities. Neighbouring sorted values within
    /// `tol` of each other are chained into one cluster, represented by its mean.
    pub fn multiplicities(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut cluster_sum = 0.0;
        let mut previous: Option<f64> = None;
        for &v in &self.eigenvalues {
            match (previous, out.last_mut()) {
                (Some(p), Some(last)) if p - v <= tol => {
                    cluster_sum += v;
                    last.1 += 1;
                    last.0 = cluster_sum / last.1 as f64;
                }
                _ => {
                    cluster_sum = v;
                    out.push((v, 1));
                }
            }
            previous = Some(v);
        }
        out
    }
}

/// Value of a (possibly huge) real number as a sign and `ln |value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyEval {
    sign: i8,
    log_magnitude: f64,
}

impl PolyEval {
    pub const ZERO: Self = Self { sign: 0, log_magnitude: f64::NEG_INFINITY };
    pub const ONE: Self = Self { sign: 1, log_magnitude: 0.0 };

    /// `sign` is normalized to -1, 0 or +1.
    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), log_magnitude }
        }
    }

    pub fn from_f64(value: f64) -> Self {
        if value == 0.0 {
            Self::ZERO
        } else {
            Self::new(if value > 0.0 { 1 } else { -1 }, math::ln(math::abs(value)))
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The plain value; may be infinite when it does not fit in an `f64`.
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * math::exp(self.log_magnitude)
    }

    /// `Some(value)` when the value is representable as a finite `f64`.
    pub fn finite_value(&self) -> Option<f64> {
        let v = self.value();
        v.is_finite().then_some(v)
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.log_magnitude)
    }

    /// `None` when dividing by zero.
    pub fn checked_div(self, rhs: Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        Some(Self::new(self.sign * rhs.sign, self.log_magnitude - rhs.log_magnitude))
    }

    /// `None` for negative values.
    pub fn sqrt(self) -> Option<Self> {
        match self.sign {
            -1 => None,
            0 => Some(Self::ZERO),
            _ => Some(Self::new(1, 0.5 * self.log_magnitude)),
        }
    }

    /// `|self - reference| / |reference|`.
    pub fn relative_error(self, reference: Self) -> f64 {
        if reference.is_zero() {
            return if self.is_zero() { 0.0 } else { f64::INFINITY };
        }
        let diff = self - reference;
        if diff.is_zero() {
            0.0
        } else {
            math::exp(diff.log_magnitude - reference.log_magnitude)
        }
    }
}

impl Mul for PolyEval {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
    }
}

impl Neg for PolyEval {
    type Output = Self;

    fn neg(self) -> Self {
        Self { sign: -self.sign, ..self }
    }
}

impl Add for PolyEval {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let top = self.log_magnitude.max(rhs.log_magnitude);
        let scaled = f64::from(self.sign) * math::exp(self.log_magnitude - top)
            + f64::from(rhs.sign) * math::exp(rhs.log_magnitude - top);
        if scaled == 0.0 {
            return Self::ZERO;
        }
        let sign = if scaled > 0.0 { 1 } else { -1 };
        Self::new(sign, top + math::ln(math::abs(scaled)))
    }
}

impl Sub for PolyEval {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Multiplies factors in log space. Any factor within [`EXACT_ZERO_TOL`] of
/// zero makes the product exactly zero.
pub fn product_of_factors<I: IntoIterator<Item = f64>>(factors: I) -> PolyEval {
    let mut negatives = 0usize;
    let mut logs = Vec::new();
    for f in factors {
        if math::abs(f) <= EXACT_ZERO_TOL {
            return PolyEval::ZERO;
        }
        if f < 0.0 {
            negatives += 1;
        }
        logs.push(math::ln(math::abs(f)));
    }
    PolyEval::new(if negatives.is_multiple_of(2) { 1 } else { -1 }, math::pairwise_sum(&logs))
}

/// `2 cos(2π i / m)` for `i = 1..=m`.
fn ring_eigenvalues(m: usize) -> Vec<f64> {
    (1..=m).map(|i| 2.0 * math::cos(2.0 * PI * i as f64 / m as f64)).collect()
}

/// Sums of one ring eigenvalue per axis, indexed with axis 0 varying fastest.
fn tuple_sums(ring: &[f64], dim: usize) -> Vec<f64> {
    let mut sums = vec![0.0];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(sums.len() * ring.len());
        for &r in ring {
            next.extend(sums.iter().map(|&s| s + r));
        }
        sums = next;
    }
    sums
}

/// All `m^d` torus eigenvalues `Σ_k 2cos(2π i_k / m)`, `i_k ∈ 1..=m`,
/// in index-tuple order (unsorted).
pub fn torus_eigenvalue_list(spec: TorusSpec) -> Vec<f64> {
    tuple_sums(&ring_eigenvalues(spec.len()), spec.dim())
}

pub fn torus_eigenvalues(spec: TorusSpec) -> Spectrum {
    Spectrum::new(torus_eigenvalue_list(spec))
}

/// Laplacian spectrum of the torus: `2d - λ` over the adjacency eigenvalues.
pub fn laplacian_spectrum(spec: TorusSpec) -> Spectrum {
    let k = spec.degree() as f64;
    Spectrum::new(torus_eigenvalue_list(spec).into_iter().map(|l| k - l).collect())
}

/// Real orthonormal eigenbasis of the torus as the d-fold Kronecker product
/// of normalized ring eigenvectors (constant, cos/sin pairs, and the
/// alternating vector when `m` is even).
#[derive(Debug, Clone)]
pub struct TorusModes {
    spec: TorusSpec,
    ring_values: Vec<f64>,
    /// Row-major `m x m`: entry `(u, c)` is component `u` of ring vector `c`.
    ring_vectors: Vec<f64>,
}

impl TorusModes {
    pub fn new(spec: TorusSpec) -> Self {
        let m = spec.len();
        let mf = m as f64;
        let mut ring_values = Vec::with_capacity(m);
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(m);
        ring_values.push(2.0);
        columns.push(vec![1.0 / math::sqrt(mf); m]);
        let pair_norm = math::sqrt(2.0 / mf);
        for k in 1..m.div_ceil(2) {
            let omega = 2.0 * PI * k as f64 / mf;
            let value = 2.0 * math::cos(omega);
            ring_values.push(value);
            columns.push((0..m).map(|u| pair_norm * math::cos(omega * u as f64)).collect());
            ring_values.push(value);
            columns.push((0..m).map(|u| pair_norm * math::sin(omega * u as f64)).collect());
        }
        if m.is_multiple_of(2) {
            ring_values.push(-2.0);
            let entry = 1.0 / math::sqrt(mf);
            columns.push((0..m).map(|u| if u % 2 == 0 { entry } else { -entry }).collect());
        }
        let mut ring_vectors = vec![0.0; m * m];
        for (c, column) in columns.iter().enumerate() {
            for (u, &v) in column.iter().enumerate() {
                ring_vectors[u * m + c] = v;
            }
        }
        Self { spec, ring_values, ring_vectors }
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn mode_count(&self) -> usize {
        self.spec.node_count()
    }

    /// Eigenvalue of each mode, in mode order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        tuple_sums(&self.ring_values, self.spec.dim())
    }

    /// Component `node` of every basis vector, in mode order.
    pub fn row(&self, node: usize) -> Vec<f64> {
        let m = self.spec.len();
        let mut rest = node;
        let mut row = vec![1.0];
        for _ in 0..self.spec.dim() {
            let c = rest % m;
            rest /= m;
            let ring_row = &self.ring_vectors[c * m..(c + 1) * m];
            let mut next = Vec::with_capacity(row.len() * m);
            for &v in ring_row {
                next.extend(row.iter().map(|&r| r * v));
            }
            row = next;
        }
        row
    }

    /// `Σ_θ z_θ(i) z_θ(j) f(θ)` over all modes.
    pub fn bilinear_sum<F: Fn(f64) -> f64>(&self, i: usize, j: usize, f: F) -> f64 {
        let (ri, rj) = (self.row(i), self.row(j));
        let terms: Vec<f64> =
            self.eigenvalues().iter().zip(ri.iter().zip(&rj)).map(|(&theta, (&a, &b))| a * b * f(theta)).collect();
        math::pairwise_sum(&terms)
    }
}

/// Torus spectrum with its explicit orthonormal eigenbasis.
pub fn torus_eigenbasis(spec: TorusSpec) -> Result<Spectrum, SpectralError> {
    let n = spec.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(SpectralError::TooLarge { n, limit: ORACLE_MAX_NODES });
    }
    let modes = TorusModes::new(spec);
    let mut basis = DMatrix::zeros(n, n);
    for u in 0..n {
        for (q, v) in modes.row(u).into_iter().enumerate() {
            basis[(u, q)] = v;
        }
    }
    Ok(Spectrum::with_basis(modes.eigenvalues(), basis))
}

fn oracle_guard(g: &Graph) -> Result<(), SpectralError> {
    let n = g.node_count();
    if n == 0 {
        return Err(SpectralError::EmptyGraph);
    }
    if n > ORACLE_MAX_NODES {
        return Err(SpectralError::TooLarge { n, limit: ORACLE_MAX_NODES });
    }
    Ok(())
}

/// Full adjacency spectrum from a dense symmetric eigensolve.
pub fn dense_spectrum(g: &Graph) -> Result<Spectrum, SpectralError> {
    oracle_guard(g)?;
    let eig = SymmetricEigen::new(g.adjacency_matrix());
    Ok(Spectrum::new(eig.eigenvalues.iter().copied().collect()))
}

/// Like [`dense_spectrum`], keeping the eigenvectors.
pub fn dense_eigenbasis(g: &Graph) -> Result<Spectrum, SpectralError> {
    oracle_guard(g)?;
    let eig = SymmetricEigen::new(g.adjacency_matrix());
    Ok(Spectrum::with_basis(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

pub fn dense_laplacian_spectrum(g: &Graph) -> Result<Spectrum, SpectralError> {
    oracle_guard(g)?;
    let eig = SymmetricEigen::new(g.laplacian_matrix());
    Ok(Spectrum::new(eig.eigenvalues.iter().copied().collect()))
}

/// `det(xI - A)` by dense LU factorization.
pub fn charpoly_dense(g: &Graph, x: f64) -> Result<PolyEval, SpectralError> {
    oracle_guard(g)?;
    let n = g.node_count();
    let shifted = DMatrix::from_diagonal_element(n, n, x) - g.adjacency_matrix();
    let lu = shifted.lu();
    let perm_sign: f64 = lu.p().determinant();
    let u = lu.u();
    let diag = product_of_factors((0..n).map(|k| u[(k, k)]));
    Ok(if perm_sign < 0.0 { -diag } else { diag })
}

/// `φ(T, x) = Π (x - λ)` over the closed-form torus spectrum.
pub fn charpoly_eval_torus(spec: TorusSpec, x: f64) -> PolyEval {
    product_of_factors(torus_eigenvalue_list(spec).into_iter().map(|l| x - l))
}

/// `(max(avg_deg, sqrt(max_deg)), max_deg)`, which brackets `ρ(A)`.
pub fn degree_bounds(g: &Graph) -> (f64, f64) {
    let max = g.max_degree() as f64;
    (g.average_degree().max(math::sqrt(max)), max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub rho: f64,
    pub iterations: usize,
    pub residual: f64,
    pub seed: u64,
    /// Diagonal shift applied to `A` during the iteration.
    pub shift: f64,
}

/// Spectral radius by power iteration on `A + cI` with `c = max degree`.
///
/// The shift makes every eigenvalue of the iterated matrix nonnegative, so
/// the `±ρ` pair of a bipartite graph cannot stall convergence. The returned
/// value is the Rayleigh quotient of `A` once `‖Av - μv‖ <= tol`.
pub fn spectral_radius_power(g: &Graph, tol: f64, max_iter: usize) -> Result<PowerIteration, SpectralError> {
    let n = g.node_count();
    if n == 0 {
        return Err(SpectralError::EmptyGraph);
    }
    let shift = g.max_degree() as f64;
    if g.edge_count() == 0 {
        return Ok(PowerIteration { rho: 0.0, iterations: 0, residual: 0.0, seed: POWER_ITERATION_SEED, shift });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_ITERATION_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    normalize(&mut v);
    let mut w = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        g.apply_adjacency(&v, &mut w);
        let mu = dot(&v, &w);
        residual = math::sqrt(v.iter().zip(&w).map(|(&vi, &wi)| (wi - mu * vi) * (wi - mu * vi)).sum());
        if residual <= tol {
            return Ok(PowerIteration { rho: mu, iterations: iteration, residual, seed: POWER_ITERATION_SEED, shift });
        }
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi + shift * *vi;
        }
        normalize(&mut v);
    }
    Err(SpectralError::NoConvergence { iterations: max_iter, residual })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = math::sqrt(dot(v, v));
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Elementwise comparison of two sorted spectra; `None` on length mismatch.
pub fn max_abs_difference(a: &Spectrum, b: &Spectrum) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    Some(
        a.eigenvalues()
            .iter()
            .zip(b.eigenvalues())
            .map(|(x, y)| math::abs(x - y))
            .max_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .unwrap_or(0.0),
    )
}
