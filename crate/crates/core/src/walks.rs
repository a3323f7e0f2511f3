//! Walk counts on tori and on the infinite square lattice, resolvent entries
//! `[(xI - A)^{-1}]_{ij}` and truncated walk generating functions.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::math::{self, PI};
use crate::spectral::{torus_eigenvalue_list, Spectrum, TorusModes};
use crate::topology::{build_torus, Graph, TopologyError, TorusSpec};

/// Largest distance from an integer tolerated when rounding a floating
/// walk-count sum.
pub const ROUNDING_GUARD: f64 = 1e-6;

/// `x` must be at least this far from every eigenvalue for resolvent entries.
pub const POLE_GUARD: f64 = 1e-9;

/// Above 2^53 consecutive integers are no longer representable in `f64`.
const F64_EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("walk count of length {length} lost precision (rounding residual {residual:e}); use the exact count")]
    PrecisionExhausted { length: usize, residual: f64 },
    #[error("x = {x} lies within {POLE_GUARD:e} of eigenvalue {eigenvalue}")]
    PoleProximity { x: f64, eigenvalue: f64 },
    #[error("spectrum has no eigenbasis")]
    MissingBasis,
    #[error("node {node} out of range for a spectrum of size {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("series diverges: |x| = {x} is not below the convergence radius {radius}")]
    Divergent { x: f64, radius: f64 },
}

/// Number of walks of a given length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WalkCount {
    pub length: usize,
    pub count: BigUint,
}

fn round_count(sum: f64, length: usize) -> Result<BigUint, WalkError> {
    let rounded = math::round(sum);
    let residual = math::abs(sum - rounded);
    if !sum.is_finite() || math::abs(sum) >= F64_EXACT_LIMIT || residual > ROUNDING_GUARD || rounded < 0.0 {
        let residual = if residual.is_finite() && residual > ROUNDING_GUARD { residual } else { f64::INFINITY };
        return Err(WalkError::PrecisionExhausted { length, residual });
    }
    Ok(BigUint::from(rounded as u64))
}

/// Closed walks of length `length` from any node of the torus, from the trace
/// formula `(1/m^d) Σ λ^ℓ`. The torus is vertex-transitive, so every node
/// has the same count.
pub fn torus_closed_walks(spec: TorusSpec, length: usize) -> Result<WalkCount, WalkError> {
    let powers: Vec<f64> = torus_eigenvalue_list(spec).into_iter().map(|l| math::powi(l, length)).collect();
    let sum = math::pairwise_sum(&powers) / spec.node_count() as f64;
    Ok(WalkCount { length, count: round_count(sum, length)? })
}

/// `(A^ℓ)_{ij}` on the torus from its orthonormal eigenbasis:
/// `Σ_θ z_θ(i) θ^ℓ z_θ(j)`.
pub fn torus_walks_between(spec: TorusSpec, i: usize, j: usize, length: usize) -> Result<WalkCount, WalkError> {
    check_torus_node(spec, i)?;
    check_torus_node(spec, j)?;
    let sum = TorusModes::new(spec).bilinear_sum(i, j, |theta| math::powi(theta, length));
    Ok(WalkCount { length, count: round_count(sum, length)? })
}

/// Torus closed-walk count with the exact counter as fallback once the
/// floating trace formula runs out of precision.
pub fn torus_closed_walks_or_exact(spec: TorusSpec, length: usize) -> WalkCount {
    torus_closed_walks(spec, length).unwrap_or_else(|_| {
        let counts = walk_counts_exact(&build_torus(spec), 0, length);
        WalkCount { length, count: counts[0].clone() }
    })
}

/// Torus point-to-point count with the exact counter as fallback.
pub fn torus_walks_between_or_exact(
    spec: TorusSpec,
    i: usize,
    j: usize,
    length: usize,
) -> Result<WalkCount, WalkError> {
    match torus_walks_between(spec, i, j, length) {
        Err(WalkError::PrecisionExhausted { .. }) => {
            let counts = walk_counts_exact(&build_torus(spec), i, length);
            Ok(WalkCount { length, count: counts[j].clone() })
        }
        other => other,
    }
}

/// Exact number of walks of length `length` from `from` to every node,
/// by propagating big-integer counts along edges.
pub fn walk_counts_exact(g: &Graph, from: usize, length: usize) -> Vec<BigUint> {
    let n = g.node_count();
    let mut current = vec![BigUint::zero(); n];
    current[from] = BigUint::one();
    for _ in 0..length {
        current = (0..n).map(|v| g.neighbors(v).iter().fold(BigUint::zero(), |acc, &u| acc + &current[u])).collect();
    }
    current
}

fn check_torus_node(spec: TorusSpec, node: usize) -> Result<(), WalkError> {
    let n = spec.node_count();
    if node >= n {
        return Err(TopologyError::NodeOutOfRange { node, n }.into());
    }
    Ok(())
}

fn factorials(up_to: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(up_to + 1);
    out.push(BigUint::one());
    for k in 1..=up_to {
        let next = &out[k - 1] * BigUint::from(k);
        out.push(next);
    }
    out
}

/// `C(2ℓ, ℓ)`.
pub fn central_binomial(half_length: usize) -> BigUint {
    let f = factorials(2 * half_length);
    &f[2 * half_length] / (&f[half_length] * &f[half_length])
}

/// Closed walks of length `2ℓ` on the square lattice: `C(2ℓ, ℓ)^2`.
/// Odd closed walks do not exist on the lattice.
pub fn lattice_closed_walks(half_length: usize) -> WalkCount {
    let c = central_binomial(half_length);
    WalkCount { length: 2 * half_length, count: &c * &c }
}

/// The same count as a sum over the number of vertical step pairs:
/// `Σ_i (2ℓ)! / (i! i! (ℓ-i)! (ℓ-i)!)`.
pub fn lattice_closed_walks_multinomial(half_length: usize) -> BigUint {
    let f = factorials(2 * half_length);
    (0..=half_length)
        .map(|i| {
            let j = half_length - i;
            &f[2 * half_length] / (&f[i] * &f[i] * &f[j] * &f[j])
        })
        .sum()
}

/// Lattice walk count to a target point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeWalks {
    pub count: BigUint,
    /// Set when `ℓ + a + b` is odd; the count is then zero.
    pub parity_mismatch: bool,
}

/// Walks of `length` unit steps on `Z^2` from the origin to `(a, b)`.
///
/// With `n_U = i` up-steps the remaining step counts are forced
/// (`n_D = i - b`, `n_R = (ℓ+a+b)/2 - i`, `n_L = (ℓ+b-a)/2 - i`), giving the
/// sum of multinomials `ℓ! / (n_U! n_D! n_R! n_L!)`. Terms with a negative
/// step count contribute nothing.
pub fn lattice_walks_to(a: i64, b: i64, length: usize) -> LatticeWalks {
    let (a, b) = (a.unsigned_abs() as usize, b.unsigned_abs() as usize);
    if (length + a + b) % 2 == 1 {
        return LatticeWalks { count: BigUint::zero(), parity_mismatch: true };
    }
    if a + b > length {
        return LatticeWalks { count: BigUint::zero(), parity_mismatch: false };
    }
    let f = factorials(length);
    let right_total = (length + a + b) / 2;
    let left_total = (length + b - a) / 2;
    let count = (b..=length)
        .filter(|&i| i <= left_total)
        .map(|i| &f[length] / (&f[i] * &f[i - b] * &f[right_total - i] * &f[left_total - i]))
        .sum();
    LatticeWalks { count, parity_mismatch: false }
}

/// One entry of `(xI - A)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventEntry {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub value: f64,
}

fn check_pole(eigenvalues: &[f64], x: f64) -> Result<(), WalkError> {
    match eigenvalues.iter().find(|&&l| math::abs(x - l) < POLE_GUARD) {
        Some(&eigenvalue) => Err(WalkError::PoleProximity { x, eigenvalue }),
        None => Ok(()),
    }
}

/// `Σ_θ u_θ(i) u_θ(j) / (x - θ)` over a spectrum with an orthonormal basis.
pub fn resolvent_entry(spectrum: &Spectrum, i: usize, j: usize, x: f64) -> Result<ResolventEntry, WalkError> {
    let basis = spectrum.basis().ok_or(WalkError::MissingBasis)?;
    let n = basis.nrows();
    for node in [i, j] {
        if node >= n {
            return Err(WalkError::NodeOutOfRange { node, n });
        }
    }
    check_pole(spectrum.eigenvalues(), x)?;
    let terms: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(c, &theta)| basis[(i, c)] * basis[(j, c)] / (x - theta))
        .collect();
    Ok(ResolventEntry { i, j, x, value: math::pairwise_sum(&terms) })
}

/// Torus resolvent entry from the Fourier form
/// `(1/m^d) Σ_k cos(2π k·(c_i - c_j)/m) / (x - λ_k)`, without building a basis.
pub fn torus_resolvent(spec: TorusSpec, i: usize, j: usize, x: f64) -> Result<f64, WalkError> {
    let eigenvalues = torus_eigenvalue_list(spec);
    check_pole(&eigenvalues, x)?;
    Ok(torus_resolvent_unguarded(spec, &eigenvalues, i, j, x)?)
}

/// [`torus_resolvent`] without the pole guard; only exact hits are fatal
/// (they produce infinities). Shared with the deletion evaluators, which
/// cancel the poles against `φ(T, x)`.
pub(crate) fn torus_resolvent_unguarded(
    spec: TorusSpec,
    eigenvalues: &[f64],
    i: usize,
    j: usize,
    x: f64,
) -> Result<f64, TopologyError> {
    let (ci, cj) = (spec.coord(i)?, spec.coord(j)?);
    let m = spec.len();
    // phase of mode (k_1..k_d) is Σ k_a Δ_a; build cosines per axis and combine
    let mut phases = vec![0.0];
    for (a, b) in ci.axes().iter().zip(cj.axes()) {
        let delta = (*a as i64 - *b as i64).rem_euclid(m as i64) as f64;
        let mut next = Vec::with_capacity(phases.len() * m);
        for k in 1..=m {
            let step = 2.0 * PI * (k as f64) * delta / m as f64;
            next.extend(phases.iter().map(|&p| p + step));
        }
        phases = next;
    }
    let terms: Vec<f64> = phases.iter().zip(eigenvalues).map(|(&p, &l)| math::cos(p) / (x - l)).collect();
    Ok(math::pairwise_sum(&terms) / spec.node_count() as f64)
}

/// Partial sum of a walk generating function with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Σ_{ℓ<=L} x^ℓ (A^ℓ)_{ij}` on the torus, with tail bound
/// `(2d|x|)^{L+1} / (1 - 2d|x|)` from `|(A^ℓ)_{ij}| <= (2d)^ℓ`.
pub fn wgf_series(spec: TorusSpec, i: usize, j: usize, x: f64, terms: usize) -> Result<SeriesEval, WalkError> {
    check_torus_node(spec, i)?;
    check_torus_node(spec, j)?;
    let radius = 1.0 / spec.degree() as f64;
    let ratio = spec.degree() as f64 * math::abs(x);
    if ratio >= 1.0 {
        return Err(WalkError::Divergent { x: math::abs(x), radius });
    }
    let modes = TorusModes::new(spec);
    let (ri, rj) = (modes.row(i), modes.row(j));
    let weights: Vec<f64> = ri.iter().zip(&rj).map(|(a, b)| a * b).collect();
    let scaled: Vec<f64> = modes.eigenvalues().iter().map(|&theta| x * theta).collect();
    let mut powers: Vec<f64> = scaled.clone();
    // A^0 = I exactly
    let mut partial = Vec::with_capacity(terms + 1);
    partial.push(if i == j { 1.0 } else { 0.0 });
    for _ in 1..=terms {
        let term: Vec<f64> = weights.iter().zip(&powers).map(|(w, p)| w * p).collect();
        partial.push(math::pairwise_sum(&term));
        powers.iter_mut().zip(&scaled).for_each(|(p, s)| *p *= s);
    }
    let tail_bound = math::powi(ratio, terms + 1) / (1.0 - ratio);
    Ok(SeriesEval { value: math::pairwise_sum(&partial), tail_bound })
}
