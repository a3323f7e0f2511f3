//! Lower bounds for the two-dimensional torus from the infinite square
//! lattice and Stirling's formula, and torus/lattice walk-count tables.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::math::{self, E, PI};
use crate::topology::{TopologyError, TorusSpec};
use crate::walks::{lattice_closed_walks, torus_closed_walks_or_exact, torus_resolvent, WalkError};

/// Default number of series terms.
pub const DEFAULT_TERMS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("the Stirling bound is undefined at length 0")]
    ZeroLength,
    #[error("lattice series diverges for x = {0} (need x > 4)")]
    Divergent(f64),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// `sqrt(4π)/e^2 · 4^ℓ / sqrt(ℓ) <= C(2ℓ, ℓ)`.
pub fn stirling_binomial_lower(half_length: usize) -> Result<f64, BoundsError> {
    if half_length == 0 {
        return Err(BoundsError::ZeroLength);
    }
    let l = half_length as f64;
    let log = 0.5 * math::ln(4.0 * PI) - 2.0 + l * math::ln(4.0) - 0.5 * math::ln(l);
    Ok(math::exp(log))
}

fn check_lattice_x(x: f64) -> Result<(), BoundsError> {
    // NaN fails the comparison too
    if x > 4.0 {
        Ok(())
    } else {
        Err(BoundsError::Divergent(x))
    }
}

/// Stirling lower bound on the lattice resolvent diagonal,
/// `(1/x)(4π/e^4) Σ_{ℓ>=1} (1/ℓ)(4/x)^{2ℓ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingSeries {
    /// Sum of the first `terms` terms.
    pub truncated: f64,
    /// `(1/x)(4π/e^4)(-ln(1 - 16/x^2))`.
    pub closed_form: f64,
    /// `closed_form - truncated`.
    pub difference: f64,
    /// Upper bound on the omitted terms.
    pub tail_bound: f64,
}

/// The series starts at `ℓ = 1`: its `ℓ = 0` term carries `1/ℓ`.
pub fn lattice_wgf_lower(x: f64, terms: usize) -> Result<StirlingSeries, BoundsError> {
    check_lattice_x(x)?;
    let q = 16.0 / (x * x);
    let prefactor = 4.0 * PI / (x * math::powi(E, 4));
    let mut power = 1.0;
    let mut parts = Vec::with_capacity(terms);
    for l in 1..=terms {
        power *= q;
        parts.push(power / l as f64);
    }
    let truncated = prefactor * math::pairwise_sum(&parts);
    let closed_form = prefactor * -math::ln_1p(-q);
    let tail_bound = prefactor * math::powi(q, terms + 1) / ((terms + 1) as f64 * (1.0 - q));
    Ok(StirlingSeries { truncated, closed_form, difference: closed_form - truncated, tail_bound })
}

/// Truncated lattice resolvent diagonal
/// `x^{-1} Σ_{ℓ=0}^{L} x^{-2ℓ} C(2ℓ,ℓ)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSeries {
    pub value: f64,
    /// Bound on the omitted terms: consecutive terms shrink by less than `16/x^2`.
    pub tail_bound: f64,
}

pub fn lattice_wgf_truncated(x: f64, terms: usize) -> Result<LatticeSeries, BoundsError> {
    check_lattice_x(x)?;
    let inv_x2 = 1.0 / (x * x);
    let mut term = 1.0 / x;
    let mut parts = Vec::with_capacity(terms + 1);
    for l in 0..=terms {
        parts.push(term);
        // C(2l+2, l+1) / C(2l, l) = 2(2l+1)/(l+1)
        let growth = 2.0 * (2 * l + 1) as f64 / (l + 1) as f64;
        term *= growth * growth * inv_x2;
    }
    let q = 16.0 * inv_x2;
    Ok(LatticeSeries { value: math::pairwise_sum(&parts), tail_bound: term / (1.0 - q) })
}

/// The chain Stirling ≤ lattice ≤ torus for the resolvent diagonal at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub x: f64,
    /// `[(xI - A)^{-1}]_{ii}` of the torus.
    pub exact_value: f64,
    /// Truncated lattice series.
    pub lattice_value: f64,
    pub lattice_tail: f64,
    /// Stirling lower bound, closed form.
    pub stirling_value: f64,
    /// `exact_value - lattice_value`.
    pub torus_gap: f64,
    /// `lattice_value - stirling_value`.
    pub stirling_gap: f64,
}

impl BoundReport {
    /// Both inequalities hold once each truncated quantity is allowed its tail.
    pub fn chain_holds(&self) -> bool {
        self.stirling_value <= self.lattice_value + self.lattice_tail && self.lattice_value <= self.exact_value
    }
}

pub fn bound_chain(spec: TorusSpec, x: f64, terms: usize) -> Result<BoundReport, BoundsError> {
    let lattice = lattice_wgf_truncated(x, terms)?;
    let stirling = lattice_wgf_lower(x, terms)?;
    let exact_value = torus_resolvent(spec, 0, 0, x)?;
    Ok(BoundReport {
        x,
        exact_value,
        lattice_value: lattice.value,
        lattice_tail: lattice.tail_bound,
        stirling_value: stirling.closed_form,
        torus_gap: exact_value - lattice.value,
        stirling_gap: lattice.value - stirling.closed_form,
    })
}

/// Closed-walk counts of one length on the torus and the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkComparison {
    pub len: usize,
    pub length: usize,
    pub torus: BigUint,
    pub lattice: BigUint,
    /// `100 (torus - lattice) / torus`.
    pub percent_difference: f64,
}

fn percent_difference(torus: &BigUint, lattice: &BigUint) -> f64 {
    let t = torus.to_f64().unwrap_or(f64::INFINITY);
    if t == 0.0 {
        return 0.0;
    }
    let diff = if torus >= lattice { (torus - lattice).to_f64() } else { (lattice - torus).to_f64().map(|v| -v) };
    100.0 * diff.unwrap_or(f64::NAN) / t
}

fn compare(spec: TorusSpec, length: usize) -> WalkComparison {
    let torus = torus_closed_walks_or_exact(spec, length).count;
    let lattice = if length.is_multiple_of(2) { lattice_closed_walks(length / 2).count } else { BigUint::default() };
    let percent_difference = percent_difference(&torus, &lattice);
    WalkComparison { len: spec.len(), length, torus, lattice, percent_difference }
}

/// Torus `T^2_m` against the lattice for every even length up to `max_length`.
pub fn compare_walks(len: usize, max_length: usize) -> Result<Vec<WalkComparison>, BoundsError> {
    let spec = TorusSpec::new(2, len)?;
    Ok((0..=max_length).step_by(2).map(|length| compare(spec, length)).collect())
}

/// One walk length against a range of torus side lengths.
pub fn compare_walks_vs_m(length: usize, lens: &[usize]) -> Result<Vec<WalkComparison>, BoundsError> {
    lens.iter().map(|&m| Ok(compare(TorusSpec::new(2, m)?, length))).collect()
}
