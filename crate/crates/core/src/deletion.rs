//! Characteristic polynomials and spectral radii of almost-torus graphs.
//!
//! Everything is evaluated pointwise from the torus resolvent
//! `R(x) = (xI - A)^{-1}` and `φ(T, x)`:
//!
//! - one node: `φ(T\i, x) = R_ii(x) φ(T, x)`
//! - node set: `φ(T\S, x) = det R_SS(x) φ(T, x)`
//! - two nodes: `φ(T\ij) = φ(T\i) φ(T\j) / φ(T) - φ(T) R_ij^2`
//! - one edge: `φ(T\e) = φ(T) - φ(T\ij) + 2 sqrt(φ(T\i) φ(T\j) - φ(T) φ(T\ij))`
//!
//! The largest root of the deleted polynomial is then found by a downward
//! scan from `2d` followed by bisection.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::math;
use crate::spectral::{
    dense_spectrum, product_of_factors, torus_eigenvalue_list, PolyEval, SpectralError, ORACLE_MAX_NODES,
};
use crate::topology::{build_torus, TopologyError, TorusSpec};
use crate::walks::{torus_resolvent_unguarded, WalkError, POLE_GUARD};

/// Largest node set handled through the resolvent determinant.
pub const MAX_SET_SIZE: usize = 8;

/// Relative slack allowed for a negative radicand in the edge formula.
pub const RADICAND_TOL: f64 = 1e-9;

/// Default downward scan step when bracketing the largest root.
pub const SCAN_STEP: f64 = 0.05;

/// Default bisection tolerance.
pub const ROOT_TOL: f64 = 1e-10;

/// Offset below `2d` where the scan starts (`2d` itself is a pole).
const SCAN_START_OFFSET: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeletionError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("deletion set is empty")]
    EmptySet,
    #[error("deletion set has {size} nodes, at most {MAX_SET_SIZE} are supported")]
    SetTooLarge { size: usize },
    #[error("deletion would remove every node")]
    NothingLeft,
    #[error("nodes must be distinct, got {0} twice")]
    SameNode(usize),
    #[error("{{{0}, {1}}} is not an edge of the torus")]
    NotAnEdge(usize, usize),
    #[error("edge formula radicand is negative at x = {x} (relative size {relative:e})")]
    NegativeRadicand { x: f64, relative: f64 },
    #[error("resolvent evaluation is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("no sign change of the deleted characteristic polynomial in [{lower}, {upper}]")]
    Bracketing { lower: f64, upper: f64 },
}

/// What is removed from the torus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Removal {
    Node(usize),
    Nodes(Vec<usize>),
    Edge(usize, usize),
}

impl Removal {
    /// Nodes of the torus that disappear (empty for an edge).
    pub fn removed_nodes(&self) -> Vec<usize> {
        match self {
            Self::Node(i) => vec![*i],
            Self::Nodes(set) => set.clone(),
            Self::Edge(..) => Vec::new(),
        }
    }
}

impl fmt::Display for Removal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Node(i) => write!(f, "node {i}"),
            Self::Nodes(set) => {
                let list: Vec<String> = set.iter().map(|v| format!("{v}")).collect();
                write!(f, "nodes {}", list.join(";"))
            }
            Self::Edge(i, j) => write!(f, "edge {i}:{j}"),
        }
    }
}

/// Resolvent entries and `φ(T, x)` for one torus, without pole guards.
struct TorusResolvent {
    spec: TorusSpec,
    eigenvalues: Vec<f64>,
}

impl TorusResolvent {
    fn new(spec: TorusSpec) -> Self {
        Self { spec, eigenvalues: torus_eigenvalue_list(spec) }
    }

    fn guard(&self, x: f64) -> Result<(), DeletionError> {
        match self.eigenvalues.iter().find(|&&l| math::abs(x - l) < POLE_GUARD) {
            Some(&eigenvalue) => Err(WalkError::PoleProximity { x, eigenvalue }.into()),
            None => Ok(()),
        }
    }

    fn entry(&self, i: usize, j: usize, x: f64) -> Result<f64, DeletionError> {
        let r = torus_resolvent_unguarded(self.spec, &self.eigenvalues, i, j, x)?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(DeletionError::NonFinite { x })
        }
    }

    fn charpoly(&self, x: f64) -> PolyEval {
        product_of_factors(self.eigenvalues.iter().map(|&l| x - l))
    }

    fn minus_node(&self, i: usize, x: f64) -> Result<PolyEval, DeletionError> {
        Ok(PolyEval::from_f64(self.entry(i, i, x)?) * self.charpoly(x))
    }

    fn minus_set(&self, set: &[usize], x: f64) -> Result<PolyEval, DeletionError> {
        let s = set.len();
        let mut block = Vec::with_capacity(s * s);
        for &i in set {
            for &j in set {
                block.push(self.entry(i, j, x)?);
            }
        }
        Ok(determinant(block, s) * self.charpoly(x))
    }

    fn minus_two(&self, i: usize, j: usize, x: f64) -> Result<PolyEval, DeletionError> {
        let phi = self.charpoly(x);
        let phi_i = PolyEval::from_f64(self.entry(i, i, x)?) * phi;
        let phi_j = PolyEval::from_f64(self.entry(j, j, x)?) * phi;
        let r_ij = PolyEval::from_f64(self.entry(i, j, x)?);
        let Some(first) = (phi_i * phi_j).checked_div(phi) else {
            // x is an exact eigenvalue; fall back to the determinant form
            return self.minus_set(&[i, j], x);
        };
        Ok(first - phi * r_ij * r_ij)
    }

    fn minus_edge(&self, i: usize, j: usize, x: f64) -> Result<EdgeRemovalTerms, DeletionError> {
        let phi = self.charpoly(x);
        let phi_i = self.minus_node(i, x)?;
        let phi_j = self.minus_node(j, x)?;
        let phi_ij = self.minus_two(i, j, x)?;
        let product = phi_i * phi_j;
        let radicand = product - phi * phi_ij;
        let root = match radicand.sqrt() {
            Some(root) => root,
            None => {
                let relative = radicand.abs().checked_div(product.abs()).map_or(f64::INFINITY, |r| r.value());
                if relative > RADICAND_TOL {
                    return Err(DeletionError::NegativeRadicand { x, relative });
                }
                PolyEval::ZERO
            }
        };
        // The square root equals |φ(T) R_ij|; the branch follows the sign of
        // φ(T) R_ij, which is positive above the spectral radius.
        let branch = phi * PolyEval::from_f64(self.entry(i, j, x)?);
        let signed_root = if branch.sign() < 0 { -root } else { root };
        let value = phi - phi_ij + PolyEval::from_f64(2.0) * signed_root;
        Ok(EdgeRemovalTerms { phi, phi_i, phi_j, phi_ij, radicand, value })
    }

    fn evaluate(&self, removal: &Removal, x: f64) -> Result<PolyEval, DeletionError> {
        match removal {
            Removal::Node(i) => self.minus_node(*i, x),
            Removal::Nodes(set) if set.len() == 1 => self.minus_node(set[0], x),
            Removal::Nodes(set) => self.minus_set(set, x),
            Removal::Edge(i, j) => Ok(self.minus_edge(*i, *j, x)?.value),
        }
    }
}

/// Determinant of a row-major `s x s` matrix by Gaussian elimination with
/// partial pivoting. A zero pivot gives an exact zero.
pub fn determinant(mut a: Vec<f64>, s: usize) -> PolyEval {
    assert_eq!(a.len(), s * s, "matrix must be s x s");
    let mut swaps = 0usize;
    let mut pivots = Vec::with_capacity(s);
    for col in 0..s {
        let pivot_row = (col..s)
            .max_by(|&r1, &r2| math::abs(a[r1 * s + col]).total_cmp(&math::abs(a[r2 * s + col])))
            .unwrap_or(col);
        let pivot = a[pivot_row * s + col];
        if pivot == 0.0 {
            return PolyEval::ZERO;
        }
        if pivot_row != col {
            for k in 0..s {
                a.swap(col * s + k, pivot_row * s + k);
            }
            swaps += 1;
        }
        for row in col + 1..s {
            let factor = a[row * s + col] / pivot;
            for k in col..s {
                a[row * s + k] -= factor * a[col * s + k];
            }
        }
        pivots.push(pivot);
    }
    let mut logs = Vec::with_capacity(s);
    let mut negatives = swaps;
    for p in pivots {
        if p < 0.0 {
            negatives += 1;
        }
        logs.push(math::ln(math::abs(p)));
    }
    PolyEval::new(if negatives.is_multiple_of(2) { 1 } else { -1 }, math::pairwise_sum(&logs))
}

fn check_node(spec: TorusSpec, node: usize) -> Result<(), DeletionError> {
    let n = spec.node_count();
    if node >= n {
        return Err(TopologyError::NodeOutOfRange { node, n }.into());
    }
    Ok(())
}

/// Checks that `removal` is well formed for `spec`.
pub fn validate_removal(spec: TorusSpec, removal: &Removal) -> Result<(), DeletionError> {
    match removal {
        Removal::Node(i) => check_node(spec, *i),
        Removal::Nodes(set) => {
            if set.is_empty() {
                return Err(DeletionError::EmptySet);
            }
            if set.len() > MAX_SET_SIZE {
                return Err(DeletionError::SetTooLarge { size: set.len() });
            }
            for (k, &v) in set.iter().enumerate() {
                check_node(spec, v)?;
                if set[..k].contains(&v) {
                    return Err(DeletionError::SameNode(v));
                }
            }
            if set.len() >= spec.node_count() {
                return Err(DeletionError::NothingLeft);
            }
            Ok(())
        }
        Removal::Edge(i, j) => {
            check_node(spec, *i)?;
            check_node(spec, *j)?;
            if spec.is_edge(*i, *j)? {
                Ok(())
            } else {
                Err(DeletionError::NotAnEdge(*i, *j))
            }
        }
    }
}

/// `φ(T\i, x) = R_ii(x) φ(T, x)`. The value does not depend on `i`.
pub fn charpoly_minus_node(spec: TorusSpec, i: usize, x: f64) -> Result<PolyEval, DeletionError> {
    check_node(spec, i)?;
    let r = TorusResolvent::new(spec);
    r.guard(x)?;
    r.minus_node(i, x)
}

/// `φ(T\S, x) = det R_SS(x) φ(T, x)`.
pub fn charpoly_minus_set(spec: TorusSpec, set: &[usize], x: f64) -> Result<PolyEval, DeletionError> {
    validate_removal(spec, &Removal::Nodes(set.to_vec()))?;
    let r = TorusResolvent::new(spec);
    r.guard(x)?;
    r.minus_set(set, x)
}

/// `φ(T\ij, x) = φ(T\i) φ(T\j) / φ(T) - φ(T) R_ij(x)^2`.
pub fn charpoly_minus_two(spec: TorusSpec, i: usize, j: usize, x: f64) -> Result<PolyEval, DeletionError> {
    check_node(spec, i)?;
    check_node(spec, j)?;
    if i == j {
        return Err(DeletionError::SameNode(i));
    }
    let r = TorusResolvent::new(spec);
    r.guard(x)?;
    r.minus_two(i, j, x)
}

/// Every polynomial value entering the edge-removal identity at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRemovalTerms {
    pub phi: PolyEval,
    pub phi_i: PolyEval,
    pub phi_j: PolyEval,
    pub phi_ij: PolyEval,
    /// `φ(T\i) φ(T\j) - φ(T) φ(T\ij)`, which equals `(φ(T) R_ij)^2`.
    pub radicand: PolyEval,
    /// `φ(T\e, x)`.
    pub value: PolyEval,
}

/// Terms of the edge-removal identity for torus edge `{i, j}`.
pub fn edge_removal_terms(spec: TorusSpec, i: usize, j: usize, x: f64) -> Result<EdgeRemovalTerms, DeletionError> {
    validate_removal(spec, &Removal::Edge(i, j))?;
    let r = TorusResolvent::new(spec);
    r.guard(x)?;
    r.minus_edge(i, j, x)
}

/// `φ(T\e, x)` for torus edge `e = {i, j}`.
pub fn charpoly_minus_edge(spec: TorusSpec, i: usize, j: usize, x: f64) -> Result<PolyEval, DeletionError> {
    Ok(edge_removal_terms(spec, i, j, x)?.value)
}

/// Characteristic polynomial of the torus after `removal`, at `x`.
pub fn charpoly_after(spec: TorusSpec, removal: &Removal, x: f64) -> Result<PolyEval, DeletionError> {
    validate_removal(spec, removal)?;
    let r = TorusResolvent::new(spec);
    r.guard(x)?;
    r.evaluate(removal, x)
}

/// Spectral radius of an almost-torus, analytic and (when small enough) dense.
#[derive(Debug, Clone, PartialEq)]
pub struct DeletionResult {
    pub spec: TorusSpec,
    pub removal: Removal,
    /// Largest root of the deleted characteristic polynomial.
    pub spectral_radius: f64,
    /// Largest eigenvalue of the explicitly built graph; `None` above
    /// [`ORACLE_MAX_NODES`] or when the oracle was not requested.
    pub oracle_radius: Option<f64>,
    pub discrepancy: Option<f64>,
}

impl DeletionResult {
    /// `2d - ρ(T \ removal)`.
    pub fn reduction(&self) -> f64 {
        self.spec.degree() as f64 - self.spectral_radius
    }

    /// Deleted characteristic polynomial at `x`.
    pub fn charpoly_at(&self, x: f64) -> Result<PolyEval, DeletionError> {
        charpoly_after(self.spec, &self.removal, x)
    }
}

/// Scan step used below `2d`: never coarser than a quarter of the gap
/// between the two largest torus eigenvalues.
fn scan_step(spec: TorusSpec) -> f64 {
    let gap = 2.0 - 2.0 * math::cos(2.0 * math::PI / spec.len() as f64);
    SCAN_STEP.min(gap / 4.0)
}

/// Largest root of the deleted polynomial by scan + bisection.
pub fn analytic_spectral_radius(spec: TorusSpec, removal: &Removal, tol: f64) -> Result<f64, DeletionError> {
    validate_removal(spec, removal)?;
    let resolvent = TorusResolvent::new(spec);
    let eval = |x: f64| resolvent.evaluate(removal, x).map(|p| p.sign());
    let top = spec.degree() as f64;
    let step = scan_step(spec);
    let lower_limit = -top - 1.0;

    let mut hi = top - SCAN_START_OFFSET;
    let mut sign_hi = eval(hi)?;
    if sign_hi == 0 {
        return Ok(hi);
    }
    if sign_hi < 0 {
        // a root above the scan start; bracket it against a point above 2d
        return bisect(&eval, hi, top + step, sign_hi, tol);
    }
    loop {
        let lo = hi - step;
        if lo < lower_limit {
            return Err(DeletionError::Bracketing { lower: lower_limit, upper: top });
        }
        let sign_lo = eval(lo)?;
        if sign_lo == 0 {
            return Ok(lo);
        }
        if sign_lo != sign_hi {
            return bisect(&eval, lo, hi, sign_lo, tol);
        }
        hi = lo;
        sign_hi = sign_lo;
    }
}

fn bisect<F>(eval: &F, mut lo: f64, mut hi: f64, sign_lo: i8, tol: f64) -> Result<f64, DeletionError>
where
    F: Fn(f64) -> Result<i8, DeletionError>,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match eval(mid)? {
            0 => return Ok(mid),
            s if s == sign_lo => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest adjacency eigenvalue of the torus after `removal`, from a dense
/// eigensolve of the explicitly built graph.
pub fn oracle_spectral_radius(spec: TorusSpec, removal: &Removal) -> Result<f64, DeletionError> {
    validate_removal(spec, removal)?;
    let torus = build_torus(spec);
    let graph = match removal {
        Removal::Edge(i, j) => torus.delete_edge(*i, *j)?,
        other => torus.delete_nodes(&other.removed_nodes())?.graph,
    };
    Ok(dense_spectrum(&graph)?.largest().unwrap_or(0.0))
}

/// Analytic spectral radius after `removal`, cross-checked against the
/// dense oracle when the remaining graph has at most [`ORACLE_MAX_NODES`] nodes.
pub fn spectral_radius_after_deletion(
    spec: TorusSpec,
    removal: Removal,
    tol: f64,
) -> Result<DeletionResult, DeletionError> {
    let spectral_radius = analytic_spectral_radius(spec, &removal, tol)?;
    let remaining = spec.node_count() - removal.removed_nodes().len();
    let oracle_radius =
        if remaining <= ORACLE_MAX_NODES { Some(oracle_spectral_radius(spec, &removal)?) } else { None };
    let discrepancy = oracle_radius.map(|o| math::abs(o - spectral_radius));
    Ok(DeletionResult { spec, removal, spectral_radius, oracle_radius, discrepancy })
}

/// Like [`spectral_radius_after_deletion`] without running the oracle.
pub fn analytic_result(spec: TorusSpec, removal: Removal, tol: f64) -> Result<DeletionResult, DeletionError> {
    let spectral_radius = analytic_spectral_radius(spec, &removal, tol)?;
    Ok(DeletionResult { spec, removal, spectral_radius, oracle_radius: None, discrepancy: None })
}
