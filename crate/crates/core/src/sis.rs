//! Discrete-time SIS spreading with synchronous updates: the mean-field
//! probability recursion, an exact Monte Carlo chain, and the linear
//! stability test `ρ(A) < δ/β`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::math;
use crate::spectral::{spectral_radius_power, SpectralError};
use crate::topology::{Graph, TorusSpec};

/// Seed used when the caller does not supply one.
pub const DEFAULT_RNG_SEED: u64 = 20_240_901;

/// Residual target for the power iteration behind [`jacobian_spectral_test`].
pub const THRESHOLD_TOL: f64 = 1e-10;

/// Iteration cap for the power iteration behind [`jacobian_spectral_test`].
pub const THRESHOLD_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SisError {
    #[error("{name} = {value} is outside [0, 1]")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("no initial infected nodes")]
    NoSeeds,
    #[error("{count} seeds requested on a graph with {n} nodes")]
    TooManySeeds { count: usize, n: usize },
    #[error("seed node {node} out of range for {n} nodes")]
    SeedOutOfRange { node: usize, n: usize },
    #[error("seed node {0} listed twice")]
    DuplicateSeed(usize),
    #[error("state has {got} entries, graph has {n} nodes")]
    StateLength { got: usize, n: usize },
    #[error("at least one replica is required")]
    NoReplicas,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Initially infected nodes: a count drawn uniformly without replacement,
/// or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seeds {
    Count(usize),
    Nodes(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SisParams {
    beta: f64,
    delta: f64,
    horizon: usize,
    seeds: Seeds,
}

fn check_rate(name: &'static str, value: f64) -> Result<f64, SisError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(SisError::RateOutOfRange { name, value })
    }
}

impl SisParams {
    /// `beta` is the per-attempt infection probability, `delta` the
    /// per-slot recovery probability.
    pub fn new(beta: f64, delta: f64, horizon: usize, seeds: Seeds) -> Result<Self, SisError> {
        let beta = check_rate("beta", beta)?;
        let delta = check_rate("delta", delta)?;
        match &seeds {
            Seeds::Count(0) => return Err(SisError::NoSeeds),
            Seeds::Nodes(nodes) if nodes.is_empty() => return Err(SisError::NoSeeds),
            _ => {}
        }
        Ok(Self { beta, delta, horizon, seeds })
    }

    /// Rates only, for callers that never seed a run (threshold checks,
    /// single steps).
    pub fn rates(beta: f64, delta: f64) -> Result<Self, SisError> {
        Self::new(beta, delta, 0, Seeds::Count(1))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn seeds(&self) -> &Seeds {
        &self.seeds
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    /// Resolves the seed set on a graph with `n` nodes. Only a
    /// [`Seeds::Count`] consumes randomness.
    pub fn seed_nodes<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>, SisError> {
        match &self.seeds {
            Seeds::Count(count) => {
                if *count > n {
                    return Err(SisError::TooManySeeds { count: *count, n });
                }
                Ok(sample(rng, n, *count).into_vec())
            }
            Seeds::Nodes(nodes) => {
                let mut seen = vec![false; n];
                for &node in nodes {
                    if node >= n {
                        return Err(SisError::SeedOutOfRange { node, n });
                    }
                    if core::mem::replace(&mut seen[node], true) {
                        return Err(SisError::DuplicateSeed(node));
                    }
                }
                Ok(nodes.clone())
            }
        }
    }
}

fn check_len(g: &Graph, got: usize) -> Result<(), SisError> {
    let n = g.node_count();
    if got == n {
        Ok(())
    } else {
        Err(SisError::StateLength { got, n })
    }
}

/// One synchronous mean-field step,
/// `p_i' = 1 - (1 - p_i + δ p_i) Π_{j ~ i} (1 - β p_j)`.
pub fn meanfield_step(g: &Graph, p: &[f64], params: &SisParams) -> Result<Vec<f64>, SisError> {
    check_len(g, p.len())?;
    let mut next = vec![0.0; p.len()];
    meanfield_step_into(g, p, params.beta, params.delta, &mut next);
    Ok(next)
}

fn meanfield_step_into(g: &Graph, p: &[f64], beta: f64, delta: f64, next: &mut [f64]) {
    for (i, out) in next.iter_mut().enumerate() {
        let escape: f64 = g.neighbors(i).iter().map(|&j| 1.0 - beta * p[j]).product();
        let value = 1.0 - (1.0 - p[i] + delta * p[i]) * escape;
        *out = value.clamp(0.0, 1.0);
    }
}

/// One synchronous Monte Carlo step.
///
/// Every infected neighbour of a node makes an independent attempt that
/// succeeds with probability `β`. An infected node recovers with
/// probability `δ` but ends the slot susceptible only if no attempt on it
/// succeeds in the same slot.
pub fn montecarlo_step<R: Rng + ?Sized>(
    g: &Graph,
    infected: &[bool],
    params: &SisParams,
    rng: &mut R,
) -> Result<Vec<bool>, SisError> {
    check_len(g, infected.len())?;
    let mut next = vec![false; infected.len()];
    montecarlo_step_into(g, infected, params.beta, params.delta, rng, &mut next);
    Ok(next)
}

fn montecarlo_step_into<R: Rng + ?Sized>(
    g: &Graph,
    infected: &[bool],
    beta: f64,
    delta: f64,
    rng: &mut R,
    next: &mut [bool],
) {
    for (i, out) in next.iter_mut().enumerate() {
        if infected[i] && !rng.random_bool(delta) {
            *out = true;
            continue;
        }
        *out = g.neighbors(i).iter().filter(|&&j| infected[j]).any(|_| rng.random_bool(beta));
    }
}

/// Outcome of the linear stability test at the disease-free state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdVerdict {
    pub rho: f64,
    /// `δ/β`, infinite when `β = 0`.
    pub ratio: f64,
    /// `rho < ratio`.
    pub stable: bool,
    /// Largest eigenvalue `1 - δ + βρ` of the Jacobian `(1-δ)I + βA`.
    pub jacobian_top: f64,
}

impl ThresholdVerdict {
    pub fn from_radius(rho: f64, beta: f64, delta: f64) -> Self {
        let ratio = if beta == 0.0 { f64::INFINITY } else { delta / beta };
        Self { rho, ratio, stable: rho < ratio, jacobian_top: 1.0 - delta + beta * rho }
    }

    /// Whether the verdict agrees with `jacobian_top < 1`.
    pub fn jacobian_agrees(&self) -> bool {
        if self.ratio.is_infinite() {
            return self.stable;
        }
        self.stable == (self.jacobian_top < 1.0)
    }
}

/// Verdict for an arbitrary graph, with `ρ(A)` from power iteration.
pub fn jacobian_spectral_test(g: &Graph, params: &SisParams) -> Result<ThresholdVerdict, SisError> {
    let rho = spectral_radius_power(g, THRESHOLD_TOL, THRESHOLD_MAX_ITER)?.rho;
    Ok(ThresholdVerdict::from_radius(rho, params.beta, params.delta))
}

/// Verdict for an intact torus, whose spectral radius is exactly `2d`.
pub fn torus_threshold(spec: TorusSpec, params: &SisParams) -> ThresholdVerdict {
    ThresholdVerdict::from_radius(spec.degree() as f64, params.beta, params.delta)
}

/// `(1-δ)I + βA`.
pub fn jacobian_matrix(g: &Graph, params: &SisParams) -> DMatrix<f64> {
    let mut j = g.adjacency_matrix() * params.beta;
    for i in 0..g.node_count() {
        j[(i, i)] += 1.0 - params.delta;
    }
    j
}

/// Forward-difference Jacobian of [`meanfield_step`] at `p = 0`.
pub fn finite_difference_jacobian(g: &Graph, params: &SisParams, h: f64) -> DMatrix<f64> {
    let n = g.node_count();
    let mut jac = DMatrix::zeros(n, n);
    let mut p = vec![0.0; n];
    let mut base = vec![0.0; n];
    let mut next = vec![0.0; n];
    meanfield_step_into(g, &p, params.beta, params.delta, &mut base);
    for col in 0..n {
        p[col] = h;
        meanfield_step_into(g, &p, params.beta, params.delta, &mut next);
        for row in 0..n {
            jac[(row, col)] = (next[row] - base[row]) / h;
        }
        p[col] = 0.0;
    }
    jac
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    MeanField,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    /// Mean-field: `Σ p_i`. Monte Carlo: mean infected count over replicas.
    pub infected_mean: f64,
    /// Sample standard deviation over replicas; `None` for mean-field runs.
    pub infected_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: Mode,
    pub rng_seed: u64,
    pub replicas: usize,
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn final_mean(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.infected_mean)
    }
}

/// Generator for replica `r` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(replica))
}

/// Expected infected count `Σ p_i` per step, seeds at `p = 1`. The seed set
/// is drawn from the replica-0 generator, so it matches Monte Carlo replica 0.
pub fn run_meanfield(g: &Graph, params: &SisParams, seed: u64) -> Result<Trajectory, SisError> {
    let mut rng = replica_rng(seed, 0);
    let mut p = vec![0.0; g.node_count()];
    for node in params.seed_nodes(g.node_count(), &mut rng)? {
        p[node] = 1.0;
    }
    let mut next = vec![0.0; p.len()];
    let mut rows = Vec::with_capacity(params.horizon + 1);
    for t in 0..=params.horizon {
        if t > 0 {
            meanfield_step_into(g, &p, params.beta, params.delta, &mut next);
            core::mem::swap(&mut p, &mut next);
        }
        rows.push(TrajectoryRow { t, infected_mean: math::pairwise_sum(&p), infected_std: None });
    }
    Ok(Trajectory { mode: Mode::MeanField, rng_seed: seed, replicas: 1, rows })
}

/// Infected counts at `t = 0..=horizon` for one Monte Carlo replica.
pub fn run_replica(g: &Graph, params: &SisParams, seed: u64, replica: u64) -> Result<Vec<usize>, SisError> {
    let mut rng = replica_rng(seed, replica);
    let mut state = vec![false; g.node_count()];
    for node in params.seed_nodes(g.node_count(), &mut rng)? {
        state[node] = true;
    }
    let mut next = vec![false; state.len()];
    let mut counts = Vec::with_capacity(params.horizon + 1);
    counts.push(state.iter().filter(|&&s| s).count());
    for _ in 0..params.horizon {
        montecarlo_step_into(g, &state, params.beta, params.delta, &mut rng, &mut next);
        core::mem::swap(&mut state, &mut next);
        counts.push(state.iter().filter(|&&s| s).count());
    }
    Ok(counts)
}

/// Mean and sample standard deviation per step over replica count series,
/// which must all have the same length. Replicas are combined in the
/// order given.
pub fn aggregate(counts: &[Vec<usize>], seed: u64) -> Result<Trajectory, SisError> {
    let first = counts.first().ok_or(SisError::NoReplicas)?;
    let r = counts.len() as f64;
    let rows = (0..first.len())
        .map(|t| {
            let mean = counts.iter().map(|c| c[t] as f64).sum::<f64>() / r;
            let std = if counts.len() > 1 {
                let ss: f64 = counts.iter().map(|c| (c[t] as f64 - mean) * (c[t] as f64 - mean)).sum();
                math::sqrt(ss / (r - 1.0))
            } else {
                0.0
            };
            TrajectoryRow { t, infected_mean: mean, infected_std: Some(std) }
        })
        .collect();
    Ok(Trajectory { mode: Mode::MonteCarlo, rng_seed: seed, replicas: counts.len(), rows })
}

/// Runs either mode. `replicas` is ignored for mean-field runs.
pub fn run_experiment(
    g: &Graph,
    params: &SisParams,
    mode: Mode,
    replicas: usize,
    seed: u64,
) -> Result<Trajectory, SisError> {
    match mode {
        Mode::MeanField => run_meanfield(g, params, seed),
        Mode::MonteCarlo => {
            if replicas == 0 {
                return Err(SisError::NoReplicas);
            }
            let counts =
                (0..replicas as u64).map(|r| run_replica(g, params, seed, r)).collect::<Result<Vec<_>, _>>()?;
            aggregate(&counts, seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_torus;

    fn torus(dim: usize, len: usize) -> (TorusSpec, Graph) {
        let spec = TorusSpec::new(dim, len).unwrap();
        (spec, build_torus(spec))
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            SisParams::new(1.5, 0.1, 1, Seeds::Count(1)),
            Err(SisError::RateOutOfRange { name: "beta", .. })
        ));
        assert!(matches!(
            SisParams::new(0.1, -0.1, 1, Seeds::Count(1)),
            Err(SisError::RateOutOfRange { name: "delta", .. })
        ));
        assert!(SisParams::new(f64::NAN, 0.1, 1, Seeds::Count(1)).is_err());
        assert_eq!(SisParams::new(0.1, 0.1, 1, Seeds::Count(0)), Err(SisError::NoSeeds));
        assert_eq!(SisParams::new(0.1, 0.1, 1, Seeds::Nodes(vec![])), Err(SisError::NoSeeds));

        let mut rng = replica_rng(1, 0);
        let dup = SisParams::new(0.1, 0.1, 1, Seeds::Nodes(vec![1, 1])).unwrap();
        assert_eq!(dup.seed_nodes(9, &mut rng), Err(SisError::DuplicateSeed(1)));
        let far = SisParams::new(0.1, 0.1, 1, Seeds::Nodes(vec![9])).unwrap();
        assert_eq!(far.seed_nodes(9, &mut rng), Err(SisError::SeedOutOfRange { node: 9, n: 9 }));
        let many = SisParams::new(0.1, 0.1, 1, Seeds::Count(10)).unwrap();
        assert_eq!(many.seed_nodes(9, &mut rng), Err(SisError::TooManySeeds { count: 10, n: 9 }));
        let mut drawn = SisParams::new(0.1, 0.1, 1, Seeds::Count(9)).unwrap().seed_nodes(9, &mut rng).unwrap();
        drawn.sort_unstable();
        assert_eq!(drawn, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn meanfield_examples() {
        let (_, g) = torus(2, 3);
        let params = SisParams::rates(0.1, 0.2).unwrap();
        assert_eq!(meanfield_step(&g, &[0.0; 9], &params).unwrap(), vec![0.0; 9]);
        let next = meanfield_step(&g, &[0.5; 9], &params).unwrap();
        for v in next {
            assert!((v - 0.511_296_25).abs() < 1e-12);
        }

        let cure = SisParams::rates(0.0, 1.0).unwrap();
        let mut p = vec![0.0; 9];
        p[4] = 1.0;
        assert_eq!(meanfield_step(&g, &p, &cure).unwrap(), vec![0.0; 9]);
        assert_eq!(meanfield_step(&g, &[0.0; 3], &cure), Err(SisError::StateLength { got: 3, n: 9 }));
    }

    #[test]
    fn montecarlo_extremes() {
        let (spec, g) = torus(2, 5);
        let mut rng = replica_rng(7, 0);
        let clear = SisParams::rates(0.0, 1.0).unwrap();
        let state: Vec<bool> = (0..25).map(|i| i % 3 == 0).collect();
        assert!(montecarlo_step(&g, &state, &clear, &mut rng).unwrap().iter().all(|&s| !s));

        // flood from one node reaches everything within the diameter
        let flood = SisParams::rates(1.0, 0.0).unwrap();
        let mut state = vec![false; 25];
        state[0] = true;
        let diameter = spec.dim() * (spec.len() / 2);
        for _ in 0..diameter {
            state = montecarlo_step(&g, &state, &flood, &mut rng).unwrap();
        }
        assert!(state.iter().all(|&s| s));
    }

    #[test]
    fn recovery_can_be_undone_in_the_same_slot() {
        // K2 with both infected, δ = 1, β = 1: each recovers and is reinfected
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let params = SisParams::rates(1.0, 1.0).unwrap();
        let mut rng = replica_rng(3, 0);
        assert_eq!(montecarlo_step(&g, &[true, true], &params, &mut rng).unwrap(), vec![true, true]);
    }

    #[test]
    fn verdicts() {
        let spec = TorusSpec::new(2, 30).unwrap();
        let hot = torus_threshold(spec, &SisParams::rates(0.1, 0.2).unwrap());
        assert!(!hot.stable && (hot.jacobian_top - 1.2).abs() < 1e-12 && hot.jacobian_agrees());
        let cold = torus_threshold(spec, &SisParams::rates(0.1, 0.6).unwrap());
        assert!(cold.stable && (cold.jacobian_top - 0.8).abs() < 1e-12 && cold.jacobian_agrees());

        let k2 = Graph::from_edges(2, [(0, 1)]).unwrap();
        let edge = jacobian_spectral_test(&k2, &SisParams::rates(1.0, 1.0).unwrap()).unwrap();
        assert!((edge.rho - 1.0).abs() < 1e-10);
        assert!(!ThresholdVerdict::from_radius(1.0, 1.0, 1.0).stable);

        let none = torus_threshold(spec, &SisParams::rates(0.0, 0.3).unwrap());
        assert!(none.stable && none.ratio.is_infinite());

        let g = build_torus(TorusSpec::new(2, 6).unwrap());
        let power = jacobian_spectral_test(&g, &SisParams::rates(0.1, 0.6).unwrap()).unwrap();
        assert!((power.rho - 4.0).abs() < 1e-9 && power.stable);
    }

    #[test]
    fn finite_difference_matches_jacobian() {
        let (_, g) = torus(2, 5);
        for (beta, delta) in [(0.1, 0.2), (0.3, 0.7)] {
            let params = SisParams::rates(beta, delta).unwrap();
            let diff = finite_difference_jacobian(&g, &params, 1e-7) - jacobian_matrix(&g, &params);
            assert!(diff.amax() <= 1e-6);
        }
    }

    #[test]
    fn uniform_state_stays_uniform() {
        let (_, g) = torus(2, 6);
        let params = SisParams::rates(0.25, 0.4).unwrap();
        let mut p = vec![0.3; 36];
        for _ in 0..20 {
            p = meanfield_step(&g, &p, &params).unwrap();
            assert!(p.iter().all(|&v| (v - p[0]).abs() < 1e-15));
        }
    }

    #[test]
    fn horizon_zero_keeps_initial_count() {
        let (_, g) = torus(2, 5);
        let params = SisParams::new(0.1, 0.2, 0, Seeds::Count(4)).unwrap();
        let mf = run_meanfield(&g, &params, 11).unwrap();
        assert_eq!(mf.rows.len(), 1);
        assert_eq!(mf.rows[0].infected_mean, 4.0);
        let mc = run_experiment(&g, &params, Mode::MonteCarlo, 3, 11).unwrap();
        assert_eq!(mc.rows, vec![TrajectoryRow { t: 0, infected_mean: 4.0, infected_std: Some(0.0) }]);
        assert_eq!(run_experiment(&g, &params, Mode::MonteCarlo, 0, 11), Err(SisError::NoReplicas));
    }

    #[test]
    fn meanfield_dichotomy_on_fig1_torus() {
        let (_, g) = torus(2, 30);
        let cold = SisParams::new(0.1, 0.6, 100, Seeds::Count(20)).unwrap();
        let traj = run_meanfield(&g, &cold, DEFAULT_RNG_SEED).unwrap();
        assert_eq!(traj.rows[0].infected_mean, 20.0);
        assert!(traj.rows.windows(2).all(|w| w[1].infected_mean < w[0].infected_mean));
        assert!(traj.final_mean() < 1.0);

        let hot = SisParams::new(0.1, 0.2, 300, Seeds::Count(20)).unwrap();
        let traj = run_meanfield(&g, &hot, DEFAULT_RNG_SEED).unwrap();
        assert!(traj.final_mean() > 100.0);
    }

    #[test]
    fn runs_are_reproducible() {
        let (_, g) = torus(2, 6);
        let params = SisParams::new(0.2, 0.3, 40, Seeds::Count(3)).unwrap();
        let a = run_experiment(&g, &params, Mode::MonteCarlo, 4, 99).unwrap();
        let b = run_experiment(&g, &params, Mode::MonteCarlo, 4, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.replicas, 4);
        assert_eq!(a.rng_seed, 99);
        let c = run_experiment(&g, &params, Mode::MonteCarlo, 4, 100).unwrap();
        assert_ne!(a.rows, c.rows);
    }
}
