//! Parameter sweeps and figure tables, parallelised with rayon.
//!
//! Every sweep collects its results in input order, so output does not
//! depend on the number of worker threads.

use rayon::prelude::*;

use torus_spectra_core::bounds::{compare_walks, compare_walks_vs_m, BoundsError, WalkComparison};
use torus_spectra_core::deletion::{analytic_result, spectral_radius_after_deletion, DeletionError, Removal, ROOT_TOL};
use torus_spectra_core::sis::{self, Mode, Seeds, SisError, SisParams, Trajectory};
use torus_spectra_core::topology::{build_torus, TopologyError};
use torus_spectra_core::{Graph, TorusSpec};

use crate::table::{num, opt, Table};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "TORUS_SPECTRA_THREADS";

/// Sizes the global pool from [`THREADS_ENV`] if it is set to a positive
/// integer. Returns the resulting thread count.
pub fn configure_threads() -> usize {
    let requested = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    if let Some(n) = requested {
        // a second call keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

/// Monte Carlo run with replicas spread across the pool.
pub fn run_montecarlo(g: &Graph, params: &SisParams, replicas: usize, seed: u64) -> Result<Trajectory, SisError> {
    if replicas == 0 {
        return Err(SisError::NoReplicas);
    }
    let counts = (0..replicas as u64)
        .into_par_iter()
        .map(|r| sis::run_replica(g, params, seed, r))
        .collect::<Result<Vec<_>, _>>()?;
    sis::aggregate(&counts, seed)
}

pub fn run_sis(g: &Graph, params: &SisParams, mode: Mode, replicas: usize, seed: u64) -> Result<Trajectory, SisError> {
    match mode {
        Mode::MeanField => sis::run_meanfield(g, params, seed),
        Mode::MonteCarlo => run_montecarlo(g, params, replicas, seed),
    }
}

pub fn trajectory_table(traj: &Trajectory) -> Table {
    let with_std = traj.mode == Mode::MonteCarlo;
    let mut table =
        if with_std { Table::new(["t", "infected_mean", "infected_std"]) } else { Table::new(["t", "infected_mean"]) };
    for row in &traj.rows {
        let mut cells = vec![row.t.to_string(), num(row.infected_mean)];
        if with_std {
            cells.push(opt(row.infected_std));
        }
        table.push(cells);
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct SisScenario {
    pub len: usize,
    pub beta: f64,
    pub deltas: Vec<f64>,
    pub seeds: usize,
    pub steps: usize,
    pub replicas: usize,
    pub rng_seed: u64,
}

impl Default for SisScenario {
    /// 900 nodes with spectral radius 4, 20 seeds, `β = 0.1`, `δ ∈ {0.2, 0.6}`.
    fn default() -> Self {
        Self {
            len: 30,
            beta: 0.1,
            deltas: vec![0.2, 0.6],
            seeds: 20,
            steps: 500,
            replicas: 100,
            rng_seed: sis::DEFAULT_RNG_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SisScenarioRun {
    pub delta: f64,
    pub verdict: sis::ThresholdVerdict,
    pub meanfield: Trajectory,
    pub montecarlo: Trajectory,
}

/// Infected counts over time on `T^2_len` for each recovery rate.
pub fn sis_scenarios(s: &SisScenario) -> Result<Vec<SisScenarioRun>, SweepError> {
    let spec = TorusSpec::new(2, s.len)?;
    let g = build_torus(spec);
    s.deltas
        .iter()
        .map(|&delta| -> Result<_, SweepError> {
            let params = SisParams::new(s.beta, delta, s.steps, Seeds::Count(s.seeds))?;
            Ok(SisScenarioRun {
                delta,
                verdict: sis::torus_threshold(spec, &params),
                meanfield: sis::run_meanfield(&g, &params, s.rng_seed)?,
                montecarlo: run_montecarlo(&g, &params, s.replicas, s.rng_seed)?,
            })
        })
        .collect()
}

pub fn sis_scenarios_table(runs: &[SisScenarioRun]) -> Table {
    let mut table = Table::new(["delta", "stable", "t", "meanfield", "montecarlo_mean", "montecarlo_std"]);
    for run in runs {
        for (mf, mc) in run.meanfield.rows.iter().zip(&run.montecarlo.rows) {
            table.push([
                num(run.delta),
                run.verdict.stable.to_string(),
                mf.t.to_string(),
                num(mf.infected_mean),
                num(mc.infected_mean),
                opt(mc.infected_std),
            ]);
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRow {
    pub len: usize,
    pub removal: Removal,
    pub rho_analytic: f64,
    pub rho_oracle: Option<f64>,
    /// `2d - rho_analytic`.
    pub reduction: f64,
}

fn reduction_row(spec: TorusSpec, removal: Removal, oracle: bool) -> Result<ReductionRow, DeletionError> {
    let result = if oracle {
        spectral_radius_after_deletion(spec, removal, ROOT_TOL)?
    } else {
        analytic_result(spec, removal, ROOT_TOL)?
    };
    Ok(ReductionRow {
        len: spec.len(),
        reduction: result.reduction(),
        rho_analytic: result.spectral_radius,
        rho_oracle: result.oracle_radius,
        removal: result.removal,
    })
}

/// Spectral radius reduction from removing one node of `T^dim_m` for each `m`.
pub fn single_node_reductions(dim: usize, lens: &[usize], oracle: bool) -> Result<Vec<ReductionRow>, DeletionError> {
    lens.par_iter()
        .map(|&m| {
            let spec = TorusSpec::new(dim, m)?;
            reduction_row(spec, Removal::Node(0), oracle)
        })
        .collect()
}

pub fn single_node_table(rows: &[ReductionRow]) -> Table {
    let mut table = Table::new(["m", "rho_reduction", "rho_analytic", "rho_oracle"]);
    for r in rows {
        table.push([r.len.to_string(), num(r.reduction), num(r.rho_analytic), opt(r.rho_oracle)]);
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapCell {
    pub node: usize,
    pub coord: Vec<usize>,
    pub row: ReductionRow,
}

/// Reduction after removing the central node of `T^2_len` and one more node,
/// for every choice of the second node.
pub fn pair_heatmap(len: usize, oracle: bool) -> Result<Vec<HeatmapCell>, DeletionError> {
    let spec = TorusSpec::new(2, len)?;
    let center = spec.central_node();
    (0..spec.node_count())
        .into_par_iter()
        .filter(|&j| j != center)
        .map(|j| {
            let coord = spec.coord(j)?.0;
            let row = reduction_row(spec, Removal::Nodes(vec![center, j]), oracle)?;
            Ok(HeatmapCell { node: j, coord, row })
        })
        .collect()
}

pub fn heatmap_table(cells: &[HeatmapCell]) -> Table {
    let mut table = Table::new(["node", "x", "y", "rho_reduction", "rho_analytic", "rho_oracle"]);
    for c in cells {
        table.push([
            c.node.to_string(),
            c.coord[0].to_string(),
            c.coord[1].to_string(),
            num(c.row.reduction),
            num(c.row.rho_analytic),
            opt(c.row.rho_oracle),
        ]);
    }
    table
}

/// Closed-walk counts for every even length up to `max_length` on `T^2_len`.
pub fn walks_by_length(len: usize, max_length: usize) -> Result<Vec<WalkComparison>, BoundsError> {
    compare_walks(len, max_length)
}

/// Closed-walk counts of one length across torus sizes.
pub fn walks_by_side(length: usize, lens: &[usize]) -> Result<Vec<WalkComparison>, BoundsError> {
    lens.par_iter().map(|&m| compare_walks_vs_m(length, &[m]).map(|mut v| v.remove(0))).collect()
}

pub fn walk_count_table(rows: &[WalkComparison], key: WalkKey) -> Table {
    let mut table = Table::new([key.name(), "torus", "lattice", "percent_difference"]);
    for r in rows {
        table.push([key.value(r).to_string(), r.torus.to_string(), r.lattice.to_string(), num(r.percent_difference)]);
    }
    table
}

pub fn walk_percent_table(rows: &[WalkComparison], key: WalkKey) -> Table {
    let mut table = Table::new([key.name(), "percent_difference"]);
    for r in rows {
        table.push([key.value(r).to_string(), num(r.percent_difference)]);
    }
    table
}

/// Which column indexes a walk comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKey {
    Length,
    Side,
}

impl WalkKey {
    fn name(self) -> &'static str {
        match self {
            Self::Length => "length",
            Self::Side => "m",
        }
    }

    fn value(self, r: &WalkComparison) -> usize {
        match self {
            Self::Length => r.length,
            Self::Side => r.len,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Deletion(#[from] DeletionError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Sis(#[from] SisError),
}
