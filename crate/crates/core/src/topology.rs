//! Grids, rings, d-dimensional tori and their vertex/edge-deleted variants.
//!
//! Nodes are 0-based and laid out row-major with axis 0 varying fastest:
//! node `u` of a `d`-dimensional structure with side `m` has coordinates
//! `c_k = (u / m^k) mod m`. For `d = 2` this is `x = u mod m`, `y = u / m`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use thiserror::Error;

/// Upper limit on `m^d`; anything larger cannot be materialized sensibly.
pub const MAX_NODES: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("degenerate topology: dim = {dim}, len = {len} (need dim >= 1 and len >= {min_len})")]
    Degenerate { dim: usize, len: usize, min_len: usize },
    #[error("topology too large: {len}^{dim} nodes exceeds {MAX_NODES}")]
    TooLarge { dim: usize, len: usize },
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("duplicate node {0} in deletion set")]
    DuplicateNode(usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge {{{0}, {1}}} is not present")]
    MissingEdge(usize, usize),
    #[error("edge {{{0}, {1}}} is already present")]
    DuplicateEdge(usize, usize),
    #[error("coordinate has {got} axes, expected {expected}")]
    CoordinateArity { got: usize, expected: usize },
    #[error("coordinate value {value} out of range [0, {len})")]
    CoordinateOutOfRange { value: usize, len: usize },
}

/// A `d`-dimensional torus of side `m`, described without materializing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusSpec {
    dim: usize,
    len: usize,
}

impl TorusSpec {
    /// Side lengths below 3 would produce parallel edges or self-loops.
    pub const MIN_LEN: usize = 3;

    pub fn new(dim: usize, len: usize) -> Result<Self, TopologyError> {
        checked_node_count(dim, len, Self::MIN_LEN)?;
        Ok(Self { dim, len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    /// `m^d`.
    pub fn node_count(&self) -> usize {
        self.len.pow(self.dim as u32)
    }

    /// Degree of every node, and the spectral radius of the intact torus.
    pub fn degree(&self) -> usize {
        2 * self.dim
    }

    pub fn edge_count(&self) -> usize {
        self.dim * self.node_count()
    }

    pub fn coord(&self, node: usize) -> Result<NodeCoord, TopologyError> {
        coord_of(self.dim, self.len, node)
    }

    pub fn index(&self, coord: &NodeCoord) -> Result<usize, TopologyError> {
        index_of(self.dim, self.len, coord)
    }

    /// True when `{i, j}` is an edge of the torus.
    pub fn is_edge(&self, i: usize, j: usize) -> Result<bool, TopologyError> {
        let (ci, cj) = (self.coord(i)?, self.coord(j)?);
        let mut differing = ci.0.iter().zip(&cj.0).filter(|(a, b)| a != b);
        let Some((&a, &b)) = differing.next() else {
            return Ok(false);
        };
        if differing.next().is_some() {
            return Ok(false);
        }
        let m = self.len;
        Ok((a + 1) % m == b || (b + 1) % m == a)
    }

    /// The node whose coordinates are all `floor(m / 2)`.
    pub fn central_node(&self) -> usize {
        let c = self.len / 2;
        (0..self.dim).fold(0, |acc, _| acc * self.len + c)
    }
}

/// Coordinates of a node, one entry per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeCoord(pub Vec<usize>);

impl NodeCoord {
    pub fn axes(&self) -> &[usize] {
        &self.0
    }
}

fn checked_node_count(dim: usize, len: usize, min_len: usize) -> Result<usize, TopologyError> {
    if dim < 1 || len < min_len {
        return Err(TopologyError::Degenerate { dim, len, min_len });
    }
    u32::try_from(dim)
        .ok()
        .and_then(|d| len.checked_pow(d))
        .filter(|&n| n <= MAX_NODES)
        .ok_or(TopologyError::TooLarge { dim, len })
}

fn coord_of(dim: usize, len: usize, node: usize) -> Result<NodeCoord, TopologyError> {
    let n = len.pow(dim as u32);
    if node >= n {
        return Err(TopologyError::NodeOutOfRange { node, n });
    }
    let mut rest = node;
    let coords = (0..dim)
        .map(|_| {
            let c = rest % len;
            rest /= len;
            c
        })
        .collect();
    Ok(NodeCoord(coords))
}

fn index_of(dim: usize, len: usize, coord: &NodeCoord) -> Result<usize, TopologyError> {
    if coord.0.len() != dim {
        return Err(TopologyError::CoordinateArity { got: coord.0.len(), expected: dim });
    }
    let mut index = 0;
    for &c in coord.0.iter().rev() {
        if c >= len {
            return Err(TopologyError::CoordinateOutOfRange { value: c, len });
        }
        index = index * len + c;
    }
    Ok(index)
}

/// Simple undirected graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph on `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (i, j) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(TopologyError::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(TopologyError::SelfLoop(i));
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let j = w[0];
                return Err(TopologyError::DuplicateEdge(i.min(j), i.max(j)));
            }
        }
        Ok(Self { adj })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        if self.adj.is_empty() {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / self.node_count() as f64
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.adj.len() && self.adj[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.node_count();
        let mut a = DMatrix::zeros(n, n);
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                a[(i, j)] = 1.0;
            }
        }
        a
    }

    /// `L = D - A`.
    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let mut l = -self.adjacency_matrix();
        for (i, list) in self.adj.iter().enumerate() {
            l[(i, i)] = list.len() as f64;
        }
        l
    }

    /// `y = A x` without forming `A`.
    pub fn apply_adjacency(&self, x: &[f64], y: &mut [f64]) {
        for (yi, list) in y.iter_mut().zip(&self.adj) {
            *yi = list.iter().map(|&j| x[j]).sum();
        }
    }

    /// Two-colorability check by breadth-first search over every component.
    pub fn is_bipartite(&self) -> bool {
        let n = self.node_count();
        let mut color: Vec<Option<bool>> = vec![None; n];
        let mut queue = Vec::new();
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            queue.push(start);
            while let Some(u) = queue.pop() {
                let cu = color[u].unwrap_or(false);
                for &v in &self.adj[u] {
                    match color[v] {
                        None => {
                            color[v] = Some(!cu);
                            queue.push(v);
                        }
                        Some(cv) if cv == cu => return false,
                        Some(_) => {}
                    }
                }
            }
        }
        true
    }

    /// Induced subgraph on the nodes not in `removed`, reindexed compactly.
    pub fn delete_nodes(&self, removed: &[usize]) -> Result<NodeDeletion, TopologyError> {
        let n = self.node_count();
        let mut keep = vec![true; n];
        for &node in removed {
            if node >= n {
                return Err(TopologyError::NodeOutOfRange { node, n });
            }
            if !keep[node] {
                return Err(TopologyError::DuplicateNode(node));
            }
            keep[node] = false;
        }
        let mut index_map = vec![None; n];
        let mut next = 0;
        for (old, slot) in index_map.iter_mut().enumerate() {
            if keep[old] {
                *slot = Some(next);
                next += 1;
            }
        }
        let adj = self
            .adj
            .iter()
            .enumerate()
            .filter(|(old, _)| keep[*old])
            .map(|(_, list)| list.iter().filter_map(|&j| index_map[j]).collect())
            .collect();
        Ok(NodeDeletion { graph: Self { adj }, index_map })
    }

    pub fn delete_edge(&self, i: usize, j: usize) -> Result<Self, TopologyError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if !self.has_edge(i, j) {
            return Err(TopologyError::MissingEdge(i.min(j), i.max(j)));
        }
        let mut adj = self.adj.clone();
        adj[i].retain(|&v| v != j);
        adj[j].retain(|&v| v != i);
        Ok(Self { adj })
    }

    pub fn add_edge(&self, i: usize, j: usize) -> Result<Self, TopologyError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(TopologyError::SelfLoop(i));
        }
        let (Err(pi), Err(pj)) = (self.adj[i].binary_search(&j), self.adj[j].binary_search(&i)) else {
            return Err(TopologyError::DuplicateEdge(i.min(j), i.max(j)));
        };
        let mut adj = self.adj.clone();
        adj[i].insert(pi, j);
        adj[j].insert(pj, i);
        Ok(Self { adj })
    }

    fn check_node(&self, node: usize) -> Result<(), TopologyError> {
        let n = self.node_count();
        if node >= n {
            return Err(TopologyError::NodeOutOfRange { node, n });
        }
        Ok(())
    }
}

/// Result of [`Graph::delete_nodes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDeletion {
    pub graph: Graph,
    /// `index_map[old]` is the new index of a surviving node, `None` if removed.
    pub index_map: Vec<Option<usize>>,
}

/// 2d-regular torus: node `u` is joined to `u ± e_k (mod m)` along every axis.
pub fn build_torus(spec: TorusSpec) -> Graph {
    lattice_graph(spec.dim, spec.len, true)
}

/// Grid of side `len` without wrap-around edges. `len = 2` is allowed here.
pub fn build_grid(dim: usize, len: usize) -> Result<Graph, TopologyError> {
    checked_node_count(dim, len, 2)?;
    Ok(lattice_graph(dim, len, false))
}

/// Ring (cycle) on `len` nodes; the one-dimensional torus.
pub fn build_ring(len: usize) -> Result<Graph, TopologyError> {
    Ok(build_torus(TorusSpec::new(1, len)?))
}

fn lattice_graph(dim: usize, len: usize, wrap: bool) -> Graph {
    let n = len.pow(dim as u32);
    let mut adj = vec![Vec::with_capacity(2 * dim); n];
    for (u, list) in adj.iter_mut().enumerate() {
        let mut stride = 1;
        for _ in 0..dim {
            let c = (u / stride) % len;
            let base = u - c * stride;
            if c + 1 < len {
                list.push(u + stride);
            } else if wrap {
                list.push(base);
            }
            if c > 0 {
                list.push(u - stride);
            } else if wrap {
                list.push(base + (len - 1) * stride);
            }
            stride *= len;
        }
        list.sort_unstable();
    }
    Graph { adj }
}
