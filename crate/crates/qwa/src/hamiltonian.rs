//! From an interaction graph to a matrix product operator on a 1D site order.
//!
//! `H = -sum_(i,j) J_ij sz_i sz_j - Gamma sum_i sx_i - sum_i h_i sz_i`
//!
//! Chains map to the line directly, ladders are already indexed column-major
//! (bandwidth = width), and random graphs get a reverse Cuthill-McKee order.
//! The MPO is an exact finite-state encoding with one carrier channel per
//! position in the bandwidth window, so the operator bond dimension is
//! `bandwidth + 2`.

use std::collections::HashMap;

use ndarray::{Array3, Array4};
use thiserror::Error;

use crate::instance::{Geometry, Instance};
use crate::mps::{lmat, rmat, MatrixProductState};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("instance graph is disconnected; no 1D ordering covers it")]
    Disconnected,
    #[error("operator and state have different site counts: {mpo} vs {mps}")]
    SizeMismatch { mpo: usize, mps: usize },
    #[error("transverse field must be non-negative, got {0}")]
    NegativeGamma(f64),
}

/// A bijection between graph sites and chain positions, with the resulting
/// interaction bandwidth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteOrdering {
    position_of: Vec<usize>,
    site_at: Vec<usize>,
    bandwidth: usize,
}

impl SiteOrdering {
    pub fn position_of(&self, site: usize) -> usize {
        self.position_of[site]
    }

    pub fn site_at(&self, position: usize) -> usize {
        self.site_at[position]
    }

    pub fn positions(&self) -> &[usize] {
        &self.position_of
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn n_sites(&self) -> usize {
        self.position_of.len()
    }
}

/// Chooses the 1D order DMRG sweeps over: identity for chains and ladders
/// (ladder sites are generated column-major already), reverse Cuthill-McKee
/// for random graphs. Deterministic given the instance.
pub fn order_sites<S: Scalar>(instance: &Instance<S>) -> Result<SiteOrdering, HamiltonianError> {
    let n = instance.n_sites();
    let position_of: Vec<usize> = match instance.geometry() {
        Geometry::Chain { .. } | Geometry::Ladder { .. } => (0..n).collect(),
        Geometry::RandomRegular { .. } => {
            let adj = neighbor_lists(instance);
            reverse_cuthill_mckee(&adj)?
        }
    };
    let mut site_at = vec![0usize; n];
    for (site, &p) in position_of.iter().enumerate() {
        site_at[p] = site;
    }
    let bandwidth = instance
        .edges()
        .iter()
        .map(|e| position_of[e.i].abs_diff(position_of[e.j]))
        .max()
        .unwrap_or(0);
    // connectivity check for the geometries that skipped the BFS
    if !matches!(instance.geometry(), Geometry::RandomRegular { .. }) && n > 1 {
        let adj = neighbor_lists(instance);
        if bfs_order(&adj, 0).len() != n {
            return Err(HamiltonianError::Disconnected);
        }
    }
    Ok(SiteOrdering {
        position_of,
        site_at,
        bandwidth,
    })
}

fn neighbor_lists<S: Scalar>(instance: &Instance<S>) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); instance.n_sites()];
    for e in instance.edges() {
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    adj
}

fn bfs_order(adj: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut order = vec![root];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
        nbrs.sort_by_key(|&w| (adj[w].len(), w));
        for w in nbrs {
            seen[w] = true;
            order.push(w);
        }
    }
    order
}

fn bfs_ecc(adj: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut ecc = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                ecc = ecc.max(dist[w]);
                queue.push_back(w);
            }
        }
    }
    let last_level: Vec<usize> = (0..adj.len()).filter(|&v| dist[v] == ecc).collect();
    (ecc, last_level)
}

fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Result<Vec<usize>, HamiltonianError> {
    let n = adj.len();
    // pseudo-peripheral root by repeated level structures
    let mut root = (0..n).min_by_key(|&v| (adj[v].len(), v)).unwrap();
    let (mut ecc, mut level) = bfs_ecc(adj, root);
    loop {
        let candidate = level
            .iter()
            .copied()
            .min_by_key(|&v| (adj[v].len(), v))
            .unwrap();
        let (cand_ecc, cand_level) = bfs_ecc(adj, candidate);
        if cand_ecc > ecc {
            root = candidate;
            ecc = cand_ecc;
            level = cand_level;
        } else {
            break;
        }
    }
    let order = bfs_order(adj, root);
    if order.len() != n {
        return Err(HamiltonianError::Disconnected);
    }
    let mut position_of = vec![0usize; n];
    for (pos, &site) in order.iter().rev().enumerate() {
        position_of[site] = pos;
    }
    Ok(position_of)
}

/// An exact matrix product operator; tensor index order is
/// `(left op bond, phys out, phys in, right op bond)`.
#[derive(Debug, Clone)]
pub struct MatrixProductOperator<S> {
    tensors: Vec<Array4<S>>,
    bandwidth: usize,
}

impl<S: Scalar> MatrixProductOperator<S> {
    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn tensor(&self, i: usize) -> &Array4<S> {
        &self.tensors[i]
    }

    pub fn max_op_bond(&self) -> usize {
        self.tensors.iter().map(|t| t.dim().3).max().unwrap_or(1)
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }
}

/// Builds the MPO for `instance` at transverse field `gamma` under `ordering`.
///
/// Automaton states per op bond: 0 carries the identity before any term,
/// `1..=bandwidth` carry a placed `sz` across the interaction window, and the
/// last state collects completed terms.
pub fn build_mpo<S: Scalar>(
    instance: &Instance<S>,
    ordering: &SiteOrdering,
    gamma: S,
) -> Result<MatrixProductOperator<S>, HamiltonianError> {
    if gamma < S::zero() {
        return Err(HamiltonianError::NegativeGamma(gamma.to_real()));
    }
    let n = instance.n_sites();
    let bw = ordering.bandwidth().max(1);
    let d_op = bw + 2;
    let done = bw + 1;

    // couplings keyed by chain positions (low, high)
    let mut coupling_at: HashMap<(usize, usize), S> = HashMap::new();
    for e in instance.edges() {
        let (a, b) = (ordering.position_of(e.i), ordering.position_of(e.j));
        coupling_at.insert((a.min(b), a.max(b)), e.coupling);
    }

    let mut tensors = Vec::with_capacity(n);
    for p in 0..n {
        let site = ordering.site_at(p);
        let h = instance.fields_z()[site];
        if n == 1 {
            let mut t = Array4::<S>::zeros((1, 2, 2, 1));
            t[[0, 0, 1, 0]] = -gamma;
            t[[0, 1, 0, 0]] = -gamma;
            t[[0, 0, 0, 0]] = -h;
            t[[0, 1, 1, 0]] = h;
            tensors.push(t);
            continue;
        }
        let mut w = Array4::<S>::zeros((d_op, 2, 2, d_op));
        // identity channels
        for s in 0..2 {
            w[[0, s, s, 0]] = S::one();
            w[[done, s, s, done]] = S::one();
        }
        // on-site term: -gamma sx - h sz
        w[[0, 0, 1, done]] += -gamma;
        w[[0, 1, 0, done]] += -gamma;
        w[[0, 0, 0, done]] += -h;
        w[[0, 1, 1, done]] += h;
        // start a coupling here
        w[[0, 0, 0, 1]] = S::one();
        w[[0, 1, 1, 1]] = -S::one();
        // carry and complete
        for k in 1..=bw {
            if k < bw {
                for s in 0..2 {
                    w[[k, s, s, k + 1]] = S::one();
                }
            }
            if p >= k {
                if let Some(&j) = coupling_at.get(&(p - k, p)) {
                    w[[k, 0, 0, done]] += -j;
                    w[[k, 1, 1, done]] += j;
                }
            }
        }
        let t = if p == 0 {
            w.slice(ndarray::s![0..1, .., .., ..]).to_owned()
        } else if p == n - 1 {
            w.slice(ndarray::s![.., .., .., done..done + 1]).to_owned()
        } else {
            w
        };
        tensors.push(t);
    }
    Ok(MatrixProductOperator {
        tensors,
        bandwidth: bw,
    })
}

/// Left-to-right transfer environments; index order `(bra bond, op bond, ket bond)`.
pub(crate) type Env<S> = Array3<S>;

pub(crate) fn unit_env<S: Scalar>() -> Env<S> {
    Array3::from_elem((1, 1, 1), S::one())
}

/// Absorbs one site into a left environment.
pub(crate) fn advance_left<S: Scalar>(env: &Env<S>, a: &Array3<S>, w: &Array4<S>) -> Env<S> {
    let (co, b, ci) = env.dim();
    let (al, ap, ar) = a.dim();
    let (wb, _, _, wb2) = w.dim();
    debug_assert_eq!(ci, al);
    debug_assert_eq!(b, wb);
    // t1[co, b, s_in, a_in]
    let t1 = env
        .view()
        .into_shape_with_order((co * b, ci))
        .unwrap()
        .dot(&rmat(a));
    let t1 = t1.into_shape_with_order((co, b, ap, ar)).unwrap();
    // t2[s_out, b', co, a_in]
    let t1m = t1
        .permuted_axes([1, 2, 0, 3])
        .as_standard_layout()
        .into_shape_with_order((b * ap, co * ar))
        .unwrap()
        .to_owned();
    let wm = w
        .view()
        .permuted_axes([1, 3, 0, 2])
        .as_standard_layout()
        .into_shape_with_order((2 * wb2, wb * 2))
        .unwrap()
        .to_owned();
    let t2 = wm.dot(&t1m).into_shape_with_order((2, wb2, co, ar)).unwrap();
    // out[a_out, b', a_in]
    let t2m = t2
        .permuted_axes([2, 0, 1, 3])
        .as_standard_layout()
        .into_shape_with_order((co * 2, wb2 * ar))
        .unwrap()
        .to_owned();
    let am = lmat(a);
    am.t()
        .dot(&t2m)
        .into_shape_with_order((ar, wb2, ar))
        .unwrap()
}

/// Absorbs one site into a right environment (covering sites to the right).
pub(crate) fn advance_right<S: Scalar>(env: &Env<S>, a: &Array3<S>, w: &Array4<S>) -> Env<S> {
    let (co, b, ci) = env.dim();
    let (al, ap, ar) = a.dim();
    let (wb, _, _, wb2) = w.dim();
    debug_assert_eq!(ci, ar);
    debug_assert_eq!(b, wb2);
    // t1[l_ket, s_in, co, b]
    let envm = env
        .view()
        .permuted_axes([2, 0, 1])
        .as_standard_layout()
        .into_shape_with_order((ci, co * b))
        .unwrap()
        .to_owned();
    let t1 = lmat(a)
        .dot(&envm)
        .into_shape_with_order((al, ap, co, b))
        .unwrap();
    // t2[b_l, s_out, l_ket, co]
    let t1m = t1
        .permuted_axes([1, 3, 0, 2])
        .as_standard_layout()
        .into_shape_with_order((ap * b, al * co))
        .unwrap()
        .to_owned();
    let wm = w.view().into_shape_with_order((wb * 2, 2 * wb2)).unwrap();
    let t2 = wm.dot(&t1m).into_shape_with_order((wb, 2, al, co)).unwrap();
    // out[l_bra, b_l, l_ket]
    let t2m = t2
        .permuted_axes([1, 3, 0, 2])
        .as_standard_layout()
        .into_shape_with_order((2 * co, wb * al))
        .unwrap()
        .to_owned();
    rmat(a)
        .dot(&t2m)
        .into_shape_with_order((al, wb, al))
        .unwrap()
}

/// `<psi|H|psi>` for a normalized state.
pub fn energy<S: Scalar>(
    mps: &MatrixProductState<S>,
    mpo: &MatrixProductOperator<S>,
) -> Result<S, HamiltonianError> {
    if mps.n_sites() != mpo.n_sites() {
        return Err(HamiltonianError::SizeMismatch {
            mpo: mpo.n_sites(),
            mps: mps.n_sites(),
        });
    }
    let mut env = unit_env();
    for i in 0..mps.n_sites() {
        env = advance_left(&env, mps.tensor(i), mpo.tensor(i));
    }
    Ok(env[[0, 0, 0]])
}
