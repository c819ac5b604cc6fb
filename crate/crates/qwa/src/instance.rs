//! Spin-glass problem instances: weighted interaction graphs on chains,
//! rectangular ladders and random fixed-connectivity graphs.
//!
//! Generation is a pure function of `(geometry, seed)`: couplings are drawn
//! uniformly from `[-1, 1]` along a fixed edge enumeration order, so the same
//! inputs always reproduce the same instance byte for byte.

use serde::Serialize;
use thiserror::Error;

use crate::rng::SeededRng;
use crate::Scalar;

/// Retry budget for the random-regular pairing construction.
pub const PAIRING_RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("random-regular pairing failed after {budget} retries (no simple connected graph)")]
    PairingRetriesExceeded { budget: usize },
    #[error("configuration has {got} spins but the instance has {expected} sites")]
    ConfigLengthMismatch { got: usize, expected: usize },
    #[error("edge ({i}, {j}) is invalid: {reason}")]
    BadEdge { i: usize, j: usize, reason: String },
    #[error("coupling {value} on edge ({i}, {j}) is outside [-1, 1]")]
    CouplingOutOfRange { i: usize, j: usize, value: f64 },
    #[error("expected {expected} edges for {geometry}, got {got}")]
    EdgeCountMismatch {
        geometry: String,
        expected: usize,
        got: usize,
    },
    #[error("field list has {got} entries but the instance has {expected} sites")]
    FieldLengthMismatch { got: usize, expected: usize },
}

/// Interaction graph family, with the parameters that fix the site count and
/// edge layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Geometry {
    /// Open chain of `length` sites.
    Chain { length: usize },
    /// Rectangular strip of `length` rungs and `width` legs. Sites are
    /// indexed column-major: `(x, y) -> x * width + y`, which keeps every
    /// coupling within a window of `width` under the natural 1D order.
    Ladder { length: usize, width: usize },
    /// Simple connected graph where every vertex has degree `degree`.
    RandomRegular { n: usize, degree: usize },
}

impl Geometry {
    pub fn n_sites(&self) -> usize {
        match *self {
            Geometry::Chain { length } => length,
            Geometry::Ladder { length, width } => length * width,
            Geometry::RandomRegular { n, .. } => n,
        }
    }

    pub fn expected_edges(&self) -> usize {
        match *self {
            Geometry::Chain { length } => length - 1,
            Geometry::Ladder { length, width } => width * (length - 1) + length * (width - 1),
            Geometry::RandomRegular { n, degree } => n * degree / 2,
        }
    }

    /// Structural validity; single-site systems are allowed so probe setups
    /// can be hand-built.
    fn validate(&self) -> Result<(), InstanceError> {
        let bad = |msg: String| Err(InstanceError::InvalidGeometry(msg));
        match *self {
            Geometry::Chain { length } if length < 1 => bad("empty chain".into()),
            Geometry::Ladder { length, width } if length < 1 || width < 1 => {
                bad(format!("ladder {length}x{width} needs length >= 1, width >= 1"))
            }
            Geometry::RandomRegular { n, degree } => {
                if degree == 0 || degree >= n {
                    bad(format!("degree {degree} not in 1..{n}"))
                } else if n * degree % 2 != 0 {
                    bad(format!("n*degree = {} is odd", n * degree))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Stricter precondition for random generation.
    fn validate_for_generation(&self) -> Result<(), InstanceError> {
        self.validate()?;
        let bad = |msg: String| Err(InstanceError::InvalidGeometry(msg));
        match *self {
            Geometry::Chain { length } if length < 2 => bad(format!("chain length {length} < 2")),
            Geometry::Ladder { length, .. } if length < 2 => {
                bad(format!("ladder length {length} < 2"))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in file headers and run records.
    pub fn label(&self) -> String {
        match *self {
            Geometry::Chain { length } => format!("chain {length}"),
            Geometry::Ladder { length, width } => format!("ladder {length} {width}"),
            Geometry::RandomRegular { n, degree } => format!("rr {n} {degree}"),
        }
    }
}

/// One weighted edge of the interaction graph, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge<S> {
    pub i: usize,
    pub j: usize,
    pub coupling: S,
}

/// A spin-glass instance: sites, couplings, longitudinal fields, and the
/// provenance needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    n_sites: usize,
    edges: Vec<Edge<S>>,
    fields_z: Vec<S>,
    geometry: Geometry,
    seed: u64,
}

/// Spin assignment, one value in `{+1, -1}` per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration(pub Vec<i8>);

impl SpinConfiguration {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spin(&self, site: usize) -> i8 {
        self.0[site]
    }

    pub fn flipped(&self) -> Self {
        SpinConfiguration(self.0.iter().map(|s| -s).collect())
    }

    /// All-up configuration.
    pub fn all_up(n: usize) -> Self {
        SpinConfiguration(vec![1; n])
    }

    /// Representative of the pair `{c, -c}` with the first spin up; used to
    /// deduplicate configurations related by the global flip.
    pub fn canonical(&self) -> Self {
        if self.0.first().copied().unwrap_or(1) < 0 {
            self.flipped()
        } else {
            self.clone()
        }
    }

    /// Index into a dense state vector; site `k` occupies bit `k`, with bit
    /// value 0 for spin up (+1).
    pub fn basis_index(&self) -> usize {
        let mut idx = 0usize;
        for (k, &s) in self.0.iter().enumerate() {
            if s < 0 {
                idx |= 1 << k;
            }
        }
        idx
    }

    pub fn from_basis_index(idx: usize, n: usize) -> Self {
        SpinConfiguration((0..n).map(|k| if idx >> k & 1 == 0 { 1 } else { -1 }).collect())
    }

    /// Reorders the spins: entry `p` of the result is the spin of the site
    /// placed at position `p` by `position_of`.
    pub fn permuted(&self, position_of: &[usize]) -> Self {
        let mut out = vec![0i8; self.0.len()];
        for (site, &p) in position_of.iter().enumerate() {
            out[p] = self.0[site];
        }
        SpinConfiguration(out)
    }
}

impl std::fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SpinConfiguration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1i8),
                '-' => Ok(-1i8),
                other => Err(format!("unexpected spin character {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SpinConfiguration)
    }
}

impl<S: Scalar> Instance<S> {
    /// Draws a fresh instance for `geometry` from the stream keyed by `seed`.
    /// All longitudinal fields start at zero; probes and symmetry-breaking
    /// fields are injected later through [`Instance::with_field`].
    pub fn generate(geometry: Geometry, seed: u64) -> Result<Self, InstanceError> {
        geometry.validate_for_generation()?;
        let mut rng = SeededRng::new(seed);
        let pairs: Vec<(usize, usize)> = match geometry {
            Geometry::Chain { length } => (0..length - 1).map(|i| (i, i + 1)).collect(),
            Geometry::Ladder { length, width } => ladder_edges(length, width),
            Geometry::RandomRegular { n, degree } => random_regular_edges(n, degree, &mut rng)?,
        };
        let edges = pairs
            .into_iter()
            .map(|(i, j)| Edge {
                i,
                j,
                coupling: S::from_real(rng.uniform_pm1()),
            })
            .collect();
        Ok(Instance {
            n_sites: geometry.n_sites(),
            edges,
            fields_z: vec![S::zero(); geometry.n_sites()],
            geometry,
            seed,
        })
    }

    /// Validating constructor for hand-built or parsed instances.
    pub fn new(
        geometry: Geometry,
        seed: u64,
        edges: Vec<Edge<S>>,
        fields_z: Vec<S>,
    ) -> Result<Self, InstanceError> {
        geometry.validate()?;
        let n = geometry.n_sites();
        if fields_z.len() != n {
            return Err(InstanceError::FieldLengthMismatch {
                got: fields_z.len(),
                expected: n,
            });
        }
        if edges.len() != geometry.expected_edges() {
            return Err(InstanceError::EdgeCountMismatch {
                geometry: geometry.label(),
                expected: geometry.expected_edges(),
                got: edges.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.i >= n || e.j >= n {
                return Err(InstanceError::BadEdge {
                    i: e.i,
                    j: e.j,
                    reason: format!("site index out of range 0..{n}"),
                });
            }
            if e.i == e.j {
                return Err(InstanceError::BadEdge {
                    i: e.i,
                    j: e.j,
                    reason: "self-loop".into(),
                });
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(InstanceError::BadEdge {
                    i: e.i,
                    j: e.j,
                    reason: "duplicate edge".into(),
                });
            }
            if !(e.coupling.abs() <= S::one()) {
                return Err(InstanceError::CouplingOutOfRange {
                    i: e.i,
                    j: e.j,
                    value: e.coupling.to_real(),
                });
            }
        }
        Ok(Instance {
            n_sites: n,
            edges,
            fields_z,
            geometry,
            seed,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn fields_z(&self) -> &[S] {
        &self.fields_z
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn all_fields_zero(&self) -> bool {
        self.fields_z.iter().all(|h| *h == S::zero())
    }

    /// Copy of the instance with `h` added to the longitudinal field at `site`.
    pub fn with_field(&self, site: usize, h: S) -> Self {
        let mut out = self.clone();
        out.fields_z[site] += h;
        out
    }

    /// `-sum J_ij s_i s_j - sum h_i s_i`.
    pub fn classical_energy(&self, config: &SpinConfiguration) -> Result<S, InstanceError> {
        if config.len() != self.n_sites {
            return Err(InstanceError::ConfigLengthMismatch {
                got: config.len(),
                expected: self.n_sites,
            });
        }
        let mut energy = S::zero();
        for e in &self.edges {
            let ss = S::from_real(f64::from(config.spin(e.i) * config.spin(e.j)));
            energy -= e.coupling * ss;
        }
        for (h, &s) in self.fields_z.iter().zip(&config.0) {
            energy -= *h * S::from_real(f64::from(s));
        }
        Ok(energy)
    }

    /// `sum |J_ij| + sum |h_i|`, an upper bound on `|classical_energy|`.
    pub fn energy_bound(&self) -> S {
        let j: S = self.edges.iter().map(|e| e.coupling.abs()).sum();
        let h: S = self.fields_z.iter().map(|h| h.abs()).sum();
        j + h
    }

    /// Neighbor lists: `adjacency()[i]` holds `(j, J_ij)` for every edge at `i`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, S)>> {
        let mut adj = vec![Vec::new(); self.n_sites];
        for e in &self.edges {
            adj[e.i].push((e.j, e.coupling));
            adj[e.j].push((e.i, e.coupling));
        }
        adj
    }

    /// Relabels sites so that site `s` becomes `position_of[s]`; used to put
    /// an instance into a 1D solver order. Geometry tag and seed are kept for
    /// provenance.
    pub fn relabeled(&self, position_of: &[usize]) -> Self {
        let mut edges: Vec<Edge<S>> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (position_of[e.i], position_of[e.j]);
                Edge {
                    i: a.min(b),
                    j: a.max(b),
                    coupling: e.coupling,
                }
            })
            .collect();
        edges.sort_by_key(|e| (e.i, e.j));
        let mut fields_z = vec![S::zero(); self.n_sites];
        for (site, &p) in position_of.iter().enumerate() {
            fields_z[p] = self.fields_z[site];
        }
        Instance {
            n_sites: self.n_sites,
            edges,
            fields_z,
            geometry: self.geometry,
            seed: self.seed,
        }
    }
}

fn ladder_edges(length: usize, width: usize) -> Vec<(usize, usize)> {
    let site = |x: usize, y: usize| x * width + y;
    let mut pairs = Vec::with_capacity(width * (length - 1) + length * (width - 1));
    for x in 0..length {
        for y in 0..width.saturating_sub(1) {
            pairs.push((site(x, y), site(x, y + 1)));
        }
        if x + 1 < length {
            for y in 0..width {
                pairs.push((site(x, y), site(x + 1, y)));
            }
        }
    }
    pairs
}

/// Pairing (configuration) model: shuffle `n * degree` stubs, pair them off,
/// and reject draws with self-loops, multi-edges, or a disconnected result.
fn random_regular_edges(
    n: usize,
    degree: usize,
    rng: &mut SeededRng,
) -> Result<Vec<(usize, usize)>, InstanceError> {
    let mut stubs: Vec<usize> = (0..n * degree).map(|s| s / degree).collect();
    'attempt: for _ in 0..PAIRING_RETRY_BUDGET {
        rng.shuffle(&mut stubs);
        let mut seen = std::collections::HashSet::new();
        let mut pairs = Vec::with_capacity(n * degree / 2);
        for chunk in stubs.chunks_exact(2) {
            let (a, b) = (chunk[0].min(chunk[1]), chunk[0].max(chunk[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            pairs.push((a, b));
        }
        if !is_connected(n, &pairs) {
            continue 'attempt;
        }
        pairs.sort_unstable();
        return Ok(pairs);
    }
    Err(InstanceError::PairingRetriesExceeded {
        budget: PAIRING_RETRY_BUDGET,
    })
}

fn is_connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}
