//! Two-layer partnership graph.
//!
//! Layer L1 holds steady partnerships, which are always available for
//! interaction. Layer L2 holds casual acquaintances: an L2 edge can only be
//! used while it is active, and it is active only while both endpoints are
//! seeking a partner. A pair of agents carries at most one edge, so the layers
//! are disjoint by construction.

use std::collections::BTreeSet;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    /// L1: steady partnership.
    Steady,
    /// L2: casual partnership.
    Casual,
}

impl Layer {
    pub fn label(self) -> &'static str {
        match self {
            Layer::Steady => "L1",
            Layer::Casual => "L2",
        }
    }
}

/// One side of an edge as stored in an agent's adjacency list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub id: AgentId,
    pub layer: Layer,
    /// Always true for steady edges.
    pub active: bool,
    /// The edge was created or activated by an app match.
    pub via_app: bool,
}

impl Neighbor {
    pub fn available(&self) -> bool {
        self.active
    }
}

/// Unordered pair with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey(pub AgentId, pub AgentId);

impl EdgeKey {
    pub fn new(a: AgentId, b: AgentId) -> Self {
        if a < b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on agent {0}")]
    SelfLoop(AgentId),
    #[error("agent {0} is not in the graph")]
    UnknownAgent(AgentId),
    #[error("agents {0} and {1} already share an edge")]
    Duplicate(AgentId, AgentId),
    #[error("no casual edge between {0} and {1}")]
    NoCasualEdge(AgentId, AgentId),
    #[error("casual edge between {0} and {1} is already active")]
    AlreadyActive(AgentId, AgentId),
    #[error("agents {0} and {1} are not both seeking")]
    NotSeeking(AgentId, AgentId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("adjacency of {0} lists {1} but not the reverse")]
    Asymmetric(AgentId, AgentId),
    #[error("pair ({0}, {1}) appears more than once")]
    DuplicatePair(AgentId, AgentId),
    #[error("self-loop on {0}")]
    SelfLoop(AgentId),
    #[error("active casual edge ({0}, {1}) with a non-seeking endpoint")]
    ActiveWithoutSeeking(AgentId, AgentId),
    #[error("edge index out of sync with adjacency at ({0}, {1})")]
    IndexMismatch(AgentId, AgentId),
    #[error("inactive steady edge ({0}, {1})")]
    InactiveSteady(AgentId, AgentId),
}

#[derive(Clone, Debug, Default)]
pub struct TwoLayerGraph {
    adj: Vec<Vec<Neighbor>>,
    steady: BTreeSet<EdgeKey>,
    active_casual: BTreeSet<EdgeKey>,
    casual_total: usize,
}

impl TwoLayerGraph {
    pub fn new(agents: usize) -> Self {
        TwoLayerGraph {
            adj: vec![Vec::new(); agents],
            ..Default::default()
        }
    }

    /// Makes room for ids up to and including `id`.
    pub fn ensure_agent(&mut self, id: AgentId) {
        if id.index() >= self.adj.len() {
            self.adj.resize_with(id.index() + 1, Vec::new);
        }
    }

    pub fn neighbors(&self, x: AgentId) -> &[Neighbor] {
        self.adj.get(x.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn edge(&self, x: AgentId, y: AgentId) -> Option<Neighbor> {
        self.neighbors(x).iter().copied().find(|n| n.id == y)
    }

    pub fn steady_count(&self) -> usize {
        self.steady.len()
    }

    pub fn casual_count(&self) -> usize {
        self.casual_total
    }

    pub fn active_casual_count(&self) -> usize {
        self.active_casual.len()
    }

    pub fn steady_edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.steady.iter().copied()
    }

    pub fn active_casual_edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.active_casual.iter().copied()
    }

    pub fn degree(&self, x: AgentId, layer: Layer) -> usize {
        self.neighbors(x).iter().filter(|n| n.layer == layer).count()
    }

    /// Steady edges plus active casual edges.
    pub fn available_degree(&self, x: AgentId) -> usize {
        self.neighbors(x).iter().filter(|n| n.available()).count()
    }

    pub fn add_edge(
        &mut self,
        x: AgentId,
        y: AgentId,
        layer: Layer,
        active: bool,
        via_app: bool,
    ) -> Result<(), GraphError> {
        if x == y {
            return Err(GraphError::SelfLoop(x));
        }
        for a in [x, y] {
            if a.index() >= self.adj.len() {
                return Err(GraphError::UnknownAgent(a));
            }
        }
        if self.edge(x, y).is_some() {
            return Err(GraphError::Duplicate(x, y));
        }
        let active = active || layer == Layer::Steady;
        self.adj[x.index()].push(Neighbor {
            id: y,
            layer,
            active,
            via_app,
        });
        self.adj[y.index()].push(Neighbor {
            id: x,
            layer,
            active,
            via_app,
        });
        let key = EdgeKey::new(x, y);
        match layer {
            Layer::Steady => {
                self.steady.insert(key);
            }
            Layer::Casual => {
                self.casual_total += 1;
                if active {
                    self.active_casual.insert(key);
                }
            }
        }
        Ok(())
    }

    fn set_side(&mut self, x: AgentId, y: AgentId, f: impl Fn(&mut Neighbor)) {
        if let Some(n) = self.adj[x.index()].iter_mut().find(|n| n.id == y) {
            f(n);
        }
    }

    fn update_edge(&mut self, x: AgentId, y: AgentId, f: impl Fn(&mut Neighbor) + Copy) {
        self.set_side(x, y, f);
        self.set_side(y, x, f);
    }

    pub fn remove_edge(&mut self, x: AgentId, y: AgentId) -> Option<Neighbor> {
        let pos = self.adj.get(x.index())?.iter().position(|n| n.id == y)?;
        let removed = self.adj[x.index()].swap_remove(pos);
        if let Some(pos) = self.adj[y.index()].iter().position(|n| n.id == x) {
            self.adj[y.index()].swap_remove(pos);
        }
        let key = EdgeKey::new(x, y);
        match removed.layer {
            Layer::Steady => {
                self.steady.remove(&key);
            }
            Layer::Casual => {
                self.casual_total -= 1;
                self.active_casual.remove(&key);
            }
        }
        Some(removed)
    }

    /// Drops every edge incident to `x`. Returns the number removed.
    pub fn remove_agent(&mut self, x: AgentId) -> usize {
        let Some(list) = self.adj.get_mut(x.index()) else {
            return 0;
        };
        let others: Vec<AgentId> = list.iter().map(|n| n.id).collect();
        for &y in &others {
            self.remove_edge(x, y);
        }
        others.len()
    }

    /// Marks an existing casual edge active, or inserts a new active casual
    /// edge. Used by app matching. Returns false when the pair already has an
    /// available edge (steady, or casual and active).
    pub fn open_casual(&mut self, x: AgentId, y: AgentId, via_app: bool) -> Result<bool, GraphError> {
        match self.edge(x, y) {
            None => {
                self.add_edge(x, y, Layer::Casual, true, via_app)?;
                Ok(true)
            }
            Some(n) if n.layer == Layer::Casual && !n.active => {
                self.update_edge(x, y, move |n| {
                    n.active = true;
                    n.via_app = via_app;
                });
                self.active_casual.insert(EdgeKey::new(x, y));
                Ok(true)
            }
            Some(_) => Ok(false),
        }
    }

    /// Activates the inactive casual edge (x, y) with probability `xi`. Both
    /// endpoints must be seeking.
    pub fn activate_casual<R: Rng + ?Sized>(
        &mut self,
        x: AgentId,
        y: AgentId,
        xi: f64,
        is_seeking: impl Fn(AgentId) -> bool,
        rng: &mut R,
    ) -> Result<bool, GraphError> {
        match self.edge(x, y) {
            Some(n) if n.layer == Layer::Casual => {
                if n.active {
                    return Err(GraphError::AlreadyActive(x, y));
                }
            }
            _ => return Err(GraphError::NoCasualEdge(x, y)),
        }
        if !is_seeking(x) || !is_seeking(y) {
            return Err(GraphError::NotSeeking(x, y));
        }
        if xi > 0.0 && rng.gen_bool(xi.min(1.0)) {
            self.open_casual(x, y, false)?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// `x` stopped seeking: its active casual partnerships end and the edges
    /// are removed. Steady edges and inactive acquaintances stay.
    pub fn deactivate_on_stop(&mut self, x: AgentId) -> usize {
        let ended: Vec<AgentId> = self
            .neighbors(x)
            .iter()
            .filter(|n| n.layer == Layer::Casual && n.active)
            .map(|n| n.id)
            .collect();
        for &y in &ended {
            self.remove_edge(x, y);
        }
        ended.len()
    }

    /// Layer conversion for one step. Each active casual edge becomes steady
    /// with probability `to_steady`; each steady edge (as of the start of the
    /// call) becomes casual with probability `to_casual`, staying active only
    /// if both endpoints are seeking. Returns `(to_steady, to_casual)` counts.
    /// A probability of zero consumes no randomness.
    pub fn convert_layers<R: Rng + ?Sized>(
        &mut self,
        to_steady: f64,
        to_casual: f64,
        is_seeking: impl Fn(AgentId) -> bool,
        rng: &mut R,
    ) -> (usize, usize) {
        let steady_before: Vec<EdgeKey> = if to_casual > 0.0 {
            self.steady.iter().copied().collect()
        } else {
            Vec::new()
        };
        let mut promoted = 0;
        if to_steady > 0.0 {
            let casual: Vec<EdgeKey> = self.active_casual.iter().copied().collect();
            for EdgeKey(a, b) in casual {
                if rng.gen_bool(to_steady.min(1.0)) {
                    self.active_casual.remove(&EdgeKey(a, b));
                    self.casual_total -= 1;
                    self.steady.insert(EdgeKey(a, b));
                    self.update_edge(a, b, |n| {
                        n.layer = Layer::Steady;
                        n.active = true;
                        n.via_app = false;
                    });
                    promoted += 1;
                }
            }
        }
        let mut demoted = 0;
        for EdgeKey(a, b) in steady_before {
            if rng.gen_bool(to_casual.min(1.0)) {
                let active = is_seeking(a) && is_seeking(b);
                self.steady.remove(&EdgeKey(a, b));
                self.casual_total += 1;
                if active {
                    self.active_casual.insert(EdgeKey(a, b));
                }
                self.update_edge(a, b, |n| {
                    n.layer = Layer::Casual;
                    n.active = active;
                    n.via_app = false;
                });
                demoted += 1;
            }
        }
        (promoted, demoted)
    }

    /// Uniform choice among `x`'s steady edges and active casual edges.
    pub fn select_partner<R: Rng + ?Sized>(&self, x: AgentId, rng: &mut R) -> Option<Neighbor> {
        let list = self.neighbors(x);
        let available = list.iter().filter(|n| n.available()).count();
        if available == 0 {
            return None;
        }
        let pick = rng.gen_range(0..available);
        list.iter().filter(|n| n.available()).nth(pick).copied()
    }

    /// Checks symmetry, pair uniqueness, index consistency and that every
    /// active casual edge joins two seeking agents.
    pub fn audit(&self, is_seeking: impl Fn(AgentId) -> bool) -> Result<(), AuditError> {
        let mut steady = 0;
        let mut active = 0;
        let mut casual = 0;
        for (i, list) in self.adj.iter().enumerate() {
            let x = AgentId(i as u32);
            let mut ids: Vec<AgentId> = list.iter().map(|n| n.id).collect();
            ids.sort_unstable();
            if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
                return Err(AuditError::DuplicatePair(x, w[0]));
            }
            for n in list {
                if n.id == x {
                    return Err(AuditError::SelfLoop(x));
                }
                let back = self.edge(n.id, x).ok_or(AuditError::Asymmetric(x, n.id))?;
                if back.layer != n.layer || back.active != n.active || back.via_app != n.via_app {
                    return Err(AuditError::Asymmetric(x, n.id));
                }
                if x > n.id {
                    continue;
                }
                let key = EdgeKey::new(x, n.id);
                match n.layer {
                    Layer::Steady => {
                        steady += 1;
                        if !n.active {
                            return Err(AuditError::InactiveSteady(x, n.id));
                        }
                        if !self.steady.contains(&key) {
                            return Err(AuditError::IndexMismatch(x, n.id));
                        }
                    }
                    Layer::Casual => {
                        casual += 1;
                        if n.active {
                            active += 1;
                            if !self.active_casual.contains(&key) {
                                return Err(AuditError::IndexMismatch(x, n.id));
                            }
                            if !is_seeking(x) || !is_seeking(n.id) {
                                return Err(AuditError::ActiveWithoutSeeking(x, n.id));
                            }
                        }
                    }
                }
            }
        }
        if steady != self.steady.len() || active != self.active_casual.len() || casual != self.casual_total {
            return Err(AuditError::IndexMismatch(AgentId(0), AgentId(0)));
        }
        Ok(())
    }

    /// Edge list as `agent_a,agent_b,layer,active`, one edge per line with
    /// `agent_a < agent_b`, sorted by pair.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "agent_a,agent_b,layer,active")?;
        let mut rows: Vec<(AgentId, Neighbor)> = Vec::new();
        for (i, list) in self.adj.iter().enumerate() {
            let x = AgentId(i as u32);
            rows.extend(list.iter().filter(|n| x < n.id).map(|n| (x, *n)));
        }
        rows.sort_by_key(|(x, n)| (*x, n.id));
        for (x, n) in rows {
            writeln!(out, "{},{},{},{}", x, n.id, n.layer.label(), u8::from(n.active))?;
        }
        Ok(())
    }
}

/// Builds the initial graph over `population`. A `steady_fraction` share of
/// agents is paired monogamously into L1. Every agent then proposes
/// Poisson(`mean_casual_degree` / 2) inactive casual edges to uniformly random
/// agents it has no edge with, so the casual degree is approximately
/// Poisson(`mean_casual_degree`).
pub fn init_graph<R: Rng + ?Sized>(
    population: &[AgentId],
    steady_fraction: f64,
    mean_casual_degree: f64,
    rng: &mut R,
) -> TwoLayerGraph {
    let max_id = population.iter().map(|a| a.index()).max().map_or(0, |m| m + 1);
    let mut graph = TwoLayerGraph::new(max_id);
    let n = population.len();
    let mut order = population.to_vec();
    order.shuffle(rng);
    let paired = ((steady_fraction * n as f64).round() as usize).min(n) / 2;
    for pair in order.chunks_exact(2).take(paired) {
        graph
            .add_edge(pair[0], pair[1], Layer::Steady, true, false)
            .expect("distinct fresh pair");
    }
    if mean_casual_degree > 0.0 && n > 1 {
        let proposals = Poisson::new(mean_casual_degree / 2.0).expect("positive mean");
        for &x in population {
            let m = proposals.sample(rng) as usize;
            for _ in 0..m {
                // a few retries when the draw hits x itself or an existing partner
                for _ in 0..8 {
                    let y = population[rng.gen_range(0..n)];
                    if y != x && graph.edge(x, y).is_none() {
                        graph
                            .add_edge(x, y, Layer::Casual, false, false)
                            .expect("checked above");
                        break;
                    }
                }
            }
        }
    }
    graph
}

/// Normal distribution in hours, truncated to positive values by rejection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositiveNormal {
    pub mean_hours: f64,
    pub sd_hours: f64,
}

impl PositiveNormal {
    pub fn new(mean_hours: f64, sd_hours: f64) -> Self {
        PositiveNormal {
            mean_hours,
            sd_hours,
        }
    }

    pub fn sample_hours<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sd_hours <= 0.0 {
            return self.mean_hours.max(f64::MIN_POSITIVE);
        }
        let normal = Normal::new(self.mean_hours, self.sd_hours).expect("finite sd");
        loop {
            let h = normal.sample(rng);
            if h > 0.0 {
                return h;
            }
        }
    }

    pub fn sample_steps<R: Rng + ?Sized>(&self, hours_per_step: f64, rng: &mut R) -> u32 {
        ((self.sample_hours(rng) / hours_per_step).round() as u32).max(1)
    }
}

/// Durations of the seeking ("looking") and resting phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeekingDurations {
    pub look: PositiveNormal,
    pub rest: PositiveNormal,
    pub hours_per_step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeekingToggle {
    Started,
    Stopped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeekingState {
    pub seeking: bool,
    /// Steps left in the current phase; always at least 1.
    pub remaining: u32,
}

impl SeekingState {
    /// A desynchronised starting phase: seeking with probability equal to the
    /// long-run share of time spent looking, part-way through a fresh phase.
    pub fn initial<R: Rng + ?Sized>(d: &SeekingDurations, rng: &mut R) -> Self {
        let share = d.look.mean_hours / (d.look.mean_hours + d.rest.mean_hours);
        let seeking = rng.gen_bool(share.clamp(0.0, 1.0));
        let phase = if seeking { d.look } else { d.rest };
        let full = phase.sample_steps(d.hours_per_step, rng);
        SeekingState {
            seeking,
            remaining: rng.gen_range(1..=full),
        }
    }

    /// One step of the seeking process.
    pub fn update<R: Rng + ?Sized>(&mut self, d: &SeekingDurations, rng: &mut R) -> Option<SeekingToggle> {
        if self.remaining > 1 {
            self.remaining -= 1;
            return None;
        }
        self.seeking = !self.seeking;
        let phase = if self.seeking { d.look } else { d.rest };
        self.remaining = phase.sample_steps(d.hours_per_step, rng);
        Some(if self.seeking {
            SeekingToggle::Started
        } else {
            SeekingToggle::Stopped
        })
    }
}
