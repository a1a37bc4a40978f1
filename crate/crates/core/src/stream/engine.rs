use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use super::{
    MacroCluster, MacroId, MacroRecord, MacroScope, McId, McRecord, MicroCluster, PointRecord,
    StreamConfig, StreamError, StreamPoint, StreamSnapshot, SNAPSHOT_SCHEMA,
};
use crate::snn::{adaptive_radius_with, KnnCache};
use crate::spatial::{dist, sq_dist, within, Index, PointId, PointSet, SpatialError};
use crate::tn::{ktnc_on_graph, Clustering, TnError, TnGraph};

/// A point that left the window, with the label it held when it left.
#[derive(Clone, Debug, PartialEq)]
pub struct EvictedPoint {
    pub id: PointId,
    pub true_label: Option<i64>,
    pub predicted: i64,
}

/// Single-stream clustering state. Not internally synchronized; move it
/// between threads freely but mutate from one at a time.
#[derive(Debug)]
pub struct StreamEngine {
    config: StreamConfig,
    dim: Option<usize>,
    /// Live points in arrival order; arrival indices are consecutive.
    points: VecDeque<StreamPoint>,
    arrival_of: HashMap<PointId, u64>,
    mcs: BTreeMap<McId, MicroCluster>,
    macros: BTreeMap<MacroId, MacroCluster>,
    last_arrival: u64,
    next_mc: McId,
    next_macro: MacroId,
    pending: usize,
    evicted: Vec<EvictedPoint>,
}

impl StreamEngine {
    pub fn new(config: StreamConfig) -> Result<Self, StreamError> {
        config.validate()?;
        Ok(Self {
            config,
            dim: None,
            points: VecDeque::new(),
            arrival_of: HashMap::new(),
            mcs: BTreeMap::new(),
            macros: BTreeMap::new(),
            last_arrival: 0,
            next_mc: 1,
            next_macro: 1,
            pending: 0,
            evicted: Vec::new(),
        })
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    /// Arrival index of the latest point.
    pub fn step(&self) -> u64 {
        self.last_arrival
    }

    pub fn live_points(&self) -> impl Iterator<Item = &StreamPoint> {
        self.points.iter()
    }

    pub fn live_len(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, id: PointId) -> Option<&StreamPoint> {
        let arrival = *self.arrival_of.get(&id)?;
        self.points.get(self.slot(arrival))
    }

    pub fn micro_clusters(&self) -> &BTreeMap<McId, MicroCluster> {
        &self.mcs
    }

    pub fn macro_clusters(&self) -> &BTreeMap<MacroId, MacroCluster> {
        &self.macros
    }

    /// Points evicted so far, oldest first.
    pub fn evicted(&self) -> &[EvictedPoint] {
        &self.evicted
    }

    fn slot(&self, arrival: u64) -> usize {
        let front = self.points.front().map_or(0, |p| p.arrival_index);
        (arrival - front) as usize
    }

    /// Macro-cluster id of the point's micro-cluster, or 0.
    pub fn predicted_label(&self, p: &StreamPoint) -> i64 {
        p.mc_id
            .and_then(|m| self.mcs.get(&m))
            .and_then(|m| m.macro_id)
            .map_or(0, |id| id as i64)
    }

    /// Appends the next point with an automatically assigned arrival index.
    pub fn push(
        &mut self,
        id: PointId,
        coords: Vec<f64>,
        true_label: Option<i64>,
    ) -> Result<(), StreamError> {
        let mut p = StreamPoint::new(id, self.last_arrival + 1, coords);
        p.true_label = true_label;
        self.process_point(p)
    }

    /// Admits one point, evicts anything beyond the window and, every
    /// `stride` arrivals, runs the pipeline.
    pub fn process_point(&mut self, mut p: StreamPoint) -> Result<(), StreamError> {
        if p.arrival_index != self.last_arrival + 1 {
            return Err(StreamError::OutOfOrderArrival {
                expected: self.last_arrival + 1,
                found: p.arrival_index,
            });
        }
        let dim = *self.dim.get_or_insert(p.coords.len());
        if dim == 0 {
            self.dim = None;
            return Err(SpatialError::ZeroDimension.into());
        }
        if p.coords.len() != dim {
            return Err(SpatialError::DimensionMismatch {
                expected: dim,
                found: p.coords.len(),
            }
            .into());
        }
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(SpatialError::NonFinite(p.id).into());
        }
        if self.arrival_of.contains_key(&p.id) {
            return Err(SpatialError::DuplicateId(p.id).into());
        }
        p.mc_id = None;
        self.last_arrival = p.arrival_index;
        self.arrival_of.insert(p.id, p.arrival_index);
        self.points.push_back(p);
        // the window bound holds between arrivals even when the pipeline is batched
        self.evict_expired();
        self.pending += 1;
        if self.pending >= self.config.stride {
            self.run_pipeline()?;
        }
        Ok(())
    }

    /// Runs the pipeline if arrivals are waiting for a batched run.
    pub fn flush(&mut self) -> Result<(), StreamError> {
        if self.pending > 0 {
            self.run_pipeline()?;
        }
        Ok(())
    }

    /// All phases, in order.
    pub fn run_pipeline(&mut self) -> Result<(), StreamError> {
        self.pending = 0;
        self.evict_expired();
        self.define_mcs()?;
        self.add_to_mcs();
        self.define_macros()?;
        self.add_mc_to_macro();
        self.update_mcs();
        self.update_macros()?;
        self.kill_mcs();
        self.kill_macros();
        Ok(())
    }

    /// Drops the oldest points beyond the window. Micro-cluster counts are
    /// decremented but nothing is deleted here.
    pub fn evict_expired(&mut self) -> usize {
        let mut n = 0;
        while self.points.len() > self.config.window {
            let p = self.points.pop_front().expect("window is nonempty");
            let predicted = self.predicted_label(&p);
            if let Some(mc) = p.mc_id.and_then(|m| self.mcs.get_mut(&m)) {
                mc.count = mc.count.saturating_sub(1);
            }
            self.arrival_of.remove(&p.id);
            self.evicted.push(EvictedPoint {
                id: p.id,
                true_label: p.true_label,
                predicted,
            });
            n += 1;
        }
        n
    }

    /// Founds micro-clusters among unassigned points, repeating passes
    /// until one creates nothing. Returns the number created.
    pub fn define_mcs(&mut self) -> Result<usize, StreamError> {
        let Some(dim) = self.dim else { return Ok(0) };
        let min_pts = self.config.min_pts;
        let snn = self.config.snn();
        let mut created = 0;
        loop {
            let free: Vec<usize> = (0..self.points.len())
                .filter(|&s| self.points[s].mc_id.is_none())
                .collect();
            if free.len() < min_pts {
                break;
            }
            let ids: Vec<PointId> = free.iter().map(|&s| self.points[s].id).collect();
            let rows: Vec<&[f64]> = free.iter().map(|&s| &self.points[s].coords[..]).collect();
            let index = Index::build(PointSet::with_ids(dim, &ids, &rows)?, &self.config.backend)?;
            let mut cache = KnnCache::new(&index, snn.tk);
            let mut taken: HashSet<PointId> = HashSet::new();
            let mut made = 0;
            for &seed in &ids {
                if taken.contains(&seed) {
                    continue;
                }
                let Some(radius) = adaptive_radius_with(&index, &mut cache, seed, &snn)? else {
                    continue;
                };
                let origin = index.points().coords(seed)?;
                let members: Vec<PointId> = index
                    .range(origin, radius)?
                    .into_iter()
                    .filter(|id| !taken.contains(id))
                    .collect();
                if members.len() < min_pts {
                    continue;
                }
                let mc = self.next_mc;
                self.next_mc += 1;
                let mut center = vec![0.0; dim];
                for &m in &members {
                    let slot = self.slot(self.arrival_of[&m]);
                    let p = &mut self.points[slot];
                    p.mc_id = Some(mc);
                    center.iter_mut().zip(&p.coords).for_each(|(c, x)| *c += x);
                }
                center.iter_mut().for_each(|c| *c /= members.len() as f64);
                self.mcs.insert(
                    mc,
                    MicroCluster {
                        id: mc,
                        center,
                        radius,
                        count: members.len(),
                        macro_id: None,
                    },
                );
                taken.extend(members);
                made += 1;
            }
            created += made;
            if made == 0 {
                break;
            }
        }
        Ok(created)
    }

    /// Puts each unassigned point into the nearest micro-cluster whose
    /// ball contains it. Returns the number of points placed.
    pub fn add_to_mcs(&mut self) -> usize {
        if self.mcs.is_empty() {
            return 0;
        }
        let mut placed = 0;
        for p in self.points.iter_mut().filter(|p| p.mc_id.is_none()) {
            let mut best: Option<(f64, McId)> = None;
            for mc in self.mcs.values() {
                let sq = sq_dist(&p.coords, &mc.center);
                // ascending ids: a strict improvement keeps the smaller id on ties
                if within(sq, mc.radius) && best.is_none_or(|b| sq < b.0) {
                    best = Some((sq, mc.id));
                }
            }
            if let Some((_, id)) = best {
                p.mc_id = Some(id);
                self.mcs.get_mut(&id).expect("live micro-cluster").count += 1;
                placed += 1;
            }
        }
        placed
    }

    /// kTNC over the given micro-cluster centers, keeping only edges
    /// between micro-clusters whose balls touch. `None` when fewer than two
    /// micro-clusters are given or every one of them is isolated.
    fn gated_ktnc(&self, ids: &[McId]) -> Result<Option<Clustering>, StreamError> {
        if ids.len() < 2 {
            return Ok(None);
        }
        let dim = self.dim.expect("micro-clusters imply a dimension");
        let pids: Vec<PointId> = ids.iter().map(|&m| m as PointId).collect();
        let rows: Vec<&[f64]> = ids.iter().map(|m| &self.mcs[m].center[..]).collect();
        let ps = PointSet::with_ids(dim, &pids, &rows)?;
        let mut graph = TnGraph::build(&ps, self.config.k.min(ids.len() - 1))?;
        let radius = |id: PointId| self.mcs[&(id as McId)].radius;
        graph.retain_edges(|a, b, w| w <= radius(a) + radius(b));
        match ktnc_on_graph(&graph, self.config.alpha) {
            Ok(c) => Ok(Some(c)),
            Err(TnError::AllScoresInfinite) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Forms macro-clusters by kTNC over micro-cluster centers. Only runs
    /// while some micro-cluster is unattached; each resulting group of at
    /// least `n_micro` that holds an unattached micro-cluster becomes a
    /// macro-cluster. Under [`MacroScope::All`] the groups are computed over
    /// every live micro-cluster and a group that reaches into existing
    /// macro-clusters is merged into the oldest of them. Returns the number
    /// of macro-clusters created.
    pub fn define_macros(&mut self) -> Result<usize, StreamError> {
        let n_micro = self.config.n_micro;
        let free = self.mcs.values().filter(|m| m.macro_id.is_none()).count();
        let pool: Vec<McId> = match self.config.macro_scope {
            MacroScope::All if free > 0 => self.mcs.keys().copied().collect(),
            MacroScope::All => return Ok(0),
            MacroScope::Unattached => self
                .mcs
                .values()
                .filter(|m| m.macro_id.is_none())
                .map(|m| m.id)
                .collect(),
        };
        if pool.len() < n_micro {
            return Ok(0);
        }
        let Some(clustering) = self.gated_ktnc(&pool)? else {
            return Ok(0);
        };
        let mut created = 0;
        for cluster in clustering.clusters {
            let group: Vec<McId> = cluster.into_iter().map(|m| m as McId).collect();
            if group.len() < n_micro || group.iter().all(|m| self.mcs[m].macro_id.is_some()) {
                continue;
            }
            let target = match group.iter().filter_map(|m| self.mcs[m].macro_id).min() {
                Some(existing) => existing,
                None => {
                    let id = self.next_macro;
                    self.next_macro += 1;
                    self.macros.insert(
                        id,
                        MacroCluster {
                            id,
                            mc_ids: BTreeSet::new(),
                        },
                    );
                    created += 1;
                    id
                }
            };
            for m in group {
                if let Some(old) = self.mcs[&m].macro_id {
                    self.macros
                        .get_mut(&old)
                        .expect("live macro-cluster")
                        .mc_ids
                        .remove(&m);
                }
                self.mcs.get_mut(&m).expect("live micro-cluster").macro_id = Some(target);
                self.macros
                    .get_mut(&target)
                    .expect("live macro-cluster")
                    .mc_ids
                    .insert(m);
            }
        }
        Ok(created)
    }

    /// Attaches each unattached micro-cluster to the macro-cluster of the
    /// nearest attached micro-cluster whose ball touches its own. Returns
    /// the number attached.
    pub fn add_mc_to_macro(&mut self) -> usize {
        let free: Vec<McId> = self
            .mcs
            .values()
            .filter(|m| m.macro_id.is_none())
            .map(|m| m.id)
            .collect();
        let mut attached: Vec<McId> = self
            .mcs
            .values()
            .filter(|m| m.macro_id.is_some())
            .map(|m| m.id)
            .collect();
        let mut n = 0;
        for a in free {
            let ma = &self.mcs[&a];
            let mut best: Option<(f64, MacroId)> = None;
            for b in &attached {
                let mb = &self.mcs[b];
                let d = dist(&ma.center, &mb.center);
                if d > ma.radius + mb.radius {
                    continue;
                }
                let key = (d, mb.macro_id.expect("attached"));
                let better =
                    best.is_none_or(|cur| key.0.total_cmp(&cur.0).then(key.1.cmp(&cur.1)).is_lt());
                if better {
                    best = Some(key);
                }
            }
            if let Some((_, macro_id)) = best {
                self.mcs.get_mut(&a).expect("live").macro_id = Some(macro_id);
                self.macros
                    .get_mut(&macro_id)
                    .expect("live macro-cluster")
                    .mc_ids
                    .insert(a);
                attached.push(a);
                n += 1;
            }
        }
        n
    }

    /// Recomputes every micro-cluster's count and center from its live
    /// members. An empty micro-cluster keeps its last center.
    pub fn update_mcs(&mut self) {
        let Some(dim) = self.dim else { return };
        let mut sums: HashMap<McId, (Vec<f64>, usize)> = HashMap::new();
        for p in &self.points {
            if let Some(m) = p.mc_id {
                let e = sums.entry(m).or_insert_with(|| (vec![0.0; dim], 0));
                e.0.iter_mut().zip(&p.coords).for_each(|(s, x)| *s += x);
                e.1 += 1;
            }
        }
        for mc in self.mcs.values_mut() {
            match sums.remove(&mc.id) {
                Some((sum, count)) => {
                    mc.center = sum.into_iter().map(|s| s / count as f64).collect();
                    mc.count = count;
                }
                None => mc.count = 0,
            }
        }
    }

    /// Re-clusters each macro-cluster's own micro-clusters and keeps the
    /// largest group (ties: smallest member id) if it is big enough.
    /// Everything else is detached.
    pub fn update_macros(&mut self) -> Result<(), StreamError> {
        let n_micro = self.config.n_micro;
        let ids: Vec<MacroId> = self.macros.keys().copied().collect();
        for id in ids {
            let members: Vec<McId> = self.macros[&id].mc_ids.iter().copied().collect();
            let keep: BTreeSet<McId> = if members.len() < 2 {
                if members.len() >= n_micro {
                    members.iter().copied().collect()
                } else {
                    BTreeSet::new()
                }
            } else {
                match self.gated_ktnc(&members)? {
                    Some(c) => c
                        .clusters
                        .iter()
                        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
                        .filter(|c| c.len() >= n_micro)
                        .map(|c| c.iter().map(|&m| m as McId).collect())
                        .unwrap_or_default(),
                    None => BTreeSet::new(),
                }
            };
            for m in members.iter().filter(|m| !keep.contains(m)) {
                self.mcs.get_mut(m).expect("live").macro_id = None;
            }
            self.macros.get_mut(&id).expect("live").mc_ids = keep;
        }
        Ok(())
    }

    /// Deletes micro-clusters with fewer than `min_pts` members and frees
    /// their points. Returns the number deleted.
    pub fn kill_mcs(&mut self) -> usize {
        let dead: HashSet<McId> = self
            .mcs
            .values()
            .filter(|m| m.count < self.config.min_pts)
            .map(|m| m.id)
            .collect();
        if dead.is_empty() {
            return 0;
        }
        for id in &dead {
            let mc = self.mcs.remove(id).expect("live");
            if let Some(m) = mc.macro_id.and_then(|m| self.macros.get_mut(&m)) {
                m.mc_ids.remove(id);
            }
        }
        for p in self.points.iter_mut() {
            if p.mc_id.is_some_and(|m| dead.contains(&m)) {
                p.mc_id = None;
            }
        }
        dead.len()
    }

    /// Deletes macro-clusters with fewer than `n_micro` micro-clusters.
    /// Returns the number deleted.
    pub fn kill_macros(&mut self) -> usize {
        let dead: Vec<MacroId> = self
            .macros
            .values()
            .filter(|m| m.mc_ids.len() < self.config.n_micro)
            .map(|m| m.id)
            .collect();
        for id in &dead {
            let m = self.macros.remove(id).expect("live");
            for mc in m.mc_ids {
                if let Some(mc) = self.mcs.get_mut(&mc) {
                    mc.macro_id = None;
                }
            }
        }
        dead.len()
    }

    pub fn snapshot(&self) -> StreamSnapshot {
        StreamSnapshot {
            schema: SNAPSHOT_SCHEMA,
            step: self.last_arrival,
            points: self
                .points
                .iter()
                .map(|p| PointRecord {
                    id: p.id,
                    mc: p.mc_id.unwrap_or(0),
                    macro_id: self.predicted_label(p) as MacroId,
                })
                .collect(),
            mcs: self
                .mcs
                .values()
                .map(|m| McRecord {
                    id: m.id,
                    center: m.center.clone(),
                    r: m.radius,
                    count: m.count,
                    macro_id: m.macro_id.unwrap_or(0),
                })
                .collect(),
            macros: self
                .macros
                .values()
                .map(|m| MacroRecord {
                    id: m.id,
                    mcs: m.mc_ids.iter().copied().collect(),
                })
                .collect(),
        }
    }

    /// Checks the between-arrival invariants; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.points.len() > self.config.window {
            return Err(format!(
                "{} live points exceed the window",
                self.points.len()
            ));
        }
        let mut counts: HashMap<McId, usize> = HashMap::new();
        for p in &self.points {
            if let Some(m) = p.mc_id {
                if !self.mcs.contains_key(&m) {
                    return Err(format!("point {} references dead micro-cluster {m}", p.id));
                }
                *counts.entry(m).or_default() += 1;
            }
        }
        for mc in self.mcs.values() {
            let live = counts.get(&mc.id).copied().unwrap_or(0);
            if mc.count != live {
                return Err(format!(
                    "micro-cluster {} counts {} but has {live}",
                    mc.id, mc.count
                ));
            }
            if self.pending == 0 && mc.count < self.config.min_pts {
                return Err(format!("micro-cluster {} is below min_pts", mc.id));
            }
            if !(mc.radius > 0.0 && mc.radius <= self.config.r_max) {
                return Err(format!("micro-cluster {} has radius {}", mc.id, mc.radius));
            }
            if mc.id >= self.next_mc {
                return Err(format!("micro-cluster id {} was never issued", mc.id));
            }
            if let Some(m) = mc.macro_id {
                if !self
                    .macros
                    .get(&m)
                    .is_some_and(|mac| mac.mc_ids.contains(&mc.id))
                {
                    return Err(format!("micro-cluster {} claims macro {m}", mc.id));
                }
            }
        }
        for mac in self.macros.values() {
            if self.pending == 0 && mac.mc_ids.len() < self.config.n_micro {
                return Err(format!("macro-cluster {} is below n_micro", mac.id));
            }
            for m in &mac.mc_ids {
                if self.mcs.get(m).and_then(|mc| mc.macro_id) != Some(mac.id) {
                    return Err(format!("macro-cluster {} lists {m} inconsistently", mac.id));
                }
            }
        }
        Ok(())
    }
}
