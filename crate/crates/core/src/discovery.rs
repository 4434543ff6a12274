//! Streaming discovery of the optimal active sets carrying most of the
//! probability mass.
//!
//! Starting at `M = 1`, the loop keeps `M + W_M` solved samples, where the
//! look-ahead window is `W_M = ⌈c · max(ln M̲, ln M)⌉` with `c = 2γ/ε²` and
//! `M̲ = 1 + (γ / (δ(γ−1)))^{1/(γ−1)}`. The rate of discovery `R_{M,W}` is
//! the fraction of window samples whose key was not among the first `M`.
//! The loop stops as soon as `R_{M,W_M} < α − ε`, at which point the
//! observed keys cover at least `1 − α` of the mass with probability at
//! least `1 − δ`.
//!
//! Samples whose instance is infeasible are skipped and replaced by the next
//! stream index, so `M + W` always counts feasible samples.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parametric::{solve_for_sample, ActiveSetKey, Fnv64, ParametricProgram};
use crate::sampling::SampleStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Hard cap on `M`.
    pub max_m: usize,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            epsilon: 0.04,
            delta: 0.01,
            gamma: 2.0,
            max_m: 22_000,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.alpha) {
            return bad(format!(
                "epsilon must lie in (0, alpha), got {}",
                self.epsilon
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return bad(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if self.max_m == 0 {
            return bad("max_m must be at least 1".into());
        }
        Ok(())
    }

    /// Threshold the rate of discovery must fall below.
    pub fn stopping_threshold(&self) -> f64 {
        self.alpha - self.epsilon
    }

    fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_f64s(&[self.alpha, self.epsilon, self.delta, self.gamma]);
        h.write_u64(self.max_m as u64);
        h.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub c: f64,
    /// `M̲` before rounding.
    pub m_lower_exact: f64,
    /// `M̲` rounded up.
    pub m_lower: usize,
}

/// Rounds up, but snaps values within relative `1e-9` of an integer onto
/// that integer so representation error cannot add a spurious unit.
fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

pub fn derived_constants(config: &DiscoveryConfig) -> Result<DerivedConstants> {
    config.validate()?;
    let g = config.gamma;
    let c = 2.0 * g / (config.epsilon * config.epsilon);
    let m_lower_exact = 1.0 + (g / (config.delta * (g - 1.0))).powf(1.0 / (g - 1.0));
    if !m_lower_exact.is_finite() || m_lower_exact > 1e15 {
        return Err(Error::InvalidConfig(format!(
            "M lower bound {m_lower_exact} is not representable"
        )));
    }
    Ok(DerivedConstants {
        c,
        m_lower_exact,
        m_lower: ceil_snapped(m_lower_exact) as usize,
    })
}

/// `W_M = ⌈c · max(ln M̲, ln M)⌉`.
pub fn window_size(constants: &DerivedConstants, m: usize) -> usize {
    let m = m.max(1) as f64;
    let w = constants.c * constants.m_lower_exact.ln().max(m.ln());
    ceil_snapped(w).max(1.0) as usize
}

/// Rate of discovery from the first-occurrence positions of the window's
/// keys: the fraction of entries greater than `m`.
pub fn rate_from_first_occurrences(m: usize, window_first: &[usize]) -> f64 {
    if window_first.is_empty() {
        return 0.0;
    }
    let new = window_first.iter().filter(|&&f| f > m).count();
    new as f64 / window_first.len() as f64
}

/// Supplies the optimal key of the `index`-th stream sample.
pub trait KeySource: Sync {
    type Key: Clone + Eq + Hash + Ord + Send + Sync + Debug + Serialize + DeserializeOwned;

    /// `Ok(None)` marks a sample outside the feasible parameter set; it is
    /// skipped and counted.
    fn key_at(&self, index: u64) -> Result<Option<Self::Key>>;

    /// Stable hash of the source's configuration, including any seed.
    fn fingerprint(&self) -> u64;
}

/// Keys obtained by solving sampled instances of a parametric program.
pub struct LpKeySource<'a> {
    pub program: &'a dyn ParametricProgram,
    pub stream: &'a dyn SampleStream,
}

impl<'a> LpKeySource<'a> {
    pub fn new(program: &'a dyn ParametricProgram, stream: &'a dyn SampleStream) -> Result<Self> {
        if program.sample_len() != stream.sample_len() {
            return Err(Error::DimensionMismatch(format!(
                "program expects samples of length {}, stream produces {}",
                program.sample_len(),
                stream.sample_len()
            )));
        }
        Ok(Self { program, stream })
    }
}

impl KeySource for LpKeySource<'_> {
    type Key = ActiveSetKey;

    fn key_at(&self, index: u64) -> Result<Option<ActiveSetKey>> {
        let sample = self.stream.draw(index);
        match solve_for_sample(self.program, &sample) {
            Ok(s) => Ok(Some(s.key)),
            Err(Error::SampleInfeasible { index }) => {
                log::debug!("sample {index} is infeasible; skipped");
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u64(self.program.fingerprint());
        h.write_u64(self.stream.fingerprint());
        h.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminatedBy {
    StoppingRule,
    MaxM,
}

/// Progress report emitted after each rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub m: usize,
    pub window: usize,
    pub rate: f64,
    pub observed: usize,
    pub samples: usize,
}

/// Maintains `count = #{t ∈ (m, end] : first(t) > m}` in O(1) amortized per
/// step, with `occ[j]` the number of window positions whose key first
/// appeared at position `j`.
#[derive(Debug, Clone, Default)]
struct RateTracker {
    m: usize,
    end: usize,
    count: usize,
    occ: Vec<u32>,
}

impl RateTracker {
    fn rebuild(m: usize, end: usize, first: &[usize]) -> Self {
        // `first` is 0-based by position: first[t-1] is first(t).
        let mut occ = vec![0u32; first.len() + 2];
        let mut count = 0;
        for t in m + 1..=end {
            let f = first[t - 1];
            occ[f] += 1;
            if f > m {
                count += 1;
            }
        }
        Self { m, end, count, occ }
    }

    fn extend(&mut self, end: usize, first: &[usize]) {
        if self.occ.len() < end + 2 {
            self.occ.resize(end + 2, 0);
        }
        for t in self.end + 1..=end {
            let f = first[t - 1];
            self.occ[f] += 1;
            if f > self.m {
                self.count += 1;
            }
        }
        self.end = self.end.max(end);
    }

    fn advance(&mut self, first: &[usize]) {
        let t = self.m + 1;
        if t <= self.end {
            let f = first[t - 1];
            self.occ[f] -= 1;
            if f > self.m {
                self.count -= 1;
            }
        } else {
            self.end = t;
        }
        // Remaining window positions whose key first appeared at m + 1 are
        // no longer new.
        self.count -= self.occ[t] as usize;
        self.m = t;
    }

    fn window(&self) -> usize {
        self.end - self.m
    }

    fn rate(&self) -> f64 {
        match self.window() {
            0 => 0.0,
            w => self.count as f64 / w as f64,
        }
    }
}

/// Streaming state: the key log and everything derived from it.
#[derive(Debug, Clone)]
pub struct DiscoveryState<K> {
    /// Distinct keys in order of first appearance.
    keys: Vec<K>,
    ids: HashMap<K, u32>,
    /// Position (1-based) at which each distinct key first appeared.
    first_seen: Vec<usize>,
    /// Key id at each position.
    sequence: Vec<u32>,
    /// First-appearance position of the key at each position.
    first_at: Vec<usize>,
    /// Next stream index to draw (1-based).
    next_index: u64,
    infeasible: u64,
}

impl<K: Clone + Eq + Hash> DiscoveryState<K> {
    fn new() -> Self {
        Self {
            keys: Vec::new(),
            ids: HashMap::new(),
            first_seen: Vec::new(),
            sequence: Vec::new(),
            first_at: Vec::new(),
            next_index: 1,
            infeasible: 0,
        }
    }

    fn push(&mut self, key: K) {
        let pos = self.sequence.len() + 1;
        let id = match self.ids.get(&key) {
            Some(&id) => id,
            None => {
                let id = self.keys.len() as u32;
                self.keys.push(key.clone());
                self.ids.insert(key, id);
                self.first_seen.push(pos);
                id
            }
        };
        self.sequence.push(id);
        self.first_at.push(self.first_seen[id as usize]);
    }

    /// Number of feasible samples solved so far.
    pub fn samples(&self) -> usize {
        self.sequence.len()
    }

    /// Distinct keys observed so far, in order of first appearance.
    pub fn observed(&self) -> &[K] {
        &self.keys
    }

    pub fn first_occurrence(&self, key: &K) -> Option<usize> {
        self.ids.get(key).map(|&id| self.first_seen[id as usize])
    }

    pub fn key_at_position(&self, pos: usize) -> Option<&K> {
        pos.checked_sub(1)
            .and_then(|i| self.sequence.get(i))
            .map(|&id| &self.keys[id as usize])
    }

    pub fn infeasible_count(&self) -> u64 {
        self.infeasible
    }

    /// `R_{M,W}` recomputed directly from the key log.
    pub fn rate_of_discovery(&self, m: usize, w: usize) -> Result<f64> {
        if m == 0 || w == 0 {
            return Err(Error::InvalidArgument("M and W must be positive".into()));
        }
        if self.sequence.len() < m + w {
            return Err(Error::InsufficientSamples {
                needed: m + w,
                available: self.sequence.len(),
            });
        }
        Ok(rate_from_first_occurrences(m, &self.first_at[m..m + w]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyFrequency<K> {
    pub key: K,
    pub count: usize,
    pub frequency: f64,
    /// Position (1-based) of the first sample with this key.
    pub first_seen: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryResult<K> {
    /// Every observed key, in order of first appearance.
    pub observed: Vec<KeyFrequency<K>>,
    pub m: usize,
    pub window: usize,
    pub rate: f64,
    pub terminated_by: TerminatedBy,
    /// Feasible samples solved (`M + W_M`).
    pub samples: usize,
    /// Stream indices consumed, including skipped infeasible samples.
    pub draws: u64,
    pub infeasible: u64,
    pub config: DiscoveryConfig,
    pub constants: DerivedConstants,
    pub metadata: RunMetadata,
}

impl<K: Clone> DiscoveryResult<K> {
    /// Number of distinct keys observed over all solved samples.
    pub fn k_observed(&self) -> usize {
        self.observed.len()
    }

    /// Keys first seen among the first `M` samples.
    pub fn observed_first_m(&self) -> Vec<K> {
        self.observed
            .iter()
            .filter(|k| k.first_seen <= self.m)
            .map(|k| k.key.clone())
            .collect()
    }

    pub fn keys(&self) -> Vec<K> {
        self.observed.iter().map(|k| k.key.clone()).collect()
    }
}

pub const SNAPSHOT_VERSION: u32 = 1;

/// Serializable checkpoint of a discovery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<K> {
    pub version: u32,
    pub config: DiscoveryConfig,
    pub config_hash: u64,
    pub source_fingerprint: u64,
    /// Next `M` to evaluate, or the final `M` if terminated.
    pub m: usize,
    pub window_end: usize,
    pub terminated_by: Option<TerminatedBy>,
    pub last_rate: f64,
    pub last_window: usize,
    pub next_index: u64,
    pub infeasible: u64,
    pub keys: Vec<K>,
    pub sequence: Vec<u32>,
}

/// A resumable discovery run over a [`KeySource`].
pub struct Discovery<'s, S: KeySource> {
    config: DiscoveryConfig,
    constants: DerivedConstants,
    source: &'s S,
    state: DiscoveryState<S::Key>,
    tracker: RateTracker,
    m: usize,
    terminated_by: Option<TerminatedBy>,
    last_rate: f64,
    last_window: usize,
}

impl<'s, S: KeySource> Discovery<'s, S> {
    pub fn new(config: DiscoveryConfig, source: &'s S) -> Result<Self> {
        let constants = derived_constants(&config)?;
        Ok(Self {
            config,
            constants,
            source,
            state: DiscoveryState::new(),
            tracker: RateTracker {
                m: 1,
                end: 1,
                count: 0,
                occ: Vec::new(),
            },
            m: 1,
            terminated_by: None,
            last_rate: f64::NAN,
            last_window: 0,
        })
    }

    pub fn from_snapshot(
        snapshot: Snapshot<S::Key>,
        config: DiscoveryConfig,
        source: &'s S,
    ) -> Result<Self> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotMismatch(format!(
                "snapshot version {} (expected {SNAPSHOT_VERSION})",
                snapshot.version
            )));
        }
        if snapshot.config != config || snapshot.config_hash != config.fingerprint() {
            return Err(Error::SnapshotMismatch("discovery configuration differs".into()));
        }
        if snapshot.source_fingerprint != source.fingerprint() {
            return Err(Error::SnapshotMismatch(
                "program, distribution, or seed differs".into(),
            ));
        }
        let mut run = Self::new(config, source)?;
        let mut state = DiscoveryState::new();
        for &id in &snapshot.sequence {
            let key = snapshot.keys.get(id as usize).ok_or_else(|| {
                Error::SnapshotMismatch(format!("key id {id} out of range"))
            })?;
            state.push(key.clone());
        }
        if state.keys != snapshot.keys {
            return Err(Error::SnapshotMismatch("key table is inconsistent".into()));
        }
        state.next_index = snapshot.next_index;
        state.infeasible = snapshot.infeasible;
        if snapshot.window_end > state.samples() || snapshot.m > snapshot.window_end.max(1) {
            return Err(Error::SnapshotMismatch("window exceeds key log".into()));
        }
        run.tracker = RateTracker::rebuild(snapshot.m, snapshot.window_end, &state.first_at);
        run.state = state;
        run.m = snapshot.m;
        run.terminated_by = snapshot.terminated_by;
        run.last_rate = snapshot.last_rate;
        run.last_window = snapshot.last_window;
        Ok(run)
    }

    pub fn snapshot(&self) -> Snapshot<S::Key> {
        Snapshot {
            version: SNAPSHOT_VERSION,
            config: self.config,
            config_hash: self.config.fingerprint(),
            source_fingerprint: self.source.fingerprint(),
            m: self.m,
            window_end: self.tracker.end,
            terminated_by: self.terminated_by,
            last_rate: self.last_rate,
            last_window: self.last_window,
            next_index: self.state.next_index,
            infeasible: self.state.infeasible,
            keys: self.state.keys.clone(),
            sequence: self.state.sequence.clone(),
        }
    }

    pub fn state(&self) -> &DiscoveryState<S::Key> {
        &self.state
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.constants
    }

    /// Current `M` (the next one to be evaluated, unless terminated).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terminated_by(&self) -> Option<TerminatedBy> {
        self.terminated_by
    }

    /// Draws and solves samples, in stream order, until `target` feasible
    /// samples are available. Solves run in parallel; results are committed
    /// in index order.
    fn fill_to(&mut self, target: usize) -> Result<()> {
        while self.state.samples() < target {
            let need = (target - self.state.samples()) as u64;
            let start = self.state.next_index;
            let keys: Vec<Result<Option<S::Key>>> = (start..start + need)
                .into_par_iter()
                .map(|i| self.source.key_at(i))
                .collect();
            for key in keys {
                match key? {
                    Some(k) => self.state.push(k),
                    None => self.state.infeasible += 1,
                }
            }
            self.state.next_index = start + need;
        }
        Ok(())
    }

    /// Evaluates `R_{M,W_M}` at the current `M`. Returns the termination
    /// reason once the run is finished, `None` otherwise.
    pub fn step(&mut self) -> Result<Option<TerminatedBy>> {
        if let Some(t) = self.terminated_by {
            return Ok(Some(t));
        }
        let w = window_size(&self.constants, self.m);
        self.fill_to(self.m + w)?;
        self.tracker.extend(self.m + w, &self.state.first_at);
        debug_assert_eq!(self.tracker.window(), w);
        let rate = self.tracker.rate();
        self.last_rate = rate;
        self.last_window = w;
        if rate < self.config.stopping_threshold() {
            self.terminated_by = Some(TerminatedBy::StoppingRule);
        } else if self.m >= self.config.max_m {
            self.terminated_by = Some(TerminatedBy::MaxM);
        } else {
            self.m += 1;
            self.tracker.advance(&self.state.first_at);
        }
        Ok(self.terminated_by)
    }

    pub fn progress(&self) -> Progress {
        Progress {
            m: self.m,
            window: self.last_window,
            rate: self.last_rate,
            observed: self.state.keys.len(),
            samples: self.state.samples(),
        }
    }

    /// Steps until termination, reporting progress after each evaluation.
    pub fn run(&mut self, progress: &mut dyn FnMut(&Progress)) -> Result<DiscoveryResult<S::Key>> {
        let start = Instant::now();
        while self.terminated_by.is_none() {
            let m = self.m;
            self.step()?;
            progress(&Progress { m, ..self.progress() });
        }
        let mut result = self.result().expect("terminated");
        result.metadata.wall_clock_secs = start.elapsed().as_secs_f64();
        Ok(result)
    }

    /// Final result, available once the run has terminated.
    pub fn result(&self) -> Option<DiscoveryResult<S::Key>> {
        let terminated_by = self.terminated_by?;
        let samples = self.m + self.last_window;
        let mut counts = vec![0usize; self.state.keys.len()];
        for &id in &self.state.sequence[..samples] {
            counts[id as usize] += 1;
        }
        let observed = self
            .state
            .keys
            .iter()
            .zip(&counts)
            .zip(&self.state.first_seen)
            .filter(|(_, &first)| first <= samples)
            .map(|((key, &count), &first_seen)| KeyFrequency {
                key: key.clone(),
                count,
                frequency: count as f64 / samples as f64,
                first_seen,
            })
            .collect();
        Some(DiscoveryResult {
            observed,
            m: self.m,
            window: self.last_window,
            rate: self.last_rate,
            terminated_by,
            samples,
            draws: self.state.next_index - 1,
            infeasible: self.state.infeasible,
            config: self.config,
            constants: self.constants,
            metadata: RunMetadata::default(),
        })
    }
}

/// Runs discovery to completion on any key source.
pub fn run_discovery<S: KeySource>(
    config: DiscoveryConfig,
    source: &S,
    progress: &mut dyn FnMut(&Progress),
) -> Result<DiscoveryResult<S::Key>> {
    Discovery::new(config, source)?.run(progress)
}

/// Discovers the optimal active sets of `program` under `stream`.
pub fn discover_mass(
    config: DiscoveryConfig,
    program: &dyn ParametricProgram,
    stream: &dyn SampleStream,
    progress: &mut dyn FnMut(&Progress),
) -> Result<DiscoveryResult<ActiveSetKey>> {
    let source = LpKeySource::new(program, stream)?;
    run_discovery(config, &source, progress)
}

/// Continues a run from a snapshot taken with the same configuration and
/// source.
pub fn resume<S: KeySource>(
    snapshot: Snapshot<S::Key>,
    config: DiscoveryConfig,
    source: &S,
    progress: &mut dyn FnMut(&Progress),
) -> Result<DiscoveryResult<S::Key>> {
    Discovery::from_snapshot(snapshot, config, source)?.run(progress)
}
