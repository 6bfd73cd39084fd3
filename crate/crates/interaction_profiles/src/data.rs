//! Domain types for exposure sequences and the windowed observation
//! assembly that turns raw sequences into likelihood training cells.
//!
//! Time is *order time*: event positions within a sequence are implicit
//! integer steps `0, 1, 2, ...` and the gap between a target exposure at
//! position `i` and a prior exposure at position `j <= i` is `i - j`.

use std::collections::HashMap;

use crate::{Error, Result};

/// Index into a [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for EntityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bidirectional map between entity labels and dense indices.
///
/// Labels are unique; indices are assigned in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Vocabulary with labels `"0"`, `"1"`, ... `"n-1"`, as used by the
    /// synthetic generator.
    pub fn numeric(n: usize) -> Self {
        let mut v = Self::new();
        for i in 0..n {
            v.intern(&i.to_string());
        }
        v
    }

    /// Returns the id for `label`, inserting it if absent.
    pub fn intern(&mut self, label: &str) -> EntityId {
        if let Some(&i) = self.index.get(label) {
            return EntityId(i);
        }
        let i = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        EntityId(i)
    }

    /// Inserts a fresh label, rejecting duplicates.
    pub fn insert_unique(&mut self, label: &str) -> Result<EntityId> {
        if self.index.contains_key(label) {
            return Err(Error::DuplicateLabel {
                label: label.to_string(),
            });
        }
        Ok(self.intern(label))
    }

    pub fn get(&self, label: &str) -> Option<EntityId> {
        self.index.get(label).map(|&i| EntityId(i))
    }

    pub fn label(&self, id: EntityId) -> Option<&str> {
        self.labels.get(id.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }
}

/// One exposure with its binary outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExposureEvent {
    pub entity: EntityId,
    /// True when the exposure was acted upon (retweet, click, ...).
    pub contagion: bool,
}

impl ExposureEvent {
    pub fn new(entity: EntityId, contagion: bool) -> Self {
        Self { entity, contagion }
    }
}

/// An ordered, nonempty list of exposures. Positions are implicit integer
/// times `0, 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    events: Vec<ExposureEvent>,
}

impl Sequence {
    pub fn new(events: Vec<ExposureEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[ExposureEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A vocabulary plus the sequences expressed in it.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub vocabulary: Vocabulary,
    pub sequences: Vec<Sequence>,
}

impl Corpus {
    pub fn new(vocabulary: Vocabulary, sequences: Vec<Sequence>) -> Self {
        Self {
            vocabulary,
            sequences,
        }
    }
}

/// Aggregated observations for one (target, source, gap) combination.
///
/// `contagions` counts observations whose target exposure was acted upon;
/// `total` counts all of them. Aggregation is exact: the Bernoulli
/// likelihood is a sum of identical per-observation terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationCell {
    pub target: EntityId,
    pub source: EntityId,
    pub gap: u32,
    pub contagions: u64,
    pub total: u64,
}

impl ObservationCell {
    /// Empirical contagion frequency of the cell.
    pub fn frequency(&self) -> f64 {
        self.contagions as f64 / self.total as f64
    }
}

/// Controls for [`assemble_observations_with`].
#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    /// Maximum gap `S`; pairs farther apart are not observed.
    pub max_gap: u32,
    /// Number of leading events per sequence excluded as targets
    /// (their history window is incomplete).
    pub skip_prefix: usize,
    /// Minimum gap; 0 keeps the self-pairing of each exposure with itself.
    pub min_gap: u32,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            max_gap: 20,
            skip_prefix: 10,
            min_gap: 0,
        }
    }
}

/// The flattened training representation: sorted aggregated cells.
///
/// Cells are ordered by (target, source, gap) and every cell has
/// `total > 0`. Restricting to one target yields exactly that target's
/// independent subproblem dataset.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    cells: Vec<ObservationCell>,
    entity_count: usize,
    max_gap: u32,
    min_gap: u32,
}

impl ObservationSet {
    pub fn cells(&self) -> &[ObservationCell] {
        &self.cells
    }

    pub fn entity_count(&self) -> usize {
        self.entity_count
    }

    pub fn max_gap(&self) -> u32 {
        self.max_gap
    }

    pub fn min_gap(&self) -> u32 {
        self.min_gap
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Total number of (target, source, gap) observations, counting
    /// multiplicity.
    pub fn total_observations(&self) -> u64 {
        self.cells.iter().map(|c| c.total).sum()
    }

    /// Build a set directly from cells (primarily for tests and tools).
    /// Cells are sorted; duplicate keys are merged.
    pub fn from_cells(
        cells: Vec<ObservationCell>,
        entity_count: usize,
        max_gap: u32,
        min_gap: u32,
    ) -> Self {
        let mut merged: HashMap<(u32, u32, u32), (u64, u64)> = HashMap::new();
        for c in cells {
            let e = merged
                .entry((c.target.0, c.source.0, c.gap))
                .or_insert((0, 0));
            e.0 += c.contagions;
            e.1 += c.total;
        }
        let mut cells: Vec<ObservationCell> = merged
            .into_iter()
            .filter(|&(_, (_, total))| total > 0)
            .map(|((t, s, g), (contagions, total))| ObservationCell {
                target: EntityId(t),
                source: EntityId(s),
                gap: g,
                contagions,
                total,
            })
            .collect();
        cells.sort_by_key(|c| (c.target, c.source, c.gap));
        Self {
            cells,
            entity_count,
            max_gap,
            min_gap,
        }
    }
}

/// Windowed pairing of every kept target exposure with its recent history.
///
/// For every sequence, every event at position `i >= skip_prefix` is paired
/// with every prior event at position `j` with `min_gap <= i - j <= max_gap`
/// (gap 0 pairs the exposure with itself), producing one observation
/// `(target = entity(i), source = entity(j), gap = i - j, outcome =
/// contagion(i))`. Identical observations are aggregated into counts.
pub fn assemble_observations_with(
    corpus: &Corpus,
    options: &AssemblyOptions,
) -> Result<ObservationSet> {
    if corpus.sequences.is_empty() {
        return Err(Error::NoData);
    }
    let vocab_size = corpus.vocabulary.len();
    let mut counts: HashMap<(u32, u32, u32), (u64, u64)> = HashMap::new();
    for seq in &corpus.sequences {
        let events = seq.events();
        for ev in events {
            if ev.entity.index() >= vocab_size {
                return Err(Error::UnknownEntity {
                    index: ev.entity.0,
                    vocab_size,
                });
            }
        }
        for i in options.skip_prefix..events.len() {
            let target = events[i].entity;
            let contagion = events[i].contagion as u64;
            let max_gap = (i as u32).min(options.max_gap);
            for gap in options.min_gap..=max_gap {
                let source = events[i - gap as usize].entity;
                let e = counts.entry((target.0, source.0, gap)).or_insert((0, 0));
                e.0 += contagion;
                e.1 += 1;
            }
        }
    }
    let mut cells: Vec<ObservationCell> = counts
        .into_iter()
        .map(|((t, s, g), (contagions, total))| ObservationCell {
            target: EntityId(t),
            source: EntityId(s),
            gap: g,
            contagions,
            total,
        })
        .collect();
    cells.sort_by_key(|c| (c.target, c.source, c.gap));
    Ok(ObservationSet {
        cells,
        entity_count: vocab_size,
        max_gap: options.max_gap,
        min_gap: options.min_gap,
    })
}

/// [`assemble_observations_with`] at `min_gap = 0`.
pub fn assemble_observations(
    corpus: &Corpus,
    max_gap: u32,
    skip_prefix: usize,
) -> Result<ObservationSet> {
    assemble_observations_with(
        corpus,
        &AssemblyOptions {
            max_gap,
            skip_prefix,
            min_gap: 0,
        },
    )
}
