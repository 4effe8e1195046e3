//! Time-sampled unit-disk contact structure: per-sample adjacency and
//! per-pair link-up intervals.

use crate::error::Result;
use crate::geom::Vec2;
use crate::trace::{Scenario, TraceCursor};

/// Default sampling interval, seconds.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 1.0;

/// Number of grid samples covering [0, duration] at the given interval.
pub fn sample_count(duration: f64, interval: f64) -> usize {
    (duration / interval + 1e-9).floor() as usize + 1
}

/// Flat bucket grid over the area, cell size = radio range, so all neighbors
/// of a point lie in its 3x3 cell neighborhood.
struct SpatialGrid {
    cols: usize,
    rows: usize,
    cell: f64,
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl SpatialGrid {
    fn build(positions: &[Vec2], cell: f64) -> Self {
        let max_x = positions.iter().fold(0.0f64, |m, p| m.max(p.x));
        let max_y = positions.iter().fold(0.0f64, |m, p| m.max(p.y));
        let cols = ((max_x / cell).floor() as usize + 1).max(1);
        let rows = ((max_y / cell).floor() as usize + 1).max(1);

        let cell_of = |p: &Vec2| -> usize {
            let cx = ((p.x / cell).floor() as usize).min(cols - 1);
            let cy = ((p.y / cell).floor() as usize).min(rows - 1);
            cy * cols + cx
        };

        let mut counts = vec![0usize; cols * rows + 1];
        for p in positions {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0usize; positions.len()];
        for (i, p) in positions.iter().enumerate() {
            let c = cell_of(p);
            items[fill[c]] = i;
            fill[c] += 1;
        }
        SpatialGrid {
            cols,
            rows,
            cell,
            starts,
            items,
        }
    }

    fn neighbors_of_cell(&self, p: &Vec2) -> impl Iterator<Item = usize> + '_ {
        let cx = ((p.x / self.cell).floor() as isize).min(self.cols as isize - 1);
        let cy = ((p.y / self.cell).floor() as isize).min(self.rows as isize - 1);
        let (cols, rows) = (self.cols as isize, self.rows as isize);
        (-1..=1)
            .flat_map(move |dy| (-1..=1).map(move |dx| (cx + dx, cy + dy)))
            .filter(move |&(x, y)| x >= 0 && x < cols && y >= 0 && y < rows)
            .flat_map(move |(x, y)| {
                let c = (y * cols + x) as usize;
                self.items[self.starts[c]..self.starts[c + 1]].iter().copied()
            })
    }
}

/// All unordered pairs (i < j) within `range` of each other (boundary
/// inclusive: distance == range counts as connected).
pub fn edges_at(positions: &[Vec2], range: f64) -> Vec<(usize, usize)> {
    let grid = SpatialGrid::build(positions, range.max(1e-9));
    let mut edges = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        for j in grid.neighbors_of_cell(p) {
            if j > i && p.distance(positions[j]) <= range {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Symmetric neighbor sets of all nodes at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencySnapshot {
    pub time: f64,
    pub neighbors: Vec<Vec<usize>>,
}

impl AdjacencySnapshot {
    pub fn from_edges(time: f64, node_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut neighbors = vec![Vec::new(); node_count];
        for &(i, j) in edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        AdjacencySnapshot { time, neighbors }
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }
}

/// Positions of every node at time `t`.
pub fn positions_at(scenario: &Scenario, t: f64) -> Result<Vec<Vec2>> {
    scenario
        .traces
        .iter()
        .map(|tr| tr.position_at(t))
        .collect()
}

/// Unit-disk adjacency at one instant.
pub fn sample_adjacency(scenario: &Scenario, t: f64, range: f64) -> Result<AdjacencySnapshot> {
    let positions = positions_at(scenario, t)?;
    let edges = edges_at(&positions, range);
    Ok(AdjacencySnapshot::from_edges(t, positions.len(), edges.as_slice()))
}

/// One maximal run of consecutive linked samples for a pair, as the
/// closed-open time interval [start, end) plus its grid extent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpInterval {
    pub start: f64,
    pub end: f64,
    pub first_sample: usize,
    pub last_sample: usize,
}

impl UpInterval {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Per-pair link-up intervals over the sampling grid. An interval spans a
/// maximal run of consecutive linked samples and is recorded as
/// [first_sample * dt, (last_sample + 1) * dt), clipped at `duration`:
/// a link still up at the final sample closes at `duration` with its
/// observed (censored) length.
#[derive(Clone, Debug)]
pub struct ContactTimeline {
    pub node_count: usize,
    pub sample_interval: f64,
    pub duration: f64,
    pub sample_count: usize,
    intervals: Vec<Vec<UpInterval>>,
}

impl ContactTimeline {
    /// Triangular index of the unordered pair (i, j).
    fn pair_index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * (2 * self.node_count - a - 1) / 2 + (b - a - 1)
    }

    pub fn pair_count(&self) -> usize {
        self.node_count * (self.node_count.saturating_sub(1)) / 2
    }

    pub fn intervals_for(&self, i: usize, j: usize) -> &[UpInterval] {
        &self.intervals[self.pair_index(i, j)]
    }

    /// Iterate (i, j, intervals) over all pairs with at least one interval.
    pub fn linked_pairs(&self) -> impl Iterator<Item = (usize, usize, &[UpInterval])> + '_ {
        let n = self.node_count;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .filter_map(move |(i, j)| {
                let iv = self.intervals_for(i, j);
                if iv.is_empty() {
                    None
                } else {
                    Some((i, j, iv))
                }
            })
    }

    pub fn all_intervals(&self) -> impl Iterator<Item = &UpInterval> + '_ {
        self.intervals.iter().flatten()
    }

    /// Was the pair linked at grid sample `k`?
    pub fn is_up_at_sample(&self, i: usize, j: usize, k: usize) -> bool {
        self.intervals_for(i, j)
            .iter()
            .any(|iv| iv.first_sample <= k && k <= iv.last_sample)
    }
}

/// Incremental timeline construction from per-sample edge sets.
pub struct TimelineBuilder {
    node_count: usize,
    sample_interval: f64,
    duration: f64,
    sample_count: usize,
    run_start: Vec<i64>,
    last_seen: Vec<i64>,
    intervals: Vec<Vec<UpInterval>>,
}

impl TimelineBuilder {
    pub fn new(node_count: usize, sample_interval: f64, duration: f64) -> Self {
        let pairs = node_count * node_count.saturating_sub(1) / 2;
        TimelineBuilder {
            node_count,
            sample_interval,
            duration,
            sample_count: sample_count(duration, sample_interval),
            run_start: vec![-1; pairs],
            last_seen: vec![-1; pairs],
            intervals: vec![Vec::new(); pairs],
        }
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * (2 * self.node_count - a - 1) / 2 + (b - a - 1)
    }

    fn close_run(&mut self, p: usize) {
        let first = self.run_start[p];
        if first < 0 {
            return;
        }
        let last = self.last_seen[p];
        let start = first as f64 * self.sample_interval;
        let end = ((last + 1) as f64 * self.sample_interval).min(self.duration);
        self.intervals[p].push(UpInterval {
            start,
            end,
            first_sample: first as usize,
            last_sample: last as usize,
        });
        self.run_start[p] = -1;
        self.last_seen[p] = -1;
    }

    /// Record the edge set observed at grid sample `k`. Samples must be fed
    /// in increasing order; every linked pair must appear in `edges`.
    pub fn observe(&mut self, k: usize, edges: &[(usize, usize)]) {
        let k = k as i64;
        for &(i, j) in edges {
            let p = self.pair_index(i, j);
            if self.run_start[p] >= 0 && self.last_seen[p] == k - 1 {
                self.last_seen[p] = k;
            } else {
                self.close_run(p);
                self.run_start[p] = k;
                self.last_seen[p] = k;
            }
        }
    }

    pub fn finish(mut self) -> ContactTimeline {
        for p in 0..self.intervals.len() {
            self.close_run(p);
        }
        ContactTimeline {
            node_count: self.node_count,
            sample_interval: self.sample_interval,
            duration: self.duration,
            sample_count: self.sample_count,
            intervals: self.intervals,
        }
    }
}

/// Sample the scenario on the grid and extract per-pair up-intervals.
pub fn build_timeline(
    scenario: &Scenario,
    range: f64,
    sample_interval: f64,
) -> Result<ContactTimeline> {
    let n = scenario.node_count();
    let mut builder = TimelineBuilder::new(n, sample_interval, scenario.duration);
    let mut cursors: Vec<TraceCursor> = scenario
        .traces
        .iter()
        .map(TraceCursor::new)
        .collect::<Result<_>>()?;
    let mut positions = vec![Vec2::ZERO; n];
    for k in 0..sample_count(scenario.duration, sample_interval) {
        let t = k as f64 * sample_interval;
        for (slot, cur) in cursors.iter_mut().enumerate() {
            positions[slot] = cur.sample(t).0;
        }
        let edges = edges_at(&positions, range);
        builder.observe(k, &edges);
    }
    Ok(builder.finish())
}
