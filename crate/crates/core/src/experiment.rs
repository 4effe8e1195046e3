//! Multi-seed experiment orchestration: model x speed sweeps, per-seed runs,
//! aggregation, class-separation verdicts, and rank correlations between
//! mobility and performance metrics.

use rayon::prelude::*;

use crate::config::{ModelKind, ScenarioConfig};
use crate::contact::DEFAULT_SAMPLE_INTERVAL;
use crate::error::{Error, Result};
use crate::metrics::{compute_all, MetricReport};
use crate::models::generate;
use crate::rng::{derive_seed, RandomStream};
use crate::routesim::{build_flows, run_simulation, PerfReport, SimParams};

/// Which outputs a plan produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    Metrics,
    Performance,
    Both,
}

impl OutputKind {
    pub fn wants_metrics(self) -> bool {
        matches!(self, OutputKind::Metrics | OutputKind::Both)
    }

    pub fn wants_performance(self) -> bool {
        matches!(self, OutputKind::Performance | OutputKind::Both)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "metrics" => Ok(OutputKind::Metrics),
            "performance" => Ok(OutputKind::Performance),
            "both" => Ok(OutputKind::Both),
            other => Err(Error::config(format!(
                "unknown outputs '{other}' (expected metrics, performance or both)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OutputKind::Metrics => "metrics",
            OutputKind::Performance => "performance",
            OutputKind::Both => "both",
        }
    }
}

/// A full experiment: which models and speeds to sweep, how many seeds to
/// average over, and the base configuration each run derives from.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub models: Vec<ModelKind>,
    pub speed_points: Vec<f64>,
    pub seeds: u32,
    pub base: ScenarioConfig,
    pub sim: SimParams,
    pub outputs: OutputKind,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            models: ModelKind::ALL.to_vec(),
            speed_points: vec![5.0, 10.0, 15.0, 20.0],
            seeds: 25,
            base: ScenarioConfig::default(),
            sim: SimParams::default(),
            outputs: OutputKind::Both,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::config("plan has no models"));
        }
        if self.speed_points.is_empty() {
            return Err(Error::config("plan has no speed points"));
        }
        if self.speed_points.iter().any(|&s| s <= 0.0) {
            return Err(Error::config("speed points must be positive"));
        }
        if self.seeds < 1 {
            return Err(Error::config("seeds must be at least 1"));
        }
        Ok(())
    }
}

/// Mean and sample standard deviation (0 for a single replicate).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    fn from_values(values: &[f64]) -> Stat {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Stat { mean, std }
    }
}

/// Across-seed aggregate of the five mobility metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricAggregate {
    pub nd: Stat,
    pub np: Stat,
    pub lc_total: Stat,
    pub lc_per_pair: Stat,
    pub ld: Stat,
    pub rs: Stat,
}

/// Across-seed aggregate of the routing performance metrics. Delay and NRL
/// average over the replicates where they are defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerfAggregate {
    pub pdr: Stat,
    pub delay: Option<Stat>,
    pub nrl: Option<Stat>,
    /// Replicates whose NRL was undefined (no deliveries).
    pub nrl_undefined: u32,
    pub sent: Stat,
    pub delivered: Stat,
    pub routing_packets: Stat,
}

/// One (model, speed) cell of the sweep, averaged across seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub model: ModelKind,
    pub max_speed: f64,
    pub seeds: u32,
    pub metrics: Option<MetricAggregate>,
    pub perf: Option<PerfAggregate>,
}

/// One individual run of the plan.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub model: ModelKind,
    pub max_speed: f64,
    pub replicate: u32,
    pub scenario_seed: u64,
    pub metrics: Option<MetricReport>,
    pub perf: Option<PerfReport>,
}

/// All outputs of one executed plan.
#[derive(Clone, Debug)]
pub struct PlanOutput {
    pub rows: Vec<AggregateRow>,
    pub runs: Vec<RunRecord>,
}

/// Execute every (model, speed, seed) run of the plan and aggregate.
///
/// Scenario and traffic seeds derive injectively from the base seed and the
/// run index, so no two runs share a random stream; runs execute in parallel
/// and reduce in a fixed order.
pub fn run_plan(plan: &ExperimentPlan) -> Result<PlanOutput> {
    plan.validate()?;
    let n_speeds = plan.speed_points.len();
    let n_seeds = plan.seeds as usize;

    struct RunSpec {
        model: ModelKind,
        speed: f64,
        replicate: u32,
        index: u64,
    }
    let mut specs = Vec::with_capacity(plan.models.len() * n_speeds * n_seeds);
    for (mi, &model) in plan.models.iter().enumerate() {
        for (si, &speed) in plan.speed_points.iter().enumerate() {
            for rep in 0..plan.seeds {
                let index = ((mi * n_speeds + si) * n_seeds) as u64 + rep as u64;
                specs.push(RunSpec {
                    model,
                    speed,
                    replicate: rep,
                    index,
                });
            }
        }
    }

    let runs: Vec<RunRecord> = specs
        .par_iter()
        .map(|spec| {
            execute_run(plan, spec.model, spec.speed, spec.replicate, spec.index).map_err(|e| {
                Error::config(format!(
                    "run (model={}, max_speed={}, replicate={}) failed: {e}",
                    spec.model, spec.speed, spec.replicate
                ))
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(plan.models.len() * n_speeds);
    for (mi, &model) in plan.models.iter().enumerate() {
        for (si, &speed) in plan.speed_points.iter().enumerate() {
            let start = (mi * n_speeds + si) * n_seeds;
            let cell = &runs[start..start + n_seeds];
            rows.push(aggregate_cell(model, speed, plan.seeds, cell));
        }
    }

    Ok(PlanOutput { rows, runs })
}

fn execute_run(
    plan: &ExperimentPlan,
    model: ModelKind,
    speed: f64,
    replicate: u32,
    index: u64,
) -> Result<RunRecord> {
    let scenario_seed = derive_seed(plan.base.seed, 2 * index);
    let traffic_seed = derive_seed(plan.base.seed, 2 * index + 1);

    let metrics = if plan.outputs.wants_metrics() {
        let cfg = ScenarioConfig {
            model,
            max_speed: speed,
            seed: scenario_seed,
            ..plan.base.clone()
        };
        let scenario = generate(&cfg)?;
        Some(compute_all(
            &scenario,
            cfg.radio_range,
            DEFAULT_SAMPLE_INTERVAL,
        )?)
    } else {
        None
    };

    let perf = if plan.outputs.wants_performance() {
        let cfg = ScenarioConfig {
            model,
            max_speed: speed,
            seed: scenario_seed,
            duration: plan.sim.sim_duration,
            ..plan.base.clone()
        };
        let scenario = generate(&cfg)?;
        let mut rng = RandomStream::new(traffic_seed);
        let flows = build_flows(cfg.node_count, &plan.sim, &mut rng)?;
        Some(run_simulation(&scenario, &flows, &plan.sim, &mut rng)?)
    } else {
        None
    };

    Ok(RunRecord {
        model,
        max_speed: speed,
        replicate,
        scenario_seed,
        metrics,
        perf,
    })
}

fn aggregate_cell(model: ModelKind, speed: f64, seeds: u32, cell: &[RunRecord]) -> AggregateRow {
    let metric_reports: Vec<&MetricReport> = cell.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let metrics = if metric_reports.is_empty() {
        None
    } else {
        let pick = |f: &dyn Fn(&MetricReport) -> f64| {
            Stat::from_values(&metric_reports.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        Some(MetricAggregate {
            nd: pick(&|r| r.avg_node_degree),
            np: pick(&|r| r.avg_partitions),
            lc_total: pick(&|r| r.total_link_changes as f64),
            lc_per_pair: pick(&|r| r.link_changes_per_pair),
            ld: pick(&|r| r.avg_link_duration),
            rs: pick(&|r| r.avg_relative_speed),
        })
    };

    let perf_reports: Vec<&PerfReport> = cell.iter().filter_map(|r| r.perf.as_ref()).collect();
    let perf = if perf_reports.is_empty() {
        None
    } else {
        let pick = |f: &dyn Fn(&PerfReport) -> f64| {
            Stat::from_values(&perf_reports.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        let delays: Vec<f64> = perf_reports.iter().filter_map(|r| r.avg_delay).collect();
        let nrls: Vec<f64> = perf_reports.iter().filter_map(|r| r.nrl).collect();
        Some(PerfAggregate {
            pdr: pick(&|r| r.pdr),
            delay: if delays.is_empty() {
                None
            } else {
                Some(Stat::from_values(&delays))
            },
            nrl: if nrls.is_empty() {
                None
            } else {
                Some(Stat::from_values(&nrls))
            },
            nrl_undefined: (perf_reports.len() - nrls.len()) as u32,
            sent: pick(&|r| r.sent_data as f64),
            delivered: pick(&|r| r.delivered_data as f64),
            routing_packets: pick(&|r| r.routing_packets as f64),
        })
    };

    AggregateRow {
        model,
        max_speed: speed,
        seeds,
        metrics,
        perf,
    }
}

/// The five mobility metrics, as selectors over aggregate rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MobilityMetric {
    NodeDegree,
    Partitions,
    LinkChanges,
    LinkDuration,
    RelativeSpeed,
}

impl MobilityMetric {
    pub const ALL: [MobilityMetric; 5] = [
        MobilityMetric::NodeDegree,
        MobilityMetric::Partitions,
        MobilityMetric::LinkChanges,
        MobilityMetric::LinkDuration,
        MobilityMetric::RelativeSpeed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MobilityMetric::NodeDegree => "ND",
            MobilityMetric::Partitions => "NP",
            MobilityMetric::LinkChanges => "LC",
            MobilityMetric::LinkDuration => "LD",
            MobilityMetric::RelativeSpeed => "RS",
        }
    }

    fn mean_of(self, row: &AggregateRow) -> Option<f64> {
        let m = row.metrics.as_ref()?;
        Some(match self {
            MobilityMetric::NodeDegree => m.nd.mean,
            MobilityMetric::Partitions => m.np.mean,
            MobilityMetric::LinkChanges => m.lc_total.mean,
            MobilityMetric::LinkDuration => m.ld.mean,
            MobilityMetric::RelativeSpeed => m.rs.mean,
        })
    }
}

/// The three routing performance metrics, as selectors over aggregate rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerfMetric {
    Pdr,
    Delay,
    Nrl,
}

impl PerfMetric {
    pub const ALL: [PerfMetric; 3] = [PerfMetric::Pdr, PerfMetric::Delay, PerfMetric::Nrl];

    pub fn name(self) -> &'static str {
        match self {
            PerfMetric::Pdr => "PDR",
            PerfMetric::Delay => "delay",
            PerfMetric::Nrl => "NRL",
        }
    }

    fn mean_of(self, row: &AggregateRow) -> Option<f64> {
        let p = row.perf.as_ref()?;
        match self {
            PerfMetric::Pdr => Some(p.pdr.mean),
            PerfMetric::Delay => p.delay.map(|s| s.mean),
            PerfMetric::Nrl => p.nrl.map(|s| s.mean),
        }
    }
}

/// Entity/group class interval comparison for one mobility metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationEntry {
    pub metric: MobilityMetric,
    pub entity_min: f64,
    pub entity_max: f64,
    pub group_min: f64,
    pub group_max: f64,
    /// True iff the closed class intervals are disjoint.
    pub separated: bool,
    /// Gap between the class intervals; negative overlap when they intersect.
    pub margin: f64,
    /// Margin normalized by the spread of all class means, so margins are
    /// comparable across metrics with different units.
    pub relative_margin: f64,
    /// True iff every group-class mean exceeds every entity-class mean.
    pub group_higher: bool,
}

/// Class-interval separation of one mobility metric over rows at a common
/// speed point. Requires all four models. Entity class: RWP, GM; group
/// class: RPGM, NCMM.
pub fn separation(rows: &[AggregateRow], metric: MobilityMetric) -> Result<SeparationEntry> {
    let speed = rows
        .first()
        .map(|r| r.max_speed)
        .ok_or_else(|| Error::usage("separation needs aggregate rows"))?;
    if rows.iter().any(|r| r.max_speed != speed) {
        return Err(Error::usage(
            "separation rows must share one common speed point",
        ));
    }
    let value_of = |model: ModelKind| -> Result<f64> {
        let row = rows
            .iter()
            .find(|r| r.model == model)
            .ok_or_else(|| Error::usage(format!("separation is missing model {model}")))?;
        metric
            .mean_of(row)
            .ok_or_else(|| Error::usage(format!("row for {model} has no mobility metrics")))
    };

    let entity = [value_of(ModelKind::Rwp)?, value_of(ModelKind::Gm)?];
    let group = [value_of(ModelKind::Rpgm)?, value_of(ModelKind::Ncmm)?];
    let entity_min = entity[0].min(entity[1]);
    let entity_max = entity[0].max(entity[1]);
    let group_min = group[0].min(group[1]);
    let group_max = group[0].max(group[1]);

    let margin = (group_min - entity_max).max(entity_min - group_max);
    let overall_min = entity_min.min(group_min);
    let overall_max = entity_max.max(group_max);
    let span = overall_max - overall_min;
    Ok(SeparationEntry {
        metric,
        entity_min,
        entity_max,
        group_min,
        group_max,
        separated: margin > 0.0,
        margin,
        relative_margin: if span > 0.0 { margin / span } else { 0.0 },
        group_higher: group_min > entity_max,
    })
}

/// Separation entries for all five mobility metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub max_speed: f64,
    pub entries: Vec<SeparationEntry>,
}

pub fn separation_report(rows: &[AggregateRow]) -> Result<SeparationReport> {
    let max_speed = rows
        .first()
        .map(|r| r.max_speed)
        .ok_or_else(|| Error::usage("separation needs aggregate rows"))?;
    let entries = MobilityMetric::ALL
        .iter()
        .map(|&m| separation(rows, m))
        .collect::<Result<_>>()?;
    Ok(SeparationReport { max_speed, entries })
}

/// Spearman rank correlation between one mobility metric and one performance
/// metric across aggregate rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationEntry {
    pub mobility_metric: MobilityMetric,
    pub perf_metric: PerfMetric,
    pub rho: f64,
    /// Set when ranks contain ties (rho is 0 if a variable is constant).
    pub ties: bool,
    pub points: usize,
}

/// Average ranks (1-based), ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Spearman correlation over (x, y) observations: Pearson on average ranks.
/// Degenerate rank variance reports 0 with the tie flag set.
pub fn spearman(xs: &[f64], ys: &[f64]) -> (f64, bool) {
    debug_assert_eq!(xs.len(), ys.len());
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let has_ties = |r: &[f64]| {
        let mut sorted = r.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).any(|w| w[0] == w[1])
    };
    let ties = has_ties(&rx) || has_ties(&ry);
    match pearson(&rx, &ry) {
        Some(rho) => (rho, ties),
        None => (0.0, true),
    }
}

/// Spearman correlation of (mobility, performance) aggregate means across
/// rows. Rows lacking either value are skipped; at least 3 points required.
pub fn correlate(
    rows: &[AggregateRow],
    mobility_metric: MobilityMetric,
    perf_metric: PerfMetric,
) -> Result<CorrelationEntry> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in rows {
        if let (Some(x), Some(y)) = (mobility_metric.mean_of(row), perf_metric.mean_of(row)) {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.len() < 3 {
        return Err(Error::usage(format!(
            "correlation of {} vs {} needs at least 3 points, have {}",
            mobility_metric.name(),
            perf_metric.name(),
            xs.len()
        )));
    }
    let (rho, ties) = spearman(&xs, &ys);
    Ok(CorrelationEntry {
        mobility_metric,
        perf_metric,
        rho,
        ties,
        points: xs.len(),
    })
}

/// Correlation entries for all mobility x performance metric pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub entries: Vec<CorrelationEntry>,
}

pub fn correlation_report(rows: &[AggregateRow]) -> Result<CorrelationReport> {
    let mut entries = Vec::new();
    for &m in &MobilityMetric::ALL {
        for &p in &PerfMetric::ALL {
            entries.push(correlate(rows, m, p)?);
        }
    }
    Ok(CorrelationReport { entries })
}
