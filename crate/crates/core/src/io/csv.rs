//! CSV emission with a fixed field order per record type. Output is
//! byte-deterministic for a fixed plan and seed; undefined NRL renders as an
//! empty cell plus an `nrl_undefined` flag column.

use crate::config::ModelKind;
use crate::experiment::{AggregateRow, CorrelationEntry, RunRecord, SeparationEntry, Stat};
use crate::metrics::MetricReport;
use crate::routesim::PerfReport;

/// A record type with a fixed header and row rendering.
pub trait CsvRecord {
    fn header() -> &'static str;
    fn to_row(&self) -> String;
}

/// Header plus one line per record; header only for an empty set.
pub fn emit_csv<T: CsvRecord>(records: &[T]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(T::header());
    out.push('\n');
    for r in records {
        out.push_str(&r.to_row());
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_stat_mean(s: Option<Stat>) -> String {
    opt(s.map(|s| s.mean))
}

fn opt_stat_std(s: Option<Stat>) -> String {
    opt(s.map(|s| s.std))
}

/// One scenario's mobility metrics with its generation context.
#[derive(Clone, Debug)]
pub struct MetricCsvRow {
    pub model: ModelKind,
    pub seed: u64,
    pub node_count: usize,
    pub duration: f64,
    pub report: MetricReport,
}

impl CsvRecord for MetricCsvRow {
    fn header() -> &'static str {
        "model,seed,node_count,duration_s,radio_range_m,sample_interval_s,\
         avg_node_degree_nodes,avg_partitions_count,total_link_changes_count,\
         link_changes_per_pair_count,avg_link_duration_s,avg_relative_speed_mps"
    }

    fn to_row(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.seed,
            self.node_count,
            self.duration,
            r.radio_range,
            r.sample_interval,
            r.avg_node_degree,
            r.avg_partitions,
            r.total_link_changes,
            r.link_changes_per_pair,
            r.avg_link_duration,
            r.avg_relative_speed
        )
    }
}

/// One routing run's performance metrics with its context.
#[derive(Clone, Debug)]
pub struct PerfCsvRow {
    pub model: ModelKind,
    pub seed: u64,
    pub node_count: usize,
    pub duration: f64,
    pub routing_radio_range: f64,
    pub flows: usize,
    pub report: PerfReport,
}

impl CsvRecord for PerfCsvRow {
    fn header() -> &'static str {
        "model,seed,node_count,duration_s,routing_radio_range_m,flows_count,\
         sent_data_count,delivered_data_count,routing_packets_count,pdr_pct,\
         avg_delay_s,nrl,nrl_undefined,dropped_no_route_count,\
         dropped_buffer_overflow_count,dropped_link_break_count,dropped_at_end_count"
    }

    fn to_row(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.seed,
            self.node_count,
            self.duration,
            self.routing_radio_range,
            self.flows,
            r.sent_data,
            r.delivered_data,
            r.routing_packets,
            r.pdr,
            opt(r.avg_delay),
            opt(r.nrl),
            u8::from(r.nrl.is_none()),
            r.dropped_no_route,
            r.dropped_buffer_overflow,
            r.dropped_link_break,
            r.dropped_at_end
        )
    }
}

impl CsvRecord for AggregateRow {
    fn header() -> &'static str {
        "model,max_speed_mps,seeds,nd_mean_nodes,nd_std_nodes,np_mean_count,np_std_count,\
         lc_total_mean_count,lc_total_std_count,lc_per_pair_mean_count,lc_per_pair_std_count,\
         ld_mean_s,ld_std_s,rs_mean_mps,rs_std_mps,pdr_mean_pct,pdr_std_pct,\
         delay_mean_s,delay_std_s,nrl_mean,nrl_std,nrl_undefined,\
         sent_mean_count,delivered_mean_count,routing_packets_mean_count"
    }

    fn to_row(&self) -> String {
        let m = self.metrics.as_ref();
        let p = self.perf.as_ref();
        let stat = |s: Option<Stat>| (opt_stat_mean(s), opt_stat_std(s));
        let (nd_m, nd_s) = stat(m.map(|m| m.nd));
        let (np_m, np_s) = stat(m.map(|m| m.np));
        let (lct_m, lct_s) = stat(m.map(|m| m.lc_total));
        let (lcp_m, lcp_s) = stat(m.map(|m| m.lc_per_pair));
        let (ld_m, ld_s) = stat(m.map(|m| m.ld));
        let (rs_m, rs_s) = stat(m.map(|m| m.rs));
        let (pdr_m, pdr_s) = stat(p.map(|p| p.pdr));
        let (del_m, del_s) = stat(p.and_then(|p| p.delay));
        let (nrl_m, nrl_s) = stat(p.and_then(|p| p.nrl));
        format!(
            "{},{},{},{nd_m},{nd_s},{np_m},{np_s},{lct_m},{lct_s},{lcp_m},{lcp_s},\
             {ld_m},{ld_s},{rs_m},{rs_s},{pdr_m},{pdr_s},{del_m},{del_s},{nrl_m},{nrl_s},{},{},{},{}",
            self.model,
            self.max_speed,
            self.seeds,
            p.map(|p| p.nrl_undefined.to_string()).unwrap_or_default(),
            opt_stat_mean(p.map(|p| p.sent)),
            opt_stat_mean(p.map(|p| p.delivered)),
            opt_stat_mean(p.map(|p| p.routing_packets)),
        )
    }
}

/// Separation entry annotated with its speed point.
#[derive(Clone, Debug)]
pub struct SeparationCsvRow {
    pub max_speed: f64,
    pub entry: SeparationEntry,
}

impl CsvRecord for SeparationCsvRow {
    fn header() -> &'static str {
        "max_speed_mps,metric,entity_min,entity_max,group_min,group_max,\
         separated,margin,relative_margin,group_higher"
    }

    fn to_row(&self) -> String {
        let e = &self.entry;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.max_speed,
            e.metric.name(),
            e.entity_min,
            e.entity_max,
            e.group_min,
            e.group_max,
            u8::from(e.separated),
            e.margin,
            e.relative_margin,
            u8::from(e.group_higher)
        )
    }
}

impl CsvRecord for CorrelationEntry {
    fn header() -> &'static str {
        "mobility_metric,perf_metric,spearman_rho,ties,points"
    }

    fn to_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.mobility_metric.name(),
            self.perf_metric.name(),
            self.rho,
            u8::from(self.ties),
            self.points
        )
    }
}

impl CsvRecord for RunRecord {
    fn header() -> &'static str {
        "model,max_speed_mps,replicate,scenario_seed,avg_node_degree_nodes,\
         avg_partitions_count,total_link_changes_count,link_changes_per_pair_count,\
         avg_link_duration_s,avg_relative_speed_mps,pdr_pct,avg_delay_s,nrl,nrl_undefined,\
         sent_data_count,delivered_data_count,routing_packets_count"
    }

    fn to_row(&self) -> String {
        let m = self.metrics.as_ref();
        let p = self.perf.as_ref();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.max_speed,
            self.replicate,
            self.scenario_seed,
            opt(m.map(|m| m.avg_node_degree)),
            opt(m.map(|m| m.avg_partitions)),
            m.map(|m| m.total_link_changes.to_string()).unwrap_or_default(),
            opt(m.map(|m| m.link_changes_per_pair)),
            opt(m.map(|m| m.avg_link_duration)),
            opt(m.map(|m| m.avg_relative_speed)),
            opt(p.map(|p| p.pdr)),
            opt(p.and_then(|p| p.avg_delay)),
            opt(p.and_then(|p| p.nrl)),
            p.map(|p| u8::from(p.nrl.is_none()).to_string()).unwrap_or_default(),
            p.map(|p| p.sent_data.to_string()).unwrap_or_default(),
            p.map(|p| p.delivered_data.to_string()).unwrap_or_default(),
            p.map(|p| p.routing_packets.to_string()).unwrap_or_default(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricReport;

    fn sample_report() -> MetricReport {
        MetricReport {
            avg_node_degree: 2.5,
            avg_partitions: 14.0,
            total_link_changes: 1200,
            link_changes_per_pair: 0.3,
            avg_link_duration: 33.25,
            avg_relative_speed: 4.125,
            sample_interval: 1.0,
            radio_range: 75.0,
        }
    }

    #[test]
    fn empty_set_emits_header_only() {
        let out = emit_csv::<MetricCsvRow>(&[]);
        assert_eq!(out.lines().count(), 1);
        assert!(out.starts_with("model,seed,"));
    }

    #[test]
    fn one_report_one_data_row() {
        let row = MetricCsvRow {
            model: ModelKind::Rwp,
            seed: 7,
            node_count: 90,
            duration: 900.0,
            report: sample_report(),
        };
        let out = emit_csv(&[row]);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("RWP,7,90,900,75,1,2.5,14,1200,0.3,33.25,4.125"));
        let header_fields = lines[0].split(',').count();
        let data_fields = lines[1].split(',').count();
        assert_eq!(header_fields, data_fields);
    }

    #[test]
    fn undefined_nrl_is_empty_cell_with_flag() {
        let row = PerfCsvRow {
            model: ModelKind::Gm,
            seed: 1,
            node_count: 2,
            duration: 300.0,
            routing_radio_range: 250.0,
            flows: 1,
            report: PerfReport {
                pdr: 0.0,
                avg_delay: None,
                nrl: None,
                sent_data: 10,
                delivered_data: 0,
                routing_packets: 30,
                dropped_no_route: 10,
                dropped_buffer_overflow: 0,
                dropped_link_break: 0,
                dropped_at_end: 0,
            },
        };
        let out = emit_csv(&[row]);
        let data = out.lines().nth(1).unwrap();
        let fields: Vec<&str> = data.split(',').collect();
        let header: Vec<&str> = PerfCsvRow::header().split(',').collect();
        let nrl_idx = header.iter().position(|h| h.trim() == "nrl").unwrap();
        let flag_idx = header.iter().position(|h| h.trim() == "nrl_undefined").unwrap();
        assert_eq!(fields[nrl_idx], "");
        assert_eq!(fields[flag_idx], "1");
    }

    #[test]
    fn header_and_row_field_counts_always_match() {
        let plan = crate::experiment::ExperimentPlan {
            models: vec![ModelKind::Rwp],
            speed_points: vec![10.0],
            seeds: 1,
            base: crate::config::ScenarioConfig {
                node_count: 10,
                duration: 20.0,
                seed: 3,
                ..Default::default()
            },
            sim: crate::routesim::SimParams {
                sim_duration: 20.0,
                max_connections: 3,
                ..Default::default()
            },
            outputs: crate::experiment::OutputKind::Both,
        };
        let out = crate::experiment::run_plan(&plan).unwrap();
        for text in [emit_csv(&out.rows), emit_csv(&out.runs)] {
            let lines: Vec<&str> = text.lines().collect();
            let n = lines[0].split(',').count();
            for l in &lines[1..] {
                assert_eq!(l.split(',').count(), n, "ragged row: {l}");
            }
        }
    }
}
