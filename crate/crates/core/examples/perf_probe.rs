use manetlab::*;
use manetlab::experiment::*;

fn main() {
    for base in [20260809u64, 7, 42, 12345] {
        let mk_plan = |outputs| ExperimentPlan {
            models: ModelKind::ALL.to_vec(),
            speed_points: vec![20.0],
            seeds: 25,
            base: ScenarioConfig { seed: base, ..Default::default() },
            sim: routesim::SimParams::default(),
            outputs,
        };
        let m = run_plan(&mk_plan(OutputKind::Metrics)).unwrap();
        let p = run_plan(&mk_plan(OutputKind::Performance)).unwrap();
        let merged: Vec<AggregateRow> = m.rows.iter().map(|row| {
            let pr = p.rows.iter().find(|r| r.model == row.model).unwrap();
            AggregateRow { perf: pr.perf, ..row.clone() }
        }).collect();
        let e = correlate(&merged, MobilityMetric::LinkDuration, PerfMetric::Nrl).unwrap();
        print!("base={base}: rho={:+.2} |", e.rho);
        for r in &merged {
            print!(" {}: LD={:.1} NRL={:.3} (sd {:.3})", r.model, r.metrics.unwrap().ld.mean,
                r.perf.unwrap().nrl.unwrap().mean, r.perf.unwrap().nrl.unwrap().std);
        }
        println!();
    }
}
