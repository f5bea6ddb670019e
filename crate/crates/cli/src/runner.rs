//! Evaluates a sweep on both engines and renders the long-format result table.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use fdiab::analysis::{Analyzer, Link, LinkBreakdown};
use fdiab::montecarlo::{simulate, McConfig, McEstimate};
use fdiab::{validate, Duplex, RawParams, SystemParams};

use crate::sweep::{Engine, MetricKind, SweepSpec};
use crate::CliError;

pub const CSV_HEADER: [&str; 8] = ["axis_name", "axis_value", "engine", "metric", "link_class", "value", "ci95", "seconds"];

/// Association classes in report order.
const CLASS_NAMES: [&str; 3] = ["gnb", "iab_los", "iab_nlos"];

/// One output line. `ci95` is set for Monte Carlo rows only, `seconds` only when timing
/// was requested (it is the wall time of the whole point on that engine).
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis_name: String,
    pub axis_value: f64,
    pub engine: Engine,
    pub metric: String,
    pub link_class: String,
    pub value: f64,
    pub ci95: Option<f64>,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: 1, timing: false }
    }
}

type JobResult = Result<Vec<Row>, CliError>;

struct Job {
    value: f64,
    duplex: Option<Duplex>,
    engine: Engine,
    params: SystemParams,
}

/// Runs every (value, duplex, engine) point of the sweep on top of `base` and returns rows
/// in axis order.
pub fn run_sweep(spec: &SweepSpec, base: &RawParams, opts: &RunOptions) -> Result<Vec<Row>, CliError> {
    let duplexes: Vec<Option<Duplex>> = if spec.duplex.is_empty() { vec![None] } else { spec.duplex.iter().copied().map(Some).collect() };
    let mut jobs = Vec::new();
    for &value in &spec.values {
        for &duplex in &duplexes {
            let mut raw = base.clone();
            spec.axis.apply(&mut raw, value)?;
            if let Some(d) = duplex {
                raw.duplex = d;
            }
            let params = validate(&raw).map_err(|e| CliError::Parse(format!("{} = {value}: {e}", spec.axis)))?;
            for &engine in &spec.engines {
                jobs.push(Job { value, duplex, engine, params: params.clone() });
            }
        }
    }
    let workers = opts.workers.clamp(1, jobs.len().max(1));
    let inner_workers = (opts.workers / jobs.len().max(1)).max(1);
    let results: Mutex<Vec<Option<JobResult>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let out = run_job(spec, job, inner_workers, opts.timing);
                results.lock().unwrap()[i] = Some(out);
            });
        }
    });
    let mut rows = Vec::new();
    for r in results.into_inner().unwrap() {
        rows.extend(r.expect("every job ran")?);
    }
    Ok(rows)
}

fn tau_of(spec: &SweepSpec, value: f64) -> f64 {
    let db = if spec.axis == crate::Axis::TauDb { value } else { spec.tau_db };
    10f64.powf(db / 10.0)
}

fn run_job(spec: &SweepSpec, job: &Job, inner_workers: usize, timing: bool) -> Result<Vec<Row>, CliError> {
    let start = Instant::now();
    let tau = tau_of(spec, job.value);
    let fail = |e: fdiab::EvalError| CliError::Eval(format!("{} = {} ({}): {e}", spec.axis, job.value, job.engine.name()));
    let mut out = Vec::new();
    let mut push = |metric: MetricKind, link: &str, value: f64, ci: Option<f64>| {
        let metric = match job.duplex {
            Some(d) => format!("{}_{d}", metric.name()),
            None => metric.name().to_string(),
        };
        out.push(Row {
            axis_name: spec.axis.name().to_string(),
            axis_value: job.value,
            engine: job.engine,
            metric,
            link_class: link.to_string(),
            value,
            ci95: ci,
            seconds: None,
        });
    };
    let rate = job.params.effective_bandwidth() * (1.0 + tau).log2();
    match job.engine {
        Engine::Analytic => {
            let a = Analyzer::new(&job.params).map_err(fail)?;
            let wants = |m| spec.metrics.contains(&m);
            let coverage =
                if wants(MetricKind::Coverage) || wants(MetricKind::CapOutage) { Some(a.sinr_coverage(tau).map_err(fail)?) } else { None };
            for &m in &spec.metrics {
                match m {
                    MetricKind::Association => {
                        let r = a.association();
                        for (name, v) in CLASS_NAMES.iter().zip([r.gnb, r.iab_los, r.iab_nlos]) {
                            push(m, name, v, None);
                        }
                    }
                    MetricKind::Coverage => {
                        let c = coverage.as_ref().expect("computed above");
                        push_links(&mut push, m, c.value, &c.links, 1.0);
                    }
                    MetricKind::CapOutage => {
                        let c = coverage.as_ref().expect("computed above");
                        push_links(&mut push, m, rate * c.value, &c.links, rate);
                    }
                    MetricKind::Ergodic => {
                        let e = a.ergodic_capacity().map_err(fail)?;
                        push_links(&mut push, m, e.value, &e.links, 1.0);
                    }
                }
            }
        }
        Engine::Mc => {
            let mut cfg = McConfig::new(spec.mc_iterations, spec.seed, vec![tau]);
            cfg.workers = inner_workers;
            let rep = simulate(&job.params, &cfg).map_err(fail)?;
            for &m in &spec.metrics {
                match m {
                    MetricKind::Association => {
                        for (name, e) in CLASS_NAMES.iter().zip(rep.association) {
                            push(m, name, e.mean, Some(e.half_width_95));
                        }
                    }
                    MetricKind::Coverage => push_mc_links(&mut push, m, rep.coverage[0], &rep.link_coverage[0], 1.0),
                    MetricKind::CapOutage => push_mc_links(&mut push, m, rep.capacity_with_outage(0), &rep.link_coverage[0], rate),
                    MetricKind::Ergodic => push_mc_links(&mut push, m, rep.ergodic, &rep.link_rate, 1.0),
                }
            }
        }
    }
    if timing {
        let secs = start.elapsed().as_secs_f64();
        for r in &mut out {
            r.seconds = Some(secs);
        }
    }
    log::info!("{} = {} on {} done in {:.1} s", spec.axis, job.value, job.engine.name(), start.elapsed().as_secs_f64());
    Ok(out)
}

fn push_links(push: &mut impl FnMut(MetricKind, &str, f64, Option<f64>), m: MetricKind, total: f64, links: &LinkBreakdown, k: f64) {
    push(m, "network", total, None);
    for l in Link::ALL {
        push(m, l.name(), k * links.get(l), None);
    }
}

fn push_mc_links(
    push: &mut impl FnMut(MetricKind, &str, f64, Option<f64>),
    m: MetricKind,
    total: McEstimate,
    links: &[McEstimate; 4],
    k: f64,
) {
    push(m, "network", total.mean, Some(total.half_width_95));
    for (l, e) in Link::ALL.iter().zip(links) {
        let e = e.scaled(k);
        push(m, l.name(), e.mean, Some(e.half_width_95));
    }
}

/// Writes the header and rows as CSV.
pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.axis_name.clone(),
            r.axis_value.to_string(),
            r.engine.name().to_string(),
            r.metric.clone(),
            r.link_class.clone(),
            r.value.to_string(),
            opt(r.ci95),
            opt(r.seconds),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Human-readable table of the headline rows (network values and association shares).
pub fn summary(rows: &[Row]) -> String {
    let mut s = format!("{:>14} {:>9} {:<18} {:<10} {:>14} {:>12}\n", "axis_value", "engine", "metric", "class", "value", "ci95");
    for r in rows.iter().filter(|r| r.link_class == "network" || r.metric.starts_with("association")) {
        let ci = r.ci95.map(|c| format!("{c:.4e}")).unwrap_or_default();
        s.push_str(&format!(
            "{:>14} {:>9} {:<18} {:<10} {:>14.6e} {:>12}\n",
            r.axis_value,
            r.engine.name(),
            r.metric,
            r.link_class,
            r.value,
            ci
        ));
    }
    s
}
