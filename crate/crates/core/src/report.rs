//! Result files for one run: outage episodes and per-link load as CSV,
//! aggregate counters as JSON. Rendering is pure string building over
//! ordered maps, so identical metrics serialize byte for byte.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::scenario::Scenario;
use crate::sim::{BackendKind, Metrics};

pub const EPISODES_HEADER: &str = "client,group,start_us,duration_us";
pub const LINKS_HEADER: &str = "time_bucket_us,link_id,bytes";

/// One row per outage episode, flows in (client, group) order.
pub fn render_episodes_csv(metrics: &Metrics) -> String {
    let mut out = String::from(EPISODES_HEADER);
    out.push('\n');
    for ((client, group), flow) in &metrics.flows {
        for episode in &flow.outages {
            writeln!(
                out,
                "{},{},{},{}",
                client.0,
                group,
                episode.start.as_us(),
                episode.duration_us
            )
            .expect("writing to a string");
        }
    }
    out
}

/// One row per (time bucket, link) with traffic.
pub fn render_links_csv(metrics: &Metrics) -> String {
    let mut out = String::from(LINKS_HEADER);
    out.push('\n');
    for (&(bucket, link), &bytes) in &metrics.link_bytes {
        writeln!(out, "{},{},{}", bucket, link.0, bytes).expect("writing to a string");
    }
    out
}

#[derive(Serialize)]
struct Totals {
    received: u64,
    duplicates: u64,
    outage_episodes: u64,
    outage_us: u64,
    link_bytes: u64,
    igmp_frames: u64,
    control_publications: u64,
    implicit_subscribes: u64,
    implicit_unsubscribes: u64,
    pce_interactions: u64,
    false_positive_deliveries: u64,
    dropped_at_send: u64,
    dropped_in_flight: u64,
    hop_exhausted: u64,
    invalid_igmp_frames: u64,
    unconfigured_control: u64,
}

#[derive(Serialize)]
struct FlowSummary {
    client: u32,
    group: String,
    received: u64,
    duplicates: u64,
    first_arrival_us: Option<u64>,
    last_arrival_us: Option<u64>,
    outage_episodes: u64,
    outage_us: u64,
}

#[derive(Serialize)]
struct Summary {
    backend: &'static str,
    seed: u64,
    duration_us: u64,
    packets_emitted: std::collections::BTreeMap<String, u64>,
    totals: Totals,
    flows: Vec<FlowSummary>,
}

/// The aggregate counters; totals match the CSV column sums exactly.
pub fn render_summary_json(sc: &Scenario, backend: BackendKind, metrics: &Metrics) -> String {
    let summary = Summary {
        backend: backend.name(),
        seed: sc.params.seed,
        duration_us: sc.params.duration_us,
        packets_emitted: metrics
            .emitted
            .iter()
            .map(|(group, &count)| (group.to_string(), count))
            .collect(),
        totals: Totals {
            received: metrics.total_received(),
            duplicates: metrics.total_duplicates(),
            outage_episodes: metrics.total_outage_episodes(),
            outage_us: metrics.total_outage_us(),
            link_bytes: metrics.total_link_bytes(),
            igmp_frames: metrics.igmp_frames,
            control_publications: metrics.control_publications,
            implicit_subscribes: metrics.subscribe_events.len() as u64,
            implicit_unsubscribes: metrics.unsubscribe_events.len() as u64,
            pce_interactions: metrics.pce_interactions(),
            false_positive_deliveries: metrics.false_positive_deliveries,
            dropped_at_send: metrics.dropped_at_send,
            dropped_in_flight: metrics.dropped_in_flight,
            hop_exhausted: metrics.hop_exhausted,
            invalid_igmp_frames: metrics.invalid_igmp_frames,
            unconfigured_control: metrics.unconfigured_control,
        },
        flows: metrics
            .flows
            .iter()
            .map(|(&(client, group), flow)| FlowSummary {
                client: client.0,
                group: group.to_string(),
                received: flow.received,
                duplicates: flow.duplicates,
                first_arrival_us: flow.first_arrival.map(|t| t.as_us()),
                last_arrival_us: flow.last_arrival.map(|t| t.as_us()),
                outage_episodes: flow.outages.len() as u64,
                outage_us: flow.outages.iter().map(|o| o.duration_us).sum(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable summary");
    text.push('\n');
    text
}

/// Write episodes.csv, links.csv and summary.json for one run.
pub fn write_run_reports(
    dir: &Path,
    sc: &Scenario,
    backend: BackendKind,
    metrics: &Metrics,
) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("episodes.csv"), render_episodes_csv(metrics))?;
    std::fs::write(dir.join("links.csv"), render_links_csv(metrics))?;
    std::fs::write(dir.join("summary.json"), render_summary_json(sc, backend, metrics))?;
    Ok(())
}

/// Side-by-side per-flow comparison of the two backends.
pub fn render_compare_csv(point: &Metrics, ip: &Metrics) -> String {
    let mut out =
        String::from("backend,client,group,received,duplicates,outage_episodes,outage_us\n");
    for (backend, metrics) in [("point", point), ("ip", ip)] {
        for ((client, group), flow) in &metrics.flows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                backend,
                client.0,
                group,
                flow.received,
                flow.duplicates,
                flow.outages.len(),
                flow.outages.iter().map(|o| o.duration_us).sum::<u64>()
            )
            .expect("writing to a string");
        }
    }
    out
}

/// Human-readable comparison table for standard output.
pub fn render_compare_table(point: &Metrics, ip: &Metrics) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<8} {:>8} {:<16} {:>9} {:>9} {:>10} {:>12}",
        "backend", "client", "group", "received", "episodes", "outage_ms", "worst_ms"
    )
    .expect("writing to a string");
    for (backend, metrics) in [("point", point), ("ip", ip)] {
        for ((client, group), flow) in &metrics.flows {
            let total_ms = flow.outages.iter().map(|o| o.duration_us).sum::<u64>() / 1000;
            let worst_ms = flow.outages.iter().map(|o| o.duration_us).max().unwrap_or(0) / 1000;
            writeln!(
                out,
                "{:<8} {:>8} {:<16} {:>9} {:>9} {:>10} {:>12}",
                backend,
                client.0,
                group.to_string(),
                flow.received,
                flow.outages.len(),
                total_ms,
                worst_ms
            )
            .expect("writing to a string");
        }
    }
    out
}
