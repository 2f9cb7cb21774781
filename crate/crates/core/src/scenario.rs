//! Scenario files: the human-editable description of one simulated run.
//!
//! A scenario names nodes and cables (each cable becomes two directed
//! links), the gateway configuration, constant-rate streams, scripted
//! client actions, and link faults, plus tuning parameters. Loading fully
//! cross-validates the file so the engine can assume a well-formed world.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::model::{
    GroupAddr, Link, LinkId, LinkState, NodeId, NodeKind, PortId, SimTime, Topology,
    DEFAULT_HOP_LIMIT,
};
use crate::nap::fnv1a_64;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Validation(String),
}

fn invalid(msg: impl fmt::Display) -> ScenarioError {
    ScenarioError::Validation(msg.to_string())
}

/// Spanning-tree reconvergence presets: classic switches take tens of
/// seconds, fast-converging ones about a second.
pub const T_CONV_CLASSIC_US: u64 = 30_000_000;
pub const T_CONV_FAST_US: u64 = 1_000_000;

/// All engine tuning knobs, after defaulting.
#[derive(Debug, Clone)]
pub struct Params {
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub t_conv_us: u64,
    pub detection_delay_us: u64,
    pub notify_delay_us: u64,
    pub leave_query_count: u32,
    pub leave_query_interval_us: u64,
    pub general_query_interval_us: u64,
    pub query_max_resp_ds: u8,
    pub leave_query_max_resp_ds: u8,
    pub gap_threshold: u32,
    pub hop_limit: u32,
    pub link_bucket_us: u64,
    pub duration_us: u64,
}

/// One constant-rate source, emitting dense sequence numbers from 0 at
/// exact `interval_us` spacing.
#[derive(Debug, Clone)]
pub struct StreamCfg {
    pub group: GroupAddr,
    pub server: NodeId,
    /// The server's single uplink (server towards its gateway).
    pub server_link: LinkId,
    pub rate_pps: u32,
    pub interval_us: u64,
    pub payload_len: u32,
    pub start_us: u64,
    pub stop_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientOp {
    Join(GroupAddr),
    Leave(GroupAddr),
}

#[derive(Debug, Clone)]
pub struct ClientCfg {
    pub node: NodeId,
    /// The gateway this client hangs off, and the shared cable port.
    pub access: NodeId,
    pub port: PortId,
    /// Directed link client -> gateway.
    pub uplink: LinkId,
    pub actions: Vec<(SimTime, ClientOp)>,
}

#[derive(Debug, Clone)]
pub struct SnapCfg {
    pub node: NodeId,
    pub groups: Vec<GroupAddr>,
}

/// One cable-level fault: both directed links change state together.
#[derive(Debug, Clone)]
pub struct FaultCfg {
    pub at: SimTime,
    pub links: [LinkId; 2],
    pub up: bool,
}

/// Static wiring lookup tables derived from the cable list.
#[derive(Debug, Clone, Default)]
pub struct Wiring {
    port_by_link: BTreeMap<LinkId, PortId>,
    link_by_port: BTreeMap<(NodeId, PortId), LinkId>,
}

impl Wiring {
    /// The local port a frame arriving over `link` comes in on.
    pub fn port_of(&self, link: LinkId) -> PortId {
        self.port_by_link[&link]
    }

    /// The outgoing link behind `port` at `node`.
    pub fn out_link(&self, node: NodeId, port: PortId) -> LinkId {
        self.link_by_port[&(node, port)]
    }

    /// All (port, outgoing link) pairs at `node`, for bridge setup.
    pub fn ports_at(&self, node: NodeId) -> BTreeMap<PortId, LinkId> {
        self.link_by_port
            .range((node, PortId(0))..=(node, PortId(u32::MAX)))
            .map(|(&(_, port), &link)| (port, link))
            .collect()
    }
}

/// A fully validated run description.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: Params,
    pub topology: Topology,
    pub wiring: Wiring,
    pub snaps: Vec<SnapCfg>,
    pub streams: Vec<StreamCfg>,
    pub clients: Vec<ClientCfg>,
    pub faults: Vec<FaultCfg>,
}

// Raw file shape, before validation.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    params: RawParams,
    topology: RawTopology,
    naps: RawNaps,
    #[serde(default)]
    streams: Vec<RawStream>,
    #[serde(default)]
    clients: Vec<RawClient>,
    #[serde(default)]
    faults: Vec<RawFault>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    m: Option<usize>,
    k: Option<usize>,
    seed: Option<u64>,
    t_conv: Option<String>,
    t_conv_us: Option<u64>,
    detection_delay_us: Option<u64>,
    notify_delay_us: Option<u64>,
    leave_query_count: Option<u32>,
    leave_query_interval_us: Option<u64>,
    general_query_interval_us: Option<u64>,
    query_max_resp_ds: Option<u8>,
    leave_query_max_resp_ds: Option<u8>,
    gap_threshold: Option<u32>,
    hop_limit: Option<u32>,
    link_bucket_us: Option<u64>,
    duration_us: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    nodes: Vec<RawNode>,
    cables: Vec<RawCable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: u32,
    kind: NodeKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCable {
    a: u32,
    b: u32,
    delay_us: u64,
    failover_group: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNaps {
    snaps: Vec<RawSnap>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnap {
    node: u32,
    groups: Vec<GroupAddr>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStream {
    group: GroupAddr,
    server: u32,
    rate_pps: u32,
    payload_len: u32,
    #[serde(default)]
    start_us: u64,
    stop_us: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClient {
    node: u32,
    #[serde(default)]
    actions: Vec<RawAction>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    at_us: u64,
    join: Option<GroupAddr>,
    leave: Option<GroupAddr>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFault {
    at_us: u64,
    cable: u32,
    up: bool,
}

/// Read and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

/// Parse and validate scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text)?;
    validate(raw)
}

fn validate(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    // Topology: nodes first, then cables expanded into directed links
    // 2i (a->b) and 2i+1 (b->a). Scenario failover group g becomes the two
    // directed groups 2g and 2g+1 so each group keeps one direction.
    let mut topology = Topology::new();
    for node in &raw.topology.nodes {
        if topology.contains_node(NodeId(node.id)) {
            return Err(invalid(format!("duplicate node id {}", node.id)));
        }
        topology.add_node(NodeId(node.id), node.kind);
    }
    let mut wiring = Wiring::default();
    for (index, cable) in raw.topology.cables.iter().enumerate() {
        let index = index as u32;
        let (a, b) = (NodeId(cable.a), NodeId(cable.b));
        for end in [a, b] {
            if !topology.contains_node(end) {
                return Err(invalid(format!("cable {index} references unknown node {end}")));
            }
        }
        if a == b {
            return Err(invalid(format!("cable {index} connects node {a} to itself")));
        }
        if cable.delay_us == 0 {
            return Err(invalid(format!("cable {index} needs a delay of at least 1 us")));
        }
        let port = PortId(index);
        for (id, from, to, dir) in
            [(2 * index, a, b, 0), (2 * index + 1, b, a, 1)]
        {
            topology.add_link(Link {
                id: LinkId(id),
                from,
                to,
                delay_us: cable.delay_us,
                state: LinkState::Up,
                failover_group: cable.failover_group.map(|g| 2 * g + dir),
            });
            wiring.port_by_link.insert(LinkId(id), port);
            wiring.link_by_port.insert((from, port), LinkId(id));
        }
    }
    let violations = topology.validate();
    if let Some(v) = violations.first() {
        return Err(invalid(v));
    }
    if !topology.nodes().any(|(_, kind)| crate::baseline::is_bridge(kind)) {
        return Err(invalid("topology needs at least one switch or gateway node"));
    }

    let params = validate_params(&raw)?;

    // Gateways: every group lives at exactly one server-side gateway.
    let mut group_owner: BTreeMap<GroupAddr, NodeId> = BTreeMap::new();
    let mut snaps = Vec::new();
    for snap in &raw.naps.snaps {
        let node = NodeId(snap.node);
        if topology.node_kind(node) != Some(NodeKind::Snap) {
            return Err(invalid(format!("snap config references {node}, which is not a snap node")));
        }
        if snaps.iter().any(|s: &SnapCfg| s.node == node) {
            return Err(invalid(format!("duplicate snap config for {node}")));
        }
        for &group in &snap.groups {
            if group_owner.insert(group, node).is_some() {
                return Err(invalid(format!("group {group} is configured at more than one snap")));
            }
        }
        snaps.push(SnapCfg { node, groups: snap.groups.clone() });
    }
    // The name digest must separate every configured group.
    let mut digests: BTreeMap<u64, GroupAddr> = BTreeMap::new();
    for &group in group_owner.keys() {
        if let Some(&other) = digests.get(&fnv1a_64(&group.octets())) {
            return Err(invalid(format!("groups {other} and {group} collide in the name digest")));
        }
        digests.insert(fnv1a_64(&group.octets()), group);
    }

    let single_uplink = |node: NodeId, role: &str| -> Result<LinkId, ScenarioError> {
        let mut out: Vec<LinkId> = topology.out_links(node).map(|l| l.id).collect();
        if out.len() != 1 {
            return Err(invalid(format!("{role} {node} must have exactly one cable, found {}", out.len())));
        }
        Ok(out.remove(0))
    };

    // Streams: one per group, anchored at a server whose gateway serves
    // the group.
    let mut streams = Vec::new();
    let mut stream_groups = BTreeSet::new();
    for (i, stream) in raw.streams.iter().enumerate() {
        let server = NodeId(stream.server);
        if topology.node_kind(server) != Some(NodeKind::Server) {
            return Err(invalid(format!("stream {i} server {server} is not a server node")));
        }
        if !stream_groups.insert(stream.group) {
            return Err(invalid(format!("more than one stream for group {}", stream.group)));
        }
        let server_link = single_uplink(server, "server")?;
        let gateway = topology.link(server_link).expect("validated").to;
        match group_owner.get(&stream.group) {
            Some(&owner) if owner == gateway => {}
            Some(&owner) => {
                return Err(invalid(format!(
                    "stream group {} is served by {owner}, not by the server's gateway {gateway}",
                    stream.group
                )));
            }
            None => {
                return Err(invalid(format!(
                    "stream group {} is not configured at any snap",
                    stream.group
                )));
            }
        }
        if stream.rate_pps == 0 || 1_000_000 % stream.rate_pps != 0 {
            return Err(invalid(format!(
                "stream {i} rate {} pps must divide 1000000 for exact microsecond spacing",
                stream.rate_pps
            )));
        }
        if stream.payload_len == 0 {
            return Err(invalid(format!("stream {i} needs a non-zero payload length")));
        }
        let stop_us = stream.stop_us.unwrap_or(params.duration_us);
        if stream.start_us >= stop_us {
            return Err(invalid(format!("stream {i} starts at or after its stop time")));
        }
        streams.push(StreamCfg {
            group: stream.group,
            server,
            server_link,
            rate_pps: stream.rate_pps,
            interval_us: 1_000_000 / u64::from(stream.rate_pps),
            payload_len: stream.payload_len,
            start_us: stream.start_us,
            stop_us,
        });
    }

    // Clients: each hangs off a gateway by a single cable; scripts must
    // alternate join/leave per group so membership episodes are clean.
    let mut clients = Vec::new();
    for (i, client) in raw.clients.iter().enumerate() {
        let node = NodeId(client.node);
        if topology.node_kind(node) != Some(NodeKind::Client) {
            return Err(invalid(format!("client {i} node {node} is not a client node")));
        }
        if clients.iter().any(|c: &ClientCfg| c.node == node) {
            return Err(invalid(format!("duplicate client config for {node}")));
        }
        let uplink = single_uplink(node, "client")?;
        let access = topology.link(uplink).expect("validated").to;
        if topology.node_kind(access) != Some(NodeKind::Cnap) {
            return Err(invalid(format!("client {node} must attach to a cnap, found {access}")));
        }
        let mut actions = Vec::new();
        let mut member: BTreeSet<GroupAddr> = BTreeSet::new();
        let mut last_at = 0u64;
        for (j, action) in client.actions.iter().enumerate() {
            if action.at_us < last_at {
                return Err(invalid(format!("client {node} actions are not time-ordered at index {j}")));
            }
            last_at = action.at_us;
            let op = match (action.join, action.leave) {
                (Some(group), None) => {
                    if !member.insert(group) {
                        return Err(invalid(format!("client {node} joins {group} twice without leaving")));
                    }
                    ClientOp::Join(group)
                }
                (None, Some(group)) => {
                    if !member.remove(&group) {
                        return Err(invalid(format!("client {node} leaves {group} without being a member")));
                    }
                    ClientOp::Leave(group)
                }
                _ => {
                    return Err(invalid(format!(
                        "client {node} action at {} us must set exactly one of join/leave",
                        action.at_us
                    )));
                }
            };
            let (ClientOp::Join(group) | ClientOp::Leave(group)) = op;
            if !group_owner.contains_key(&group) {
                return Err(invalid(format!("client {node} references unconfigured group {group}")));
            }
            actions.push((SimTime::from_us(action.at_us), op));
        }
        clients.push(ClientCfg {
            node,
            access,
            port: wiring.port_of(uplink),
            uplink,
            actions,
        });
    }

    let mut faults = Vec::new();
    for (i, fault) in raw.faults.iter().enumerate() {
        let cable = fault.cable;
        if cable as usize >= raw.topology.cables.len() {
            return Err(invalid(format!("fault {i} references unknown cable {cable}")));
        }
        faults.push(FaultCfg {
            at: SimTime::from_us(fault.at_us),
            links: [LinkId(2 * cable), LinkId(2 * cable + 1)],
            up: fault.up,
        });
    }

    // The run must cover everything that is scripted.
    let mut latest = 0u64;
    for s in &streams {
        latest = latest.max(s.start_us);
    }
    for c in &clients {
        if let Some((at, _)) = c.actions.last() {
            latest = latest.max(at.as_us());
        }
    }
    for f in &faults {
        latest = latest.max(f.at.as_us());
    }
    if params.duration_us < latest {
        return Err(invalid(format!(
            "duration {} us ends before the last scripted event at {latest} us",
            params.duration_us
        )));
    }

    Ok(Scenario { params, topology, wiring, snaps, streams, clients, faults })
}

fn validate_params(raw: &RawScenario) -> Result<Params, ScenarioError> {
    let p = &raw.params;
    let t_conv_us = match (p.t_conv.as_deref(), p.t_conv_us) {
        (None, None) => T_CONV_CLASSIC_US,
        (Some("classic"), None) => T_CONV_CLASSIC_US,
        (Some("fast"), None) => T_CONV_FAST_US,
        (Some(other), None) => {
            return Err(invalid(format!("unknown t_conv preset {other:?}, expected \"classic\" or \"fast\"")));
        }
        (None, Some(us)) => us,
        (Some(_), Some(_)) => {
            return Err(invalid("set either t_conv or t_conv_us, not both"));
        }
    };
    let duration_us = match p.duration_us {
        Some(us) => us,
        None => {
            // Default: cover the latest scripted time plus a tail.
            let mut latest = 0u64;
            for s in &raw.streams {
                latest = latest.max(s.stop_us.unwrap_or(s.start_us));
            }
            for c in &raw.clients {
                for a in &c.actions {
                    latest = latest.max(a.at_us);
                }
            }
            for f in &raw.faults {
                latest = latest.max(f.at_us);
            }
            latest + 2_000_000
        }
    };
    let m = p.m.unwrap_or(256);
    let k = p.k.unwrap_or(5);
    if k == 0 || m < k || m > 65_536 {
        return Err(invalid(format!("tag parameters m={m}, k={k} out of range")));
    }
    let gap_threshold = p.gap_threshold.unwrap_or(3);
    if gap_threshold == 0 {
        return Err(invalid("gap_threshold must be at least 1"));
    }
    let leave_query_count = p.leave_query_count.unwrap_or(2);
    if leave_query_count == 0 {
        return Err(invalid("leave_query_count must be at least 1"));
    }
    Ok(Params {
        m,
        k,
        seed: p.seed.unwrap_or(0),
        t_conv_us,
        detection_delay_us: p.detection_delay_us.unwrap_or(50_000),
        notify_delay_us: p.notify_delay_us.unwrap_or(10_000),
        leave_query_count,
        leave_query_interval_us: p.leave_query_interval_us.unwrap_or(1_000_000),
        general_query_interval_us: p.general_query_interval_us.unwrap_or(125_000_000),
        query_max_resp_ds: p.query_max_resp_ds.unwrap_or(100),
        leave_query_max_resp_ds: p.leave_query_max_resp_ds.unwrap_or(10),
        gap_threshold,
        hop_limit: p.hop_limit.unwrap_or(DEFAULT_HOP_LIMIT),
        link_bucket_us: p.link_bucket_us.unwrap_or(1_000_000),
        duration_us,
    })
}
