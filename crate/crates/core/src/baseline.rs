//! The legacy comparison network: L2 bridges running a simplified
//! spanning tree with IGMP snooping.
//!
//! The tree is recomputed globally (root = lowest bridge id, breadth-first
//! over up links, lowest link id first), which is deterministic and stands
//! in for per-port protocol state machines; the claim under test concerns
//! outage duration, not protocol mechanics. While a reconvergence window
//! is open, bridges forward no multicast data at all; at its end the tree
//! is rebuilt and every snoop table is flushed, so membership must be
//! relearned from fresh reports.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::igmp::IgmpMessage;
use crate::model::{GroupAddr, LinkId, NodeId, NodeKind, PortId, SimTime, Topology};

/// Bridges are the nodes that run the spanning tree and snooping; hosts
/// (servers, clients) hang off edge ports. Gateway nodes count as plain
/// bridges here: in the legacy network they have no special role.
pub fn is_bridge(kind: NodeKind) -> bool {
    matches!(kind, NodeKind::Switch | NodeKind::Snap | NodeKind::Cnap)
}

/// The set of directed links data may use. Both directions of every chosen
/// bridge-to-bridge cable are active, plus every up host link; all other
/// bridge-to-bridge cables are blocked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    active: BTreeSet<LinkId>,
    pub root: NodeId,
    pub version: u64,
}

impl SpanningTree {
    pub fn is_active(&self, link: LinkId) -> bool {
        self.active.contains(&link)
    }

    pub fn active_links(&self) -> &BTreeSet<LinkId> {
        &self.active
    }

    /// Active links whose endpoints are both bridges: the part of the tree
    /// a topology change can actually re-shape.
    pub fn trunk_links(&self, topology: &Topology) -> BTreeSet<LinkId> {
        self.active
            .iter()
            .copied()
            .filter(|&id| {
                topology.link(id).is_some_and(|l| {
                    topology.node_kind(l.from).is_some_and(is_bridge)
                        && topology.node_kind(l.to).is_some_and(is_bridge)
                })
            })
            .collect()
    }
}

/// Deterministic simplified spanning tree: per component, breadth-first
/// from the lowest bridge id over up links, claiming the lowest link id
/// toward each newly reached bridge. Host cables are always edge ports and
/// never blocked.
pub fn build_spanning_tree(topology: &Topology) -> SpanningTree {
    let bridges: BTreeSet<NodeId> = topology
        .nodes()
        .filter(|&(_, kind)| is_bridge(kind))
        .map(|(id, _)| id)
        .collect();
    let root = *bridges.iter().next().expect("a legacy network needs at least one bridge");

    let mut active = BTreeSet::new();
    let mut visited: BTreeSet<NodeId> = BTreeSet::new();
    for &start in &bridges {
        if !visited.insert(start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            for link in topology.out_links(node) {
                if !link.is_up() || !bridges.contains(&link.to) || visited.contains(&link.to) {
                    continue;
                }
                visited.insert(link.to);
                active.insert(link.id);
                if let Some(reverse) = topology.cable_peer(link.id) {
                    active.insert(reverse);
                }
                queue.push_back(link.to);
            }
        }
    }
    for link in topology.links() {
        let host_end = !bridges.contains(&link.from) || !bridges.contains(&link.to);
        if host_end && link.is_up() {
            active.insert(link.id);
        }
    }
    SpanningTree { active, root, version: 0 }
}

/// True when a link-state change actually moved the tree: the hypothetical
/// rebuild differs from the current one on bridge-to-bridge links. Failure
/// or repair of a blocked backup changes nothing and must cost nothing.
pub fn reconvergence_needed(topology: &Topology, current: &SpanningTree) -> bool {
    build_spanning_tree(topology).trunk_links(topology) != current.trunk_links(topology)
}

/// What one bridge learned by listening to IGMP: which of its ports lead
/// to members of each group, and which lead toward the querier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SnoopTable {
    entries: BTreeMap<GroupAddr, BTreeSet<PortId>>,
    router_ports: BTreeSet<PortId>,
}

impl SnoopTable {
    /// Learn from one frame seen on `port`.
    pub fn snoop(&mut self, msg: &IgmpMessage, port: PortId) {
        match *msg {
            IgmpMessage::Report { group } => {
                self.entries.entry(group).or_default().insert(port);
            }
            IgmpMessage::Leave { group } => {
                if let Some(ports) = self.entries.get_mut(&group) {
                    ports.remove(&port);
                    if ports.is_empty() {
                        self.entries.remove(&group);
                    }
                }
            }
            IgmpMessage::GeneralQuery { .. } | IgmpMessage::GroupQuery { .. } => {
                self.router_ports.insert(port);
            }
        }
    }

    pub fn members(&self, group: GroupAddr) -> Option<&BTreeSet<PortId>> {
        self.entries.get(&group)
    }

    pub fn router_ports(&self) -> &BTreeSet<PortId> {
        &self.router_ports
    }

    /// Forget everything; used when reconvergence invalidates the learned
    /// forwarding state.
    pub fn flush(&mut self) {
        self.entries.clear();
        self.router_ports.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.router_ports.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceState {
    Forwarding,
    /// No multicast data leaves this bridge until `until`.
    Reconverging { until: SimTime },
}

/// What a bridge is asked to forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L2Pdu {
    /// A multicast stream packet for this group.
    Data(GroupAddr),
    Igmp(IgmpMessage),
}

/// One legacy bridge: its cable ports, snoop table and convergence mode.
/// The spanning tree is shared network-wide and passed into decisions.
#[derive(Debug)]
pub struct Bridge {
    node: NodeId,
    /// Outgoing directed link behind each local port.
    ports: BTreeMap<PortId, LinkId>,
    pub snoop: SnoopTable,
    pub mode: ConvergenceState,
}

impl Bridge {
    pub fn new(node: NodeId, ports: BTreeMap<PortId, LinkId>) -> Self {
        Bridge { node, ports, snoop: SnoopTable::default(), mode: ConvergenceState::Forwarding }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn out_link(&self, port: PortId) -> Option<LinkId> {
        self.ports.get(&port).copied()
    }

    /// Ports whose outgoing link the spanning tree allows.
    pub fn active_ports(&self, tree: &SpanningTree) -> BTreeSet<PortId> {
        self.ports
            .iter()
            .filter(|&(_, &link)| tree.is_active(link))
            .map(|(&port, _)| port)
            .collect()
    }

    /// The forwarding decision for one frame that arrived on `in_port`
    /// (`None` for frames originated at this bridge).
    ///
    /// Multicast data: nothing while reconverging; the snooped member
    /// ports when an entry exists; otherwise flooded. Reports and leaves
    /// travel toward the querier; queries flood. Everything is clamped to
    /// tree-active ports, so no frame crosses a blocked cable.
    pub fn l2_forward(
        &self,
        pdu: &L2Pdu,
        in_port: Option<PortId>,
        tree: &SpanningTree,
    ) -> BTreeSet<PortId> {
        let active = self.active_ports(tree);
        let without_ingress = |mut set: BTreeSet<PortId>| {
            if let Some(p) = in_port {
                set.remove(&p);
            }
            set
        };
        match pdu {
            L2Pdu::Data(group) => {
                if matches!(self.mode, ConvergenceState::Reconverging { .. }) {
                    return BTreeSet::new();
                }
                match self.snoop.members(*group) {
                    Some(members) => {
                        without_ingress(members.intersection(&active).copied().collect())
                    }
                    None => without_ingress(active),
                }
            }
            L2Pdu::Igmp(IgmpMessage::Report { .. }) | L2Pdu::Igmp(IgmpMessage::Leave { .. }) => {
                without_ingress(
                    self.snoop.router_ports().intersection(&active).copied().collect(),
                )
            }
            L2Pdu::Igmp(IgmpMessage::GeneralQuery { .. })
            | L2Pdu::Igmp(IgmpMessage::GroupQuery { .. }) => without_ingress(active),
        }
    }
}
