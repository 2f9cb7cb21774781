//! Shared domain types: the topology graph, links with failover groups,
//! multicast addresses, packets, and simulated time.
//!
//! A physical cable is modeled as two directed [`Link`]s, one per direction,
//! because forwarding tags attach to directions. Failover groups collect
//! parallel links with identical endpoints; member order by ascending
//! [`LinkId`] defines the primary-before-backup priority.

use std::collections::BTreeMap;
use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a node. The node's kind lives in the [`Topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Role of a node. Immutable after the node is added to a topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Switch,
    Snap,
    Cnap,
    Server,
    Client,
}

/// Identifier of one directed link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// Identifier of a port: one cable endpoint as seen from the device it is
/// plugged into. Port numbers equal cable numbers, so the same value names
/// the port on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PortId(pub u32);

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkState {
    Up,
    Down,
}

/// One directed link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    /// Propagation delay in microseconds.
    pub delay_us: u64,
    pub state: LinkState,
    /// Links sharing a group id form a failover group; they must have
    /// identical endpoints. The lowest-id member is the primary.
    pub failover_group: Option<u32>,
}

impl Link {
    pub fn is_up(&self) -> bool {
        self.state == LinkState::Up
    }
}

/// The network graph. `version` strictly increases on every mutation
/// (node/link addition or link state change).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Topology {
    nodes: BTreeMap<NodeId, NodeKind>,
    links: BTreeMap<LinkId, Link>,
    version: u64,
}

/// A single invariant violation found by [`Topology::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SelfLoop(LinkId),
    MissingEndpoint { link: LinkId, node: NodeId },
    /// A failover group whose members do not share (from, to) endpoints.
    MixedGroupEndpoints { group: u32, link: LinkId },
    /// A link with no counterpart in the reverse direction: every cable
    /// must contribute one link per direction.
    UnpairedLink(LinkId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop(l) => write!(f, "link {l} connects a node to itself"),
            Violation::MissingEndpoint { link, node } => {
                write!(f, "link {link} references unknown node {node}")
            }
            Violation::MixedGroupEndpoints { group, link } => {
                write!(f, "failover group {group} member {link} has different endpoints")
            }
            Violation::UnpairedLink(l) => write!(f, "link {l} has no reverse-direction link"),
        }
    }
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn add_node(&mut self, id: NodeId, kind: NodeKind) {
        self.nodes.insert(id, kind);
        self.version += 1;
    }

    pub fn add_link(&mut self, link: Link) {
        self.links.insert(link.id, link);
        self.version += 1;
    }

    pub fn node_kind(&self, id: NodeId) -> Option<NodeKind> {
        self.nodes.get(&id).copied()
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, NodeKind)> + '_ {
        self.nodes.iter().map(|(&id, &kind)| (id, kind))
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(&id)
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Outgoing links of `node`, in ascending `LinkId` order.
    pub fn out_links(&self, node: NodeId) -> impl Iterator<Item = &Link> {
        self.links.values().filter(move |l| l.from == node)
    }

    /// Sets a link up or down. Bumps the version even if the state is
    /// unchanged; callers decide whether a no-op change is worth injecting.
    pub fn set_link_state(&mut self, id: LinkId, state: LinkState) -> bool {
        match self.links.get_mut(&id) {
            Some(link) => {
                link.state = state;
                self.version += 1;
                true
            }
            None => false,
        }
    }

    /// The reverse-direction counterpart of `id`, pairing the k-th parallel
    /// link from A to B with the k-th parallel link from B to A (by
    /// ascending id on both sides), which matches cable construction order.
    pub fn cable_peer(&self, id: LinkId) -> Option<LinkId> {
        let link = self.links.get(&id)?;
        let forward: Vec<LinkId> = self
            .links
            .values()
            .filter(|l| l.from == link.from && l.to == link.to)
            .map(|l| l.id)
            .collect();
        let reverse: Vec<LinkId> = self
            .links
            .values()
            .filter(|l| l.from == link.to && l.to == link.from)
            .map(|l| l.id)
            .collect();
        let pos = forward.iter().position(|&l| l == id)?;
        reverse.get(pos).copied()
    }

    /// Checks every structural invariant and returns the violations found.
    /// Violations are data, not failures: an empty list means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        for link in self.links.values() {
            if link.from == link.to {
                violations.push(Violation::SelfLoop(link.id));
            }
            for node in [link.from, link.to] {
                if !self.nodes.contains_key(&node) {
                    violations.push(Violation::MissingEndpoint { link: link.id, node });
                }
            }
        }
        // Group members must agree on endpoints with the group's primary.
        let groups = failover_groups(self);
        for (group, members) in &groups {
            let primary = &self.links[&members[0]];
            for &member in &members[1..] {
                let l = &self.links[&member];
                if l.from != primary.from || l.to != primary.to {
                    violations.push(Violation::MixedGroupEndpoints { group: *group, link: member });
                }
            }
        }
        // Per unordered node pair, both directions must carry the same
        // number of links.
        let mut dir_counts: BTreeMap<(NodeId, NodeId), (u32, u32)> = BTreeMap::new();
        for link in self.links.values() {
            if link.from == link.to {
                continue;
            }
            let key = (link.from.min(link.to), link.from.max(link.to));
            let entry = dir_counts.entry(key).or_insert((0, 0));
            if link.from <= link.to {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
        for link in self.links.values() {
            if link.from == link.to {
                continue;
            }
            let key = (link.from.min(link.to), link.from.max(link.to));
            let (a, b) = dir_counts[&key];
            if a != b && self.cable_peer(link.id).is_none() {
                violations.push(Violation::UnpairedLink(link.id));
            }
        }
        violations
    }
}

/// Failover groups of a topology: group id to members ordered by ascending
/// `LinkId` (primary first). Ungrouped links are absent.
pub fn failover_groups(topology: &Topology) -> BTreeMap<u32, Vec<LinkId>> {
    let mut groups: BTreeMap<u32, Vec<LinkId>> = BTreeMap::new();
    for link in topology.links() {
        if let Some(g) = link.failover_group {
            groups.entry(g).or_default().push(link.id);
        }
    }
    for members in groups.values_mut() {
        members.sort();
    }
    groups
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{0} is not an IPv4 multicast address")]
pub struct InvalidGroupAddr(pub Ipv4Addr);

/// An IPv4 multicast group address (224.0.0.0/4), validated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Ipv4Addr", into = "Ipv4Addr")]
pub struct GroupAddr(Ipv4Addr);

impl GroupAddr {
    pub fn new(addr: Ipv4Addr) -> Result<Self, InvalidGroupAddr> {
        if addr.is_multicast() {
            Ok(GroupAddr(addr))
        } else {
            Err(InvalidGroupAddr(addr))
        }
    }

    pub fn addr(&self) -> Ipv4Addr {
        self.0
    }

    pub fn octets(&self) -> [u8; 4] {
        self.0.octets()
    }
}

impl TryFrom<Ipv4Addr> for GroupAddr {
    type Error = InvalidGroupAddr;
    fn try_from(addr: Ipv4Addr) -> Result<Self, Self::Error> {
        GroupAddr::new(addr)
    }
}

impl From<GroupAddr> for Ipv4Addr {
    fn from(g: GroupAddr) -> Ipv4Addr {
        g.0
    }
}

impl std::str::FromStr for GroupAddr {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let addr: Ipv4Addr = s.parse().map_err(|e| format!("{e}"))?;
        GroupAddr::new(addr).map_err(|e| e.to_string())
    }
}

impl fmt::Display for GroupAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Simulated time in integer microseconds since scenario start. Integer
/// arithmetic keeps event ordering exact.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_us(us: u64) -> Self {
        SimTime(us)
    }

    pub fn as_us(&self) -> u64 {
        self.0
    }

    pub fn saturating_add(self, us: u64) -> Self {
        SimTime(self.0.saturating_add(us))
    }
}

impl std::ops::Add<u64> for SimTime {
    type Output = SimTime;
    fn add(self, us: u64) -> SimTime {
        SimTime(self.0 + us)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

/// One multicast data packet as the server emits it. The payload is opaque;
/// only its length matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IpMulticastPacket {
    pub group: GroupAddr,
    /// Source sequence number, dense from 0 per (source, group).
    pub seq: u64,
    pub payload_len: u32,
    pub send_time: SimTime,
}

/// Default hop limit for ICN packets. Forwarding-tag false positives can
/// create loops; the hop limit bounds them.
pub const DEFAULT_HOP_LIMIT: u32 = 32;

#[cfg(test)]
mod tests {
    use super::*;

    fn two_switch_topology() -> Topology {
        let mut t = Topology::new();
        t.add_node(NodeId(0), NodeKind::Switch);
        t.add_node(NodeId(1), NodeKind::Switch);
        t.add_link(link(0, 0, 1, None));
        t.add_link(link(1, 1, 0, None));
        t
    }

    fn link(id: u32, from: u32, to: u32, group: Option<u32>) -> Link {
        Link {
            id: LinkId(id),
            from: NodeId(from),
            to: NodeId(to),
            delay_us: 100,
            state: LinkState::Up,
            failover_group: group,
        }
    }

    #[test]
    fn minimal_valid_topology_passes() {
        assert_eq!(two_switch_topology().validate(), vec![]);
    }

    #[test]
    fn self_loop_is_reported() {
        let mut t = two_switch_topology();
        t.add_link(link(2, 0, 0, None));
        let violations = t.validate();
        assert!(violations.contains(&Violation::SelfLoop(LinkId(2))), "{violations:?}");
    }

    #[test]
    fn missing_endpoint_is_reported() {
        let mut t = two_switch_topology();
        t.add_link(link(2, 0, 7, None));
        t.add_link(link(3, 7, 0, None));
        let violations = t.validate();
        assert!(violations
            .contains(&Violation::MissingEndpoint { link: LinkId(2), node: NodeId(7) }));
    }

    #[test]
    fn mixed_group_endpoints_is_reported() {
        let mut t = Topology::new();
        for n in 0..3 {
            t.add_node(NodeId(n), NodeKind::Switch);
        }
        t.add_link(link(0, 0, 1, Some(5)));
        t.add_link(link(1, 1, 0, None));
        t.add_link(link(2, 0, 2, Some(5)));
        t.add_link(link(3, 2, 0, None));
        let violations = t.validate();
        assert_eq!(
            violations,
            vec![Violation::MixedGroupEndpoints { group: 5, link: LinkId(2) }]
        );
    }

    #[test]
    fn unpaired_link_is_reported() {
        let mut t = Topology::new();
        t.add_node(NodeId(0), NodeKind::Switch);
        t.add_node(NodeId(1), NodeKind::Switch);
        t.add_link(link(0, 0, 1, None));
        let violations = t.validate();
        assert_eq!(violations, vec![Violation::UnpairedLink(LinkId(0))]);
    }

    #[test]
    fn failover_groups_empty_without_grouped_links() {
        assert!(failover_groups(&two_switch_topology()).is_empty());
    }

    #[test]
    fn failover_groups_ordered_by_link_id() {
        let mut t = two_switch_topology();
        t.add_link(link(4, 0, 1, Some(0)));
        t.add_link(link(9, 0, 1, Some(0)));
        let groups = failover_groups(&t);
        assert_eq!(groups[&0], vec![LinkId(4), LinkId(9)]);
    }

    #[test]
    fn failover_groups_sorts_unordered_ids() {
        // Insertion order 7, 2, 5; the sort oracle below fixes the expectation.
        let mut t = two_switch_topology();
        for id in [7u32, 2, 5] {
            t.add_link(link(id, 0, 1, Some(1)));
        }
        let mut expected = vec![LinkId(7), LinkId(2), LinkId(5)];
        expected.sort();
        assert_eq!(failover_groups(&t)[&1], expected);
    }

    #[test]
    fn version_counts_every_mutation() {
        let mut t = Topology::new();
        let v0 = t.version();
        t.add_node(NodeId(0), NodeKind::Switch);
        t.add_node(NodeId(1), NodeKind::Switch);
        t.add_link(link(0, 0, 1, None));
        t.add_link(link(1, 1, 0, None));
        t.set_link_state(LinkId(0), LinkState::Down);
        assert_eq!(t.version(), v0 + 5);
    }

    #[test]
    fn group_addr_rejects_unicast() {
        assert!(GroupAddr::new(Ipv4Addr::new(10, 0, 0, 1)).is_err());
        assert!(GroupAddr::new(Ipv4Addr::new(224, 0, 0, 1)).is_ok());
        assert!(GroupAddr::new(Ipv4Addr::new(239, 255, 255, 255)).is_ok());
    }

    #[test]
    fn cable_peer_pairs_parallel_links_in_order() {
        let mut t = two_switch_topology();
        t.add_link(link(4, 0, 1, None));
        t.add_link(link(5, 1, 0, None));
        assert_eq!(t.cable_peer(LinkId(0)), Some(LinkId(1)));
        assert_eq!(t.cable_peer(LinkId(4)), Some(LinkId(5)));
        assert_eq!(t.cable_peer(LinkId(5)), Some(LinkId(4)));
    }
}
