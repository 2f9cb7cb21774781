//! Network attachment point gateways.
//!
//! A cNAP faces set-top boxes over IGMP and turns their reports and leaves
//! into at most one implicit (un)subscription per membership episode. An
//! sNAP faces a multicast server, keeps one forwarding identifier per
//! subscribed cNAP, and publishes each IP packet once under the group's
//! data name with the OR of those identifiers. Membership state exists
//! only at these two gateways; the core stays stateless.
//!
//! Both machines are pure event handlers: they mutate their own state and
//! return emissions (publications, IGMP frames, timers) for the simulator
//! to deliver.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fid::{merge, Fid, TagAssignment};
use crate::igmp::IgmpMessage;
use crate::model::{GroupAddr, IpMulticastPacket, NodeId, PortId, SimTime, Topology};
use crate::pce::{IcnName, PathCache, Pce, PceError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NapError {
    #[error("group {0} is not configured at this gateway")]
    UnconfiguredGroup(GroupAddr),
    #[error("{0}")]
    Pce(#[from] PceError),
}

/// FNV-1a 64-bit digest. Chosen for the group-to-name mapping because it
/// is tiny enough to reimplement independently as a test oracle.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Deterministic mapping from a multicast group to its two item names:
/// `/<root>/C/<digest>` for control and `/<root>/D/<digest>` for data.
/// The pair differs only in the marker segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameMapping {
    root: Vec<u8>,
}

impl NameMapping {
    pub const CONTROL_MARKER: &'static [u8] = b"C";
    pub const DATA_MARKER: &'static [u8] = b"D";

    /// `root` becomes the first name segment, so it must be 1 to 32 bytes.
    pub fn new(root: impl Into<Vec<u8>>) -> Result<Self, PceError> {
        let root = root.into();
        IcnName::new([root.clone()])?;
        Ok(NameMapping { root })
    }

    fn digest_segment(group: GroupAddr) -> Vec<u8> {
        fnv1a_64(&group.octets()).to_be_bytes().to_vec()
    }

    pub fn control(&self, group: GroupAddr) -> IcnName {
        IcnName::new([self.root.clone(), Self::CONTROL_MARKER.to_vec(), Self::digest_segment(group)])
            .expect("segments within limits by construction")
    }

    pub fn data(&self, group: GroupAddr) -> IcnName {
        IcnName::new([self.root.clone(), Self::DATA_MARKER.to_vec(), Self::digest_segment(group)])
            .expect("segments within limits by construction")
    }

    pub fn group_to_names(&self, group: GroupAddr) -> (IcnName, IcnName) {
        (self.control(group), self.data(group))
    }
}

impl Default for NameMapping {
    fn default() -> Self {
        NameMapping { root: b"IPMoverICN".to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    ImplicitSubscribe,
    ImplicitUnsubscribe,
}

/// Published on the group's control channel; carries the cNAP identity so
/// the sNAP can keep a per-cNAP identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlMessage {
    pub kind: ControlKind,
    pub group: GroupAddr,
    pub origin: NodeId,
}

/// A packet in the core: source-routed by its identifier, named for the
/// consumer, bounded by a hop budget against false-positive loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcnPacket {
    pub fid: Fid,
    pub name: IcnName,
    pub hop_limit: u32,
    pub payload: IcnPayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IcnPayload {
    Data(IpMulticastPacket),
    Control(ControlMessage),
}

/// Timer policy of a cNAP. Defaults follow the v2 last-member-query
/// convention: two group-specific queries one second apart.
#[derive(Debug, Clone)]
pub struct CnapTimers {
    pub leave_query_count: u32,
    pub leave_query_interval_us: u64,
    pub leave_query_max_resp_ds: u8,
    pub general_query_max_resp_ds: u8,
}

impl Default for CnapTimers {
    fn default() -> Self {
        CnapTimers {
            leave_query_count: 2,
            leave_query_interval_us: 1_000_000,
            leave_query_max_resp_ds: 10,
            general_query_max_resp_ds: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnapPhase {
    Active,
    /// Group-specific queries are in flight; `queries_sent` counts them.
    /// Data keeps flowing to the remaining member ports until the window
    /// closes in silence.
    Leaving { queries_sent: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnapGroupState {
    pub member_ports: BTreeSet<PortId>,
    pub phase: CnapPhase,
    pub data_name: IcnName,
    /// Bumped on every phase change; a timer fires only if its epoch still
    /// matches, which is how a returning report cancels pending queries.
    epoch: u64,
}

/// What a cNAP wants done after handling one event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CnapEmit {
    /// Publish on the group's control channel.
    Publish(ControlMessage),
    /// Send an IGMP frame out of one local port.
    SendIgmp { port: PortId, msg: IgmpMessage },
    /// Call `handle_timer(group, epoch)` at `at`.
    StartTimer { group: GroupAddr, at: SimTime, epoch: u64 },
}

/// Client-side gateway: IGMP querier for its attached ports, translator
/// of membership into implicit (un)subscriptions, fan-out point for data
/// arriving from the core.
#[derive(Debug)]
pub struct Cnap {
    node: NodeId,
    ports: Vec<PortId>,
    mapping: NameMapping,
    timers: CnapTimers,
    groups: BTreeMap<GroupAddr, CnapGroupState>,
    data_names: BTreeMap<IcnName, GroupAddr>,
    epoch_counter: u64,
    false_positives: u64,
    unexpected_igmp: u64,
    /// Which sNAP serves each group, learned once via rendezvous.
    pub snap_by_group: BTreeMap<GroupAddr, NodeId>,
    /// Cached encodings from this cNAP to sNAPs, for control publications.
    pub paths: PathCache,
}

impl Cnap {
    pub fn new(node: NodeId, ports: Vec<PortId>, mapping: NameMapping, timers: CnapTimers) -> Self {
        Cnap {
            node,
            ports,
            mapping,
            timers,
            groups: BTreeMap::new(),
            data_names: BTreeMap::new(),
            epoch_counter: 0,
            false_positives: 0,
            unexpected_igmp: 0,
            snap_by_group: BTreeMap::new(),
            paths: PathCache::default(),
        }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn mapping(&self) -> &NameMapping {
        &self.mapping
    }

    pub fn group_state(&self, group: GroupAddr) -> Option<&CnapGroupState> {
        self.groups.get(&group)
    }

    /// Deliveries from the core that matched no local group state.
    pub fn false_positives(&self) -> u64 {
        self.false_positives
    }

    /// IGMP frames that made no sense in the current state (leaves for
    /// unknown groups or from non-member ports, queries from clients).
    pub fn unexpected_igmp(&self) -> u64 {
        self.unexpected_igmp
    }

    fn next_epoch(&mut self) -> u64 {
        self.epoch_counter += 1;
        self.epoch_counter
    }

    fn group_queries(&self, group: GroupAddr) -> Vec<CnapEmit> {
        let msg = IgmpMessage::GroupQuery {
            group,
            max_resp_ds: self.timers.leave_query_max_resp_ds,
        };
        self.ports.iter().map(|&port| CnapEmit::SendIgmp { port, msg }).collect()
    }

    /// The periodic general query, one frame per attached port.
    pub fn general_query(&self) -> Vec<CnapEmit> {
        let msg = IgmpMessage::GeneralQuery { max_resp_ds: self.timers.general_query_max_resp_ds };
        self.ports.iter().map(|&port| CnapEmit::SendIgmp { port, msg }).collect()
    }

    /// One IGMP frame arrived on a local port.
    pub fn handle_igmp(&mut self, msg: &IgmpMessage, port: PortId, now: SimTime) -> Vec<CnapEmit> {
        match *msg {
            IgmpMessage::Report { group } => self.handle_report(group, port),
            IgmpMessage::Leave { group } => self.handle_leave(group, port, now),
            IgmpMessage::GeneralQuery { .. } | IgmpMessage::GroupQuery { .. } => {
                self.unexpected_igmp += 1;
                Vec::new()
            }
        }
    }

    fn handle_report(&mut self, group: GroupAddr, port: PortId) -> Vec<CnapEmit> {
        if let Some(state) = self.groups.get_mut(&group) {
            state.member_ports.insert(port);
            if matches!(state.phase, CnapPhase::Leaving { .. }) {
                // The leave is ignored: pending queries die by epoch and
                // the membership episode continues unbroken.
                state.phase = CnapPhase::Active;
                let epoch = self.next_epoch();
                self.groups.get_mut(&group).expect("present").epoch = epoch;
            }
            return Vec::new();
        }
        let epoch = self.next_epoch();
        let data_name = self.mapping.data(group);
        self.data_names.insert(data_name.clone(), group);
        self.groups.insert(
            group,
            CnapGroupState {
                member_ports: BTreeSet::from([port]),
                phase: CnapPhase::Active,
                data_name,
                epoch,
            },
        );
        vec![CnapEmit::Publish(ControlMessage {
            kind: ControlKind::ImplicitSubscribe,
            group,
            origin: self.node,
        })]
    }

    fn handle_leave(&mut self, group: GroupAddr, port: PortId, now: SimTime) -> Vec<CnapEmit> {
        let Some(state) = self.groups.get_mut(&group) else {
            self.unexpected_igmp += 1;
            return Vec::new();
        };
        if !state.member_ports.remove(&port) {
            self.unexpected_igmp += 1;
            return Vec::new();
        }
        if matches!(state.phase, CnapPhase::Leaving { .. }) {
            // Queries are already in flight; the port removal is enough.
            return Vec::new();
        }
        state.phase = CnapPhase::Leaving { queries_sent: 1 };
        let epoch = self.next_epoch();
        self.groups.get_mut(&group).expect("present").epoch = epoch;
        let mut emits = self.group_queries(group);
        emits.push(CnapEmit::StartTimer {
            group,
            at: now + self.timers.leave_query_interval_us,
            epoch,
        });
        emits
    }

    /// A leave-window timer fired. Stale epochs (a report arrived since)
    /// are ignored; a live timer either sends the next query or, after the
    /// last silent wait, ends the episode with an implicit unsubscription.
    pub fn handle_timer(&mut self, group: GroupAddr, epoch: u64, now: SimTime) -> Vec<CnapEmit> {
        let Some(state) = self.groups.get_mut(&group) else {
            return Vec::new();
        };
        if state.epoch != epoch {
            return Vec::new();
        }
        let CnapPhase::Leaving { queries_sent } = state.phase else {
            return Vec::new();
        };
        if queries_sent < self.timers.leave_query_count {
            state.phase = CnapPhase::Leaving { queries_sent: queries_sent + 1 };
            let mut emits = self.group_queries(group);
            emits.push(CnapEmit::StartTimer {
                group,
                at: now + self.timers.leave_query_interval_us,
                epoch,
            });
            return emits;
        }
        let state = self.groups.remove(&group).expect("present");
        self.data_names.remove(&state.data_name);
        vec![CnapEmit::Publish(ControlMessage {
            kind: ControlKind::ImplicitUnsubscribe,
            group,
            origin: self.node,
        })]
    }

    /// A packet arrived from the core. Data for a known group fans out to
    /// the member ports; anything else is a false-positive delivery.
    pub fn handle_icn_data(&mut self, pkt: &IcnPacket) -> Vec<(PortId, IpMulticastPacket)> {
        let IcnPayload::Data(ref ip) = pkt.payload else {
            self.false_positives += 1;
            return Vec::new();
        };
        let Some(&group) = self.data_names.get(&pkt.name) else {
            self.false_positives += 1;
            return Vec::new();
        };
        let state = self.groups.get(&group).expect("name index mirrors group map");
        state.member_ports.iter().map(|&port| (port, *ip)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapGroupState {
    pub subscribed_cnaps: BTreeSet<NodeId>,
    /// Per-cNAP unicast encoding and the topology version it was computed
    /// against. Keys always equal `subscribed_cnaps`.
    pub cnap_fids: BTreeMap<NodeId, (Fid, u64)>,
    /// OR of all `cnap_fids` values; what data packets are stamped with.
    pub merged_fid: Fid,
}

/// What one control message did to the sNAP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlOutcome {
    Subscribed,
    /// Already a recipient; the message is ignored as a duplicate.
    DuplicateSubscribe,
    /// No current path to the cNAP; the subscription is not recorded.
    SubscribeUnreachable,
    Unsubscribed,
    /// Not a recipient; the request is ignored.
    UnsubscribeIgnored,
}

/// What a cache invalidation did to the sNAP.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvalidationReport {
    /// Paths re-fetched from the control entity.
    pub refreshed_paths: usize,
    /// (group, cNAP) recipients dropped because no path exists any more.
    pub dropped: Vec<(GroupAddr, NodeId)>,
}

/// Server-side gateway: entry point of its configured groups into the
/// core. Keeps one identifier per subscribed cNAP and their OR per group.
#[derive(Debug)]
pub struct Snap {
    node: NodeId,
    configured: BTreeSet<GroupAddr>,
    mapping: NameMapping,
    hop_limit: u32,
    groups: BTreeMap<GroupAddr, SnapGroupState>,
    cache: PathCache,
}

impl Snap {
    pub fn new(
        node: NodeId,
        configured: impl IntoIterator<Item = GroupAddr>,
        mapping: NameMapping,
        hop_limit: u32,
    ) -> Self {
        Snap {
            node,
            configured: configured.into_iter().collect(),
            mapping,
            hop_limit,
            groups: BTreeMap::new(),
            cache: PathCache::default(),
        }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn configured(&self) -> &BTreeSet<GroupAddr> {
        &self.configured
    }

    pub fn mapping(&self) -> &NameMapping {
        &self.mapping
    }

    pub fn group_state(&self, group: GroupAddr) -> Option<&SnapGroupState> {
        self.groups.get(&group)
    }

    /// Startup: subscribe to the control channel of every configured
    /// group, so implicit subscriptions published there arrive here.
    pub fn init(&self, pce: &mut Pce) {
        for &group in &self.configured {
            pce.rv_subscribe(self.mapping.control(group), self.node);
        }
    }

    /// An implicit (un)subscription arrived on one of our control
    /// channels.
    pub fn handle_control(
        &mut self,
        msg: &ControlMessage,
        pce: &mut Pce,
        topology: &Topology,
        tags: &TagAssignment,
    ) -> Result<ControlOutcome, NapError> {
        if !self.configured.contains(&msg.group) {
            return Err(NapError::UnconfiguredGroup(msg.group));
        }
        match msg.kind {
            ControlKind::ImplicitSubscribe => self.subscribe(msg.group, msg.origin, pce, topology, tags),
            ControlKind::ImplicitUnsubscribe => Ok(self.unsubscribe(msg.group, msg.origin)),
        }
    }

    fn subscribe(
        &mut self,
        group: GroupAddr,
        cnap: NodeId,
        pce: &mut Pce,
        topology: &Topology,
        tags: &TagAssignment,
    ) -> Result<ControlOutcome, NapError> {
        if self.groups.get(&group).is_some_and(|s| s.subscribed_cnaps.contains(&cnap)) {
            return Ok(ControlOutcome::DuplicateSubscribe);
        }
        let cached = match self.cache.get(self.node, cnap) {
            Some(entry) => (entry.fid.clone(), entry.topo_version),
            None => match pce.get_fid(self.node, cnap, topology, tags) {
                Ok(entry) => {
                    let value = (entry.fid.clone(), entry.topo_version);
                    self.cache.insert(entry);
                    value
                }
                Err(PceError::NoPath { .. }) => return Ok(ControlOutcome::SubscribeUnreachable),
                Err(e) => return Err(e.into()),
            },
        };
        let state = self.groups.entry(group).or_insert_with(|| SnapGroupState {
            subscribed_cnaps: BTreeSet::new(),
            cnap_fids: BTreeMap::new(),
            merged_fid: cached.0.clone(),
        });
        state.subscribed_cnaps.insert(cnap);
        state.cnap_fids.insert(cnap, cached);
        state.merged_fid = merged(&state.cnap_fids);
        Ok(ControlOutcome::Subscribed)
    }

    fn unsubscribe(&mut self, group: GroupAddr, cnap: NodeId) -> ControlOutcome {
        let Some(state) = self.groups.get_mut(&group) else {
            return ControlOutcome::UnsubscribeIgnored;
        };
        if !state.subscribed_cnaps.remove(&cnap) {
            return ControlOutcome::UnsubscribeIgnored;
        }
        state.cnap_fids.remove(&cnap);
        if state.cnap_fids.is_empty() {
            self.groups.remove(&group);
        } else {
            state.merged_fid = merged(&state.cnap_fids);
        }
        ControlOutcome::Unsubscribed
    }

    /// An IP packet arrived from the server. Published once with the
    /// merged identifier if anyone subscribed; dropped otherwise.
    pub fn handle_ip_packet(&self, pkt: &IpMulticastPacket) -> Option<IcnPacket> {
        let state = self.groups.get(&pkt.group)?;
        Some(IcnPacket {
            fid: state.merged_fid.clone(),
            name: self.mapping.data(pkt.group),
            hop_limit: self.hop_limit,
            payload: IcnPayload::Data(*pkt),
        })
    }

    /// The control entity reported changed links. Cached paths using them
    /// are re-fetched once per affected cNAP; recipients that became
    /// unreachable are dropped and reported.
    pub fn handle_invalidation(
        &mut self,
        changed: &BTreeSet<crate::model::LinkId>,
        pce: &mut Pce,
        topology: &Topology,
        tags: &TagAssignment,
    ) -> Result<InvalidationReport, NapError> {
        let stale = self.cache.invalidate(changed);
        if stale.is_empty() {
            return Ok(InvalidationReport::default());
        }
        let mut report = InvalidationReport::default();
        let mut refetched: BTreeMap<NodeId, Option<(Fid, u64)>> = BTreeMap::new();
        for entry in &stale {
            let outcome = match pce.get_fid(self.node, entry.dst, topology, tags) {
                Ok(fresh) => {
                    let value = (fresh.fid.clone(), fresh.topo_version);
                    self.cache.insert(fresh);
                    report.refreshed_paths += 1;
                    Some(value)
                }
                Err(PceError::NoPath { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            refetched.insert(entry.dst, outcome);
        }
        let groups: Vec<GroupAddr> = self.groups.keys().copied().collect();
        for group in groups {
            let state = self.groups.get_mut(&group).expect("iterating known keys");
            let mut touched = false;
            for (&cnap, outcome) in &refetched {
                if !state.subscribed_cnaps.contains(&cnap) {
                    continue;
                }
                touched = true;
                match outcome {
                    Some(value) => {
                        state.cnap_fids.insert(cnap, value.clone());
                    }
                    None => {
                        state.subscribed_cnaps.remove(&cnap);
                        state.cnap_fids.remove(&cnap);
                        report.dropped.push((group, cnap));
                    }
                }
            }
            if !touched {
                continue;
            }
            if state.cnap_fids.is_empty() {
                self.groups.remove(&group);
            } else {
                state.merged_fid = merged(&state.cnap_fids);
            }
        }
        Ok(report)
    }

    /// The structural invariant checked after every event in tests: per
    /// group, recipients and identifiers line up and the merged identifier
    /// is exactly the OR of the per-cNAP ones.
    pub fn merge_invariant_holds(&self) -> bool {
        self.groups.values().all(|state| {
            !state.cnap_fids.is_empty()
                && state.subscribed_cnaps.iter().eq(state.cnap_fids.keys())
                && state.merged_fid == merged(&state.cnap_fids)
        })
    }
}

fn merged(cnap_fids: &BTreeMap<NodeId, (Fid, u64)>) -> Fid {
    merge(cnap_fids.values().map(|(fid, _)| fid)).expect("uniform width by construction")
}
