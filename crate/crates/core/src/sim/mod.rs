//! The deterministic discrete-event engine.
//!
//! One event loop drives either backend over the same physical world:
//! servers emit at fixed rates, set-top boxes follow their scripts and
//! answer queries, cables carry frames with fixed delays and lose whatever
//! is in flight when they fail. Everything network-specific (how a frame
//! is forwarded, what happens on a fault) lives behind the [`Net`] trait
//! with one implementation per backend.
//!
//! Determinism: time is integer microseconds, ties break by insertion
//! order, all state lives in ordered maps, and the only randomness is a
//! counter-based generator seeded from the scenario seed (tag assignment
//! and query-response jitter).

pub mod metrics;

mod ip;
mod point;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::igmp::{self, IgmpMessage};
use crate::model::{
    GroupAddr, IpMulticastPacket, LinkId, LinkState, NodeId, NodeKind, SimTime,
};
use crate::nap::{IcnPacket, IcnPayload};
use crate::scenario::{ClientCfg, ClientOp, Scenario};

pub use metrics::{detect_outages, FlowStats, Metrics, OutageEpisode};

/// Which network carries the streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    /// Stateless-multicast core with gateways at both edges.
    Point,
    /// Legacy L2: spanning tree plus IGMP snooping.
    Ip,
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::Point => "point",
            BackendKind::Ip => "ip",
        }
    }
}

/// Wire size of a control publication: name digest, group, origin, kind.
const CONTROL_WIRE_LEN: u64 = 24;

/// A frame travelling over one cable. Data frames count their payload
/// length in both backends, so link loads compare directly; encapsulation
/// overhead is not modeled.
#[derive(Debug, Clone)]
pub(crate) enum Frame {
    Ip(IpMulticastPacket),
    Igmp([u8; igmp::WIRE_LEN]),
    Icn(IcnPacket),
}

impl Frame {
    fn wire_len(&self) -> u64 {
        match self {
            Frame::Ip(pkt) => u64::from(pkt.payload_len),
            Frame::Igmp(_) => igmp::WIRE_LEN as u64,
            Frame::Icn(pkt) => match &pkt.payload {
                IcnPayload::Data(ip) => u64::from(ip.payload_len),
                IcnPayload::Control(_) => CONTROL_WIRE_LEN,
            },
        }
    }
}

/// Backend-specific events; each backend handles only the ones it
/// schedules.
#[derive(Debug, Clone)]
pub(crate) enum NetEv {
    /// A cNAP leave-window timer.
    CnapTimer { node: NodeId, group: GroupAddr, epoch: u64 },
    /// Periodic general query on a cNAP's attached ports.
    CnapGeneralQuery { node: NodeId },
    /// A switch's data plane notices a link state change.
    EffectiveLink { link: LinkId, up: bool },
    /// The control entity learns of a link state change.
    PceNotify { link: LinkId },
    /// A reconvergence window closes.
    ReconvergeEnd { until: SimTime },
    /// Periodic general query by the elected querier.
    QuerierGeneralQuery,
    /// Last-member query round after a leave reached the querier.
    QuerierGroupQuery { group: GroupAddr, remaining: u32 },
}

#[derive(Debug, Clone)]
pub(crate) enum Ev {
    StreamEmit { stream: usize, seq: u64 },
    ClientAction { stb: usize, idx: usize },
    /// A jittered query response comes due.
    StbRespond { stb: usize, group: GroupAddr },
    Arrival { link: LinkId, frame: Frame, epoch: u64 },
    Fault { idx: usize },
    Net(NetEv),
}

struct Scheduled {
    at: SimTime,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

/// Time-ordered queue; ties run in insertion order.
#[derive(Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Reverse<Scheduled>>,
    next_seq: u64,
}

impl EventQueue {
    fn push(&mut self, at: SimTime, ev: Ev) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Scheduled { at, seq, ev }));
    }

    fn pop(&mut self) -> Option<(SimTime, Ev)> {
        self.heap.pop().map(|Reverse(s)| (s.at, s.ev))
    }
}

/// One set-top box: the scripted client behind a cNAP port.
pub(crate) struct Stb {
    cfg: ClientCfg,
    members: std::collections::BTreeSet<GroupAddr>,
}

/// The shared world: physics, scripts, metrics. Backends get it mutably
/// alongside every frame.
pub(crate) struct Ctx<'a> {
    pub sc: &'a Scenario,
    /// Actual link states. Sending on a down link loses the frame.
    pub real: crate::model::Topology,
    pub queue: EventQueue,
    pub metrics: Metrics,
    pub rng: ChaCha8Rng,
    pub stbs: Vec<Stb>,
    stb_by_node: BTreeMap<NodeId, usize>,
    /// Bumped when a link goes down; kills frames that were in flight.
    link_epochs: BTreeMap<LinkId, u64>,
    end: SimTime,
}

impl<'a> Ctx<'a> {
    fn new(sc: &'a Scenario) -> Self {
        let stbs: Vec<Stb> = sc
            .clients
            .iter()
            .map(|cfg| Stb { cfg: cfg.clone(), members: Default::default() })
            .collect();
        let stb_by_node = stbs
            .iter()
            .enumerate()
            .map(|(i, stb)| (stb.cfg.node, i))
            .collect();
        Ctx {
            sc,
            real: sc.topology.clone(),
            queue: EventQueue::default(),
            metrics: Metrics::default(),
            // A fixed tweak keeps the jitter stream independent from the
            // tag assignment, which consumes the seed directly.
            rng: ChaCha8Rng::seed_from_u64(sc.params.seed ^ 0x9e37_79b9_7f4a_7c15),
            stbs,
            stb_by_node,
            link_epochs: BTreeMap::new(),
            end: SimTime::from_us(sc.params.duration_us),
        }
    }

    pub fn schedule(&mut self, at: SimTime, ev: Ev) {
        self.queue.push(at, ev);
    }

    pub fn schedule_net(&mut self, at: SimTime, ev: NetEv) {
        self.queue.push(at, Ev::Net(ev));
    }

    fn epoch(&self, link: LinkId) -> u64 {
        self.link_epochs.get(&link).copied().unwrap_or(0)
    }

    /// Change a link's actual state; going down strands in-flight frames.
    fn apply_link_state(&mut self, link: LinkId, up: bool) {
        let state = if up { LinkState::Up } else { LinkState::Down };
        let before = self.real.link(link).map(|l| l.state);
        if before == Some(state) {
            return;
        }
        self.real.set_link_state(link, state);
        if state == LinkState::Down {
            *self.link_epochs.entry(link).or_insert(0) += 1;
        }
    }

    /// Put a frame on a cable. Lost immediately if the link is down;
    /// otherwise it arrives after the link's delay, unless the link dies
    /// first.
    pub fn send(&mut self, link: LinkId, frame: Frame, now: SimTime) {
        let l = self.real.link(link).expect("send on unknown link");
        if !l.is_up() {
            self.metrics.dropped_at_send += 1;
            return;
        }
        let bucket = now.as_us() / self.sc.params.link_bucket_us * self.sc.params.link_bucket_us;
        self.metrics.add_link_bytes(bucket, link, frame.wire_len());
        if matches!(frame, Frame::Igmp(_)) {
            self.metrics.igmp_frames += 1;
        }
        let arrive = now + l.delay_us;
        let epoch = self.epoch(link);
        self.schedule(arrive, Ev::Arrival { link, frame, epoch });
    }

    /// Send one IGMP message from a set-top box up its access cable.
    fn send_igmp_from_stb(&mut self, stb: usize, msg: IgmpMessage, now: SimTime) {
        let uplink = self.stbs[stb].cfg.uplink;
        self.send(uplink, Frame::Igmp(msg.encode()), now);
    }

    /// Queries fan out into jittered per-group responses; data is counted
    /// while the box is a member of its group.
    fn client_arrival(&mut self, node: NodeId, frame: Frame, now: SimTime) {
        let Some(&i) = self.stb_by_node.get(&node) else {
            return;
        };
        match frame {
            Frame::Ip(pkt) => {
                if self.stbs[i].members.contains(&pkt.group) {
                    self.metrics.record_arrival(node, pkt.group, pkt.seq, now);
                }
            }
            Frame::Igmp(bytes) => match igmp::IgmpMessage::decode(&bytes) {
                Ok(IgmpMessage::GeneralQuery { max_resp_ds }) => {
                    let groups: Vec<GroupAddr> =
                        self.stbs[i].members.iter().copied().collect();
                    for group in groups {
                        self.schedule_response(i, group, max_resp_ds, now);
                    }
                }
                Ok(IgmpMessage::GroupQuery { group, max_resp_ds }) => {
                    if self.stbs[i].members.contains(&group) {
                        self.schedule_response(i, group, max_resp_ds, now);
                    }
                }
                Ok(_) => {}
                Err(_) => self.metrics.invalid_igmp_frames += 1,
            },
            Frame::Icn(_) => {
                self.metrics.false_positive_deliveries += 1;
            }
        }
    }

    fn schedule_response(&mut self, stb: usize, group: GroupAddr, max_resp_ds: u8, now: SimTime) {
        let jitter = if max_resp_ds == 0 {
            0
        } else {
            self.rng.gen_range(0..u64::from(max_resp_ds) * 100_000)
        };
        self.schedule(now + jitter, Ev::StbRespond { stb, group });
    }

    fn server_arrival(&mut self, frame: Frame) {
        // Hosts consume; a core packet reaching a server is a tag false
        // positive, everything else is flood traffic to ignore.
        if matches!(frame, Frame::Icn(_)) {
            self.metrics.false_positive_deliveries += 1;
        }
    }
}

/// The backend: everything between the host cables.
pub(crate) trait Net {
    /// Protocol start-of-day work and recurring-event bootstrap.
    fn boot(&mut self, ctx: &mut Ctx);
    /// A frame arrived at `link.to`, a core node of this backend.
    fn deliver(&mut self, ctx: &mut Ctx, link: LinkId, frame: Frame, now: SimTime);
    /// A link changed state (already applied to the physical world).
    fn on_fault(&mut self, ctx: &mut Ctx, link: LinkId, up: bool, now: SimTime);
    /// One of the events this backend scheduled came due.
    fn on_net_event(&mut self, ctx: &mut Ctx, ev: NetEv, now: SimTime);
    /// Fold backend-internal counters into the metrics.
    fn finish(&mut self, metrics: &mut Metrics);
}

/// Run one scenario on one backend. Pure: same scenario and seed, same
/// metrics.
pub fn run(sc: &Scenario, backend: BackendKind) -> Metrics {
    let mut ctx = Ctx::new(sc);
    match backend {
        BackendKind::Point => {
            let mut net = point::PointNet::new(sc);
            run_loop(&mut ctx, &mut net);
            net.finish(&mut ctx.metrics);
        }
        BackendKind::Ip => {
            let mut net = ip::IpNet::new(sc);
            run_loop(&mut ctx, &mut net);
            net.finish(&mut ctx.metrics);
        }
    }
    let end = ctx.end;
    let intervals: BTreeMap<GroupAddr, u64> =
        sc.streams.iter().map(|s| (s.group, s.interval_us)).collect();
    ctx.metrics.finalize(end, sc.params.gap_threshold, |group| {
        intervals.get(&group).copied().unwrap_or(u64::MAX / 8)
    });
    ctx.metrics
}

fn run_loop(ctx: &mut Ctx, net: &mut impl Net) {
    net.boot(ctx);

    // Faults are scheduled first so that at equal timestamps a fault is
    // processed before traffic scheduled later.
    for (idx, fault) in ctx.sc.faults.iter().enumerate() {
        ctx.queue.push(fault.at, Ev::Fault { idx });
    }
    for (idx, stream) in ctx.sc.streams.iter().enumerate() {
        ctx.queue.push(SimTime::from_us(stream.start_us), Ev::StreamEmit { stream: idx, seq: 0 });
    }
    for (i, stb) in ctx.stbs.iter().enumerate() {
        for (j, (at, _)) in stb.cfg.actions.iter().enumerate() {
            ctx.queue.push(*at, Ev::ClientAction { stb: i, idx: j });
        }
    }

    while let Some((now, ev)) = ctx.queue.pop() {
        if now > ctx.end {
            break;
        }
        match ev {
            Ev::StreamEmit { stream, seq } => {
                let cfg = &ctx.sc.streams[stream];
                let pkt = IpMulticastPacket {
                    group: cfg.group,
                    seq,
                    payload_len: cfg.payload_len,
                    send_time: now,
                };
                let (group, link, interval, stop) =
                    (cfg.group, cfg.server_link, cfg.interval_us, cfg.stop_us);
                *ctx.metrics.emitted.entry(group).or_default() += 1;
                ctx.send(link, Frame::Ip(pkt), now);
                let next = now + interval;
                if next.as_us() < stop {
                    ctx.schedule(next, Ev::StreamEmit { stream, seq: seq + 1 });
                }
            }
            Ev::ClientAction { stb, idx } => {
                let (_, op) = ctx.stbs[stb].cfg.actions[idx];
                let node = ctx.stbs[stb].cfg.node;
                match op {
                    ClientOp::Join(group) => {
                        ctx.stbs[stb].members.insert(group);
                        ctx.metrics.begin_membership(node, group, now);
                        ctx.send_igmp_from_stb(stb, IgmpMessage::Report { group }, now);
                    }
                    ClientOp::Leave(group) => {
                        ctx.stbs[stb].members.remove(&group);
                        ctx.metrics.end_membership(node, group, now);
                        ctx.send_igmp_from_stb(stb, IgmpMessage::Leave { group }, now);
                    }
                }
            }
            Ev::StbRespond { stb, group } => {
                // Membership may have changed while the jitter ran.
                if ctx.stbs[stb].members.contains(&group) {
                    ctx.send_igmp_from_stb(stb, IgmpMessage::Report { group }, now);
                }
            }
            Ev::Arrival { link, frame, epoch } => {
                let alive = ctx
                    .real
                    .link(link)
                    .map(|l| l.is_up() && ctx.epoch(link) == epoch)
                    .unwrap_or(false);
                if !alive {
                    ctx.metrics.dropped_in_flight += 1;
                    continue;
                }
                let node = ctx.real.link(link).expect("checked above").to;
                match ctx.real.node_kind(node) {
                    Some(NodeKind::Client) => ctx.client_arrival(node, frame, now),
                    Some(NodeKind::Server) => ctx.server_arrival(frame),
                    Some(_) => net.deliver(ctx, link, frame, now),
                    None => unreachable!("link to unknown node"),
                }
            }
            Ev::Fault { idx } => {
                let fault = ctx.sc.faults[idx].clone();
                for link in fault.links {
                    ctx.apply_link_state(link, fault.up);
                }
                for link in fault.links {
                    net.on_fault(ctx, link, fault.up, now);
                }
            }
            Ev::Net(ev) => net.on_net_event(ctx, ev, now),
        }
    }
}

#[cfg(test)]
mod tests;
