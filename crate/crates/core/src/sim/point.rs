//! The stateless-multicast backend: gateways at the edges, tag-matching
//! switches in the core, a path computation element on the side.
//!
//! Switches hold two views of the world. The physical one (in [`Ctx`])
//! decides what a cable actually carries; the effective one here is what
//! the data plane believes, trailing reality by the detection delay. A
//! zero delay applies changes inline, so failover loses nothing.

use std::collections::{BTreeMap, BTreeSet};

use crate::fid::{assign_tags, forward_decision, TagAssignment};
use crate::igmp::IgmpMessage;
use crate::model::{LinkId, LinkState, NodeId, NodeKind, PortId, SimTime, Topology};
use crate::nap::{
    Cnap, CnapEmit, CnapTimers, ControlKind, ControlMessage, IcnPacket, IcnPayload, NameMapping,
    NapError, Snap,
};
use crate::pce::Pce;
use crate::scenario::Scenario;

use super::{Ctx, Frame, Net, NetEv};

pub(crate) struct PointNet {
    /// What the switches' data plane believes about link states.
    eff: Topology,
    tags: TagAssignment,
    pce: Pce,
    mapping: NameMapping,
    snaps: BTreeMap<NodeId, Snap>,
    cnaps: BTreeMap<NodeId, Cnap>,
    hop_limit: u32,
    detection_delay_us: u64,
    notify_delay_us: u64,
}

impl PointNet {
    pub(crate) fn new(sc: &Scenario) -> Self {
        let tags = assign_tags(&sc.topology, sc.params.m, sc.params.k, sc.params.seed)
            .expect("tag parameters are validated at scenario load");
        let mapping = NameMapping::default();
        let timers = CnapTimers {
            leave_query_count: sc.params.leave_query_count,
            leave_query_interval_us: sc.params.leave_query_interval_us,
            leave_query_max_resp_ds: sc.params.leave_query_max_resp_ds,
            general_query_max_resp_ds: sc.params.query_max_resp_ds,
        };
        let snaps: BTreeMap<NodeId, Snap> = sc
            .snaps
            .iter()
            .map(|cfg| {
                let snap = Snap::new(
                    cfg.node,
                    cfg.groups.iter().copied(),
                    mapping.clone(),
                    sc.params.hop_limit,
                );
                (cfg.node, snap)
            })
            .collect();
        let cnaps: BTreeMap<NodeId, Cnap> = sc
            .topology
            .nodes()
            .filter(|&(_, kind)| kind == NodeKind::Cnap)
            .map(|(node, _)| {
                // IGMP ports are the client-facing cables only; the core
                // side speaks the publish/subscribe protocol.
                let ports: Vec<PortId> = sc
                    .wiring
                    .ports_at(node)
                    .into_iter()
                    .filter(|&(_, link)| {
                        let to = sc.topology.link(link).expect("wired link").to;
                        sc.topology.node_kind(to) == Some(NodeKind::Client)
                    })
                    .map(|(port, _)| port)
                    .collect();
                (node, Cnap::new(node, ports, mapping.clone(), timers.clone()))
            })
            .collect();
        PointNet {
            eff: sc.topology.clone(),
            tags,
            pce: Pce::new(),
            mapping,
            snaps,
            cnaps,
            hop_limit: sc.params.hop_limit,
            detection_delay_us: sc.params.detection_delay_us,
            notify_delay_us: sc.params.notify_delay_us,
        }
    }

    fn sync_pce(&self, ctx: &mut Ctx, now: SimTime) {
        ctx.metrics.note_pce(now, self.pce.interactions());
    }

    /// Replicate one core packet out of `node` along its identifier.
    fn forward_from(&self, ctx: &mut Ctx, node: NodeId, pkt: &IcnPacket, now: SimTime) {
        for out in forward_decision(node, &pkt.fid, &self.eff, &self.tags) {
            ctx.send(out, Frame::Icn(pkt.clone()), now);
        }
    }

    /// Publish one control message from a cNAP: resolve the serving
    /// gateway and a path encoding (both cached across episodes), then
    /// source-route the message like any other packet.
    fn control_send(&mut self, ctx: &mut Ctx, origin: NodeId, msg: ControlMessage, now: SimTime) {
        let group = msg.group;
        let snap_node = {
            let cnap = self.cnaps.get_mut(&origin).expect("publishing cnap exists");
            match cnap.snap_by_group.get(&group) {
                Some(&node) => Some(node),
                None => {
                    let found = self.pce.rv_resolve(&self.mapping.control(group)).into_iter().next();
                    if let Some(node) = found {
                        cnap.snap_by_group.insert(group, node);
                    }
                    found
                }
            }
        };
        let Some(snap_node) = snap_node else {
            self.sync_pce(ctx, now);
            ctx.metrics.unconfigured_control += 1;
            return;
        };
        let fid = {
            let cnap = self.cnaps.get_mut(&origin).expect("publishing cnap exists");
            match cnap.paths.get(origin, snap_node) {
                Some(entry) => Some(entry.fid.clone()),
                None => match self.pce.get_fid(origin, snap_node, &ctx.real, &self.tags) {
                    Ok(entry) => {
                        let fid = entry.fid.clone();
                        cnap.paths.insert(entry);
                        Some(fid)
                    }
                    Err(_) => None,
                },
            }
        };
        self.sync_pce(ctx, now);
        let Some(fid) = fid else {
            // The gateway is unreachable right now; the publication is
            // fire-and-forget and simply lost.
            return;
        };
        ctx.metrics.control_publications += 1;
        match msg.kind {
            ControlKind::ImplicitSubscribe => ctx.metrics.subscribe_events.push((now, origin, group)),
            ControlKind::ImplicitUnsubscribe => {
                ctx.metrics.unsubscribe_events.push((now, origin, group))
            }
        }
        let pkt = IcnPacket {
            fid,
            name: self.mapping.control(group),
            hop_limit: self.hop_limit,
            payload: IcnPayload::Control(msg),
        };
        self.forward_from(ctx, origin, &pkt, now);
    }

    fn apply_emits(&mut self, ctx: &mut Ctx, node: NodeId, emits: Vec<CnapEmit>, now: SimTime) {
        for emit in emits {
            match emit {
                CnapEmit::Publish(msg) => self.control_send(ctx, node, msg, now),
                CnapEmit::SendIgmp { port, msg } => {
                    let out = ctx.sc.wiring.out_link(node, port);
                    ctx.send(out, Frame::Igmp(msg.encode()), now);
                }
                CnapEmit::StartTimer { group, at, epoch } => {
                    ctx.schedule_net(at, NetEv::CnapTimer { node, group, epoch });
                }
            }
        }
    }
}

impl Net for PointNet {
    fn boot(&mut self, ctx: &mut Ctx) {
        for snap in self.snaps.values() {
            snap.init(&mut self.pce);
        }
        self.sync_pce(ctx, SimTime::ZERO);
        let cnap_nodes: Vec<NodeId> = self.cnaps.keys().copied().collect();
        for node in cnap_nodes {
            ctx.schedule_net(SimTime::ZERO, NetEv::CnapGeneralQuery { node });
        }
    }

    fn deliver(&mut self, ctx: &mut Ctx, link: LinkId, frame: Frame, now: SimTime) {
        let node = ctx.real.link(link).expect("delivering link").to;
        let kind = ctx.real.node_kind(node).expect("delivering node");
        match (kind, frame) {
            (NodeKind::Switch, Frame::Icn(pkt)) => {
                if pkt.hop_limit == 0 {
                    ctx.metrics.hop_exhausted += 1;
                    return;
                }
                let mut fwd = pkt;
                fwd.hop_limit -= 1;
                self.forward_from(ctx, node, &fwd, now);
            }
            (NodeKind::Snap, Frame::Ip(pkt)) => {
                let publication =
                    self.snaps.get(&node).and_then(|snap| snap.handle_ip_packet(&pkt));
                if let Some(icn) = publication {
                    self.forward_from(ctx, node, &icn, now);
                }
            }
            (NodeKind::Snap, Frame::Icn(pkt)) => match &pkt.payload {
                IcnPayload::Control(msg) => {
                    let snap = self.snaps.get_mut(&node).expect("snap state");
                    match snap.handle_control(msg, &mut self.pce, &ctx.real, &self.tags) {
                        Ok(_) => {}
                        Err(NapError::UnconfiguredGroup(_)) => {
                            // The identifier false-positived into a gateway
                            // that does not serve this group.
                            ctx.metrics.unconfigured_control += 1;
                            ctx.metrics.false_positive_deliveries += 1;
                        }
                        Err(NapError::Pce(e)) => {
                            unreachable!("path refresh failed structurally: {e}")
                        }
                    }
                    debug_assert!(self.snaps[&node].merge_invariant_holds());
                    self.sync_pce(ctx, now);
                }
                IcnPayload::Data(_) => ctx.metrics.false_positive_deliveries += 1,
            },
            (NodeKind::Cnap, Frame::Icn(pkt)) => {
                let fanout =
                    self.cnaps.get_mut(&node).expect("cnap state").handle_icn_data(&pkt);
                for (port, ip) in fanout {
                    let out = ctx.sc.wiring.out_link(node, port);
                    ctx.send(out, Frame::Ip(ip), now);
                }
            }
            (NodeKind::Cnap, Frame::Igmp(bytes)) => match IgmpMessage::decode(&bytes) {
                Ok(msg) => {
                    let port = ctx.sc.wiring.port_of(link);
                    let emits = self
                        .cnaps
                        .get_mut(&node)
                        .expect("cnap state")
                        .handle_igmp(&msg, port, now);
                    self.apply_emits(ctx, node, emits, now);
                }
                Err(_) => ctx.metrics.invalid_igmp_frames += 1,
            },
            _ => debug_assert!(false, "frame kind cannot reach this node kind here"),
        }
    }

    fn on_fault(&mut self, ctx: &mut Ctx, link: LinkId, up: bool, now: SimTime) {
        if self.detection_delay_us == 0 {
            let state = if up { LinkState::Up } else { LinkState::Down };
            self.eff.set_link_state(link, state);
        } else {
            ctx.schedule_net(now + self.detection_delay_us, NetEv::EffectiveLink { link, up });
        }
        let grouped =
            ctx.real.link(link).and_then(|l| l.failover_group).is_some();
        if !grouped {
            ctx.schedule_net(now + self.notify_delay_us, NetEv::PceNotify { link });
        }
    }

    fn on_net_event(&mut self, ctx: &mut Ctx, ev: NetEv, now: SimTime) {
        match ev {
            NetEv::CnapTimer { node, group, epoch } => {
                let emits = self
                    .cnaps
                    .get_mut(&node)
                    .expect("cnap state")
                    .handle_timer(group, epoch, now);
                self.apply_emits(ctx, node, emits, now);
            }
            NetEv::CnapGeneralQuery { node } => {
                let emits = self.cnaps[&node].general_query();
                self.apply_emits(ctx, node, emits, now);
                let next = now + ctx.sc.params.general_query_interval_us;
                ctx.schedule_net(next, NetEv::CnapGeneralQuery { node });
            }
            NetEv::EffectiveLink { link, up } => {
                let state = if up { LinkState::Up } else { LinkState::Down };
                self.eff.set_link_state(link, state);
            }
            NetEv::PceNotify { link } => {
                self.pce.record_notification();
                let changed = BTreeSet::from([link]);
                for snap in self.snaps.values_mut() {
                    snap.handle_invalidation(&changed, &mut self.pce, &ctx.real, &self.tags)
                        .expect("path refresh cannot fail structurally");
                }
                for cnap in self.cnaps.values_mut() {
                    cnap.paths.invalidate(&changed);
                }
                self.sync_pce(ctx, now);
            }
            _ => unreachable!("not an event of this backend"),
        }
    }

    fn finish(&mut self, metrics: &mut super::Metrics) {
        for cnap in self.cnaps.values() {
            metrics.false_positive_deliveries += cnap.false_positives();
        }
    }
}
