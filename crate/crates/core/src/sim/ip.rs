//! The legacy backend: every non-host node is an L2 bridge running the
//! shared spanning tree and IGMP snooping.
//!
//! A topology change that reshapes the tree puts every bridge into a
//! reconvergence window: multicast data stops network-wide, IGMP keeps
//! flowing over the old tree. When the window closes the tree is rebuilt,
//! all snoop tables are flushed, and the querier sends a triggered general
//! query with a zero response interval so members re-report at once; until
//! those reports re-carve the tree, data floods, which is what ends the
//! outage.

use std::collections::BTreeMap;

use crate::baseline::{
    build_spanning_tree, is_bridge, reconvergence_needed, Bridge, ConvergenceState, L2Pdu,
    SpanningTree,
};
use crate::igmp::IgmpMessage;
use crate::model::{LinkId, NodeId, PortId, SimTime};
use crate::scenario::Scenario;

use super::{Ctx, Frame, Net, NetEv};

pub(crate) struct IpNet {
    tree: SpanningTree,
    bridges: BTreeMap<NodeId, Bridge>,
    /// The querier lives on the bridge next to the (first) server, on the
    /// server-facing port, mirroring where the multicast router would be.
    querier: Option<(NodeId, PortId)>,
    t_conv_us: u64,
    /// Guard for the pending window-close event; a newer fault supersedes
    /// an older close.
    window_until: Option<SimTime>,
}

impl IpNet {
    pub(crate) fn new(sc: &Scenario) -> Self {
        let bridges: BTreeMap<NodeId, Bridge> = sc
            .topology
            .nodes()
            .filter(|&(_, kind)| is_bridge(kind))
            .map(|(node, _)| (node, Bridge::new(node, sc.wiring.ports_at(node))))
            .collect();
        let querier = sc.streams.first().map(|stream| {
            let gateway = sc.topology.link(stream.server_link).expect("validated").to;
            (gateway, sc.wiring.port_of(stream.server_link))
        });
        IpNet {
            tree: build_spanning_tree(&sc.topology),
            bridges,
            querier,
            t_conv_us: sc.params.t_conv_us,
            window_until: None,
        }
    }

    /// Originate a query at the querier as if the router behind the
    /// querier port had sent it.
    fn inject_query(&mut self, ctx: &mut Ctx, msg: IgmpMessage, now: SimTime) {
        let Some((node, port)) = self.querier else {
            return;
        };
        let bridge = self.bridges.get_mut(&node).expect("querier bridge");
        bridge.snoop.snoop(&msg, port);
        let outs = bridge.l2_forward(&L2Pdu::Igmp(msg), Some(port), &self.tree);
        let bytes = msg.encode();
        for out_port in outs {
            let out = ctx.sc.wiring.out_link(node, out_port);
            ctx.send(out, Frame::Igmp(bytes), now);
        }
    }
}

impl Net for IpNet {
    fn boot(&mut self, ctx: &mut Ctx) {
        ctx.schedule_net(SimTime::ZERO, NetEv::QuerierGeneralQuery);
    }

    fn deliver(&mut self, ctx: &mut Ctx, link: LinkId, frame: Frame, now: SimTime) {
        let node = ctx.real.link(link).expect("delivering link").to;
        let in_port = ctx.sc.wiring.port_of(link);
        let bridge = self.bridges.get_mut(&node).expect("bridge state");
        match frame {
            Frame::Ip(pkt) => {
                let outs = bridge.l2_forward(&L2Pdu::Data(pkt.group), Some(in_port), &self.tree);
                for out_port in outs {
                    let out = ctx.sc.wiring.out_link(node, out_port);
                    ctx.send(out, Frame::Ip(pkt), now);
                }
            }
            Frame::Igmp(bytes) => {
                let msg = match IgmpMessage::decode(&bytes) {
                    Ok(msg) => msg,
                    Err(_) => {
                        ctx.metrics.invalid_igmp_frames += 1;
                        return;
                    }
                };
                bridge.snoop.snoop(&msg, in_port);
                // A leave is consumed where other members of the group
                // remain; it travels on only when this bridge's entry
                // emptied out, standing in for the whole subtree.
                let suppressed = matches!(msg, IgmpMessage::Leave { group }
                    if bridge.snoop.members(group).is_some());
                if !suppressed {
                    let outs = bridge.l2_forward(&L2Pdu::Igmp(msg), Some(in_port), &self.tree);
                    for out_port in outs {
                        let out = ctx.sc.wiring.out_link(node, out_port);
                        ctx.send(out, Frame::Igmp(bytes), now);
                    }
                }
                // The router answers a leave that made it all the way
                // here with last-member queries.
                if let IgmpMessage::Leave { group } = msg {
                    if self.querier.map(|(q, _)| q) == Some(node) {
                        ctx.schedule_net(
                            now,
                            NetEv::QuerierGroupQuery {
                                group,
                                remaining: ctx.sc.params.leave_query_count,
                            },
                        );
                    }
                }
            }
            Frame::Icn(_) => debug_assert!(false, "no core packets on this backend"),
        }
    }

    fn on_fault(&mut self, ctx: &mut Ctx, _link: LinkId, _up: bool, now: SimTime) {
        if !reconvergence_needed(&ctx.real, &self.tree) {
            return;
        }
        let until = now + self.t_conv_us;
        self.window_until = Some(until);
        for bridge in self.bridges.values_mut() {
            bridge.mode = ConvergenceState::Reconverging { until };
        }
        ctx.schedule_net(until, NetEv::ReconvergeEnd { until });
    }

    fn on_net_event(&mut self, ctx: &mut Ctx, ev: NetEv, now: SimTime) {
        match ev {
            NetEv::ReconvergeEnd { until } => {
                if self.window_until != Some(until) {
                    return;
                }
                self.window_until = None;
                let version = self.tree.version + 1;
                self.tree = build_spanning_tree(&ctx.real);
                self.tree.version = version;
                for bridge in self.bridges.values_mut() {
                    bridge.snoop.flush();
                    bridge.mode = ConvergenceState::Forwarding;
                }
                // Zero response interval: members re-report immediately,
                // so pruning resumes without cutting anyone off.
                self.inject_query(ctx, IgmpMessage::GeneralQuery { max_resp_ds: 0 }, now);
            }
            NetEv::QuerierGeneralQuery => {
                let msg = IgmpMessage::GeneralQuery {
                    max_resp_ds: ctx.sc.params.query_max_resp_ds,
                };
                self.inject_query(ctx, msg, now);
                let next = now + ctx.sc.params.general_query_interval_us;
                ctx.schedule_net(next, NetEv::QuerierGeneralQuery);
            }
            NetEv::QuerierGroupQuery { group, remaining } => {
                let msg = IgmpMessage::GroupQuery {
                    group,
                    max_resp_ds: ctx.sc.params.leave_query_max_resp_ds,
                };
                self.inject_query(ctx, msg, now);
                if remaining > 1 {
                    let next = now + ctx.sc.params.leave_query_interval_us;
                    ctx.schedule_net(
                        next,
                        NetEv::QuerierGroupQuery { group, remaining: remaining - 1 },
                    );
                }
            }
            _ => unreachable!("not an event of this backend"),
        }
    }

    fn finish(&mut self, _metrics: &mut super::Metrics) {}
}
