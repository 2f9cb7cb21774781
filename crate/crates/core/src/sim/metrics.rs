//! Run metrics: per-flow delivery logs, per-link byte counts, and global
//! protocol counters. Everything is collected in deterministic order so
//! two runs with the same seed serialize identically.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{GroupAddr, LinkId, NodeId, SimTime};

/// One detected delivery gap within a membership episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutageEpisode {
    /// When delivery should have continued: last arrival plus one nominal
    /// interval.
    pub start: SimTime,
    pub duration_us: u64,
}

/// Find delivery gaps in one arrival log. A gap between consecutive
/// arrivals strictly greater than `gap_threshold` nominal intervals is an
/// outage; its duration excludes the one interval that would have passed
/// anyway.
pub fn detect_outages(
    arrivals: &[SimTime],
    nominal_interval_us: u64,
    gap_threshold: u32,
) -> Vec<OutageEpisode> {
    let mut episodes = Vec::new();
    let limit = nominal_interval_us.saturating_mul(u64::from(gap_threshold));
    for pair in arrivals.windows(2) {
        let gap = pair[1].as_us() - pair[0].as_us();
        if gap > limit {
            episodes.push(OutageEpisode {
                start: pair[0] + nominal_interval_us,
                duration_us: gap - nominal_interval_us,
            });
        }
    }
    episodes
}

/// Delivery record for one (client, group) pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowStats {
    pub received: u64,
    pub duplicates: u64,
    pub first_arrival: Option<SimTime>,
    pub last_arrival: Option<SimTime>,
    /// Filled by [`Metrics::finalize`].
    pub outages: Vec<OutageEpisode>,
    /// Distinct sequence numbers delivered while the client was a member.
    pub seqs: BTreeSet<u64>,
    /// Arrival times, one log per membership episode. Gaps are only
    /// meaningful within an episode, never across a leave/rejoin.
    pub arrival_segments: Vec<Vec<SimTime>>,
    /// Membership intervals, half-open; `None` end means still a member at
    /// scenario end.
    pub membership: Vec<(SimTime, Option<SimTime>)>,
}

impl FlowStats {
    fn begin_episode(&mut self, now: SimTime) {
        self.membership.push((now, None));
        self.arrival_segments.push(Vec::new());
    }

    fn end_episode(&mut self, now: SimTime) {
        if let Some(last) = self.membership.last_mut() {
            if last.1.is_none() {
                last.1 = Some(now);
            }
        }
    }

    fn record_arrival(&mut self, now: SimTime, seq: u64) {
        self.received += 1;
        if !self.seqs.insert(seq) {
            self.duplicates += 1;
        }
        if self.first_arrival.is_none() {
            self.first_arrival = Some(now);
        }
        self.last_arrival = Some(now);
        if let Some(segment) = self.arrival_segments.last_mut() {
            segment.push(now);
        }
    }
}

/// Everything a run produces besides its side effects on stdout.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub flows: BTreeMap<(NodeId, GroupAddr), FlowStats>,
    /// (bucket start in us, link) -> bytes put on the wire, counted at
    /// send time.
    pub link_bytes: BTreeMap<(u64, LinkId), u64>,
    /// Packets emitted per group over the whole run.
    pub emitted: BTreeMap<GroupAddr, u64>,
    /// IGMP frames put on a cable.
    pub igmp_frames: u64,
    /// Control publications originated by gateways (not per-hop copies).
    pub control_publications: u64,
    /// (time, gateway, group) for every subscribe publication.
    pub subscribe_events: Vec<(SimTime, NodeId, GroupAddr)>,
    pub unsubscribe_events: Vec<(SimTime, NodeId, GroupAddr)>,
    /// One timestamp per path-computation-element interaction.
    pub pce_interaction_times: Vec<SimTime>,
    /// Data or control consumed by an endpoint the tree never meant to
    /// reach (forwarding-tag false positives).
    pub false_positive_deliveries: u64,
    /// Frames handed to a link that was already down.
    pub dropped_at_send: u64,
    /// Frames lost because their link went down mid-flight.
    pub dropped_in_flight: u64,
    /// Core packets discarded because the hop limit reached zero.
    pub hop_exhausted: u64,
    pub invalid_igmp_frames: u64,
    /// Control publications for a group the receiving gateway does not
    /// serve.
    pub unconfigured_control: u64,
    last_pce_count: u64,
}

impl Metrics {
    pub fn flow_mut(&mut self, client: NodeId, group: GroupAddr) -> &mut FlowStats {
        self.flows.entry((client, group)).or_default()
    }

    pub fn begin_membership(&mut self, client: NodeId, group: GroupAddr, now: SimTime) {
        self.flow_mut(client, group).begin_episode(now);
    }

    pub fn end_membership(&mut self, client: NodeId, group: GroupAddr, now: SimTime) {
        self.flow_mut(client, group).end_episode(now);
    }

    pub fn record_arrival(&mut self, client: NodeId, group: GroupAddr, seq: u64, now: SimTime) {
        self.flow_mut(client, group).record_arrival(now, seq);
    }

    pub fn add_link_bytes(&mut self, bucket_us: u64, link: LinkId, bytes: u64) {
        *self.link_bytes.entry((bucket_us, link)).or_default() += bytes;
    }

    /// Record the timestamps of any path-computation interactions since
    /// the last call. `total` is the interaction counter's current value.
    pub fn note_pce(&mut self, now: SimTime, total: u64) {
        while self.last_pce_count < total {
            self.pce_interaction_times.push(now);
            self.last_pce_count += 1;
        }
    }

    pub fn pce_interactions(&self) -> u64 {
        self.last_pce_count
    }

    pub fn pce_interactions_after(&self, cutoff: SimTime) -> u64 {
        self.pce_interaction_times.iter().filter(|&&t| t > cutoff).count() as u64
    }

    /// Close open membership intervals and compute outage episodes.
    /// `interval_of` gives each group's nominal packet spacing.
    pub fn finalize<F>(&mut self, end: SimTime, gap_threshold: u32, interval_of: F)
    where
        F: Fn(GroupAddr) -> u64,
    {
        for ((_, group), flow) in self.flows.iter_mut() {
            flow.end_episode(end);
            let interval = interval_of(*group);
            flow.outages = flow
                .arrival_segments
                .iter()
                .flat_map(|segment| detect_outages(segment, interval, gap_threshold))
                .collect();
        }
    }

    pub fn total_received(&self) -> u64 {
        self.flows.values().map(|f| f.received).sum()
    }

    pub fn total_duplicates(&self) -> u64 {
        self.flows.values().map(|f| f.duplicates).sum()
    }

    pub fn total_outage_episodes(&self) -> u64 {
        self.flows.values().map(|f| f.outages.len() as u64).sum()
    }

    pub fn total_outage_us(&self) -> u64 {
        self.flows.values().flat_map(|f| &f.outages).map(|o| o.duration_us).sum()
    }

    pub fn total_link_bytes(&self) -> u64 {
        self.link_bytes.values().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(us: &[u64]) -> Vec<SimTime> {
        us.iter().copied().map(SimTime::from_us).collect()
    }

    #[test]
    fn gapless_stream_has_no_outage() {
        let arrivals: Vec<SimTime> = (0..100).map(|i| SimTime::from_us(i * 10_000)).collect();
        assert!(detect_outages(&arrivals, 10_000, 3).is_empty());
    }

    #[test]
    fn five_second_gap_is_one_episode() {
        // 100 pps with a hole: the next packet after 1.00 s arrives at
        // 6.00 s. Duration is the gap minus one interval.
        let mut arrivals: Vec<SimTime> = (0..=100).map(|i| SimTime::from_us(i * 10_000)).collect();
        arrivals.extend((600..610).map(|i| SimTime::from_us(i * 10_000)));
        let episodes = detect_outages(&arrivals, 10_000, 3);
        assert_eq!(episodes.len(), 1);
        assert_eq!(episodes[0].start, SimTime::from_us(1_010_000));
        assert_eq!(episodes[0].duration_us, 4_990_000);
        assert!(episodes[0].duration_us.abs_diff(5_000_000) <= 10_000);
    }

    #[test]
    fn gap_equal_to_threshold_is_not_an_outage() {
        let arrivals = times(&[0, 10_000, 40_000, 50_000]);
        assert!(detect_outages(&arrivals, 10_000, 3).is_empty());
        // One microsecond more crosses the line.
        let arrivals = times(&[0, 10_000, 40_001, 50_001]);
        let episodes = detect_outages(&arrivals, 10_000, 3);
        assert_eq!(episodes.len(), 1);
        assert_eq!(episodes[0].duration_us, 20_001);
    }

    #[test]
    fn jitter_below_threshold_is_ignored() {
        let arrivals = times(&[0, 12_000, 21_000, 33_000, 40_000]);
        assert!(detect_outages(&arrivals, 10_000, 3).is_empty());
    }

    #[test]
    fn membership_segments_isolate_gaps() {
        let group = GroupAddr::new("239.0.0.1".parse().unwrap()).unwrap();
        let client = NodeId(7);
        let mut m = Metrics::default();
        m.begin_membership(client, group, SimTime::from_us(0));
        for i in 0..5 {
            m.record_arrival(client, group, i, SimTime::from_us(i * 10_000));
        }
        m.end_membership(client, group, SimTime::from_us(50_000));
        // Long pause while not a member, then rejoin.
        m.begin_membership(client, group, SimTime::from_us(900_000));
        for i in 0..5 {
            m.record_arrival(client, group, 90 + i, SimTime::from_us(900_000 + i * 10_000));
        }
        m.finalize(SimTime::from_us(1_000_000), 3, |_| 10_000);
        let flow = &m.flows[&(client, group)];
        assert!(flow.outages.is_empty(), "gap across a leave/rejoin is not an outage");
        assert_eq!(flow.received, 10);
        assert_eq!(flow.membership.len(), 2);
        assert_eq!(flow.membership[0].1, Some(SimTime::from_us(50_000)));
        assert_eq!(flow.membership[1].1, Some(SimTime::from_us(1_000_000)));
    }

    #[test]
    fn duplicate_seqs_are_counted_once_in_the_set() {
        let group = GroupAddr::new("239.0.0.1".parse().unwrap()).unwrap();
        let client = NodeId(1);
        let mut m = Metrics::default();
        m.begin_membership(client, group, SimTime::ZERO);
        m.record_arrival(client, group, 0, SimTime::from_us(10));
        m.record_arrival(client, group, 0, SimTime::from_us(12));
        m.record_arrival(client, group, 1, SimTime::from_us(20));
        let flow = &m.flows[&(client, group)];
        assert_eq!(flow.received, 3);
        assert_eq!(flow.duplicates, 1);
        assert_eq!(flow.seqs.len(), 2);
    }

    #[test]
    fn pce_timestamps_follow_the_counter() {
        let mut m = Metrics::default();
        m.note_pce(SimTime::from_us(0), 3);
        m.note_pce(SimTime::from_us(50), 3);
        m.note_pce(SimTime::from_us(100), 5);
        assert_eq!(m.pce_interactions(), 5);
        assert_eq!(
            m.pce_interaction_times,
            times(&[0, 0, 0, 100, 100])
        );
        assert_eq!(m.pce_interactions_after(SimTime::from_us(0)), 2);
        assert_eq!(m.pce_interactions_after(SimTime::from_us(100)), 0);
    }
}
