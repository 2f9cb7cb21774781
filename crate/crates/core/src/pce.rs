//! Path computation entity: rendezvous plus topology management.
//!
//! The rendezvous side matches publishers and subscribers of named items.
//! The topology side computes shortest paths over the live topology and
//! encodes them as forwarding identifiers. Gateways cache those encodings;
//! after a topology change the entity tells them which cached paths are
//! gone, so recomputation happens only where a used link actually changed.
//!
//! Every call into the entity is counted. The interaction counter is the
//! measurement behind the claim that steady-state joins, leaves and
//! failover never touch the control plane.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::fid::{encode_path, Fid, TagAssignment};
use crate::model::{failover_groups, LinkId, NodeId, Topology};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PceError {
    #[error("invalid name: {0}")]
    InvalidName(&'static str),
    #[error("no path from {src} to {dst} over up links")]
    NoPath { src: NodeId, dst: NodeId },
    #[error("{0}")]
    Encoding(#[from] crate::fid::FidError),
}

/// A hierarchical item name: 1 to 4 byte-string segments of 1 to 32 bytes
/// each. Compared by exact byte equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IcnName {
    segments: Vec<Vec<u8>>,
}

impl IcnName {
    pub fn new<I, S>(segments: I) -> Result<Self, PceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Vec<u8>>,
    {
        let segments: Vec<Vec<u8>> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() || segments.len() > 4 {
            return Err(PceError::InvalidName("expected 1 to 4 segments"));
        }
        if segments.iter().any(|s| s.is_empty() || s.len() > 32) {
            return Err(PceError::InvalidName("segment length must be 1 to 32 bytes"));
        }
        Ok(IcnName { segments })
    }

    pub fn segments(&self) -> &[Vec<u8>] {
        &self.segments
    }
}

impl fmt::Display for IcnName {
    /// Slash-separated; printable segments as text, others as hex.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seg in &self.segments {
            f.write_str("/")?;
            if seg.iter().all(|b| b.is_ascii_graphic()) {
                f.write_str(std::str::from_utf8(seg).expect("ascii"))?;
            } else {
                for b in seg {
                    write!(f, "{b:02x}")?;
                }
            }
        }
        Ok(())
    }
}

/// Who publishes and who subscribes to each name. Keys with no remaining
/// members are removed, so an absent key and an empty set are the same
/// observation.
#[derive(Debug, Clone, Default)]
pub struct RendezvousTable {
    subs: BTreeMap<IcnName, BTreeSet<NodeId>>,
    pubs: BTreeMap<IcnName, BTreeSet<NodeId>>,
}

impl RendezvousTable {
    pub fn subscribe(&mut self, name: IcnName, node: NodeId) {
        self.subs.entry(name).or_default().insert(node);
    }

    pub fn unsubscribe(&mut self, name: &IcnName, node: NodeId) {
        if let Some(set) = self.subs.get_mut(name) {
            set.remove(&node);
            if set.is_empty() {
                self.subs.remove(name);
            }
        }
    }

    pub fn resolve(&self, name: &IcnName) -> BTreeSet<NodeId> {
        self.subs.get(name).cloned().unwrap_or_default()
    }

    pub fn advertise(&mut self, name: IcnName, node: NodeId) {
        self.pubs.entry(name).or_default().insert(node);
    }

    pub fn withdraw(&mut self, name: &IcnName, node: NodeId) {
        if let Some(set) = self.pubs.get_mut(name) {
            set.remove(&node);
            if set.is_empty() {
                self.pubs.remove(name);
            }
        }
    }

    pub fn publishers(&self, name: &IcnName) -> BTreeSet<NodeId> {
        self.pubs.get(name).cloned().unwrap_or_default()
    }
}

/// One cached unicast encoding, remembered by the gateway that requested
/// it. The held path is what invalidation intersects against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCacheEntry {
    pub src: NodeId,
    pub dst: NodeId,
    pub path: Vec<LinkId>,
    pub fid: Fid,
    pub topo_version: u64,
}

/// A gateway's path cache, keyed by (src, dst).
#[derive(Debug, Clone, Default)]
pub struct PathCache {
    entries: BTreeMap<(NodeId, NodeId), PathCacheEntry>,
}

impl PathCache {
    pub fn get(&self, src: NodeId, dst: NodeId) -> Option<&PathCacheEntry> {
        self.entries.get(&(src, dst))
    }

    pub fn insert(&mut self, entry: PathCacheEntry) {
        self.entries.insert((entry.src, entry.dst), entry);
    }

    pub fn remove(&mut self, src: NodeId, dst: NodeId) -> Option<PathCacheEntry> {
        self.entries.remove(&(src, dst))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops and returns exactly the entries whose path uses a changed
    /// link. Entries that avoid all changed links stay valid, whatever
    /// their age; a change on a link no cached path uses removes nothing.
    pub fn invalidate(&mut self, changed: &BTreeSet<LinkId>) -> Vec<PathCacheEntry> {
        let stale: Vec<(NodeId, NodeId)> = self
            .entries
            .iter()
            .filter(|(_, e)| e.path.iter().any(|l| changed.contains(l)))
            .map(|(&key, _)| key)
            .collect();
        stale.iter().map(|key| self.entries.remove(key).expect("keyed")).collect()
    }
}

/// Hop-count shortest path from `src` to `dst` over usable links.
///
/// A link outside any failover group is usable iff it is up. A failover
/// group is one logical hop, usable iff any member is up, and is always
/// represented by its lowest-id member: the encoding names the primary
/// and the switch redirects locally when the primary is down. Ties are
/// broken toward the lexicographically smallest link-id sequence.
pub fn compute_path(
    src: NodeId,
    dst: NodeId,
    topology: &Topology,
) -> Result<Vec<LinkId>, PceError> {
    if src == dst {
        return Ok(Vec::new());
    }
    let groups = failover_groups(topology);
    let usable = |link: &crate::model::Link| -> Option<LinkId> {
        match link.failover_group {
            None => link.is_up().then_some(link.id),
            Some(g) => {
                let members = &groups[&g];
                let any_up = members
                    .iter()
                    .any(|&id| topology.link(id).map(|l| l.is_up()).unwrap_or(false));
                (any_up && members[0] == link.id).then_some(members[0])
            }
        }
    };

    // Forward adjacency (sorted by link id) and distance-to-dst by reverse
    // breadth-first search.
    let mut fwd: BTreeMap<NodeId, Vec<(LinkId, NodeId)>> = BTreeMap::new();
    let mut rev: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for link in topology.links() {
        if let Some(id) = usable(link) {
            fwd.entry(link.from).or_default().push((id, link.to));
            rev.entry(link.to).or_default().push(link.from);
        }
    }
    let mut dist: BTreeMap<NodeId, u32> = BTreeMap::new();
    dist.insert(dst, 0);
    let mut frontier = vec![dst];
    while let Some(node) = frontier.pop() {
        let d = dist[&node];
        for &prev in rev.get(&node).into_iter().flatten() {
            if let std::collections::btree_map::Entry::Vacant(slot) = dist.entry(prev) {
                slot.insert(d + 1);
                frontier.insert(0, prev);
            }
        }
    }
    if !dist.contains_key(&src) {
        return Err(PceError::NoPath { src, dst });
    }

    // Greedy walk: at each node take the smallest link id that stays on a
    // shortest path. This is the lexicographic minimum over all shortest
    // link sequences.
    let mut path = Vec::new();
    let mut node = src;
    while node != dst {
        let d = dist[&node];
        let (id, next) = fwd
            .get(&node)
            .into_iter()
            .flatten()
            .find(|(_, next)| dist.get(next) == Some(&(d - 1)))
            .copied()
            .expect("reachable node has a descending neighbor");
        path.push(id);
        node = next;
    }
    Ok(path)
}

/// The control entity. Rendezvous state and the interaction counter live
/// here; path computation reads the topology passed in by the caller.
#[derive(Debug, Default)]
pub struct Pce {
    rv: RendezvousTable,
    interactions: u64,
}

impl Pce {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total calls made into (or notifications sent out of) the entity.
    pub fn interactions(&self) -> u64 {
        self.interactions
    }

    pub fn rv_subscribe(&mut self, name: IcnName, node: NodeId) {
        self.interactions += 1;
        self.rv.subscribe(name, node);
    }

    pub fn rv_unsubscribe(&mut self, name: &IcnName, node: NodeId) {
        self.interactions += 1;
        self.rv.unsubscribe(name, node);
    }

    pub fn rv_resolve(&mut self, name: &IcnName) -> BTreeSet<NodeId> {
        self.interactions += 1;
        self.rv.resolve(name)
    }

    pub fn rv_advertise(&mut self, name: IcnName, node: NodeId) {
        self.interactions += 1;
        self.rv.advertise(name, node);
    }

    pub fn rv_publishers(&mut self, name: &IcnName) -> BTreeSet<NodeId> {
        self.interactions += 1;
        self.rv.publishers(name)
    }

    /// Computes and encodes the current path, stamped with the topology
    /// version it was computed against. The caller caches the result.
    pub fn get_fid(
        &mut self,
        src: NodeId,
        dst: NodeId,
        topology: &Topology,
        tags: &TagAssignment,
    ) -> Result<PathCacheEntry, PceError> {
        self.interactions += 1;
        let path = compute_path(src, dst, topology)?;
        let fid = encode_path(&path, tags)?;
        Ok(PathCacheEntry { src, dst, path, fid, topo_version: topology.version() })
    }

    /// Books one outbound change notification. The delivery itself is a
    /// simulator event; this keeps the counter honest about it.
    pub fn record_notification(&mut self) {
        self.interactions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fid::{assign_tags, forward_decision, matches};
    use crate::model::{Link, LinkState, NodeKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn name(parts: &[&[u8]]) -> IcnName {
        IcnName::new(parts.iter().map(|p| p.to_vec())).unwrap()
    }

    fn topo(n_nodes: u32, links: &[(u32, u32, u32, Option<u32>)]) -> Topology {
        let mut t = Topology::new();
        for n in 0..n_nodes {
            t.add_node(NodeId(n), NodeKind::Switch);
        }
        for &(id, from, to, group) in links {
            t.add_link(Link {
                id: LinkId(id),
                from: NodeId(from),
                to: NodeId(to),
                delay_us: 10,
                state: LinkState::Up,
                failover_group: group,
            });
        }
        t
    }

    #[test]
    fn name_segment_limits() {
        assert!(IcnName::new(Vec::<Vec<u8>>::new()).is_err());
        assert!(IcnName::new(vec![vec![b'a']; 5]).is_err());
        assert!(IcnName::new(vec![vec![]]).is_err());
        assert!(IcnName::new(vec![vec![0u8; 33]]).is_err());
        assert!(IcnName::new(vec![vec![0u8; 32]; 4]).is_ok());
    }

    #[test]
    fn name_display_mixes_text_and_hex() {
        let n = name(&[b"IPMoverICN", b"C", &[0x0a, 0xff]]);
        assert_eq!(n.to_string(), "/IPMoverICN/C/0aff");
    }

    #[test]
    fn unsubscribe_of_non_subscriber_changes_nothing() {
        let mut rv = RendezvousTable::default();
        rv.subscribe(name(&[b"a"]), NodeId(1));
        rv.unsubscribe(&name(&[b"a"]), NodeId(2));
        rv.unsubscribe(&name(&[b"b"]), NodeId(1));
        assert_eq!(rv.resolve(&name(&[b"a"])), BTreeSet::from([NodeId(1)]));
    }

    #[test]
    fn double_subscribe_resolves_once() {
        let mut rv = RendezvousTable::default();
        rv.subscribe(name(&[b"a"]), NodeId(3));
        rv.subscribe(name(&[b"a"]), NodeId(3));
        assert_eq!(rv.resolve(&name(&[b"a"])).len(), 1);
    }

    #[test]
    fn disjoint_groups_resolve_to_their_own_gateway() {
        let mut rv = RendezvousTable::default();
        let g1 = name(&[b"IPMoverICN", b"C", b"g1"]);
        let g2 = name(&[b"IPMoverICN", b"C", b"g2"]);
        rv.subscribe(g1.clone(), NodeId(10));
        rv.subscribe(g2.clone(), NodeId(11));
        assert_eq!(rv.resolve(&g1), BTreeSet::from([NodeId(10)]));
        assert_eq!(rv.resolve(&g2), BTreeSet::from([NodeId(11)]));
        assert!(rv.resolve(&name(&[b"IPMoverICN", b"C", b"g3"])).is_empty());
    }

    #[test]
    fn unsubscribe_last_member_leaves_no_empty_set() {
        let mut rv = RendezvousTable::default();
        let n = name(&[b"a"]);
        rv.subscribe(n.clone(), NodeId(1));
        rv.unsubscribe(&n, NodeId(1));
        assert!(rv.resolve(&n).is_empty());
        assert!(rv.subs.is_empty());
    }

    #[test]
    fn subscribe_then_unsubscribe_is_identity() {
        let mut rv = RendezvousTable::default();
        rv.subscribe(name(&[b"keep"]), NodeId(5));
        let before = format!("{rv:?}");
        rv.subscribe(name(&[b"x"]), NodeId(9));
        rv.unsubscribe(&name(&[b"x"]), NodeId(9));
        assert_eq!(format!("{rv:?}"), before);
    }

    #[test]
    fn path_of_zero_length() {
        let t = topo(1, &[]);
        assert_eq!(compute_path(NodeId(0), NodeId(0), &t).unwrap(), Vec::<LinkId>::new());
    }

    #[test]
    fn ring_path_matches_bfs_distance_oracle() {
        // 4-node ring, both directions: n0-n1-n2-n3-n0.
        let mut spec = Vec::new();
        for i in 0..4u32 {
            let j = (i + 1) % 4;
            spec.push((2 * i, i, j, None));
            spec.push((2 * i + 1, j, i, None));
        }
        let t = topo(4, &spec);

        // Independent plain BFS distance oracle over directed up links.
        let bfs = |src: NodeId, dst: NodeId| -> Option<usize> {
            let mut seen = BTreeSet::from([src]);
            let mut frontier = vec![src];
            let mut d = 0;
            while !frontier.is_empty() {
                if frontier.contains(&dst) {
                    return Some(d);
                }
                let mut next = Vec::new();
                for n in frontier {
                    for l in t.out_links(n) {
                        if l.is_up() && seen.insert(l.to) {
                            next.push(l.to);
                        }
                    }
                }
                frontier = next;
                d += 1;
            }
            None
        };

        for a in 0..4u32 {
            for b in 0..4u32 {
                let path = compute_path(NodeId(a), NodeId(b), &t).unwrap();
                assert_eq!(path.len(), bfs(NodeId(a), NodeId(b)).unwrap());
                // Path is connected and ends at b.
                let mut at = NodeId(a);
                for link in &path {
                    let l = t.link(*link).unwrap();
                    assert_eq!(l.from, at);
                    at = l.to;
                }
                assert_eq!(at, NodeId(b));
            }
        }
    }

    #[test]
    fn equal_length_tie_breaks_to_smallest_link_sequence() {
        // n0 -> n3 via n1 (links 1 then 3) or via n2 (links 2 then 4).
        let t = topo(
            4,
            &[
                (1, 0, 1, None),
                (2, 0, 2, None),
                (3, 1, 3, None),
                (4, 2, 3, None),
                (5, 1, 0, None),
                (6, 2, 0, None),
                (7, 3, 1, None),
                (8, 3, 2, None),
            ],
        );
        assert_eq!(
            compute_path(NodeId(0), NodeId(3), &t).unwrap(),
            vec![LinkId(1), LinkId(3)]
        );
    }

    #[test]
    fn unreachable_destination_is_no_path() {
        let mut t = topo(2, &[(0, 0, 1, None), (1, 1, 0, None)]);
        t.set_link_state(LinkId(0), LinkState::Down);
        assert_eq!(
            compute_path(NodeId(0), NodeId(1), &t).unwrap_err(),
            PceError::NoPath { src: NodeId(0), dst: NodeId(1) }
        );
    }

    #[test]
    fn failover_group_is_one_hop_named_by_primary() {
        // Parallel pair n0 -> n1 in group 0; primary is link 0.
        let mut t = topo(
            2,
            &[(0, 0, 1, Some(0)), (1, 1, 0, Some(1)), (2, 0, 1, Some(0)), (3, 1, 0, Some(1))],
        );
        assert_eq!(compute_path(NodeId(0), NodeId(1), &t).unwrap(), vec![LinkId(0)]);
        // Primary down, backup up: same encoding, the switch redirects.
        t.set_link_state(LinkId(0), LinkState::Down);
        assert_eq!(compute_path(NodeId(0), NodeId(1), &t).unwrap(), vec![LinkId(0)]);
        // Whole group down: unreachable.
        t.set_link_state(LinkId(2), LinkState::Down);
        assert!(compute_path(NodeId(0), NodeId(1), &t).is_err());
    }

    #[test]
    fn random_graphs_paths_are_loop_free_and_distance_optimal() {
        for seed in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..=8u32);
            let mut spec = Vec::new();
            let mut id = 0;
            for a in 0..n {
                for b in (a + 1)..n {
                    if rng.gen_bool(0.5) {
                        spec.push((id, a, b, None));
                        spec.push((id + 1, b, a, None));
                        id += 2;
                    }
                }
            }
            let t = topo(n, &spec);
            // Independent all-pairs BFS distance oracle.
            let bfs = |src: NodeId| -> BTreeMap<NodeId, usize> {
                let mut dist = BTreeMap::from([(src, 0)]);
                let mut frontier = vec![src];
                while let Some(node) = frontier.pop() {
                    let d = dist[&node];
                    for l in t.out_links(node) {
                        if l.is_up() && !dist.contains_key(&l.to) {
                            dist.insert(l.to, d + 1);
                            frontier.insert(0, l.to);
                        }
                    }
                }
                dist
            };
            for src in 0..n {
                let oracle = bfs(NodeId(src));
                for dst in 0..n {
                    match compute_path(NodeId(src), NodeId(dst), &t) {
                        Err(_) => assert!(!oracle.contains_key(&NodeId(dst))),
                        Ok(path) => {
                            let mut at = NodeId(src);
                            let mut visited = BTreeSet::from([at]);
                            for link in &path {
                                let l = t.link(*link).unwrap();
                                assert_eq!(l.from, at);
                                at = l.to;
                                assert!(visited.insert(at), "loop through {at}");
                            }
                            assert_eq!(at, NodeId(dst));
                            assert_eq!(path.len(), oracle[&NodeId(dst)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn get_fid_of_chain_is_or_of_tags() {
        let t = topo(3, &[(0, 0, 1, None), (1, 1, 0, None), (2, 1, 2, None), (3, 2, 1, None)]);
        let tags = assign_tags(&t, 256, 5, 1).unwrap();
        let mut pce = Pce::new();
        let entry = pce.get_fid(NodeId(0), NodeId(2), &t, &tags).unwrap();
        assert_eq!(entry.path, vec![LinkId(0), LinkId(2)]);
        let manual = encode_path(&[LinkId(0), LinkId(2)], &tags).unwrap();
        assert_eq!(entry.fid, manual);
        assert!(matches(&entry.fid, tags.tag(LinkId(0)).unwrap()).unwrap());
        assert!(matches(&entry.fid, tags.tag(LinkId(2)).unwrap()).unwrap());
        assert_eq!(entry.topo_version, t.version());
        assert_eq!(pce.interactions(), 1);
    }

    #[test]
    fn get_fid_src_equals_dst_is_zero() {
        let t = topo(1, &[]);
        let tags = assign_tags(&t, 256, 5, 0).unwrap();
        let entry = Pce::new().get_fid(NodeId(0), NodeId(0), &t, &tags).unwrap();
        assert!(entry.fid.is_zero());
        assert!(entry.path.is_empty());
    }

    #[test]
    fn delivered_fid_reaches_destination_in_flood() {
        // Flood from src following forward_decision; dst must be reached
        // within the hop budget on every random graph where a path exists.
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let n = rng.gen_range(3..=7u32);
            let mut spec = Vec::new();
            let mut id = 0;
            for a in 0..n {
                for b in (a + 1)..n {
                    if rng.gen_bool(0.6) {
                        spec.push((id, a, b, None));
                        spec.push((id + 1, b, a, None));
                        id += 2;
                    }
                }
            }
            let t = topo(n, &spec);
            let tags = assign_tags(&t, 256, 5, seed).unwrap();
            let mut pce = Pce::new();
            let Ok(entry) = pce.get_fid(NodeId(0), NodeId(n - 1), &t, &tags) else {
                continue;
            };
            let mut reached = BTreeSet::new();
            let mut frontier = vec![(NodeId(0), 0u32)];
            while let Some((node, hops)) = frontier.pop() {
                if hops >= 32 {
                    continue;
                }
                for out in forward_decision(node, &entry.fid, &t, &tags) {
                    let to = t.link(out).unwrap().to;
                    if reached.insert((node, out)) {
                        frontier.push((to, hops + 1));
                    }
                }
            }
            let nodes: BTreeSet<NodeId> =
                reached.iter().map(|&(_, l)| t.link(l).unwrap().to).collect();
            assert!(nodes.contains(&NodeId(n - 1)), "seed {seed}: dst not reached");
        }
    }

    #[test]
    fn invalidate_keeps_untouched_paths() {
        let mut cache = PathCache::default();
        // Seven entries over distinct paths; link 5 sits on three of them.
        for i in 0..7u32 {
            let path = if i < 3 {
                vec![LinkId(i), LinkId(5)]
            } else {
                vec![LinkId(10 + i)]
            };
            cache.insert(PathCacheEntry {
                src: NodeId(i),
                dst: NodeId(100),
                path,
                fid: Fid::zero(64),
                topo_version: 1,
            });
        }
        let gone = cache.invalidate(&BTreeSet::from([LinkId(5)]));
        assert_eq!(gone.len(), 3);
        assert!(gone.iter().all(|e| e.path.contains(&LinkId(5))));
        assert_eq!(cache.len(), 4);
        // Untouched link: nothing happens.
        assert!(cache.invalidate(&BTreeSet::from([LinkId(999)])).is_empty());
        assert_eq!(cache.len(), 4);
    }

    #[test]
    fn backup_member_change_invalidates_nothing() {
        // Paths encode the primary of a group; the backup id never appears,
        // so its state changes are invisible to every cache.
        let t = topo(
            2,
            &[(0, 0, 1, Some(0)), (1, 1, 0, Some(1)), (2, 0, 1, Some(0)), (3, 1, 0, Some(1))],
        );
        let tags = assign_tags(&t, 256, 5, 0).unwrap();
        let mut pce = Pce::new();
        let entry = pce.get_fid(NodeId(0), NodeId(1), &t, &tags).unwrap();
        let mut cache = PathCache::default();
        cache.insert(entry);
        assert!(cache.invalidate(&BTreeSet::from([LinkId(2)])).is_empty());
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn interaction_counter_counts_every_call() {
        let t = topo(2, &[(0, 0, 1, None), (1, 1, 0, None)]);
        let tags = assign_tags(&t, 64, 2, 0).unwrap();
        let mut pce = Pce::new();
        pce.rv_subscribe(name(&[b"a"]), NodeId(0));
        pce.rv_resolve(&name(&[b"a"]));
        pce.rv_unsubscribe(&name(&[b"a"]), NodeId(0));
        pce.rv_advertise(name(&[b"a"]), NodeId(0));
        pce.rv_publishers(&name(&[b"a"]));
        pce.get_fid(NodeId(0), NodeId(1), &t, &tags).unwrap();
        pce.record_notification();
        assert_eq!(pce.interactions(), 7);
    }
}
