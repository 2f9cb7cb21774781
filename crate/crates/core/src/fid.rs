//! In-packet Bloom-filter forwarding identifiers.
//!
//! Every directed link gets a tag with exactly `k` of `m` bits set. A path
//! or tree is encoded by OR-ing the tags of its links; a switch forwards a
//! packet on every outgoing link whose tag is contained in the packet's
//! identifier. Containment of a tag that was never encoded is a false
//! positive and produces extra deliveries; those are counted, not errors.
//!
//! Failover groups are resolved here, per packet and without any control
//! plane: if any member's tag matches, the packet goes out on the first
//! member that is up.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{failover_groups, LinkId, NodeId, Topology};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FidError {
    #[error("invalid tag parameters: m={m}, k={k}")]
    InvalidParams { m: usize, k: usize },
    #[error("link {0} has no tag assigned")]
    UnknownLink(LinkId),
    #[error("bit width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
}

/// A forwarding identifier: an `m`-bit string, compared bitwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fid {
    bits: Vec<u64>,
    width: usize,
}

impl Fid {
    /// The all-zero identifier, which matches nothing.
    pub fn zero(width: usize) -> Self {
        Fid { bits: vec![0; width.div_ceil(64)], width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.width);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn set_bit(&mut self, i: usize) {
        debug_assert!(i < self.width);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    fn or_assign(&mut self, other: &Fid) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    /// True iff every set bit of `tag` is also set in `self`.
    pub fn contains(&self, tag: &Fid) -> bool {
        self.bits.iter().zip(&tag.bits).all(|(a, b)| a & b == *b)
    }
}

/// The tag of one directed link: an `m`-bit string with exactly `k` bits set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkTag(Fid);

impl LinkTag {
    pub fn as_fid(&self) -> &Fid {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }
}

/// Deterministic map from every link of a topology to its tag.
#[derive(Debug, Clone)]
pub struct TagAssignment {
    tags: BTreeMap<LinkId, LinkTag>,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
}

impl TagAssignment {
    pub fn tag(&self, link: LinkId) -> Option<&LinkTag> {
        self.tags.get(&link)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LinkId, &LinkTag)> {
        self.tags.iter().map(|(&id, tag)| (id, tag))
    }
}

/// Draws a distinct k-of-m tag for every link. Deterministic in
/// (link set, m, k, seed); collisions are redrawn so assigned tags are
/// pairwise distinct.
pub fn assign_tags(
    topology: &Topology,
    m: usize,
    k: usize,
    seed: u64,
) -> Result<TagAssignment, FidError> {
    if k == 0 || m < k {
        return Err(FidError::InvalidParams { m, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tags: BTreeMap<LinkId, LinkTag> = BTreeMap::new();
    let mut used: Vec<Fid> = Vec::new();
    let mut link_ids: Vec<LinkId> = topology.links().map(|l| l.id).collect();
    link_ids.sort();
    for id in link_ids {
        loop {
            let tag = draw_tag(&mut rng, m, k);
            if !used.contains(&tag) {
                used.push(tag.clone());
                tags.insert(id, LinkTag(tag));
                break;
            }
        }
    }
    Ok(TagAssignment { tags, m, k, seed })
}

fn draw_tag(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Fid {
    let mut fid = Fid::zero(m);
    let mut set = 0;
    while set < k {
        let bit = rng.gen_range(0..m);
        if !fid.bit(bit) {
            fid.set_bit(bit);
            set += 1;
        }
    }
    fid
}

/// OR of the tags of all links in `path`. Order-insensitive; the empty path
/// encodes to the all-zero identifier.
pub fn encode_path(path: &[LinkId], tags: &TagAssignment) -> Result<Fid, FidError> {
    let mut fid = Fid::zero(tags.m);
    for &link in path {
        let tag = tags.tag(link).ok_or(FidError::UnknownLink(link))?;
        fid.or_assign(tag.as_fid());
    }
    Ok(fid)
}

/// Bitwise OR of identifiers: commutative, associative, idempotent. This is
/// how unicast paths combine into a multicast tree.
pub fn merge<'a, I>(fids: I) -> Result<Fid, FidError>
where
    I: IntoIterator<Item = &'a Fid>,
{
    let mut iter = fids.into_iter();
    let first = match iter.next() {
        Some(f) => f,
        None => return Ok(Fid::zero(0)),
    };
    let mut out = first.clone();
    for fid in iter {
        if fid.width() != out.width() {
            return Err(FidError::WidthMismatch(out.width(), fid.width()));
        }
        out.or_assign(fid);
    }
    Ok(out)
}

/// True iff `(fid AND tag) == tag`.
pub fn matches(fid: &Fid, tag: &LinkTag) -> Result<bool, FidError> {
    if fid.width() != tag.width() {
        return Err(FidError::WidthMismatch(fid.width(), tag.width()));
    }
    Ok(fid.contains(tag.as_fid()))
}

/// The set of outgoing links of `node` a packet with `fid` is emitted on.
///
/// Ungrouped links match on their own tag and are used only if up. For a
/// failover group, a match on any member selects the first up member, so
/// traffic moves to a backup with no identifier recomputation. A down link
/// is silently excluded: the resulting loss is a measurable outcome.
pub fn forward_decision(
    node: NodeId,
    fid: &Fid,
    topology: &Topology,
    tags: &TagAssignment,
) -> Vec<LinkId> {
    let groups = failover_groups(topology);
    let mut out = Vec::new();
    let mut decided_groups: BTreeMap<u32, bool> = BTreeMap::new();
    for link in topology.out_links(node) {
        let tag = match tags.tag(link.id) {
            Some(t) => t,
            None => continue,
        };
        let matched = fid.contains(tag.as_fid());
        match link.failover_group {
            None => {
                if matched && link.is_up() {
                    out.push(link.id);
                }
            }
            Some(g) => {
                if matched {
                    decided_groups.entry(g).or_insert(false);
                    decided_groups.insert(g, true);
                }
            }
        }
    }
    for (g, matched) in decided_groups {
        if !matched {
            continue;
        }
        if let Some(first_up) = groups[&g]
            .iter()
            .find(|&&id| topology.link(id).map(|l| l.is_up()).unwrap_or(false))
        {
            out.push(*first_up);
        }
    }
    out.sort();
    out
}

/// Standard Bloom-filter estimate of the probability that one unrelated
/// tag is contained in an identifier built from `n_links` tags:
/// `(1 - (1 - 1/m)^(k*n))^k`.
pub fn false_positive_estimate(n_links: usize, m: usize, k: usize) -> Result<f64, FidError> {
    if m == 0 || k == 0 {
        return Err(FidError::InvalidParams { m, k });
    }
    let miss = 1.0 - 1.0 / m as f64;
    let p_bit_set = 1.0 - miss.powi((k * n_links) as i32);
    Ok(p_bit_set.powi(k as i32))
}
