//! IGMPv2 wire codec.
//!
//! All four message kinds share one fixed 8-byte layout: type, max
//! response time in tenths of a second, 16-bit ones-complement checksum,
//! group address. The checksum is computed over the whole message with the
//! checksum field zeroed; a received message verifies iff the
//! ones-complement sum of its four 16-bit words is 0xFFFF.

use std::net::Ipv4Addr;

use thiserror::Error;

use crate::model::GroupAddr;

/// Every IGMPv2 message is exactly this long on the wire.
pub const WIRE_LEN: usize = 8;

const TYPE_QUERY: u8 = 0x11;
const TYPE_REPORT_V2: u8 = 0x16;
const TYPE_LEAVE: u8 = 0x17;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IgmpError {
    #[error("frame is {0} bytes, expected {WIRE_LEN}")]
    BadLength(usize),
    #[error("checksum mismatch: expected {expected:#06x}, found {found:#06x}")]
    BadChecksum { expected: u16, found: u16 },
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("group field {0} is not valid for this message type")]
    BadGroup(Ipv4Addr),
}

/// A decoded IGMPv2 message. Queries carry a max response time; the field
/// is zero on the wire for reports and leaves and is ignored on reception.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgmpMessage {
    /// Type 0x11, group 0.0.0.0: solicits reports for every group.
    GeneralQuery { max_resp_ds: u8 },
    /// Type 0x11 with a group: solicits reports for that group only.
    GroupQuery { group: GroupAddr, max_resp_ds: u8 },
    /// Type 0x16: a host is (still) a member of the group.
    Report { group: GroupAddr },
    /// Type 0x17: a host stopped listening to the group.
    Leave { group: GroupAddr },
}

impl IgmpMessage {
    pub fn encode(&self) -> [u8; WIRE_LEN] {
        let (ty, max_resp, group) = match *self {
            IgmpMessage::GeneralQuery { max_resp_ds } => {
                (TYPE_QUERY, max_resp_ds, [0, 0, 0, 0])
            }
            IgmpMessage::GroupQuery { group, max_resp_ds } => {
                (TYPE_QUERY, max_resp_ds, group.octets())
            }
            IgmpMessage::Report { group } => (TYPE_REPORT_V2, 0, group.octets()),
            IgmpMessage::Leave { group } => (TYPE_LEAVE, 0, group.octets()),
        };
        let mut frame = [ty, max_resp, 0, 0, group[0], group[1], group[2], group[3]];
        let ck = checksum(&frame);
        frame[2..4].copy_from_slice(&ck.to_be_bytes());
        frame
    }

    pub fn decode(frame: &[u8]) -> Result<IgmpMessage, IgmpError> {
        let frame: &[u8; WIRE_LEN] =
            frame.try_into().map_err(|_| IgmpError::BadLength(frame.len()))?;
        let found = u16::from_be_bytes([frame[2], frame[3]]);
        let mut zeroed = *frame;
        zeroed[2] = 0;
        zeroed[3] = 0;
        let expected = checksum(&zeroed);
        if found != expected {
            return Err(IgmpError::BadChecksum { expected, found });
        }
        let addr = Ipv4Addr::new(frame[4], frame[5], frame[6], frame[7]);
        let group = || GroupAddr::new(addr).map_err(|_| IgmpError::BadGroup(addr));
        match frame[0] {
            TYPE_QUERY if addr.is_unspecified() => {
                Ok(IgmpMessage::GeneralQuery { max_resp_ds: frame[1] })
            }
            TYPE_QUERY => Ok(IgmpMessage::GroupQuery { group: group()?, max_resp_ds: frame[1] }),
            TYPE_REPORT_V2 => Ok(IgmpMessage::Report { group: group()? }),
            TYPE_LEAVE => Ok(IgmpMessage::Leave { group: group()? }),
            ty => Err(IgmpError::UnknownType(ty)),
        }
    }
}

/// RFC 1071 checksum: the complement of the ones-complement sum of the
/// frame's big-endian 16-bit words.
fn checksum(frame: &[u8; WIRE_LEN]) -> u16 {
    let mut sum: u32 = 0;
    for pair in frame.chunks_exact(2) {
        sum += u32::from(u16::from_be_bytes([pair[0], pair[1]]));
    }
    while sum > 0xFFFF {
        sum = (sum & 0xFFFF) + (sum >> 16);
    }
    !(sum as u16)
}
