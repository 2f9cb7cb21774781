//! Deterministic discrete-event simulator for IP multicast carried over an
//! information-centric core, next to a legacy L2 baseline.
//!
//! The library has three layers:
//!
//! * protocol building blocks: [`model`] (topology, addresses, time),
//!   [`fid`] (Bloom-filter forwarding identifiers), [`igmp`] (the 8-byte
//!   v2 wire codec), [`pce`] (rendezvous and path computation), [`nap`]
//!   (the gateways between IP clients and the core), and [`baseline`]
//!   (spanning tree plus IGMP snooping);
//! * the [`sim`] engine that drives either backend over a scripted run;
//! * scenario input ([`scenario`]) and result output ([`report`]).
//!
//! Every run is a pure function of (scenario, seed): same inputs, byte
//! identical outputs.

pub mod baseline;
pub mod fid;
pub mod igmp;
pub mod model;
pub mod nap;
pub mod pce;
pub mod report;
pub mod scenario;
pub mod sim;
