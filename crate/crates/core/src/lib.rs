//! Max-min fair channel assignment for cognitive radio ad hoc networks.
//!
//! Secondary users (SUs) share `N` licensed channels with primary users (PUs)
//! and may use at most one channel at a time. This crate models the network
//! ([`network`]), assigns channels ([`solver`]), predicts per-SU throughput
//! exactly ([`analytics`]), sizes the MAC contention window and its overhead
//! ([`mac`]), and simulates the MAC protocol cycle by cycle ([`sim`]).

pub mod analytics;
pub mod assignment;
pub mod channel_set;
pub mod enumeration;
pub mod error;
pub mod mac;
pub mod network;
pub mod sim;
pub mod solver;

pub use assignment::ChannelAssignment;
pub use channel_set::ChannelSet;
pub use enumeration::EnumerationCap;
pub use error::{Error, Result};
pub use mac::{MacConfig, MacTiming};
pub use network::{parse_instance, serialize_instance, NetworkInstance};
