//! Security evaluation toolkit for SDN data-center architectures.
//!
//! The toolkit walks four stages: a curated threat/vulnerability/mitigation
//! knowledge base ([`kb`]), CVSS v3.1 risk ranking ([`cvss`]), attack
//! execution against a deterministic simulated testbed ([`topo`], [`sim`],
//! [`attack`]), and mitigation planning plus report rendering ([`pipeline`]).

pub mod attack;
pub mod cvss;
pub mod kb;
pub mod pipeline;
pub mod sim;
pub mod topo;
