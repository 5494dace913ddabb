//! Distributed soft coding (DISC) for two-hop parallel relay networks.
//!
//! Each relay turns its noisy observations of the source frame into soft bit
//! estimates (SBEs), runs them through a rate-1 SISO convolutional encoder and
//! forwards the result. The destination decodes the K relay streams jointly as
//! a rate-1/K distributed codeword with a BCJR MAP decoder. The crate also
//! implements the generator-sequence algebra behind the code design criterion
//! (GSW-based pairing of constituent codes to relays), the SIR and DF baseline
//! schemes, and a deterministic seeded Monte Carlo harness for FER/BER curves.

pub mod analysis;
pub mod channel;
pub mod code_algebra;
pub mod relay;
pub mod sim;
pub mod soft_coding;
