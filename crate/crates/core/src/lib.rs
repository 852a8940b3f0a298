//! Deterministic dumbbell-topology network simulator and congestion-control
//! library.
//!
//! The crate has three layers:
//!
//! * [`cc`] — pure, externally clocked congestion controllers: SIAD
//!   (scalable increase / adaptive decrease) plus five loss-based baselines
//!   (NewReno, Cubic, Scalable, HighSpeed, H-TCP).
//! * [`sim`] — an event-driven simulator of a single bottleneck link with a
//!   tail-drop queue, symmetric ACK path, duplicate-ACK loss detection,
//!   retransmission timeouts, optional random loss and short-flow cross
//!   traffic. Runs are bit-reproducible for a given scenario and seed.
//! * [`metrics`] / [`batch`] / [`report`] — trace post-processing
//!   (utilization, queue fill, loss-event distances, convergence time),
//!   sweep/repetition execution, and machine-readable result emission.
//!
//! Scenarios are described declaratively in TOML, see [`scenario`].

pub mod batch;
pub mod cc;
pub mod error;
pub mod metrics;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod trace;

pub use error::SimError;
pub use scenario::Scenario;
pub use sim::run;
