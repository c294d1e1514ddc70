//! Dependence-weighted qubit mapping and SWAP routing.
//!
//! The pipeline is: parse OpenQASM 2.0 ([`qasm`]), build the two-qubit
//! dependence graph with transitive weights ([`depgraph`]), route on a
//! coupling graph ([`topology`], [`router`]) and check the result
//! ([`verify`]). [`lift`] compresses gate runs into affine macro-gates and
//! [`benchgen`] produces circuits with a known optimal depth.
//!
//! Scores are generic over [`scalar::Score`]; the aliases below fix the
//! common choices.

pub mod benchgen;
pub mod circuit;
pub mod depgraph;
pub mod lift;
pub mod mapping;
pub mod qasm;
pub mod router;
pub mod scalar;
pub mod topology;
pub mod verify;

pub use circuit::{Circuit, Gate, GateKind};
pub use mapping::Mapping;
pub use router::{route, RouteError, RouteResult, Router, RouterConfig, Variant};
pub use scalar::{Exact, Score};
pub use topology::{CouplingGraph, DistanceMatrix};

pub type RouterConfigF64 = router::RouterConfig<f64>;
pub type RouterConfigF32 = router::RouterConfig<f32>;
pub type RouterConfigExact = router::RouterConfig<Exact>;
pub type ScorerF64 = router::Scorer<f64>;
pub type ScorerExact = router::Scorer<Exact>;
