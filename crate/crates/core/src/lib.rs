//! Coded-caching content delivery over multi-access-point WLANs whose
//! helpers have several transmit antennas.
//!
//! The crate covers the whole pipeline of one experiment:
//!
//! - [`topology`]: helper grid, Poisson user drop and reachability sets;
//! - [`placement`]: cache profiles and subpacket indexing;
//! - [`delivery`]: XOR codewords (single antenna and interference
//!   reduction) and superposition messages (cache congestion control);
//! - [`policy`]: activation patterns, nulling plans and rate vectors;
//! - [`fairness`]: alpha-fair time sharing over the rate region;
//! - [`oracle`]: an independent collision-model receiver that checks
//!   schedules end to end;
//! - [`experiment`]: seeded multi-run harness with JSON/CSV output.

pub mod combinatorics;
pub mod delivery;
pub mod error;
pub mod experiment;
pub mod fairness;
pub mod oracle;
pub mod placement;
pub mod policy;
pub mod topology;

pub use combinatorics::{binomial, ProfileSet};
pub use delivery::{
    build_ccc_messages, build_codewords, enumerate_nulling_plans, feasible_sets_ccc, feasible_sets_siso,
    transmission_count, DeliveryMode, FeasibleMode, FeasibleSet, NullingPlan, Term, Transmission, TransmissionKind,
    TransmissionSchedule,
};
pub use error::{Error, Result};
pub use fairness::{
    brute_force_fairness, maximize_fairness, maximize_fairness_with, utility, FairnessObjective, SolverOptions,
    ThroughputPoint,
};
pub use oracle::{simulate_reception, verify_schedule, VerificationReport, VerifyContext};
pub use placement::{assign_profiles, PlacementParams, ProfileAssignment, Requests, SubpacketIndex};
pub use policy::{enumerate_policies, prune_rate_vectors, Instance, Limits, Policy, RateVector};
pub use topology::{build_hex_grid, place_users, two_helper_instance, ActivationPattern, NetworkTopology, Point2D};
