//! Multi-robot task planning with temporal-logic task specifications and
//! learned object-search likelihoods.
//!
//! A team of simulated robots must complete a multi-stage task (expressed in
//! syntactically co-safe LTL, e.g. "fetch the pillow and the remote, in any
//! order") in a home whose container contents are unknown until searched.
//! The crate provides:
//!
//! - [`scltl`]: the task grammar, formula progression, and compilation to a
//!   minimal DFA whose "relevant words" drive action generation.
//! - [`world`]: occupancy-grid homes with containers, skill timing profiles,
//!   deterministic shortest paths, and a seeded procedural generator.
//! - [`likelihood`]: trainable frequency likelihoods P(object | container
//!   kind, room) plus a ground-truth oracle model for controlled experiments.
//! - [`belief`]: the joint belief over robot state, DFA state, and search
//!   history, with the event-ordered belief advance used by the planner.
//! - [`planner`]: anytime PO-UCT over joint assignments (sequential per-robot
//!   action selection, belief-space rollouts, admissible cost-to-go bound).
//! - [`baselines`]: myopic planners (nearest-container and likelihood-greedy)
//!   used as benchmark references.
//! - [`harness`]: task templates, episode execution, and the paired
//!   benchmark runner with CSV/trace output.
//!
//! The `taskweave` binary exposes the whole pipeline (`gen-env`,
//! `train-model`, `run`, `bench`, `dfa`); see the README for examples.

pub mod baselines;
pub mod belief;
pub mod harness;
pub mod likelihood;
pub mod planner;
pub mod scltl;
pub mod world;
