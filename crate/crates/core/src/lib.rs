//! Small-world interconnection networks on two-dimensional tori.
//!
//! The crate builds stochastic (distance-biased) and deterministic
//! interlaced-bypass shortcut networks, routes messages with fault-aware
//! greedy local navigation, and measures how navigation length, forwarding
//! index and cascading overloads respond to random node failures.
//!
//! ```
//! use swnet::prelude::*;
//!
//! let cfg = LatticeConfig::new(8).unwrap();
//! let net = build_torus(cfg);
//! let policy = NavigationPolicy::two_level(net.node_count());
//! let eval = evaluate(&net, &MessageSet::all_pairs(&net), &policy);
//! assert_eq!(eval.report.f_max, 193);
//! ```

pub mod error;
pub mod failure;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod routing;
pub mod topology;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::failure::{
        inject_failures, run_cascade, CascadeParams, CascadeReport, FailureScenario,
    };
    pub use crate::metrics::{
        evaluate, forwarding_index, global_average_distance, load_histogram, penalized_l2,
        Evaluation, LoadTable, MessageMode, MessageSet, MetricsReport,
    };
    pub use crate::routing::{
        navigation_diameter, next_hop, route_message, NavigationLevel, NavigationPolicy, NextHop,
        RouteStatus, RoutingOutcome,
    };
    pub use crate::topology::{
        build_torus, generate_ibt, generate_stochastic, generate_stochastic_fixed_degree,
        torus_distance, unit_wiring_cost, IbtParams, InterlacingScheme, LatticeConfig, Network,
        NetworkKind, NodeId, Shortcut, StochasticParams,
    };
}
