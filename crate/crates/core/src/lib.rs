//! Joint uplink/downlink association, serving distances and average rates in a
//! two-tier sub-6GHz / millimetre-wave network with decoupled access.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod distances;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod rates;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{AssociationCase, LinkDirection, NetworkConfig, Tier};

/// Order-preserving map, parallel when the `parallel` feature is on.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
