//! Map helpers for grid-sized workloads: data-parallel when the `parallel`
//! feature is enabled, plain loops otherwise. Reductions stay sequential in
//! the callers so results do not depend on thread scheduling.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn try_map_f64<T, F>(items: &[T], f: F) -> Result<Vec<f64>>
where
    T: Sync,
    F: Fn(&T) -> Result<f64> + Sync,
{
    // Pass `f` by reference: rayon wants `Send`, and `&F` is `Send`
    // whenever `F: Sync`, so callers never need `Send` closures.
    items.par_iter().map(&f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_map_f64<T, F>(items: &[T], f: F) -> Result<Vec<f64>>
where
    F: Fn(&T) -> Result<f64>,
{
    items.iter().map(|x| f(x)).collect()
}
