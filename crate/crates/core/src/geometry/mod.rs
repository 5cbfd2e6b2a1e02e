//! Exact rational polyhedral primitives.

pub mod cone;
pub mod lp;
pub mod polyhedron;
pub mod rational;
pub mod sphere;

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

pub use cone::{ConeUnion, PolyCone, Support};
pub use polyhedron::{Constraint, ConvexPolyhedron};
pub use rational::{QVector, Rat};

static DIMENSION_CAP: AtomicUsize = AtomicUsize::new(8);

/// Largest ambient dimension for which generator enumeration runs.
pub fn dimension_cap() -> usize {
    DIMENSION_CAP.load(Ordering::Relaxed)
}

pub fn set_dimension_cap(cap: usize) {
    DIMENSION_CAP.store(cap.max(1), Ordering::Relaxed);
}

pub(crate) fn check_cap(dim: usize) -> Result<()> {
    let cap = dimension_cap();
    if dim > cap {
        Err(Error::DimensionCap { dim, cap })
    } else {
        Ok(())
    }
}
