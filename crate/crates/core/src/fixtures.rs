//! Built-in instances used by tests, the CLI and the FFI.

use crate::coderivative::ConstrainedPoint;
use crate::geometry::rational::rat;
use crate::geometry::{Constraint, ConvexPolyhedron, QVector};
use crate::multifunction::PLMultifunction;

fn v(c: &[i64]) -> QVector {
    QVector::from_ints(c)
}

/// `[lo, hi]` in one dimension.
pub fn interval(lo: i64, hi: i64) -> ConvexPolyhedron {
    ConvexPolyhedron::boxed(&[Some(rat(lo))], &[Some(rat(hi))])
}

/// `[0, ∞)` in one dimension.
pub fn half_line() -> ConvexPolyhedron {
    ConvexPolyhedron::boxed(&[Some(rat(0))], &[None])
}

/// `x ↦ {x}` relative to `[0, 1]` at the origin.
pub fn inst_id() -> ConstrainedPoint {
    ConstrainedPoint::new(PLMultifunction::identity(1), interval(0, 1), v(&[0]), v(&[0]))
        .expect("fixture is consistent")
}

/// `x ↦ {x, -x}` for `x ∈ [0, 1]`, empty for other `x`.
pub fn abs_branches() -> PLMultifunction {
    let branch = |s: i64| {
        ConvexPolyhedron::new(
            2,
            vec![
                Constraint::new(v(&[-1, 0]), rat(0)),
                Constraint::new(v(&[1, 0]), rat(1)),
            ],
            vec![Constraint::new(v(&[1, -s]), rat(0))],
        )
        .expect("fixture is consistent")
    };
    PLMultifunction::from_pieces(1, 1, vec![branch(1), branch(-1)]).expect("fixture is consistent")
}

/// Branch map relative to the full line at the origin.
pub fn inst_abs_full() -> ConstrainedPoint {
    ConstrainedPoint::new(abs_branches(), ConvexPolyhedron::full(1), v(&[0]), v(&[0]))
        .expect("fixture is consistent")
}

/// Branch map relative to `[0, ∞)` at the origin.
pub fn inst_abs_half() -> ConstrainedPoint {
    ConstrainedPoint::new(abs_branches(), half_line(), v(&[0]), v(&[0]))
        .expect("fixture is consistent")
}

/// `x ↦ {0}` on the full line at the origin.
pub fn constant_zero() -> ConstrainedPoint {
    ConstrainedPoint::new(constant_map(), ConvexPolyhedron::full(1), v(&[0]), v(&[0]))
        .expect("fixture is consistent")
}

pub fn constant_map() -> PLMultifunction {
    PLMultifunction::affine(&[v(&[0])], &v(&[0]), &ConvexPolyhedron::full(1)).expect("fixture is consistent")
}

/// `y ↦ |y|` as a single-valued map on the line.
pub fn abs_map() -> PLMultifunction {
    let branch = |s: i64| {
        ConvexPolyhedron::new(
            2,
            vec![Constraint::new(v(&[-s, 0]), rat(0))],
            vec![Constraint::new(v(&[s, -1]), rat(0))],
        )
        .expect("fixture is consistent")
    };
    PLMultifunction::from_pieces(1, 1, vec![branch(1), branch(-1)]).expect("fixture is consistent")
}

/// `x ↦ -x` on the full line.
pub fn negation() -> PLMultifunction {
    PLMultifunction::affine(&[v(&[-1])], &v(&[0]), &ConvexPolyhedron::full(1)).expect("fixture is consistent")
}

/// `x ↦ max(x, 0)` on the full line.
pub fn ramp() -> PLMultifunction {
    let left = ConvexPolyhedron::new(
        2,
        vec![Constraint::new(v(&[1, 0]), rat(0))],
        vec![Constraint::new(v(&[0, 1]), rat(0))],
    )
    .expect("fixture is consistent");
    let right = ConvexPolyhedron::new(
        2,
        vec![Constraint::new(v(&[-1, 0]), rat(0))],
        vec![Constraint::new(v(&[1, -1]), rat(0))],
    )
    .expect("fixture is consistent");
    PLMultifunction::from_pieces(1, 1, vec![left, right]).expect("fixture is consistent")
}
