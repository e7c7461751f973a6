//! Fixtures shared by the benchmarks.

use ehrlocal_core::linalg::{rvec, RatMat};
use ehrlocal_core::{Cone, GeometryContext, Polytope};

pub fn unit_square() -> Polytope {
    Polytope::new(2, &[rvec(&[0, 0]), rvec(&[1, 0]), rvec(&[1, 1]), rvec(&[0, 1])]).unwrap()
}

pub fn triangle() -> Polytope {
    Polytope::new(2, &[rvec(&[1, 0]), rvec(&[2, 1]), rvec(&[0, 2])]).unwrap()
}

pub fn unit_cube() -> Polytope {
    let vs: Vec<_> = (0..8).map(|i| rvec(&[i & 1, (i >> 1) & 1, (i >> 2) & 1])).collect();
    Polytope::new(3, &vs).unwrap()
}

/// Gram matrix of the hexagonal lattice.
pub fn hexagonal() -> GeometryContext {
    GeometryContext::with_gram(RatMat::from_i64(&[&[2, 1], &[1, 2]])).unwrap()
}

/// Normal cone at the vertex `(1, 0)` of [`triangle`].
pub fn triangle_vertex_cone(ctx: &GeometryContext) -> Cone {
    let p = triangle();
    let fl = p.face_lattice();
    let v = fl
        .faces
        .iter()
        .position(|f| f.dim == 0 && p.vertices()[f.vertices[0]] == rvec(&[1, 0]))
        .unwrap();
    p.normal_cone(ctx, &fl, v)
}
