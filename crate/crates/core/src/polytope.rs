//! Lattice polytopes: hull, face lattice, normal cones and relative volumes.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::complex::{Constraint, Frame, HCell, Hyperplane};
use crate::cone::{subsets, Cone};
use crate::error::{Error, Result};
use crate::linalg::{
    affine_dim, dot, induced_lattice_basis, is_integral, primitive, rank_of,
    vscale, vsub, zero_vec, GeometryContext, RatMat, RatVec, Rational,
};

/// A convex polytope with lattice vertices (in lattice coordinates).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    n: usize,
    vertices: Vec<RatVec>,
    /// Facet inequalities `a·x <= b` with primitive `a` (relative to the
    /// affine hull).
    facets: Vec<(RatVec, Rational)>,
    /// Equalities of the affine hull.
    eqs: Vec<(RatVec, Rational)>,
    dim: usize,
}

/// A face, stored as indices into the polytope's vertex list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub dim: usize,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FaceLattice {
    /// Sorted by dimension, then vertex set; the last entry is the polytope.
    pub faces: Vec<Face>,
    /// For each face, the facets (indices into `Polytope::facets`) containing it.
    pub facet_incidence: Vec<Vec<usize>>,
}

impl Polytope {
    /// Convex hull of lattice points. Rejects non-integral points.
    pub fn new(n: usize, points: &[RatVec]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("polytope needs at least one vertex".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(Error::Dimension { expected: n, found: p.len() });
            }
            if !is_integral(p) {
                return Err(Error::input(format!("vertices[{i}]"), "non-lattice vertex"));
            }
        }
        Ok(Self::hull(n, points))
    }

    /// Convex hull of arbitrary rational points.
    pub fn hull(n: usize, points: &[RatVec]) -> Self {
        let mut pts: Vec<RatVec> = Vec::new();
        for p in points {
            if !pts.contains(p) {
                pts.push(p.clone());
            }
        }
        let origin = pts[0].clone();
        let diffs: Vec<RatVec> = pts.iter().map(|p| vsub(p, &origin)).collect();
        let dirs = crate::linalg::independent_subset(&diffs);
        let d = dirs.len();
        let eqs: Vec<(RatVec, Rational)> = if d == n {
            Vec::new()
        } else if d == 0 {
            (0..n)
                .map(|i| {
                    let e = crate::linalg::unit_vec(n, i);
                    let b = origin[i].clone();
                    (e, b)
                })
                .collect()
        } else {
            RatMat::from_rows(&dirs)
                .nullspace()
                .into_iter()
                .map(|a| {
                    let a = primitive(&a);
                    let b = dot(&a, &origin);
                    (a, b)
                })
                .collect()
        };
        let frame = Frame::new(origin.clone(), dirs);
        let local: Vec<RatVec> = pts.iter().map(|p| frame.coords(p)).collect();
        let local_facets = hull_facets(d, &local);
        // lift a·y <= b with y = P(x - o)
        let mut facets: Vec<(RatVec, Rational)> = Vec::new();
        for (a, b) in &local_facets {
            let lifted = lift_functional(&frame, a);
            let rhs = b + dot(&lifted, &origin);
            let (lifted, f) = crate::linalg::primitive_with_factor(&lifted);
            facets.push((lifted, rhs * f));
        }
        // extreme points: tight facets of full rank
        let mut vertices: Vec<RatVec> = Vec::new();
        for (p, y) in pts.iter().zip(&local) {
            let tight: Vec<RatVec> =
                local_facets.iter().filter(|(a, b)| dot(a, y) == *b).map(|(a, _)| a.clone()).collect();
            if rank_of(d, &tight) == d {
                vertices.push(p.clone());
            }
        }
        vertices.sort();
        Polytope { n, vertices, facets, eqs, dim: d }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[RatVec] {
        &self.vertices
    }

    pub fn facets(&self) -> &[(RatVec, Rational)] {
        &self.facets
    }

    pub fn equalities(&self) -> &[(RatVec, Rational)] {
        &self.eqs
    }

    pub fn is_full_dim(&self) -> bool {
        self.dim == self.n
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.eqs.iter().all(|(a, b)| dot(a, x) == *b) && self.facets.iter().all(|(a, b)| dot(a, x) <= *b)
    }

    pub fn dilate(&self, t: &Rational) -> Polytope {
        let pts: Vec<RatVec> = self.vertices.iter().map(|v| vscale(v, t)).collect();
        Polytope::hull(self.n, &pts)
    }

    pub fn translate(&self, z: &[Rational]) -> Polytope {
        let pts: Vec<RatVec> = self.vertices.iter().map(|v| crate::linalg::vadd(v, z)).collect();
        Polytope::hull(self.n, &pts)
    }

    /// The polytope as a closed cell.
    pub fn cell(&self) -> HCell {
        let mut c = HCell::universe(self.n);
        for (a, b) in &self.eqs {
            c.push_eq(Hyperplane::new(a.clone(), b.clone()));
        }
        for (a, b) in &self.facets {
            c.push(Constraint::weak(a.clone(), b.clone()));
        }
        c.bbox = crate::complex::BBox::from_points(&self.vertices);
        c
    }

    pub fn face_lattice(&self) -> FaceLattice {
        let m = self.vertices.len();
        let facet_sets: Vec<BTreeSet<usize>> = self
            .facets
            .iter()
            .map(|(a, b)| (0..m).filter(|&i| dot(a, &self.vertices[i]) == *b).collect())
            .collect();
        let mut sets: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        sets.insert((0..m).collect());
        let mut frontier = facet_sets.clone();
        while let Some(s) = frontier.pop() {
            if s.is_empty() || !sets.insert(s.clone()) {
                continue;
            }
            for f in &facet_sets {
                let t: BTreeSet<usize> = s.intersection(f).copied().collect();
                if !t.is_empty() && !sets.contains(&t) {
                    frontier.push(t);
                }
            }
        }
        let mut faces: Vec<Face> = sets
            .into_iter()
            .map(|s| {
                let vs: Vec<usize> = s.into_iter().collect();
                let pts: Vec<RatVec> = vs.iter().map(|&i| self.vertices[i].clone()).collect();
                Face { dim: affine_dim(&pts) as usize, vertices: vs }
            })
            .collect();
        faces.sort();
        let facet_incidence = faces
            .iter()
            .map(|f| (0..facet_sets.len()).filter(|&j| f.vertices.iter().all(|v| facet_sets[j].contains(v))).collect())
            .collect();
        FaceLattice { faces, facet_incidence }
    }

    pub fn face_points(&self, face: &Face) -> Vec<RatVec> {
        face.vertices.iter().map(|&i| self.vertices[i].clone()).collect()
    }

    /// Normal cone of a face: generated by `G⁻¹ a` over the facets containing
    /// it, plus the normal space of the affine hull as lineality.
    pub fn normal_cone(&self, ctx: &GeometryContext, lattice: &FaceLattice, face_index: usize) -> Cone {
        let ginv = ctx.gram.inverse().expect("positive definite");
        let mut gens: Vec<RatVec> = lattice.facet_incidence[face_index]
            .iter()
            .map(|&j| ginv.mul_vec(&self.facets[j].0))
            .collect();
        for (a, _) in &self.eqs {
            let g = ginv.mul_vec(a);
            gens.push(crate::linalg::vneg(&g));
            gens.push(g);
        }
        Cone::from_generators(self.n, &gens).expect("dimensions agree")
    }

    /// The cone of feasible directions at a face, `{x : a·x <= 0}` over the
    /// facets containing it (and the hull equalities).
    pub fn tangent_cone(&self, lattice: &FaceLattice, face_index: usize) -> Cone {
        let mut rows: Vec<RatVec> =
            lattice.facet_incidence[face_index].iter().map(|&j| self.facets[j].0.clone()).collect();
        for (a, _) in &self.eqs {
            rows.push(a.clone());
            rows.push(crate::linalg::vneg(a));
        }
        Cone::from_inequalities(self.n, &rows).expect("dimensions agree")
    }

    /// Relative volume of a face, normalized by the induced lattice of its
    /// direction space. Vertices count as volume 1.
    pub fn relative_volume(&self, face: &Face) -> Rational {
        relative_volume(self.n, &self.face_points(face))
    }

    pub fn volume(&self) -> Rational {
        relative_volume(self.n, &self.vertices)
    }

    /// Number of lattice points in `tP`.
    pub fn count_points(&self, t: u64) -> BigInt {
        let tr = Rational::from_integer(BigInt::from(t));
        let mut lo = zero_vec(self.n);
        let mut hi = zero_vec(self.n);
        for i in 0..self.n {
            lo[i] = self.vertices.iter().map(|v| &v[i] * &tr).min().unwrap().ceil();
            hi[i] = self.vertices.iter().map(|v| &v[i] * &tr).max().unwrap().floor();
        }
        let facets: Vec<(RatVec, Rational)> = self.facets.iter().map(|(a, b)| (a.clone(), b * &tr)).collect();
        let eqs: Vec<(RatVec, Rational)> = self.eqs.iter().map(|(a, b)| (a.clone(), b * &tr)).collect();
        let mut count = BigInt::zero();
        for_each_lattice_point(&lo, &hi, &mut |x| {
            if eqs.iter().all(|(a, b)| dot(a, x) == *b) && facets.iter().all(|(a, b)| dot(a, x) <= *b) {
                count += 1;
            }
        });
        count
    }
}

impl FaceLattice {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn top(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn of_dim(&self, d: usize) -> Vec<usize> {
        (0..self.faces.len()).filter(|&i| self.faces[i].dim == d).collect()
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        let fj: BTreeSet<usize> = self.faces[j].vertices.iter().copied().collect();
        self.faces[i].vertices.iter().all(|v| fj.contains(v))
    }

    fn index_of(&self, vs: &[usize]) -> Option<usize> {
        self.faces.iter().position(|f| f.vertices == vs)
    }

    /// The largest face contained in both (`None` for the empty face).
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        let fj: BTreeSet<usize> = self.faces[j].vertices.iter().copied().collect();
        let common: Vec<usize> = self.faces[i].vertices.iter().copied().filter(|v| fj.contains(v)).collect();
        if common.is_empty() {
            return None;
        }
        self.index_of(&common)
    }

    /// The smallest face containing both.
    pub fn join(&self, i: usize, j: usize) -> usize {
        (0..self.faces.len())
            .filter(|&k| self.le(i, k) && self.le(j, k))
            .min_by_key(|&k| (self.faces[k].dim, k))
            .expect("the polytope contains every face")
    }
}

/// Relative volume of `conv(points)` in the induced lattice of its direction
/// space; a single point has volume 1.
pub fn relative_volume(n: usize, points: &[RatVec]) -> Rational {
    let origin = points[0].clone();
    let diffs: Vec<RatVec> = points.iter().map(|p| vsub(p, &origin)).collect();
    let dirs = crate::linalg::independent_subset(&diffs);
    let d = dirs.len();
    if d == 0 {
        return Rational::one();
    }
    let basis = induced_lattice_basis(&GeometryContext::standard(n), &dirs).expect("lattice directions");
    let frame = Frame::new(origin, basis);
    let local: Vec<RatVec> = points.iter().map(|p| frame.coords(p)).collect();
    let mut cell = HCell::universe(d);
    for (a, b) in hull_facets(d, &local) {
        cell.push(Constraint::weak(a, b));
    }
    cell.bbox = crate::complex::BBox::from_points(&local);
    cell.volume().expect("bounded hull")
}

/// Facets `a·y <= b` of the convex hull of full-dimensional points in Rᵈ.
pub fn hull_facets(d: usize, points: &[RatVec]) -> Vec<(RatVec, Rational)> {
    let mut out: Vec<(RatVec, Rational)> = Vec::new();
    if d == 0 {
        return out;
    }
    for s in subsets(points.len(), d) {
        let base = &points[s[0]];
        let diffs: Vec<RatVec> = s[1..].iter().map(|&i| vsub(&points[i], base)).collect();
        let normal = if d == 1 {
            vec![Rational::one()]
        } else {
            if rank_of(d, &diffs) != d - 1 {
                continue;
            }
            RatMat::from_rows(&diffs).nullspace().remove(0)
        };
        let normal = primitive(&normal);
        let b = dot(&normal, base);
        let le = points.iter().all(|p| dot(&normal, p) <= b);
        let ge = points.iter().all(|p| dot(&normal, p) >= b);
        let cand = if le {
            Some((normal, b))
        } else if ge {
            Some((crate::linalg::vneg(&normal), -b))
        } else {
            None
        };
        if let Some(c) = cand {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Maps a functional on frame coordinates to an ambient functional whose
/// restriction to the frame's span agrees with it.
fn lift_functional(frame: &Frame, a: &[Rational]) -> RatVec {
    // y = P (x - o) with P the left inverse; a·y = (Pᵀ a)·(x - o)
    let n = frame.ambient_dim();
    let mut out = zero_vec(n);
    for (j, e) in (0..n).map(|j| (j, crate::linalg::unit_vec(n, j))) {
        let y = frame.coords(&crate::linalg::vadd(&frame.origin, &e));
        out[j] = dot(a, &y);
    }
    out
}

/// Calls `f` on every integer point of the box `[lo, hi]`.
pub fn for_each_lattice_point(lo: &[Rational], hi: &[Rational], f: &mut dyn FnMut(&RatVec)) {
    let n = lo.len();
    let lo: Vec<Rational> = lo.iter().map(|x| x.ceil()).collect();
    let hi: Vec<Rational> = hi.iter().map(|x| x.floor()).collect();
    if (0..n).any(|i| lo[i] > hi[i]) {
        return;
    }
    let mut x = lo.clone();
    loop {
        f(&x);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if x[i] < hi[i] {
                x[i] += Rational::one();
                break;
            }
            x[i] = lo[i].clone();
            i += 1;
        }
    }
}
