//! Finite unions of pairwise-disjoint half-open convex cells.
//!
//! A cell is an intersection of affine equalities and weak or strict affine
//! inequalities. Complexes are closed under intersection and difference:
//! removing a cell splits along each of its constraints with the strictness
//! flipped, so boundaries are always assigned to exactly one side.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    affine_dim, dot, format_rational, is_zero_vec, primitive_with_factor, rat, vadd, vneg, vscale,
    vsub, zero_vec, GeometryContext, RatMat, RatVec, Rational,
};

/// Cells with more inequalities than this get redundant ones stripped after
/// a difference operation.
const SIMPLIFY_FACTOR: usize = 3;

/// `normal · x <= rhs`, or `<` when `strict`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub normal: RatVec,
    pub rhs: Rational,
    pub strict: bool,
}

impl Constraint {
    pub fn new(normal: RatVec, rhs: Rational, strict: bool) -> Self {
        Constraint { normal, rhs, strict }
    }

    pub fn weak(normal: RatVec, rhs: Rational) -> Self {
        Self::new(normal, rhs, false)
    }

    pub fn strict(normal: RatVec, rhs: Rational) -> Self {
        Self::new(normal, rhs, true)
    }

    /// Same half-space with a primitive integer normal.
    pub fn normalized(&self) -> Self {
        if is_zero_vec(&self.normal) {
            return self.clone();
        }
        let (a, c) = primitive_with_factor(&self.normal);
        Constraint { normal: a, rhs: &self.rhs * &c, strict: self.strict }
    }

    /// The set-theoretic complement: `¬(a·x ≤ b)` is `-a·x < -b`.
    pub fn complement(&self) -> Self {
        Constraint { normal: vneg(&self.normal), rhs: -self.rhs.clone(), strict: !self.strict }
    }

    pub fn slack(&self, x: &[Rational]) -> Rational {
        &self.rhs - dot(&self.normal, x)
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let s = self.slack(x);
        if self.strict {
            s.is_positive()
        } else {
            !s.is_negative()
        }
    }

    /// The constraint describing `t + {x : self}`.
    pub fn translated(&self, t: &[Rational]) -> Self {
        Constraint {
            normal: self.normal.clone(),
            rhs: &self.rhs + dot(&self.normal, t),
            strict: self.strict,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.normal.iter().map(format_rational).collect();
        write!(
            f,
            "({})·x <= {} [{}]",
            a.join(", "),
            format_rational(&self.rhs),
            if self.strict { "strict" } else { "weak" }
        )
    }
}

/// `normal · x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    pub normal: RatVec,
    pub rhs: Rational,
}

impl Hyperplane {
    pub fn new(normal: RatVec, rhs: Rational) -> Self {
        Hyperplane { normal, rhs }
    }

    fn normalized(&self) -> Self {
        if is_zero_vec(&self.normal) {
            return self.clone();
        }
        let (mut a, mut c) = primitive_with_factor(&self.normal);
        if crate::linalg::lex_sign(&a) < 0 {
            a = vneg(&a);
            c = -c;
        }
        Hyperplane { normal: a, rhs: &self.rhs * &c }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        dot(&self.normal, x) == self.rhs
    }
}

/// Closed axis-aligned box. Cells carry one as a conservative enclosure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BBox {
    pub lo: RatVec,
    pub hi: RatVec,
}

impl BBox {
    pub fn new(lo: RatVec, hi: RatVec) -> Self {
        BBox { lo, hi }
    }

    pub fn cube(n: usize, r: &Rational) -> Self {
        BBox { lo: vec![-r.clone(); n], hi: vec![r.clone(); n] }
    }

    pub fn from_points(points: &[RatVec]) -> Option<Self> {
        let first = points.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in &points[1..] {
            for i in 0..p.len() {
                if p[i] < lo[i] {
                    lo[i] = p[i].clone();
                }
                if p[i] > hi[i] {
                    hi[i] = p[i].clone();
                }
            }
        }
        Some(BBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn overlaps(&self, o: &BBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= o.hi[i] && o.lo[i] <= self.hi[i])
    }

    pub fn intersect(&self, o: &BBox) -> Option<BBox> {
        if !self.overlaps(o) {
            return None;
        }
        let lo = (0..self.dim()).map(|i| self.lo[i].clone().max(o.lo[i].clone())).collect();
        let hi = (0..self.dim()).map(|i| self.hi[i].clone().min(o.hi[i].clone())).collect();
        Some(BBox { lo, hi })
    }

    pub fn union(&self, o: &BBox) -> BBox {
        let lo = (0..self.dim()).map(|i| self.lo[i].clone().min(o.lo[i].clone())).collect();
        let hi = (0..self.dim()).map(|i| self.hi[i].clone().max(o.hi[i].clone())).collect();
        BBox { lo, hi }
    }

    pub fn translated(&self, t: &[Rational]) -> BBox {
        BBox { lo: vadd(&self.lo, t), hi: vadd(&self.hi, t) }
    }

    pub fn contains_box(&self, o: &BBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= o.lo[i] && o.hi[i] <= self.hi[i])
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= x[i] && x[i] <= self.hi[i])
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> Rational {
        self.lo.iter().chain(&self.hi).map(|a| a.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Largest side length.
    pub fn extent(&self) -> Rational {
        (0..self.dim()).map(|i| &self.hi[i] - &self.lo[i]).max().unwrap_or_else(Rational::zero)
    }

    pub fn grown(&self, r: &Rational) -> BBox {
        BBox {
            lo: self.lo.iter().map(|a| a - r).collect(),
            hi: self.hi.iter().map(|a| a + r).collect(),
        }
    }

    /// The cell `lo <= x <= hi`.
    pub fn to_cell(&self) -> HCell {
        let n = self.dim();
        let mut c = HCell::universe(n);
        for i in 0..n {
            let e = crate::linalg::unit_vec(n, i);
            c.push(Constraint::weak(e.clone(), self.hi[i].clone()));
            c.push(Constraint::weak(vneg(&e), -self.lo[i].clone()));
        }
        c.bbox = Some(self.clone());
        c
    }
}

/// An affine coordinate system `y ↦ origin + basis · y` on a subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub origin: RatVec,
    /// Independent column vectors.
    pub basis: Vec<RatVec>,
    left_inverse: RatMat,
}

impl Frame {
    pub fn new(origin: RatVec, basis: Vec<RatVec>) -> Self {
        let n = origin.len();
        let left_inverse = if basis.is_empty() {
            RatMat::zeros(0, n)
        } else {
            let b = RatMat::from_cols(n, &basis);
            let btb = b.transpose().mul(&b);
            btb.inverse().expect("frame basis must be independent").mul(&b.transpose())
        };
        Frame { origin, basis, left_inverse }
    }

    pub fn linear(n: usize, basis: Vec<RatVec>) -> Self {
        Self::new(zero_vec(n), basis)
    }

    pub fn ambient(n: usize) -> Self {
        Self::linear(n, (0..n).map(|i| crate::linalg::unit_vec(n, i)).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.origin.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn point(&self, y: &[Rational]) -> RatVec {
        let mut x = self.origin.clone();
        for (b, c) in self.basis.iter().zip(y) {
            if !c.is_zero() {
                x = vadd(&x, &vscale(b, c));
            }
        }
        x
    }

    /// Coordinates of a point of the affine span.
    pub fn coords(&self, x: &[Rational]) -> RatVec {
        self.left_inverse.mul_vec(&vsub(x, &self.origin))
    }

    fn pull_functional(&self, a: &[Rational]) -> (RatVec, Rational) {
        let coeffs = self.basis.iter().map(|b| dot(a, b)).collect();
        (coeffs, dot(a, &self.origin))
    }

    pub fn pull_bbox(&self, b: &BBox) -> BBox {
        // interval image of y = P (x - origin)
        let k = self.dim();
        let n = self.ambient_dim();
        let mut lo = zero_vec(k);
        let mut hi = zero_vec(k);
        for i in 0..k {
            for j in 0..n {
                let p = &self.left_inverse[(i, j)];
                if p.is_zero() {
                    continue;
                }
                let a = p * (&b.lo[j] - &self.origin[j]);
                let c = p * (&b.hi[j] - &self.origin[j]);
                if a <= c {
                    lo[i] += a;
                    hi[i] += c;
                } else {
                    lo[i] += c;
                    hi[i] += a;
                }
            }
        }
        BBox { lo, hi }
    }
}

/// A half-open convex cell.
#[derive(Clone, Debug)]
pub struct HCell {
    dim: usize,
    pub eqs: Vec<Hyperplane>,
    pub ineqs: Vec<Constraint>,
    /// Conservative enclosing box (always present for bounded cells built by
    /// this crate).
    pub bbox: Option<BBox>,
}

impl HCell {
    pub fn universe(dim: usize) -> Self {
        HCell { dim, eqs: Vec::new(), ineqs: Vec::new(), bbox: None }
    }

    pub fn new(dim: usize, eqs: Vec<Hyperplane>, ineqs: Vec<Constraint>) -> Self {
        let mut c = Self::universe(dim);
        for e in eqs {
            c.push_eq(e);
        }
        for i in ineqs {
            c.push(i);
        }
        c
    }

    pub fn with_bbox(mut self, b: Option<BBox>) -> Self {
        self.bbox = b;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds an inequality, keeping only the tighter of two parallel ones.
    pub fn push(&mut self, c: Constraint) {
        assert_eq!(c.normal.len(), self.dim, "constraint dimension mismatch");
        let c = c.normalized();
        if is_zero_vec(&c.normal) && c.holds(&zero_vec(self.dim)) {
            return;
        }
        if let Some(old) = self.ineqs.iter_mut().find(|o| o.normal == c.normal) {
            if c.rhs < old.rhs || (c.rhs == old.rhs && c.strict) {
                *old = c;
            }
            return;
        }
        self.ineqs.push(c);
    }

    pub fn push_eq(&mut self, h: Hyperplane) {
        assert_eq!(h.normal.len(), self.dim, "equality dimension mismatch");
        let h = h.normalized();
        if is_zero_vec(&h.normal) && h.rhs.is_zero() {
            return;
        }
        if !self.eqs.contains(&h) {
            self.eqs.push(h);
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.eqs.iter().all(|h| h.holds(x)) && self.ineqs.iter().all(|c| c.holds(x))
    }

    pub fn is_empty(&self) -> bool {
        !fm_feasible(self.dim, &self.eqs, &self.ineqs)
    }

    pub fn intersect(&self, o: &HCell) -> Option<HCell> {
        let bbox = match (&self.bbox, &o.bbox) {
            (Some(a), Some(b)) => Some(a.intersect(b)?),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        let mut c = self.clone();
        c.bbox = bbox;
        for e in &o.eqs {
            c.push_eq(e.clone());
        }
        for i in &o.ineqs {
            c.push(i.clone());
        }
        Some(c)
    }

    pub fn translated(&self, t: &[Rational]) -> HCell {
        HCell {
            dim: self.dim,
            eqs: self
                .eqs
                .iter()
                .map(|h| Hyperplane::new(h.normal.clone(), &h.rhs + dot(&h.normal, t)))
                .collect(),
            ineqs: self.ineqs.iter().map(|c| c.translated(t)).collect(),
            bbox: self.bbox.as_ref().map(|b| b.translated(t)),
        }
    }

    /// The cell `self ∩ frame`, in frame coordinates.
    pub fn pullback(&self, frame: &Frame) -> HCell {
        let k = frame.dim();
        let mut c = HCell::universe(k);
        for h in &self.eqs {
            let (a, off) = frame.pull_functional(&h.normal);
            c.push_eq(Hyperplane::new(a, &h.rhs - off));
        }
        for i in &self.ineqs {
            let (a, off) = frame.pull_functional(&i.normal);
            c.push(Constraint::new(a, &i.rhs - off, i.strict));
        }
        c.bbox = self.bbox.as_ref().map(|b| frame.pull_bbox(b));
        c
    }

    /// Image of a cell given in frame coordinates, as an ambient cell
    /// (including the equalities of the frame's affine span).
    pub fn pushforward(&self, frame: &Frame) -> HCell {
        let n = frame.ambient_dim();
        let mut c = HCell::universe(n);
        // x in span: annihilator of the basis
        let ann = if frame.dim() == 0 {
            (0..n).map(|i| crate::linalg::unit_vec(n, i)).collect()
        } else {
            RatMat::from_rows(&frame.basis).nullspace()
        };
        for w in ann {
            let r = dot(&w, &frame.origin);
            c.push_eq(Hyperplane::new(w, r));
        }
        let p = &frame.left_inverse;
        let lift = |a: &RatVec| -> (RatVec, Rational) {
            let normal = p.tmul_vec(a);
            let off = dot(&normal, &frame.origin);
            (normal, off)
        };
        for h in &self.eqs {
            let (a, off) = lift(&h.normal);
            c.push_eq(Hyperplane::new(a, &h.rhs + off));
        }
        for i in &self.ineqs {
            let (a, off) = lift(&i.normal);
            c.push(Constraint::new(a, &i.rhs + off, i.strict));
        }
        if let Some(vs) = self.closure_vertices().ok().flatten() {
            let pts: Vec<RatVec> = vs.iter().map(|y| frame.point(y)).collect();
            c.bbox = BBox::from_points(&pts);
        }
        c
    }

    /// Vertices of the closure (strictness ignored). `Ok(None)` when the
    /// closure is empty; errors on unbounded cells.
    pub fn closure_vertices(&self) -> Result<Option<Vec<RatVec>>> {
        Ok(self.closure_polytope()?.map(|p| p.vertices_ambient()))
    }

    fn closure_polytope(&self) -> Result<Option<ClosurePolytope>> {
        if self.bbox.is_none() && !self.is_bounded() {
            return Err(Error::Unbounded);
        }
        Ok(ClosurePolytope::compute(self.dim, &self.eqs, &self.ineqs))
    }

    fn is_bounded(&self) -> bool {
        // recession cone {d : eq normals · d = 0, ineq normals · d <= 0} must be {0}
        let eqs: Vec<Hyperplane> =
            self.eqs.iter().map(|h| Hyperplane::new(h.normal.clone(), Rational::zero())).collect();
        let base: Vec<Constraint> =
            self.ineqs.iter().map(|c| Constraint::weak(c.normal.clone(), Rational::zero())).collect();
        for i in 0..self.dim {
            for s in [1, -1] {
                let mut rows = base.clone();
                let mut e = zero_vec(self.dim);
                e[i] = rat(-s);
                rows.push(Constraint::weak(e, rat(-1)));
                if fm_feasible(self.dim, &eqs, &rows) {
                    return false;
                }
            }
        }
        true
    }

    /// Exact bounding box of the closure; `None` if empty.
    pub fn exact_bbox(&self) -> Result<Option<BBox>> {
        if self.is_empty() {
            return Ok(None);
        }
        Ok(self.closure_vertices()?.and_then(|v| BBox::from_points(&v)))
    }

    /// Replaces the enclosing box by the exact one.
    pub fn tighten(&mut self) -> Result<()> {
        self.bbox = self.exact_bbox()?;
        Ok(())
    }

    /// Lebesgue volume of `self ∩ frame` in frame coordinates (strictness
    /// ignored). Zero when the slice is lower dimensional or empty.
    pub fn volume_in(&self, frame: &Frame) -> Result<Rational> {
        let local = self.pullback(frame);
        local.volume()
    }

    /// Volume in the cell's own coordinates.
    pub fn volume(&self) -> Result<Rational> {
        if self.is_empty() {
            return Ok(Rational::zero());
        }
        let Some(poly) = self.closure_polytope()? else {
            return Ok(Rational::zero());
        };
        Ok(poly.volume())
    }

    /// A point of the cell (centroid of the closure vertices, which lies in
    /// the relative interior).
    pub fn witness(&self) -> Option<RatVec> {
        if self.is_empty() {
            return None;
        }
        let verts = self.closure_vertices().ok()??;
        let k = rat(verts.len() as i64);
        let mut c = zero_vec(self.dim);
        for v in &verts {
            c = vadd(&c, v);
        }
        let c = vscale(&c, &k.recip());
        debug_assert!(self.contains(&c), "centroid witness outside its cell");
        Some(c)
    }

    /// Drops inequalities that do not change the point set.
    pub fn simplify(&mut self) {
        let mut i = self.ineqs.len();
        while i > 0 {
            i -= 1;
            let mut rest = self.ineqs.clone();
            let c = rest.remove(i);
            rest.push(c.complement());
            if !fm_feasible(self.dim, &self.eqs, &rest) {
                self.ineqs.remove(i);
            }
        }
    }

    /// `self \ other` as disjoint cells.
    pub fn minus(&self, other: &HCell) -> Vec<HCell> {
        if let (Some(a), Some(b)) = (&self.bbox, &other.bbox) {
            if !a.overlaps(b) {
                return vec![self.clone()];
            }
        }
        match self.intersect(other) {
            None => return vec![self.clone()],
            Some(c) if c.is_empty() => return vec![self.clone()],
            _ => {}
        }
        let mut cuts: Vec<Constraint> = Vec::new();
        for h in &other.eqs {
            cuts.push(Constraint::weak(h.normal.clone(), h.rhs.clone()));
            cuts.push(Constraint::weak(vneg(&h.normal), -h.rhs.clone()));
        }
        cuts.extend(other.ineqs.iter().cloned());
        let mut out = Vec::new();
        let mut acc = self.clone();
        for c in cuts {
            let mut piece = acc.clone();
            piece.push(c.complement());
            if piece.is_empty() {
                continue;
            }
            if piece.ineqs.len() > SIMPLIFY_FACTOR * self.dim + 2 {
                piece.simplify();
            }
            out.push(piece);
            acc.push(c);
        }
        out
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        for h in &self.eqs {
            let a: Vec<String> = h.normal.iter().map(format_rational).collect();
            s.push_str(&format!("({})·x = {}; ", a.join(", "), format_rational(&h.rhs)));
        }
        let parts: Vec<String> = self.ineqs.iter().map(ToString::to_string).collect();
        s.push_str(&parts.join("; "));
        s
    }
}

/// Closure of a cell as a bounded polytope in the parametrization of its
/// equality hull.
struct ClosurePolytope {
    origin: RatVec,
    dirs: Vec<RatVec>,
    /// Vertices in local coordinates.
    verts: Vec<RatVec>,
    /// For each (deduplicated) local inequality, the indices of tight vertices.
    incidence: Vec<Vec<usize>>,
}

impl ClosurePolytope {
    fn compute(dim: usize, eqs: &[Hyperplane], ineqs: &[Constraint]) -> Option<Self> {
        let (origin, dirs) = solve_affine(dim, eqs)?;
        let k = dirs.len();
        let frame = Frame::new(origin.clone(), dirs.clone());
        let mut rows: Vec<(RatVec, Rational)> = Vec::new();
        let mut seen: HashSet<(RatVec, Rational)> = HashSet::new();
        for c in ineqs {
            let (a, off) = frame.pull_functional(&c.normal);
            let b = &c.rhs - off;
            if is_zero_vec(&a) {
                if b.is_negative() {
                    return None;
                }
                continue;
            }
            let (a, f) = primitive_with_factor(&a);
            let b = b * f;
            if seen.insert((a.clone(), b.clone())) {
                rows.push((a, b));
            }
        }
        let verts = if k == 0 {
            vec![Vec::new()]
        } else {
            enumerate_vertices(k, &rows)
        };
        if verts.is_empty() {
            return None;
        }
        let incidence = rows
            .iter()
            .map(|(a, b)| (0..verts.len()).filter(|&i| dot(a, &verts[i]) == *b).collect())
            .collect();
        Some(ClosurePolytope { origin, dirs, verts, incidence })
    }

    fn vertices_ambient(&self) -> Vec<RatVec> {
        let frame = Frame::new(self.origin.clone(), self.dirs.clone());
        self.verts.iter().map(|y| frame.point(y)).collect()
    }

    /// Volume in local coordinates; zero unless full dimensional there.
    fn volume(&self) -> Rational {
        let k = self.dirs.len();
        if k == 0 {
            return Rational::one();
        }
        if affine_dim(&self.verts) < k as isize {
            return Rational::zero();
        }
        let all: Vec<usize> = (0..self.verts.len()).collect();
        let simplices = pulling_triangulation(&self.verts, &self.incidence, &all, k);
        let mut total = Rational::zero();
        for s in simplices {
            let rows: Vec<RatVec> = s[1..].iter().map(|&i| vsub(&self.verts[i], &self.verts[s[0]])).collect();
            total += RatMat::from_rows(&rows).det().abs();
        }
        let mut fact = Rational::one();
        for i in 2..=k {
            fact *= rat(i as i64);
        }
        total / fact
    }
}

/// Particular solution and direction basis of an affine equality system;
/// `None` if inconsistent.
fn solve_affine(dim: usize, eqs: &[Hyperplane]) -> Option<(RatVec, Vec<RatVec>)> {
    let eqs: Vec<&Hyperplane> = eqs.iter().filter(|h| !is_zero_vec(&h.normal) || !h.rhs.is_zero()).collect();
    if eqs.is_empty() {
        return Some((zero_vec(dim), (0..dim).map(|i| crate::linalg::unit_vec(dim, i)).collect()));
    }
    let mut rows: Vec<RatVec> = Vec::new();
    for h in &eqs {
        let mut r = h.normal.clone();
        r.push(h.rhs.clone());
        rows.push(r);
    }
    let (r, pivots) = RatMat::from_rows(&rows).rref();
    if pivots.contains(&dim) {
        return None;
    }
    let mut x0 = zero_vec(dim);
    for (i, &p) in pivots.iter().enumerate() {
        x0[p] = r[(i, dim)].clone();
    }
    let a = RatMat::from_rows(&eqs.iter().map(|h| h.normal.clone()).collect::<Vec<_>>());
    Some((x0, a.nullspace()))
}

/// Vertices of the bounded polyhedron `{y : a·y <= b}` in Rᵏ.
fn enumerate_vertices(k: usize, rows: &[(RatVec, Rational)]) -> Vec<RatVec> {
    let m = rows.len();
    let mut out: Vec<RatVec> = Vec::new();
    let mut seen: HashSet<RatVec> = HashSet::new();
    if m < k {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let a = RatMat::from_rows(&idx.iter().map(|&i| rows[i].0.clone()).collect::<Vec<_>>());
        if let Some(inv) = a.inverse() {
            let b: RatVec = idx.iter().map(|&i| rows[i].1.clone()).collect();
            let y = inv.mul_vec(&b);
            if rows.iter().all(|(a, b)| dot(a, &y) <= *b) && seen.insert(y.clone()) {
                out.push(y);
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 && idx[0] == m - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Pulling triangulation of the face spanned by `face` (vertex indices) of
/// dimension `d`; facets are found through the row incidences.
fn pulling_triangulation(
    verts: &[RatVec],
    incidence: &[Vec<usize>],
    face: &[usize],
    d: usize,
) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![face[0]]];
    }
    let apex = face[0];
    let face_set: HashSet<usize> = face.iter().copied().collect();
    let mut facets: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for inc in incidence {
        let sub: Vec<usize> = inc.iter().copied().filter(|i| face_set.contains(i)).collect();
        if sub.len() < d || sub.contains(&apex) || sub.len() == face.len() {
            continue;
        }
        if seen.contains(&sub) {
            continue;
        }
        let pts: Vec<RatVec> = sub.iter().map(|&i| verts[i].clone()).collect();
        if affine_dim(&pts) == d as isize - 1 {
            seen.insert(sub.clone());
            facets.push(sub);
        }
    }
    let mut out = Vec::new();
    for f in facets {
        for s in pulling_triangulation(verts, incidence, &f, d - 1) {
            let mut simplex = vec![apex];
            simplex.extend(s);
            out.push(simplex);
        }
    }
    out
}

/// Exact feasibility of a system of equalities and weak/strict inequalities
/// by Gaussian substitution followed by Fourier–Motzkin elimination.
pub fn fm_feasible(dim: usize, eqs: &[Hyperplane], ineqs: &[Constraint]) -> bool {
    let mut rows: Vec<(RatVec, Rational, bool)> =
        ineqs.iter().map(|c| (c.normal.clone(), c.rhs.clone(), c.strict)).collect();
    let mut pending: Vec<(RatVec, Rational)> = eqs.iter().map(|h| (h.normal.clone(), h.rhs.clone())).collect();
    while let Some((a, b)) = pending.pop() {
        let Some(j) = a.iter().position(|x| !x.is_zero()) else {
            if !b.is_zero() {
                return false;
            }
            continue;
        };
        let aj = a[j].clone();
        let substitute = |c: &mut RatVec, d: &mut Rational| {
            if c[j].is_zero() {
                return;
            }
            let f = &c[j] / &aj;
            for (ci, ai) in c.iter_mut().zip(&a) {
                if !ai.is_zero() {
                    *ci -= &f * ai;
                }
            }
            *d -= &f * &b;
        };
        for (c, d) in pending.iter_mut() {
            substitute(c, d);
        }
        for (c, d, _) in rows.iter_mut() {
            substitute(c, d);
        }
    }

    let mut rows = dedupe_rows(rows);
    loop {
        let Some(rows_ok) = rows.as_ref() else {
            return false;
        };
        // choose the variable with the fewest generated combinations
        let mut best: Option<(usize, usize)> = None;
        for j in 0..dim {
            let pos = rows_ok.iter().filter(|r| r.0[j].is_positive()).count();
            let neg = rows_ok.iter().filter(|r| r.0[j].is_negative()).count();
            if pos + neg == 0 {
                continue;
            }
            let cost = pos * neg;
            if best.is_none_or(|(_, c)| cost < c) {
                best = Some((j, cost));
            }
        }
        let Some((j, _)) = best else {
            return true;
        };
        let rows_ok = rows.take().unwrap();
        let mut next = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for r in rows_ok {
            if r.0[j].is_positive() {
                pos.push(r);
            } else if r.0[j].is_negative() {
                neg.push(r);
            } else {
                next.push(r);
            }
        }
        for p in &pos {
            for q in &neg {
                let fp = -q.0[j].clone();
                let fq = p.0[j].clone();
                let a: RatVec = p.0.iter().zip(&q.0).map(|(x, y)| x * &fp + y * &fq).collect();
                let b = &p.1 * &fp + &q.1 * &fq;
                next.push((a, b, p.2 || q.2));
            }
        }
        rows = dedupe_rows(next);
    }
}

/// Normalizes rows, drops satisfied constants and keeps the tightest of
/// parallel rows. `None` signals a violated constant row.
fn dedupe_rows(rows: Vec<(RatVec, Rational, bool)>) -> Option<Vec<(RatVec, Rational, bool)>> {
    let mut map: HashMap<RatVec, (Rational, bool)> = HashMap::with_capacity(rows.len());
    let mut order: Vec<RatVec> = Vec::new();
    for (a, b, strict) in rows {
        if is_zero_vec(&a) {
            if b.is_negative() || (b.is_zero() && strict) {
                return None;
            }
            continue;
        }
        let (a, f) = primitive_with_factor(&a);
        let b = b * f;
        match map.get_mut(&a) {
            Some(old) => {
                if b < old.0 || (b == old.0 && strict) {
                    *old = (b, strict);
                }
            }
            None => {
                order.push(a.clone());
                map.insert(a, (b, strict));
            }
        }
    }
    // opposite pairs: a·x <= b and -a·x <= c need b + c >= 0
    for a in &order {
        let na = vneg(a);
        if let (Some((b, s1)), Some((c, s2))) = (map.get(a), map.get(&na)) {
            let sum = b + c;
            if sum.is_negative() || (sum.is_zero() && (*s1 || *s2)) {
                return None;
            }
        }
    }
    Some(
        order
            .into_iter()
            .map(|a| {
                let (b, s) = map.remove(&a).unwrap();
                (a, b, s)
            })
            .collect(),
    )
}

/// A finite union of pairwise-disjoint half-open cells.
#[derive(Clone, Debug)]
pub struct HComplex {
    dim: usize,
    pub cells: Vec<HCell>,
}

impl HComplex {
    pub fn empty(dim: usize) -> Self {
        HComplex { dim, cells: Vec::new() }
    }

    pub fn from_cell(cell: HCell) -> Self {
        HComplex { dim: cell.dim, cells: vec![cell] }
    }

    /// Wraps cells the caller guarantees to be pairwise disjoint.
    pub fn from_cells(dim: usize, cells: Vec<HCell>) -> Self {
        HComplex { dim, cells }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(HCell::is_empty)
    }

    pub fn contains_point(&self, x: &[Rational]) -> bool {
        self.cells.iter().any(|c| c.contains(x))
    }

    pub fn intersect(&self, o: &HComplex) -> HComplex {
        assert_eq!(self.dim, o.dim, "complex dimension mismatch");
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &o.cells {
                if let Some(c) = a.intersect(b) {
                    if !c.is_empty() {
                        cells.push(c);
                    }
                }
            }
        }
        HComplex { dim: self.dim, cells }
    }

    pub fn intersect_cell(&self, cell: &HCell) -> HComplex {
        self.intersect(&HComplex::from_cell(cell.clone()))
    }

    pub fn subtract(&self, o: &HComplex) -> HComplex {
        assert_eq!(self.dim, o.dim, "complex dimension mismatch");
        let mut cells = Vec::new();
        for a in &self.cells {
            let mut parts = vec![a.clone()];
            for b in &o.cells {
                if parts.is_empty() {
                    break;
                }
                parts = parts.iter().flat_map(|p| p.minus(b)).collect();
            }
            cells.extend(parts);
        }
        HComplex { dim: self.dim, cells }
    }

    /// `self ∪ o` as a disjoint complex.
    pub fn union(&self, o: &HComplex) -> HComplex {
        let mut out = self.clone();
        out.cells.extend(o.subtract(self).cells);
        out
    }

    pub fn translated(&self, t: &[Rational]) -> HComplex {
        HComplex { dim: self.dim, cells: self.cells.iter().map(|c| c.translated(t)).collect() }
    }

    /// Removes empty cells and tightens every enclosing box.
    pub fn normalize(&mut self) -> Result<()> {
        let mut kept = Vec::with_capacity(self.cells.len());
        for mut c in std::mem::take(&mut self.cells) {
            if c.is_empty() {
                continue;
            }
            c.simplify();
            c.tighten()?;
            kept.push(c);
        }
        self.cells = kept;
        Ok(())
    }

    /// Volume of `self ∩ frame` in frame coordinates.
    pub fn volume_in(&self, frame: &Frame) -> Result<Rational> {
        let mut total = Rational::zero();
        for c in &self.cells {
            total += c.volume_in(frame)?;
        }
        Ok(total)
    }

    /// Volume normalized by a lattice: `lattice` holds basis vectors of the
    /// normalization lattice, whose linear span is the measured subspace.
    pub fn volume(&self, lattice: &[RatVec]) -> Result<Rational> {
        self.volume_in(&Frame::linear(self.dim, lattice.to_vec()))
    }

    /// `self ∩ frame` in frame coordinates.
    pub fn slice(&self, frame: &Frame) -> HComplex {
        let cells =
            self.cells.iter().map(|c| c.pullback(frame)).filter(|c| !c.is_empty()).collect();
        HComplex { dim: frame.dim(), cells }
    }

    /// Exact bounding box of the union; `None` when empty.
    pub fn bbox(&self) -> Result<Option<BBox>> {
        let mut acc: Option<BBox> = None;
        for c in &self.cells {
            if let Some(b) = c.exact_bbox()? {
                acc = Some(match acc {
                    Some(a) => a.union(&b),
                    None => b,
                });
            }
        }
        Ok(acc)
    }

    /// Union of the (conservative) enclosing boxes of the cells.
    pub fn loose_bbox(&self) -> Option<BBox> {
        let mut acc: Option<BBox> = None;
        for c in &self.cells {
            let b = c.bbox.clone()?;
            acc = Some(match acc {
                Some(a) => a.union(&b),
                None => b,
            });
        }
        acc
    }

    /// Squared G-radius: the largest ⟨v, v⟩ over closure vertices.
    pub fn bounding_radius_sq(&self, ctx: &GeometryContext) -> Result<Rational> {
        let mut best = Rational::zero();
        for c in &self.cells {
            if c.is_empty() {
                continue;
            }
            for v in c.closure_vertices()?.unwrap_or_default() {
                let r = ctx.norm_sq(&v);
                if r > best {
                    best = r;
                }
            }
        }
        Ok(best)
    }

    pub fn witness(&self) -> Option<RatVec> {
        self.cells.iter().find_map(HCell::witness)
    }

    /// One cell per line, constraints as `a·x <= b [strict|weak]`.
    pub fn dump(&self) -> String {
        self.cells.iter().map(|c| c.dump() + "\n").collect()
    }
}

/// Result of a strict tiling check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingVerdict {
    pub ok: bool,
    pub failure: Option<TilingFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TilingFailure {
    /// Point lying in pieces `i` and `j`.
    Overlap { i: usize, j: usize, witness: RatVec },
    /// Point of the target covered by no piece.
    Uncovered { witness: RatVec },
    /// Point of piece `i` outside the target.
    Outside { i: usize, witness: RatVec },
}

impl TilingFailure {
    pub fn witness(&self) -> &RatVec {
        match self {
            TilingFailure::Overlap { witness, .. }
            | TilingFailure::Uncovered { witness }
            | TilingFailure::Outside { witness, .. } => witness,
        }
    }
}

/// Checks that the pieces are pairwise disjoint and that their union equals
/// the target.
pub fn verify_strict_tiling(pieces: &[HComplex], target: &HComplex) -> TilingVerdict {
    let fail = |f| TilingVerdict { ok: false, failure: Some(f) };
    let boxes: Vec<Option<BBox>> = pieces.iter().map(HComplex::loose_bbox).collect();
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            if let (Some(a), Some(b)) = (&boxes[i], &boxes[j]) {
                if !a.overlaps(b) {
                    continue;
                }
            }
            let common = pieces[i].intersect(&pieces[j]);
            if let Some(w) = common.witness() {
                return fail(TilingFailure::Overlap { i, j, witness: w });
            }
        }
    }
    let target_box = target.loose_bbox();
    for (i, p) in pieces.iter().enumerate() {
        let outside = p.subtract(target);
        if let Some(w) = outside.witness() {
            return fail(TilingFailure::Outside { i, witness: w });
        }
    }
    let mut rest = target.clone();
    for (p, b) in pieces.iter().zip(&boxes) {
        if let (Some(b), Some(t)) = (b, &target_box) {
            if !b.overlaps(t) {
                continue;
            }
        }
        rest = rest.subtract(p);
    }
    if let Some(w) = rest.witness() {
        return fail(TilingFailure::Uncovered { witness: w });
    }
    TilingVerdict { ok: true, failure: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ratio, rvec};

    fn interval(lo: Rational, lo_strict: bool, hi: Rational, hi_strict: bool) -> HCell {
        let mut c = HCell::universe(1);
        c.push(Constraint::new(rvec(&[1]), hi.clone(), hi_strict));
        c.push(Constraint::new(rvec(&[-1]), -lo.clone(), lo_strict));
        c.bbox = Some(BBox::new(vec![lo], vec![hi]));
        c
    }

    /// `[lo, hi)` boxes in the plane.
    fn half_open_box(lo: &[Rational], hi: &[Rational]) -> HCell {
        let n = lo.len();
        let mut c = HCell::universe(n);
        for i in 0..n {
            let e = crate::linalg::unit_vec(n, i);
            c.push(Constraint::strict(e.clone(), hi[i].clone()));
            c.push(Constraint::weak(vneg(&e), -lo[i].clone()));
        }
        c.bbox = Some(BBox::new(lo.to_vec(), hi.to_vec()));
        c
    }

    fn unit_square() -> HCell {
        half_open_box(&rvec(&[0, 0]), &rvec(&[1, 1]))
    }

    #[test]
    fn emptiness_examples() {
        let mut c = HCell::universe(1);
        c.push(Constraint::strict(rvec(&[1]), rat(0)));
        c.push(Constraint::weak(rvec(&[-1]), rat(0)));
        assert!(c.is_empty());
        let mut c = HCell::universe(1);
        c.push(Constraint::weak(rvec(&[1]), rat(1)));
        c.push(Constraint::weak(rvec(&[-1]), rat(-1)));
        assert!(!c.is_empty());
        let mut c = HCell::universe(1);
        c.push(Constraint::strict(rvec(&[1]), rat(1)));
        c.push(Constraint::weak(rvec(&[-1]), rat(-1)));
        assert!(c.is_empty());
    }

    #[test]
    fn fm_handles_strictness_after_elimination() {
        // x < y, y < x + 0 is empty; x < y, y <= x + 1 is not
        let mut c = HCell::universe(2);
        c.push(Constraint::strict(rvec(&[1, -1]), rat(0)));
        c.push(Constraint::weak(rvec(&[-1, 1]), rat(0)));
        assert!(c.is_empty());
        let mut c = HCell::universe(2);
        c.push(Constraint::strict(rvec(&[1, -1]), rat(0)));
        c.push(Constraint::weak(rvec(&[-1, 1]), rat(1)));
        assert!(!c.is_empty());
    }

    #[test]
    fn intersections() {
        let a = HComplex::from_cell(unit_square());
        let full = HComplex::from_cell(HCell::universe(2));
        let r = a.intersect(&full);
        assert_eq!(r.volume(&[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), rat(1));
        let far = HComplex::from_cell(half_open_box(&rvec(&[5, 5]), &rvec(&[6, 6])));
        assert!(a.intersect(&far).is_empty());
        let b = HComplex::from_cell(half_open_box(
            &[ratio(1, 2), ratio(1, 2)],
            &[ratio(3, 2), ratio(3, 2)],
        ));
        let r = a.intersect(&b);
        assert_eq!(r.volume(&[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), ratio(1, 4));
        assert!(r.contains_point(&[ratio(1, 2), ratio(1, 2)]));
        assert!(!r.contains_point(&[rat(1), ratio(3, 4)]));
    }

    #[test]
    fn differences() {
        let a = HComplex::from_cell(unit_square());
        assert_eq!(a.subtract(&HComplex::empty(2)).len(), 1);
        let two = HComplex::from_cell(interval(rat(0), false, rat(2), true));
        let one = HComplex::from_cell(interval(rat(0), false, rat(1), true));
        let d = two.subtract(&one);
        assert!(d.contains_point(&[rat(1)]));
        assert!(!d.contains_point(&[ratio(1, 2)]));
        assert!(!d.contains_point(&[rat(2)]));
        assert_eq!(d.volume(&[rvec(&[1])]).unwrap(), rat(1));

        // removing the closed bottom edge keeps the measure and flips a tag
        let mut seg = HCell::universe(2);
        seg.push_eq(Hyperplane::new(rvec(&[0, 1]), rat(0)));
        seg.push(Constraint::weak(rvec(&[1, 0]), rat(1)));
        seg.push(Constraint::weak(rvec(&[-1, 0]), rat(0)));
        seg.bbox = Some(BBox::new(rvec(&[0, 0]), rvec(&[1, 0])));
        let d = a.subtract(&HComplex::from_cell(seg));
        assert!(!d.contains_point(&[ratio(1, 2), rat(0)]));
        assert!(d.contains_point(&[rat(0), ratio(1, 2)]));
        assert!(!d.contains_point(&[rat(1), ratio(1, 2)]));
        assert_eq!(d.volume(&[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), rat(1));
    }

    #[test]
    fn volumes() {
        let a = HComplex::from_cell(half_open_box(&rvec(&[0, 0, 0]), &rvec(&[1, 1, 1])));
        let basis3: Vec<RatVec> = (0..3).map(|i| crate::linalg::unit_vec(3, i)).collect();
        assert_eq!(a.volume(&basis3).unwrap(), rat(1));
        let mut tri = HCell::universe(2);
        tri.push(Constraint::weak(rvec(&[-1, 0]), rat(0)));
        tri.push(Constraint::weak(rvec(&[0, -1]), rat(0)));
        tri.push(Constraint::weak(rvec(&[1, 1]), rat(1)));
        let tri = HComplex::from_cell(tri.with_bbox(Some(BBox::new(rvec(&[0, 0]), rvec(&[1, 1])))));
        assert_eq!(tri.volume(&[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), ratio(1, 2));
        // normalization by a sublattice basis
        assert_eq!(tri.volume(&[rvec(&[2, 0]), rvec(&[0, 1])]).unwrap(), ratio(1, 4));
    }

    #[test]
    fn slices() {
        let a = HComplex::from_cell(unit_square());
        let xaxis = Frame::linear(2, vec![rvec(&[1, 0])]);
        let s = a.slice(&xaxis);
        assert!(s.contains_point(&[rat(0)]));
        assert!(!s.contains_point(&[rat(1)]));
        assert_eq!(s.volume(&[rvec(&[1])]).unwrap(), rat(1));

        let mut open_bottom = unit_square();
        open_bottom.push(Constraint::strict(rvec(&[0, -1]), rat(0)));
        let s = HComplex::from_cell(open_bottom).slice(&xaxis);
        assert!(s.is_empty());

        let whole = a.slice(&Frame::ambient(2));
        assert_eq!(whole.volume(&[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), rat(1));
    }

    #[test]
    fn membership() {
        let a = HComplex::from_cell(unit_square());
        assert!(a.contains_point(&rvec(&[0, 0])));
        assert!(!a.contains_point(&rvec(&[1, 0])));
        assert!(a.contains_point(&[ratio(1, 2), ratio(1, 2)]));
    }

    #[test]
    fn tiling_checks() {
        let target = HComplex::from_cell(interval(rat(0), false, rat(2), true));
        let pieces = vec![
            HComplex::from_cell(interval(rat(0), false, rat(1), true)),
            HComplex::from_cell(interval(rat(1), false, rat(2), true)),
        ];
        assert!(verify_strict_tiling(&pieces, &target).ok);

        let closed = HComplex::from_cell(interval(rat(0), false, rat(2), false));
        let pieces = vec![
            HComplex::from_cell(interval(rat(0), false, rat(1), false)),
            HComplex::from_cell(interval(rat(1), false, rat(2), true)),
        ];
        let v = verify_strict_tiling(&pieces, &closed);
        assert!(!v.ok);
        assert_eq!(v.failure.unwrap().witness(), &rvec(&[1]));
    }

    #[test]
    fn radii() {
        let ctx = GeometryContext::standard(2);
        let a = HComplex::from_cell(unit_square());
        assert_eq!(a.bounding_radius_sq(&ctx).unwrap(), rat(2));
        let sym = HComplex::from_cell(half_open_box(&rvec(&[-1, -1]), &rvec(&[1, 1])));
        assert_eq!(sym.bounding_radius_sq(&ctx).unwrap(), rat(2));
        let mut origin = HCell::universe(2);
        origin.push_eq(Hyperplane::new(rvec(&[1, 0]), rat(0)));
        origin.push_eq(Hyperplane::new(rvec(&[0, 1]), rat(0)));
        assert_eq!(HComplex::from_cell(origin).bounding_radius_sq(&ctx).unwrap(), rat(0));
    }

    #[test]
    fn unbounded_volume_is_an_error() {
        let mut half = HCell::universe(2);
        half.push(Constraint::weak(rvec(&[1, 0]), rat(0)));
        assert!(matches!(half.volume(), Err(Error::Unbounded)));
    }

    #[test]
    fn dump_format() {
        let s = HComplex::from_cell(unit_square()).dump();
        assert!(s.contains("(1, 0)·x <= 1 [strict]"));
        assert!(s.contains("(-1, 0)·x <= 0 [weak]"));
    }
}
