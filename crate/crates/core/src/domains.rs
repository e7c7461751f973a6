//! Half-open fundamental domains of induced sublattices.
//!
//! A domain lives in the coordinates of a canonical basis of its sublattice,
//! where the lattice is Zᵏ and the inner product has Gram matrix BᵀGB.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::complex::{verify_strict_tiling, BBox, Constraint, Frame, HCell, HComplex, TilingVerdict};
use crate::error::{Error, Result};
use crate::linalg::{
    ceil_sqrt, dot, format_rational, int_to_rat, lex_sign, size_reduce, unit_vec, vadd, zero_vec,
    GeometryContext, RatMat, RatVec, Rational,
};
use crate::polytope::for_each_lattice_point;

const MAX_CERTIFY_ROUNDS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Voronoi,
    Box,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Voronoi => write!(f, "voronoi"),
            DomainKind::Box => write!(f, "box"),
        }
    }
}

/// How domains are chosen for every sublattice.
///
/// The optional shift is an ambient vector; the domain of a sublattice `L`
/// is translated by the G-orthogonal projection of the shift onto `span(L)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DomainPolicy {
    pub kind: DomainKind,
    pub shift: Option<RatVec>,
}

impl DomainPolicy {
    pub fn voronoi() -> Self {
        DomainPolicy { kind: DomainKind::Voronoi, shift: None }
    }

    pub fn boxed() -> Self {
        DomainPolicy { kind: DomainKind::Box, shift: None }
    }

    pub fn shifted(kind: DomainKind, shift: RatVec) -> Self {
        DomainPolicy { kind, shift: Some(shift) }
    }

    /// The policy induced on a subspace with the given lattice basis
    /// (ambient columns): the shift is projected and expressed in that basis.
    pub fn restrict(&self, ctx: &GeometryContext, basis: &[RatVec]) -> DomainPolicy {
        let shift = self.shift.as_ref().map(|s| projection_coords(ctx, basis, s));
        DomainPolicy { kind: self.kind, shift }
    }

    pub fn label(&self) -> String {
        match &self.shift {
            None => self.kind.to_string(),
            Some(s) => {
                let parts: Vec<String> = s.iter().map(format_rational).collect();
                format!("shifted({}, [{}])", self.kind, parts.join(", "))
            }
        }
    }
}

impl Default for DomainPolicy {
    fn default() -> Self {
        Self::voronoi()
    }
}

/// Coordinates, in the given basis, of the G-orthogonal projection of `x`
/// onto the span of the basis: `(BᵀGB)⁻¹ BᵀG x`.
pub fn projection_coords(ctx: &GeometryContext, basis: &[RatVec], x: &[Rational]) -> RatVec {
    if basis.is_empty() {
        return Vec::new();
    }
    projection_matrix(ctx, basis).mul_vec(x)
}

/// The matrix `(BᵀGB)⁻¹ BᵀG`.
pub fn projection_matrix(ctx: &GeometryContext, basis: &[RatVec]) -> RatMat {
    let b = RatMat::from_cols(ctx.n, basis);
    let btg = b.transpose().mul(&ctx.gram);
    btg.mul(&b).inverse().expect("independent basis").mul(&btg)
}

/// A half-open fundamental domain of a sublattice.
#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    /// Ambient basis vectors of the sublattice.
    pub basis: Vec<RatVec>,
    /// Gram matrix of the sublattice basis.
    pub gram: RatMat,
    /// The cell in basis coordinates (translates by Zᵏ tile Rᵏ).
    pub local: HComplex,
    /// Applied shift in basis coordinates.
    pub shift: RatVec,
    pub contains_zero: bool,
    ambient: HComplex,
    n: usize,
}

impl FundamentalDomain {
    fn from_local(ctx: &GeometryContext, basis: Vec<RatVec>, gram: RatMat, mut local: HComplex, shift: RatVec) -> Result<Self> {
        local.normalize()?;
        let k = basis.len();
        let contains_zero = local.contains_point(&zero_vec(k));
        let mut d =
            FundamentalDomain { basis, gram, local, shift, contains_zero, ambient: HComplex::empty(ctx.n), n: ctx.n };
        d.ambient = d.push_to_ambient(&d.local);
        Ok(d)
    }

    fn push_to_ambient(&self, local: &HComplex) -> HComplex {
        let frame = Frame::linear(self.n, self.basis.clone());
        if self.basis.is_empty() {
            // the origin
            return HComplex::from_cell(HCell::universe(0).pushforward(&frame));
        }
        HComplex::from_cells(self.n, local.cells.iter().map(|c| c.pushforward(&frame)).collect())
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// The cell in ambient coordinates.
    pub fn ambient(&self) -> &HComplex {
        &self.ambient
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.ambient.contains_point(x)
    }

    /// Volume normalized by the sublattice (1 for a valid domain).
    pub fn volume(&self) -> Result<Rational> {
        if self.rank() == 0 {
            return Ok(Rational::one());
        }
        self.local.volume_in(&Frame::ambient(self.rank()))
    }

    /// The set `T + span(B)^⊥` (G-orthogonal complement), as cells.
    pub fn strip(&self, ctx: &GeometryContext) -> Vec<HCell> {
        let k = self.rank();
        if k == 0 {
            return vec![HCell::universe(ctx.n)];
        }
        let q = projection_matrix(ctx, &self.basis);
        self.local
            .cells
            .iter()
            .map(|c| {
                let mut s = HCell::universe(ctx.n);
                for h in &c.eqs {
                    s.push_eq(crate::complex::Hyperplane::new(q.tmul_vec(&h.normal), h.rhs.clone()));
                }
                for i in &c.ineqs {
                    s.push(Constraint::new(q.tmul_vec(&i.normal), i.rhs.clone(), i.strict));
                }
                s
            })
            .collect()
    }

    /// Exact bounding box of the ambient cell.
    pub fn ambient_bbox(&self) -> BBox {
        self.ambient.loose_bbox().expect("bounded domain")
    }

    /// Checks that the Zᵏ-translates of the local cell strictly tile the
    /// closed cube `[-r, r]ᵏ`.
    pub fn check_tiling(&self, r: i64) -> TilingVerdict {
        let k = self.rank();
        if k == 0 {
            return TilingVerdict { ok: true, failure: None };
        }
        let rr = Rational::from_integer(r.into());
        let target = HComplex::from_cell(BBox::cube(k, &rr).to_cell());
        let reach = self.local.loose_bbox().map(|b| b.max_abs()).unwrap_or_else(Rational::zero);
        let span = (&rr + reach).ceil() + Rational::one();
        let mut pieces = Vec::new();
        for_each_lattice_point(&vec![-span.clone(); k], &vec![span.clone(); k], &mut |z| {
            let t = self.local.translated(z).intersect(&target);
            if !t.is_empty() {
                pieces.push(t);
            }
        });
        verify_strict_tiling(&pieces, &target)
    }
}

/// Half-open Voronoi cell: tied points go to the lexicographically largest
/// nearest lattice point.
pub fn voronoi_cell(ctx: &GeometryContext, basis: &[RatVec]) -> Result<FundamentalDomain> {
    let k = basis.len();
    let gram = sub_gram(ctx, basis);
    if k == 0 {
        return FundamentalDomain::from_local(ctx, Vec::new(), gram, HComplex::from_cell(HCell::universe(0)), Vec::new());
    }
    let ip = |x: &RatVec, y: &RatVec| dot(x, &gram.mul_vec(y));
    let ident: Vec<RatVec> = (0..k).map(|i| unit_vec(k, i)).collect();
    let reduced = size_reduce(&gram, &ident);
    let max_norm = reduced.iter().map(|b| ip(b, b)).max().unwrap();
    let ginv = gram.inverse().expect("positive definite");
    let constraint_for = |c: &RatVec| {
        let normal: RatVec = gram.mul_vec(c).iter().map(|x| x * Rational::from_integer(2.into())).collect();
        Constraint::new(normal, ip(c, c), lex_sign(c) > 0)
    };

    let mut radius = max_norm * Rational::from_integer(4.into());
    for _ in 0..MAX_CERTIFY_ROUNDS {
        // candidates c ≠ 0 with cᵀHc <= radius; |c_i| <= sqrt(radius · H⁻¹_ii)
        let bounds: Vec<Rational> = (0..k).map(|i| int_to_rat(&ceil_sqrt(&(&radius * &ginv[(i, i)])))).collect();
        let lo: Vec<Rational> = bounds.iter().map(|b| -b.clone()).collect();
        let mut cands: Vec<RatVec> = Vec::new();
        for_each_lattice_point(&lo, &bounds, &mut |c| {
            if !crate::linalg::is_zero_vec(c) && ip(c, c) <= radius {
                cands.push(c.clone());
            }
        });
        // start from the reduced basis parallelotope, then add every candidate
        // that cuts the cell or touches it with a strict tag
        let mut cell = HCell::universe(k);
        for b in &reduced {
            cell.push(constraint_for(b));
            cell.push(constraint_for(&crate::linalg::vneg(b)));
        }
        let mut used = vec![false; cands.len()];
        loop {
            let verts = cell.closure_vertices()?.expect("nonempty cell");
            let mut added = false;
            for (i, c) in cands.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let con = constraint_for(c);
                let worst = verts.iter().map(|v| dot(&con.normal, v)).max().unwrap();
                if worst > con.rhs || (worst == con.rhs && con.strict) {
                    cell.push(con);
                    used[i] = true;
                    added = true;
                }
            }
            if !added {
                break;
            }
        }
        cell.simplify();
        cell.tighten()?;
        let local = HComplex::from_cell(cell);
        if local.volume_in(&Frame::ambient(k))? == Rational::one() {
            return FundamentalDomain::from_local(ctx, basis.to_vec(), gram, local, zero_vec(k));
        }
        radius *= Rational::from_integer(2.into());
    }
    Err(Error::Resource("Voronoi cell certification did not converge".into()))
}

/// The half-open parallelotope `{Σ λ_i b_i : 0 <= λ_i < 1}`.
pub fn box_cell(ctx: &GeometryContext, basis: &[RatVec]) -> Result<FundamentalDomain> {
    let k = basis.len();
    let gram = sub_gram(ctx, basis);
    let mut cell = HCell::universe(k);
    for i in 0..k {
        let e = unit_vec(k, i);
        cell.push(Constraint::strict(e.clone(), Rational::one()));
        cell.push(Constraint::weak(crate::linalg::vneg(&e), Rational::zero()));
    }
    cell.bbox = Some(BBox::new(zero_vec(k), vec![Rational::one(); k]));
    FundamentalDomain::from_local(ctx, basis.to_vec(), gram, HComplex::from_cell(cell), zero_vec(k))
}

/// Translates a domain by `s` (basis coordinates).
pub fn shift_cell(ctx: &GeometryContext, d: &FundamentalDomain, s: &[Rational]) -> Result<FundamentalDomain> {
    if s.len() != d.rank() {
        return Err(Error::Dimension { expected: d.rank(), found: s.len() });
    }
    let local = d.local.translated(s);
    FundamentalDomain::from_local(ctx, d.basis.clone(), d.gram.clone(), local, vadd(&d.shift, s))
}

fn sub_gram(ctx: &GeometryContext, basis: &[RatVec]) -> RatMat {
    if basis.is_empty() {
        return RatMat::zeros(0, 0);
    }
    let b = RatMat::from_cols(ctx.n, basis);
    b.transpose().mul(&ctx.gram).mul(&b)
}

/// Memoized domains for one context and policy, keyed by canonical basis.
#[derive(Debug)]
pub struct DomainCache {
    pub ctx: GeometryContext,
    pub policy: DomainPolicy,
    map: HashMap<Vec<RatVec>, Arc<FundamentalDomain>>,
}

impl DomainCache {
    pub fn new(ctx: GeometryContext, policy: DomainPolicy) -> Self {
        DomainCache { ctx, policy, map: HashMap::new() }
    }

    /// Domain of the sublattice with the given canonical basis.
    pub fn domain_for(&mut self, basis: &[RatVec]) -> Result<Arc<FundamentalDomain>> {
        if let Some(d) = self.map.get(basis) {
            return Ok(d.clone());
        }
        let base = match self.policy.kind {
            DomainKind::Voronoi => voronoi_cell(&self.ctx, basis)?,
            DomainKind::Box => box_cell(&self.ctx, basis)?,
        };
        let d = match &self.policy.shift {
            Some(s) if !basis.is_empty() => {
                let local_shift = projection_coords(&self.ctx, basis, s);
                if local_shift.iter().all(Zero::is_zero) {
                    base
                } else {
                    shift_cell(&self.ctx, &base, &local_shift)?
                }
            }
            _ => base,
        };
        let d = Arc::new(d);
        self.map.insert(basis.to_vec(), d.clone());
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domains(&self) -> impl Iterator<Item = &Arc<FundamentalDomain>> {
        self.map.values()
    }
}
