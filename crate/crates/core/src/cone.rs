//! Rational polyhedral cones with both descriptions and their face lattices.
//!
//! Dimensions are small (n <= 4), so rays and facets are found by
//! enumerating tight subsystems instead of an incremental double description.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::complex::{Constraint, HCell, Hyperplane};
use crate::error::{Error, Result};
use crate::linalg::{
    dot, format_rational, independent_subset, is_zero_vec, primitive, rank_of, rat, vneg,
    zero_vec, GeometryContext, RatMat, RatVec, Rational,
};

/// Sorted primitive rays of a pointed cone; equal cones have equal keys.
pub type ConeKey = Vec<RatVec>;

/// A rational cone `cone(rays) + span(lineality)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cone {
    n: usize,
    /// Primitive integer extreme rays modulo the lineality space, sorted.
    rays: Vec<RatVec>,
    /// Primitive integer basis of the lineality space (HNF-canonical).
    lineality: Vec<RatVec>,
}

impl Cone {
    /// The trivial cone `{0}`.
    pub fn trivial(n: usize) -> Self {
        Cone { n, rays: Vec::new(), lineality: Vec::new() }
    }

    /// The cone generated by the given vectors (zero vectors ignored).
    pub fn from_generators(n: usize, gens: &[RatVec]) -> Result<Self> {
        for g in gens {
            if g.len() != n {
                return Err(Error::Dimension { expected: n, found: g.len() });
            }
        }
        let gens: Vec<RatVec> = gens.iter().filter(|g| !is_zero_vec(g)).map(|g| primitive(g)).collect();
        // generators lying in a positive dependency span the lineality space
        let mut lin_gens = Vec::new();
        for i in 0..gens.len() {
            if in_positive_dependency(&gens, i) {
                lin_gens.push(gens[i].clone());
            }
        }
        let lineality = lattice_span(n, &lin_gens);
        // project the rest onto the standard complement of the lineality space
        let proj = std_projector(n, &lineality);
        let mut cand: Vec<RatVec> = Vec::new();
        for g in &gens {
            let p = proj.mul_vec(g);
            if is_zero_vec(&p) {
                continue;
            }
            let p = primitive(&p);
            if !cand.contains(&p) {
                cand.push(p);
            }
        }
        // drop redundant generators
        let mut rays: Vec<RatVec> = Vec::new();
        for i in 0..cand.len() {
            let others: Vec<RatVec> = cand.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c.clone()).collect();
            if !in_cone(&others, &cand[i]) {
                rays.push(cand[i].clone());
            }
        }
        rays.sort();
        Ok(Cone { n, rays, lineality })
    }

    /// The cone `{x : a·x <= 0 for every row a}`.
    pub fn from_inequalities(n: usize, rows: &[RatVec]) -> Result<Self> {
        for r in rows {
            if r.len() != n {
                return Err(Error::Dimension { expected: n, found: r.len() });
            }
        }
        let rows: Vec<RatVec> = rows.iter().filter(|r| !is_zero_vec(r)).cloned().collect();
        let lin = if rows.is_empty() {
            (0..n).map(|i| crate::linalg::unit_vec(n, i)).collect()
        } else {
            RatMat::from_rows(&rows).nullspace()
        };
        let lineality = lattice_span(n, &lin);
        let w = independent_subset(&rows);
        let d = w.len();
        let mut rays: Vec<RatVec> = Vec::new();
        if d > 0 {
            for subset in subsets(rows.len(), d - 1) {
                let mut eqs: Vec<RatVec> = subset.iter().map(|&i| rows[i].clone()).collect();
                eqs.extend(lineality.iter().cloned());
                if rank_of(n, &eqs) != n - 1 {
                    continue;
                }
                let dir = if eqs.is_empty() {
                    crate::linalg::unit_vec(n, 0)
                } else {
                    RatMat::from_rows(&eqs).nullspace().remove(0)
                };
                for cand in [dir.clone(), vneg(&dir)] {
                    if rows.iter().all(|a| !dot(a, &cand).is_positive()) {
                        let p = primitive(&cand);
                        if !rays.contains(&p) {
                            rays.push(p);
                        }
                    }
                }
            }
        }
        rays.sort();
        Ok(Cone { n, rays, lineality })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn rays(&self) -> &[RatVec] {
        &self.rays
    }

    pub fn lineality(&self) -> &[RatVec] {
        &self.lineality
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    pub fn dim(&self) -> usize {
        let mut all = self.rays.clone();
        all.extend(self.lineality.iter().cloned());
        rank_of(self.n, &all)
    }

    pub fn key(&self) -> ConeKey {
        self.rays.clone()
    }

    /// Basis of `span(C)`.
    pub fn span(&self) -> Vec<RatVec> {
        let mut all = self.rays.clone();
        all.extend(self.lineality.iter().cloned());
        independent_subset(&all)
    }

    /// Facet normals `a` with `a·x <= 0` on the cone (standard pairing),
    /// together with a basis of the annihilator of `span(C)`.
    pub fn facets(&self) -> (Vec<RatVec>, Vec<RatVec>) {
        let mut rows = self.rays.clone();
        for u in &self.lineality {
            rows.push(u.clone());
            rows.push(vneg(u));
        }
        let polar = Cone::from_inequalities(self.n, &rows).expect("dimensions agree");
        (polar.rays, polar.lineality)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        let (facets, ann) = self.facets();
        facets.iter().all(|a| !dot(a, x).is_positive()) && ann.iter().all(|a| dot(a, x).is_zero())
    }

    /// All faces of a pointed cone, from `{0}` up to the cone itself,
    /// ordered by dimension and then by key.
    pub fn faces(&self) -> Result<Vec<Cone>> {
        if !self.is_pointed() {
            return Err(Error::Domain("face lattice requires a pointed cone".into()));
        }
        let (facets, _) = self.facets();
        let full: BTreeSet<usize> = (0..self.rays.len()).collect();
        let mut sets: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        sets.insert(full);
        let facet_sets: Vec<BTreeSet<usize>> = facets
            .iter()
            .map(|a| (0..self.rays.len()).filter(|&i| dot(a, &self.rays[i]).is_zero()).collect())
            .collect();
        let mut frontier: Vec<BTreeSet<usize>> = facet_sets.clone();
        while let Some(s) = frontier.pop() {
            if !sets.insert(s.clone()) {
                continue;
            }
            for f in &facet_sets {
                let t: BTreeSet<usize> = s.intersection(f).copied().collect();
                if !sets.contains(&t) {
                    frontier.push(t);
                }
            }
        }
        let mut out: Vec<Cone> = sets
            .into_iter()
            .map(|s| Cone {
                n: self.n,
                rays: s.into_iter().map(|i| self.rays[i].clone()).collect(),
                lineality: Vec::new(),
            })
            .collect();
        out.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.rays.cmp(&b.rays)));
        Ok(out)
    }

    /// Face order between faces of a common pointed cone.
    pub fn is_face_of(&self, other: &Cone) -> bool {
        self.rays.iter().all(|r| other.rays.contains(r))
    }

    /// Basis of `C^⊥` under the inner product of `ctx`.
    pub fn orth(&self, ctx: &GeometryContext) -> Vec<RatVec> {
        let span = self.span();
        if span.is_empty() {
            return (0..self.n).map(|i| crate::linalg::unit_vec(self.n, i)).collect();
        }
        let rows: Vec<RatVec> = span.iter().map(|v| ctx.functional(v)).collect();
        RatMat::from_rows(&rows).nullspace()
    }

    /// The polar cone `{x : ⟨x, y⟩ <= 0 ∀ y ∈ C}`.
    pub fn polar(&self, ctx: &GeometryContext) -> Cone {
        let mut rows: Vec<RatVec> = self.rays.iter().map(|r| ctx.functional(r)).collect();
        for u in &self.lineality {
            let g = ctx.functional(u);
            rows.push(vneg(&g));
            rows.push(g);
        }
        Cone::from_inequalities(self.n, &rows).expect("dimensions agree")
    }

    /// The polar cone as a closed cell.
    pub fn polar_cell(&self, ctx: &GeometryContext) -> HCell {
        let mut c = HCell::universe(self.n);
        for r in &self.rays {
            c.push(Constraint::weak(ctx.functional(r), Rational::zero()));
        }
        for u in &self.lineality {
            c.push_eq(Hyperplane::new(ctx.functional(u), Rational::zero()));
        }
        c
    }

    /// Projects the cone G-orthogonally onto the complement of its lineality
    /// space, giving the pointed part `C ∩ U^⊥`.
    pub fn pointed_part(&self, ctx: &GeometryContext) -> Result<Cone> {
        if self.is_pointed() {
            return Ok(self.clone());
        }
        let p = g_projector(ctx, &self.lineality);
        let gens: Vec<RatVec> = self.rays.iter().map(|r| p.mul_vec(r)).collect();
        Cone::from_generators(self.n, &gens)
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_vec = |v: &RatVec| {
            let parts: Vec<String> = v.iter().map(format_rational).collect();
            format!("({})", parts.join(","))
        };
        let rays: Vec<String> = self.rays.iter().map(fmt_vec).collect();
        write!(f, "cone[{}]", rays.join(" "))?;
        if !self.lineality.is_empty() {
            let lin: Vec<String> = self.lineality.iter().map(fmt_vec).collect();
            write!(f, "+lin[{}]", lin.join(" "))?;
        }
        Ok(())
    }
}

/// Saturated integer basis of the span of the given vectors.
fn lattice_span(n: usize, vecs: &[RatVec]) -> Vec<RatVec> {
    let ind = independent_subset(vecs);
    if ind.is_empty() {
        return Vec::new();
    }
    crate::linalg::induced_lattice_basis(&GeometryContext::standard(n), &ind).expect("rational span")
}

/// Standard orthogonal projector onto the complement of `span(u)`.
fn std_projector(n: usize, u: &[RatVec]) -> RatMat {
    g_projector(&GeometryContext::standard(n), u)
}

/// G-orthogonal projector onto the complement of `span(u)`.
pub(crate) fn g_projector(ctx: &GeometryContext, u: &[RatVec]) -> RatMat {
    let n = ctx.n;
    if u.is_empty() {
        return RatMat::identity(n);
    }
    let b = RatMat::from_cols(n, u);
    let bt_g = b.transpose().mul(&ctx.gram);
    let m = bt_g.mul(&b).inverse().expect("independent vectors");
    RatMat::identity(n).add(&b.mul(&m).mul(&bt_g).scale(&rat(-1)))
}

/// Whether `gens[i]` has positive coefficient in some positive dependency.
fn in_positive_dependency(gens: &[RatVec], i: usize) -> bool {
    // λ >= 0, λ_i = 1, Σ λ_j g_j = 0
    let m = gens.len();
    let n = gens[0].len();
    let mut c = HCell::universe(m);
    for j in 0..m {
        let mut e = zero_vec(m);
        e[j] = rat(-1);
        c.push(Constraint::weak(e, Rational::zero()));
    }
    let mut e = zero_vec(m);
    e[i] = rat(1);
    c.push_eq(Hyperplane::new(e, rat(1)));
    for k in 0..n {
        let row: RatVec = gens.iter().map(|g| g[k].clone()).collect();
        c.push_eq(Hyperplane::new(row, Rational::zero()));
    }
    !c.is_empty()
}

/// Whether `x` lies in the cone generated by `gens`.
pub(crate) fn in_cone(gens: &[RatVec], x: &[Rational]) -> bool {
    if is_zero_vec(x) {
        return true;
    }
    if gens.is_empty() {
        return false;
    }
    let m = gens.len();
    let n = x.len();
    let mut c = HCell::universe(m);
    for j in 0..m {
        let mut e = zero_vec(m);
        e[j] = rat(-1);
        c.push(Constraint::weak(e, Rational::zero()));
    }
    for k in 0..n {
        let row: RatVec = gens.iter().map(|g| g[k].clone()).collect();
        c.push_eq(Hyperplane::new(row, x[k].clone()));
    }
    !c.is_empty()
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub(crate) fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Whether two cones are equal as sets.
pub fn same_cone(a: &Cone, b: &Cone) -> bool {
    a.rays.iter().all(|r| b.contains(r))
        && b.rays.iter().all(|r| a.contains(r))
        && a.lineality.iter().all(|u| b.contains(u) && b.contains(&vneg(u)))
        && b.lineality.iter().all(|u| a.contains(u) && a.contains(&vneg(u)))
}
