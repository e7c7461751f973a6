//! Regions of pointed rational cones.
//!
//! `R(C₀)` is the fundamental domain of the full lattice. For a larger cone,
//! `R(C)` is the part of the strip `T(C) + lin(C)` inside the covering domain
//! complex of `C^∨` that is not covered by accepted translates `x + R(K)` of
//! regions of proper faces. A translate is accepted when it lies strictly
//! inside `M^∨` for every ray `M` of `C` outside `K` (condition I) and meets
//! no lattice translate of a region of an incomparable face (condition II).
//!
//! Regions are computed inside a box window that is doubled until the result
//! sits in the inner half of the window.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::complex::{BBox, Frame, HCell, HComplex, Hyperplane};
use crate::cone::{Cone, ConeKey};
use crate::domains::{DomainCache, DomainPolicy, FundamentalDomain};
use crate::error::{Error, Result};
use crate::linalg::{dot, induced_lattice_basis, rat, vadd, GeometryContext, RatVec, Rational};
use crate::polytope::for_each_lattice_point;

#[derive(Clone, Debug)]
pub struct EngineSettings {
    /// Window doublings before giving up with a window error.
    pub max_window_rounds: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings { max_window_rounds: 6 }
    }
}

/// The region of a pointed cone.
#[derive(Clone, Debug)]
pub struct Region {
    pub cone: Cone,
    pub complex: HComplex,
    /// Exact bounding box of the region.
    pub bbox: BBox,
    pub radius_sq: Rational,
    /// Half side length of the window the region was computed in.
    pub window: Rational,
    /// Basis of `L(C)`.
    pub lattice: Vec<RatVec>,
}

impl Region {
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.complex.contains_point(x)
    }
}

/// Why a candidate translate was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslateStatus {
    Accepted,
    RejectedI,
    RejectedII,
}

/// A translated region in a tiling.
#[derive(Clone, Debug)]
pub struct Piece {
    pub cone: Cone,
    pub offset: RatVec,
    pub complex: HComplex,
}

/// Builds and memoizes regions for one geometry (lattice Zⁿ, Gram G) and one
/// domain policy.
#[derive(Debug)]
pub struct RegionBuilder {
    ctx: GeometryContext,
    domains: DomainCache,
    settings: EngineSettings,
    regions: HashMap<ConeKey, Arc<Region>>,
    faces: HashMap<ConeKey, Arc<Vec<Cone>>>,
    lattices: HashMap<ConeKey, Vec<RatVec>>,
    sups: HashMap<(ConeKey, RatVec), (Rational, bool)>,
    conflicts: HashMap<(ConeKey, ConeKey), Arc<Vec<RatVec>>>,
}

impl RegionBuilder {
    pub fn new(ctx: GeometryContext, policy: DomainPolicy) -> Result<Self> {
        Self::with_settings(ctx, policy, EngineSettings::default())
    }

    pub fn with_settings(ctx: GeometryContext, policy: DomainPolicy, settings: EngineSettings) -> Result<Self> {
        if !ctx.is_standard_lattice() {
            return Err(Error::Domain("region construction expects lattice coordinates (basis = identity)".into()));
        }
        if let Some(s) = &policy.shift {
            ctx.check_dim(s)?;
        }
        Ok(RegionBuilder {
            domains: DomainCache::new(ctx.clone(), policy),
            ctx,
            settings,
            regions: HashMap::new(),
            faces: HashMap::new(),
            lattices: HashMap::new(),
            sups: HashMap::new(),
            conflicts: HashMap::new(),
        })
    }

    pub fn ctx(&self) -> &GeometryContext {
        &self.ctx
    }

    pub fn policy(&self) -> &DomainPolicy {
        &self.domains.policy
    }

    pub fn domain_cache(&self) -> &DomainCache {
        &self.domains
    }

    pub fn trivial(&self) -> Cone {
        Cone::trivial(self.ctx.n)
    }

    /// Regions built so far.
    pub fn regions(&self) -> impl Iterator<Item = &Arc<Region>> {
        self.regions.values()
    }

    pub fn faces(&mut self, c: &Cone) -> Result<Arc<Vec<Cone>>> {
        if let Some(f) = self.faces.get(&c.key()) {
            return Ok(f.clone());
        }
        let f = Arc::new(c.faces()?);
        self.faces.insert(c.key(), f.clone());
        Ok(f)
    }

    /// Basis of `L(C) = Λ ∩ C^⊥`.
    pub fn orth_lattice(&mut self, c: &Cone) -> Result<Vec<RatVec>> {
        if let Some(l) = self.lattices.get(&c.key()) {
            return Ok(l.clone());
        }
        let orth = c.orth(&self.ctx);
        let l = if orth.is_empty() { Vec::new() } else { induced_lattice_basis(&self.ctx, &orth)? };
        self.lattices.insert(c.key(), l.clone());
        Ok(l)
    }

    /// The fundamental domain `T(C)` of `L(C)`.
    pub fn domain(&mut self, c: &Cone) -> Result<Arc<FundamentalDomain>> {
        let l = self.orth_lattice(c)?;
        self.domains.domain_for(&l)
    }

    /// `T(C₀)`, the domain of the full lattice.
    pub fn base_domain(&mut self) -> Result<Arc<FundamentalDomain>> {
        let t = self.trivial();
        self.domain(&t)
    }

    pub fn region(&mut self, c: &Cone) -> Result<Arc<Region>> {
        if !c.is_pointed() {
            return Err(Error::Domain("regions are defined for pointed cones".into()));
        }
        if c.ambient_dim() != self.ctx.n {
            return Err(Error::Dimension { expected: self.ctx.n, found: c.ambient_dim() });
        }
        if let Some(r) = self.regions.get(&c.key()) {
            return Ok(r.clone());
        }
        let r = Arc::new(self.build_region(c)?);
        self.regions.insert(c.key(), r.clone());
        Ok(r)
    }

    fn build_region(&mut self, c: &Cone) -> Result<Region> {
        let n = self.ctx.n;
        let t0 = self.base_domain()?;
        if c.is_trivial() {
            let complex = t0.ambient().clone();
            return self.finish_region(c, complex, Rational::zero());
        }
        let faces = self.faces(c)?;
        let proper: Vec<Cone> = faces.iter().filter(|k| k.key() != c.key()).cloned().collect();
        let mut reach = t0.ambient_bbox().max_abs();
        for k in &proper {
            let r = self.region(k)?;
            reach = reach.max(r.bbox.max_abs());
        }
        let tc = self.domain(c)?;
        reach = reach.max(tc.ambient_bbox().max_abs());
        let strip = tc.strip(&self.ctx);
        let polar = c.polar_cell(&self.ctx);
        let t0_box = t0.ambient_bbox();

        let mut rho = (reach * rat(4)).ceil().max(rat(2));
        for _ in 0..self.settings.max_window_rounds {
            let window = BBox::cube(n, &rho);
            let wcell = window.to_cell();
            let mut cells = Vec::new();
            let zlo: Vec<Rational> = (0..n).map(|i| &window.lo[i] - &t0_box.hi[i]).collect();
            let zhi: Vec<Rational> = (0..n).map(|i| &window.hi[i] - &t0_box.lo[i]).collect();
            let trivial = self.trivial();
            let mut zs = Vec::new();
            for_each_lattice_point(&zlo, &zhi, &mut |z| zs.push(z.clone()));
            for z in zs {
                // translates strictly inside C^∨ are removed as a whole
                if self.condition_i(c, &trivial, &z)? {
                    continue;
                }
                let shifted = t0.ambient().translated(&z);
                let meets = shifted.intersect_cell(&polar);
                if meets.is_empty() {
                    continue;
                }
                for cell in &shifted.cells {
                    let Some(cell) = cell.intersect(&wcell) else { continue };
                    for s in &strip {
                        if let Some(p) = cell.intersect(s) {
                            if !p.is_empty() {
                                cells.push(p);
                            }
                        }
                    }
                }
            }
            let mut complex = HComplex::from_cells(n, cells);
            for k in &proper {
                if k.is_trivial() {
                    continue;
                }
                let rk = self.region(k)?;
                let Some(cb) = complex.loose_bbox() else { break };
                let lk = self.orth_lattice(k)?;
                for x in lattice_points_overlapping(n, &lk, &rk.bbox, &cb) {
                    if !self.in_x(c, k, &x)? {
                        continue;
                    }
                    let tr = rk.complex.translated(&x);
                    complex = complex.subtract(&tr);
                }
            }
            complex.normalize()?;
            let bbox = complex.bbox()?;
            let half = &rho / rat(2);
            match &bbox {
                Some(b) if b.max_abs() < half => return self.finish_region(c, complex, rho),
                None => return Err(Error::Domain(format!("empty region for {c}"))),
                _ => {}
            }
            rho *= rat(2);
        }
        Err(Error::Window { cone: c.to_string(), iterations: self.settings.max_window_rounds })
    }

    fn finish_region(&mut self, c: &Cone, complex: HComplex, window: Rational) -> Result<Region> {
        let bbox = complex.bbox()?.ok_or_else(|| Error::Domain("empty region".into()))?;
        let radius_sq = complex.bounding_radius_sq(&self.ctx)?;
        let lattice = self.orth_lattice(c)?;
        Ok(Region { cone: c.clone(), complex, bbox, radius_sq, window, lattice })
    }

    /// `sup { g·p : p ∈ R(K) }` and whether it is attained.
    fn sup_info(&mut self, k: &Cone, g: &RatVec) -> Result<(Rational, bool)> {
        let key = (k.key(), g.clone());
        if let Some(v) = self.sups.get(&key) {
            return Ok(v.clone());
        }
        let r = self.region(k)?;
        let mut best: Option<Rational> = None;
        let mut per_cell = Vec::new();
        for cell in &r.complex.cells {
            let verts = cell.closure_vertices()?.unwrap_or_default();
            let m = verts.iter().map(|v| dot(g, v)).max();
            if let Some(m) = m {
                if best.as_ref().is_none_or(|b| m > *b) {
                    best = Some(m.clone());
                }
                per_cell.push((cell, m));
            }
        }
        let best = best.ok_or_else(|| Error::Domain("empty region".into()))?;
        let mut attained = false;
        for (cell, m) in per_cell {
            if m == best {
                let mut c = cell.clone();
                c.push_eq(Hyperplane::new(g.clone(), best.clone()));
                if !c.is_empty() {
                    attained = true;
                    break;
                }
            }
        }
        let v = (best, attained);
        self.sups.insert(key, v.clone());
        Ok(v)
    }

    /// Condition (I): `x + R(K) ⊆ Int(M^∨)` for every ray `M` of `C` not in `K`.
    pub fn condition_i(&mut self, c: &Cone, k: &Cone, x: &[Rational]) -> Result<bool> {
        for m in c.rays() {
            if k.rays().contains(m) {
                continue;
            }
            let g = self.ctx.functional(m);
            let (sup, attained) = self.sup_info(k, &g)?;
            let v = dot(&g, x) + sup;
            if v.is_positive() || (v.is_zero() && attained) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Lattice vectors `d` with `R(K) ∩ (d + R(K')) ≠ ∅` and `d ⊥ lin(K ∧ K')`.
    fn conflicts(&mut self, k: &Cone, k2: &Cone) -> Result<Arc<Vec<RatVec>>> {
        let key = (k.key(), k2.key());
        if let Some(d) = self.conflicts.get(&key) {
            return Ok(d.clone());
        }
        let r1 = self.region(k)?;
        let r2 = self.region(k2)?;
        let n = self.ctx.n;
        let common: Vec<RatVec> = k.rays().iter().filter(|r| k2.rays().contains(r)).map(|r| self.ctx.functional(r)).collect();
        let lo: Vec<Rational> = (0..n).map(|i| &r1.bbox.lo[i] - &r2.bbox.hi[i]).collect();
        let hi: Vec<Rational> = (0..n).map(|i| &r1.bbox.hi[i] - &r2.bbox.lo[i]).collect();
        let mut ds = Vec::new();
        for_each_lattice_point(&lo, &hi, &mut |d| {
            if common.iter().all(|g| dot(g, d).is_zero()) {
                ds.push(d.clone());
            }
        });
        let mut out = Vec::new();
        for d in ds {
            let moved = r2.complex.translated(&d);
            if !r1.complex.intersect(&moved).is_empty() {
                out.push(d);
            }
        }
        let out = Arc::new(out);
        self.conflicts.insert(key, out.clone());
        Ok(out)
    }

    /// Condition (II): `x + R(K)` meets no `x' + R(K')` for faces `K'` of `C`
    /// incomparable to `K` and `x' ∈ L(K')`.
    pub fn condition_ii(&mut self, c: &Cone, k: &Cone, x: &[Rational]) -> Result<bool> {
        let faces = self.faces(c)?;
        for k2 in faces.iter() {
            if k2.key() == c.key() || k.is_face_of(k2) || k2.is_face_of(k) {
                continue;
            }
            let ds = self.conflicts(k, k2)?;
            let normals: Vec<RatVec> = k2.rays().iter().map(|r| self.ctx.functional(r)).collect();
            for d in ds.iter() {
                let p = vadd(x, d);
                if normals.iter().all(|g| dot(g, &p).is_zero()) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Classifies a point `x ∈ L(K)` as a candidate translate of `R(K)` in
    /// the construction of `R(C)`.
    pub fn classify(&mut self, c: &Cone, k: &Cone, x: &[Rational]) -> Result<TranslateStatus> {
        if !self.condition_i(c, k, x)? {
            return Ok(TranslateStatus::RejectedI);
        }
        if !self.condition_ii(c, k, x)? {
            return Ok(TranslateStatus::RejectedII);
        }
        Ok(TranslateStatus::Accepted)
    }

    /// Membership `x ∈ X_K^C` for a face `K < C`; `X_C^C = {0}`.
    pub fn in_x(&mut self, c: &Cone, k: &Cone, x: &[Rational]) -> Result<bool> {
        if k.key() == c.key() {
            return Ok(x.iter().all(Zero::is_zero));
        }
        let normals: Vec<RatVec> = k.rays().iter().map(|r| self.ctx.functional(r)).collect();
        if !crate::linalg::is_integral(x) || !normals.iter().all(|g| dot(g, x).is_zero()) {
            return Ok(false);
        }
        Ok(self.classify(c, k, x)? == TranslateStatus::Accepted)
    }

    /// `⌈Q⌉ ∩ window`: translates `z + T` meeting the closed cell `q`, clipped
    /// to the closed window box.
    pub fn covering_complex(&mut self, q: &HCell, window: &BBox) -> Result<HComplex> {
        let n = self.ctx.n;
        let t0 = self.base_domain()?;
        let tb = t0.ambient_bbox();
        let zlo: Vec<Rational> = (0..n).map(|i| &window.lo[i] - &tb.hi[i]).collect();
        let zhi: Vec<Rational> = (0..n).map(|i| &window.hi[i] - &tb.lo[i]).collect();
        let wcell = window.to_cell();
        let mut cells = Vec::new();
        for_each_lattice_point(&zlo, &zhi, &mut |z| {
            let t = t0.ambient().translated(z);
            if t.intersect_cell(q).is_empty() {
                return;
            }
            cells.extend(t.intersect_cell(&wcell).cells);
        });
        Ok(HComplex::from_cells(n, cells))
    }

    /// The pieces of the tiling of `⌈C^∨⌉` by translates of `R(K)`, `K <= C`,
    /// that meet the window, each clipped to `⌈C^∨⌉ ∩ window`. Returns the
    /// pieces and the clipped target.
    pub fn one_cone_tiling(&mut self, c: &Cone, window: &BBox) -> Result<(Vec<Piece>, HComplex)> {
        let n = self.ctx.n;
        let polar = c.polar_cell(&self.ctx);
        let target = self.covering_complex(&polar, window)?;
        let faces = self.faces(c)?;
        let mut pieces = Vec::new();
        for k in faces.iter() {
            let rk = self.region(k)?;
            let lk = self.orth_lattice(k)?;
            for x in lattice_points_overlapping(n, &lk, &rk.bbox, window) {
                if !(k.key() == c.key() || self.in_x(c, k, &x)?) {
                    continue;
                }
                let clipped = rk.complex.translated(&x).intersect(&target);
                if !clipped.is_empty() {
                    pieces.push(Piece { cone: k.clone(), offset: x, complex: clipped });
                }
            }
        }
        Ok((pieces, target))
    }
}

/// Points `x` of the lattice spanned by `basis` with `(x + b) ∩ w ≠ ∅` for
/// the boxes `b` and `w`.
pub fn lattice_points_overlapping(n: usize, basis: &[RatVec], b: &BBox, w: &BBox) -> Vec<RatVec> {
    let lo: Vec<Rational> = (0..n).map(|i| &w.lo[i] - &b.hi[i]).collect();
    let hi: Vec<Rational> = (0..n).map(|i| &w.hi[i] - &b.lo[i]).collect();
    let target = BBox::new(lo, hi);
    if basis.is_empty() {
        let z = vec![Rational::zero(); n];
        return if target.contains(&z) { vec![z] } else { Vec::new() };
    }
    let frame = Frame::linear(n, basis.to_vec());
    let range = frame.pull_bbox(&target);
    let mut out = Vec::new();
    for_each_lattice_point(&range.lo, &range.hi, &mut |c| {
        let x = frame.point(c);
        if target.contains(&x) {
            out.push(x);
        }
    });
    out
}

/// Whether `a ⊆ b` as point sets.
pub fn complex_contains(b: &HComplex, a: &HComplex) -> bool {
    a.subtract(b).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ratio, rvec, RatMat};

    fn builder(g: Option<RatMat>) -> RegionBuilder {
        let ctx = match g {
            Some(g) => GeometryContext::with_gram(g).unwrap(),
            None => GeometryContext::standard(2),
        };
        RegionBuilder::new(ctx, DomainPolicy::voronoi()).unwrap()
    }

    #[test]
    fn trivial_region_is_base_domain() {
        let mut b = builder(None);
        let r = b.region(&Cone::trivial(2)).unwrap();
        assert_eq!(r.complex.volume(&[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), rat(1));
    }

    #[test]
    fn ray_region_contains_its_domain() {
        let mut b = builder(None);
        let c = Cone::from_generators(2, &[rvec(&[0, -1])]).unwrap();
        let r = b.region(&c).unwrap();
        let t = b.domain(&c).unwrap();
        assert!(complex_contains(&r.complex, t.ambient()));
        // the strip piece below the x-axis cell
        assert!(r.contains(&[rat(0), ratio(-1, 2)]));
        assert!(!r.contains(&[ratio(1, 2), rat(0)]));
    }

    #[test]
    fn orthant_region_bounded() {
        let mut b = builder(None);
        let c = Cone::from_generators(2, &[rvec(&[-1, 0]), rvec(&[0, -1])]).unwrap();
        let r = b.region(&c).unwrap();
        assert!(r.bbox.max_abs() < rat(4));
        assert!(r.contains(&rvec(&[0, 0])));
    }

    #[test]
    fn condition_i_examples() {
        let mut b = builder(None);
        let c = Cone::from_generators(2, &[rvec(&[-1, 0]), rvec(&[0, -1])]).unwrap();
        let c0 = Cone::trivial(2);
        assert!(b.condition_i(&c, &c0, &rvec(&[3, 3])).unwrap());
        assert!(!b.condition_i(&c, &c0, &rvec(&[0, 3])).unwrap());
        // [1/2, 3/2) x [1/2, 3/2) touches x = 1/2 > 0 only from inside
        assert!(b.condition_i(&c, &c0, &rvec(&[1, 1])).unwrap());
    }

    #[test]
    fn one_cone_tiling_of_orthant() {
        let mut b = builder(None);
        let c = Cone::from_generators(2, &[rvec(&[-1, 0]), rvec(&[0, -1])]).unwrap();
        let w = BBox::cube(2, &rat(3));
        let (pieces, target) = b.one_cone_tiling(&c, &w).unwrap();
        let parts: Vec<HComplex> = pieces.into_iter().map(|p| p.complex).collect();
        assert!(crate::complex::verify_strict_tiling(&parts, &target).ok);
    }

    #[test]
    fn hexagonal_ray_region() {
        let mut b = builder(Some(RatMat::from_i64(&[&[2, 1], &[1, 2]])));
        let c = Cone::from_generators(2, &[rvec(&[1, -2])]).unwrap();
        let r = b.region(&c).unwrap();
        let t = b.domain(&c).unwrap();
        assert!(complex_contains(&r.complex, t.ambient()));
        let w = BBox::cube(2, &rat(3));
        let (pieces, target) = b.one_cone_tiling(&c, &w).unwrap();
        let parts: Vec<HComplex> = pieces.into_iter().map(|p| p.complex).collect();
        assert!(crate::complex::verify_strict_tiling(&parts, &target).ok);
    }
}
