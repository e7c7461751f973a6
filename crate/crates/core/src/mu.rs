//! The μ recursion and the local formula for Ehrhart coefficients.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};

use crate::complex::{Frame, HComplex};
use crate::cone::{g_projector, Cone, ConeKey};
use crate::domains::DomainPolicy;
use crate::error::{Error, Result};
use crate::linalg::{
    induced_lattice_basis, independent_subset, vsub, GeometryContext, RatMat, RatVec, Rational,
};
use crate::polytope::{for_each_lattice_point, Polytope};
use crate::region::RegionBuilder;

/// Stored values for one cone.
#[derive(Clone, Debug, PartialEq)]
pub struct MuEntry {
    pub mu: Rational,
    pub v: Rational,
    /// `w^C_K` for every proper face `K`.
    pub w: Vec<(ConeKey, Rational)>,
}

#[derive(Clone, Debug, Default)]
pub struct MuTable {
    map: BTreeMap<ConeKey, MuEntry>,
}

impl MuTable {
    pub fn get(&self, key: &ConeKey) -> Option<&MuEntry> {
        self.map.get(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ConeKey, &MuEntry)> {
        self.map.iter()
    }

    /// Checks `μ(C) = v_C − Σ w^C_K μ(K)` for every entry.
    pub fn is_consistent(&self) -> bool {
        self.map.iter().all(|(key, e)| {
            if key.is_empty() {
                return e.mu.is_one();
            }
            let mut rhs = e.v.clone();
            for (k, w) in &e.w {
                match self.map.get(k) {
                    Some(ek) => rhs -= w * &ek.mu,
                    None => return false,
                }
            }
            rhs == e.mu
        })
    }
}

/// One row per face of the polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceRow {
    pub index: usize,
    pub dim: usize,
    pub vertices: Vec<RatVec>,
    pub cone: Cone,
    pub mu: Rational,
    pub vol: Rational,
    pub contribution: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalFormulaReport {
    pub faces: Vec<FaceRow>,
    /// `e_0, …, e_d`.
    pub coefficients: Vec<Rational>,
}

impl LocalFormulaReport {
    /// μ values of the faces of dimension `d`, sorted.
    pub fn mu_of_dim(&self, d: usize) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.faces.iter().filter(|f| f.dim == d).map(|f| f.mu.clone()).collect();
        v.sort();
        v
    }
}

/// Computes μ for one geometry and domain policy, memoizing regions and
/// values. Contexts must be in lattice coordinates.
#[derive(Debug)]
pub struct MuEngine {
    builder: RegionBuilder,
    table: MuTable,
    subs: HashMap<Vec<RatVec>, MuEngine>,
}

impl MuEngine {
    pub fn new(ctx: GeometryContext, policy: DomainPolicy) -> Result<Self> {
        Ok(MuEngine { builder: RegionBuilder::new(ctx, policy)?, table: MuTable::default(), subs: HashMap::new() })
    }

    pub fn from_builder(builder: RegionBuilder) -> Self {
        MuEngine { builder, table: MuTable::default(), subs: HashMap::new() }
    }

    pub fn ctx(&self) -> &GeometryContext {
        self.builder.ctx()
    }

    pub fn policy(&self) -> &DomainPolicy {
        self.builder.policy()
    }

    pub fn builder(&mut self) -> &mut RegionBuilder {
        &mut self.builder
    }

    pub fn table(&self) -> &MuTable {
        &self.table
    }

    /// `v_C = vol(R(C) ∩ DC(C^∨))`.
    pub fn dc_volume(&mut self, c: &Cone) -> Result<Rational> {
        let n = self.ctx().n;
        let r = self.builder.region(c)?;
        let t0 = self.builder.base_domain()?;
        let tb = t0.ambient_bbox();
        let lo: Vec<Rational> = (0..n).map(|i| &r.bbox.lo[i] - &tb.hi[i]).collect();
        let hi: Vec<Rational> = (0..n).map(|i| &r.bbox.hi[i] - &tb.lo[i]).collect();
        let polar = c.polar_cell(self.ctx());
        let mut cells = Vec::new();
        for_each_lattice_point(&lo, &hi, &mut |z| {
            if polar.contains(z) {
                cells.extend(t0.ambient().translated(z).cells);
            }
        });
        let dc = HComplex::from_cells(n, cells);
        let identity: Vec<RatVec> = (0..n).map(|i| crate::linalg::unit_vec(n, i)).collect();
        r.complex.intersect(&dc).volume(&identity)
    }

    /// `w^C_K = vol(R(C) ∩ K^⊥ ∩ C^∨)` in the induced lattice of `K^⊥`;
    /// `w^C_C = 1`.
    pub fn correction_volume(&mut self, c: &Cone, k: &Cone) -> Result<Rational> {
        if k.key() == c.key() {
            return Ok(Rational::one());
        }
        let r = self.builder.region(c)?;
        let lk = self.builder.orth_lattice(k)?;
        let polar = c.polar_cell(self.ctx());
        let clipped = r.complex.intersect_cell(&polar);
        clipped.volume_in(&Frame::linear(self.ctx().n, lk))
    }

    /// μ of a pointed cone, with its `v` and `w` values.
    pub fn entry(&mut self, c: &Cone) -> Result<MuEntry> {
        if let Some(e) = self.table.get(&c.key()) {
            return Ok(e.clone());
        }
        let e = if c.is_trivial() {
            MuEntry { mu: Rational::one(), v: Rational::one(), w: Vec::new() }
        } else {
            let v = self.dc_volume(c)?;
            let faces = self.builder.faces(c)?;
            let mut mu = v.clone();
            let mut w = Vec::new();
            for k in faces.iter().filter(|k| k.key() != c.key()) {
                let wk = self.correction_volume(c, k)?;
                let mk = self.entry(k)?.mu;
                mu -= &wk * &mk;
                w.push((k.key(), wk));
            }
            MuEntry { mu, v, w }
        };
        self.table.map.insert(c.key(), e.clone());
        Ok(e)
    }

    /// μ of any rational cone. Cones with lineality space `U` are reduced to
    /// their projection onto `U^⊥` with the induced lattice and Gram matrix.
    pub fn mu(&mut self, c: &Cone) -> Result<Rational> {
        if c.ambient_dim() != self.ctx().n {
            return Err(Error::Dimension { expected: self.ctx().n, found: c.ambient_dim() });
        }
        if c.is_pointed() {
            return Ok(self.entry(c)?.mu);
        }
        let ctx = self.ctx().clone();
        let p = g_projector(&ctx, c.lineality());
        let cols: Vec<RatVec> = (0..ctx.n).map(|j| p.mul_vec(&crate::linalg::unit_vec(ctx.n, j))).collect();
        let complement = independent_subset(&cols);
        if complement.is_empty() {
            return Ok(Rational::one());
        }
        let basis = induced_lattice_basis(&ctx, &complement)?;
        let bmat = RatMat::from_cols(ctx.n, &basis);
        let rays: Vec<RatVec> = c
            .rays()
            .iter()
            .map(|r| bmat.solve(&p.mul_vec(r)).ok_or_else(|| Error::Domain("projection left the complement".into())))
            .collect::<Result<_>>()?;
        let sub_cone = Cone::from_generators(basis.len(), &rays)?;
        let sub = self.sub_engine(&basis)?;
        sub.mu(&sub_cone)
    }

    fn sub_engine(&mut self, basis: &[RatVec]) -> Result<&mut MuEngine> {
        if !self.subs.contains_key(basis) {
            let (ctx, policy) = restrict_context(self.ctx(), self.policy(), basis)?;
            self.subs.insert(basis.to_vec(), MuEngine::new(ctx, policy)?);
        }
        Ok(self.subs.get_mut(basis).expect("inserted above"))
    }

    /// `e_i = Σ_{dim f = i} μ(N_f) vol(f)`. Lower-dimensional polytopes are
    /// moved into the induced lattice of their affine hull first.
    pub fn local_formula(&mut self, p: &Polytope) -> Result<LocalFormulaReport> {
        if p.ambient_dim() != self.ctx().n {
            return Err(Error::Dimension { expected: self.ctx().n, found: p.ambient_dim() });
        }
        if !p.is_full_dim() {
            let origin = p.vertices()[0].clone();
            let dirs = independent_subset(&p.vertices().iter().map(|v| vsub(v, &origin)).collect::<Vec<_>>());
            if dirs.is_empty() {
                let row = FaceRow {
                    index: 0,
                    dim: 0,
                    vertices: p.vertices().to_vec(),
                    cone: Cone::trivial(0),
                    mu: Rational::one(),
                    vol: Rational::one(),
                    contribution: Rational::one(),
                };
                return Ok(LocalFormulaReport { faces: vec![row], coefficients: vec![Rational::one()] });
            }
            let basis = induced_lattice_basis(self.ctx(), &dirs)?;
            let frame = Frame::new(origin, basis.clone());
            let local: Vec<RatVec> = p.vertices().iter().map(|v| frame.coords(v)).collect();
            let q = Polytope::new(basis.len(), &local)?;
            let sub = self.sub_engine(&basis)?;
            let mut report = sub.local_formula(&q)?;
            let fl = p.face_lattice();
            for row in &mut report.faces {
                row.vertices = row.vertices.iter().map(|y| frame.point(y)).collect();
                let mut vs = row.vertices.clone();
                vs.sort();
                if let Some(i) = fl.faces.iter().position(|f| {
                    let mut fv = p.face_points(f);
                    fv.sort();
                    fv == vs
                }) {
                    row.index = i;
                    row.cone = p.normal_cone(self.ctx(), &fl, i);
                }
            }
            report.faces.sort_by_key(|r| r.index);
            return Ok(report);
        }
        let fl = p.face_lattice();
        let d = p.dim();
        let mut coefficients = vec![Rational::zero(); d + 1];
        let mut faces = Vec::with_capacity(fl.len());
        for (i, f) in fl.faces.iter().enumerate() {
            let cone = p.normal_cone(self.ctx(), &fl, i);
            let mu = self.mu(&cone)?;
            let vol = p.relative_volume(f);
            let contribution = &mu * &vol;
            coefficients[f.dim] += &contribution;
            faces.push(FaceRow { index: i, dim: f.dim, vertices: p.face_points(f), cone, mu, vol, contribution });
        }
        Ok(LocalFormulaReport { faces, coefficients })
    }
}

/// Context and policy on the subspace spanned by a lattice basis, in the
/// coordinates of that basis.
pub fn restrict_context(
    ctx: &GeometryContext,
    policy: &DomainPolicy,
    basis: &[RatVec],
) -> Result<(GeometryContext, DomainPolicy)> {
    let b = RatMat::from_cols(ctx.n, basis);
    let gram = b.transpose().mul(&ctx.gram).mul(&b);
    Ok((GeometryContext::with_gram(gram)?, policy.restrict(ctx, basis)))
}

/// Closes a set of integer matrices under multiplication. Errors when the
/// group exceeds `limit` elements or an element does not preserve Zⁿ.
pub fn group_closure(n: usize, generators: &[RatMat], limit: usize) -> Result<Vec<RatMat>> {
    for g in generators {
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::Dimension { expected: n, found: g.nrows() });
        }
        if !g.is_integral() || g.det().abs() != Rational::one() {
            return Err(Error::Domain("group element does not preserve the lattice".into()));
        }
    }
    let key = |m: &RatMat| m.rows_vec();
    let mut seen: BTreeMap<Vec<RatVec>, RatMat> = BTreeMap::new();
    let id = RatMat::identity(n);
    seen.insert(key(&id), id.clone());
    let mut frontier = vec![id];
    while let Some(a) = frontier.pop() {
        for g in generators {
            let b = g.mul(&a);
            if seen.contains_key(&key(&b)) {
                continue;
            }
            if seen.len() >= limit {
                return Err(Error::Resource(format!("group has more than {limit} elements")));
            }
            seen.insert(key(&b), b.clone());
            frontier.push(b);
        }
    }
    Ok(seen.into_values().collect())
}

/// `(1/|H|) Σ AᵀA` over the group generated by the given matrices.
pub fn gram_from_group(n: usize, generators: &[RatMat]) -> Result<RatMat> {
    let group = group_closure(n, generators, 10_000)?;
    let mut g = RatMat::zeros(n, n);
    for a in &group {
        g = g.add(&a.transpose().mul(a));
    }
    let g = g.scale(&(Rational::one() / Rational::from_integer(group.len().into())));
    debug_assert!(group.iter().all(|a| a.transpose().mul(&g).mul(a) == g));
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    /// Face indices in the polytope's face lattice.
    pub faces: Vec<usize>,
    pub mu: Vec<Rational>,
}

impl Orbit {
    pub fn is_constant(&self) -> bool {
        self.mu.windows(2).all(|w| w[0] == w[1])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitReport {
    pub orbits: Vec<Orbit>,
}

impl OrbitReport {
    pub fn passed(&self) -> bool {
        self.orbits.iter().all(Orbit::is_constant)
    }

    pub fn first_failure(&self) -> Option<&Orbit> {
        self.orbits.iter().find(|o| !o.is_constant())
    }
}

/// Splits the faces of `p` into orbits of the group (acting linearly, up to
/// the lattice translation that maps `A·P` back onto `P`) and collects μ on
/// each orbit.
pub fn orbit_constancy(engine: &mut MuEngine, p: &Polytope, generators: &[RatMat]) -> Result<OrbitReport> {
    let n = p.ambient_dim();
    let group = group_closure(n, generators, 10_000)?;
    let report = engine.local_formula(p)?;
    let fl = p.face_lattice();
    let sorted_points = |i: usize| {
        let mut v = p.face_points(&fl.faces[i]);
        v.sort();
        v
    };
    let face_sets: Vec<Vec<RatVec>> = (0..fl.len()).map(sorted_points).collect();
    let mut image_of = Vec::new();
    for a in &group {
        let moved: Vec<RatVec> = p.vertices().iter().map(|v| a.mul_vec(v)).collect();
        let lo_p = p.vertices().iter().min().expect("nonempty").clone();
        let lo_a = moved.iter().min().expect("nonempty").clone();
        let shift = vsub(&lo_p, &lo_a);
        let mut check: Vec<RatVec> = moved.iter().map(|v| crate::linalg::vadd(v, &shift)).collect();
        check.sort();
        if check != face_sets[fl.top()] {
            return Err(Error::Domain("group does not preserve the polytope".into()));
        }
        let map: Vec<usize> = (0..fl.len())
            .map(|i| {
                let mut img: Vec<RatVec> =
                    face_sets[i].iter().map(|v| crate::linalg::vadd(&a.mul_vec(v), &shift)).collect();
                img.sort();
                face_sets.iter().position(|s| *s == img).expect("faces map to faces")
            })
            .collect();
        image_of.push(map);
    }
    let mut assigned = vec![false; fl.len()];
    let mut orbits = Vec::new();
    for i in 0..fl.len() {
        if assigned[i] {
            continue;
        }
        let mut members: Vec<usize> = image_of.iter().map(|m| m[i]).collect();
        members.sort_unstable();
        members.dedup();
        for &j in &members {
            assigned[j] = true;
        }
        let mu = members.iter().map(|&j| report.faces.iter().find(|r| r.index == j).expect("row").mu.clone()).collect();
        orbits.push(Orbit { faces: members, mu });
    }
    Ok(OrbitReport { orbits })
}
