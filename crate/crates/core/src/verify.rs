//! Independent oracles and end-to-end checks.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::complex::{verify_strict_tiling, BBox, HComplex, TilingVerdict};
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::{int_to_rat, rat, unit_vec, vadd, vscale, vsub, RatVec, Rational};
use crate::mu::{LocalFormulaReport, MuEngine};
use crate::polytope::{for_each_lattice_point, FaceLattice, Polytope};
use crate::region::lattice_points_overlapping;

/// Coefficients `e_0, …, e_d` of `t ↦ |tP ∩ Λ|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EhrhartPolynomial {
    pub coefficients: Vec<Rational>,
}

impl EhrhartPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.coefficients.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
    }
}

/// Interpolates the Ehrhart polynomial from exact counts at `t = 0..=d`.
pub fn ehrhart_interpolate(p: &Polytope) -> EhrhartPolynomial {
    let d = p.dim();
    let values: Vec<Rational> = (0..=d as u64).map(|t| int_to_rat(&p.count_points(t))).collect();
    EhrhartPolynomial { coefficients: interpolate(&values) }
}

/// Coefficients of the polynomial of degree `< values.len()` with
/// `f(i) = values[i]`.
pub fn interpolate(values: &[Rational]) -> Vec<Rational> {
    let m = values.len();
    let mut out = vec![Rational::zero(); m];
    for (i, yi) in values.iter().enumerate() {
        // basis polynomial ∏_{j≠i} (t − j)/(i − j)
        let mut basis = vec![Rational::one()];
        let mut denom = Rational::one();
        for j in 0..m {
            if j == i {
                continue;
            }
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b;
                next[k] -= b * rat(j as i64);
            }
            basis = next;
            denom *= rat(i as i64 - j as i64);
        }
        for (k, b) in basis.iter().enumerate() {
            out[k] += yi * b / &denom;
        }
    }
    out
}

/// `X(tf)` for one face.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSet {
    pub face: usize,
    pub t: u64,
    pub points: Vec<RatVec>,
}

/// Faces, vertex indices and normal cones of a full-dimensional polytope,
/// computed once.
#[derive(Clone, Debug)]
pub struct FaceData {
    pub lattice: FaceLattice,
    pub cones: Vec<Cone>,
    pub vertex_faces: Vec<usize>,
}

impl FaceData {
    pub fn new(engine: &MuEngine, p: &Polytope) -> Result<Self> {
        if !p.is_full_dim() {
            return Err(Error::Domain("expected a full-dimensional polytope".into()));
        }
        let lattice = p.face_lattice();
        let cones = (0..lattice.len()).map(|i| p.normal_cone(engine.ctx(), &lattice, i)).collect();
        let vertex_faces = lattice.of_dim(0);
        Ok(FaceData { lattice, cones, vertex_faces })
    }

    /// Face index of the vertex `p.vertices()[v]`.
    fn vertex_face(&self, v: usize) -> usize {
        *self.vertex_faces.iter().find(|&&i| self.lattice.faces[i].vertices == [v]).expect("vertex face")
    }
}

/// `X(tf) = ⋂_{v ∈ f} (X^{N_v}_{N_f} + tv)`, with `X(tv) = {tv}`.
pub fn feasible_points(engine: &mut MuEngine, p: &Polytope, data: &FaceData, face: usize, t: u64) -> Result<FeasibleSet> {
    let tr = rat(t as i64);
    let f = &data.lattice.faces[face];
    let verts: Vec<RatVec> = f.vertices.iter().map(|&i| vscale(&p.vertices()[i], &tr)).collect();
    if f.dim == 0 {
        return Ok(FeasibleSet { face, t, points: verts });
    }
    let nf = data.cones[face].clone();
    let builder = engine.builder();
    let lk = builder.orth_lattice(&nf)?;
    // candidates: aff(tf) ∩ Λ near tf
    let mut reach = Rational::zero();
    for &v in &f.vertices {
        let nv = &data.cones[data.vertex_face(v)];
        reach = reach.max(builder.region(nv)?.bbox.max_abs());
    }
    reach = reach.max(builder.region(&nf)?.bbox.max_abs());
    let window = BBox::from_points(&verts).expect("nonempty face").grown(&(reach * rat(2) + rat(1)));
    let origin = verts[0].clone();
    let zero_box = BBox::new(vec![Rational::zero(); p.ambient_dim()], vec![Rational::zero(); p.ambient_dim()]);
    let shifted = window.translated(&crate::linalg::vneg(&origin));
    let mut points = Vec::new();
    for y in lattice_points_overlapping(p.ambient_dim(), &lk, &zero_box, &shifted) {
        let x = vadd(&y, &origin);
        let mut ok = true;
        for (&v, tv) in f.vertices.iter().zip(&verts) {
            let nv = data.cones[data.vertex_face(v)].clone();
            if !builder.in_x(&nv, &nf, &vsub(&x, tv))? {
                ok = false;
                break;
            }
        }
        if ok {
            points.push(x);
        }
    }
    points.sort();
    Ok(FeasibleSet { face, t, points })
}

/// All translated regions `x + R(N_f)`, `x ∈ X(tf)`, tagged by face.
pub fn theorem1_pieces(engine: &mut MuEngine, p: &Polytope, data: &FaceData, t: u64) -> Result<Vec<(usize, RatVec, HComplex)>> {
    let mut out = Vec::new();
    for face in 0..data.lattice.len() {
        let xs = feasible_points(engine, p, data, face, t)?;
        let r = engine.builder().region(&data.cones[face])?;
        for x in xs.points {
            let piece = r.complex.translated(&x);
            out.push((face, x, piece));
        }
    }
    Ok(out)
}

/// `⌈tP⌉`: the translates `z + T` whose cell meets `tP`.
pub fn covering_of_dilate(engine: &mut MuEngine, p: &Polytope, t: u64) -> Result<HComplex> {
    let tp = p.dilate(&rat(t as i64));
    let t0 = engine.builder().base_domain()?;
    let reach = t0.ambient_bbox().max_abs() + rat(1);
    let window = BBox::from_points(tp.vertices()).expect("nonempty").grown(&reach);
    engine.builder().covering_complex(&tp.cell(), &window)
}

/// `DC(tP)`: the translates `z + T` with `z ∈ tP ∩ Λ`.
pub fn domain_complex_of_dilate(engine: &mut MuEngine, p: &Polytope, t: u64) -> Result<HComplex> {
    let tp = p.dilate(&rat(t as i64));
    let t0 = engine.builder().base_domain()?;
    let b = BBox::from_points(tp.vertices()).expect("nonempty");
    let mut cells = Vec::new();
    for_each_lattice_point(&b.lo, &b.hi, &mut |z| {
        if tp.contains(z) {
            cells.extend(t0.ambient().translated(z).cells);
        }
    });
    Ok(HComplex::from_cells(p.ambient_dim(), cells))
}

#[derive(Clone, Debug)]
pub struct Theorem1Outcome {
    pub verdict: TilingVerdict,
    pub pieces: Vec<(usize, RatVec, HComplex)>,
    pub target: HComplex,
}

/// Checks that the translated regions strictly tile `⌈tP⌉`.
pub fn verify_theorem1(engine: &mut MuEngine, p: &Polytope, t: u64) -> Result<Theorem1Outcome> {
    let data = FaceData::new(engine, p)?;
    let pieces = theorem1_pieces(engine, p, &data, t)?;
    let target = covering_of_dilate(engine, p, t)?;
    let parts: Vec<HComplex> = pieces.iter().map(|(_, _, c)| c.clone()).collect();
    let verdict = verify_strict_tiling(&parts, &target);
    Ok(Theorem1Outcome { verdict, pieces, target })
}

/// Smallest `t` in `1..=t_max` at which the tiling verifies.
pub fn find_t0(engine: &mut MuEngine, p: &Polytope, t_max: u64) -> Result<Option<u64>> {
    for t in 1..=t_max {
        if verify_theorem1(engine, p, t)?.verdict.ok {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Outcome of the two volume identities at one dilation.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    /// `(vol DC(tP), Σ |X(tf)| v_f, |tP ∩ Λ|)`.
    pub dc: (Rational, Rational, BigInt),
    /// Per face: `(face, vol(tf), Σ_{g ≤ f} |X(tg)| w^{N_g}_{N_f})`.
    pub faces: Vec<(usize, Rational, Rational)>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        let (a, b, c) = &self.dc;
        a == b && *a == int_to_rat(c) && self.faces.iter().all(|(_, l, r)| l == r)
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.faces.iter().find(|(_, l, r)| l != r).map(|(f, _, _)| *f)
    }
}

pub fn verify_lemma_volumes(engine: &mut MuEngine, p: &Polytope, t: u64) -> Result<LemmaReport> {
    let data = FaceData::new(engine, p)?;
    let n = p.ambient_dim();
    let mut counts = Vec::with_capacity(data.lattice.len());
    for face in 0..data.lattice.len() {
        counts.push(feasible_points(engine, p, &data, face, t)?.points.len());
    }
    let dc = domain_complex_of_dilate(engine, p, t)?;
    let identity: Vec<RatVec> = (0..n).map(|i| unit_vec(n, i)).collect();
    let dc_vol = dc.volume(&identity)?;
    let mut weighted = Rational::zero();
    for (face, &k) in counts.iter().enumerate() {
        weighted += engine.entry(&data.cones[face])?.v * rat(k as i64);
    }
    let count = p.count_points(t);
    let tr = rat(t as i64);
    let mut faces = Vec::new();
    for f in 0..data.lattice.len() {
        let dim = data.lattice.faces[f].dim;
        let mut vol = p.relative_volume(&data.lattice.faces[f]);
        for _ in 0..dim {
            vol *= &tr;
        }
        let mut sum = Rational::zero();
        for g in 0..data.lattice.len() {
            if !data.lattice.le(g, f) {
                continue;
            }
            let w = engine.correction_volume(&data.cones[g], &data.cones[f])?;
            sum += w * rat(counts[g] as i64);
        }
        faces.push((f, vol, sum));
    }
    Ok(LemmaReport { dc: (dc_vol, weighted, count), faces })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalFormulaCheck {
    pub ok: bool,
    pub ehrhart: EhrhartPolynomial,
    pub report: LocalFormulaReport,
}

/// Compares the local formula with brute-force interpolation.
pub fn verify_local_formula(engine: &mut MuEngine, p: &Polytope) -> Result<LocalFormulaCheck> {
    let report = engine.local_formula(p)?;
    let ehrhart = ehrhart_interpolate(p);
    let ok = report.coefficients == ehrhart.coefficients;
    Ok(LocalFormulaCheck { ok, ehrhart, report })
}

/// `e_0 = 1`, `e_d = vol(P)` and `e_{d−1} = ½ Σ vol(facets)`.
pub fn known_coefficients_hold(p: &Polytope, e: &[Rational]) -> bool {
    let d = p.dim();
    if e.len() != d + 1 || !e[0].is_one() || e[d] != p.volume() {
        return false;
    }
    if d == 0 {
        return true;
    }
    let fl = p.face_lattice();
    let facets: Rational = fl.of_dim(d - 1).iter().map(|&i| p.relative_volume(&fl.faces[i])).sum();
    e[d - 1] == facets / rat(2)
}

/// `x ∈ T(C) ⇒ x ∈ R(C)`.
pub fn base_inclusion(engine: &mut MuEngine, c: &Cone) -> Result<bool> {
    let r = engine.builder().region(c)?;
    let t = engine.builder().domain(c)?;
    Ok(t.ambient().subtract(&r.complex).is_empty())
}

/// The one-cone tiling of `⌈C^∨⌉` inside a cube of half side `radius`.
pub fn one_cone_tiling(engine: &mut MuEngine, c: &Cone, radius: i64) -> Result<TilingVerdict> {
    let w = BBox::cube(engine.ctx().n, &rat(radius));
    let (pieces, target) = engine.builder().one_cone_tiling(c, &w)?;
    let parts: Vec<HComplex> = pieces.into_iter().map(|p| p.complex).collect();
    Ok(verify_strict_tiling(&parts, &target))
}

/// `μ(C ∪ K) + μ(C ∩ K) − μ(C) − μ(K)`; no claim is made about its sign.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationRow {
    pub c: Cone,
    pub k: Cone,
    pub discrepancy: Rational,
}

/// Runs the valuation experiment on pairs whose union is convex.
pub fn valuation_probe(engine: &mut MuEngine, pairs: &[(Cone, Cone)]) -> Result<Vec<ValuationRow>> {
    let n = engine.ctx().n;
    let mut out = Vec::new();
    for (c, k) in pairs {
        let mut gens = c.rays().to_vec();
        gens.extend(k.rays().iter().cloned());
        for u in c.lineality().iter().chain(k.lineality()) {
            gens.push(u.clone());
            gens.push(crate::linalg::vneg(u));
        }
        let union = Cone::from_generators(n, &gens)?;
        let (fc, ac) = c.facets();
        let (fk, ak) = k.facets();
        let mut rows = fc;
        rows.extend(fk);
        for a in ac.into_iter().chain(ak) {
            rows.push(crate::linalg::vneg(&a));
            rows.push(a);
        }
        let meet = Cone::from_inequalities(n, &rows)?;
        let d = engine.mu(&union)? + engine.mu(&meet)? - engine.mu(c)? - engine.mu(k)?;
        out.push(ValuationRow { c: c.clone(), k: k.clone(), discrepancy: d });
    }
    Ok(out)
}

/// Seeded random lattice polygons with vertices in `[−r, r]²`: each is the
/// hull of 3 to 6 uniform lattice points, redrawn until two-dimensional.
pub fn random_polygons(seed: u64, count: usize, r: i64) -> Vec<Polytope> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.gen_range(3..=6);
        let pts: Vec<RatVec> = (0..k).map(|_| vec![rat(rng.gen_range(-r..=r)), rat(rng.gen_range(-r..=r))]).collect();
        let p = Polytope::hull(2, &pts);
        if p.is_full_dim() {
            out.push(p);
        }
    }
    out
}
