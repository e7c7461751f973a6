//! Exact rational linear algebra and lattice helpers.
//!
//! Every quantity in this crate is an exact [`Rational`]. Lattice computations
//! (Hermite normal form, induced lattices) work on integer matrices obtained by
//! clearing denominators.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rational = BigRational;
pub type RatVec = Vec<Rational>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(Int::from(p), Int::from(q))
}

pub fn int_to_rat(n: &Int) -> Rational {
    Rational::from_integer(n.clone())
}

pub fn rvec(xs: &[i64]) -> RatVec {
    xs.iter().map(|&x| rat(x)).collect()
}

/// Parses `"p/q"` or `"p"` (optional sign, surrounding whitespace allowed).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("malformed rational '{s}'"));
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p: Int = p.parse().map_err(|_| bad())?;
    let q: Int = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(Error::Parse(format!("zero denominator in '{s}'")));
    }
    Ok(Rational::new(p, q))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn dot(x: &[Rational], y: &[Rational]) -> Rational {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Rational::zero();
    for (a, b) in x.iter().zip(y) {
        if !a.is_zero() && !b.is_zero() {
            acc += a * b;
        }
    }
    acc
}

pub fn vadd(x: &[Rational], y: &[Rational]) -> RatVec {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn vsub(x: &[Rational], y: &[Rational]) -> RatVec {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn vscale(x: &[Rational], c: &Rational) -> RatVec {
    x.iter().map(|a| a * c).collect()
}

pub fn vneg(x: &[Rational]) -> RatVec {
    x.iter().map(|a| -a).collect()
}

pub fn is_zero_vec(x: &[Rational]) -> bool {
    x.iter().all(Zero::is_zero)
}

pub fn is_integral(x: &[Rational]) -> bool {
    x.iter().all(|a| a.denom().is_one())
}

pub fn zero_vec(n: usize) -> RatVec {
    vec![Rational::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> RatVec {
    let mut v = zero_vec(n);
    v[i] = Rational::one();
    v
}

/// Positive multiple of `x` with coprime integer entries. The zero vector is
/// returned unchanged.
pub fn primitive(x: &[Rational]) -> RatVec {
    let (v, _) = primitive_with_factor(x);
    v
}

/// Like [`primitive`], also returning the positive factor `c` with
/// `primitive(x) = c * x`.
pub fn primitive_with_factor(x: &[Rational]) -> (RatVec, Rational) {
    let mut l = Int::one();
    for a in x {
        l = l.lcm(a.denom());
    }
    let mut g = Int::zero();
    for a in x {
        let n = (a * int_to_rat(&l)).to_integer();
        g = g.gcd(&n);
    }
    if g.is_zero() {
        return (x.to_vec(), Rational::one());
    }
    let c = Rational::new(l, g);
    (vscale(x, &c), c)
}

/// Lexicographic sign of a vector: the sign of its first nonzero entry.
pub fn lex_sign(x: &[Rational]) -> i32 {
    for a in x {
        if a.is_positive() {
            return 1;
        }
        if a.is_negative() {
            return -1;
        }
    }
    0
}

/// Ceiling of the square root of a nonnegative rational.
pub fn ceil_sqrt(x: &Rational) -> Int {
    if !x.is_positive() {
        return Int::zero();
    }
    let c = x.ceil().to_integer();
    let mut r = c.sqrt();
    while &r * &r < c {
        r += 1;
    }
    r
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: &[RatVec]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row.iter().cloned());
        }
        RatMat { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors. `n` is needed for the
    /// empty list.
    pub fn from_cols(n: usize, cols: &[RatVec]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n, "column of wrong length");
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(&rows.iter().map(|r| rvec(r)).collect::<Vec<_>>())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> RatVec {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn cols(&self) -> Vec<RatVec> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn rows_vec(&self) -> Vec<RatVec> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Rational]) -> RatVec {
        assert_eq!(self.cols, x.len(), "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ · self`, i.e. `selfᵀ · x`.
    pub fn tmul_vec(&self, x: &[Rational]) -> RatVec {
        assert_eq!(self.rows, x.len());
        let mut out = zero_vec(self.cols);
        for i in 0..self.rows {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] += &x[i] * &self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> RatMat {
        RatMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn add(&self, other: &RatMat) -> RatMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rows)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|a| a.denom().is_one())
    }

    /// Row echelon form by Gaussian elimination; returns (reduced matrix,
    /// pivot columns).
    pub fn rref(&self) -> (RatMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Basis of the right null space `{x : self · x = 0}`.
    pub fn nullspace(&self) -> Vec<RatVec> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = zero_vec(self.cols);
                x[f] = Rational::one();
                for (i, &p) in pivots.iter().enumerate() {
                    x[p] = -r[(i, f)].clone();
                }
                x
            })
            .collect()
    }

    pub fn det(&self) -> Rational {
        assert!(self.is_square(), "determinant of non-square matrix");
        let mut m = self.clone();
        let n = m.rows;
        let mut d = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                d = -d;
            }
            let piv = m[(c, c)].clone();
            d *= &piv;
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] / &piv;
                for j in c..n {
                    let v = &m[(c, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
        }
        d
    }

    pub fn inverse(&self) -> Option<RatMat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Solves `self · y = b` for `y` when `b` lies in the column span
    /// (columns assumed independent). Returns `None` otherwise.
    pub fn solve(&self, b: &[Rational]) -> Option<RatVec> {
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        if pivots.len() < self.cols {
            return None;
        }
        Some((0..self.cols).map(|i| r[(i, self.cols)].clone()).collect())
    }

    /// Positive definiteness via leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        (1..=self.rows).all(|k| {
            let mut m = Self::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] = self[(i, j)].clone();
                }
            }
            m.det().is_positive()
        })
    }

    fn to_int_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows)
            .map(|i| {
                let mut l = Int::one();
                for a in self.row(i) {
                    l = l.lcm(a.denom());
                }
                self.row(i).iter().map(|a| (a * int_to_rat(&l)).to_integer()).collect()
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Rank of a list of vectors of length `n`.
pub fn rank_of(n: usize, vecs: &[RatVec]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    let _ = n;
    RatMat::from_rows(vecs).rank()
}

/// Extracts a maximal linearly independent subset (in order of appearance).
pub fn independent_subset(vecs: &[RatVec]) -> Vec<RatVec> {
    let mut out: Vec<RatVec> = Vec::new();
    for v in vecs {
        let mut cand = out.clone();
        cand.push(v.clone());
        if RatMat::from_rows(&cand).rank() == cand.len() {
            out = cand;
        }
    }
    out
}

/// Affine rank (dimension of the affine hull) of a point set; -1 if empty.
pub fn affine_dim(points: &[RatVec]) -> isize {
    if points.is_empty() {
        return -1;
    }
    let diffs: Vec<RatVec> = points[1..].iter().map(|p| vsub(p, &points[0])).collect();
    if diffs.is_empty() {
        return 0;
    }
    RatMat::from_rows(&diffs).rank() as isize
}

/// Column Hermite normal form: returns `(H, U)` with `H = M · U`, `U`
/// unimodular, and `H` lower-triangular in staircase form (pivot entries
/// positive, entries left of a pivot reduced into `[0, pivot)`, zero columns
/// last). Requires integer entries.
pub fn hnf(m: &RatMat) -> Result<(RatMat, RatMat)> {
    if !m.is_integral() {
        return Err(Error::Domain("hnf requires an integer matrix".into()));
    }
    let rows = m.nrows();
    let cols = m.ncols();
    let mut h = m.clone();
    let mut u = RatMat::identity(cols);
    let mut piv_col = 0;
    for r in 0..rows {
        if piv_col == cols {
            break;
        }
        // Euclid across columns piv_col.. on row r.
        loop {
            let nz: Vec<usize> = (piv_col..cols).filter(|&j| !h[(r, j)].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let j_min = *nz.iter().min_by_key(|&&j| h[(r, j)].abs()).unwrap();
            h.swap_cols(piv_col, j_min);
            u.swap_cols(piv_col, j_min);
            let mut done = true;
            for j in piv_col + 1..cols {
                if h[(r, j)].is_zero() {
                    continue;
                }
                let q = (&h[(r, j)] / &h[(r, piv_col)]).floor();
                col_axpy(&mut h, j, piv_col, &q);
                col_axpy(&mut u, j, piv_col, &q);
                if !h[(r, j)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, piv_col)].is_zero() {
            continue;
        }
        if h[(r, piv_col)].is_negative() {
            col_negate(&mut h, piv_col);
            col_negate(&mut u, piv_col);
        }
        for j in 0..piv_col {
            let q = (&h[(r, j)] / &h[(r, piv_col)]).floor();
            if !q.is_zero() {
                col_axpy(&mut h, j, piv_col, &q);
                col_axpy(&mut u, j, piv_col, &q);
            }
        }
        piv_col += 1;
    }
    Ok((h, u))
}

// column j -= q * column k
fn col_axpy(m: &mut RatMat, j: usize, k: usize, q: &Rational) {
    for i in 0..m.nrows() {
        let v = &m[(i, k)] * q;
        m[(i, j)] -= v;
    }
}

fn col_negate(m: &mut RatMat, j: usize) {
    for i in 0..m.nrows() {
        let v = -m[(i, j)].clone();
        m[(i, j)] = v;
    }
}

/// Basis of the integer kernel `{x ∈ Zⁿ : A x = 0}` for a rational matrix.
pub fn integer_kernel(a: &RatMat) -> Vec<RatVec> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return (0..n).map(|i| unit_vec(n, i)).collect();
    }
    let int_rows = a.to_int_rows();
    let ai = RatMat::from_rows(
        &int_rows.iter().map(|r| r.iter().map(int_to_rat).collect()).collect::<Vec<_>>(),
    );
    let (h, u) = hnf(&ai).expect("integer matrix");
    (0..n).filter(|&j| (0..h.nrows()).all(|i| h[(i, j)].is_zero())).map(|j| u.col(j)).collect()
}

/// Canonical basis of a full-rank sublattice of Zⁿ given by integer columns:
/// the nonzero columns of its column HNF.
pub fn canonical_lattice_basis(n: usize, basis: &[RatVec]) -> Vec<RatVec> {
    if basis.is_empty() {
        return Vec::new();
    }
    let (h, _) = hnf(&RatMat::from_cols(n, basis)).expect("integer lattice basis");
    h.cols().into_iter().filter(|c| !is_zero_vec(c)).collect()
}

/// Euclidean space with a lattice and an inner product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeometryContext {
    pub n: usize,
    /// Columns generate the lattice Λ.
    pub basis: RatMat,
    /// Gram matrix of the inner product in ambient coordinates.
    pub gram: RatMat,
}

impl GeometryContext {
    pub fn new(basis: RatMat, gram: RatMat) -> Result<Self> {
        let n = basis.nrows();
        if !basis.is_square() || basis.det().is_zero() {
            return Err(Error::Domain("lattice basis must be square and nonsingular".into()));
        }
        if gram.nrows() != n || !gram.is_square() {
            return Err(Error::Dimension { expected: n, found: gram.nrows() });
        }
        if !gram.is_positive_definite() {
            return Err(Error::Domain("Gram matrix must be symmetric positive definite".into()));
        }
        Ok(GeometryContext { n, basis, gram })
    }

    /// Zⁿ with the standard inner product.
    pub fn standard(n: usize) -> Self {
        GeometryContext { n, basis: RatMat::identity(n), gram: RatMat::identity(n) }
    }

    /// Zⁿ with the given Gram matrix.
    pub fn with_gram(gram: RatMat) -> Result<Self> {
        Self::new(RatMat::identity(gram.nrows()), gram)
    }

    pub fn is_standard_lattice(&self) -> bool {
        self.basis.is_identity()
    }

    /// The same geometry expressed in lattice coordinates (basis = identity,
    /// Gram = BᵀGB).
    pub fn lattice_coordinates(&self) -> GeometryContext {
        let g = self.basis.transpose().mul(&self.gram).mul(&self.basis);
        GeometryContext { n: self.n, basis: RatMat::identity(self.n), gram: g }
    }

    pub fn inner(&self, x: &[Rational], y: &[Rational]) -> Result<Rational> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(dot(x, &self.gram.mul_vec(y)))
    }

    pub(crate) fn ip(&self, x: &[Rational], y: &[Rational]) -> Rational {
        dot(x, &self.gram.mul_vec(y))
    }

    pub fn norm_sq(&self, x: &[Rational]) -> Rational {
        self.ip(x, x)
    }

    /// The linear functional `y ↦ ⟨x, y⟩` as a coefficient vector `G x`.
    pub fn functional(&self, x: &[Rational]) -> RatVec {
        self.gram.mul_vec(x)
    }

    pub fn check_dim(&self, x: &[Rational]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: x.len() });
        }
        Ok(())
    }
}

/// Basis of Λ ∩ span(S), as ambient vectors. The basis is saturated and in
/// canonical (HNF) form with respect to lattice coordinates.
pub fn induced_lattice_basis(ctx: &GeometryContext, s: &[RatVec]) -> Result<Vec<RatVec>> {
    for v in s {
        ctx.check_dim(v)?;
    }
    let binv = ctx.basis.inverse().expect("nonsingular basis");
    let local: Vec<RatVec> = s.iter().map(|v| binv.mul_vec(v)).collect();
    let span = independent_subset(&local);
    let k = span.len();
    // annihilator of span in lattice coordinates
    let ann = if k == 0 {
        RatMat::identity(ctx.n)
    } else {
        let rows = RatMat::from_rows(&span).nullspace();
        if rows.is_empty() {
            RatMat::zeros(0, ctx.n)
        } else {
            RatMat::from_rows(&rows)
        }
    };
    let kernel = integer_kernel(&ann);
    if kernel.len() != k {
        return Err(Error::Domain("subspace is not rational with respect to the lattice".into()));
    }
    let canon = canonical_lattice_basis(ctx.n, &kernel);
    Ok(canon.iter().map(|c| ctx.basis.mul_vec(c)).collect())
}

/// Basis of the G-orthogonal complement `{x : ⟨x, s⟩ = 0 ∀ s ∈ S}`.
pub fn orth_complement(ctx: &GeometryContext, s: &[RatVec]) -> Result<Vec<RatVec>> {
    for v in s {
        ctx.check_dim(v)?;
    }
    if s.is_empty() {
        return Ok((0..ctx.n).map(|i| unit_vec(ctx.n, i)).collect());
    }
    let rows: Vec<RatVec> = s.iter().map(|v| ctx.functional(v)).collect();
    Ok(RatMat::from_rows(&rows).nullspace())
}

/// Squared G-covolume `det(Lᵀ G L)` of the lattice spanned by the given
/// (independent) vectors.
pub fn covolume(ctx: &GeometryContext, l: &[RatVec]) -> Result<Rational> {
    if l.is_empty() {
        return Ok(Rational::one());
    }
    let b = RatMat::from_cols(ctx.n, l);
    let m = b.transpose().mul(&ctx.gram).mul(&b);
    let d = m.det();
    if d.is_zero() {
        return Err(Error::Domain("covolume of dependent vectors".into()));
    }
    Ok(d)
}

/// Greedy pairwise size reduction of a lattice basis under the Gram matrix.
pub fn size_reduce(gram: &RatMat, basis: &[RatVec]) -> Vec<RatVec> {
    let ip = |x: &RatVec, y: &RatVec| dot(x, &gram.mul_vec(y));
    let mut b = basis.to_vec();
    loop {
        let mut changed = false;
        for i in 0..b.len() {
            for j in 0..b.len() {
                if i == j {
                    continue;
                }
                let q = (ip(&b[i], &b[j]) / ip(&b[j], &b[j])).round();
                if q.is_zero() {
                    continue;
                }
                let cand = vsub(&b[i], &vscale(&b[j], &q));
                if ip(&cand, &cand) < ip(&b[i], &b[i]) {
                    b[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g21() -> RatMat {
        RatMat::from_i64(&[&[2, 1], &[1, 2]])
    }

    #[test]
    fn inner_products() {
        let std = GeometryContext::standard(2);
        assert_eq!(std.inner(&rvec(&[1, 0]), &rvec(&[0, 1])).unwrap(), rat(0));
        let hex = GeometryContext::with_gram(g21()).unwrap();
        assert_eq!(hex.inner(&rvec(&[1, 0]), &rvec(&[0, 1])).unwrap(), rat(1));
        assert_eq!(hex.inner(&rvec(&[1, -1]), &rvec(&[1, -1])).unwrap(), rat(2));
        assert!(matches!(
            hex.inner(&rvec(&[1, 0, 0]), &rvec(&[0, 1])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn hnf_examples() {
        let (h, u) = hnf(&RatMat::identity(2)).unwrap();
        assert_eq!(h, RatMat::identity(2));
        assert_eq!(u, RatMat::identity(2));
        let d = RatMat::from_i64(&[&[2, 0], &[0, 3]]);
        assert_eq!(hnf(&d).unwrap().0, d);
        let row = RatMat::from_i64(&[&[4, 6]]);
        let (h, u) = hnf(&row).unwrap();
        assert_eq!(h, RatMat::from_i64(&[&[2, 0]]));
        assert_eq!(row.mul(&u), h);
        assert!(u.det().abs().is_one());
    }

    #[test]
    fn hnf_rejects_fractions() {
        let m = RatMat::from_rows(&[vec![ratio(1, 2)]]);
        assert!(hnf(&m).is_err());
    }

    #[test]
    fn induced_lattices() {
        let ctx = GeometryContext::standard(2);
        assert_eq!(induced_lattice_basis(&ctx, &[rvec(&[1, 1])]).unwrap(), vec![rvec(&[1, 1])]);
        assert_eq!(induced_lattice_basis(&ctx, &[rvec(&[2, 4])]).unwrap(), vec![rvec(&[1, 2])]);
        let ctx3 = GeometryContext::standard(3);
        let b = induced_lattice_basis(&ctx3, &[rvec(&[1, 0, 0]), rvec(&[0, 2, 2])]).unwrap();
        assert_eq!(b, vec![rvec(&[1, 0, 0]), rvec(&[0, 1, 1])]);
    }

    #[test]
    fn induced_lattice_rejects_irrational_directions() {
        // (1, 1/2) is rational, so try a rational line that is fine, and a
        // dimension error instead.
        let ctx = GeometryContext::standard(2);
        assert!(induced_lattice_basis(&ctx, &[rvec(&[1, 0, 0])]).is_err());
        let b = induced_lattice_basis(&ctx, &[vec![rat(1), ratio(1, 2)]]).unwrap();
        assert_eq!(b, vec![rvec(&[2, 1])]);
    }

    #[test]
    fn orthogonal_complements() {
        let ctx = GeometryContext::standard(2);
        let c = orth_complement(&ctx, &[rvec(&[1, 0])]).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0][0].is_zero() && !c[0][1].is_zero());
        let hex = GeometryContext::with_gram(g21()).unwrap();
        let c = orth_complement(&hex, &[rvec(&[1, 0])]).unwrap();
        assert_eq!(primitive(&c[0]), rvec(&[-1, 2]));
        assert!(orth_complement(&ctx, &[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap().is_empty());
    }

    #[test]
    fn covolumes() {
        let ctx = GeometryContext::standard(2);
        assert_eq!(covolume(&ctx, &[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), rat(1));
        assert_eq!(covolume(&ctx, &[rvec(&[1, 1])]).unwrap(), rat(2));
        let hex = GeometryContext::with_gram(g21()).unwrap();
        assert_eq!(covolume(&hex, &[rvec(&[1, 0]), rvec(&[0, 1])]).unwrap(), rat(3));
        assert!(covolume(&ctx, &[rvec(&[1, 1]), rvec(&[2, 2])]).is_err());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational(" -3/6 ").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&ratio(3, 6)), "1/2");
        assert_eq!(format_rational(&rat(-4)), "-4");
    }

    #[test]
    fn pd_check_and_context_validation() {
        assert!(g21().is_positive_definite());
        assert!(!RatMat::from_i64(&[&[1, 2], &[2, 1]]).is_positive_definite());
        assert!(GeometryContext::with_gram(RatMat::from_i64(&[&[1, 2], &[2, 1]])).is_err());
        assert!(GeometryContext::new(RatMat::zeros(2, 2), RatMat::identity(2)).is_err());
    }

    #[test]
    fn ceil_sqrt_bounds() {
        assert_eq!(ceil_sqrt(&rat(16)), Int::from(4));
        assert_eq!(ceil_sqrt(&rat(17)), Int::from(5));
        assert_eq!(ceil_sqrt(&ratio(1, 4)), Int::from(1));
        assert_eq!(ceil_sqrt(&rat(0)), Int::from(0));
    }
}
