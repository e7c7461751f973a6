use ehrlocal_core::domains::{DomainKind, DomainPolicy};
use ehrlocal_core::io::ReportJson;
use ehrlocal_core::linalg::{hnf, rat, ratio, rvec};
use ehrlocal_core::mu::orbit_constancy;
use ehrlocal_core::verify::{ehrhart_interpolate, random_polygons};
use ehrlocal_core::{BBox, Constraint, GeometryContext, HCell, HComplex, MuEngine, Polytope, RatMat, RatVec, Rational};
use num_integer::Integer;
use proptest::prelude::*;

fn cell_strategy() -> impl Strategy<Value = HCell> {
    let constraint = (prop::collection::vec(-2i64..=2, 2), -4i64..=4, any::<bool>());
    prop::collection::vec(constraint, 0..=3).prop_map(|cs| {
        let mut c = BBox::cube(2, &rat(2)).to_cell();
        for (a, b, strict) in cs {
            c.push(Constraint::new(a.into_iter().map(rat).collect(), ratio(b, 2), strict));
        }
        c
    })
}

fn point_strategy() -> impl Strategy<Value = RatVec> {
    // quarter-grid points hit boundaries often
    prop::collection::vec(-10i64..=10, 2).prop_map(|v| v.into_iter().map(|x| ratio(x, 4)).collect())
}

/// Twice the area of a lattice polygon, by the shoelace formula over the hull.
fn twice_area(p: &Polytope) -> i64 {
    let vs = ordered(p);
    let k = vs.len();
    (0..k).map(|i| vs[i].0 * vs[(i + 1) % k].1 - vs[(i + 1) % k].0 * vs[i].1).sum::<i64>().abs()
}

fn boundary_points(p: &Polytope) -> i64 {
    let vs = ordered(p);
    let k = vs.len();
    (0..k).map(|i| (vs[(i + 1) % k].0 - vs[i].0).gcd(&(vs[(i + 1) % k].1 - vs[i].1))).sum()
}

fn ordered(p: &Polytope) -> Vec<(i64, i64)> {
    let to_i = |x: &Rational| x.to_integer().try_into().unwrap();
    let mut vs: Vec<(i64, i64)> = p.vertices().iter().map(|v| (to_i(&v[0]), to_i(&v[1]))).collect();
    let (cx, cy) = (
        vs.iter().map(|v| v.0 as f64).sum::<f64>() / vs.len() as f64,
        vs.iter().map(|v| v.1 as f64).sum::<f64>() / vs.len() as f64,
    );
    vs.sort_by(|a, b| {
        let ta = (a.1 as f64 - cy).atan2(a.0 as f64 - cx);
        let tb = (b.1 as f64 - cy).atan2(b.0 as f64 - cx);
        ta.partial_cmp(&tb).unwrap()
    });
    vs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn difference_membership(a in cell_strategy(), b in cell_strategy(), x in point_strategy()) {
        let diff = HComplex::from_cells(2, a.minus(&b));
        prop_assert_eq!(diff.contains_point(&x), a.contains(&x) && !b.contains(&x));
        let both = HComplex::from_cell(a.clone()).intersect(&HComplex::from_cell(b.clone()));
        prop_assert_eq!(both.contains_point(&x), a.contains(&x) && b.contains(&x));
    }

    #[test]
    fn volume_additivity(a in cell_strategy(), b in cell_strategy()) {
        let whole = a.volume().unwrap();
        let inside = a.intersect(&b).map(|c| c.volume().unwrap()).unwrap_or_else(|| rat(0));
        let outside: Rational = a.minus(&b).iter().map(|c| c.volume().unwrap()).sum();
        prop_assert_eq!(whole, inside + outside);
    }

    #[test]
    fn hnf_shape(entries in prop::collection::vec(-6i64..=6, 9)) {
        let m = RatMat::from_i64(&[&entries[0..3], &entries[3..6], &entries[6..9]]);
        let (h, u) = hnf(&m).unwrap();
        prop_assert_eq!(&m.mul(&u), &h);
        prop_assert!(u.is_integral());
        prop_assert!(u.det() == rat(1) || u.det() == rat(-1));
        for i in 0..3 {
            for j in i + 1..3 {
                prop_assert_eq!(&h[(i, j)], &rat(0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // e_0 = 1, e_2 = area, e_1 = half the boundary lattice length, and the
    // whole polynomial matches point counts
    #[test]
    fn polygon_coefficients(seed in any::<u64>()) {
        let p = random_polygons(seed, 1, 2).pop().unwrap();
        let mut e = MuEngine::new(GeometryContext::standard(2), DomainPolicy::voronoi()).unwrap();
        let r = e.local_formula(&p).unwrap();
        prop_assert_eq!(&r.coefficients, &vec![rat(1), ratio(boundary_points(&p), 2), ratio(twice_area(&p), 2)]);
        prop_assert_eq!(&r.coefficients, &ehrhart_interpolate(&p).coefficients);
        prop_assert!(e.table().is_consistent());
    }

    #[test]
    fn dilation_and_translation(seed in any::<u64>(), t in 2i64..=3, dx in -3i64..=3, dy in -3i64..=3) {
        let p = random_polygons(seed, 1, 2).pop().unwrap();
        let mut e = MuEngine::new(GeometryContext::standard(2), DomainPolicy::boxed()).unwrap();
        let base = e.local_formula(&p).unwrap();
        let moved = e.local_formula(&p.dilate(&rat(t)).translate(&rvec(&[dx, dy]))).unwrap();
        for d in 0..=2 {
            prop_assert_eq!(base.mu_of_dim(d), moved.mu_of_dim(d));
            let scale = Rational::from_integer(t.pow(d as u32).into());
            prop_assert_eq!(&moved.coefficients[d], &(&base.coefficients[d] * scale));
        }
    }

    // the square lattice symmetries fix both the Gram matrix and the Voronoi cell
    #[test]
    fn hyperoctahedral_orbits(seed in any::<u64>()) {
        let base = random_polygons(seed, 1, 2).pop().unwrap();
        // hull of the orbit under the 8 symmetries
        let mut pts = Vec::new();
        for v in base.vertices() {
            for (a, b) in [(&v[0], &v[1]), (&v[1], &v[0])] {
                for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    pts.push(vec![a * rat(sa), b * rat(sb)]);
                }
            }
        }
        let p = Polytope::new(2, &pts).unwrap();
        let mut e = MuEngine::new(GeometryContext::standard(2), DomainPolicy::voronoi()).unwrap();
        let gens = [RatMat::from_i64(&[&[0, 1], &[1, 0]]), RatMat::from_i64(&[&[-1, 0], &[0, 1]])];
        let rep = orbit_constancy(&mut e, &p, &gens).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.first_failure());
    }
}

fn square() -> Polytope {
    Polytope::new(2, &[rvec(&[0, 0]), rvec(&[1, 0]), rvec(&[1, 1]), rvec(&[0, 1])]).unwrap()
}

#[test]
fn shifted_square_is_linear_in_shift() {
    let etas = [ratio(1, 16), ratio(1, 8), ratio(3, 16), ratio(5, 16)];
    let mut vertex = Vec::new();
    let mut edge = Vec::new();
    for eta in &etas {
        let policy = DomainPolicy::shifted(DomainKind::Voronoi, vec![eta.clone(), rat(0)]);
        let mut e = MuEngine::new(GeometryContext::standard(2), policy).unwrap();
        let r = e.local_formula(&square()).unwrap();
        assert_eq!(r.coefficients, vec![rat(1), rat(2), rat(1)]);
        vertex.push(r.mu_of_dim(0));
        edge.push(r.mu_of_dim(1));
    }
    // each sorted entry is an affine function of the shift
    for series in [&vertex, &edge] {
        for k in 0..series[0].len() {
            let slope = (&series[1][k] - &series[0][k]) / (&etas[1] - &etas[0]);
            for i in 2..etas.len() {
                assert_eq!(&series[i][k] - &series[0][k], &slope * (&etas[i] - &etas[0]));
            }
        }
    }
    assert_eq!(vertex[0].iter().sum::<Rational>(), rat(1));
}

#[test]
fn report_json_round_trip() {
    let problem = ehrlocal_core::io::parse_problem_str(
        r#"{"dim": 2, "vertices": ["1, 0", "2, 1", "0, 2"], "policy": "box"}"#,
    )
    .unwrap();
    let mut e = MuEngine::new(problem.ctx.clone(), problem.policy.clone()).unwrap();
    let report = e.local_formula(&problem.polytope).unwrap();
    let json = ReportJson::from_report(&problem, &report);
    let back = ReportJson::from_json(&json.to_json()).unwrap();
    assert_eq!(back, json);
    assert_eq!(back.coefficients().unwrap(), report.coefficients);
}
