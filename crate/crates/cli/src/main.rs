//! `ehrlocal`: local formulas for Ehrhart coefficients from the command line.
//!
//! Exit codes: 0 success, 1 verification mismatch or failed tiling, 2 bad
//! input, 3 window or resource limits.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ehrlocal_core::io::{parse_problem, EhrhartJson, Problem, ReportJson, TilingJson, VerifyJson};
use ehrlocal_core::linalg::{format_rational, int_to_rat, rat};
use ehrlocal_core::svg::SvgScene;
use ehrlocal_core::verify::{ehrhart_interpolate, verify_local_formula, verify_theorem1, EhrhartPolynomial};
use ehrlocal_core::{Error, Frame, HComplex, MuEngine, RatVec};
use rand::{Rng, SeedableRng};

const DEFAULT_T_MAX: u64 = 8;

#[derive(Parser, Debug)]
#[command(name = "ehrlocal", version, about = "Exact local formulas for Ehrhart coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Dilation factor for tiling checks.
    #[arg(long)]
    t: Option<u64>,
    /// Largest dilation tried when searching for a tiling.
    #[arg(long)]
    tmax: Option<u64>,
    /// Output path; stdout when omitted (for `tiling`, the SVG file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the extra evaluation points drawn by `verify`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// μ of every normal cone and the resulting coefficients.
    Mu(Common),
    /// Ehrhart coefficients by counting lattice points.
    Ehrhart(Common),
    /// Compare the local formula with the counted Ehrhart polynomial.
    Verify(Common),
    /// Check the tiling of the dilated covering complex and draw it.
    Tiling(Common),
}

#[derive(Debug)]
enum Failure {
    Mismatch,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("ehrlocal: {e}");
            if e.is_resource() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Mu(c) => cmd_mu(&c),
        Command::Ehrhart(c) => cmd_ehrhart(&c),
        Command::Verify(c) => cmd_verify(&c),
        Command::Tiling(c) => cmd_tiling(&c),
    }
}

fn load(c: &Common) -> Result<(Problem, MuEngine), Failure> {
    let problem = read(&c.problem)?;
    let engine = MuEngine::new(problem.ctx.clone(), problem.policy.clone())?;
    Ok((problem, engine))
}

fn read(path: &Path) -> Result<Problem, Failure> {
    parse_problem(path).map_err(|e| match e {
        Error::Io(io) => Error::input(path.display().to_string(), io.to_string()).into(),
        e => e.into(),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Error(e.into())),
        None => stdout(text),
    }
}

fn stdout(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Error(e.into())),
        _ => Ok(()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data")
}

fn cmd_mu(c: &Common) -> Result<(), Failure> {
    let (problem, mut engine) = load(c)?;
    let report = engine.local_formula(&problem.polytope)?;
    emit(c.out.as_deref(), &ReportJson::from_report(&problem, &report).to_json())
}

fn counts(problem: &Problem, e: &EhrhartPolynomial) -> Vec<String> {
    (0..=e.degree() as u64).map(|t| problem.polytope.count_points(t).to_string()).collect()
}

fn cmd_ehrhart(c: &Common) -> Result<(), Failure> {
    let problem = read(&c.problem)?;
    let e = ehrhart_interpolate(&problem.polytope);
    let out = EhrhartJson { coefficients: e.coefficients.iter().map(format_rational).collect(), counts: counts(&problem, &e) };
    emit(c.out.as_deref(), &to_json(&out))
}

fn cmd_verify(c: &Common) -> Result<(), Failure> {
    let (problem, mut engine) = load(c)?;
    let check = verify_local_formula(&mut engine, &problem.polytope)?;
    let mut out = VerifyJson::new(&check.report.coefficients, &check.ehrhart.coefficients);
    // extra dilations beyond the interpolation nodes
    let seed = c.seed.or(problem.options.seed).unwrap_or(0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let local = EhrhartPolynomial { coefficients: check.report.coefficients.clone() };
    let d = check.ehrhart.degree() as u64;
    for _ in 0..3 {
        let t = rng.gen_range(d + 1..=d + 6);
        if local.eval(&rat(t as i64)) != int_to_rat(&problem.polytope.count_points(t)) {
            out.ok = false;
            eprintln!("count mismatch at t = {t}");
        }
    }
    emit(c.out.as_deref(), &to_json(&out))?;
    if out.ok {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn cmd_tiling(c: &Common) -> Result<(), Failure> {
    let (problem, mut engine) = load(c)?;
    let p = &problem.polytope;
    if !p.is_full_dim() {
        return Err(Error::input("vertices", "tiling needs a full-dimensional polytope").into());
    }
    let t_max = c.tmax.or(problem.options.t_max).unwrap_or(DEFAULT_T_MAX);
    let candidates: Vec<u64> = match c.t.or(problem.options.t) {
        Some(t) => vec![t],
        None => (1..=t_max).collect(),
    };
    let mut last = None;
    for t in candidates {
        let outcome = verify_theorem1(&mut engine, p, t)?;
        let ok = outcome.verdict.ok;
        last = Some((t, outcome));
        if ok {
            break;
        }
    }
    let (t, outcome) = last.ok_or_else(|| Failure::Error(Error::input("t", "no dilation to try")))?;
    let fl = p.face_lattice();
    let mut by_dim = vec![0; p.dim() + 1];
    for (face, _, _) in &outcome.pieces {
        by_dim[fl.faces[*face].dim] += 1;
    }
    let failure = outcome.verdict.failure.as_ref();
    let json = TilingJson {
        ok: outcome.verdict.ok,
        t,
        pieces: outcome.pieces.len(),
        pieces_by_dim: by_dim,
        failure: failure.map(|f| format!("{f:?}").split_whitespace().next().unwrap_or_default().to_string()),
        witness: failure.map(|f| problem.to_ambient(f.witness()).iter().map(format_rational).collect()),
    };
    stdout(&to_json(&json))?;
    if p.ambient_dim() == 2 {
        let svg = scene(&problem, t, &outcome.pieces, &outcome.target, &fl)?;
        match &c.out {
            Some(path) => std::fs::write(path, svg).map_err(|e| Failure::Error(e.into()))?,
            None => eprintln!("no --out given; SVG not written"),
        }
    }
    if outcome.verdict.ok {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn scene(
    problem: &Problem,
    t: u64,
    pieces: &[(usize, RatVec, HComplex)],
    target: &HComplex,
    fl: &ehrlocal_core::polytope::FaceLattice,
) -> Result<String, Failure> {
    let frame = Frame::linear(2, problem.basis.cols());
    let push = |c: &HComplex| HComplex::from_cells(2, c.cells.iter().map(|x| x.pushforward(&frame)).collect());
    let tp = problem.polytope.dilate(&rat(t as i64));
    let mut s = SvgScene::new();
    s.outline = tp.vertices().iter().map(|v| problem.to_ambient(v)).collect();
    s.shading.push(push(target));
    for (face, x, piece) in pieces {
        s.regions.push((fl.faces[*face].dim, push(piece)));
        s.points.push(problem.to_ambient(x));
    }
    if let Some(b) = target.loose_bbox() {
        ehrlocal_core::polytope::for_each_lattice_point(&b.lo, &b.hi, &mut |z| s.lattice.push(problem.to_ambient(z)));
    }
    s.fit(0.5);
    Ok(s.render()?)
}
