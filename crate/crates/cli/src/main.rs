//! `pinch4`: tables, curves, certificates and audits from the command line.

mod expr;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pinch4_core::curvature::{pinch_certificate, CurvOp, DEFAULT_TOL};
use pinch4_core::geography::{lambda_of_delta, region_polygon, LambdaCurve, Which};
use pinch4_core::oracle::audit;
use pinch4_core::polytopes::{einstein_simplex, ville_cells, Polytope};
use pinch4_core::qp_face::{optimize, restrict, threshold_windows, Definiteness, ScanPredicate, Sense};
use pinch4_core::quadforms::{f_ville, q_euler, q_eta, q_half, q_lambda, QuadForm};

use crate::expr::parse_real;
use crate::output::{Cell, Format, Table};

#[derive(Parser)]
#[command(name = "pinch4", version, about = "Curvature pinching bounds for four-manifolds")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vertex and face values of the quadratic forms.
    Tables {
        #[arg(long, value_enum)]
        which: WhichTable,
        #[arg(long, value_parser = parse_real)]
        delta: f64,
        /// Defaults to λ*(δ) for table4/5 and λᵛ(δ) for table6.
        #[arg(long, value_parser = parse_real)]
        lambda: Option<f64>,
    },
    /// Finsler-Thorpe certificate for an operator stored as JSON.
    Certify {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_parser = parse_real)]
        delta: f64,
        #[arg(long, value_parser = parse_real, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Extremum of a form over a polytope.
    Optimize {
        #[arg(long, value_enum)]
        form: FormName,
        #[arg(long, value_enum)]
        polytope: PolytopeName,
        #[arg(long, value_parser = parse_real)]
        delta: f64,
        #[arg(long, value_parser = parse_real, conflicts_with = "eta")]
        lambda: Option<f64>,
        #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
        eta: Option<f64>,
        #[arg(long, value_enum)]
        sense: SenseArg,
    },
    /// Windows of δ where a face of Δ⁶ holds its critical point in the relative interior.
    Thresholds {
        /// One-based vertex indices, e.g. `1,3`.
        #[arg(long, value_delimiter = ',', required = true)]
        face: Vec<usize>,
        #[arg(long, value_enum)]
        form: ThresholdForm,
        #[arg(long, value_parser = parse_real)]
        lambda: Option<f64>,
    },
    /// λ(δ) for the best, star and Ville curves.
    LambdaCurve {
        #[arg(long, value_parser = parse_real)]
        from: f64,
        #[arg(long, value_parser = parse_real)]
        to: f64,
        #[arg(long, value_parser = parse_real)]
        step: f64,
    },
    /// Admissible (|σ|, χ) polygon.
    Region {
        #[arg(long, value_parser = parse_real)]
        delta: f64,
    },
    /// Randomized check of every pointwise inequality; exits 1 on a violation.
    Audit {
        #[arg(long, value_parser = parse_real)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Vertex coordinates of a polytope.
    Vertices {
        #[arg(long, value_enum)]
        polytope: PolytopeName,
        #[arg(long, value_parser = parse_real)]
        delta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichTable {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
    Table6,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormName {
    Qhalf,
    Qlambda,
    Qeta,
    Qeuler,
    Fville,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThresholdForm {
    Qhalf,
    Qlambda,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolytopeName {
    D5,
    D6,
    D7,
    V1,
    V2,
    V3,
    V4,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    Min,
    Max,
}

impl From<SenseArg> for Sense {
    fn from(s: SenseArg) -> Self {
        match s {
            SenseArg::Min => Sense::Min,
            SenseArg::Max => Sense::Max,
        }
    }
}

type CmdResult = Result<(Table, bool), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn polytope(name: PolytopeName, delta: f64) -> Result<Polytope, String> {
    let cell = |i: usize| ville_cells(delta).map(|mut c| c.swap_remove(i));
    match name {
        PolytopeName::D5 => einstein_simplex(delta, 5),
        PolytopeName::D6 => einstein_simplex(delta, 6),
        PolytopeName::D7 => einstein_simplex(delta, 7),
        PolytopeName::V1 => cell(0),
        PolytopeName::V2 => cell(1),
        PolytopeName::V3 => cell(2),
        PolytopeName::V4 => cell(3),
    }
    .map_err(err)
}

fn ville_cell_index(name: PolytopeName) -> Option<u8> {
    match name {
        PolytopeName::V1 => Some(1),
        PolytopeName::V2 => Some(2),
        PolytopeName::V3 => Some(3),
        PolytopeName::V4 => Some(4),
        _ => None,
    }
}

fn face_label(p: &Polytope, face: &[usize]) -> String {
    let names: Vec<&str> = face.iter().map(|&i| p.labels[i].as_str()).collect();
    format!("{{{}}}", names.join(","))
}

fn lambda_or(lambda: Option<f64>, delta: f64, which: Which) -> Result<f64, String> {
    match lambda {
        Some(l) => Ok(l),
        None => lambda_of_delta(delta, which).map_err(|e| format!("{e}; pass --lambda explicitly")),
    }
}

fn vertex_table(q: &QuadForm, p: &Polytope, delta: f64) -> Table {
    let mut t = Table::new(&["vertex", "value"]);
    for (label, v) in p.labels.iter().zip(p.vertex_coords(delta)) {
        t.push(vec![label.as_str().into(), q.eval(&v).into()]);
    }
    t
}

/// Faces of the given dimensions whose restriction is positive definite and
/// whose critical point is interior for some δ ∈ (0, 1).
fn face_table<F>(family: F, delta: f64, dims: &[usize]) -> Result<Table, String>
where
    F: Fn(f64) -> pinch4_core::Result<QuadForm>,
{
    let p = einstein_simplex(delta, 6).map_err(err)?;
    let q = family(delta).map_err(err)?;
    let mut t = Table::new(&["face", "critical_value", "in_relint", "relint_from", "relint_to"]);
    for f in p.faces.iter().filter(|f| dims.contains(&f.dim)) {
        let rf = restrict(&q, &p, &f.vertices, delta).map_err(err)?;
        if rf.definiteness != Definiteness::Positive {
            continue;
        }
        let windows = threshold_windows(
            |d| Ok((family(d)?, einstein_simplex(d, 6)?, f.vertices.clone())),
            ScanPredicate::Relint,
        )
        .map_err(err)?;
        for (a, b) in windows {
            // a critical point lying identically on the boundary flickers in
            // and out under rounding; keep windows that hold with margin
            let m = 0.5 * (a + b);
            let probe = einstein_simplex(m, 6).map_err(err)?;
            if !restrict(&family(m).map_err(err)?, &probe, &f.vertices, m).map_err(err)?.in_relint {
                continue;
            }
            t.push(vec![
                face_label(&p, &f.vertices).into(),
                rf.value_at_critical.into(),
                (rf.critical_point.is_some() && rf.strictly_interior()).into(),
                a.into(),
                b.into(),
            ]);
        }
    }
    Ok(t)
}

fn tables(which: WhichTable, delta: f64, lambda: Option<f64>) -> CmdResult {
    let t = match which {
        WhichTable::Table1 => vertex_table(&q_half(delta), &einstein_simplex(delta, 6).map_err(err)?, delta),
        WhichTable::Table2 => face_table(|d| Ok(q_half(d)), delta, &[1])?,
        WhichTable::Table3 => face_table(|d| Ok(q_half(d)), delta, &[2, 3])?,
        WhichTable::Table4 => {
            let l = lambda_or(lambda, delta, Which::Star)?;
            vertex_table(&q_lambda(l, delta).map_err(err)?, &einstein_simplex(delta, 6).map_err(err)?, delta)
        }
        WhichTable::Table5 => {
            let l = lambda_or(lambda, delta, Which::Star)?;
            q_lambda(l, delta).map_err(err)?;
            face_table(|d| q_lambda(l, d), delta, &[1])?
        }
        WhichTable::Table6 => {
            let l = lambda_or(lambda, delta, Which::Ville)?;
            let mut t = Table::new(&["cell", "vertex", "v1", "v2", "v3", "value"]);
            for (i, cell) in ville_cells(delta).map_err(err)?.iter().enumerate() {
                let q = f_ville(l, delta, i as u8 + 1).map_err(err)?;
                for (label, v) in cell.labels.iter().zip(cell.vertex_coords(delta)) {
                    t.push(vec![
                        cell.name.as_str().into(),
                        label.as_str().into(),
                        v[0].into(),
                        v[1].into(),
                        v[2].into(),
                        q.eval(&v).into(),
                    ]);
                }
            }
            t
        }
    };
    Ok((t, true))
}

fn certify(file: &PathBuf, delta: f64, tol: f64) -> CmdResult {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let r: CurvOp = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let c = pinch_certificate(&r, delta, tol).map_err(err)?;
    let t = Table::record(vec![
        ("feasible", c.feasible.into()),
        ("boundary", c.boundary.into()),
        ("sign", f64::from(c.sign).into()),
        ("t1", c.t1.into()),
        ("t2", c.t2.into()),
        ("margin1", c.margin1.into()),
        ("margin2", c.margin2.into()),
    ]);
    Ok((t, c.feasible))
}

fn optimize_cmd(
    form: FormName,
    pname: PolytopeName,
    delta: f64,
    lambda: Option<f64>,
    eta: Option<f64>,
    sense: SenseArg,
) -> CmdResult {
    let p = polytope(pname, delta)?;
    let q = match form {
        FormName::Qhalf => q_half(delta),
        FormName::Qlambda => q_lambda(lambda_or(lambda, delta, Which::Star)?, delta).map_err(err)?,
        FormName::Qeta => q_eta(eta.ok_or("qeta needs --eta")?).map_err(err)?,
        FormName::Qeuler => q_euler(),
        FormName::Fville => {
            let cell = ville_cell_index(pname).ok_or("fville needs a Ville cell v1..v4")?;
            f_ville(lambda_or(lambda, delta, Which::Ville)?, delta, cell).map_err(err)?
        }
    };
    let ex = optimize(&q, &p, sense.into(), delta).map_err(err)?;
    let point: Vec<String> = ex.point.iter().map(|&x| output::fmt_num(x)).collect();
    let t = Table::record(vec![
        ("value", ex.value.into()),
        ("face", face_label(&p, &ex.face).into()),
        ("point", point.join(" ").into()),
        ("candidates", (ex.candidates.len() as f64).into()),
    ]);
    Ok((t, true))
}

fn thresholds(face: &[usize], form: ThresholdForm, lambda: Option<f64>) -> CmdResult {
    if face.iter().any(|&i| i == 0 || i > 7) {
        return Err("face indices are one-based vertices q1..q7".into());
    }
    let face: Vec<usize> = face.iter().map(|i| i - 1).collect();
    let l = match form {
        ThresholdForm::Qhalf => 0.5,
        ThresholdForm::Qlambda => lambda.ok_or("qlambda needs --lambda")?,
    };
    q_lambda(l, 0.5).map_err(err)?;
    let probe = einstein_simplex(0.5, 6).map_err(err)?;
    if probe.find_face(&face).is_none() {
        return Err(format!("{face:?} is not a face of the simplex"));
    }
    let windows = threshold_windows(|d| Ok((q_lambda(l, d)?, einstein_simplex(d, 6)?, face.clone())), ScanPredicate::Relint)
        .map_err(err)?;
    let mut t = Table::new(&["face", "relint_from", "relint_to"]);
    for (a, b) in windows {
        t.push(vec![face_label(&probe, &face).into(), a.into(), b.into()]);
    }
    Ok((t, true))
}

fn lambda_curve(from: f64, to: f64, step: f64) -> CmdResult {
    if !(step > 0.0) || to < from {
        return Err("need --step > 0 and --from <= --to".into());
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    let curves = [LambdaCurve::new(Which::Best), LambdaCurve::new(Which::Star), LambdaCurve::new(Which::Ville)];
    let mut t = Table::new(&["delta", "lambda_best", "lambda_star", "lambda_ville"]);
    for i in 0..=n {
        let d = from + i as f64 * step;
        let mut row: Vec<Cell> = vec![d.into()];
        for c in &curves {
            row.push(if c.in_domain(d) { c.eval(d).map_err(err)?.into() } else { Cell::Empty });
        }
        if matches!(row[1], Cell::Empty) {
            return Err(format!("delta = {d} is outside (0, 1]"));
        }
        t.push(row);
    }
    Ok((t, true))
}

fn region(delta: f64) -> CmdResult {
    let r = region_polygon(delta).map_err(err)?;
    let mut t = Table::new(&["sigma", "chi"]);
    for v in &r.vertices {
        t.push(vec![v[0].into(), v[1].into()]);
    }
    Ok((t, true))
}

fn vertices(name: PolytopeName, delta: f64) -> CmdResult {
    let p = polytope(name, delta)?;
    let mut cols = vec!["vertex".to_string()];
    cols.extend((1..=p.dim_ambient).map(|j| format!("x{j}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&col_refs);
    for (label, v) in p.labels.iter().zip(p.vertex_coords(delta)) {
        let mut row: Vec<Cell> = vec![label.as_str().into()];
        row.extend(v.iter().map(|&x| Cell::from(x)));
        t.push(row);
    }
    Ok((t, true))
}

fn run(cli: &Cli) -> Result<bool, String> {
    let mut out = std::io::stdout().lock();
    if let Command::Audit { delta, n, seed } = cli.command {
        let rep = audit(delta, n, seed).map_err(err)?;
        match cli.format {
            Format::Json => writeln!(out, "{}", rep.to_json()).map_err(err)?,
            f => {
                let mut t = Table::new(&["check", "worst_margin", "violations"]);
                for (k, v) in &rep.checks {
                    t.push(vec![k.as_str().into(), v.worst_margin.into(), (v.violations as f64).into()]);
                }
                t.write(&mut out, f).map_err(err)?;
            }
        }
        return Ok(rep.violations() == 0);
    }
    let (table, ok) = match &cli.command {
        Command::Tables { which, delta, lambda } => tables(*which, *delta, *lambda)?,
        Command::Certify { file, delta, tol } => certify(file, *delta, *tol)?,
        Command::Optimize { form, polytope, delta, lambda, eta, sense } => {
            optimize_cmd(*form, *polytope, *delta, *lambda, *eta, *sense)?
        }
        Command::Thresholds { face, form, lambda } => thresholds(face, *form, *lambda)?,
        Command::LambdaCurve { from, to, step } => lambda_curve(*from, *to, *step)?,
        Command::Region { delta } => region(*delta)?,
        Command::Vertices { polytope, delta } => vertices(*polytope, *delta)?,
        Command::Audit { .. } => unreachable!("handled above"),
    };
    table.write(&mut out, cli.format).map_err(err)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
