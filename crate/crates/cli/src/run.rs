//! Grid evaluation and oracle comparison.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use discenv::discs::{DiscSpec, RationalDisc};
use discenv::domains::{parse_domain, Domain, DomainKind};
use discenv::envelopes::{DiscClass, EnvelopeEstimate, Estimator, OptimizerConfig};
use discenv::oracles::{closed_form_oracle, non_psh_certificate, OracleReport};
use discenv::primitives::ComplexVector;
use discenv::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult, Method, RunArgs};

/// Above this many points a grid is refused.
pub const MAX_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

fn parse_floats(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Parse(format!("{what}: bad number {s:?}")))
        })
        .collect()
}

pub fn parse_grid(text: &str) -> CliResult<GridSpec> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(CliError::Parse(format!("--grid wants x0,y0,x1,y1,nx,ny, got {text:?}")));
    }
    let f = parse_floats(&parts[..4].join(","), "--grid")?;
    let count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| CliError::Parse(format!("--grid: bad count {s:?}")))
    };
    let (nx, ny) = (count(parts[4])?, count(parts[5])?);
    if nx == 0 || ny == 0 {
        return Err(CliError::Usage("the grid is empty".into()));
    }
    if nx.saturating_mul(ny) > MAX_POINTS {
        return Err(CliError::Usage(format!("{} points exceed the limit of {MAX_POINTS}", nx * ny)));
    }
    Ok(GridSpec {
        x0: f[0],
        y0: f[1],
        x1: f[2],
        y1: f[3],
        nx,
        ny,
    })
}

fn parse_slice(text: &str, n: usize) -> CliResult<(usize, usize)> {
    let idx: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Parse(format!("--slice wants i,j, got {text:?}")))?;
    match idx[..] {
        [i, j] if i != j && i < 2 * n && j < 2 * n => Ok((i, j)),
        [_, _] => Err(CliError::Usage(format!(
            "--slice needs two distinct real coordinates below {}",
            2 * n
        ))),
        _ => Err(CliError::Parse(format!("--slice wants i,j, got {text:?}"))),
    }
}

fn parse_vector(text: &str, n: usize, what: &str) -> CliResult<ComplexVector> {
    let f = parse_floats(text, what)?;
    if f.len() != 2 * n {
        return Err(CliError::Parse(format!("{what} needs {} reals, got {}", 2 * n, f.len())));
    }
    ComplexVector::from_reals(&f).map_err(CliError::from)
}

/// Grid points in row-major order (y outer, x inner).
pub fn grid_points(g: &GridSpec, slice: (usize, usize), base: &ComplexVector) -> Vec<ComplexVector> {
    let step = |a: f64, b: f64, k: usize, n: usize| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(g.nx * g.ny);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let mut reals = base.to_reals();
            reals[slice.0] = step(g.x0, g.x1, ix, g.nx);
            reals[slice.1] = step(g.y0, g.y1, iy, g.ny);
            out.push(ComplexVector::from_reals(&reals).expect("finite grid"));
        }
    }
    out
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn config_for(args: &RunArgs) -> CliResult<OptimizerConfig> {
    let mut cfg = OptimizerConfig {
        seed: args.seed,
        ..OptimizerConfig::default()
    };
    if let Some(d) = args.degree {
        cfg.degree = d;
    }
    if let Some(r) = args.restarts {
        cfg.restarts = r;
    }
    if let Some(m) = args.max_evals {
        cfg.max_evals = m;
    }
    if let Some(p) = args.poles {
        cfg.poles = p;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

/// JSON has no infinity: non-finite values go out as null and come back as +∞.
mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: Vec<f64>,
    #[serde(with = "infinite_as_null")]
    pub value: f64,
    pub feasible: bool,
    pub iterations: usize,
    #[serde(with = "infinite_as_null")]
    pub j_part: f64,
    #[serde(with = "infinite_as_null")]
    pub poisson_part: f64,
    /// Best disc found, in the disc JSON schema; absent for E_B J.
    pub best_disc: Option<DiscSpec>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub method: Method,
    pub domain: String,
    pub domain_path: PathBuf,
    pub grid: GridSpec,
    pub slice: (usize, usize),
    pub base: Vec<f64>,
    pub config: OptimizerConfig,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub csv: Option<PathBuf>,
    pub points: Vec<PointRecord>,
}

/// Everything parsed from the run flags.
struct Prepared {
    domain: Domain,
    domain_text: String,
    grid: GridSpec,
    slice: (usize, usize),
    base: ComplexVector,
    cfg: OptimizerConfig,
}

fn prepare(args: &RunArgs) -> CliResult<Prepared> {
    let domain_text = read(&args.domain)?;
    let domain = parse_domain(&domain_text).map_err(|e| CliError::Parse(e.to_string()))?;
    let n = domain.dim();
    let grid = parse_grid(&args.grid)?;
    let slice = parse_slice(&args.slice, n)?;
    let base = match &args.base {
        Some(b) => parse_vector(b, n, "--base")?,
        None => ComplexVector::zeros(n),
    };
    let cfg = config_for(args)?;
    let restricted = matches!(args.method, Method::Lempert | Method::Lempert1pole);
    if restricted && !domain.is_connected() && !args.allow_disconnected {
        return Err(CliError::Disconnected);
    }
    Ok(Prepared {
        domain,
        domain_text,
        grid,
        slice,
        base,
        cfg,
    })
}

fn from_estimate(e: EnvelopeEstimate) -> (f64, bool, usize, f64, f64, Option<DiscSpec>) {
    (
        e.value,
        e.feasible,
        e.iterations,
        e.j_part,
        e.poisson_part,
        Some(DiscSpec::from(&e.best_disc)),
    )
}

/// One point; errors are recorded, not propagated, so a grid always
/// produces a full table.
pub fn evaluate(est: &Estimator, method: Method, z: &ComplexVector) -> discenv::Result<EnvelopeEstimate> {
    let cfg = est.config();
    match method {
        Method::Ebj => {
            let v = est.ebj(z)?;
            Ok(EnvelopeEstimate {
                value: v,
                best_disc: RationalDisc::constant(z),
                feasible: true,
                iterations: 0,
                restarts: 0,
                certified_upper_bound: false,
                j_part: v,
                poisson_part: 0.0,
            })
        }
        Method::Lempert => est.restricted_j(z, &DiscClass::boundary_in_x(cfg.degree, cfg.poles)),
        Method::Lempert1pole => est.restricted_j(z, &DiscClass::one_pole(cfg.degree)),
        Method::Theorem1 => est.theorem1(z),
        Method::Theorem2 => est.theorem2(z),
        Method::Hr => est.hr(z),
    }
}

fn run_points(prep: &Prepared, method: Method, threads: usize) -> CliResult<(Vec<ComplexVector>, Vec<PointRecord>, f64)> {
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let est = Estimator::new(&prep.domain, &prep.cfg)?;
    let points = grid_points(&prep.grid, prep.slice, &prep.base);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let start = Instant::now();
    let records: Vec<PointRecord> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, z)| {
                let (value, feasible, iterations, j_part, poisson_part, best_disc, error) =
                    match evaluate(&est, method, z) {
                        Ok(e) => {
                            let ebj = method == Method::Ebj;
                            let (v, f, it, j, p, d) = from_estimate(e);
                            (v, f, it, j, p, if ebj { None } else { d }, None)
                        }
                        Err(e) => (f64::INFINITY, false, 0, f64::INFINITY, 0.0, None, Some(e.to_string())),
                    };
                PointRecord {
                    index,
                    point: z.to_reals(),
                    value,
                    feasible,
                    iterations,
                    j_part,
                    poisson_part,
                    best_disc,
                    error,
                }
            })
            .collect()
    });
    Ok((points, records, start.elapsed().as_secs_f64()))
}

pub fn csv_text(n: usize, records: &[PointRecord]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=n).flat_map(|i| [format!("re{i}"), format!("im{i}")]).collect();
    header.extend(["value", "feasible", "iterations", "J_part", "poisson_part"].map(String::from));
    let io = |e: csv::Error| CliError::Parse(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in records {
        let mut row: Vec<String> = r.point.iter().map(f64::to_string).collect();
        row.push(r.value.to_string());
        row.push(r.feasible.to_string());
        row.push(r.iterations.to_string());
        row.push(r.j_part.to_string());
        row.push(r.poisson_part.to_string());
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn sidecar_path(args: &RunArgs) -> Option<PathBuf> {
    args.report.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".json");
            PathBuf::from(s)
        })
    })
}

fn emit(args: &RunArgs, prep: &Prepared, records: Vec<PointRecord>, wall: f64) -> CliResult<()> {
    let csv = csv_text(prep.domain.dim(), &records)?;
    match &args.out {
        Some(p) => write(p, &csv)?,
        None => {
            let _ = std::io::stdout().write_all(csv.as_bytes());
        }
    }
    let all_infeasible = records.iter().all(|r| !r.feasible);
    if let Some(path) = sidecar_path(args) {
        let side = Sidecar {
            method: args.method,
            domain: prep.domain_text.clone(),
            domain_path: args.domain.clone(),
            grid: prep.grid,
            slice: prep.slice,
            base: prep.base.to_reals(),
            config: prep.cfg.clone(),
            seed: prep.cfg.seed,
            threads: args.threads,
            wall_time_s: wall,
            csv: args.out.clone(),
            points: records,
        };
        write(&path, &serde_json::to_string_pretty(&side).expect("serializable"))?;
    }
    if all_infeasible {
        return Err(CliError::AllInfeasible);
    }
    Ok(())
}

pub fn cmd_eval(args: &RunArgs) -> CliResult<()> {
    let prep = prepare(args)?;
    let (_, records, wall) = run_points(&prep, args.method, args.threads)?;
    emit(args, &prep, records, wall)
}

pub struct CertSpec {
    pub centre: String,
    pub radius: f64,
    pub direction: Option<String>,
    pub nodes: usize,
}

#[derive(Debug, Serialize)]
struct CompareSummary {
    method: Method,
    oracle: Option<String>,
    /// Whether the oracle is a lower bound for this method, so that the
    /// direction flag means something.
    direction_checked: bool,
    points: usize,
    max_gap: Option<f64>,
    max_abs_gap: Option<f64>,
    direction_violations: usize,
    certificate: Option<f64>,
    reports: Vec<OracleReport>,
}

/// A ball oracle bounds every method from below; the min-of-balls bound of
/// a union only bounds the class-restricted J envelope.
fn direction_applies(x: &Domain, method: Method) -> bool {
    match x.kind() {
        DomainKind::Ball { .. } => true,
        DomainKind::Union { .. } => matches!(method, Method::Lempert | Method::Lempert1pole),
        _ => false,
    }
}

pub fn cmd_compare(args: &RunArgs, cert: Option<&CertSpec>) -> CliResult<()> {
    let prep = prepare(args)?;
    let (points, records, wall) = run_points(&prep, args.method, args.threads)?;
    let direction_checked = direction_applies(&prep.domain, args.method);
    let mut reports = Vec::new();
    let mut oracle_name = None;
    for (z, r) in points.iter().zip(&records) {
        match closed_form_oracle(&prep.domain, z) {
            Ok(v) => {
                oracle_name.get_or_insert_with(|| match prep.domain.kind() {
                    DomainKind::Ball { .. } => "ball".to_string(),
                    _ => "min over union parts".to_string(),
                });
                let mut rep = OracleReport::new(z.clone(), v, r.value, 0.02);
                rep.direction_violation &= direction_checked;
                reports.push(rep);
            }
            Err(discenv::Error::NoOracle(_)) => break,
            Err(e) => return Err(e.into()),
        }
    }
    let certificate = match cert {
        None => None,
        Some(c) => {
            let n = prep.domain.dim();
            let centre = parse_vector(&c.centre, n, "--cert-centre")?;
            let dir = match &c.direction {
                Some(d) => parse_vector(d, n, "--cert-direction")?,
                None => {
                    let mut e = vec![Complex64::new(0.0, 0.0); n];
                    e[0] = Complex64::new(1.0, 0.0);
                    ComplexVector::new(e)?
                }
            };
            let est = Estimator::new(&prep.domain, &prep.cfg)?;
            let field = |z: &ComplexVector| evaluate(&est, args.method, z).map(|e| e.value).unwrap_or(f64::INFINITY);
            Some(non_psh_certificate(field, &centre, c.radius, &dir, c.nodes)?)
        }
    };
    let gaps: Vec<f64> = reports.iter().map(|r| r.gap).filter(|g| g.is_finite()).collect();
    let summary = CompareSummary {
        method: args.method,
        oracle: oracle_name,
        direction_checked,
        points: points.len(),
        max_gap: gaps.iter().copied().reduce(f64::max),
        max_abs_gap: gaps.iter().map(|g| g.abs()).reduce(f64::max),
        direction_violations: reports.iter().filter(|r| r.direction_violation).count(),
        certificate,
        reports,
    };
    println!("point\toracle\testimate\tgap\tdirection_flag");
    for r in &summary.reports {
        let p: Vec<String> = r.point.to_reals().iter().map(|x| format!("{x}")).collect();
        println!("{}\t{}\t{}\t{:+.3e}\t{}", p.join(","), r.oracle, r.estimate, r.gap, r.direction_violation);
    }
    match (&summary.oracle, summary.max_gap) {
        (Some(o), Some(g)) => println!(
            "oracle: {o}; max gap {g:+.3e}; max |gap| {:.3e}; direction violations {}{}",
            summary.max_abs_gap.unwrap_or(0.0),
            summary.direction_violations,
            if direction_checked { "" } else { " (not a lower bound for this method; unchecked)" }
        ),
        _ => println!("no closed-form oracle for this domain"),
    }
    if let Some(c) = certificate {
        println!("sub-mean-value certificate: {c:.6}{}", if c > 0.0 { " (not plurisubharmonic)" } else { "" });
    }
    if let Some(path) = &args.report {
        let doc = serde_json::json!({ "summary": summary, "wall_time_s": wall, "config": prep.cfg });
        write(path, &serde_json::to_string_pretty(&doc).expect("serializable"))?;
    }
    if let Some(p) = &args.out {
        write(p, &csv_text(prep.domain.dim(), &records)?)?;
    }
    if records.iter().all(|r| !r.feasible) {
        return Err(CliError::AllInfeasible);
    }
    Ok(())
}

pub fn load_sidecar(path: &Path) -> CliResult<Sidecar> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing_and_order() {
        let g = parse_grid("0,0,1,2,2,3").unwrap();
        let pts = grid_points(&g, (0, 1), &ComplexVector::zeros(1));
        let reals: Vec<Vec<f64>> = pts.iter().map(ComplexVector::to_reals).collect();
        assert_eq!(reals, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 2.0], [1.0, 2.0]]);
        assert!(matches!(parse_grid("0,0,1,1,2"), Err(CliError::Parse(_))));
        assert!(matches!(parse_grid("0,0,1,1,100,101"), Err(CliError::Usage(_))));
    }

    #[test]
    fn slices_embed_into_higher_dimension() {
        let g = parse_grid("-1,2,-1,2,1,1").unwrap();
        let base = ComplexVector::from_reals(&[5.0, 6.0, 7.0, 8.0]).unwrap();
        let pts = grid_points(&g, (3, 0), &base);
        assert_eq!(pts[0].to_reals(), [2.0, 6.0, 7.0, -1.0]);
    }

    #[test]
    fn infinite_values_survive_json() {
        let r = PointRecord {
            index: 0,
            point: vec![0.0, 0.0],
            value: f64::INFINITY,
            feasible: false,
            iterations: 0,
            j_part: f64::INFINITY,
            poisson_part: 0.0,
            best_disc: None,
            error: Some("x".into()),
        };
        let back: PointRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back.value, f64::INFINITY);
        assert_eq!(csv_text(1, &[r]).unwrap().lines().nth(1), Some("0,0,inf,false,0,inf,0"));
    }

    #[test]
    fn all_infeasible_maps_to_exit_3() {
        assert_eq!(CliError::AllInfeasible.code(), 3);
        assert_eq!(CliError::Core(discenv::Error::Disconnected).code(), 4);
    }
}
