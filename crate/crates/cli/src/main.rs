mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{Vector2, Vector3};
use serde::Serialize;

use qclone::channel::{b_from_e, check_physical, isometry_from_beta, FourVector, GramMatrixE, Output};
use qclone::circuit::{channel_tomography_with, circuit_registry, reduced_qubit, AncillaSpec, Subsystem};
use qclone::optimizer::{beta_from_b, classify_b, classify_pair, isotropic_curve, sign_flip_variants};
use qclone::quality::{quality_e_closed_form, quality_registry, ModeVector};
use qclone::validation::{concavity_trials, jacobian_trials, monotonicity_scan, ScanConfig, ScanRegion, FULL_SCALE};
use qclone::{C64, DEFAULT_TOL};

use config::Config;

/// Optimal copying of a qubit: optimization map, quality functions, circuits
/// and numerical checks.
#[derive(Parser, Debug)]
#[command(name = "qclone", version)]
struct Cli {
    /// Output format; tables default to CSV where noted, everything else to JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// `key = value` file with defaults for seed, outer, inner, steps, trials, tol.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
struct AncillaArgs {
    /// Ancilla coefficients β0,β1,β2,β3 (normalized).
    #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true, conflicts_with_all = ["b", "dxy", "duv"])]
    beta: Option<[f64; 4]>,
    /// Semi-axes b1,b2,b3 of the B copy; β is the non-negative solution.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, conflicts_with_all = ["dxy", "duv"])]
    b: Option<[f64; 3]>,
    /// Product ancilla parameter for the first ancilla qubit.
    #[arg(long, requires = "duv")]
    dxy: Option<f64>,
    /// Product ancilla parameter for the second ancilla qubit.
    #[arg(long, requires = "dxy")]
    duv: Option<f64>,
}

impl AncillaArgs {
    fn spec(&self) -> Result<AncillaSpec> {
        match (self.beta, self.b, self.dxy, self.duv) {
            (Some(beta), ..) => Ok(AncillaSpec::Beta(FourVector::new(beta[0], beta[1], beta[2], beta[3]))),
            (None, Some(b), ..) => Ok(AncillaSpec::Beta(beta_from_b(&Vector3::from(b))?)),
            (None, None, Some(dxy), Some(duv)) => Ok(AncillaSpec::Product { dxy, duv }),
            _ => Err(usage("give one of --beta, --b, or --dxy with --duv")),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// c = G(b) with classification flags.
    Gmap {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        b: [f64; 3],
    },
    /// Quality factors Q_B, Q_C, Q_E, Q_H of the centered optimal machine.
    Quality {
        #[command(flatten)]
        ancilla: AncillaArgs,
        /// Mode direction (normalized internally).
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,1")]
        m: [f64; 3],
        /// Restrict to one channel: b, c, e or h.
        #[arg(long)]
        channel: Option<String>,
    },
    /// Classify a pair (b, c); c defaults to G(b).
    Classify {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        b: [f64; 3],
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        c: Option<[f64; 3]>,
        /// Also list the sign-flipped optimal pairs.
        #[arg(long)]
        variants: bool,
    },
    /// The isotropic tradeoff s(r) on a uniform grid (CSV by default).
    Fig1 {
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run a copying circuit on a pure input state.
    Circuit {
        #[command(flatten)]
        ancilla: AncillaArgs,
        /// Bloch vector of the pure input state.
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,1")]
        input: [f64; 3],
        /// Circuit variant: xor or phase.
        #[arg(long, default_value = "xor")]
        circuit: String,
    },
    /// Reconstruct the affine Bloch map of one copy from circuit runs.
    Tomography {
        #[command(flatten)]
        ancilla: AncillaArgs,
        /// Copy to reconstruct: b or c.
        #[arg(long, default_value = "b")]
        output: String,
        #[arg(long, default_value = "xor")]
        circuit: String,
    },
    /// Random search for b̆ > b with G(b̆) ≥ G(b).
    Scan {
        #[arg(long, value_enum, default_value = "good")]
        region: Region,
        #[arg(long)]
        outer: Option<usize>,
        #[arg(long)]
        inner: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the full-size experiment (minutes of CPU time).
        #[arg(long, conflicts_with_all = ["outer", "inner"])]
        full: bool,
    },
    /// Concavity of Q_E on random mixed isometries.
    Concavity {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Analytic differential of G against finite differences.
    JacobianCheck {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Physicality report for a Gram matrix E.
    CheckE {
        /// JSON file `{"entries": [[re, im], ...]}` with 16 row-major entries.
        #[arg(long, conflicts_with = "diag")]
        e: Option<PathBuf>,
        /// Real diagonal E.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        diag: Option<[f64; 4]>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Region {
    Good,
    Outside,
}

/// Errors caused by how the command was invoked rather than by the numbers.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        let v: f64 = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
        if !v.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
        *slot = v;
    }
    Ok(out)
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    parse_floats::<3>(s)
}

fn parse_vec4(s: &str) -> Result<[f64; 4], String> {
    parse_floats::<4>(s)
}

struct Out {
    format: Format,
}

impl Out {
    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut stdout = std::io::stdout().lock();
        serde_json::to_writer_pretty(&mut stdout, value)?;
        writeln!(stdout)?;
        Ok(())
    }

    fn csv<T: Row>(&self, rows: &[T]) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(std::io::stdout());
        w.write_record(T::HEADER)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON document or CSV table, as requested.
    fn emit<T: Serialize, R: Row>(&self, doc: &T, rows: &[R]) -> Result<()> {
        match self.format {
            Format::Json => self.json(doc),
            Format::Csv => self.csv(rows),
        }
    }

    fn json_only<T: Serialize>(&self, doc: &T, what: &str) -> Result<()> {
        match self.format {
            Format::Json => self.json(doc),
            Format::Csv => Err(usage(format!("{what} output is not tabular; use --format json"))),
        }
    }
}

/// A CSV row type; the header is written even for empty tables.
trait Row: Serialize {
    const HEADER: &'static [&'static str];
}

macro_rules! row {
    ($t:ident { $($f:ident),* $(,)? }) => {
        impl Row for $t {
            const HEADER: &'static [&'static str] = &[$(stringify!($f)),*];
        }
    };
}

row!(GmapRow { b1, b2, b3, c1, c2, c3, possible, positive, mutual, good_region, boundary, conjecturally_optimal });
row!(QualityRow { channel, quality });
row!(CurveRow { r, s });
row!(AmplitudeRow { basis, re, im });
row!(MapRow { row, m0, m1, m2, m3 });
row!(ViolationRow { outer_index, b1, b2, b3, bb1, bb2, bb3, gb1, gb2, gb3, gbb1, gbb2, gbb3 });

#[derive(Serialize)]
struct GmapRow {
    b1: f64,
    b2: f64,
    b3: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    possible: bool,
    positive: bool,
    mutual: bool,
    good_region: bool,
    boundary: bool,
    conjecturally_optimal: bool,
}

#[derive(Serialize)]
struct QualityRow {
    channel: String,
    quality: f64,
}

#[derive(Serialize)]
struct QualityDoc {
    beta: FourVector,
    m: [f64; 3],
    qualities: Vec<QualityRow>,
    /// `Q_E` from the closed form of the centered machine.
    e_closed_form: f64,
}

#[derive(Serialize)]
struct CurveRow {
    r: f64,
    s: f64,
}

#[derive(Serialize)]
struct AmplitudeRow {
    basis: String,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct CircuitDoc {
    circuit: String,
    beta: FourVector,
    input: [f64; 3],
    amplitudes: Vec<AmplitudeRow>,
    bloch_b: [f64; 3],
    bloch_c: [f64; 3],
    bloch_d: [f64; 3],
}

#[derive(Serialize)]
struct MapRow {
    row: usize,
    m0: f64,
    m1: f64,
    m2: f64,
    m3: f64,
}

#[derive(Serialize)]
struct ViolationRow {
    outer_index: usize,
    b1: f64,
    b2: f64,
    b3: f64,
    bb1: f64,
    bb2: f64,
    bb3: f64,
    gb1: f64,
    gb2: f64,
    gb3: f64,
    gbb1: f64,
    gbb2: f64,
    gbb3: f64,
}

#[derive(Serialize)]
struct CheckEDoc {
    report: qclone::channel::ConstraintReport,
    tol: f64,
    /// `B` as a 4×4 row-major matrix when `E` passes.
    b_matrix: Option<[[f64; 4]; 4]>,
}

fn input_state(bloch: &[f64; 3]) -> Result<Vector2<C64>> {
    let v = Vector3::from(*bloch);
    let n = v.norm();
    if (n - 1.0).abs() > 1e-9 {
        bail!("input Bloch vector must have length 1, got {n}");
    }
    let v = v / n;
    let theta = v[2].clamp(-1.0, 1.0).acos();
    let phi = v[1].atan2(v[0]);
    Ok(Vector2::new(
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ))
}

fn output_channel(name: &str) -> Result<Output> {
    match name.to_ascii_lowercase().as_str() {
        "b" => Ok(Output::B),
        "c" => Ok(Output::C),
        other => Err(usage(format!("unknown output {other:?}; expected b or c"))),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(|e| usage(format!("{e:#}")))?,
        None => Config::default(),
    };
    let default_format = match cli.command {
        Command::Fig1 { .. } => Format::Csv,
        _ => Format::Json,
    };
    let out = Out { format: cli.format.unwrap_or(default_format) };
    let resolve_err = |e: anyhow::Error| usage(format!("{e:#}"));

    match cli.command {
        Command::Gmap { b } => {
            let pair = classify_b(&Vector3::from(b))?;
            let f = pair.flags;
            let row = GmapRow {
                b1: b[0],
                b2: b[1],
                b3: b[2],
                c1: pair.c[0],
                c2: pair.c[1],
                c3: pair.c[2],
                possible: f.possible,
                positive: f.positive,
                mutual: f.mutual,
                good_region: f.good_region,
                boundary: f.boundary,
                conjecturally_optimal: f.conjecturally_optimal,
            };
            out.emit(&pair, &[row])?;
        }
        Command::Quality { ancilla, m, channel } => {
            let beta = ancilla.spec()?.beta()?;
            let v = isometry_from_beta(&beta)?;
            let mode = ModeVector::normalized(Vector3::from(m))?;
            let reg = quality_registry();
            let names: Vec<String> = match channel {
                Some(c) => {
                    reg.get(&c).map_err(|e| usage(e.to_string()))?;
                    vec![c.to_ascii_lowercase()]
                }
                None => reg.names().iter().map(|s| s.to_string()).collect(),
            };
            let qualities = names
                .into_iter()
                .map(|n| Ok(QualityRow { quality: reg.get(&n)?.quality(&v, &mode)?, channel: n }))
                .collect::<Result<Vec<_>>>()?;
            let doc = QualityDoc {
                beta,
                m: (*mode.vector()).into(),
                e_closed_form: quality_e_closed_form(&beta, mode.vector()),
                qualities,
            };
            out.emit(&doc, &doc.qualities)?;
        }
        Command::Classify { b, c, variants } => {
            let b = Vector3::from(b);
            let pair = match c {
                Some(c) => classify_pair(&b, &Vector3::from(c)),
                None => classify_b(&b)?,
            };
            if variants {
                #[derive(Serialize)]
                struct Doc<'a> {
                    pair: &'a qclone::optimizer::OptimalPair,
                    variants: Vec<(Vector3<f64>, Vector3<f64>)>,
                }
                let doc = Doc { variants: sign_flip_variants(&pair)?, pair: &pair };
                out.json_only(&doc, "classify")?;
            } else {
                out.json_only(&pair, "classify")?;
            }
        }
        Command::Fig1 { steps } => {
            let steps = cfg.resolve(steps, "steps", 100).map_err(resolve_err)?;
            if steps == 0 {
                return Err(usage("--steps must be at least 1"));
            }
            let rows: Vec<CurveRow> = isotropic_curve(steps)?.into_iter().map(|(r, s)| CurveRow { r, s }).collect();
            out.emit(&rows, &rows)?;
        }
        Command::Circuit { ancilla, input, circuit } => {
            let spec = ancilla.spec()?;
            let beta = spec.beta()?;
            let reg = circuit_registry();
            let circ = reg.get(&circuit).map_err(|e| usage(e.to_string()))?;
            let state = circ.run(&input_state(&input)?, &spec)?;
            let amplitudes = state
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(i, z)| AmplitudeRow { basis: format!("{i:03b}"), re: z.re, im: z.im })
                .collect();
            let bloch = |s| -> Result<[f64; 3]> { Ok(reduced_qubit(&state, s)?.bloch().into()) };
            let doc = CircuitDoc {
                circuit: circuit.to_ascii_lowercase(),
                beta,
                input,
                amplitudes,
                bloch_b: bloch(Subsystem::B)?,
                bloch_c: bloch(Subsystem::C)?,
                bloch_d: bloch(Subsystem::D)?,
            };
            out.emit(&doc, &doc.amplitudes)?;
        }
        Command::Tomography { ancilla, output, circuit } => {
            let spec = ancilla.spec()?;
            let reg = circuit_registry();
            let circ = reg.get(&circuit).map_err(|e| usage(e.to_string()))?;
            let map = channel_tomography_with(circ, &spec, output_channel(&output)?)?;
            let m = map.to_matrix4();
            let rows: Vec<MapRow> = (0..4)
                .map(|r| MapRow { row: r, m0: m[(r, 0)], m1: m[(r, 1)], m2: m[(r, 2)], m3: m[(r, 3)] })
                .collect();
            out.emit(&map, &rows)?;
        }
        Command::Scan { region, outer, inner, seed, full } => {
            let region = match region {
                Region::Good => ScanRegion::Good,
                Region::Outside => ScanRegion::Outside,
            };
            let seed = cfg.resolve(seed, "seed", 1).map_err(resolve_err)?;
            let (n_outer, n_inner) = if full {
                FULL_SCALE
            } else {
                (
                    cfg.resolve(outer, "outer", 100).map_err(resolve_err)?,
                    cfg.resolve(inner, "inner", 1000).map_err(resolve_err)?,
                )
            };
            let report = monotonicity_scan(&ScanConfig::new(region, n_outer, n_inner, seed));
            eprintln!(
                "scan: {} violations in {} accepted samples, {:.3} s",
                report.violations.len(),
                report.inner_accepted,
                report.elapsed.as_secs_f64()
            );
            let rows: Vec<ViolationRow> = report
                .violations
                .iter()
                .map(|v| ViolationRow {
                    outer_index: v.outer_index,
                    b1: v.b[0],
                    b2: v.b[1],
                    b3: v.b[2],
                    bb1: v.b_breve[0],
                    bb2: v.b_breve[1],
                    bb3: v.b_breve[2],
                    gb1: v.g_b[0],
                    gb2: v.g_b[1],
                    gb3: v.g_b[2],
                    gbb1: v.g_b_breve[0],
                    gbb2: v.g_b_breve[1],
                    gbb3: v.g_b_breve[2],
                })
                .collect();
            out.emit(&report, &rows)?;
            if region == ScanRegion::Good && !report.violations.is_empty() {
                eprintln!("error: monotonicity violated inside the good region");
                return Ok(false);
            }
        }
        Command::Concavity { trials, seed, tol } => {
            let trials = cfg.resolve(trials, "trials", 1000).map_err(resolve_err)?;
            let seed = cfg.resolve(seed, "seed", 1).map_err(resolve_err)?;
            let tol = cfg.resolve(tol, "tol", 1e-10).map_err(resolve_err)?;
            let report = concavity_trials(trials, seed, tol)?;
            out.json_only(&report, "concavity")?;
            if report.violations > 0 {
                eprintln!("error: concavity violated in {} trials", report.violations);
                return Ok(false);
            }
        }
        Command::JacobianCheck { trials, seed } => {
            let trials = cfg.resolve(trials, "trials", 100).map_err(resolve_err)?;
            let seed = cfg.resolve(seed, "seed", 1).map_err(resolve_err)?;
            let report = jacobian_trials(trials, seed, 0.01)?;
            out.json_only(&report, "jacobian-check")?;
            if report.max_relative_error >= 1e-4 || report.max_inverse_error >= 1e-8 {
                eprintln!("error: analytic differential disagrees with finite differences");
                return Ok(false);
            }
        }
        Command::CheckE { e, diag, tol } => {
            let tol = cfg.resolve(tol, "tol", DEFAULT_TOL).map_err(resolve_err)?;
            let gram = match (e, diag) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<GramMatrixE>(&text).map_err(|e| anyhow!("parsing {}: {e}", path.display()))?
                }
                (None, Some(d)) => GramMatrixE::from_real_diagonal(d),
                _ => return Err(usage("give --e FILE or --diag d0,d1,d2,d3")),
            };
            let report = check_physical(&gram, tol);
            let b_matrix = if report.pass {
                let m = b_from_e(&gram)?.to_matrix4();
                Some(std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)])))
            } else {
                None
            };
            out.json_only(&CheckEDoc { report, tol, b_matrix }, "check-e")?;
            if !report.pass {
                eprintln!("error: {}", describe_failure(&report, tol));
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn describe_failure(r: &qclone::channel::ConstraintReport, tol: f64) -> String {
    let mut parts = Vec::new();
    if r.hermiticity_defect > tol {
        parts.push(format!("E not Hermitian (defect {:e})", r.hermiticity_defect));
    }
    if r.min_eigenvalue < -tol {
        parts.push(format!("E not positive (min eigenvalue {:e})", r.min_eigenvalue));
    }
    if r.trace_deviation > tol {
        parts.push(format!("trace of E differs from 1 by {:e}", r.trace_deviation));
    }
    if r.isometry_residual > tol {
        parts.push(format!("isometry condition Re E_0q = Im E_q'q'' off by {:e}", r.isometry_residual));
    }
    parts.join("; ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
