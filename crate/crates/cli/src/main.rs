//! Command-line front end: eigenvalue tables, embedding certification, the
//! lambda search, and representation verification, with seeded reproducible
//! JSON/CSV reports.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use levyrep::certify::{
    self, certify_many, even_integer_example, levy_verify, search_lambda, CertifyOptions, NormSpec,
    QSet, SearchOptions, Verdict,
};
use levyrep::funk_hecke::{auto_r, lambda_table_rows};
use levyrep::harmonics::{expand, HarmonicCoefficients};
use levyrep::inversion::invert;
use levyrep::sphere::{build_grid, SphereGrid};
use levyrep::{HarmonicCoefficients64, NormSpec64, SphereGrid64};

use report::{
    CertificateReport, CertifyReport, DensityFile, ReportEnvelope, RunConfig, SearchReport,
    VerifyReport,
};

/// Environment variable naming the sphere-grid cache directory.
const GRID_CACHE_ENV: &str = "LEVYREP_GRID_CACHE";

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_REFUTED: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "levyrep",
    about = "certify isometric embeddings into L_q through the representing density on the sphere",
    version
)]
struct Cli {
    /// JSON config file; explicit flags override its values. A previously
    /// emitted report is accepted too (its `config` field is used).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form vs quadrature-oracle eigenvalue table for f(t) = |t|^q.
    LambdaTable(LambdaTableArgs),
    /// Embedding certificates for one norm at one or more exponents.
    Certify(CertifyArgs),
    /// Largest feasible perturbation size for a whole exponent set Q.
    Search(SearchArgs),
    /// Representation identities: Levy residual or the even-integer example.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
struct CommonArgs {
    /// Ambient dimension (2 or 3 for full grids).
    #[arg(long)]
    n: Option<usize>,
    /// Exponent q; repeatable.
    #[arg(long = "q")]
    q: Vec<f64>,
    /// Expansion degree M.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Grid resolution.
    #[arg(long)]
    resolution: Option<usize>,
    /// Smoothness order r, or "auto" for the smallest r with 2r > n + max(q) + 1.
    #[arg(long)]
    r: Option<String>,
    /// RNG seed (echoed into every report).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct LambdaTableArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output format: csv (default) or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Norm preset: euclidean | zonal-Y4 | zonal:m | lp-ball:p | lq-power:k.
    #[arg(long = "f")]
    f: Option<String>,
    /// Perturbation size for perturbation / lq-power norms.
    #[arg(long)]
    lambda: Option<f64>,
    /// Q as a range lo:hi:count (alternative to repeated --q).
    #[arg(long = "Q-range")]
    q_range: Option<String>,
    /// Random points for the reconstruction residual.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Perturbation direction: zonal-Y4 | zonal:m (euclidean/zero degenerates).
    #[arg(long = "f")]
    f: Option<String>,
    /// Q as a range lo:hi:count (alternative to repeated --q).
    #[arg(long = "Q-range")]
    q_range: Option<String>,
    /// Upper end of the lambda search.
    #[arg(long)]
    lambda_hi: Option<f64>,
    /// Convexity trials for the final report.
    #[arg(long)]
    trials: Option<usize>,
    /// Random points for the reconstruction residual.
    #[arg(long)]
    points: Option<usize>,
    /// Refine Q by bisecting adjacent samples with uneven margins.
    #[arg(long)]
    refine_q: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Norm preset for the Levy residual check.
    #[arg(long = "f")]
    f: Option<String>,
    /// lq-power / perturbation lambda, or the even-integer example weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Run the even-integer atomic example with this k (q = 2k).
    #[arg(long)]
    even_k: Option<u32>,
    /// Random verification points.
    #[arg(long)]
    points: Option<usize>,
    /// Pass/fail tolerance on the residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Verify against a density loaded from this JSON file instead of
    /// computing one.
    #[arg(long)]
    density: Option<PathBuf>,
    /// Write the computed density to this JSON file.
    #[arg(long)]
    emit_density: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap's default exit code for usage errors is 2, which this
            // tool reserves for refuted certificates.
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help {
                ExitCode::from(EXIT_OK)
            } else {
                ExitCode::from(EXIT_USAGE)
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let file_config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::LambdaTable(args) => cmd_lambda_table(args, file_config, cli.out.as_deref()),
        Command::Certify(args) => cmd_certify(args, file_config, cli.out.as_deref()),
        Command::Search(args) => cmd_search(args, file_config, cli.out.as_deref()),
        Command::Verify(args) => cmd_verify(args, file_config, cli.out.as_deref()),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    if let Ok(envelope) = serde_json::from_str::<ReportEnvelope>(&text) {
        return Ok(envelope.config);
    }
    serde_json::from_str::<RunConfig>(&text)
        .map_err(|e| format!("cannot parse config {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// Shared resolution helpers
// ---------------------------------------------------------------------------

struct Resolved {
    n: usize,
    q_list: Vec<f64>,
    m: usize,
    resolution: usize,
    r_spec: String,
    r: u32,
    seed: u64,
}

fn resolve(
    common: &CommonArgs,
    file: &RunConfig,
    q_range_flag: Option<&str>,
    default_m: usize,
    default_res: usize,
) -> Result<Resolved, String> {
    let n = common.n.or(file.n).unwrap_or(3);
    let mut q_list = if !common.q.is_empty() {
        common.q.clone()
    } else {
        file.q.clone().unwrap_or_default()
    };
    let q_range = q_range_flag
        .map(str::to_string)
        .or_else(|| file.q_range.clone());
    if q_list.is_empty() {
        if let Some(range) = &q_range {
            q_list = parse_q_range(range)?;
        }
    }
    let m = common.m.or(file.m).unwrap_or(default_m);
    let resolution = common.resolution.or(file.resolution).unwrap_or(default_res);
    let r_spec = common
        .r
        .clone()
        .or_else(|| file.r.clone())
        .unwrap_or_else(|| "auto".to_string());
    let q_max = q_list.iter().cloned().fold(0.0f64, f64::max);
    let r = if r_spec == "auto" {
        auto_r(n, q_max.max(1.0))
    } else {
        r_spec
            .parse::<u32>()
            .map_err(|_| format!("--r must be an integer or \"auto\", got {r_spec}"))?
    };
    let seed = common.seed.or(file.seed).unwrap_or(42);
    Ok(Resolved {
        n,
        q_list,
        m,
        resolution,
        r_spec,
        r,
        seed,
    })
}

fn parse_q_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("--Q-range expects lo:hi:count, got {spec}"));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| format!("bad Q-range lo: {e}"))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| format!("bad Q-range hi: {e}"))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| format!("bad Q-range count: {e}"))?;
    let q = QSet::<f64>::linspace(lo, hi, count).map_err(|e| e.to_string())?;
    Ok(q.samples().to_vec())
}

/// Norm preset parser. The lambda parameter applies to perturbation and
/// lq-power kinds.
fn parse_norm(n: usize, spec: &str, lambda: f64) -> Result<NormSpec64, String> {
    if spec == "euclidean" {
        return Ok(NormSpec::euclidean(n));
    }
    if spec == "zonal-Y4" {
        return NormSpec::perturbation(zonal_unit(n, 4)?, lambda).map_err(|e| e.to_string());
    }
    if let Some(rest) = spec.strip_prefix("zonal:") {
        let m: usize = rest
            .parse()
            .map_err(|e| format!("bad zonal degree in {spec}: {e}"))?;
        return NormSpec::perturbation(zonal_unit(n, m)?, lambda).map_err(|e| e.to_string());
    }
    if let Some(rest) = spec.strip_prefix("lp-ball:") {
        let p: f64 = rest
            .parse()
            .map_err(|e| format!("bad lp exponent in {spec}: {e}"))?;
        return NormSpec::lp_ball(n, p).map_err(|e| e.to_string());
    }
    if let Some(rest) = spec.strip_prefix("lq-power:") {
        let k: u32 = rest
            .parse()
            .map_err(|e| format!("bad lq-power k in {spec}: {e}"))?;
        return NormSpec::lq_power(n, k, lambda).map_err(|e| e.to_string());
    }
    Err(format!(
        "unknown norm preset {spec}; expected euclidean | zonal-Y4 | zonal:m | lp-ball:p | lq-power:k"
    ))
}

fn zonal_unit(n: usize, m: usize) -> Result<HarmonicCoefficients64, String> {
    if !m.is_multiple_of(2) {
        return Err(format!("zonal perturbation degree must be even, got {m}"));
    }
    HarmonicCoefficients::unit(n, m, 1).map_err(|e| e.to_string())
}

/// Build a grid, consulting the cache directory named by LEVYREP_GRID_CACHE.
fn grid_cached(n: usize, resolution: usize) -> Result<SphereGrid64, String> {
    let build = || build_grid::<f64>(n, resolution).map_err(|e| e.to_string());
    let Some(dir) = std::env::var_os(GRID_CACHE_ENV) else {
        return build();
    };
    let dir = PathBuf::from(dir);
    let fresh = build()?;
    let path = dir.join(format!(
        "grid_n{n}_res{resolution}_deg{}.csv",
        fresh.exact_degree()
    ));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(grid) = SphereGrid::<f64>::from_csv(&text, fresh.exact_degree()) {
            if grid.n() == n && grid.len() == fresh.len() {
                return Ok(grid);
            }
        }
        eprintln!("warning: ignoring unreadable grid cache {}", path.display());
    }
    if fs::create_dir_all(&dir).is_ok() {
        if let Err(e) = fs::write(&path, fresh.to_csv()) {
            eprintln!("warning: cannot write grid cache {}: {e}", path.display());
        }
    }
    Ok(fresh)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_lambda_table(
    args: LambdaTableArgs,
    file: RunConfig,
    out: Option<&Path>,
) -> Result<u8, String> {
    let resolved = resolve(&args.common, &file, None, 10, 32)?;
    if resolved.q_list.len() != 1 {
        return Err("lambda-table expects exactly one --q".into());
    }
    let q = resolved.q_list[0];
    let format = args
        .format
        .or(file.format)
        .unwrap_or_else(|| "csv".to_string());
    let rows = lambda_table_rows(resolved.n, q, resolved.m).map_err(|e| e.to_string())?;

    let config = RunConfig {
        command: Some("lambda-table".into()),
        n: Some(resolved.n),
        q: Some(vec![q]),
        m: Some(resolved.m),
        r: Some(resolved.r_spec.clone()),
        seed: Some(resolved.seed),
        format: Some(format.clone()),
        ..RunConfig::default()
    };

    match format.as_str() {
        "csv" => {
            let mut text = String::from("n,q,m,lambda_closed,lambda_oracle,rel_err\n");
            for row in &rows {
                text.push_str(&format!(
                    "{},{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                    resolved.n, q, row.m, row.closed, row.oracle, row.rel_err
                ));
            }
            write_output(out, &text)?;
        }
        "json" => {
            #[derive(serde::Serialize)]
            struct Row {
                m: usize,
                lambda_closed: f64,
                lambda_oracle: f64,
                rel_err: f64,
            }
            #[derive(serde::Serialize)]
            struct TableReport {
                config: RunConfig,
                rows: Vec<Row>,
            }
            let report = TableReport {
                config,
                rows: rows
                    .iter()
                    .map(|r| Row {
                        m: r.m,
                        lambda_closed: r.closed,
                        lambda_oracle: r.oracle,
                        rel_err: r.rel_err,
                    })
                    .collect(),
            };
            write_output(out, &to_json(&report)?)?;
        }
        other => return Err(format!("unknown format {other}; expected csv or json")),
    }
    Ok(EXIT_OK)
}

fn exit_code_for(certs: &[CertificateReport]) -> u8 {
    if certs
        .iter()
        .any(|c| c.verdict == Verdict::RefutedNegativeDensity.as_str())
    {
        EXIT_REFUTED
    } else if certs
        .iter()
        .any(|c| c.verdict == Verdict::Inconclusive.as_str())
    {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn cmd_certify(args: CertifyArgs, file: RunConfig, out: Option<&Path>) -> Result<u8, String> {
    let resolved = resolve(&args.common, &file, args.q_range.as_deref(), 8, 32)?;
    if resolved.q_list.is_empty() {
        return Err("certify needs at least one --q (or --Q-range)".into());
    }
    let q_set = QSet::new(resolved.q_list.clone()).map_err(|e| e.to_string())?;
    let f_spec = args
        .f
        .or(file.f.clone())
        .unwrap_or_else(|| "euclidean".to_string());
    let lambda = args.lambda.or(file.lambda).unwrap_or(1e-3);
    let points = args.points.or(file.points).unwrap_or(20);
    let norm = parse_norm(resolved.n, &f_spec, lambda)?;
    let grid = grid_cached(resolved.n, resolved.resolution)?;

    let certs: Vec<CertificateReport> = certify_many(
        &norm,
        &q_set,
        resolved.r,
        &grid,
        resolved.m,
        points,
        resolved.seed,
    )
    .map_err(|e| e.to_string())?
    .iter()
    .map(Into::into)
    .collect();
    let exit_code = exit_code_for(&certs);

    let config = RunConfig {
        command: Some("certify".into()),
        n: Some(resolved.n),
        q: Some(q_set.samples().to_vec()),
        f: Some(f_spec),
        lambda: Some(lambda),
        m: Some(resolved.m),
        resolution: Some(resolved.resolution),
        r: Some(resolved.r_spec.clone()),
        seed: Some(resolved.seed),
        points: Some(points),
        ..RunConfig::default()
    };
    let report = CertifyReport {
        config,
        norm_spec: norm.label(),
        lambda,
        certificates: certs,
        exit_code,
    };
    write_output(out, &to_json(&report)?)?;
    Ok(exit_code)
}

fn cmd_search(args: SearchArgs, file: RunConfig, out: Option<&Path>) -> Result<u8, String> {
    let resolved = resolve(&args.common, &file, args.q_range.as_deref(), 8, 32)?;
    if resolved.q_list.is_empty() {
        return Err("search needs --q values or --Q-range".into());
    }
    let mut q_set = QSet::new(resolved.q_list.clone()).map_err(|e| e.to_string())?;
    let f_spec = args
        .f
        .or(file.f.clone())
        .unwrap_or_else(|| "zonal-Y4".to_string());
    let f = match f_spec.as_str() {
        "euclidean" | "zero" => {
            HarmonicCoefficients::<f64>::zero(resolved.n, 4).map_err(|e| e.to_string())?
        }
        "zonal-Y4" => zonal_unit(resolved.n, 4)?,
        other => match other.strip_prefix("zonal:") {
            Some(rest) => {
                let m: usize = rest
                    .parse()
                    .map_err(|e| format!("bad zonal degree in {other}: {e}"))?;
                zonal_unit(resolved.n, m)?
            }
            None => return Err(format!("search supports zonal presets, got {other}")),
        },
    };
    let trials = args.trials.or(file.trials).unwrap_or(100_000);
    let points = args.points.or(file.points).unwrap_or(20);
    let lambda_hi = args.lambda_hi.or(file.lambda_hi).unwrap_or(0.5);
    let refine = args.refine_q || file.refine_q.unwrap_or(false);
    let grid = grid_cached(resolved.n, resolved.resolution)?;

    let opts = SearchOptions {
        lambda_hi,
        final_trials: trials,
        final_points: points,
        seed: resolved.seed,
        ..SearchOptions::default()
    };
    let mut outcome = search_lambda(&f, &q_set, resolved.r, &grid, resolved.m, &opts)
        .map_err(|e| e.to_string())?;
    if refine && !outcome.hilbertian_input {
        let co = CertifyOptions {
            sample_points: points,
            seed: resolved.seed,
        };
        q_set = certify::refine_qset(
            &f,
            outcome.lambda_star,
            &q_set,
            resolved.r,
            &grid,
            resolved.m,
            &co,
            64,
        )
        .map_err(|e| e.to_string())?;
        outcome = search_lambda(&f, &q_set, resolved.r, &grid, resolved.m, &opts)
            .map_err(|e| e.to_string())?;
    }

    let certs: Vec<CertificateReport> = outcome.certificates.iter().map(Into::into).collect();
    let exit_code = exit_code_for(&certs);
    let norm_label = if outcome.hilbertian_input {
        "euclidean (degenerate: f = 0, Hilbertian)".to_string()
    } else {
        NormSpec::perturbation(f.clone(), outcome.lambda_star)
            .map(|nz| nz.label())
            .unwrap_or_else(|_| "perturbation".into())
    };

    let config = RunConfig {
        command: Some("search".into()),
        n: Some(resolved.n),
        q: Some(q_set.samples().to_vec()),
        f: Some(f_spec),
        m: Some(resolved.m),
        resolution: Some(resolved.resolution),
        r: Some(resolved.r_spec.clone()),
        seed: Some(resolved.seed),
        points: Some(points),
        trials: Some(trials),
        lambda_hi: Some(lambda_hi),
        refine_q: Some(refine),
        ..RunConfig::default()
    };
    let report = SearchReport::from_outcome(
        config,
        norm_label,
        q_set.samples().to_vec(),
        &outcome,
        exit_code,
    );
    write_output(out, &to_json(&report)?)?;
    Ok(exit_code)
}

fn cmd_verify(args: VerifyArgs, file: RunConfig, out: Option<&Path>) -> Result<u8, String> {
    let resolved = resolve(&args.common, &file, None, 8, 32)?;
    let points = args.points.or(file.points).unwrap_or(50);
    let tol = args.tol.or(file.tol).unwrap_or(1e-6);
    let even_k = args.even_k.or(file.even_k);

    if let Some(k) = even_k {
        let lambda = args.lambda.or(file.lambda).unwrap_or(0.1);
        let residual = even_integer_example(resolved.n, k, lambda, points, resolved.seed)
            .map_err(|e| e.to_string())?;
        let pass = residual <= tol;
        let exit_code = if pass { EXIT_OK } else { EXIT_REFUTED };
        let config = RunConfig {
            command: Some("verify".into()),
            n: Some(resolved.n),
            lambda: Some(lambda),
            even_k: Some(k),
            points: Some(points),
            tol: Some(tol),
            seed: Some(resolved.seed),
            ..RunConfig::default()
        };
        let report = VerifyReport {
            config,
            kind: "even-integer".into(),
            norm_spec: None,
            residual,
            tolerance: tol,
            pass,
            exit_code,
        };
        write_output(out, &to_json(&report)?)?;
        return Ok(exit_code);
    }

    // Levy-representation residual for a norm at a single q.
    if resolved.q_list.len() != 1 {
        return Err("verify needs exactly one --q (or --even-k)".into());
    }
    let q = resolved.q_list[0];
    let f_spec = args
        .f
        .or(file.f.clone())
        .unwrap_or_else(|| "euclidean".to_string());
    let lambda = args.lambda.or(file.lambda).unwrap_or(1e-3);
    let norm = parse_norm(resolved.n, &f_spec, lambda)?;
    let grid = grid_cached(resolved.n, resolved.resolution)?;

    let density = match &args.density {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let file: DensityFile =
                serde_json::from_str(&text).map_err(|e| format!("bad density file: {e}"))?;
            let mut loaded = file.into_result().map_err(|e| e.to_string())?;
            if loaded.q != q {
                eprintln!(
                    "note: density file was built for q={}, verifying it at q={q}",
                    loaded.q
                );
                loaded.q = q;
            }
            loaded
        }
        None => {
            let h = expand(|x: &[f64]| norm.eval_sphere(x).powf(q), &grid, resolved.m)
                .map_err(|e| e.to_string())?;
            invert(&h, q, resolved.r, resolved.m + resolved.m % 2).map_err(|e| e.to_string())?
        }
    };
    if let Some(path) = &args.emit_density {
        let density_json = to_json(&DensityFile::from_result(&density))?;
        fs::write(path, density_json)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    let residual =
        levy_verify(&norm, &density, &grid, points, resolved.seed).map_err(|e| e.to_string())?;
    let pass = residual <= tol;
    let exit_code = if pass { EXIT_OK } else { EXIT_REFUTED };

    let config = RunConfig {
        command: Some("verify".into()),
        n: Some(resolved.n),
        q: Some(vec![q]),
        f: Some(f_spec),
        lambda: Some(lambda),
        m: Some(resolved.m),
        resolution: Some(resolved.resolution),
        r: Some(resolved.r_spec.clone()),
        seed: Some(resolved.seed),
        points: Some(points),
        tol: Some(tol),
        ..RunConfig::default()
    };
    let report = VerifyReport {
        config,
        kind: "levy".into(),
        norm_spec: Some(norm.label()),
        residual,
        tolerance: tol,
        pass,
        exit_code,
    };
    write_output(out, &to_json(&report)?)?;
    Ok(exit_code)
}
