//! `cstar`: modulus tables, annular partitions, orbit classification,
//! covering certification, itinerary realization and classification
//! rendering for transcendental self-maps of the punctured plane.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 failed construction
//! (no surviving cell / incomplete realization), 3 verification failure
//! (broken chain or placement inequality, unrealizable itinerary, failed
//! lemma check), 4 horizon or threshold failure.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cstar::config::{manifest, parse_config, AutoOr, Config};
use cstar::construct::{realize_orbit, scan_mixed_r0, RealizeOptions};
use cstar::covering::{build_covering_annuli, certify_covering, CoveringAnnulus, CoveringSet};
use cstar::error::Error;
use cstar::itinerary::{EssSymbol, EssentialItinerary};
use cstar::map::CStarMap;
use cstar::modulus::find_thresholds;
use cstar::orbit::parse_seed_csv;
use cstar::partition::{build_partition, AnnularPartition};
use cstar::program::{
    bounded_program, fast_program, parse_itinerary_spec, periodic_program, slow_program,
    unbounded_nonescaping_program, validate_program, AnnularItinerary, ItinerarySpec, ProgramKind,
    Rates,
};
use cstar::raster::{component_probe, render_classification, RenderWindow};

#[derive(Parser)]
#[command(name = "cstar", version, about, disable_help_subcommand = true)]
struct Cli {
    /// Flat `key = value` config file supplying defaults (flags override).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; falls back to CSTAR_THREADS, then 1. Must not
    /// affect any output bytes.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for deterministic pseudo-random draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MapArg {
    /// Map spec: `arnold(A, B)` or `n=N; g=POLY; h=POLY`.
    #[arg(long)]
    map: Option<String>,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Upper partition threshold (log scale) or `auto`.
    #[arg(long, allow_hyphen_values = true)]
    log_r_plus: Option<String>,
    /// Lower partition threshold (log scale, negative) or `auto`.
    #[arg(long, allow_hyphen_values = true)]
    log_r_minus: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate log M, log m (and optionally log mu, log nu) over circles.
    Modulus {
        #[command(flatten)]
        map: MapArg,
        /// Comma list of log-radii.
        #[arg(long, allow_hyphen_values = true)]
        log_radii: String,
        /// Emit the extended CSV with relaxed columns for this eps.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the annular partition boundaries.
    Partition {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify seed-point orbits from a CSV file with columns L,theta.
    Classify {
        #[command(flatten)]
        map: MapArg,
        /// Input CSV path.
        #[arg(long)]
        seeds: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        escape_level: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify coverings and realize a point with a prescribed itinerary.
    Construct {
        #[command(flatten)]
        map: MapArg,
        /// Band itinerary: comma list or kind:params
        /// (fast:START:LEN, periodic:W1,W2, bounded:LOW:LEN,
        /// unbounded:PEAK:LEN, slow:SLOPE:INTERCEPT:LEN).
        #[arg(long, conflicts_with = "essential")]
        itinerary: Option<String>,
        /// Essential itinerary cycle over {0, i} (e.g. `i0` for the
        /// alternating one): realize a fast-escaping orbit for it via the
        /// mixed annuli.
        #[arg(long)]
        essential: Option<String>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        /// Starting radius for the mixed construction (log scale) or
        /// `auto` to scan upward.
        #[arg(long, allow_hyphen_values = true)]
        log_r0: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        oracle_targets: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a per-pixel classification image (PPM P6 + legend CSV).
    Render {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long, allow_hyphen_values = true)]
        l_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        l_max: f64,
        #[arg(long, default_value_t = -std::f64::consts::PI, allow_hyphen_values = true)]
        theta_min: f64,
        #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
        theta_max: f64,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        palette: u32,
        /// Output prefix: writes PREFIX.ppm, PREFIX_legend.csv,
        /// PREFIX.manifest.
        #[arg(long)]
        out: PathBuf,
        /// Also print a component report for this verdict
        /// (e.g. escapes_to_infinity).
        #[arg(long)]
        probe: Option<String>,
    },
    /// Run the modulus-function lemma verifiers and report pass/fail.
    VerifyLemmas {
        #[command(flatten)]
        map: MapArg,
        /// Comma list of radii r (not logs) for the growth properties.
        #[arg(long, default_value = "2,4,8")]
        radii: String,
        /// Comma list of powers k.
        #[arg(long, default_value = "1.5,2,3")]
        k: String,
        #[arg(long)]
        eps: Option<f64>,
        /// Log-radius for the iterated-vs-relaxed comparison.
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        log_r: f64,
        #[arg(long)]
        depth: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code conventions differ; usage errors are 1.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NoCellSurvives { .. } => 2,
        Error::ChainViolation { .. }
        | Error::InequalityViolation { .. }
        | Error::Unrealizable { .. } => 3,
        Error::HorizonExceeded { .. } | Error::ThresholdNotFound(_) | Error::NotExpanding(_) => 4,
        _ => 1,
    }
}

/// Verification failures that are outcomes, not errors, exit with code 3.
struct VerificationFailed;

impl From<VerificationFailed> for Error {
    fn from(_: VerificationFailed) -> Self {
        Error::InequalityViolation {
            index: 0,
            detail: "verification failed".into(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        cfg.apply(&parse_config(&text)?)?;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    } else if cli.config.is_none() || cfg.threads == Config::default().threads {
        if let Ok(v) = std::env::var("CSTAR_THREADS") {
            cfg.threads = v
                .parse()
                .map_err(|_| Error::Config(format!("CSTAR_THREADS = `{v}` is not a number")))?;
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn resolve_map(cfg: &mut Config, arg: &MapArg) -> Result<CStarMap, Error> {
    if let Some(spec) = &arg.map {
        cfg.map = spec.clone();
    }
    if cfg.map.is_empty() {
        return Err(Error::Config(
            "no map given: pass --map or set `map` in the config file".into(),
        ));
    }
    cstar::parse::parse_map(&cfg.map)
}

fn apply_thresholds(cfg: &mut Config, args: &ThresholdArgs) -> Result<(), Error> {
    if let Some(s) = &args.log_r_plus {
        cfg.log_r_plus = AutoOr::parse(s)?;
    }
    if let Some(s) = &args.log_r_minus {
        cfg.log_r_minus = AutoOr::parse(s)?;
    }
    Ok(())
}

/// Default scan grid for `auto` thresholds: log radii 0.25 .. 8.0.
fn default_scan() -> Vec<f64> {
    (1..=32).map(|i| i as f64 * 0.25).collect()
}

fn resolve_partition(
    map: &CStarMap,
    cfg: &mut Config,
) -> Result<AnnularPartition, Error> {
    let (plus, minus) = match (cfg.log_r_plus.value(), cfg.log_r_minus.value()) {
        (Some(p), Some(m)) => (p, m),
        (p, m) => {
            let th = find_thresholds(map, &default_scan())?;
            (p.unwrap_or(th.log_r_plus), m.unwrap_or(th.log_r_minus))
        }
    };
    cfg.log_r_plus = AutoOr::Value(plus);
    cfg.log_r_minus = AutoOr::Value(minus);
    build_partition(map, plus, minus, cfg.depth)
}

fn write_artifact(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, cfg: &Config, name: &str, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => {
            write_artifact(path, bytes)?;
            let manifest_path = path.with_extension("manifest");
            write_artifact(&manifest_path, manifest(cfg, &[(name, bytes)]).as_bytes())?;
            Ok(())
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Modulus {
            map,
            log_radii,
            eps,
            out,
        } => {
            let map = resolve_map(&mut cfg, map)?;
            let radii = parse_f64_list(log_radii)?;
            let csv = match eps {
                Some(e) => {
                    cfg.eps = *e;
                    cstar::raster::export_modulus_csv(&map, &radii, *e)?
                }
                None => cstar::modulus::modulus_csv(&map, &radii)?,
            };
            emit(out, &cfg, "modulus.csv", csv.as_bytes())
        }
        Command::Partition {
            map,
            thresholds,
            depth,
            out,
        } => {
            let map = resolve_map(&mut cfg, map)?;
            apply_thresholds(&mut cfg, thresholds)?;
            if let Some(d) = depth {
                cfg.depth = *d;
            }
            let partition = resolve_partition(&map, &mut cfg)?;
            emit(out, &cfg, "partition.csv", partition.to_csv().as_bytes())
        }
        Command::Classify {
            map,
            seeds,
            thresholds,
            budget,
            escape_level,
            out,
        } => {
            let map = resolve_map(&mut cfg, map)?;
            apply_thresholds(&mut cfg, thresholds)?;
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            if let Some(e) = escape_level {
                cfg.escape_level = *e;
            }
            let partition = resolve_partition(&map, &mut cfg)?;
            let text = std::fs::read_to_string(seeds)?;
            let points = parse_seed_csv(&text)?;
            let mut csv =
                String::from("L,theta,verdict,checked_depth,essential_prefix,annular_prefix\n");
            for z in points {
                let rec =
                    cstar::orbit::classify_orbit(&map, &partition, z, cfg.budget, cfg.escape_level);
                csv.push_str(&format!(
                    "{:.16e},{:.16e},{},{},{},{}\n",
                    z.l,
                    z.theta,
                    rec.verdict.as_str(),
                    rec.checked_depth(),
                    rec.essential_prefix(usize::MAX),
                    rec.annular_prefix(usize::MAX),
                ));
            }
            emit(out, &cfg, "classify.csv", csv.as_bytes())
        }
        Command::Construct {
            map,
            itinerary,
            essential,
            thresholds,
            log_r0,
            eps,
            delta,
            depth,
            grid,
            margin,
            tol,
            oracle_targets,
            out,
        } => {
            let map = resolve_map(&mut cfg, map)?;
            apply_thresholds(&mut cfg, thresholds)?;
            if let Some(s) = log_r0 {
                cfg.log_r0 = AutoOr::parse(s)?;
            }
            if let Some(v) = delta {
                cfg.delta = *v;
                cfg.eps = cstar::covering::choose_eps(*v);
            }
            if let Some(v) = eps {
                cfg.eps = *v;
            }
            if let Some(v) = depth {
                cfg.depth = *v;
            }
            if let Some(v) = grid {
                cfg.grid = *v;
            }
            if let Some(v) = margin {
                cfg.margin = *v;
            }
            if let Some(v) = tol {
                cfg.tol = *v;
            }
            if let Some(v) = oracle_targets {
                cfg.oracle_targets = *v;
            }
            let report = match (itinerary, essential) {
                (Some(spec), None) => construct_bands(&map, &mut cfg, spec)?,
                (None, Some(cycle)) => construct_mixed(&map, &mut cfg, cycle)?,
                _ => {
                    return Err(Error::Config(
                        "construct needs exactly one of --itinerary or --essential".into(),
                    ))
                }
            };
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(format!("serialize report: {e}")))?;
            emit(out, &cfg, "construct.json", json.as_bytes())?;
            if !report.completed {
                return Err(Error::NoCellSurvives {
                    round: report.verified_depth + 1,
                    detail: "realization incomplete; see report".into(),
                });
            }
            Ok(())
        }
        Command::Render {
            map,
            thresholds,
            l_min,
            l_max,
            theta_min,
            theta_max,
            width,
            height,
            budget,
            palette,
            out,
            probe,
        } => {
            let map = resolve_map(&mut cfg, map)?;
            apply_thresholds(&mut cfg, thresholds)?;
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            let partition = resolve_partition(&map, &mut cfg)?;
            let window = RenderWindow {
                l_min: *l_min,
                l_max: *l_max,
                theta_min: *theta_min,
                theta_max: *theta_max,
                width: *width,
                height: *height,
                budget: cfg.budget,
                palette_id: *palette,
            };
            let (grid, ppm) = render_classification(&map, &partition, &window, cfg.threads)?;
            let legend = grid.legend_csv();
            let ppm_path = out.with_extension("ppm");
            let legend_path = PathBuf::from(format!("{}_legend.csv", out.display()));
            write_artifact(&ppm_path, &ppm)?;
            write_artifact(&legend_path, legend.as_bytes())?;
            let manifest_text = manifest(
                &cfg,
                &[("render.ppm", &ppm[..]), ("legend.csv", legend.as_bytes())],
            );
            write_artifact(&out.with_extension("manifest"), manifest_text.as_bytes())?;
            if let Some(verdict) = probe {
                let comps = component_probe(&grid, |c| c.verdict.as_str() == verdict);
                println!("components({verdict}): {}", comps.len());
                for (i, c) in comps.iter().enumerate() {
                    println!(
                        "component {i}: pixels {} touches_l_min {} touches_l_max {}",
                        c.pixels, c.touches_l_min, c.touches_l_max
                    );
                }
            }
            Ok(())
        }
        Command::VerifyLemmas {
            map,
            radii,
            k,
            eps,
            log_r,
            depth,
        } => {
            let map = resolve_map(&mut cfg, map)?;
            if let Some(e) = eps {
                cfg.eps = *e;
            }
            if let Some(d) = depth {
                cfg.depth = *d;
            }
            let radii: Vec<f64> = parse_f64_list(radii)?
                .into_iter()
                .map(|r| r.ln())
                .collect();
            let ks = parse_f64_list(k)?;
            for line in cfg.echo_lines() {
                println!("# {line}");
            }
            let growth = cstar::lemmas::verify_growth_properties(&map, &radii, &ks)?;
            for line in growth.lines() {
                println!("{line}");
            }
            for note in &growth.notes {
                println!("note: {note}");
            }
            let relaxed = cstar::lemmas::verify_relaxed_iterates(&map, cfg.eps, *log_r, cfg.depth)?;
            println!(
                "relaxed-iterates upper: {} ({} checks{})",
                if relaxed.upper.passed() { "pass" } else { "FAIL" },
                relaxed.upper.checks.len(),
                if relaxed.upper.truncated_by_horizon {
                    ", horizon-truncated"
                } else {
                    ""
                }
            );
            println!(
                "relaxed-iterates lower: {} ({} checks)",
                if relaxed.lower.passed() { "pass" } else { "FAIL" },
                relaxed.lower.checks.len()
            );
            match find_thresholds(&map, &default_scan()) {
                Ok(th) => println!(
                    "threshold estimates (grid-certified, not proofs): log R(f) <= {}, log R_+ = {}, log R_- = {}",
                    th.log_r_f, th.log_r_plus, th.log_r_minus
                ),
                Err(e) => println!("threshold estimates: {e}"),
            }
            if growth.all_passed() && relaxed.passed() {
                Ok(())
            } else {
                Err(VerificationFailed.into())
            }
        }
    }
}

/// JSON report of a construct run.
#[derive(serde::Serialize)]
struct ConstructReport {
    config: Vec<String>,
    kind: ProgramKind,
    entries: Vec<i64>,
    transitions: Vec<cstar::program::TransitionCheck>,
    certificates: Vec<cstar::covering::CoveringCertificate>,
    point: cstar::map::LogPoint,
    verified_depth: usize,
    completed: bool,
    stall: Option<String>,
    /// Essential symbols of the realized orbit prefix.
    essential_prefix: String,
    /// Slow programs: dwell counts per band.
    dwells: Option<Vec<cstar::program::BandDwell>>,
}

fn construct_bands(
    map: &CStarMap,
    cfg: &mut Config,
    spec: &str,
) -> Result<ConstructReport, Error> {
    let spec = parse_itinerary_spec(spec)?;
    let partition = resolve_partition(map, cfg)?;
    let set = build_covering_annuli(map, &partition, cfg.eps, cfg.depth)?;
    let mut dwells = None;
    let program: AnnularItinerary = match &spec {
        ItinerarySpec::Custom(entries) => AnnularItinerary {
            prefix: entries.clone(),
            cycle: None,
            kind: ProgramKind::Custom,
        },
        ItinerarySpec::Fast { start, len } => fast_program(*start, *len)?,
        ItinerarySpec::Periodic(word) => periodic_program(word)?,
        ItinerarySpec::Bounded { low, len } => bounded_program(*low, *len)?,
        ItinerarySpec::Unbounded { peak, len } => unbounded_nonescaping_program(*peak, *len)?,
        ItinerarySpec::Slow {
            slope,
            intercept,
            len,
        } => {
            let sp = slow_program(
                &set,
                &Rates::Linear {
                    slope: *slope,
                    intercept: *intercept,
                },
                1,
                *len,
                16,
            )?;
            dwells = Some(sp.dwells);
            sp.itinerary
        }
    };
    // Generated programs must validate; custom lists are experiments, so
    // their transition survey is advisory and the subdivision itself is
    // the judge.
    let transitions = if program.kind == ProgramKind::Custom {
        cstar::program::survey_transitions(map, &set, &program)
    } else {
        validate_program(map, &set, &program)?
    };
    // Realize the materialized prefix as far as the horizon allows.
    let entries = if program.prefix.is_empty() {
        program.entries(cfg.depth.max(2))
    } else {
        program.prefix.clone()
    };
    // A band beyond the evaluation horizon can still be the final target:
    // membership there is checked from images computed one step earlier.
    let mut bands: Vec<CoveringAnnulus> = Vec::new();
    for &s in &entries {
        match set.annulus(s) {
            Some(b) => {
                let beyond = b.core_log_r.abs() > map.horizon;
                bands.push(*b);
                if beyond {
                    break;
                }
            }
            None => break,
        }
    }
    if bands.is_empty() {
        return Err(Error::NoCellSurvives {
            round: 0,
            detail: "no realizable prefix within the horizon".into(),
        });
    }
    let certificates = certify_consecutive(map, &set, &bands, cfg)?;
    let opts = RealizeOptions {
        grid: cfg.grid,
        margin: cfg.margin,
        tol: cfg.tol,
        ..RealizeOptions::default()
    };
    let outcome = realize_orbit(map, &bands, &opts)?;
    let essential_prefix = orbit_symbols(map, outcome.point, outcome.verified_depth);
    Ok(ConstructReport {
        config: cfg.echo_lines(),
        kind: program.kind,
        entries,
        transitions,
        certificates,
        point: outcome.point,
        verified_depth: outcome.verified_depth,
        completed: outcome.completed,
        stall: outcome.stall,
        essential_prefix,
        dwells,
    })
}

fn construct_mixed(
    map: &CStarMap,
    cfg: &mut Config,
    cycle_text: &str,
) -> Result<ConstructReport, Error> {
    let cycle: Vec<EssSymbol> = cycle_text
        .chars()
        .map(|c| match c {
            '0' => Ok(EssSymbol::Zero),
            'i' => Ok(EssSymbol::Inf),
            other => Err(Error::Parse {
                pos: 0,
                reason: format!("essential symbols are `0` and `i`, got `{other}`"),
            }),
        })
        .collect::<Result<_, _>>()?;
    let e = EssentialItinerary::new(Vec::new(), cycle)?;
    let mixed = match cfg.log_r0.value() {
        Some(r0) => cstar::construct::mixed_fast_annuli(map, &e, cfg.eps, r0, cfg.depth)?,
        None => {
            let candidates: Vec<f64> = (2..=24).map(|i| i as f64 * 0.25).collect();
            scan_mixed_r0(map, &e, cfg.eps, cfg.depth, &candidates)?
        }
    };
    cfg.log_r0 = AutoOr::Value(mixed.log_r0);
    // Certify consecutive coverings along the time-indexed bands.
    let set = CoveringSet {
        eps: mixed.eps,
        annuli: mixed.annuli.clone(),
        excluded: Vec::new(),
        horizon_truncated: mixed.horizon_truncated,
    };
    let mut bands: Vec<CoveringAnnulus> = Vec::new();
    for b in &mixed.annuli {
        let beyond = b.core_log_r.abs() > map.horizon;
        bands.push(*b);
        if beyond {
            // Beyond-horizon bands can only serve as the final target.
            break;
        }
    }
    let certificates = certify_consecutive(map, &set, &bands, cfg)?;
    let opts = RealizeOptions {
        grid: cfg.grid,
        margin: cfg.margin,
        tol: cfg.tol,
        ..RealizeOptions::default()
    };
    let outcome = realize_orbit(map, &bands, &opts)?;
    let essential_prefix = orbit_symbols(map, outcome.point, outcome.verified_depth);
    Ok(ConstructReport {
        config: cfg.echo_lines(),
        kind: ProgramKind::Custom,
        entries: (0..bands.len() as i64).collect(),
        transitions: Vec::new(),
        certificates,
        point: outcome.point,
        verified_depth: outcome.verified_depth,
        completed: outcome.completed,
        stall: outcome.stall,
        essential_prefix,
        dwells: None,
    })
}

fn certify_consecutive(
    map: &CStarMap,
    set: &CoveringSet,
    bands: &[CoveringAnnulus],
    cfg: &Config,
) -> Result<Vec<cstar::covering::CoveringCertificate>, Error> {
    let mut certs = Vec::new();
    for w in bands.windows(2) {
        if w[0].core_log_r.abs() > map.horizon {
            break;
        }
        certs.push(certify_covering(
            map,
            set,
            w[0].index,
            w[1].index,
            cfg.delta,
            cfg.oracle_targets,
            cfg.seed,
        )?);
    }
    Ok(certs)
}

fn orbit_symbols(map: &CStarMap, point: cstar::map::LogPoint, depth: usize) -> String {
    let mut out = String::new();
    let mut z = point;
    for k in 0..=depth {
        out.push(EssSymbol::of_log_modulus(z.l).as_char());
        if k < depth {
            match map.eval(z) {
                Ok(next) => z = next,
                Err(_) => break,
            }
        }
    }
    out
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| Error::Parse {
                pos: 0,
                reason: format!("`{p}` is not a number"),
            })
        })
        .collect()
}
