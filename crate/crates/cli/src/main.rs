use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use apollo_qmc::experiments::{
    cmd_converge, cmd_fit_counting, cmd_fit_residual, cmd_generate, cmd_greedy, cmd_lp_check, ConvergeConfig,
};
use apollo_qmc::io::{self, cell, load_domain, table};
use apollo_qmc::runner::{thread_pool, PoolRunner};
use apollo_qmc::parse::{parse_counts, parse_function, parse_list, parse_region};
use apollo_qmc::Error;
use apollo_qmc_core::cubature::SupNorm;
use apollo_qmc_core::{CubatureRule, DiskCoveredDomain, StopCriterion, TangencyTolerance};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "apollo-qmc", version, about = "Apollonian packings and mean-value cubature experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Domain JSON file, or builtin:three-tangent:R1,R2,R3 | builtin:square:M,N | builtin:hex:ROWS,COLS
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Directory for the report and tables (created if missing)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance_rel: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    tolerance_abs: f64,
    /// Worker threads (default: one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the size-ordered packing and dump it
    #[command(group(ArgGroup::new("stop").required(true)))]
    Generate {
        #[arg(long, group = "stop")]
        max_count: Option<usize>,
        #[arg(long, group = "stop")]
        max_curvature: Option<f64>,
        #[arg(long, group = "stop")]
        min_residual: Option<f64>,
    },
    /// Rule estimates, certified bounds and errors against a deep reference
    Converge {
        /// Harmonic function, repeatable (e.g. re:2@10,10, const:1, log@-5,0, expcos, 0.5*re:3@0,0;const:1)
        #[arg(long = "function", required = true)]
        functions: Vec<String>,
        /// Comma list or log:LO:HI:COUNT
        #[arg(long, default_value = "log:1000:100000:21")]
        grid: String,
        #[arg(long, default_value_t = 100.0)]
        reference_factor: f64,
        #[arg(long, value_enum, default_value_t = SupNormKind::Sampled)]
        supnorm: SupNormKind,
        #[arg(long, default_value_t = 1e3)]
        fit_from: f64,
        #[arg(long, default_value_t = 1e5)]
        fit_to: f64,
    },
    /// Fit of residual area against N
    FitResidual {
        #[arg(long, default_value_t = 1000)]
        from: usize,
        #[arg(long, default_value_t = 100_000)]
        to: usize,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Fit of the counting function N(T) against T, with band counts
    FitCounting {
        #[arg(long, default_value_t = 1e2)]
        from: f64,
        #[arg(long, default_value_t = 1e4)]
        to: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 2.0)]
        band_ratio: f64,
    },
    /// Monte-Carlo check of the residual indicator's L^p norms
    LpCheck {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Comma list of exponents p >= 1
        #[arg(long, default_value = "1,2,3")]
        p: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Randomized greedy packing of a convex region
    Greedy {
        /// square:S, disk:R or ellipse:A,B
        #[arg(long, default_value = "square:1")]
        region: String,
        #[arg(long, default_value_t = 10_000)]
        target: usize,
        /// Comma list; defaults to five seeds starting at --seed
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, default_value_t = 100)]
        fit_from: usize,
        #[arg(long, default_value_t = 10_000)]
        fit_to: usize,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Check a domain file and list every violation
    Validate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SupNormKind {
    Sampled,
    ClosedForm,
}

impl Common {
    fn tolerance(&self) -> Result<TangencyTolerance, Error> {
        let tol = TangencyTolerance { relative: self.tolerance_rel, absolute: self.tolerance_abs };
        if tol.relative >= 0.0 && tol.absolute >= 0.0 {
            Ok(tol)
        } else {
            Err(Error::Usage("tolerances must be non-negative".into()))
        }
    }

    fn domain(&self) -> Result<DiskCoveredDomain, Error> {
        let spec = self.domain.as_deref().ok_or_else(|| Error::Usage("--domain is required".into()))?;
        load_domain(spec, &self.tolerance()?)
    }
}

struct Output {
    dir: Option<PathBuf>,
    files: Vec<String>,
}

impl Output {
    fn new(dir: Option<PathBuf>) -> Result<Output, Error> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|source| Error::Io { path: d.clone(), source })?;
        }
        Ok(Output { dir, files: Vec::new() })
    }

    fn put(&mut self, name: &str, text: impl FnOnce() -> String) -> Result<(), Error> {
        if let Some(d) = &self.dir {
            io::write(&d.join(name), &text())?;
            self.files.push(name.to_owned());
        }
        Ok(())
    }
}

fn domain_echo(spec: &Option<String>, domain: &DiskCoveredDomain) -> Value {
    json!({
        "source": spec,
        "base_disks": domain.base_disks().len(),
        "gaps": domain.gaps().len(),
        "exact_area": domain.exact_area(),
    })
}

fn run(cli: Cli) -> Result<(Value, bool), Error> {
    let started = Instant::now();
    let common = &cli.common;
    let tol = common.tolerance()?;
    let mut out = Output::new(common.out.clone())?;
    let pool = thread_pool(common.threads)?;
    let runner = PoolRunner(&pool);
    let mut ok = true;
    let mut config = json!({
        "tolerance_rel": tol.relative,
        "tolerance_abs": tol.absolute,
        "threads": common.threads,
        "seed": common.seed,
    });

    let (name, results, fits) = match &cli.command {
        Command::Generate { max_count, max_curvature, min_residual } => {
            let domain = common.domain()?;
            let stop = match (max_count, max_curvature, min_residual) {
                (Some(n), _, _) => StopCriterion::MaxCount(*n),
                (_, Some(t), _) => StopCriterion::MaxCurvature(*t),
                (_, _, Some(r)) => StopCriterion::MinResidual(*r),
                _ => unreachable!("clap enforces one stop criterion"),
            };
            config["domain"] = domain_echo(&common.domain, &domain);
            config["stop"] = json!(format!("{stop:?}"));
            let (emitted, stats) = cmd_generate(&domain, stop, tol)?;
            out.put("packing.csv", || io::packing_csv(&emitted))?;
            let rule = CubatureRule::build(&emitted, emitted.len(), &domain)?;
            out.put("rule.csv", || io::rule_csv(&rule))?;
            let results = json!({
                "count": stats.count,
                "max_curvature_emitted": stats.max_curvature_emitted,
                "packed_area": stats.packed_area,
                "residual_area": stats.residual_area,
            });
            ("generate", results, json!({}))
        }
        Command::Converge { functions, grid, reference_factor, supnorm, fit_from, fit_to } => {
            let domain = common.domain()?;
            let parsed = functions.iter().map(|f| parse_function(f)).collect::<Result<Vec<_>, _>>()?;
            let cfg = ConvergeConfig {
                functions: parsed,
                grid: parse_counts(grid)?,
                reference_factor: *reference_factor,
                supnorm: match supnorm {
                    SupNormKind::Sampled => SupNorm::default(),
                    SupNormKind::ClosedForm => SupNorm::ClosedForm,
                },
                fit_range: (*fit_from, *fit_to),
            };
            if !(cfg.reference_factor >= 1.0) {
                return Err(Error::Usage("--reference-factor must be at least 1".into()));
            }
            config["domain"] = domain_echo(&common.domain, &domain);
            config["functions"] = json!(functions);
            config["grid"] = json!(cfg.grid);
            config["reference_factor"] = json!(cfg.reference_factor);
            config["supnorm"] = json!(format!("{:?}", cfg.supnorm));
            config["fit_range"] = json!(cfg.fit_range);
            let result = cmd_converge(&domain, &cfg, tol, &runner)?;
            ok = result.all_honest();
            out.put("converge.csv", || {
                let header = [
                    "function", "n", "estimate", "residual_bound", "supnorm", "certified_bound", "reference",
                    "reference_uncertainty", "true_error", "honest",
                ];
                table(
                    &header,
                    result.rows.iter().map(|r| {
                        vec![
                            r.function.to_string(),
                            r.n.to_string(),
                            cell(r.estimate),
                            cell(r.residual_bound),
                            cell(r.supnorm),
                            cell(r.certified_bound),
                            cell(r.reference),
                            cell(r.reference_uncertainty),
                            cell(r.true_error),
                            r.honest.to_string(),
                        ]
                    }),
                )
            })?;
            let results = json!({ "rows": result.rows, "reference": result.reference, "all_honest": ok });
            ("converge", results, json!(result.fits))
        }
        Command::FitResidual { from, to, points } => {
            let domain = common.domain()?;
            config["domain"] = domain_echo(&common.domain, &domain);
            config["range"] = json!([from, to]);
            config["points"] = json!(points);
            let result = cmd_fit_residual(&domain, (*from, *to), *points, tol)?;
            out.put("residual.csv", || {
                table(&["n", "residual"], result.series.iter().map(|&(n, r)| vec![(n as usize).to_string(), cell(r)]))
            })?;
            ("fit-residual", json!({ "series": result.series }), json!({ "residual": result.fit }))
        }
        Command::FitCounting { from, to, points, band_ratio } => {
            let domain = common.domain()?;
            config["domain"] = domain_echo(&common.domain, &domain);
            config["range"] = json!([from, to]);
            config["points"] = json!(points);
            config["band_ratio"] = json!(band_ratio);
            let result = cmd_fit_counting(&domain, (*from, *to), *points, *band_ratio, tol)?;
            out.put("counting.csv", || {
                let rows = result.counting.series.iter().map(|&(t, n)| vec![cell(t), (n as usize).to_string()]);
                table(&["t", "count"], rows)
            })?;
            out.put("bands.csv", || {
                let rows = result.bands.iter().map(|b| {
                    vec![cell(b.lower), cell(b.upper), b.count.to_string(), b.growth.map(cell).unwrap_or_default()]
                });
                table(&["lower", "upper", "count", "growth"], rows)
            })?;
            let results = json!({ "series": result.counting.series, "bands": result.bands });
            ("fit-counting", results, json!({ "counting": result.counting.fit }))
        }
        Command::LpCheck { n, p, samples } => {
            let domain = common.domain()?;
            let ps = parse_list(p, "p")?;
            config["domain"] = domain_echo(&common.domain, &domain);
            config["n"] = json!(n);
            config["p"] = json!(ps);
            config["samples"] = json!(samples);
            let result = cmd_lp_check(&domain, *n, &ps, *samples, common.seed, tol)?;
            ok = result.rows.iter().all(|r| r.within_band);
            out.put("lp.csv", || {
                let rows = result.rows.iter().map(|r| {
                    vec![cell(r.p), cell(r.measured), cell(r.standard_error), cell(r.exact), cell(r.z_score)]
                });
                table(&["p", "measured", "standard_error", "exact", "z_score"], rows)
            })?;
            ("lp-check", json!(result), json!({}))
        }
        Command::Greedy { region, target, seeds, fit_from, fit_to, points } => {
            let parsed = parse_region(region)?;
            let seeds: Vec<u64> = match seeds {
                Some(s) => parse_list(s, "seeds")?
                    .into_iter()
                    .map(|v| if v >= 0.0 && v.fract() == 0.0 { Ok(v as u64) } else { Err(Error::Usage(format!("bad seed {v}"))) })
                    .collect::<Result<_, _>>()?,
                None => (0..5).map(|i| common.seed + i).collect(),
            };
            config["region"] = json!(region);
            config["target"] = json!(target);
            config["seeds"] = json!(seeds);
            config["fit_range"] = json!([fit_from, fit_to]);
            config["points"] = json!(points);
            config["protocol"] = json!(
                "uniform samples in the bounding box; an uncovered sample receives the largest disk centered at it; ChaCha8 seeded with seed_from_u64"
            );
            let result = cmd_greedy(parsed, *target, &seeds, (*fit_from, *fit_to), *points, &pool)?;
            for (seed, run) in result.seeds.iter().zip(&result.series) {
                out.put(&format!("greedy_seed{seed}.csv"), || io::greedy_csv(run))?;
            }
            let per_seed: Vec<Value> = result
                .seeds
                .iter()
                .zip(&result.series)
                .zip(&result.per_seed)
                .map(|((seed, run), fit)| {
                    json!({ "seed": seed, "final_residual": run.last().map(|r| r.residual), "fit": fit })
                })
                .collect();
            ("greedy", json!({ "runs": per_seed }), json!({ "pooled": result.pooled }))
        }
        Command::Validate => {
            let domain = common.domain()?;
            config["domain"] = domain_echo(&common.domain, &domain);
            ("validate", json!({ "violations": [] }), json!({}))
        }
    };
    let files = out.files.clone();
    let mut report = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "results": results,
        "fits": fits,
        "files": files,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    if let Some(dir) = &out.dir {
        report["files"].as_array_mut().unwrap().push(json!("report.json"));
        io::write(&dir.join("report.json"), &format!("{:#}\n", report))?;
    }
    Ok((report, ok))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((report, ok)) => {
            // A closed stdout (e.g. piped into `head`) is not an error.
            let _ = writeln!(std::io::stdout(), "{report:#}");
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: a checked invariant failed; see the report");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

