//! Command-line driver for the rate studies and network construction.
//!
//! Every subcommand resolves to a library study config, runs it, and writes
//! the resulting CSV (or network file for `export-net`) to `--out` or
//! standard output. Identical flags and seed produce byte-identical output.
//!
//! Exit codes: 0 on success, 1 when a study's hard bound assertion fails (or
//! on an I/O or numeric failure), 2 on usage errors.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zonal_cnn::filters::{factorize_filter, feature_filter, Filter};
use zonal_cnn::network::{build_kernel_network, build_ridge_network};
use zonal_cnn::operators::SplineMesh;
use zonal_cnn::report::format_float;
use zonal_cnn::sphere::sample_uniform;
use zonal_cnn::studies::{
    ridge_profiles, run_discretization_study, run_factorization_bench, run_kernel_rate,
    run_ridge_rate, DiscretizationConfig, FactorBenchConfig, KernelRateConfig, RidgeFamily,
    RidgeRateConfig, ZonalSpec,
};
use zonal_cnn::Error;

#[derive(Parser)]
#[command(
    name = "zonal-cnn",
    version,
    about = "Constructive spherical CNN approximation studies",
    after_help = "Exit codes: 0 success, 1 assertion failure, 2 usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArg {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize a filter into short factors and report the achieved error.
    Factorize {
        /// Comma-separated taps of the filter to factor.
        #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with_all = ["m", "d"])]
        taps: Option<Vec<f64>>,
        /// Build the feature filter of m random sphere points instead.
        #[arg(long, requires = "d")]
        m: Option<usize>,
        /// Sphere dimension for the feature filter.
        #[arg(long, requires = "m")]
        d: Option<usize>,
        /// Factor support length.
        #[arg(long = "S")]
        span: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Additive-ridge rate study over the mesh resolution N.
    Thm2Rate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long = "S")]
        span: usize,
        /// Profile family: abs, abspower, cos, linear, zero.
        #[arg(long, default_value = "abs")]
        ridge: String,
        /// Holder exponent for the abspower family.
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated mesh resolutions N.
        #[arg(long = "N", value_delimiter = ',', num_args = 1..)]
        mesh_sizes: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        grid_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Smooth-function rate study over the depth J with the standard
    /// (m, n, N) coupling.
    Thm1Rate {
        /// Test function: constant, lowdeg, decay.
        #[arg(long, default_value = "decay")]
        f: String,
        /// Smoothness index of the target class.
        #[arg(long)]
        r: f64,
        /// Degree cap of the decay test function.
        #[arg(long, default_value_t = 40)]
        max_degree: usize,
        #[arg(long)]
        d: usize,
        #[arg(long = "S")]
        span: usize,
        /// Comma-separated depths J.
        #[arg(long = "J", value_delimiter = ',', num_args = 1..)]
        depths: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, default_value_t = 800)]
        grid_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Monte-Carlo discretization study over the sample count m.
    Discretize {
        #[arg(long, default_value = "decay")]
        f: String,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 12)]
        max_degree: usize,
        /// Smoothing scale n of the operator being discretized.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Comma-separated sample counts m.
        #[arg(long = "m", value_delimiter = ',', num_args = 1..)]
        sample_counts: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 400)]
        grid_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Factorization accuracy benchmark over a grid of (M, S) cells.
    BenchFactor {
        /// Comma-separated filter degrees M.
        #[arg(long = "M", value_delimiter = ',', num_args = 1..)]
        degrees: Vec<usize>,
        /// Comma-separated factor supports S.
        #[arg(long = "S", value_delimiter = ',', num_args = 1..)]
        spans: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Build a network from the built-in catalogs and write its text form.
    ExportNet {
        /// Network flavor: kernel or ridge.
        #[arg(long)]
        flavor: String,
        #[arg(long)]
        d: usize,
        #[arg(long = "S")]
        span: usize,
        #[arg(long)]
        m: usize,
        /// Smoothing scale (kernel flavor).
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Smoothness index (kernel flavor).
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Mesh resolution.
        #[arg(long = "N")]
        mesh_size: usize,
        /// Depth; defaults to the minimum ceil((md-1)/(S-1)).
        #[arg(long = "J")]
        depth: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                // Bad parameter combinations are usage errors, matching the
                // exit code clap uses for unparsable flags.
                Error::InvalidParameter(_) | Error::EmptyInput(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Factorize {
            taps,
            m,
            d,
            span,
            seed,
            output,
        } => {
            let filter = match (taps, m, d) {
                (Some(taps), None, None) => Filter::new(taps)?,
                (None, Some(m), Some(d)) => {
                    if d < 3 {
                        return Err(Error::InvalidParameter(format!("need d >= 3, got {d}")));
                    }
                    feature_filter(&sample_uniform(d, m, seed)?)?
                }
                _ => {
                    return Err(Error::InvalidParameter(
                        "pass either --taps or both --m and --d".into(),
                    ))
                }
            };
            let fact = factorize_filter(&filter, span)?;
            let mut out = String::new();
            out.push_str("# schema factorization v1\n");
            out.push_str(&format!("# degree = {}\n", filter.degree()));
            out.push_str(&format!("# S = {span}\n"));
            out.push_str(&format!("# factor_count = {}\n", fact.factors.len()));
            out.push_str(&format!("# rel_error = {}\n", format_float(fact.rel_error)));
            out.push_str("factor,tap_index,value\n");
            for (i, f) in fact.factors.iter().enumerate() {
                for (k, &t) in f.taps().iter().enumerate() {
                    out.push_str(&format!("{i},{k},{}\n", format_float(t)));
                }
            }
            write_output(&output, &out)
        }
        Command::Thm2Rate {
            m,
            d,
            span,
            ridge,
            alpha,
            mesh_sizes,
            grid_size,
            seed,
            output,
        } => {
            let family = RidgeFamily::parse(&ridge, alpha)?;
            let report = run_ridge_rate(&RidgeRateConfig {
                m,
                d,
                span,
                family,
                mesh_sizes,
                grid_size,
                seed,
            })?;
            write_output(&output, &report.to_csv())
        }
        Command::Thm1Rate {
            f,
            r,
            max_degree,
            d,
            span,
            depths,
            tau,
            seeds,
            grid_size,
            seed,
            output,
        } => {
            let f = ZonalSpec::parse(&f, r, max_degree)?;
            let report = run_kernel_rate(&KernelRateConfig {
                f,
                r,
                d,
                span,
                depths,
                tau,
                seeds,
                grid_size,
                seed,
            })?;
            write_output(&output, &report.to_csv())
        }
        Command::Discretize {
            f,
            r,
            max_degree,
            n,
            d,
            sample_counts,
            seeds,
            grid_size,
            seed,
            output,
        } => {
            let f = ZonalSpec::parse(&f, r, max_degree)?;
            let report = run_discretization_study(&DiscretizationConfig {
                f,
                r,
                n,
                d,
                sample_counts,
                seeds,
                grid_size,
                seed,
            })?;
            write_output(&output, &report.to_csv())
        }
        Command::BenchFactor {
            degrees,
            spans,
            trials,
            seed,
            output,
        } => {
            let report = run_factorization_bench(&FactorBenchConfig {
                degrees,
                spans,
                trials,
                seed,
            })?;
            write_output(&output, &report.to_csv())
        }
        Command::ExportNet {
            flavor,
            d,
            span,
            m,
            n,
            r,
            mesh_size,
            depth,
            seed,
            output,
        } => {
            if d < 3 {
                return Err(Error::InvalidParameter(format!("need d >= 3, got {d}")));
            }
            if span < 2 {
                return Err(Error::InvalidParameter("need S >= 2".into()));
            }
            let min_depth = (m * d - 1).div_ceil(span - 1);
            let points = sample_uniform(d, m, seed)?;
            let net = match flavor.as_str() {
                "kernel" => {
                    let depth = depth.unwrap_or(min_depth).max(min_depth);
                    let f = ZonalSpec::PolyDecay {
                        smoothness: r,
                        max_degree: 30,
                    }
                    .build(d)?;
                    build_kernel_network(&f, r, n, &points, mesh_size, span, depth)?
                }
                "ridge" => {
                    let mesh = SplineMesh::new(mesh_size)?;
                    let profiles = ridge_profiles(RidgeFamily::Abs, m, seed.wrapping_add(1));
                    let g_values: Vec<Vec<f64>> = profiles
                        .iter()
                        .map(|g| mesh.interior_nodes().map(|t| g.eval(t)).collect())
                        .collect();
                    build_ridge_network(&points, &g_values, span, mesh_size)?
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown flavor {other:?}; expected kernel or ridge"
                    )))
                }
            };
            let mut buf = Vec::new();
            net.write_text(&mut buf)?;
            write_output(&output, std::str::from_utf8(&buf).expect("ascii output"))
        }
    }
}

fn write_output(output: &OutputArg, content: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            file.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
