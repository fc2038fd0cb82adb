mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meandim::carpet::{self, CarpetSpec};
use meandim::grid2d::{self, Grid2DSpec};
use meandim::oracle::appendix::{self, AppendixParams};
use meandim::oracle::{self, MetricDescriptor, MetricKind, PointCloud};
use meandim::selfsim::{self, BetaSystemSpec};
use meandim::symbolic::{self, SubshiftSpec, TupleSet};
use meandim::weighted::{self, PairShiftSystem};
use meandim::{suite, Budgets, Error, Execution};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use report::{Report, Source};
use serde_json::json;

#[derive(Parser)]
#[command(name = "meandim", version, about = "Mean dimension of symbolic, carpet and self-similar systems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Multiplies every enumeration budget; overrides MEANDIM_BUDGET.
    #[arg(long, global = true)]
    budget: Option<f64>,
    /// Run kernels on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A carpet or pair system given inline or by an omega file.
#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    /// Allowed pairs as "uv,uv,...", e.g. "00,11,20".
    #[arg(long, conflicts_with = "omega")]
    tuples: Option<String>,
    /// Subshift JSON over the pair alphabet, symbol u*b+v.
    #[arg(long)]
    omega: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Topological entropy of a subshift.
    Entropy {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 20)]
        nmax: usize,
    },
    /// Weighted entropy h^w of a pair system.
    WeightedEntropy {
        #[command(flatten)]
        sys: PairArgs,
        /// Defaults to log b / log a.
        #[arg(long)]
        w: Option<f64>,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
    },
    /// Mean Hausdorff and metric mean dimension of a carpet system.
    Carpet {
        #[command(flatten)]
        sys: PairArgs,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Classical carpet dimensions and the equality test.
    BmClassical {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        tuples: String,
    },
    /// Self-similar system over a subshift with ratio 1/beta.
    Beta {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        beta: f64,
        /// Subshift JSON on a symbols; the full shift if omitted.
        #[arg(long)]
        omega: Option<PathBuf>,
        /// Digit depth of the separation check.
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Shift window of the separated family.
        #[arg(long = "N", default_value_t = 2)]
        window: usize,
        /// Levels of the separated family.
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Rectangle counts and entropy of a 2D digit rule.
    Grid2d {
        /// Rule JSON; see the README for the schema.
        #[arg(long, conflicts_with = "preset")]
        rule: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 2)]
        a: usize,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        #[arg(long, default_value_t = 6)]
        mmax: usize,
    },
    /// Metric oracles on finite data.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Every regression check, one verdict each.
    PaperSuite,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Free,
    ThreeDot,
    HardSquare,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Linf,
    SumAbs,
    SumMax,
    SumTorus,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Covering-number brackets of a CSV point cloud.
    Cover {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Metric::Linf)]
        metric: Metric,
        /// Shift window N of d_N.
        #[arg(long)]
        dynamic: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        truncation: f64,
    },
    /// Hausdorff bound at scale eps from cover diameters.
    Hdim {
        /// Comma-separated diameters.
        #[arg(long)]
        diams: String,
        #[arg(long)]
        eps: f64,
    },
    /// Q-box family of a carpet.
    Qbox {
        #[command(flatten)]
        sys: PairArgs,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        #[arg(long = "M", default_value_t = 4)]
        m: usize,
    },
    /// Mass-distribution check of the carpet measure.
    Mass {
        #[command(flatten)]
        sys: PairArgs,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        mmin: usize,
        #[arg(long, default_value_t = 10)]
        mmax: usize,
        /// Exponent; defaults to log_b Z_N - 0.1.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Covering counts of {0} ∪ {1/n} and sampled witness sets.
    AppendixK {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001,0.0001")]
        eps_list: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        ncap: u64,
        /// Random points fed to the witness construction.
        #[arg(long, default_value_t = 0)]
        sets: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
    },
}

enum Failure {
    Lib(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Out = std::result::Result<Report, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn pair_system(p: &PairArgs) -> std::result::Result<PairShiftSystem, Failure> {
    match (&p.tuples, &p.omega) {
        (Some(t), _) => Ok(PairShiftSystem::from_tuples(TupleSet::parse(p.a, p.b, t)?)?),
        (None, Some(f)) => Ok(PairShiftSystem::new(p.a, p.b, parse_json(f)?)?),
        (None, None) => Err(Failure::Input("give --tuples or --omega".into())),
    }
}

fn carpet_spec(p: &PairArgs) -> std::result::Result<CarpetSpec, Failure> {
    Ok(CarpetSpec::from_system(pair_system(p)?)?)
}

fn budgets(common: &Common) -> std::result::Result<Budgets, Failure> {
    let factor = match common.budget {
        Some(f) => f,
        None => match std::env::var("MEANDIM_BUDGET") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Failure::Input(format!("MEANDIM_BUDGET = {s:?} is not a number")))?,
            Err(_) => 1.0,
        },
    };
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Failure::Input(format!("budget factor {factor} must be positive")));
    }
    Ok(Budgets::default().scaled(factor))
}

fn run(cli: &Cli) -> Out {
    let b = budgets(&cli.common)?;
    let exec = if cli.common.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match &cli.cmd {
        Cmd::Entropy { spec, nmax } => {
            let spec: SubshiftSpec = parse_json(spec)?;
            let shift = symbolic::prune_with(&spec, &b)?;
            let rep = symbolic::entropy(&shift, *nmax)?;
            Ok(Report::new("entropy", rep)
                .from("counts", Source::Enumeration)
                .from("upper_bounds", Source::Enumeration)
                .from("spectral_value", Source::Formula))
        }
        Cmd::WeightedEntropy { sys, w, nmax } => {
            let s = pair_system(sys)?;
            let w = w.unwrap_or((s.b() as f64).ln() / (s.a() as f64).ln());
            let rep = weighted::weighted_entropy(&s, w, *nmax, &b, exec)?;
            Ok(Report::new("weighted-entropy", rep)
                .from("Z", Source::Enumeration)
                .from("closed_form", Source::Formula))
        }
        Cmd::Carpet { sys, nmax } => {
            let rep = carpet::mean_dims(&carpet_spec(sys)?, *nmax, &b, exec)?;
            Ok(Report::new("carpet", rep)
                .from("mdim_h", Source::Enumeration)
                .from("mdim_m", Source::Enumeration)
                .from("classical", Source::Formula))
        }
        Cmd::BmClassical { a, b: bb, tuples } => {
            let r = TupleSet::parse(*a, *bb, tuples)?;
            let rep = json!({
                "classical": carpet::classical_bm(*a, *bb, &r)?,
                "gap": carpet::gap_analysis(*a, *bb, &r)?,
            });
            Ok(Report::new("bm-classical", rep).from("classical", Source::Formula).from("gap", Source::Formula))
        }
        Cmd::Beta {
            a,
            beta,
            omega,
            n,
            window,
            levels,
            tol,
        } => {
            let omega = match omega {
                Some(f) => parse_json(f)?,
                None => SubshiftSpec::full(*a)?,
            };
            let spec = BetaSystemSpec::new(*a, *beta, omega)?;
            let gap = selfsim::min_gap(*a, *beta, *n, &b, exec)?;
            let fam = selfsim::covering_lower_bound(&spec, *window, *levels, *tol, &b, exec)?;
            let dims = selfsim::self_similar_dims(&spec, 20)?;
            let passed = gap.passed && fam.passed;
            Ok(Report::new("beta", json!({ "min_gap": gap, "family": fam, "dims": dims }))
                .from("min_gap", Source::Enumeration)
                .from("family", Source::Oracle)
                .from("dims", Source::Formula)
                .check(passed))
        }
        Cmd::Grid2d {
            rule,
            preset,
            a,
            nmax,
            mmax,
        } => {
            let spec = match (rule, preset) {
                (Some(f), _) => parse_json(f)?,
                (None, Some(Preset::Free)) => Grid2DSpec::free(*a)?,
                (None, Some(Preset::ThreeDot)) => Grid2DSpec::three_dot(),
                (None, Some(Preset::HardSquare)) => Grid2DSpec::hard_square(),
                (None, None) => return Err(Failure::Input("give --rule or --preset".into())),
            };
            let e = grid2d::entropy2d(&spec, *nmax, *mmax, &b, exec)?;
            let h = grid2d::homog_mean_dims(&spec, *nmax, *mmax, &b, exec)?;
            Ok(Report::new("grid2d", json!({ "entropy": e, "homog": h }))
                .from("entropy", Source::Enumeration)
                .from("homog", Source::Enumeration))
        }
        Cmd::Oracle { cmd } => run_oracle(cmd, cli.common.seed, &b, exec),
        Cmd::PaperSuite => {
            let verdicts = suite::run_all(exec);
            let passed = verdicts.iter().all(|v| v.passed && v.within_limit());
            let summary = json!({
                "passed": verdicts.iter().filter(|v| v.passed && v.within_limit()).count(),
                "total": verdicts.len(),
                "criteria": verdicts,
            });
            Ok(Report::new("paper-suite", summary).from("criteria", Source::Oracle).check(passed))
        }
    }
}

fn run_oracle(cmd: &OracleCmd, seed: u64, b: &Budgets, exec: Execution) -> Out {
    match cmd {
        OracleCmd::Cover {
            points,
            eps,
            metric,
            dynamic,
            truncation,
        } => {
            let mut m = match metric {
                Metric::Linf => MetricDescriptor::linf(),
                Metric::SumAbs => MetricDescriptor::new(MetricKind::SumWeightedAbs),
                Metric::SumMax => MetricDescriptor::new(MetricKind::SumWeightedMax),
                Metric::SumTorus => MetricDescriptor::new(MetricKind::SumWeightedTorus),
            };
            if let Some(n) = dynamic {
                m = m.with_dynamic(*n);
            }
            let cloud = PointCloud::from_csv(&read(points)?, m, *truncation)?;
            let bounds = oracle::covering_bounds(&cloud, *eps, exec)?;
            Ok(Report::new("oracle cover", json!({ "points": cloud.len(), "eps": eps, "bounds": bounds })).from("bounds", Source::Oracle))
        }
        OracleCmd::Hdim { diams, eps } => {
            let d: Vec<f64> = diams
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Failure::Input(format!("bad diameter {s:?}"))))
                .collect::<std::result::Result<_, _>>()?;
            let s = oracle::hausdorff_upper_at_scale(&d, *eps)?;
            Ok(Report::new("oracle hdim", json!({ "eps": eps, "sets": d.len(), "upper": s })).from("upper", Source::Oracle))
        }
        OracleCmd::Qbox { sys, n, m } => {
            let fam = oracle::qbox_family(&carpet_spec(sys)?, *n, *m, b, exec)?;
            let passed = fam.count == fam.formula && fam.all_below_limit && fam.separation.passed;
            Ok(Report::new("oracle qbox", fam)
                .from("count", Source::Enumeration)
                .from("formula", Source::Formula)
                .from("max_diameter", Source::Oracle)
                .from("separation", Source::Oracle)
                .check(passed))
        }
        OracleCmd::Mass {
            sys,
            n,
            mmin,
            mmax,
            s,
            samples,
        } => {
            let spec = carpet_spec(sys)?;
            let s = match s {
                Some(s) => *s,
                None => {
                    let table = weighted::fiber_counts(spec.system(), *n, b, exec)?;
                    table.level(*n).log_z(spec.w()) / (*n as f64 * (spec.b() as f64).ln()) - 0.1
                }
            };
            if mmin > mmax || *mmin == 0 {
                return Err(Failure::Input(format!("need 1 <= mmin <= mmax, got {mmin}..{mmax}")));
            }
            let rep = oracle::mass_distribution_check(&spec, *n, *mmin..=*mmax, s, *samples, seed, b, exec)?;
            let passed = rep.boxes_passed && rep.identity_max_error <= 1e-10;
            Ok(Report::new("oracle mass", rep)
                .from("levels", Source::Oracle)
                .from("identity_max_error", Source::Formula)
                .check(passed))
        }
        OracleCmd::AppendixK {
            eps_list,
            ncap,
            sets,
            m,
            eps,
            n,
        } => {
            let k = appendix::k_sequence_dims(*ncap, eps_list)?;
            let mut body = json!({ "k_sequence": k });
            let mut passed = true;
            if *sets > 0 {
                let params = AppendixParams::new(*eps, *m)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut built = Vec::with_capacity(*sets);
                for _ in 0..*sets {
                    let x = suite::random_k_point(&mut rng, n + params.l);
                    built.push(appendix::appendix_a_construct(&x, *n, &params)?);
                }
                passed = built.iter().all(|s| s.passed);
                body["params"] = json!({ "eps": params.eps, "m": params.m, "delta": params.delta, "L": params.l });
                body["sets"] = json!(built
                    .iter()
                    .map(|s| json!({ "margin": s.margin, "ln_diam": s.ln_diam, "ln_mass": s.ln_mass, "passed": s.passed }))
                    .collect::<Vec<_>>());
            }
            Ok(Report::new("oracle appendix-k", body)
                .from("k_sequence", Source::Oracle)
                .from("sets", Source::Oracle)
                .check(passed))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } | Error::ParameterOverflow(_) => 3,
        Error::ConstructionFailure(_) | Error::HypothesisViolated(_) => 2,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(4);
        }
    };
    let text = match cli.common.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &cli.common.out {
        Some(p) => {
            if let Err(e) = fs::write(p, text) {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(4);
            }
        }
        None => print!("{text}"),
    }
    if report.passed == Some(false) {
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
