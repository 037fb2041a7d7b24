mod error;
mod output;

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fractal_chains::chain::{z_bruteforce, z_dp, OrderedChain};
use fractal_chains::cover::{
    box_dimension_estimate, cantor_image_test, covering_number_exact, covering_number_greedy, EXACT_COVER_CAP,
};
use fractal_chains::delta::{
    dimension_profile, min_chain_exact, min_chain_heuristic, min_chain_line, DeltaResult, ExactOptions, Strategy,
    DEFAULT_EXACT_CAP, DEFAULT_NODE_BUDGET,
};
use fractal_chains::fractal::{
    cantor_endpoints, carpet_sample, ifs_sample, ultrametric_tree_space, CarpetSpec, IfsSpec, SimilarityMap,
    DEFAULT_MAX_POINTS,
};
use fractal_chains::holder::build_parametrization;
use fractal_chains::io::{read_any, write_cloud_json, write_space_csv, write_space_json, SpaceInput};
use fractal_chains::lipcover::f_cover_number;
use fractal_chains::selfsimilar::{
    lipschitz_onto_compatibility, lipschitz_onto_compatibility_exact, HomogeneousSpec, DEFAULT_TOLERANCE,
};
use fractal_chains::ultra::{extend_lipschitz, is_ultrametric, retraction, MapTable};
use fractal_chains::{FiniteMetricSpace, Metric, MetricError, MetricKind, PointCloud};
use num_rational::Ratio;
use serde_json::json;

use error::Failure;
use output::{sink, write_csv, write_json};

/// Chain energies, Hölder parametrizations, covering numbers and Lipschitz
/// maps on finite metric spaces.
///
/// Spaces are read from JSON (`{"dist": [[...]]}` or `{"metric": ..., "points": [[...]]}`)
/// or from a CSV matrix whose first line is the point count. `-` reads stdin.
/// Exit status: 0 on success, 2 on invalid input or flags, 3 when a size cap
/// or search budget is hit.
#[derive(Debug, Parser)]
#[command(name = "fchains", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the main result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a sample of a fractal or a tree space.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Check the metric axioms and report basic statistics.
    Validate { input: PathBuf },
    /// Chain energy of one ordering.
    Zscore(ZscoreArgs),
    /// Minimal chain energy over orderings, exactly or as an upper bound.
    Delta(DeltaArgs),
    /// Hölder parametrization by anchors on an interval.
    Holder(HolderArgs),
    /// Covering number by closed balls of radius r.
    ///
    /// Ball centers are restricted to points of the space. This differs from
    /// covering by arbitrary centers by at most a constant factor in the radius,
    /// so dimension estimates are unaffected.
    Cover(CoverArgs),
    /// Box-counting dimension by a log-log fit of covering numbers.
    ///
    /// Ball centers are restricted to points of the space.
    Boxdim(BoxdimArgs),
    /// Necessary-condition test for mapping a space onto a Cantor image:
    /// b_n = N(X, 3^-n / 2) compared with 2^n.
    CantorTest(CantorTestArgs),
    /// Nearest-point retraction of an ultrametric space onto a subset.
    Retract(RetractArgs),
    /// Extend a Lipschitz map from a subset of an ultrametric space.
    Extend(ExtendArgs),
    /// Least number of Lipschitz-1 images of A needed to cover B.
    Fab { a: PathBuf, b: PathBuf },
    /// Lipschitz-onto compatibility of a homogeneous self-similar set with
    /// another self-similar set.
    SscCheck(SscArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormArg {
    Euclidean,
    Chebyshev,
}

impl From<NormArg> for MetricKind {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Euclidean => MetricKind::Euclidean,
            NormArg::Chebyshev => MetricKind::Chebyshev,
        }
    }
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Endpoints of a stage of the middle-hole Cantor set.
    Cantor {
        #[arg(long)]
        depth: u32,
        /// Removed fraction as p/q.
        #[arg(long, default_value = "1/3")]
        hole: Ratio<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// One point per cylinder of an IFS attractor.
    Ifs {
        #[arg(long)]
        depth: u32,
        /// JSON array of `{"ratio": r, "translation": [...]}` maps.
        #[arg(long, conflicts_with_all = ["ratio", "offsets"])]
        maps: Option<PathBuf>,
        /// Common ratio of maps on the line.
        #[arg(long, requires = "offsets")]
        ratio: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        offsets: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
        max_points: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Self-affine carpet on a rows x cols grid.
    Carpet {
        #[arg(long)]
        rows: u64,
        #[arg(long)]
        cols: u64,
        /// Chosen cells as `col:row` pairs, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_cell)]
        pattern: Vec<(u64, u64)>,
        #[arg(long)]
        depth: u32,
        #[arg(long, value_enum, default_value = "chebyshev")]
        metric: NormArg,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
        max_points: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Leaves of a rooted tree; distance is the diameter at the lowest common ancestor's level.
    Tree {
        #[arg(long, value_delimiter = ',')]
        arities: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        diams: Vec<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct ZscoreArgs {
    input: PathBuf,
    #[arg(long)]
    s: f64,
    /// Point indices in chain order (default: file order).
    #[arg(long, value_delimiter = ',', conflicts_with = "sorted")]
    order: Option<Vec<usize>>,
    /// Order points of a subset of the line by coordinate.
    #[arg(long)]
    sorted: bool,
    /// Also evaluate by exhaustive enumeration (at most 20 points).
    #[arg(long)]
    bruteforce: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    /// Sorted order on the line, branch-and-bound for small spaces, else nearest neighbour.
    Auto,
    Exact,
    Sorted,
    Nn,
    #[value(name = "2opt")]
    TwoOpt,
    Nettree,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "auto")]
    mode: Mode,
    /// Net-tree radius ratio in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    u: f64,
    /// Node budget for the exact solver.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Largest space the exact solver accepts.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    max_points: usize,
    /// Start index for the nearest-neighbour walk.
    #[arg(long)]
    start: Option<usize>,
}

#[derive(Debug, Args)]
struct DeltaArgs {
    input: PathBuf,
    #[arg(long, required_unless_present = "profile")]
    s: Option<f64>,
    #[command(flatten)]
    solve: SolveArgs,
    /// Exponents at which to tabulate the minimal energy and the net-tree bound.
    #[arg(long, value_delimiter = ',')]
    profile: Option<Vec<f64>>,
    /// Write the profile as CSV (s, delta, bound, exact).
    #[arg(long, requires = "profile")]
    emit_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HolderArgs {
    input: PathBuf,
    #[arg(long)]
    s: f64,
    /// Use this ordering instead of solving for one.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Debug, Args)]
struct CoverArgs {
    input: PathBuf,
    #[arg(long)]
    r: f64,
    /// Minimum cover by branch-and-bound instead of greedy.
    #[arg(long)]
    exact: bool,
    /// Largest space the exact solver accepts.
    #[arg(long, default_value_t = EXACT_COVER_CAP)]
    cap: usize,
}

#[derive(Debug, Args)]
struct BoxdimArgs {
    input: PathBuf,
    /// Radii, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "base")]
    radii: Option<Vec<f64>>,
    /// Radii base^-k for k in kmin..=kmax.
    #[arg(long, requires_all = ["kmin", "kmax"])]
    base: Option<f64>,
    #[arg(long)]
    kmin: Option<i32>,
    #[arg(long)]
    kmax: Option<i32>,
    /// Write (log 1/r, log count) pairs as CSV.
    #[arg(long)]
    emit_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CantorTestArgs {
    input: PathBuf,
    #[arg(long)]
    depth: u32,
}

#[derive(Debug, Args)]
struct RetractArgs {
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<usize>,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    /// Ultrametric domain.
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<usize>,
    /// JSON index array; entry k is the image of subset[k].
    #[arg(long)]
    map: PathBuf,
    /// Target space.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
}

#[derive(Debug, Args)]
struct SscArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    r: f64,
    /// Contraction ratios of the target set.
    #[arg(long, value_delimiter = ',', required_unless_present = "exact")]
    ratios: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Target ratios given as r^e with rational exponents p/q; decided exactly.
    #[arg(long, value_delimiter = ',', conflicts_with = "ratios")]
    exact: Option<Vec<Ratio<i64>>>,
}

fn parse_cell(s: &str) -> Result<(u64, u64), String> {
    let (c, r) = s.split_once(':').ok_or_else(|| format!("expected col:row, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(c)?, parse(r)?))
}

fn open(path: &Path) -> Result<Box<dyn Read>, Failure> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    File::open(path)
        .map(|f| Box::new(io::BufReader::new(f)) as Box<dyn Read>)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<SpaceInput, Failure> {
    let input = read_any(open(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    if let SpaceInput::Cloud(c) = &input {
        if let Some((i, j)) = c.find_duplicate() {
            return Err(MetricError::DuplicatePoint { i, j }.into());
        }
    }
    Ok(input)
}

struct Run {
    output: Option<PathBuf>,
}

impl Run {
    fn json<T: serde::Serialize + ?Sized>(&self, value: &T) -> Result<(), Failure> {
        write_json(value, &mut *sink(self.output.as_deref())?)?;
        Ok(())
    }

    fn cloud(&self, cloud: &PointCloud, format: Format) -> Result<(), Failure> {
        let mut out = sink(self.output.as_deref())?;
        match format {
            Format::Json => {
                write_cloud_json(cloud, &mut out)?;
                out.write_all(b"\n")?;
            }
            Format::Csv => write_space_csv(&FiniteMetricSpace::from_points(cloud)?, &mut out)?,
        }
        out.flush()?;
        Ok(())
    }

    fn space(&self, space: &FiniteMetricSpace, format: Format) -> Result<(), Failure> {
        let mut out = sink(self.output.as_deref())?;
        match format {
            Format::Json => {
                write_space_json(space, &mut out)?;
                out.write_all(b"\n")?;
            }
            Format::Csv => write_space_csv(space, &mut out)?,
        }
        out.flush()?;
        Ok(())
    }
}

fn solve(space: &dyn Metric, s: f64, args: &SolveArgs) -> Result<DeltaResult, Failure> {
    let exact = ExactOptions { node_budget: args.budget, max_points: args.max_points };
    let result = match args.mode {
        Mode::Auto => match space.line_coordinates() {
            Some(xs) => min_chain_line(&xs, s, space.len() <= args.max_points)?,
            None if space.len() <= args.max_points => min_chain_exact(space, s, exact)?,
            None => min_chain_heuristic(space, s, Strategy::NearestNeighbor { start: args.start })?,
        },
        Mode::Exact => min_chain_exact(space, s, exact)?,
        Mode::Sorted => {
            let xs = space
                .line_coordinates()
                .ok_or_else(|| Failure::invalid("sorted mode needs a point cloud on the line"))?;
            min_chain_line(&xs, s, false)?
        }
        Mode::Nn => min_chain_heuristic(space, s, Strategy::NearestNeighbor { start: args.start })?,
        Mode::TwoOpt => min_chain_heuristic(space, s, Strategy::TwoOpt)?,
        Mode::Nettree => min_chain_heuristic(space, s, Strategy::NetTree { u: args.u })?,
    };
    Ok(result)
}

fn check_start(start: Option<usize>, n: usize) -> Result<(), Failure> {
    match start {
        Some(i) if i >= n => Err(Failure::invalid(format!("start index {i} is out of range for {n} points"))),
        _ => Ok(()),
    }
}

fn gen(run: &Run, kind: GenKind) -> Result<(), Failure> {
    match kind {
        GenKind::Cantor { depth, hole, format } => run.cloud(&cantor_endpoints(depth, hole)?, format),
        GenKind::Ifs { depth, maps, ratio, offsets, max_points, format } => {
            let spec = match (maps, ratio, offsets) {
                (Some(path), _, _) => {
                    let maps: Vec<SimilarityMap> = serde_json::from_reader(open(&path)?)
                        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
                    IfsSpec::new(maps)?
                }
                (None, Some(r), Some(offsets)) => IfsSpec::homogeneous_line(r, &offsets)?,
                _ => return Err(Failure::invalid("give --maps FILE or --ratio with --offsets")),
            };
            run.cloud(&ifs_sample(&spec, depth, max_points)?, format)
        }
        GenKind::Carpet { rows, cols, pattern, depth, metric, max_points, format } => {
            let spec = CarpetSpec::new(rows, cols, pattern)?;
            run.cloud(&carpet_sample(&spec, depth, metric.into(), max_points)?, format)
        }
        GenKind::Tree { arities, diams, format } => run.space(&ultrametric_tree_space(&arities, &diams)?, format),
    }
}

fn validate(run: &Run, path: &Path) -> Result<(), Failure> {
    let input = load(path)?;
    let space = input.metric();
    let kind = match &input {
        SpaceInput::Matrix(_) => "matrix",
        SpaceInput::Cloud(_) => "cloud",
    };
    let min = space.min_distance();
    run.json(&json!({
        "valid": true,
        "kind": kind,
        "n": space.len(),
        "diameter": space.diameter(),
        "min_distance": if min.is_finite() { Some(min) } else { None },
        "ultrametric": is_ultrametric(space),
        "on_line": space.line_coordinates().is_some(),
    }))
}

fn zscore(run: &Run, args: ZscoreArgs) -> Result<(), Failure> {
    let input = load(&args.input)?;
    let space = input.metric();
    let order = if args.sorted {
        let xs = space
            .line_coordinates()
            .ok_or_else(|| Failure::invalid("--sorted needs a point cloud on the line"))?;
        OrderedChain::sorted_line(&xs, args.s)?.0
    } else {
        args.order.unwrap_or_else(|| (0..space.len()).collect())
    };
    let value = z_dp(space, &order, args.s)?;
    let brute = if args.bruteforce {
        Some(z_bruteforce(space, &order, args.s)?)
    } else {
        None
    };
    run.json(&json!({ "s": args.s, "order": order, "value": value, "bruteforce": brute }))
}

fn delta(run: &Run, args: DeltaArgs) -> Result<(), Failure> {
    let input = load(&args.input)?;
    let space = input.metric();
    check_start(args.solve.start, space.len())?;
    let result = args.s.map(|s| solve(space, s, &args.solve)).transpose()?;
    let Some(grid) = args.profile else {
        return run.json(&result.expect("--s is required without --profile"));
    };
    let rows = dimension_profile(space, &grid, args.solve.u)?;
    if let Some(path) = &args.emit_csv {
        let table: Vec<Vec<f64>> =
            rows.iter().map(|r| vec![r.s, r.delta, r.bound, if r.exact { 1.0 } else { 0.0 }]).collect();
        write_csv(&["s", "delta", "bound", "exact"], &table, &mut *sink(Some(path))?)?;
    }
    run.json(&json!({ "result": result, "profile": rows }))
}

fn holder(run: &Run, args: HolderArgs) -> Result<(), Failure> {
    let input = load(&args.input)?;
    let space = input.metric();
    check_start(args.solve.start, space.len())?;
    let order = match args.order {
        Some(order) => order,
        None => solve(space, args.s, &args.solve)?.order,
    };
    run.json(&build_parametrization(space, &order, args.s)?)
}

fn cover(run: &Run, args: CoverArgs) -> Result<(), Failure> {
    let input = load(&args.input)?;
    let report = if args.exact {
        covering_number_exact(input.metric(), args.r, args.cap)?
    } else {
        covering_number_greedy(input.metric(), args.r)?
    };
    run.json(&report)
}

fn boxdim(run: &Run, args: BoxdimArgs) -> Result<(), Failure> {
    let radii = match (args.radii, args.base, args.kmin, args.kmax) {
        (Some(r), ..) => r,
        (None, Some(b), Some(lo), Some(hi)) => {
            if !(b > 1.0 && b.is_finite()) || lo > hi {
                return Err(Failure::invalid("need base > 1 and kmin <= kmax"));
            }
            (lo..=hi).map(|k| b.powi(-k)).collect()
        }
        _ => return Err(Failure::invalid("give --radii or --base with --kmin and --kmax")),
    };
    let input = load(&args.input)?;
    let estimate = box_dimension_estimate(input.metric(), &radii)?;
    if let Some(path) = &args.emit_csv {
        let table: Vec<Vec<f64>> = estimate.log_pairs().into_iter().map(|(x, y)| vec![x, y]).collect();
        write_csv(&["log_inv_r", "log_count"], &table, &mut *sink(Some(path))?)?;
    }
    run.json(&estimate)
}

fn retract(run: &Run, args: RetractArgs) -> Result<(), Failure> {
    let space = load(&args.input)?;
    run.json(&retraction(space.metric(), &args.subset)?)
}

fn extend(run: &Run, args: ExtendArgs) -> Result<(), Failure> {
    let x = load(&args.input)?;
    let y = load(&args.target)?;
    let image: Vec<usize> = serde_json::from_reader(open(&args.map)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", args.map.display())))?;
    let f = MapTable::new(image, y.metric().len())?;
    run.json(&extend_lipschitz(x.metric(), &args.subset, &f, y.metric(), args.lipschitz)?)
}

fn fab(run: &Run, a: &Path, b: &Path) -> Result<(), Failure> {
    let a = load(a)?;
    let b = load(b)?;
    let w = f_cover_number(a.metric(), b.metric())?;
    run.json(&json!({ "k": w.k, "witness": { "maps": w.maps, "images": w.images } }))
}

fn ssc_check(run: &Run, args: SscArgs) -> Result<(), Failure> {
    let spec = HomogeneousSpec { q: args.q, r: args.r };
    let report = match (&args.exact, &args.ratios) {
        (Some(e), _) => lipschitz_onto_compatibility_exact(spec, e)?,
        (None, Some(ratios)) => lipschitz_onto_compatibility(spec, ratios, args.tol)?,
        (None, None) => return Err(Failure::invalid("give --ratios or --exact")),
    };
    run.json(&report)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::invalid(e.to_string()))?;
    }
    let run = Run { output: cli.output };
    match cli.command {
        Command::Gen { kind } => gen(&run, kind),
        Command::Validate { input } => validate(&run, &input),
        Command::Zscore(a) => zscore(&run, a),
        Command::Delta(a) => delta(&run, a),
        Command::Holder(a) => holder(&run, a),
        Command::Cover(a) => cover(&run, a),
        Command::Boxdim(a) => boxdim(&run, a),
        Command::CantorTest(a) => {
            let input = load(&a.input)?;
            run.json(&cantor_image_test(input.metric(), a.depth)?)
        }
        Command::Retract(a) => retract(&run, a),
        Command::Extend(a) => extend(&run, a),
        Command::Fab { a, b } => fab(&run, &a, &b),
        Command::SscCheck(a) => ssc_check(&run, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            if let Some(detail) = failure.detail() {
                eprintln!("best found: {detail}");
            }
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
