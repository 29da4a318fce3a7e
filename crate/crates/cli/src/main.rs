//! `echolab`: input generation, map atlases, echo index estimates and sweeps.
//!
//! Exit codes: 0 on success, 1 on bad arguments or configuration, 2 when a
//! sweep has failed cells or `inputs validate` finds violations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use echolab::echo::{estimate_echo_index, EchoConfig};
use echolab::maps::{
    attractor_tracking_mmin, estimate_mmin, find_fixed_points, preset, AtlasConfig, AttractorAtlas, EsnFamily,
    EsnParams, FixedPointConfig, FunnelCriterion, MapFamily, StabilityKind,
};
use echolab::sim::esp_test;
use echolab::sweep::{emit_outputs, run_sweep, SweepConfig};
use echolab::symbolic::{
    build_forbidden_set, generate_sequence, validate_sequence, RepeatSpec, StartRule, SymbolSequence,
};

#[derive(Parser)]
#[command(name = "echolab", version, about = "Echo index experiments for switched input-driven maps")]
struct Cli {
    /// Built-in map family: esn2d or diabolic.
    #[arg(long, global = true, default_value = "esn2d")]
    preset: String,
    /// JSON config: a repeat spec for `inputs`, a sweep config for `sweep`,
    /// network parameters for the map commands.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; `ECHOLAB_THREADS` takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or check symbol sequences.
    #[command(subcommand)]
    Inputs(InputsCommand),
    /// Fixed points, basins and the transition table of every map.
    Atlas(AtlasArgs),
    /// Estimate the echo index along an input.
    Echo(EchoArgs),
    /// Pullback test of the echo state property.
    Esp(EspArgs),
    /// Run lengths needed for funneling and attractor tracking.
    Mmin(MminArgs),
    /// Echo index over an (m0_minus, m1_plus) grid.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum InputsCommand {
    Gen(GenArgs),
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Per-symbol minimum run lengths, e.g. `3,4`.
    #[arg(long, value_delimiter = ',')]
    m_minus: Option<Vec<u32>>,
    /// Per-symbol maximum run lengths, `inf` for unbounded.
    #[arg(long, value_delimiter = ',')]
    m_plus: Option<Vec<String>>,
    /// Per-symbol repeat probabilities.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 2000)]
    length: usize,
    /// First symbol; drawn at random when absent.
    #[arg(long)]
    start: Option<u8>,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Sequence file with a `#origin=<k>` header.
    input: PathBuf,
}

#[derive(Args)]
struct AtlasArgs {
    /// Basin grid cells per axis.
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    #[arg(long)]
    no_basins: bool,
}

#[derive(Args)]
struct InputSource {
    /// Sequence file with a `#origin=<k>` header.
    #[arg(long, conflicts_with = "periodic")]
    input: Option<PathBuf>,
    /// Repeat this word, e.g. `0011`.
    #[arg(long)]
    periodic: Option<String>,
}

#[derive(Args)]
struct EchoArgs {
    #[command(flatten)]
    source: InputSource,
    #[arg(long, default_value_t = 50)]
    n_ic: usize,
    #[arg(long = "steps", alias = "T", default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    cluster_tol: f64,
}

#[derive(Args)]
struct EspArgs {
    #[command(flatten)]
    source: InputSource,
    /// Pullback steps.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    ensemble: usize,
}

#[derive(Args)]
struct MminArgs {
    /// Ball radius for attractor tracking.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    #[arg(long, default_value_t = 10000)]
    cap: usize,
    /// Also funnel map `--map` from `{x[axis] >= level}` to below `level`.
    #[arg(long, requires = "axis")]
    map: Option<usize>,
    #[arg(long, requires = "map")]
    axis: Option<usize>,
    /// A number, or `saddle` for the unique saddle of the other maps.
    #[arg(long, default_value = "saddle")]
    level: String,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long = "steps", alias = "T")]
    steps: Option<usize>,
}

/// Reason for a non-zero exit.
enum Failure {
    Config(String),
    Partial(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn threads(cli: &Cli) -> Result<Option<usize>, Failure> {
    match std::env::var("ECHOLAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|_| Failure::Config(format!("ECHOLAB_THREADS={v:?} is not a count")))
        }
        _ => Ok(cli.threads),
    }
}

fn family(cli: &Cli) -> Result<Box<dyn MapFamily>, Failure> {
    match &cli.config {
        Some(path) => {
            let params: EsnParams = serde_json::from_str(&read(path)?)?;
            Ok(Box::new(EsnFamily::new("custom", params)?))
        }
        None => Ok(preset(&cli.preset)?),
    }
}

fn parse_max(s: &str) -> Result<Option<u32>, Failure> {
    match s.trim() {
        "inf" | "null" => Ok(None),
        t => t.parse().map(Some).map_err(|_| Failure::Config(format!("bad maximum {s:?}"))),
    }
}

fn repeat_spec(cli: &Cli, args: &SpecArgs) -> Result<RepeatSpec, Failure> {
    if let Some(path) = &cli.config {
        return Ok(RepeatSpec::from_json(&read(path)?)?);
    }
    let Some(m_minus) = args.m_minus.clone() else {
        return Err(Failure::Config("give --config or --m-minus".into()));
    };
    let m_plus = match &args.m_plus {
        Some(v) => v.iter().map(|s| parse_max(s)).collect::<Result<_, _>>()?,
        None => vec![None; m_minus.len()],
    };
    let spec = RepeatSpec::new(m_minus, m_plus)?;
    Ok(match &args.p {
        Some(p) => spec.with_probabilities(p.clone())?,
        None => spec,
    })
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn load_input(src: &InputSource, alphabet: usize, past: usize, future: usize) -> Result<SymbolSequence, Failure> {
    match (&src.input, &src.periodic) {
        (Some(path), _) => Ok(SymbolSequence::from_text(alphabet, &read(path)?)?),
        (None, Some(word)) => {
            let w = SymbolSequence::from_digits(alphabet, word)?;
            let p = w.len();
            // phase chosen so that time 0 starts the word
            let symbols = (0..past + future.max(1)).map(|k| w.symbols()[(k + p - past % p) % p]).collect();
            Ok(SymbolSequence::new(alphabet, symbols, past)?)
        }
        (None, None) => Err(Failure::Config("give --input or --periodic".into())),
    }
}

fn inputs_gen(cli: &Cli, args: &GenArgs) -> Outcome {
    let spec = repeat_spec(cli, &args.spec)?;
    let start = args.start.map_or(StartRule::Uniform, StartRule::Symbol);
    let seq = generate_sequence(&spec, args.length, cli.seed.unwrap_or(0), start)?;
    let text = seq.to_text()?;
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn inputs_validate(cli: &Cli, args: &ValidateArgs) -> Outcome {
    let spec = repeat_spec(cli, &args.spec)?;
    let seq = SymbolSequence::from_text(spec.alphabet, &read(&args.input)?)?;
    let violations = validate_sequence(&seq, &build_forbidden_set(&spec))?;
    for v in &violations {
        println!("{}\t{}", v.position, v.word);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Partial(format!("{} forbidden words found", violations.len())))
    }
}

fn atlas(cli: &Cli, args: &AtlasArgs) -> Outcome {
    let f = family(cli)?;
    let mut cfg = AtlasConfig { compute_basins: !args.no_basins, ..Default::default() };
    cfg.basins.grid_res = args.resolution;
    let atlas = AttractorAtlas::build(f.as_ref(), &cfg)?;
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("atlas.json"), atlas.to_json())?;
    atlas.write_basin_pgms(&dir)?;
    println!("stable fixed points per map: {:?}", atlas.attractor_counts());
    if !atlas.accepted {
        eprintln!("warning: atlas not accepted (incomplete table or unresolved basin cells)");
    }
    Ok(())
}

fn echo(cli: &Cli, args: &EchoArgs) -> Outcome {
    let f = family(cli)?;
    let v = load_input(&args.source, f.alphabet_size(), 0, args.steps)?;
    let cfg = EchoConfig { n_ic: args.n_ic, steps: args.steps, cluster_tol: args.cluster_tol, seed: cli.seed.unwrap_or(0) };
    print_json(&estimate_echo_index(f.as_ref(), &v, &cfg)?);
    Ok(())
}

fn esp(cli: &Cli, args: &EspArgs) -> Outcome {
    let f = family(cli)?;
    let v = load_input(&args.source, f.alphabet_size(), 2 * args.n, 0)?;
    print_json(&esp_test(f.as_ref(), &v, args.n, args.eps, args.ensemble, cli.seed.unwrap_or(0))?);
    Ok(())
}

fn saddle_level(f: &dyn MapFamily, map: usize, axis: usize) -> Result<f64, Failure> {
    let cfg = FixedPointConfig::default();
    let mut levels = Vec::new();
    for i in (0..f.alphabet_size()).filter(|&i| i != map) {
        for p in find_fixed_points(f, i, &cfg)?.of_kind(StabilityKind::Saddle) {
            levels.push(p.location[axis]);
        }
    }
    match levels[..] {
        [level] => Ok(level),
        _ => Err(Failure::Config(format!("{} saddles among the other maps; pass --level", levels.len()))),
    }
}

fn mmin(cli: &Cli, args: &MminArgs) -> Outcome {
    let f = family(cli)?;
    let atlas = AttractorAtlas::build(f.as_ref(), &AtlasConfig { compute_basins: false, ..Default::default() })?;
    let tracking = attractor_tracking_mmin(f.as_ref(), &atlas.stable_points(), &atlas.table, args.eps, args.cap)?;
    let mut out = serde_json::json!({ "tracking": tracking, "eps": args.eps });
    if let (Some(map), Some(axis)) = (args.map, args.axis) {
        if map >= f.alphabet_size() || axis >= f.dim() {
            return Err(Failure::Config(format!("map {map} or axis {axis} out of range")));
        }
        let level = match args.level.as_str() {
            "saddle" => saddle_level(f.as_ref(), map, axis)?,
            s => s.parse().map_err(|_| Failure::Config(format!("bad level {s:?}")))?,
        };
        let upper = f.domain().hi()[axis];
        let region = f.domain().restrict(axis, level, upper)?;
        let criterion = FunnelCriterion::BelowLevel { axis, level };
        let m = estimate_mmin(f.as_ref(), map, &region, &criterion, args.resolution, args.cap)?;
        out["funnel"] = serde_json::json!({ "map": map, "axis": axis, "level": level, "resolution": args.resolution, "m_min": m });
    }
    print_json(&out);
    Ok(())
}

fn sweep(cli: &Cli, args: &SweepArgs) -> Outcome {
    let mut cfg = match &cli.config {
        Some(path) => SweepConfig::from_json(&read(path)?)?,
        None => SweepConfig { preset: cli.preset.clone(), ..Default::default() },
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(t) = threads(cli)? {
        cfg.threads = Some(t);
    }
    if let Some(r) = args.realizations {
        cfg.realizations = r;
    }
    if let Some(s) = args.steps {
        cfg.steps = s;
    }
    cfg.validate()?;
    let result = run_sweep(&cfg)?;
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let paths = emit_outputs(&result, &dir)?;
    for w in &result.warnings {
        eprintln!("monotonicity: {w}");
    }
    println!("{} cells written to {}", result.cells.len(), paths.csv.display());
    match result.failed_cells() {
        0 => Ok(()),
        n => Err(Failure::Partial(format!("{n} cells failed"))),
    }
}

fn run(cli: &Cli) -> Outcome {
    // the sweep builds its own pool from the config
    if !matches!(cli.command, Command::Sweep(_)) {
        if let Some(t) = threads(cli)? {
            if t == 0 {
                return Err(Failure::Config("threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
        }
    }
    match &cli.command {
        Command::Inputs(InputsCommand::Gen(a)) => inputs_gen(cli, a),
        Command::Inputs(InputsCommand::Validate(a)) => inputs_validate(cli, a),
        Command::Atlas(a) => atlas(cli, a),
        Command::Echo(a) => echo(cli, a),
        Command::Esp(a) => esp(cli, a),
        Command::Mmin(a) => mmin(cli, a),
        Command::Sweep(a) => sweep(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Partial(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
