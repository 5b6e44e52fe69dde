use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use aqc_core::cmr::cmr_embed;
use aqc_core::compile_game::{CompilationGame, DynamicsConfig, DynamicsStatus, PlayerOrder, Profile, Verdict};
use aqc_core::embedding::{
    brute_force_min_embedding, search_ideal, verify_minor, Embedding, IdealSearch, ViolationKind,
};
use aqc_core::game::{FiniteGame, SUPPORT_ENUMERATION_MAX};
use aqc_core::graph::{parse_edge_list, to_dot, to_edge_list};
use aqc_core::ising::QuadraticForm;
use aqc_core::{Graph, Topology};

const NOT_FOUND: &str = "no embedding found";

#[derive(Parser)]
#[command(name = "aqcc", version, about = "Compile quadratic programs onto annealer hardware graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a hardware or program graph.
    Gen(GenArgs),
    /// Turn a quadratic form into a program graph edge list.
    Ingest(IngestArgs),
    /// Embed a program graph into a hardware graph.
    Embed(EmbedArgs),
    /// Check an embedding and print the violation report.
    Verify(VerifyArgs),
    /// Normal-form game utilities.
    Game {
        #[command(subcommand)]
        command: GameCommand,
    },
    /// Decide whether a chain profile is a Nash equilibrium of the compilation game.
    Certify(CertifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cycle,
    Complete,
    Path,
    Grid,
    Random,
    Chimera,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Edgelist,
    Dot,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Vertex count for cycle, complete, path and random graphs.
    #[arg(long)]
    n: Option<usize>,
    /// Cell grid side for chimera graphs.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Edge probability for random graphs.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: GraphFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct IngestArgs {
    /// Quadratic form as text (`x0 + x1*x2`) or JSON (`{"n", "linear", "quadratic"}`).
    input: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: GraphFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Alg {
    Game,
    Cmr,
    Brute,
    Ideal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Ascending,
    Shuffled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    Dot,
    Summary,
}

#[derive(clap::Args)]
struct EmbedArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    hardware: PathBuf,
    #[arg(long, value_enum, default_value = "game")]
    alg: Alg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Required by `game` and `cmr`.
    #[arg(long)]
    seed: Option<u64>,
    /// CMR attempts, also used to seed the game's starting profile.
    #[arg(long, default_value_t = 50)]
    tries: usize,
    #[arg(long, default_value_t = 100)]
    max_passes: usize,
    #[arg(long, value_enum, default_value = "ascending")]
    order: Order,
    /// Node budget for the ideal (injective) search.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    #[arg(long, value_enum, default_value = "json")]
    emit: Emit,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    hardware: PathBuf,
    #[arg(long)]
    embedding: PathBuf,
}

#[derive(Subcommand)]
enum GameCommand {
    /// Print the pure equilibria, and the mixed ones for small two-player games.
    Solve {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(clap::Args)]
struct CertifyArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    hardware: PathBuf,
    /// Embedding JSON holding one chain per program vertex.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 6)]
    certify_cap: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let rendered = e.to_string();
            let head: Vec<&str> = rendered
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("aqcc: {}", head.join(" "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("aqcc: error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Ingest(args) => ingest(args),
        Command::Embed(args) => embed(args),
        Command::Verify(args) => verify(args),
        Command::Game {
            command: GameCommand::Solve { input },
        } => solve_game(&input),
        Command::Certify(args) => certify(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph> {
    parse_edge_list(&read(path)?).with_context(|| format!("malformed graph in {}", path.display()))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn not_found(detail: Option<&str>) -> ExitCode {
    match detail {
        Some(d) => eprintln!("aqcc: {NOT_FOUND} ({d})"),
        None => eprintln!("aqcc: {NOT_FOUND}"),
    }
    ExitCode::from(1)
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required for --kind {kind}"))
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let topology = match args.kind {
        Kind::Cycle => Topology::Cycle { n: need(args.n, "n", "cycle")? },
        Kind::Complete => Topology::Complete { n: need(args.n, "n", "complete")? },
        Kind::Path => Topology::Path { n: need(args.n, "n", "path")? },
        Kind::Grid => Topology::Grid {
            rows: need(args.rows, "rows", "grid")?,
            cols: need(args.cols, "cols", "grid")?,
        },
        Kind::Random => Topology::Random {
            n: need(args.n, "n", "random")?,
            p: need(args.p, "p", "random")?,
            seed: need(args.seed, "seed", "random")?,
        },
        Kind::Chimera => Topology::Chimera { m: need(args.m, "m", "chimera")? },
    };
    let g = topology.build()?;
    let text = match args.format {
        GraphFormat::Edgelist => to_edge_list(&g),
        GraphFormat::Dot => to_dot(&g),
    };
    write_out(args.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn ingest(args: IngestArgs) -> Result<ExitCode> {
    let text = read(&args.input)?;
    let form = if text.trim_start().starts_with('{') {
        QuadraticForm::from_json(&text)?
    } else {
        QuadraticForm::parse(text.trim())?
    };
    let pg = form.to_program_graph()?;
    let out = match args.format {
        GraphFormat::Dot => to_dot(&pg.graph),
        GraphFormat::Edgelist => {
            let mut out = String::new();
            for (v, x) in pg.variables.iter().enumerate() {
                let lin = if pg.linear[v] { " (linear)" } else { "" };
                out.push_str(&format!("# vertex {v} = x{x}{lin}\n"));
            }
            out + &to_edge_list(&pg.graph)
        }
    };
    write_out(args.output.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

struct Found {
    embedding: Embedding,
    json: Value,
    status: String,
    passes: Option<usize>,
}

fn embed(args: EmbedArgs) -> Result<ExitCode> {
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        bail!("--alpha must be a positive number");
    }
    if args.tries == 0 {
        bail!("--tries must be at least 1");
    }
    let gp = read_graph(&args.program)?;
    let gh = read_graph(&args.hardware)?;
    let seed = match args.alg {
        Alg::Game | Alg::Cmr => Some(args.seed.context("--seed is required for --alg game and --alg cmr")?),
        Alg::Brute | Alg::Ideal => None,
    };

    let found = match args.alg {
        Alg::Game => {
            let config = DynamicsConfig {
                max_passes: args.max_passes,
                order: match args.order {
                    Order::Ascending => PlayerOrder::Ascending,
                    Order::Shuffled => PlayerOrder::Shuffled,
                },
                seed: seed.unwrap_or_default(),
                init_tries: args.tries,
                ..DynamicsConfig::default()
            };
            let game = CompilationGame::new(gp.clone(), gh.clone(), args.alpha)?.with_config(config);
            let result = game.solve()?;
            match &result.profile {
                Some(p) if result.status != DynamicsStatus::Infeasible => Found {
                    embedding: p.to_embedding(args.alpha),
                    json: result.to_json_value(args.alpha),
                    status: result.status.as_str().to_string(),
                    passes: Some(result.passes),
                },
                _ => return Ok(not_found(None)),
            }
        }
        Alg::Cmr => {
            let outcome = cmr_embed(&gp, &gh, seed.unwrap_or_default(), args.tries)?;
            let Some(mut e) = outcome.embedding else {
                return Ok(not_found(Some(&format!("{} tries", outcome.stats.tries))));
            };
            e.alpha = args.alpha;
            let mut json = found_json(&e);
            json["stats"] = serde_json::to_value(outcome.stats)?;
            Found {
                embedding: e,
                json,
                status: "found".into(),
                passes: None,
            }
        }
        Alg::Brute => {
            let Some((e, _)) = brute_force_min_embedding(&gp, &gh, args.alpha)? else {
                return Ok(not_found(None));
            };
            Found {
                json: found_json(&e),
                embedding: e,
                status: "optimal".into(),
                passes: None,
            }
        }
        Alg::Ideal => match search_ideal(&gp, &gh, args.budget)? {
            IdealSearch::Found(map) => {
                let e = Embedding::from_vertex_map(args.alpha, &map);
                Found {
                    json: found_json(&e),
                    embedding: e,
                    status: "ideal".into(),
                    passes: None,
                }
            }
            IdealSearch::NotFound => return Ok(not_found(Some("no ideal compilation exists"))),
            IdealSearch::BudgetExceeded => return Ok(not_found(Some("search budget exhausted"))),
        },
    };

    let report = verify_minor(&found.embedding, &gp, &gh)?;
    if !report.ok {
        bail!(
            "internal error: produced embedding failed verification: {}",
            serde_json::to_string(&report.violations)?
        );
    }

    let text = match args.emit {
        Emit::Json => format!("{}\n", serde_json::to_string_pretty(&found.json)?),
        Emit::Dot => embedding_dot(&gh, &found.embedding),
        Emit::Summary => summary(&found),
    };
    write_out(args.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn found_json(e: &Embedding) -> Value {
    let mut v = serde_json::to_value(e).expect("embedding serializes");
    v["total_cost"] = json!(e.total_cost());
    v
}

/// The hardware graph with every used qubit labelled by its program vertex.
fn embedding_dot(gh: &Graph, e: &Embedding) -> String {
    let mut owner = BTreeMap::new();
    for (v, chain) in e.chains.iter().enumerate() {
        for &h in chain {
            owner.insert(h, v);
        }
    }
    let mut out = String::from("graph G {\n");
    for h in gh.vertices() {
        match owner.get(&h) {
            Some(v) => out.push_str(&format!("  {h} [label=\"{h}:p{v}\", chain={v}];\n")),
            None => out.push_str(&format!("  {h};\n")),
        }
    }
    for &(u, v) in gh.edges() {
        let style = match (owner.get(&u), owner.get(&v)) {
            (Some(a), Some(b)) if a == b => " [style=bold]",
            _ => "",
        };
        out.push_str(&format!("  {u} -- {v}{style};\n"));
    }
    out.push_str("}\n");
    out
}

fn summary(found: &Found) -> String {
    let e = &found.embedding;
    let mut out = format!("status: {}\n", found.status);
    match found.passes {
        Some(p) => out.push_str(&format!("passes: {p}\n")),
        None => out.push_str("passes: -\n"),
    }
    out.push_str(&format!("total cost: {}\n", e.total_cost()));
    out.push_str(&format!("max chain length: {}\n", e.max_chain_len()));
    out.push_str("chain lengths:\n");
    for (len, count) in e.chain_length_histogram() {
        out.push_str(&format!("  {len}: {count}\n"));
    }
    out
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let gp = read_graph(&args.program)?;
    let gh = read_graph(&args.hardware)?;
    let e = Embedding::from_json(&read(&args.embedding)?)
        .with_context(|| format!("malformed embedding in {}", args.embedding.display()))?;
    let report = verify_minor(&e, &gp, &gh)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn solve_game(input: &Path) -> Result<ExitCode> {
    let game = FiniteGame::from_json(&read(input)?).with_context(|| format!("malformed game in {}", input.display()))?;
    let pure: Vec<Vec<usize>> = game.enumerate_pure_nash()?.into_iter().map(|p| p.0).collect();
    let mut out = json!({ "players": game.num_players(), "pure_nash": pure });
    if game.num_players() == 2 && game.strategy_counts().iter().all(|&c| c <= SUPPORT_ENUMERATION_MAX) {
        let mixed: Vec<Vec<Vec<f64>>> = game
            .support_enumeration_2p()?
            .iter()
            .map(|m| m.distributions().to_vec())
            .collect();
        out["mixed_nash"] = json!(mixed);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}

fn certify(args: CertifyArgs) -> Result<ExitCode> {
    let gp = read_graph(&args.program)?;
    let gh = read_graph(&args.hardware)?;
    let e = Embedding::from_json(&read(&args.profile)?)
        .with_context(|| format!("malformed profile in {}", args.profile.display()))?;
    if verify_minor(&e, &gp, &gh)?.has(ViolationKind::OutOfRange) {
        bail!("profile uses vertices outside the hardware graph");
    }
    let game = CompilationGame::new(gp, gh, args.alpha)?.with_config(DynamicsConfig {
        certify_cap: args.certify_cap,
        ..DynamicsConfig::default()
    });
    let profile = Profile::from(e);
    let out = match game.certify_nash(&profile) {
        Verdict::Nash => json!({ "verdict": "nash" }),
        Verdict::Inconclusive => json!({ "verdict": "inconclusive", "certify_cap": args.certify_cap }),
        Verdict::Improvable { player, chain } => {
            let mut better = profile.clone();
            better.chains[player] = chain.clone();
            json!({
                "verdict": "improvable",
                "player": player,
                "chain": chain,
                "from_cost": game.player_cost(&profile, player),
                "to_cost": game.player_cost(&better, player),
            })
        }
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(ExitCode::SUCCESS)
}
