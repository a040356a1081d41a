//! `medagent`: boot the search platform, manage users and profiles, run
//! searches, benchmarks and evaluation suites.

mod client;
mod config;
mod exit;
mod server;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use medagent::bench::{
    calibrate_kappa, generate_suite, judgments_to_tsv, oracle_judgments, parse_judgments, parse_suite,
    perfect_oracle_corpus, reports_table, run_benchmark, run_suite, suite_to_tsv, ModelInputs, REFERENCE_RATIO,
};
use medagent::corpus::{generate_corpus, load_corpus, save_corpus, Corpus, InProcessTransport, SiteService, Transport};
use medagent::personalization::{ProfileStore, ResultItem};
use medagent::query::{annotate, fixture_dictionary, Dictionary};
use medagent::security::{Credential, PlatformSecret, SessionStore};
use medagent::topology::{OutboundRequest, SearchSystem, SystemConfig, TopologyKind};
use medagent::Category;
use serde_json::{json, Value};

use crate::config::CliConfig;
use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TopologyArg {
    Static,
    Mobile,
}

impl From<TopologyArg> for TopologyKind {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Static => TopologyKind::Static,
            TopologyArg::Mobile => TopologyKind::Mobile,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "medagent", version, about = "Multi-agent medical information search platform")]
struct Cli {
    /// Configuration file (flat `key = value`).
    #[arg(long, global = true, default_value = "medagent.conf")]
    config: PathBuf,
    /// Overrides the configured topology.
    #[arg(long, global = true, value_enum)]
    topology: Option<TopologyArg>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Overrides the configured benchmark repetitions.
    #[arg(long, global = true)]
    repetitions: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Writes a ready-to-run directory: corpus, dictionary, secret, config,
    /// a query suite and its judgments.
    Init {
        #[arg(long)]
        dir: PathBuf,
        /// Build the perfect-oracle fixture instead of the plain corpus.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1)]
        sites_per_category: usize,
        #[arg(long, default_value_t = 8)]
        records_per_site: usize,
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
    },
    /// Allows `user` to log in from `ip`.
    Register {
        #[arg(long)]
        user: String,
        #[arg(long)]
        ip: String,
    },
    /// Serves the sites and the search API until interrupted.
    Serve,
    /// Opens a session on a running server and prints its token.
    Login {
        #[arg(long)]
        user: String,
        #[arg(long, default_value = "127.0.0.1")]
        ip: String,
    },
    /// Runs one search on a running server.
    Query {
        #[arg(long, env = "MEDAGENT_TOKEN", hide_env_values = true)]
        token: Option<String>,
        #[arg(required = true, num_args = 1..)]
        text: Vec<String>,
    },
    /// Updates the caller's profile with `field=value` assignments.
    Profile {
        #[arg(long, env = "MEDAGENT_TOKEN", hide_env_values = true)]
        token: Option<String>,
        #[arg(required = true, num_args = 1..)]
        assignments: Vec<String>,
    },
    /// Times the configured topologies against the closed-form models.
    Bench {
        #[arg(long, default_value = "fever")]
        query: String,
        /// Target every category instead of those the query names.
        #[arg(long)]
        all_categories: bool,
        /// Solve kappa so the modeled mobile/static ratio hits the
        /// reference ratio before running.
        #[arg(long)]
        calibrate: bool,
    },
    /// Scores a query suite against relevance judgments.
    Eval {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        judgments: PathBuf,
    },
    /// Writes a generated suite and judgments for the configured corpus.
    GenSuite {
        #[arg(long)]
        suite_out: PathBuf,
        #[arg(long)]
        judgments_out: PathBuf,
        /// Judge by what the collection stage can reach.
        #[arg(long)]
        oracle: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Init {
        dir,
        oracle,
        sites_per_category,
        records_per_site,
        bind,
    } = &cli.command
    {
        return cmd_init(dir, *oracle, cli.seed.unwrap_or(42), *sites_per_category, *records_per_site, bind);
    }
    let mut cfg = CliConfig::load(&cli.config)?;
    if let Some(t) = cli.topology {
        cfg.topology = t.into();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.repetitions {
        if r == 0 {
            return Err(CliError::config("--repetitions must be >= 1"));
        }
        cfg.repetitions = r;
    }
    match cli.command {
        Command::Init { .. } => unreachable!("handled above"),
        Command::Register { user, ip } => cmd_register(&cfg, &user, &ip),
        Command::Serve => cmd_serve(&cfg),
        Command::Login { user, ip } => cmd_login(&cfg, &user, &ip, cli.format),
        Command::Query { token, text } => cmd_query(&cfg, token, &text.join(" "), cli.format),
        Command::Profile { token, assignments } => cmd_profile(&cfg, token, &assignments, cli.format),
        Command::Bench {
            query,
            all_categories,
            calibrate,
        } => cmd_bench(&cfg, cli.topology.map(Into::into), &query, all_categories, calibrate, cli.format),
        Command::Eval { suite, judgments } => cmd_eval(&cfg, &suite, &judgments, cli.format),
        Command::GenSuite {
            suite_out,
            judgments_out,
            oracle,
        } => cmd_gen_suite(&cfg, &suite_out, &judgments_out, oracle),
    }
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::internal(format!("cannot {what} {}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err("write", path, e))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

fn cmd_init(dir: &Path, oracle: bool, seed: u64, spc: usize, rps: usize, bind: &str) -> Result<(), CliError> {
    let corpus = if oracle {
        perfect_oracle_corpus(seed)
    } else {
        generate_corpus(seed, spc.max(1), rps.max(1))
    };
    std::fs::create_dir_all(dir.join("data")).map_err(|e| io_err("create", dir, e))?;
    save_corpus(&corpus, &dir.join("corpus")).map_err(|e| CliError::internal(e.to_string()))?;
    let dict = fixture_dictionary();
    write_file(&dir.join("dictionary.tsv"), &dict.to_tsv())?;
    let secret_path = dir.join("secret.hex");
    write_file(&secret_path, &PlatformSecret::generate().to_hex())?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&secret_path, std::fs::Permissions::from_mode(0o600))
            .map_err(|e| io_err("protect", &secret_path, e))?;
    }
    write_file(&dir.join("data").join("users.txt"), "demo-user 127.0.0.1\n")?;
    let (suite, judgments) = generate_suite(seed, &corpus);
    let judgments = if oracle {
        oracle_judgments(&suite, &corpus, &dict, None, medagent::security::AssuranceLevel::default())
    } else {
        judgments
    };
    write_file(&dir.join("suite.tsv"), &suite_to_tsv(&suite))?;
    write_file(&dir.join("judgments.tsv"), &judgments_to_tsv(&judgments))?;
    let conf = config::render(&[
        ("corpus_path", "corpus".into()),
        ("dictionary_path", "dictionary.tsv".into()),
        ("data_dir", "data".into()),
        ("bind_address", bind.into()),
        ("topology", "static".into()),
        ("required_assurance", "2".into()),
        ("session_ttl_secs", "1800".into()),
        ("c_msg", "0".into()),
        ("c_move", "0".into()),
        ("kappa", "0".into()),
        ("repetitions", "10".into()),
        ("seed", seed.to_string()),
        ("secret_path", "secret.hex".into()),
    ]);
    write_file(&dir.join("medagent.conf"), &conf)?;
    println!("initialised {} ({} sites, {} records)", dir.display(), corpus.sites.len(), corpus.record_count());
    Ok(())
}

fn cmd_register(cfg: &CliConfig, user: &str, ip: &str) -> Result<(), CliError> {
    if user.is_empty() || user.chars().any(char::is_whitespace) {
        return Err(CliError::invalid("user id must be nonempty and contain no whitespace"));
    }
    let ip: std::net::IpAddr = ip.parse().map_err(|_| CliError::invalid(format!("`{ip}` is not an IP address")))?;
    let path = cfg.users_file();
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| io_err("open", &path, e))?;
    writeln!(f, "{user} {ip}").map_err(|e| io_err("write", &path, e))?;
    println!("registered {user} from {ip}");
    Ok(())
}

fn load_inputs(cfg: &CliConfig) -> Result<(Arc<Corpus>, Arc<Dictionary>), CliError> {
    let corpus = load_corpus(&cfg.corpus_path).map_err(|e| CliError::config(e.to_string()))?;
    let dict = Dictionary::parse(&read_file(&cfg.dictionary_path)?, "en")
        .map_err(|e| CliError::config(format!("{}: {e}", cfg.dictionary_path.display())))?;
    Ok((Arc::new(corpus), Arc::new(dict)))
}

fn secret(cfg: &CliConfig) -> Result<PlatformSecret, CliError> {
    match &cfg.secret_path {
        Some(p) => Ok(PlatformSecret::from_file(p)?),
        None => {
            eprintln!("warning: no secret_path configured; using a key that lasts for this process only");
            Ok(PlatformSecret::generate())
        }
    }
}

fn build_system(
    cfg: &CliConfig,
    corpus: &Arc<Corpus>,
    dict: Arc<Dictionary>,
    profiles: ProfileStore,
) -> Result<SearchSystem, CliError> {
    let transport: Arc<dyn Transport> = Arc::new(InProcessTransport::new(SiteService::new(corpus.clone())));
    SearchSystem::new(
        corpus,
        dict,
        transport,
        Arc::new(SessionStore::new(cfg.session_ttl)),
        Arc::new(profiles),
        secret(cfg)?,
        SystemConfig {
            topology: cfg.topology,
            required_assurance: cfg.required_assurance,
            platform: cfg.platform(),
        },
    )
    .map_err(|e| CliError::internal(e.to_string()))
}

fn cmd_serve(cfg: &CliConfig) -> Result<(), CliError> {
    let (corpus, dict) = load_inputs(cfg)?;
    let profiles = ProfileStore::open(&cfg.profiles_dir()).map_err(CliError::from)?;
    let system = build_system(cfg, &corpus, dict, profiles)?;
    server::load_users(&cfg.users_file(), &system.sessions)?;
    let app = Arc::new(server::App {
        system,
        users_file: cfg.users_file(),
    });
    server::run(app, SiteService::new(corpus.clone()), &cfg.bind_address, corpus.sites.len())
}

fn cmd_login(cfg: &CliConfig, user: &str, ip: &str, format: Format) -> Result<(), CliError> {
    let reply = client::Client::new(&cfg.bind_address).post("/api/login", None, &json!({"user_id": user, "ip": ip}))?;
    let token = reply["token"].as_str().ok_or_else(|| CliError::transport("reply carries no token"))?;
    match format {
        Format::Table => println!("{token}"),
        Format::Machine => println!("token={token}"),
    }
    Ok(())
}

fn require_token(token: Option<String>) -> Result<String, CliError> {
    token
        .filter(|t| !t.is_empty())
        .ok_or_else(|| CliError::from(medagent::security::SecurityError::AuthRequired))
}

fn cmd_query(cfg: &CliConfig, token: Option<String>, text: &str, format: Format) -> Result<(), CliError> {
    let token = require_token(token)?;
    let reply = client::Client::new(&cfg.bind_address).post("/api/query", Some(&token), &json!({"text": text}))?;
    let items: Vec<ResultItem> = serde_json::from_value(reply["results"].clone())
        .map_err(|e| CliError::transport(format!("malformed results: {e}")))?;
    match format {
        Format::Machine => {
            for item in &items {
                println!("{}", serde_json::to_string(item).expect("result serializes"));
            }
        }
        Format::Table => {
            let terms: Vec<&str> = reply["terms"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
            println!("terms: {}", terms.join(", "));
            print!("{}", results_table(&items));
        }
    }
    Ok(())
}

pub fn results_table(items: &[ResultItem]) -> String {
    let mut out = format!(
        "{:>4} {:>7} {:>2} {:<28} {:<26} {:<24} {}\n",
        "RANK", "SCORE", "A", "RECORD", "DISEASE", "SOURCE", "DRUGS"
    );
    for (i, it) in items.iter().enumerate() {
        out.push_str(&format!(
            "{:>4} {:>7.3} {:>2} {:<28} {:<26} {:<24} {}\n",
            i + 1,
            it.score,
            it.assurance_level,
            it.record.record_id,
            it.record.disease,
            it.source_location,
            it.record.drugs.join(",")
        ));
    }
    out
}

fn cmd_profile(cfg: &CliConfig, token: Option<String>, assignments: &[String], format: Format) -> Result<(), CliError> {
    let token = require_token(token)?;
    let fields: Vec<(String, String)> = assignments
        .iter()
        .map(|a| {
            a.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.to_string()))
                .ok_or_else(|| CliError::invalid(format!("`{a}` is not a field=value assignment")))
        })
        .collect::<Result<_, _>>()?;
    let reply = client::Client::new(&cfg.bind_address).post("/api/profile", Some(&token), &json!({"fields": fields}))?;
    match format {
        Format::Machine => println!("{reply}"),
        Format::Table => println!("profile updated for {}", reply["user_id"].as_str().unwrap_or("?")),
    }
    Ok(())
}

fn cmd_bench(
    cfg: &CliConfig,
    only: Option<TopologyKind>,
    query: &str,
    all_categories: bool,
    calibrate: bool,
    format: Format,
) -> Result<(), CliError> {
    let (corpus, dict) = load_inputs(cfg)?;
    let annotated = annotate(query, &dict, None).map_err(|e| CliError::from(medagent::topology::SearchError::from(e)))?;
    let request = OutboundRequest {
        search_id: format!("bench-{}", cfg.seed),
        record_key: None,
        terms: annotated.search_terms(),
        categories: if all_categories {
            Category::ALL.into_iter().collect()
        } else {
            annotated.target_categories.clone()
        },
        required_assurance: cfg.required_assurance.level(),
    };
    let mut bench = cfg.benchmark();
    if calibrate {
        let inputs = ModelInputs::for_request(&corpus, &request);
        bench.kappa = calibrate_kappa(&bench, &inputs, REFERENCE_RATIO)
            .ok_or_else(|| CliError::config("no kappa >= 0 reaches the reference ratio for this corpus and query"))?;
        if format == Format::Table {
            println!("calibrated kappa = {:.6}", bench.kappa);
        }
    }
    let kinds: Vec<TopologyKind> = only.map_or(TopologyKind::ALL.to_vec(), |k| vec![k]);
    let transport: Arc<dyn Transport> = Arc::new(InProcessTransport::new(SiteService::new(corpus.clone())));
    let mut reports = Vec::new();
    for kind in kinds {
        reports.push(
            run_benchmark(kind, &bench, &corpus, transport.clone(), &request)
                .map_err(|e| CliError::transport(e.to_string()))?,
        );
    }
    match format {
        Format::Machine => {
            for r in &reports {
                println!("{}", r.to_machine());
            }
        }
        Format::Table => {
            print!("{}", reports_table(&reports));
            if let [s, m] = reports.as_slice() {
                println!("measured mobile/static ratio: {:.4}", m.median_ms() / s.median_ms());
            }
        }
    }
    Ok(())
}

const EVAL_USER: &str = "eval-runner-7f3a";

fn cmd_eval(cfg: &CliConfig, suite: &Path, judgments: &Path, format: Format) -> Result<(), CliError> {
    let (corpus, dict) = load_inputs(cfg)?;
    let suite = parse_suite(&read_file(suite)?)?;
    let judgments = parse_judgments(&read_file(judgments)?)?;
    judgments.validate(&suite, &corpus)?;
    let system = build_system(cfg, &corpus, dict, ProfileStore::in_memory())?;
    let localhost = std::net::IpAddr::from([127, 0, 0, 1]);
    system.sessions.register_user(EVAL_USER, localhost);
    let session = system.sessions.login(&Credential {
        user_id: EVAL_USER.into(),
        source_ip: localhost,
    })?;
    let run = run_suite(&suite, &judgments, &system, &session.token)?;
    match format {
        Format::Machine => print!("{}", run.report.to_document()),
        Format::Table => print!("{}", run.report.to_table()),
    }
    Ok(())
}

fn cmd_gen_suite(cfg: &CliConfig, suite_out: &Path, judgments_out: &Path, oracle: bool) -> Result<(), CliError> {
    let (corpus, dict) = load_inputs(cfg)?;
    let (suite, judgments) = generate_suite(cfg.seed, &corpus);
    let judgments = if oracle {
        oracle_judgments(&suite, &corpus, &dict, None, cfg.required_assurance)
    } else {
        judgments
    };
    write_file(suite_out, &suite_to_tsv(&suite))?;
    write_file(judgments_out, &judgments_to_tsv(&judgments))?;
    println!("wrote {} queries", suite.len());
    Ok(())
}
