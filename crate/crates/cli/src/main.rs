//! `tristream`: estimate triangle counts of edge streams from the command line.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use tristream::baselines::{doulion_estimate, DoulionError};
use tristream::estimator::DEFAULT_ALPHA_MIN;
use tristream::generate;
use tristream::indep_paths::{verify_lower_bounds, IndepError};
use tristream::oracles::graph_stats;
use tristream::stream::{materialize, normalize_event, parse_stream, write_stream, RawEvent};
use tristream::{derive_config, run, AdjacencyGraph, EdgeEvent, EstimatorError, EstimatorParams, StreamConfig};

#[derive(Parser)]
#[command(name = "tristream", version, about = "Triangle and transitivity estimation over dynamic graph streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate triangles, 2-paths and transitivity of a stream.
    Estimate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        params: EstimateFlags,
    },
    /// Exact counts of the final graph of a stream.
    Exact {
        #[command(flatten)]
        input: Input,
    },
    /// Generate a synthetic stream: FAMILY followed by its size parameters.
    Gen {
        #[arg(value_enum)]
        family: Family,
        /// complete/path: n; star: leaves; bipartite-complete: a b;
        /// gnp: n p; planted-triangles: n triangles background_p
        #[arg(required = true, num_args = 1..)]
        sizes: Vec<String>,
        /// Insert and later delete this many decoys per final edge.
        #[arg(long, default_value_t = 0.0)]
        delete_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the independent 2-path lower bounds on a graph or a random sweep.
    VerifyLemmas {
        #[command(flatten)]
        input: Input,
        /// Check this many random connected graphs instead of reading a stream.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Doulion baseline: edge sampling plus exact counting.
    Doulion {
        #[command(flatten)]
        input: Input,
        /// Edge retention probability.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
}

#[derive(Args)]
struct Input {
    /// Stream file, or `-` for stdin.
    #[arg(default_value = "-")]
    path: PathBuf,
    /// Vertex universe size; defaults to the largest id in the stream.
    #[arg(long)]
    n: Option<u32>,
    /// Maximum live edges; defaults to the peak of the stream.
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct EstimateFlags {
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA_MIN)]
    alpha_min: f64,
    #[arg(long)]
    k_override: Option<usize>,
    #[arg(long)]
    s_override: Option<usize>,
    #[arg(long)]
    colors_override: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Human,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Complete,
    Path,
    Star,
    BipartiteComplete,
    Gnp,
    PlantedTriangles,
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    line: Option<usize>,
}

impl Failure {
    fn input(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind,
            message: message.into(),
            line: None,
        }
    }

    fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

struct LoadedStream {
    events: Vec<EdgeEvent>,
    graph: AdjacencyGraph,
    n: u32,
    m_max: usize,
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    let io_err = |e: io::Error| Failure::input("io", format!("{}: {e}", path.display()));
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io_err)
    }
}

fn load(input: &Input) -> Result<LoadedStream, Failure> {
    let text = read_input(&input.path)?;
    let raw: Vec<RawEvent> =
        parse_stream(&text).map_err(|e| Failure::input("parse", e.message.clone()).at_line(e.line))?;
    if raw.is_empty() {
        return Err(Failure::input("empty_stream", "empty stream"));
    }
    let n = match input.n {
        Some(n) => n,
        None => {
            let max_id = raw.iter().map(|r| r.u.max(r.v)).max().unwrap_or(0);
            u32::try_from(max_id.max(2)).map_err(|_| Failure::input("parse", format!("vertex id {max_id} too large")))?
        }
    };
    let events = raw
        .iter()
        .map(|r| normalize_event(n, r.u, r.v, r.sign).map_err(|e| Failure::input("stream", e.to_string()).at_line(r.line)))
        .collect::<Result<Vec<_>, _>>()?;
    let cap = input.m_max.unwrap_or(usize::MAX);
    let cfg = StreamConfig::new(n, cap).map_err(|e| Failure::input("invalid_argument", e.to_string()))?;
    let graph = materialize(&events, cfg)
        .map_err(|e| Failure::input("turnstile", e.source.to_string()).at_line(raw[e.index].line))?;
    let m_max = input
        .m_max
        .unwrap_or_else(|| generate::peak_live_edges(&events).max(1));
    Ok(LoadedStream {
        events,
        graph,
        n,
        m_max,
    })
}

fn envelope(command: &str, seed: u64, config: Value, body: impl Serialize) -> Result<Value, Failure> {
    let mut out = Map::new();
    out.insert("command".into(), json!(command));
    out.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    out.insert("seed".into(), json!(seed));
    out.insert("config".into(), config);
    match serde_json::to_value(body).map_err(internal)? {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("result".into(), other);
        }
    }
    Ok(Value::Object(out))
}

fn internal(e: impl ToString) -> Failure {
    Failure {
        code: 4,
        kind: "internal",
        message: e.to_string(),
        line: None,
    }
}

fn estimate(input: &Input, flags: &EstimateFlags) -> Result<Value, Failure> {
    let params = |n: u32, m_max: usize| {
        let mut p = EstimatorParams::new(flags.epsilon, flags.delta, n, m_max, input.seed).alpha_min(flags.alpha_min);
        p.k_override = flags.k_override;
        p.s_override = flags.s_override;
        p.colors_override = flags.colors_override;
        p
    };
    let invalid = |e: EstimatorError| Failure::input("invalid_argument", e.to_string());
    // validate flags before touching the stream
    derive_config(&params(input.n.unwrap_or(2), input.m_max.unwrap_or(1))).map_err(invalid)?;

    let stream = load(input)?;
    let cfg = derive_config(&params(stream.n, stream.m_max)).map_err(invalid)?;
    let report = run(&stream.events, &cfg).map_err(|e| match e {
        EstimatorError::NoQualifiedCopies { .. } => Failure {
            code: 3,
            kind: "no_qualified_copies",
            message: e.to_string(),
            line: None,
        },
        EstimatorError::InvalidRange(_) => invalid(e),
        EstimatorError::Turnstile { index, ref source } => Failure::input("turnstile", source.to_string()).at_line(index + 1),
        EstimatorError::Sketch(_) => internal(e),
    })?;
    envelope("estimate", input.seed, serde_json::to_value(&cfg).map_err(internal)?, report)
}

fn exact(input: &Input) -> Result<Value, Failure> {
    let stream = load(input)?;
    let config = json!({ "n": stream.n, "m_max": stream.m_max });
    envelope("exact", input.seed, config, graph_stats(&stream.graph))
}

fn size<T: std::str::FromStr>(sizes: &[String], i: usize, what: &str) -> Result<T, Failure> {
    let raw = sizes
        .get(i)
        .ok_or_else(|| Failure::input("invalid_argument", format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| Failure::input("invalid_argument", format!("invalid {what}: {raw:?}")))
}

fn gen(family: Family, sizes: &[String], delete_fraction: f64, seed: u64) -> Result<String, Failure> {
    if !(0.0..1.0).contains(&delete_fraction) {
        return Err(Failure::input(
            "invalid_argument",
            format!("--delete-fraction {delete_fraction} not in [0, 1)"),
        ));
    }
    let bad = |msg: &str| Err(Failure::input("invalid_argument", msg.to_string()));
    let probability = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(Failure::input("invalid_argument", format!("probability {p} not in [0, 1]")))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, expected) = match family {
        Family::Complete | Family::Path => {
            let n: u32 = size(sizes, 0, "n")?;
            if n < 2 {
                return bad("n must be at least 2");
            }
            let g = if matches!(family, Family::Complete) {
                generate::complete(n)
            } else {
                generate::path(n)
            };
            (g, 1)
        }
        Family::Star => {
            let k: u32 = size(sizes, 0, "number of leaves")?;
            if k < 1 {
                return bad("a star needs at least one leaf");
            }
            (generate::star(k), 1)
        }
        Family::BipartiteComplete => {
            let a: u32 = size(sizes, 0, "left side size")?;
            let b: u32 = size(sizes, 1, "right side size")?;
            if a < 1 || b < 1 {
                return bad("both sides need at least one vertex");
            }
            (generate::complete_bipartite(a, b), 2)
        }
        Family::Gnp => {
            let n: u32 = size(sizes, 0, "n")?;
            let p = probability(size(sizes, 1, "p")?)?;
            if n < 2 {
                return bad("n must be at least 2");
            }
            (generate::gnp(n, p, &mut rng), 2)
        }
        Family::PlantedTriangles => {
            let n: u32 = size(sizes, 0, "n")?;
            let t: u32 = size(sizes, 1, "number of triangles")?;
            let p = probability(size(sizes, 2, "background p")?)?;
            if n < 3 {
                return bad("n must be at least 3");
            }
            (generate::planted_triangles(n, t, p, &mut rng), 3)
        }
    };
    if sizes.len() > expected {
        return bad(&format!("unexpected extra parameter {:?}", sizes[expected]));
    }
    let events = if delete_fraction > 0.0 {
        generate::churn_stream(&g, delete_fraction, &mut rng)
    } else {
        g.insert_stream()
    };
    let family_name = family.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut out = format!(
        "# tristream gen {family_name} {} --delete-fraction {delete_fraction} --seed {seed}\n# n = {}, final edges = {}\n",
        sizes.join(" "),
        g.n(),
        g.m_live()
    );
    out.push_str(&write_stream(&events));
    Ok(out)
}

fn lemma_error(e: IndepError) -> Failure {
    Failure::input("precondition", e.to_string())
}

fn verify_lemmas(input: &Input, sweep: Option<usize>) -> Result<Value, Failure> {
    let Some(count) = sweep else {
        let stream = load(input)?;
        let report = verify_lower_bounds(&stream.graph).map_err(lemma_error)?;
        let config = json!({ "n": stream.n, "m_max": stream.m_max });
        return envelope("verify-lemmas", input.seed, config, report);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
    let mut violations = 0usize;
    let mut counterexamples = Vec::new();
    let (mut general, mut half_vertices, mut bipartite) = (0usize, 0usize, 0usize);
    for _ in 0..count {
        let n = rng.gen_range(3..=40);
        let extra = rng.gen_range(0.0..0.3);
        let g = generate::random_connected(n, extra, &mut rng);
        let report = verify_lower_bounds(&g).map_err(lemma_error)?;
        general += !report.bound_general_satisfied as usize;
        half_vertices += !report.bound_l3_satisfied as usize;
        bipartite += (report.bound_l4_satisfied == Some(false)) as usize;
        if !report.violations.is_empty() {
            violations += 1;
            if counterexamples.len() < 10 {
                let edges: Vec<(u32, u32)> = g.edges().map(|(a, b)| (a.get(), b.get())).collect();
                counterexamples.push(json!({ "report": report, "edges": edges }));
            }
        }
    }
    let body = json!({
        "graphs": count,
        "violations": violations,
        "general_violations": general,
        "bound_L3_violations": half_vertices,
        "bound_L4_violations": bipartite,
        "counterexamples": counterexamples,
    });
    envelope("verify-lemmas", input.seed, json!({ "sweep": count, "max_n": 40 }), body)
}

fn doulion(input: &Input, p: f64, trials: usize) -> Result<Value, Failure> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Failure::input("invalid_argument", format!("--p {p} not in (0, 1]")));
    }
    if trials == 0 {
        return Err(Failure::input("invalid_argument", "--trials must be at least 1"));
    }
    let stream = load(input)?;
    let estimates = (0..trials as u64)
        .map(|t| doulion_estimate(&stream.events, stream.n, p, input.seed.wrapping_add(t)))
        .collect::<Result<Vec<f64>, DoulionError>>()
        .map_err(internal)?;
    let mean = estimates.iter().sum::<f64>() / trials as f64;
    let std = if trials > 1 {
        (estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    let config = json!({ "n": stream.n, "m_max": stream.m_max, "p": p, "trials": trials });
    let body = json!({ "estimate": mean, "mean": mean, "std": std, "trials": trials });
    envelope("doulion", input.seed, config, body)
}

fn human(v: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(fields) = v {
        for (k, v) in fields {
            let shown = match v {
                Value::String(s) => s.clone(),
                Value::Array(items) if items.len() > 8 => format!("[{} entries]", items.len()),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {shown}\n"));
        }
    }
    out
}

fn emit(v: &Value, format: Format) -> io::Result<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n",
        Format::Human => human(v),
    };
    io::stdout().lock().write_all(text.as_bytes())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let (value, format) = match &cli.command {
        Command::Estimate { input, params } => (estimate(input, params)?, input.format),
        Command::Exact { input } => (exact(input)?, input.format),
        Command::VerifyLemmas { input, sweep } => (verify_lemmas(input, *sweep)?, input.format),
        Command::Doulion { input, p, trials } => (doulion(input, *p, *trials)?, input.format),
        Command::Gen {
            family,
            sizes,
            delete_fraction,
            seed,
        } => {
            let text = gen(*family, sizes, *delete_fraction, *seed)?;
            return io::stdout().lock().write_all(text.as_bytes()).map_err(internal);
        }
    };
    emit(&value, format).map_err(internal)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let err = json!({ "error": { "kind": f.kind, "message": f.message, "line": f.line } });
            eprintln!("{err}");
            ExitCode::from(f.code)
        }
    }
}
