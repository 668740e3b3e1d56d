use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kfsm::circlemap::{rotation_interval, BimodalMap, MapFile};
use kfsm::hm::{
    b_k_prefix, b_k_rational, count_kfsm_periodic, discrete_hm, discrete_nu, is_resonant, lambda_cylinder,
    pure_lattice, skewness, small_fraction, HMParams,
};
use kfsm::interp::{default_budget, diagram_csv, diagram_svg, level_diagram, rotation_number, InterpolatedMap};
use kfsm::subshift::{in_order_interval, is_in_omega, is_symbolic_kfsm, sturmian_word, KfsmVerdict, Word, WordSet};
use kfsm::{CirclePoint, Error, Rational};

/// Exact symbolic dynamics of k-fold semi-monotone sets. Output is one JSON
/// object per line.
#[derive(Parser)]
#[command(name = "kfsm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate HM words: a rational cluster, a prefix, a discrete word or a Sturmian word
    Generate(GenerateArgs),
    /// Check words for Omega_k membership, the kfsm property and kappa order
    Verify(VerifyArgs),
    /// Cylinder measure and skewness of the HM measure
    Measure(MeasureArgs),
    /// Count pure parameters and kfsm periodic orbits
    Count(CountArgs),
    /// Rotation number of H_{k,c}, or the rotation interval of a map
    Rotate(RotateArgs),
    /// Boxes of the rotation-number diagram
    Diagram(DiagramArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cluster,
    Prefix,
    Discrete,
    Sturmian,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Rotation number p/q (prefix mode also takes an irrational proxy p/q)
    #[arg(long)]
    omega: Rational,
    /// Comma-separated nu vector; defaults to the Sturmian (1 - omega, ..)
    #[arg(long, value_delimiter = ',')]
    nu: Vec<Rational>,
    #[arg(long, value_enum, default_value = "cluster")]
    mode: Mode,
    /// Base point of the prefix itinerary on S_k
    #[arg(long, default_value = "0")]
    seed_point: Rational,
    /// Prefix length
    #[arg(long, default_value_t = 64)]
    horizon: usize,
    /// Discrete parameter, 0 <= mu <= 2(q - p)
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<i64>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Cover degree; inferred from a piped `generate` object when omitted
    #[arg(long)]
    k: Option<u32>,
    /// Periodic words such as "(0011)"; separate several with spaces. Reads JSON from stdin if absent
    #[arg(long)]
    words: Option<String>,
    #[arg(long)]
    kappa0: Option<String>,
    #[arg(long)]
    kappa1: Option<String>,
}

#[derive(clap::Args)]
struct MeasureArgs {
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    omega: Rational,
    #[arg(long, value_delimiter = ',')]
    nu: Vec<Rational>,
    /// Finite block such as "0123"
    #[arg(long)]
    block: Option<String>,
    /// Resonance search bound for proxy omega
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
}

#[derive(clap::Args)]
struct CountArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    q: u64,
    /// Also list the pure parameters
    #[arg(long)]
    list: bool,
}

#[derive(clap::Args)]
struct RotateArgs {
    /// "model" or a JSON map file
    #[arg(long, default_value = "model")]
    map: String,
    /// Comma-separated flat-spot heights; without it the rotation interval of the map is printed
    #[arg(long, value_delimiter = ',')]
    c: Vec<Rational>,
    /// Iteration budget (default 10 k 100^2)
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(clap::Args)]
struct DiagramArgs {
    #[arg(long, default_value = "model")]
    map: String,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 5)]
    max_den: u64,
    /// Write CSV here instead of JSON lines on stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(lines) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for line in lines {
                let _ = writeln!(out, "{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Vec<Value>, Error> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Verify(a) => verify(a),
        Command::Measure(a) => measure(a),
        Command::Count(a) => count(a),
        Command::Rotate(a) => rotate(a),
        Command::Diagram(a) => diagram(a),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn nu_or_sturmian(k: u32, omega: &Rational, nu: Vec<Rational>) -> Vec<Rational> {
    if nu.is_empty() {
        vec![Rational::one() - omega; k as usize]
    } else {
        nu
    }
}

fn generate(a: GenerateArgs) -> Result<Vec<Value>, Error> {
    match a.mode {
        Mode::Cluster => {
            let (p, q) = small_fraction(&a.omega)?;
            let nu = nu_or_sturmian(a.k, &a.omega, a.nu);
            Ok(vec![to_json(&b_k_rational(a.k, p, q, &nu)?)])
        }
        Mode::Prefix => {
            let nu = nu_or_sturmian(a.k, &a.omega, a.nu);
            let params = HMParams::proxy(a.k, a.omega, nu)?;
            let x = CirclePoint::new(a.seed_point, a.k as u64);
            let word = b_k_prefix(&params, &x, a.horizon)?;
            Ok(vec![json!({ "k": a.k, "seed_point": x.value(), "prefix": word })])
        }
        Mode::Discrete => {
            let (p, q) = small_fraction(&a.omega)?;
            let mu = a.mu.ok_or_else(|| Error::InvalidInput("--mode discrete needs --mu".into()))?;
            let word = discrete_hm(p, q, mu)?;
            let nu = discrete_nu(p, q, mu.max(0) as u64);
            Ok(vec![json!({ "k": 2, "p": p, "q": q, "mu": mu, "nu": nu, "orbits": [word] })])
        }
        Mode::Sturmian => {
            let word = sturmian_word(&a.omega)?;
            Ok(vec![json!({ "k": 1, "omega": a.omega, "orbits": [word] })])
        }
    }
}

/// Words from `--words`, or from JSON on stdin: either `generate` objects
/// (one per line, `orbits` field) or bare arrays of strings.
fn read_words(a: &VerifyArgs) -> Result<(Option<u32>, Vec<String>), Error> {
    if let Some(w) = &a.words {
        return Ok((None, w.split_whitespace().map(str::to_owned).collect()));
    }
    let mut input = String::new();
    io::stdin().read_to_string(&mut input).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut k = None;
    let mut words = Vec::new();
    for value in serde_json::Deserializer::from_str(&input).into_iter::<Value>() {
        let value = value.map_err(|e| Error::Parse(e.to_string()))?;
        let list = match &value {
            Value::Array(_) => &value,
            Value::Object(map) => {
                if let Some(n) = map.get("k").and_then(Value::as_u64) {
                    k = Some(n as u32);
                }
                map.get("orbits").ok_or_else(|| Error::InvalidInput("object without `orbits`".into()))?
            }
            _ => return Err(Error::InvalidInput("expected a JSON object or array".into())),
        };
        for w in list.as_array().into_iter().flatten() {
            let s = w.as_str().ok_or_else(|| Error::InvalidInput(format!("not a word: {w}")))?;
            words.push(s.to_owned());
        }
    }
    Ok((k, words))
}

fn verify(a: VerifyArgs) -> Result<Vec<Value>, Error> {
    let (piped_k, raw) = read_words(&a)?;
    let k = a.k.or(piped_k).ok_or_else(|| Error::InvalidInput("--k is required".into()))?;
    let words = raw.iter().map(|s| Word::parse(s, 2 * k)).collect::<Result<Vec<_>, _>>()?;
    let in_omega: Vec<bool> = words.iter().map(|w| is_in_omega(w, k)).collect();
    let mut out = json!({ "k": k, "words": words, "in_omega": in_omega });
    if in_omega.iter().all(|b| *b) {
        let verdict = is_symbolic_kfsm(&WordSet::new(2 * k, words.clone())?, k)?;
        out["kfsm"] = json!(verdict.is_kfsm());
        if let KfsmVerdict::NotKfsm { .. } = verdict {
            out["witness"] = to_json(&verdict);
        }
    } else {
        out["kfsm"] = json!(false);
    }
    if let (Some(k0), Some(k1)) = (&a.kappa0, &a.kappa1) {
        let (k0, k1) = (Word::parse(k0, 2)?, Word::parse(k1, 2)?);
        let members = words
            .iter()
            .map(|w| in_order_interval(&w.project_base(), &k0, &k1))
            .collect::<Result<Vec<_>, _>>()?;
        out["in_order_interval"] = json!(members);
    }
    Ok(vec![out])
}

fn measure(a: MeasureArgs) -> Result<Vec<Value>, Error> {
    let nu = nu_or_sturmian(a.k, &a.omega, a.nu);
    let params = HMParams::proxy(a.k, a.omega, nu)?;
    let mut out = json!({
        "k": a.k,
        "skewness": skewness(&params),
        "resonance": is_resonant(&params, a.horizon),
    });
    if let Some(block) = &a.block {
        let w = Word::parse(block, 2 * a.k)?;
        if !w.is_finite() {
            return Err(Error::InvalidInput("block must be a finite word".into()));
        }
        out["block"] = json!(w);
        out["lambda"] = to_json(&lambda_cylinder(&params, &w.prefix(w.len().unwrap_or(0))));
    }
    Ok(vec![out])
}

/// A JSON number when it fits in `u64`, else a decimal string.
fn big_json(n: &impl ToString) -> Value {
    let s = n.to_string();
    s.parse::<u64>().map(|v| json!(v)).unwrap_or(json!(s))
}

fn count(a: CountArgs) -> Result<Vec<Value>, Error> {
    if a.k == 0 || a.q < 2 || a.p == 0 || a.p >= a.q || kfsm::exactnum::gcd(a.p, a.q) != 1 {
        return Err(Error::NotAllowable(format!("need k >= 1 and a reduced {}/{} in (0, 1)", a.p, a.q)));
    }
    let (cover, base) = count_kfsm_periodic(a.k, a.p, a.q);
    let mut out = json!({ "cover": big_json(&cover), "base": big_json(&base) });
    if a.list {
        out["lattice"] = to_json(&pure_lattice(a.k, a.p, a.q));
    }
    Ok(vec![out])
}

fn load_map(source: &str) -> Result<BimodalMap, Error> {
    if source == "model" {
        return Ok(BimodalMap::model());
    }
    let text = fs::read_to_string(source).map_err(|e| Error::InvalidMap(format!("{source}: {e}")))?;
    let file: MapFile = serde_json::from_str(&text).map_err(|e| Error::InvalidMap(format!("{source}: {e}")))?;
    BimodalMap::from_file(&file)
}

fn rotate(a: RotateArgs) -> Result<Vec<Value>, Error> {
    let g = load_map(&a.map)?;
    let k = a.c.len().max(1) as u32;
    let budget = a.budget.unwrap_or_else(|| default_budget(k, 100));
    if a.c.is_empty() {
        let (lo, hi) = rotation_interval(&g, budget)?;
        return Ok(vec![json!({ "rotation_interval": [lo, hi] })]);
    }
    let h = InterpolatedMap::new(&g, a.c.clone())?;
    Ok(vec![json!({ "c": a.c, "rotation": rotation_number(&h, budget) })])
}

fn diagram(a: DiagramArgs) -> Result<Vec<Value>, Error> {
    let g = load_map(&a.map)?;
    let rows = level_diagram(&g, a.k, a.max_den)?;
    let write = |path: &PathBuf, text: String| {
        fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    };
    if let Some(svg) = &a.svg {
        write(svg, diagram_svg(&rows, &kfsm::circlemap::flat_range(&g)?))?;
    }
    match &a.out {
        Some(path) => {
            write(path, diagram_csv(&rows, a.k))?;
            Ok(vec![json!({ "rows": rows.len(), "csv": path })])
        }
        None => Ok(rows.iter().map(to_json).collect()),
    }
}
