use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qlz::applications as app;
use qlz::compressed_index::CompressedIndex;
use qlz::encodings::{to_lz77, to_rl_bwt};
use qlz::generators;
use qlz::hardness::{gen_promise_instances, verify_lemma, LemmaKind, ReductionOracle, ThresholdInstance};
use qlz::lz_end_tau::{factorize, factorize_adaptive, halving_recover, FactorizeConfig, Strategy};
use qlz::quantum_sim::{NoiseConfig, Symbol, TextOracle, SENTINEL};
use qlz::reference_kit::symbols_from_bytes;
use qlz::scaling::{loglog_slope, mean_by_n, run_cell, ScalingRow};
use qlz::Error;

#[derive(Parser)]
#[command(name = "qlz", version, about = "Query-counted LZ factorization and compressed indexing")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factorize a text and report z, z_end_tau, r and the query count.
    Compress(CompressArgs),
    /// Build a compressed suffix-array index and write it to a file.
    Index(IndexArgs),
    /// Answer index and application queries as TSV.
    Query(QueryArgs),
    /// Query counts over a size ladder with fitted log-log slopes.
    Scaling(ScalingArgs),
    /// Check the threshold-instance bounds or run the promise family.
    Hardness(HardnessArgs),
    /// Recover a short binary text with the candidate-halving search.
    Halving(HalvingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    /// Bytes, mapped to symbols b + 1.
    Raw,
    /// One unsigned integer per line.
    Ints,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Tsv,
}

impl Format {
    fn sep(self) -> &'static str {
        match self {
            Format::Csv => ",",
            Format::Tsv => "\t",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Exact,
    Bernoulli,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Input file.
    #[arg(long, group = "source")]
    input: Option<PathBuf>,
    /// Literal input text.
    #[arg(long, group = "source")]
    text: Option<String>,
    /// Generator family (fibonacci, thue-morse, period-doubling, random-binary, random-dna, repetitive).
    #[arg(long, group = "source")]
    gen: Option<String>,
    /// Generated length.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, value_enum, default_value = "raw")]
    input_format: InputFormat,
    /// Append the sentinel.
    #[arg(long)]
    sentinel: bool,
}

#[derive(Args, Clone)]
struct NoiseArgs {
    #[arg(long, value_enum, default_value = "exact")]
    noise: Noise,
    /// Failure probability of a bernoulli subroutine call.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of runs, with noise seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    reps: u64,
}

impl NoiseArgs {
    fn config(&self, seed: u64) -> Result<NoiseConfig, Fail> {
        Ok(match self.noise {
            Noise::Exact => NoiseConfig::exact(),
            Noise::Bernoulli => NoiseConfig::bernoulli(self.p, seed)?,
        })
    }
}

#[derive(Args)]
struct CompressArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Fixed tau; the default is the adaptive doubling search.
    #[arg(long, conflicts_with = "adaptive")]
    tau: Option<usize>,
    #[arg(long)]
    adaptive: bool,
    /// Window search: linear, sqrt-tau-ell or tau-plus-sqrt-ell.
    #[arg(long, default_value = "tau-plus-sqrt-ell")]
    strategy: String,
    /// Directory for factors.txt, lz77.txt and rlbwt.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the subroutine trace of the first run here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Add a wall_ms column (makes output non-deterministic).
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Sampling distance (power of two); defaults to the size-derived value.
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryKind {
    Sa,
    Isa,
    Lce,
    Count,
    Locate,
    Lcs,
    Mum,
    Lyndon,
    Qgram,
    Repeat,
    Sus,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(value_enum)]
    kind: QueryKind,
    /// Positions, a pattern, q, or two files for lcs and mum.
    args: Vec<String>,
    /// Serialized index.
    #[arg(long, conflicts_with_all = ["input", "text", "gen"])]
    index: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    /// Comma-separated generator families.
    #[arg(long, default_value = "fibonacci", value_delimiter = ',')]
    family: Vec<String>,
    /// Comma-separated lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Also build the index and report its SA-query count.
    #[arg(long)]
    index: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct HardnessArgs {
    #[arg(long)]
    n: usize,
    /// Probability that f(i) = 1 in random instances.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Explicit comma-separated set S instead of random instances.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    set: Option<Vec<usize>>,
    /// z-bound, r-bound, reduction-exact or all.
    #[arg(long, default_value = "all")]
    lemma: String,
    /// Run the single-one promise family instead.
    #[arg(long)]
    promise: bool,
    /// Write the first instance as one integer per line.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Which text to dump.
    #[arg(long, value_enum, default_value = "reduction")]
    dump_text: DumpText,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpText {
    Binary,
    Reduction,
}

#[derive(Args)]
struct HalvingArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    z_max: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum Fail {
    Usage(String),
    Data(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Data(e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Data(e.to_string())
    }
}

type Res<T> = Result<T, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Fail::Usage(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Ok(Err(Fail::Data(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(3),
    }
}

fn run(cli: Cli) -> Res<()> {
    match cli.cmd {
        Cmd::Compress(a) => compress(a),
        Cmd::Index(a) => index(a),
        Cmd::Query(a) => query(a),
        Cmd::Scaling(a) => scaling(a),
        Cmd::Hardness(a) => hardness(a),
        Cmd::Halving(a) => halving(a),
    }
}

/// Collects output lines and writes them to `--out` or stdout.
struct Table {
    sep: &'static str,
    body: String,
}

impl Table {
    fn new(format: Format) -> Self {
        Table { sep: format.sep(), body: String::new() }
    }

    fn row<I: IntoIterator<Item = D>, D: Display>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().map(|f| f.to_string()).collect();
        self.body.push_str(&line.join(self.sep));
        self.body.push('\n');
    }

    fn blank(&mut self) {
        self.body.push('\n');
    }

    fn emit(&self, out: Option<&Path>) -> Res<()> {
        match out {
            Some(p) => fs::write(p, &self.body)?,
            None => std::io::stdout().lock().write_all(self.body.as_bytes())?,
        }
        Ok(())
    }
}

fn parse_ints(s: &str) -> Res<Vec<Symbol>> {
    s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse().map_err(|_| Fail::Data(format!("not an integer: {l:?}"))))
        .collect()
}

fn read_symbols(path: &Path, format: InputFormat) -> Res<Vec<Symbol>> {
    let bytes = fs::read(path).map_err(|e| Fail::Data(format!("{}: {e}", path.display())))?;
    match format {
        InputFormat::Raw => Ok(symbols_from_bytes(&bytes)),
        InputFormat::Ints => parse_ints(&String::from_utf8_lossy(&bytes)),
    }
}

impl InputArgs {
    fn has_source(&self) -> bool {
        self.input.is_some() || self.text.is_some() || self.gen.is_some()
    }

    /// Generated texts are shifted by one so that 0 stays free for the sentinel.
    fn load(&self, seed: u64) -> Res<Vec<Symbol>> {
        let mut t = if let Some(p) = &self.input {
            read_symbols(p, self.input_format)?
        } else if let Some(s) = &self.text {
            symbols_from_bytes(s.as_bytes())
        } else if let Some(g) = &self.gen {
            generators::by_name(g, self.n, seed)?.into_iter().map(|c| c + 1).collect()
        } else {
            return Err(Fail::Usage("one of --input, --text or --gen is required".into()));
        };
        if self.sentinel {
            if t.contains(&SENTINEL) {
                return Err(Fail::Data("symbol 0 is reserved for the sentinel".into()));
            }
            t.push(SENTINEL);
        }
        if t.is_empty() {
            return Err(Fail::Data("empty text".into()));
        }
        Ok(t)
    }
}

fn oracle_for(t: Vec<Symbol>) -> Res<TextOracle> {
    let terminated = t.last() == Some(&SENTINEL) && t.iter().filter(|&&c| c == SENTINEL).count() == 1;
    Ok(if terminated { TextOracle::terminated(t)? } else { TextOracle::new(t)? })
}

fn compress(a: CompressArgs) -> Res<()> {
    let strategy = Strategy::parse(&a.strategy).map_err(|e| Fail::Usage(e.to_string()))?;
    if a.noise.reps == 0 {
        return Err(Fail::Usage("--reps must be positive".into()));
    }
    let text = a.input.load(a.noise.seed)?;
    let mut table = Table::new(a.format);
    let mut header = vec!["n", "z", "z_end_tau", "r", "tau", "queries", "seed"];
    if a.timing {
        header.push("wall_ms");
    }
    table.row(header);
    for k in 0..a.noise.reps {
        let seed = a.noise.seed + k;
        let mut o = oracle_for(text.clone())?;
        o.set_noise(a.noise.config(seed)?);
        if k == 0 && a.trace.is_some() {
            o.enable_trace();
        }
        let start = Instant::now();
        let (f, tau) = match a.tau {
            Some(tau) => (factorize(&mut o, &FactorizeConfig::new(tau).with_strategy(strategy))?.into_factorization(), tau),
            None => {
                let rep = factorize_adaptive(&mut o, strategy)?;
                let tau = rep.rounds.last().map_or(1, |r| r.tau);
                (rep.factorization, tau)
            }
        };
        let wall = start.elapsed();
        let lz77 = to_lz77(&f)?;
        let rl = if o.is_sentinel_terminated() { Some(to_rl_bwt(&f)?) } else { None };
        let mut row = vec![
            text.len().to_string(),
            lz77.len().to_string(),
            f.len().to_string(),
            rl.as_ref().map_or(String::new(), |r| r.r().to_string()),
            tau.to_string(),
            o.ledger().total().to_string(),
            seed.to_string(),
        ];
        if a.timing {
            row.push(format!("{:.3}", wall.as_secs_f64() * 1e3));
        }
        table.row(row);
        if k == 0 {
            if let Some(dir) = &a.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("factors.txt"), f.to_text())?;
                fs::write(dir.join("lz77.txt"), lz77.to_text())?;
                if let Some(rl) = &rl {
                    fs::write(dir.join("rlbwt.txt"), rl.to_text())?;
                }
            }
            if let Some(p) = &a.trace {
                let lines: String = o.take_trace().iter().map(|r| format!("{r}\n")).collect();
                fs::write(p, lines)?;
            }
        }
    }
    table.emit(None)
}

/// Factorizes the text on the oracle, converts to the RLBWT and builds the index.
fn build_index(mut text: Vec<Symbol>, tau: Option<usize>) -> Res<(CompressedIndex, u64)> {
    if text.last() != Some(&SENTINEL) {
        text.push(SENTINEL);
    }
    let mut o = TextOracle::terminated(text)?;
    let rep = factorize_adaptive(&mut o, Strategy::default())?;
    let rl = to_rl_bwt(&rep.factorization)?;
    let idx = match tau {
        Some(t) => CompressedIndex::build_with_tau(rl, t)?,
        None => CompressedIndex::build(rl)?,
    };
    Ok((idx, o.ledger().total()))
}

fn index(a: IndexArgs) -> Res<()> {
    let text = a.input.load(1)?;
    let (idx, queries) = build_index(text, a.tau)?;
    fs::write(&a.out, idx.to_bytes())?;
    let mut table = Table::new(a.format);
    table.row(["n", "r", "tau", "levels", "build_sa_queries", "queries"]);
    table.row([
        idx.shortcut.n() as u64,
        idx.shortcut.r() as u64,
        idx.shortcut.tau() as u64,
        idx.gagie.levels() as u64,
        idx.gagie.build_sa_queries(),
        queries,
    ]);
    table.emit(None)
}

fn arg_usize(args: &[String], i: usize, name: &str) -> Res<usize> {
    args.get(i)
        .ok_or_else(|| Fail::Usage(format!("missing argument <{name}>")))?
        .parse()
        .map_err(|_| Fail::Usage(format!("<{name}> must be a non-negative integer")))
}

fn pattern(args: &[String], format: InputFormat) -> Res<Vec<Symbol>> {
    let p = args.first().ok_or_else(|| Fail::Usage("missing argument <pattern>".into()))?;
    match format {
        InputFormat::Raw => Ok(symbols_from_bytes(p.as_bytes())),
        InputFormat::Ints => parse_ints(&p.replace(',', "\n")),
    }
}

fn query(a: QueryArgs) -> Res<()> {
    let mut table = Table::new(Format::Tsv);
    let args = &a.args;
    let load_index = || -> Res<CompressedIndex> {
        match &a.index {
            Some(p) => Ok(CompressedIndex::from_bytes(&fs::read(p)?)?),
            None => Ok(build_index(a.input.load(1)?, None)?.0),
        }
    };
    let load_text = || -> Res<TextOracle> {
        match &a.index {
            Some(p) => {
                let mut t = CompressedIndex::from_bytes(&fs::read(p)?)?.shortcut.rlbwt().invert();
                t.pop();
                oracle_for(t)
            }
            None => oracle_for(a.input.load(1)?),
        }
    };
    let pair = || -> Res<(TextOracle, TextOracle)> {
        if args.len() != 2 {
            return Err(Fail::Usage("expected two input files".into()));
        }
        let f = a.input.input_format;
        Ok((oracle_for(read_symbols(Path::new(&args[0]), f)?)?, oracle_for(read_symbols(Path::new(&args[1]), f)?)?))
    };
    if !matches!(a.kind, QueryKind::Lcs | QueryKind::Mum) && a.index.is_none() && !a.input.has_source() {
        return Err(Fail::Usage("one of --index, --input, --text or --gen is required".into()));
    }
    match a.kind {
        QueryKind::Sa => table.row([load_index()?.gagie.sa(arg_usize(args, 0, "i")?)?]),
        QueryKind::Isa => table.row([load_index()?.shortcut.isa_query(arg_usize(args, 0, "p")?)?]),
        QueryKind::Lce => {
            let idx = load_index()?;
            let (x, y) = (arg_usize(args, 0, "a")?, arg_usize(args, 1, "b")?);
            let n = idx.shortcut.n();
            if x == 0 || y == 0 || x > n || y > n {
                return Err(Fail::Data(format!("positions must lie in 1..={n}")));
            }
            table.row([idx.shortcut.lce(x, y)]);
        }
        QueryKind::Count => table.row([load_index()?.count_and_locate(&pattern(args, a.input.input_format)?).0]),
        QueryKind::Locate => {
            for p in load_index()?.count_and_locate(&pattern(args, a.input.input_format)?).1 {
                table.row([p]);
            }
        }
        QueryKind::Lcs => {
            let (mut o1, mut o2) = pair()?;
            let m = app::longest_common_substring(&mut o1, &mut o2)?;
            table.row([m.len, m.pos1, m.pos2]);
        }
        QueryKind::Mum => {
            let (mut o1, mut o2) = pair()?;
            for m in app::maximal_unique_matches(&mut o1, &mut o2)? {
                table.row([m.len, m.pos1, m.pos2]);
            }
        }
        QueryKind::Lyndon => {
            let mut o = load_text()?;
            let rep = app::lyndon_factorization(&mut o)?;
            let end = o.len() + 1 - o.is_sentinel_terminated() as usize;
            for (k, &s) in rep.starts.iter().enumerate() {
                table.row([s, rep.starts.get(k + 1).copied().unwrap_or(end) - s]);
            }
        }
        QueryKind::Qgram => {
            let q = arg_usize(args, 0, "q")?;
            for g in app::qgram_frequencies(&mut load_text()?, q)? {
                table.row([g.pos, q, g.count]);
            }
        }
        QueryKind::Repeat => {
            let m = app::longest_repeating_substring(&mut load_text()?)?;
            table.row([m.len, m.pos1, m.pos2]);
        }
        QueryKind::Sus => {
            let (len, pos) = app::shortest_unique_substring(&mut load_text()?)?;
            table.row([len, pos]);
        }
    }
    table.emit(a.out.as_deref())
}

fn scaling(a: ScalingArgs) -> Res<()> {
    if a.noise.reps == 0 || a.sizes.is_empty() {
        return Err(Fail::Usage("need at least one size and one repetition".into()));
    }
    let mut table = Table::new(a.format);
    let mut header = vec!["family", "n", "seed", "z_end_tau", "queries"];
    if a.index {
        header.push("index_sa_queries");
    }
    table.row(header);
    let mut fits = Vec::new();
    for fam in &a.family {
        let mut rows: Vec<ScalingRow> = Vec::new();
        for &n in &a.sizes {
            for k in 0..a.noise.reps {
                let seed = a.noise.seed + k;
                let row = run_cell(fam, n, seed, &a.noise.config(seed)?, a.index)?;
                let mut fields = vec![row.family.clone(), n.to_string(), seed.to_string(), row.z.to_string(), row.queries.to_string()];
                if let Some(q) = row.index_sa_queries {
                    fields.push(q.to_string());
                }
                table.row(fields);
                rows.push(row);
            }
        }
        let q = loglog_slope(&mean_by_n(&rows, |r| Some(r.queries)));
        let iq = loglog_slope(&mean_by_n(&rows, |r| r.index_sa_queries));
        if let Some(q) = q {
            fits.push((fam.clone(), q, iq));
        }
    }
    if !fits.is_empty() {
        table.blank();
        let mut header = vec!["family", "slope_queries"];
        if a.index {
            header.push("slope_index_sa_queries");
        }
        table.row(header);
        for (fam, q, iq) in fits {
            let mut fields = vec![fam, format!("{q:.4}")];
            if a.index {
                fields.push(iq.map_or(String::new(), |s| format!("{s:.4}")));
            }
            table.row(fields);
        }
    }
    table.emit(a.out.as_deref())
}

fn hardness(a: HardnessArgs) -> Res<()> {
    let mut table = Table::new(a.format);
    if a.promise {
        table.row(["instance", "found", "queries"]);
        for (k, mut o) in gen_promise_instances(a.n)?.into_iter().enumerate() {
            o.set_noise(a.noise.config(a.noise.seed + k as u64)?);
            let hit = o.grover_any(1, a.n, |i, v| v.get(i) == 1, 1)?;
            table.row([k.to_string(), hit.map_or("none".to_string(), |i| i.to_string()), o.ledger().total().to_string()]);
        }
        return table.emit(a.out.as_deref());
    }
    let kinds: Vec<LemmaKind> = if a.lemma == "all" {
        LemmaKind::ALL.to_vec()
    } else {
        vec![LemmaKind::parse(&a.lemma).map_err(|e| Fail::Usage(e.to_string()))?]
    };
    let instances: Vec<(u64, ThresholdInstance)> = match &a.set {
        Some(s) => vec![(a.noise.seed, ThresholdInstance::with_set(a.n, s, 1)?)],
        None => (0..a.noise.reps)
            .map(|k| (a.noise.seed + k, ThresholdInstance::random(a.n, a.density, a.noise.seed + k)))
            .collect(),
    };
    if let (Some(path), Some((_, inst))) = (&a.dump, instances.first()) {
        let t = match a.dump_text {
            DumpText::Binary => qlz::hardness::gen_binary_string(inst),
            DumpText::Reduction => ReductionOracle::new(inst)?.materialize(),
        };
        fs::write(path, t.iter().map(|c| format!("{c}\n")).collect::<String>())?;
    }
    table.row(["n", "seed", "weight", "lemma", "measure", "bound", "holds"]);
    for (seed, inst) in &instances {
        for &kind in &kinds {
            let r = verify_lemma(kind, inst)?;
            table.row([
                r.n.to_string(),
                seed.to_string(),
                r.weight.to_string(),
                kind.name().to_string(),
                r.measure.to_string(),
                r.bound.to_string(),
                r.holds.to_string(),
            ]);
        }
    }
    table.emit(a.out.as_deref())
}

/// Maps the text onto {0, 1}: raw '0'/'1' bytes directly, otherwise the
/// smaller of at most two distinct symbols becomes 0.
fn binary_text(a: &InputArgs, seed: u64) -> Res<Vec<Symbol>> {
    let t = a.load(seed)?;
    let bits = |lo: Symbol, hi: Symbol| -> Res<Vec<Symbol>> {
        t.iter()
            .map(|&c| match c {
                c if c == lo => Ok(0),
                c if c == hi => Ok(1),
                _ => Err(Fail::Data("halving needs a binary text".into())),
            })
            .collect()
    };
    if matches!(a.input_format, InputFormat::Raw) && a.gen.is_none() {
        return bits(b'0' as Symbol + 1, b'1' as Symbol + 1);
    }
    let mut d = t.clone();
    d.sort_unstable();
    d.dedup();
    match d[..] {
        [x] => bits(x, x + 1),
        [x, y] => bits(x, y),
        _ => Err(Fail::Data("halving needs a binary text".into())),
    }
}

fn halving(a: HalvingArgs) -> Res<()> {
    let text = binary_text(&a.input, a.noise.seed)?;
    let mut table = Table::new(a.format);
    table.row(["n", "z_max", "recovered", "queries", "mismatch_rounds", "initial_candidates", "seed"]);
    for k in 0..a.noise.reps {
        let seed = a.noise.seed + k;
        let mut o = TextOracle::new(text.clone())?;
        o.set_noise(a.noise.config(seed)?);
        let rep = halving_recover(&mut o, a.z_max)?;
        table.row([
            text.len().to_string(),
            a.z_max.to_string(),
            (rep.text == text).to_string(),
            rep.queries.to_string(),
            rep.mismatch_rounds.len().to_string(),
            rep.initial_candidates.to_string(),
            seed.to_string(),
        ]);
    }
    table.emit(a.out.as_deref())
}
