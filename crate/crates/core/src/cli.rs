//! Command-line front end: argument parsing, commands, and file output.
//!
//! Every command renders its whole output to a string first, so a failing run
//! never leaves a partial file behind; the string is then written through a
//! temporary file in the target directory and renamed into place.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::calculus::SampledFunction;
use crate::coefficients::{resolve_conventions_at, CoefficientTables, ConventionBundle};
use crate::coefficients::convention::default_levels;
use crate::error::{Error, Result};
use crate::orthopoly::{
    check_bounds, gram_matrix, gram_schmidt, green_norm_estimate, legendre, normalized_recursion,
    sample_orthonormal, tables_for,
};
use crate::polyspace::{monomial_to_fbasis, multiharmonic_basis, sample};
use crate::scalar::{to_decimal_string, to_fraction_string, Rational};
use crate::topology::{build_graph, check_b, graph_json, vertex_count, GraphLevel, MAX_B};

pub const MAX_LEVEL: usize = 12;
pub const MAX_VERTICES: u128 = 1_000_000;
pub const MIN_PRECISION: u32 = 16;
pub const DEFAULT_PRECISION: u32 = 50;
pub const PRECISION_ENV: &str = "BDIAMOND_PRECISION";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "bdiamond", version, about = "Polynomials and orthogonal polynomials on bubble-diamond fractals")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Significant decimal digits for irrational or decimal output.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
    /// Output format; `sample` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print sampled values as exact `num/den` strings.
    #[arg(long, global = true)]
    pub exact: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertices, weighted edges, measure weights and layout of G_level.
    Graph {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        level: usize,
    },
    /// Coefficient tables to degree jmax, after resolving conventions against the oracles.
    Coeffs {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        jmax: usize,
        /// Degree probed by the convention harness.
        #[arg(long, default_value_t = 2)]
        probe: usize,
    },
    /// Vertex values of f:j:k, P:j:k or legendre:n on G_level.
    Sample {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        level: usize,
        function: String,
    },
    /// Gram matrix of the first n monomials.
    Gram {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        n: usize,
    },
    /// Orthogonal polynomials p_0..p_{n-1} with recursion data and bound checks.
    Legendre {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        n: usize,
        /// Level of the Green norm estimate.
        #[arg(long, default_value_t = 8)]
        level: usize,
    },
}

/// Validated configuration shared by the commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub b: usize,
    pub level: usize,
    pub jmax: usize,
    pub n: usize,
    pub precision: u32,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub exact: bool,
}

impl RunConfig {
    pub fn new(b: usize, level: usize) -> Self {
        RunConfig {
            b,
            level,
            jmax: 0,
            n: 0,
            precision: DEFAULT_PRECISION,
            format: Format::Json,
            out: None,
            exact: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_b(self.b)?;
        if self.b > MAX_B {
            return Err(Error::InvalidArgument(format!("b must be at most {MAX_B}")));
        }
        if self.precision < MIN_PRECISION {
            return Err(Error::InvalidArgument(format!("precision must be at least {MIN_PRECISION}")));
        }
        Ok(())
    }

    fn validate_level(&self) -> Result<()> {
        let count = vertex_count(self.b, self.level);
        if self.level > MAX_LEVEL || count > MAX_VERTICES {
            return Err(Error::InvalidArgument(format!(
                "G_{} at b={} has {} vertices; refusing above level {} or {} vertices",
                self.level, self.b, count, MAX_LEVEL, MAX_VERTICES
            )));
        }
        Ok(())
    }

    fn metadata(&self, command: &str, convention: Option<&ConventionBundle>) -> Value {
        json!({
            "command": command,
            "b": self.b,
            "level": self.level,
            "jmax": self.jmax,
            "n": self.n,
            "precision": self.precision,
            "exact": self.exact,
            "convention": convention.map(|c| c.to_string()),
            "tool": format!("bdiamond {}", env!("CARGO_PKG_VERSION")),
        })
    }
}

/// Which function `sample` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Multiharmonic { j: usize, k: usize },
    Monomial { j: usize, k: usize },
    Legendre { n: usize },
}

impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown function selector {s:?}; use f:j:k, P:j:k or legendre:n"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["f", j, k] | ["P", j, k] => {
                let (j, k) = (num(j)?, num(k)?);
                if !(1..=2).contains(&k) {
                    return Err(bad());
                }
                Ok(if parts[0] == "f" { Selector::Multiharmonic { j, k } } else { Selector::Monomial { j, k } })
            }
            ["legendre", n] => Ok(Selector::Legendre { n: num(n)? }),
            _ => Err(bad()),
        }
    }
}

/// Parses the arguments, runs the command and writes its output.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|(text, out)| write_output(&text, out.as_ref())) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bdiamond: {e}");
            e.exit_code()
        }
    }
}

/// Runs the parsed command and returns the rendered output with its destination.
pub fn execute(cli: &Cli) -> Result<(String, Option<PathBuf>)> {
    let c = &cli.common;
    let mut cfg = RunConfig { precision: c.precision, out: c.out.clone(), exact: c.exact, ..RunConfig::new(1, 0) };
    let text = match &cli.command {
        Command::Graph { b, level } => {
            cfg.b = *b;
            cfg.level = *level;
            cfg.format = c.format.unwrap_or(Format::Json);
            cmd_graph(&cfg)?
        }
        Command::Coeffs { b, jmax, probe } => {
            cfg.b = *b;
            cfg.jmax = *jmax;
            cfg.format = c.format.unwrap_or(Format::Json);
            cmd_coeffs(&cfg, *probe)?
        }
        Command::Sample { b, level, function } => {
            cfg.b = *b;
            cfg.level = *level;
            cfg.format = c.format.unwrap_or(Format::Csv);
            cmd_sample(&cfg, function.parse()?)?
        }
        Command::Gram { b, n } => {
            cfg.b = *b;
            cfg.n = *n;
            cfg.format = c.format.unwrap_or(Format::Json);
            cmd_gram(&cfg)?
        }
        Command::Legendre { b, n, level } => {
            cfg.b = *b;
            cfg.n = *n;
            cfg.level = *level;
            cfg.format = c.format.unwrap_or(Format::Json);
            cmd_legendre(&cfg)?
        }
    };
    Ok((text, cfg.out))
}

fn json_only(cfg: &RunConfig, command: &str) -> Result<()> {
    if cfg.format != Format::Json {
        return Err(Error::InvalidArgument(format!("{command} only writes json")));
    }
    Ok(())
}

fn render(doc: Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn cmd_graph(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    cfg.validate_level()?;
    json_only(cfg, "graph")?;
    let g = build_graph(cfg.b, cfg.level)?;
    render(json!({ "metadata": cfg.metadata("graph", None), "graph": graph_json(&g) }))
}

/// Tables to `cfg.jmax`; the convention harness runs first at degree `probe`.
pub fn cmd_coeffs(cfg: &RunConfig, probe: usize) -> Result<String> {
    cfg.validate()?;
    json_only(cfg, "coeffs")?;
    let (coarse, fine) = default_levels(cfg.b);
    let res = resolve_conventions_at(cfg.b, probe, coarse, fine)?;
    let bundle = res.survivor.expect("resolution returns a unique survivor");
    let tables = CoefficientTables::build_with(cfg.b, cfg.jmax, bundle)?;
    let mut meta = cfg.metadata("coeffs", Some(&bundle));
    meta["harness"] = json!({ "probe": res.probe, "coarse_level": res.coarse_level, "fine_level": res.fine_level });
    render(json!({
        "metadata": meta,
        "tables": tables.to_json(),
        "harness": res,
    }))
}

/// Samples one function on `G_level`, as CSV `word,x,y,value` or JSON.
pub fn cmd_sample(cfg: &RunConfig, sel: Selector) -> Result<String> {
    cfg.validate()?;
    cfg.validate_level()?;
    let g = build_graph(cfg.b, cfg.level)?;
    let mut cfg = cfg.clone();
    let (values, note) = match sel {
        Selector::Multiharmonic { j, k } => {
            cfg.jmax = j;
            let tables = CoefficientTables::build(cfg.b, j)?;
            let spec = multiharmonic_basis(cfg.b, j, k)?;
            (sample(&spec, &g, &tables.multiharmonic)?, format!("f:{j}:{k}"))
        }
        Selector::Monomial { j, k } => {
            cfg.jmax = j;
            let tables = CoefficientTables::build(cfg.b, j)?;
            let spec = monomial_to_fbasis(cfg.b, j, k, &tables.monomial)?;
            (sample(&spec, &g, &tables.multiharmonic)?, format!("P:{j}:{k}"))
        }
        Selector::Legendre { n } => {
            cfg.n = n + 1;
            let tables = tables_for(cfg.b, n + 1)?;
            cfg.jmax = tables.jmax();
            let seq = gram_schmidt(n + 1, &tables)?;
            if cfg.exact {
                (sample(&seq.specs[n], &g, &tables.multiharmonic)?, format!("legendre:{n} unnormalized"))
            } else {
                (sample_orthonormal(&seq, n, &g, &tables, cfg.precision)?, format!("legendre:{n} orthonormal"))
            }
        }
    };
    let bundle = ConventionBundle::consistent();
    let mut meta = cfg.metadata("sample", Some(&bundle));
    meta["function"] = json!(note);
    match cfg.format {
        Format::Csv => Ok(sample_csv(&g, &values, &meta, &cfg)),
        Format::Json => {
            let rows: Vec<Value> = sorted_vertices(&g)
                .into_iter()
                .map(|v| {
                    let (x, y) = g.coords(v);
                    json!({ "word": g.address(v).to_string(), "x": x, "y": y, "value": format_value(&values.values[v], &cfg) })
                })
                .collect();
            render(json!({ "metadata": meta, "rows": rows }))
        }
    }
}

fn sorted_vertices(g: &GraphLevel) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..g.n_vertices()).collect();
    ids.sort_by(|&a, &b| g.address(a).cmp(g.address(b)));
    ids
}

fn format_value(v: &Rational, cfg: &RunConfig) -> String {
    if cfg.exact {
        to_fraction_string(v)
    } else {
        to_decimal_string(v, cfg.precision as usize)
    }
}

fn sample_csv(g: &GraphLevel, values: &SampledFunction<'_, Rational>, meta: &Value, cfg: &RunConfig) -> String {
    let mut s = String::new();
    if let Value::Object(map) = meta {
        for (k, v) in map {
            let v = match v {
                Value::String(x) => x.clone(),
                other => other.to_string(),
            };
            s.push_str(&format!("# {k}: {v}\n"));
        }
    }
    s.push_str("word,x,y,value\n");
    for v in sorted_vertices(g) {
        let (x, y) = g.coords(v);
        s.push_str(&format!("{},{x},{y},{}\n", g.address(v), format_value(&values.values[v], cfg)));
    }
    s
}

pub fn cmd_gram(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    json_only(cfg, "gram")?;
    let tables = tables_for(cfg.b, cfg.n)?;
    let g = gram_matrix(cfg.n, &tables)?;
    let f = |v: &[Rational]| v.iter().map(to_fraction_string).collect::<Vec<_>>();
    let mut c = cfg.clone();
    c.jmax = tables.jmax();
    render(json!({
        "metadata": c.metadata("gram", Some(&tables.monomial.convention)),
        "gram": g.entries.iter().map(|r| f(r)).collect::<Vec<_>>(),
        "leading_minors": f(&g.leading_minors()),
    }))
}

/// Orthogonal sequence, recursion tables, normalized form and bound checks.
pub fn cmd_legendre(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    json_only(cfg, "legendre")?;
    if cfg.n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let (seq, tables) = legendre(cfg.b, cfg.n)?;
    let (steps, failures) = normalized_recursion(&seq, &tables, cfg.precision)?;
    let gn = green_norm_estimate(cfg.b, cfg.level, cfg.precision)?;
    let mut checks = Vec::new();
    for fam in &seq.families {
        checks.push(check_bounds(&format!("family {}", fam.parity), &fam.s, &fam.t, &gn));
    }
    checks.push(check_bounds("interleaved", &seq.s, &seq.t, &gn));
    let family_ok = checks
        .iter()
        .filter(|c| c.label.starts_with("family"))
        .all(|c| c.t_nonnegative && c.s_nonpositive && c.t_bounded && c.s_bounded);
    let mut c = cfg.clone();
    c.jmax = tables.jmax();
    render(json!({
        "metadata": c.metadata("legendre", Some(&tables.monomial.convention)),
        "sequence": seq.to_json(),
        "normalized_recursion": steps,
        "normalized_failures": failures,
        "green_norm": {
            "level": gn.level,
            "squared": to_fraction_string(&gn.squared),
            "norm": to_decimal_string(&gn.norm, cfg.precision as usize),
        },
        "bound_checks": checks,
        "bounds_pass": family_ok,
    }))
}

/// Writes to `out` atomically, or to standard output.
pub fn write_output(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!("f:0:1".parse::<Selector>().unwrap(), Selector::Multiharmonic { j: 0, k: 1 });
        assert_eq!("P:1:2".parse::<Selector>().unwrap(), Selector::Monomial { j: 1, k: 2 });
        assert_eq!("legendre:3".parse::<Selector>().unwrap(), Selector::Legendre { n: 3 });
        for bad in ["g:0:1", "f:0:3", "legendre", "P:x:1", ""] {
            assert!(bad.parse::<Selector>().is_err(), "{bad}");
        }
    }

    #[test]
    fn level_guard() {
        let cfg = RunConfig::new(2, 20);
        let e = cmd_graph(&cfg).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("vertices"));
        assert!(cmd_graph(&RunConfig::new(65, 1)).is_err());
        let mut low = RunConfig::new(1, 1);
        low.precision = 10;
        assert!(cmd_graph(&low).is_err());
    }

    #[test]
    fn graph_b3_level1() {
        let text = cmd_graph(&RunConfig::new(3, 1)).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["graph"]["vertices"].as_array().unwrap().len(), 4);
        assert_eq!(v["graph"]["edges"].as_array().unwrap().len(), 3);
        let mult: u64 = v["graph"]["edges"].as_array().unwrap().iter().map(|e| e[2].as_u64().unwrap()).sum();
        assert_eq!(mult, 5);
        assert_eq!(v["graph"]["edge_count"], 5);
        assert_eq!(v["metadata"]["b"], 3);
    }

    #[test]
    fn sample_csv_layout() {
        let mut cfg = RunConfig::new(2, 1);
        cfg.format = Format::Csv;
        cfg.exact = true;
        let text = cmd_sample(&cfg, Selector::Multiharmonic { j: 0, k: 1 }).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "word,x,y,value");
        let vals: Vec<&str> = rows[1..].iter().map(|r| r.rsplit(',').next().unwrap()).collect();
        assert!(vals.contains(&"3/5") && vals.contains(&"2/5"));
        assert!(text.starts_with("# b: 2\n"));
    }
}
