mod config;
mod render;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use infmul::convolution::{product_transform, verify_with_tol, VERIFY_TOL};
use infmul::io::WireComplex;
use infmul::partitions::{enumerate_nc, enumerate_ncl, linked_class, MAX_NC, MAX_NCL};
use infmul::selftest::{self, SuiteOptions};
use infmul::{
    convolve_by_transform, cumulants_from_moments, d_transform, estimate_moments,
    product_experiment, t_coeffs, transform, DualScalar, Error, InfLaw, ProductKind, Result,
    Sampler, SetPartition, TransformKind, WishartConfig, DEFAULT_ORDER, MAX_ORDER,
};

use config::{parse_list, FileConfig};

#[derive(Parser, Debug)]
#[command(
    name = "infmul",
    version,
    about = "Infinitesimal multiplicative convolutions of scalar laws"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Truncation order (at most 16).
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Tolerance for oracle/transform agreement.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List NC(n) or NCL(n).
    Partitions {
        n: usize,
        #[arg(long, value_enum, default_value = "nc")]
        kind: PartitionKind,
        /// `1n` for the full partition, or a non-crossing partition such as
        /// `{{1,3},{2}}`; lists the linked partitions with those connected
        /// classes.
        #[arg(long)]
        classof: Option<String>,
    },
    /// Transforms, cumulants or t-coefficients of one law.
    Law {
        /// Law source: a JSON file, `-` for stdin, `wishart:C,CPRIME` or
        /// `point:A`.
        #[arg(long)]
        input: String,
        #[arg(long, value_enum)]
        emit: Emit,
        /// Transform for `--emit transform`.
        #[arg(long, default_value = "t")]
        transform: TransformKind,
    },
    /// Product law of two laws under an independence.
    Convolve {
        #[arg(long)]
        kind: ProductKind,
        /// First law source (see `law --input`).
        #[arg(long)]
        x: String,
        /// Second law source.
        #[arg(long)]
        y: String,
        /// Cross-check against the moment oracle; exit 1 on mismatch.
        #[arg(long)]
        verify: bool,
    },
    /// Complex Wishart Monte Carlo.
    Wishart(WishartArgs),
    /// Run the invariant suite.
    Selftest {
        /// Fewer Monte Carlo trials and smaller product sizes.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PartitionKind {
    Nc,
    Ncl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Transform,
    Cumulants,
    Tcoeffs,
    Moments,
}

#[derive(Args, Debug)]
struct WishartArgs {
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "cprime", allow_hyphen_values = true)]
    c_prime: Option<f64>,
    /// Comma-separated matrix sizes.
    #[arg(long = "N")]
    n_list: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    sampler: Option<String>,
    /// Sample `X₁X₂` for independent copies instead of a single matrix.
    #[arg(long)]
    product: bool,
}

struct Ctx {
    k: Option<usize>,
    tol: f64,
    format: Option<Format>,
    seed: Option<u64>,
    file: FileConfig,
}

impl Ctx {
    fn new(g: &GlobalOpts) -> Result<Ctx> {
        let file = match &g.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let format = match g.format {
            Some(f) => Some(f),
            None => file
                .get_str("format")
                .map(|s| {
                    Format::from_str(s, true)
                        .map_err(|_| Error::Config(format!("bad value for format: {s:?}")))
                })
                .transpose()?,
        };
        let k = g.k.or(file.get("K")?);
        if let Some(k) = k {
            if k == 0 || k > MAX_ORDER {
                return Err(Error::SizeLimit {
                    what: "K",
                    value: k,
                    min: 1,
                    max: MAX_ORDER,
                });
            }
        }
        Ok(Ctx {
            k,
            tol: g.tol.or(file.get("tol")?).unwrap_or(VERIFY_TOL),
            format,
            seed: g.seed.or(file.get("seed")?),
            file,
        })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// Result of a subcommand: text to print and whether every check passed.
struct Outcome {
    text: String,
    pass: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, pass: true }
    }
}

fn json_text(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn read_source(src: &str) -> Result<String> {
    if src == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::InvalidInput(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(src)
            .map_err(|e| Error::InvalidInput(format!("cannot read {src}: {e}")))
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad {what}: {s:?}")))
}

/// Loads a law and applies `--K`: built-in laws are generated at that order,
/// file laws are truncated to it.
fn load_law(src: &str, k: Option<usize>) -> Result<InfLaw> {
    let order = k.unwrap_or(DEFAULT_ORDER);
    if let Some(spec) = src.strip_prefix("wishart:") {
        let (c, cp) = spec.split_once(',').ok_or_else(|| {
            Error::InvalidInput(format!("expected wishart:C,CPRIME, got {src:?}"))
        })?;
        return InfLaw::wishart_limit(parse_f64(c, "c")?, parse_f64(cp, "c'")?, order);
    }
    if let Some(a) = src.strip_prefix("point:") {
        return InfLaw::point_mass(DualScalar::real(parse_f64(a, "point")?, 0.0), order);
    }
    let law: InfLaw = serde_json::from_str(&read_source(src)?)?;
    match k {
        Some(k) if k > law.order() => Err(Error::InvalidInput(format!(
            "--K {k} exceeds the order {} of {src}",
            law.order()
        ))),
        Some(k) => law.truncate(k),
        None => Ok(law),
    }
}

fn cmd_partitions(
    ctx: &Ctx,
    n: usize,
    kind: PartitionKind,
    classof: Option<&str>,
) -> Result<Outcome> {
    let list: Vec<String> = match (kind, classof) {
        (PartitionKind::Nc, None) => enumerate_nc(n)?.iter().map(|p| p.to_string()).collect(),
        (PartitionKind::Ncl, None) => enumerate_ncl(n)?.iter().map(|p| p.to_string()).collect(),
        (_, Some(c)) => {
            let sigma = if c == "1n" {
                if n == 0 || n > MAX_NCL {
                    return Err(Error::SizeLimit {
                        what: "n",
                        value: n,
                        min: 1,
                        max: MAX_NCL,
                    });
                }
                SetPartition::full(n)
            } else {
                let s: SetPartition = c.parse()?;
                if s.n() != n {
                    return Err(Error::InvalidInput(format!(
                        "{c} is a partition of {}, not {n}",
                        s.n()
                    )));
                }
                s
            };
            linked_class(&sigma)?
                .iter()
                .map(|p| p.to_string())
                .collect()
        }
    };
    let kind_name = match (kind, classof) {
        (_, Some(_)) => "ncl-class",
        (PartitionKind::Nc, None) => "nc",
        (PartitionKind::Ncl, None) => "ncl",
    };
    let text = match ctx.format_or(Format::Pretty) {
        Format::Json => json_text(&json!({
            "n": n,
            "kind": kind_name,
            "count": list.len(),
            "partitions": list,
        })),
        Format::Csv => {
            let mut s = String::from("index,partition\n");
            for (i, p) in list.iter().enumerate() {
                s += &format!("{},\"{p}\"\n", i + 1);
            }
            s
        }
        Format::Pretty => {
            let mut s: String = list.iter().map(|p| format!("{p}\n")).collect();
            s += &format!("count: {}\n", list.len());
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_law(ctx: &Ctx, input: &str, emit: Emit, kind: TransformKind) -> Result<Outcome> {
    let law = load_law(input, ctx.k)?;
    let format = ctx.format_or(Format::Json);
    let text = match emit {
        Emit::Moments => match format {
            Format::Json => json_text(&serde_json::to_value(&law)?),
            Format::Csv => render::law_csv(law.moments()),
            Format::Pretty => render::law_pretty(law.moments()),
        },
        Emit::Transform => {
            let f = transform(kind, &law)?;
            let explicit = d_transform(kind, &law)?;
            match format {
                Format::Json => json_text(&json!({
                    "transform": kind.name(),
                    "series": f,
                    "d_explicit": explicit.coeffs().iter().map(|&z| WireComplex(z)).collect::<Vec<_>>(),
                })),
                Format::Csv => render::series_csv(&f),
                Format::Pretty => render::series_pretty(kind.name(), &f),
            }
        }
        Emit::Cumulants => {
            let kappa = cumulants_from_moments(&law);
            match format {
                Format::Json => json_text(&serde_json::to_value(&kappa)?),
                Format::Csv => render::cumulants_csv(&kappa),
                Format::Pretty => render::cumulants_pretty(&kappa),
            }
        }
        Emit::Tcoeffs => {
            let t = t_coeffs(&law)?;
            match format {
                Format::Json => json_text(&serde_json::to_value(&t)?),
                Format::Csv => render::tcoeffs_csv(&t),
                Format::Pretty => render::tcoeffs_pretty(&t),
            }
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_convolve(ctx: &Ctx, kind: ProductKind, x: &str, y: &str, check: bool) -> Result<Outcome> {
    let lx = load_law(x, ctx.k)?;
    let ly = load_law(y, ctx.k)?;
    let k = ctx.k.unwrap_or(lx.order().min(ly.order()));
    let product = convolve_by_transform(kind, &lx, &ly, k)?;
    let (tkind, series) = product_transform(kind, &lx, &ly, k)?;
    let report = if check {
        Some(verify_with_tol(kind, &lx, &ly, k, ctx.tol)?)
    } else {
        None
    };
    let pass = report.as_ref().is_none_or(|r| r.pass);
    let text = match ctx.format_or(Format::Json) {
        Format::Json => {
            let mut v = json!({
                "kind": kind,
                "K": k,
                "law": product,
                "transform": { "kind": tkind.name(), "series": series },
            });
            if let Some(r) = &report {
                v["verification"] = serde_json::to_value(r)?;
            }
            json_text(&v)
        }
        Format::Csv => render::law_csv(product.moments()),
        Format::Pretty => {
            let mut s = format!("{kind} product, K = {k}\n");
            s += &render::law_pretty(product.moments());
            s += &render::series_pretty(tkind.name(), &series);
            if let Some(r) = &report {
                s += &format!(
                    "verification: {} (body {:.2e}, eps {:.2e})\n",
                    if r.pass { "pass" } else { "FAIL" },
                    r.deviation_body,
                    r.deviation_eps
                );
            }
            s
        }
    };
    Ok(Outcome { text, pass })
}

fn wishart_config(ctx: &Ctx, a: &WishartArgs) -> Result<WishartConfig> {
    let f = &ctx.file;
    let d = WishartConfig::default();
    let n_list = match a.n_list.as_deref().or(f.get_str("N")) {
        Some(s) => parse_list(s)?,
        None => d.n_list,
    };
    let sampler = match a.sampler.as_deref().or(f.get_str("sampler")) {
        Some(s) => s.parse::<Sampler>()?,
        None => d.sampler,
    };
    Ok(WishartConfig {
        c: a.c.or(f.get("c")?).unwrap_or(d.c),
        c_prime: a.c_prime.or(f.get("cprime")?).unwrap_or(d.c_prime),
        n_list,
        trials: a.trials.or(f.get("trials")?).unwrap_or(d.trials),
        k_max: a.kmax.or(f.get("kmax")?).unwrap_or(d.k_max),
        seed: ctx.seed.unwrap_or(d.seed),
        sampler,
    })
}

fn cmd_wishart(ctx: &Ctx, a: &WishartArgs) -> Result<Outcome> {
    let cfg = wishart_config(ctx, a)?;
    let est = if a.product {
        product_experiment(&cfg)?
    } else {
        estimate_moments(&cfg)?
    };
    let text = match ctx.format_or(Format::Csv) {
        Format::Json => est.to_json()? + "\n",
        Format::Csv => est.to_csv(),
        Format::Pretty => render::mc_pretty(&est),
    };
    Ok(Outcome {
        text,
        pass: est.pass(),
    })
}

fn cmd_selftest(ctx: &Ctx, quick: bool) -> Result<Outcome> {
    let mut opts = SuiteOptions::default();
    if let Some(seed) = ctx.seed {
        opts.seed = seed;
    }
    if quick {
        opts.mc_trials = 1000;
        opts.product_sizes = vec![40, 80];
    }
    let results = selftest::run_all(&opts);
    let pass = results.iter().all(|r| r.pass);
    let text = match ctx.format_or(Format::Pretty) {
        Format::Json => json_text(&serde_json::to_value(&results)?),
        Format::Csv => render::checks_csv(&results),
        Format::Pretty => {
            let mut s: String = results.iter().map(|r| format!("{r}\n")).collect();
            let passed = results.iter().filter(|r| r.pass).count();
            s += &format!("selftest: {passed}/{} passed\n", results.len());
            s
        }
    };
    Ok(Outcome { text, pass })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let ctx = Ctx::new(&cli.global)?;
    match &cli.command {
        Command::Partitions { n, kind, classof } => {
            let max = if *kind == PartitionKind::Nc && classof.is_none() {
                MAX_NC
            } else {
                MAX_NCL
            };
            if *n == 0 || *n > max {
                return Err(Error::SizeLimit {
                    what: "n",
                    value: *n,
                    min: 1,
                    max,
                });
            }
            cmd_partitions(&ctx, *n, *kind, classof.as_deref())
        }
        Command::Law {
            input,
            emit,
            transform,
        } => cmd_law(&ctx, input, *emit, *transform),
        Command::Convolve { kind, x, y, verify } => cmd_convolve(&ctx, *kind, x, y, *verify),
        Command::Wishart(a) => cmd_wishart(&ctx, a),
        Command::Selftest { quick } => cmd_selftest(&ctx, *quick),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}
