//! `tilewalsh`: seeded instances, transforms, decompositions and certificates
//! from the command line.
//!
//! Exit codes: 0 when every theorem-backed certificate passes, 1 when one
//! fails, 2 on malformed input or a violated precondition.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use tilewalsh::certificate::{all_theorems_pass, Backing, Certificate};
use tilewalsh::decompose::{
    carleson_form_certificate, density_decompose, full_decompose, restricted_weak_type, tile_type_constant,
};
use tilewalsh::dyadic::{BitileUniverse, MAX_LEVELS};
use tilewalsh::instance::{
    normalize_dual, normalize_pointwise, random_family, random_level_set, random_nfun, random_signal, Generator,
};
use tilewalsh::io::{
    any_signal_to_json, level_set_from_json, level_set_to_json, nfun_from_json, nfun_to_json, read_json,
    signal_from_json, signal_to_json, to_json_string, write_csv, AnySignal, RatioRow,
};
use tilewalsh::number::{Dyadic, Scalar};
use tilewalsh::operators::{carleson_bitile, carleson_direct};
use tilewalsh::signal::{FrequencyChoice, LevelSet, NormPlugin, Signal, ValueKind};
use tilewalsh::timefreq::Tree;
use tilewalsh::walsh::{fwht, inverse_fwht};

const THREADS_VAR: &str = "TILEWALSH_THREADS";

#[derive(Parser)]
#[command(name = "tilewalsh", version, about = "Discrete Walsh time-frequency analysis on the dyadic grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walsh coefficients of a signal (or the inverse transform)
    Transform {
        #[command(flatten)]
        common: Common,
        /// Read coefficients and write time samples
        #[arg(long)]
        inverse: bool,
    },
    /// Linearized Carleson operator, directly and through the bitile form
    Carleson {
        #[command(flatten)]
        common: Common,
    },
    /// Density/size decomposition of the bitile universe
    Decompose {
        #[command(flatten)]
        common: Common,
    },
    /// Forest decomposition of the bitile form of the Carleson pairing
    Certify {
        #[command(flatten)]
        common: Common,
    },
    /// Tile-type ratios over families of up-trees with disjoint down-tiles
    Tiletype {
        #[command(flatten)]
        common: Common,
        /// Number of random families (ignored with --family)
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Trees per random family
        #[arg(long, default_value_t = 4)]
        trees: usize,
        /// JSON array of trees `{"top": .., "members": [..]}`
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Restricted weak-type pairing for f ≤ 1_F, g ≤ 1_E
    Rwt {
        #[command(flatten)]
        common: Common,
    },
    /// Write seeded f, g, E, F, N files into the --out directory
    Gen {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Debug, Serialize)]
struct Common {
    /// Grid resolution L (2^L cells) for generated inputs
    #[arg(long, default_value_t = 4)]
    levels: u32,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// vector | matrix
    #[arg(long, default_value = "vector")]
    kind: ValueKind,
    /// euclidean | lp:<p> | schatten:<p>
    #[arg(long, default_value = "euclidean")]
    norm: String,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Signal file f
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Signal file g
    #[arg(long)]
    dual: Option<PathBuf>,
    /// Level set file E
    #[arg(long)]
    set: Option<PathBuf>,
    /// Level set file F
    #[arg(long)]
    fset: Option<PathBuf>,
    /// Frequency choice file N
    #[arg(long)]
    nfun: Option<PathBuf>,
    /// |E| for a generated E
    #[arg(long, default_value_t = 0.5)]
    measure: f64,
    /// |F| for a generated F
    #[arg(long, default_value_t = 0.25)]
    measure_f: f64,
    /// Report (or data) file; stdout when absent
    #[serde(skip)]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ratio table; defaults to the --out path with a .csv extension
    #[serde(skip)]
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Common {
    fn plugin(&self) -> Result<NormPlugin> {
        Ok(self.norm.parse()?)
    }

    fn validate(&self) -> Result<NormPlugin> {
        if !(1..=MAX_LEVELS).contains(&self.levels) {
            bail!("--levels must lie in 1..={MAX_LEVELS}");
        }
        if self.dim == 0 {
            bail!("--dim must be positive");
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            bail!("--q must be a finite real ≥ 1");
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            bail!("--p must lie in (1, ∞)");
        }
        for (flag, m) in [("--measure", self.measure), ("--measure-f", self.measure_f)] {
            if !(0.0..=1.0).contains(&m) {
                bail!("{flag} must lie in [0, 1]");
            }
        }
        let plugin = self.plugin()?;
        plugin.check_kind(self.kind, self.dim)?;
        Ok(plugin)
    }
}

/// Inputs read from files, with seeded stand-ins for the missing ones.
struct Inputs {
    f: AnySignal,
    g: AnySignal,
    e: LevelSet,
    fset: LevelSet,
    nfun: FrequencyChoice,
    gen: Generator,
}

fn read_signal(path: &Path) -> Result<(AnySignal, Option<String>)> {
    let v = read_json(path).with_context(|| format!("reading {}", path.display()))?;
    let s = signal_from_json(&v).with_context(|| format!("parsing {}", path.display()))?;
    Ok((s.signal, s.domain))
}

fn read_with<T>(path: &Path, parse: fn(&Value) -> tilewalsh::Result<T>) -> Result<T> {
    let v = read_json(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&v).with_context(|| format!("parsing {}", path.display()))
}

/// Draw order from the seed: f, g, E, F, N, then any command-specific draws.
/// A supplied f fixes the shape of everything generated.
fn load_inputs(c: &Common, plugin: &NormPlugin) -> Result<Inputs> {
    let file_f = c.input.as_deref().map(read_signal).transpose()?.map(|(s, _)| s);
    let (l, dim, kind) = match &file_f {
        Some(AnySignal::Exact(s)) => (s.levels(), s.dim(), s.kind()),
        Some(AnySignal::Float(s)) => (s.levels(), s.dim(), s.kind()),
        None => (c.levels, c.dim, c.kind),
    };
    let mut gen = Generator::new(c.seed);
    let f = normalize_pointwise(&random_signal(&mut gen, l, dim, kind), plugin);
    let g = normalize_dual(&random_signal(&mut gen, l, dim, kind), plugin);
    let e = random_level_set(&mut gen, l, c.measure);
    let fset = random_level_set(&mut gen, l, c.measure_f);
    let nfun = random_nfun(&mut gen, l);
    Ok(Inputs {
        f: file_f.unwrap_or(AnySignal::Exact(f)),
        g: match &c.dual {
            Some(p) => read_signal(p)?.0,
            None => AnySignal::Exact(g),
        },
        e: c.set.as_deref().map(|p| read_with(p, level_set_from_json)).transpose()?.unwrap_or(e),
        fset: c.fset.as_deref().map(|p| read_with(p, level_set_from_json)).transpose()?.unwrap_or(fset),
        nfun: c.nfun.as_deref().map(|p| read_with(p, nfun_from_json)).transpose()?.unwrap_or(nfun),
        gen,
    })
}

fn exact(s: &AnySignal) -> Signal<Dyadic> {
    match s {
        AnySignal::Exact(s) => s.clone(),
        AnySignal::Float(_) => unreachable!("checked by the caller"),
    }
}

/// Runs `$body` with exact signals when every input is exact, else with floats.
macro_rules! with_signals {
    ([$($s:expr => $v:ident),*], $body:expr) => {
        if [$(&$s),*].iter().all(|s| s.is_exact()) {
            $(let $v = exact(&$s);)*
            $body
        } else {
            $(let $v = $s.to_f64();)*
            $body
        }
    };
}

/// Everything a report-producing command hands back.
struct Outcome {
    result: Value,
    certificates: Vec<Certificate>,
    rows: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    version: &'static str,
    config: Value,
    all_theorems_pass: bool,
    theorem_certificates: Vec<Certificate>,
    empirical_certificates: Vec<Certificate>,
    result: Value,
}

fn config_value(command: &str, c: &Common, extra: Value) -> Result<Value> {
    let mut cfg = serde_json::to_value(c)?;
    let obj = cfg.as_object_mut().expect("config is an object");
    obj.insert("command".into(), json!(command));
    if let Value::Object(extra) = extra {
        obj.extend(extra);
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn finish(command: &'static str, c: &Common, extra: Value, plugin: &NormPlugin, levels: u32, o: Outcome) -> Result<bool> {
    let pass = all_theorems_pass(&o.certificates);
    let mut result = o.result;
    if let Value::Object(m) = &mut result {
        m.remove("certificates");
    }
    let mut rows: Vec<RatioRow> = o
        .rows
        .into_iter()
        .map(|(name, value)| RatioRow {
            levels,
            q: c.q,
            norm: plugin.to_string(),
            ratio_name: name,
            value,
        })
        .collect();
    rows.extend(o.certificates.iter().map(|cert| RatioRow {
        levels,
        q: c.q,
        norm: plugin.to_string(),
        ratio_name: cert.name.clone(),
        value: cert.ratio(),
    }));
    let (theorem, empirical): (Vec<_>, Vec<_>) = o.certificates.into_iter().partition(|c| c.backing == Backing::Theorem);
    let report = Report {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: config_value(command, c, extra)?,
        all_theorems_pass: pass,
        theorem_certificates: theorem,
        empirical_certificates: empirical,
        result,
    };
    emit(c.out.as_deref(), &to_json_string(&report)?)?;
    let csv_path = c.csv.clone().or_else(|| c.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = csv_path {
        let file = fs::File::create(&p).with_context(|| format!("writing {}", p.display()))?;
        write_csv(file, &rows)?;
    }
    for cert in report.theorem_certificates.iter().filter(|c| !c.pass) {
        log::error!("certificate {} failed: {} > {}", cert.name, cert.lhs, cert.rhs);
    }
    Ok(pass)
}

fn cmd_transform(c: &Common, inverse: bool) -> Result<bool> {
    let Some(path) = &c.input else { bail!("transform needs --in") };
    let (f, domain) = read_signal(path)?;
    let (want, give) = if inverse { (Some("walsh"), None) } else { (None, Some("walsh")) };
    if domain.as_deref() != want {
        bail!(
            "{} holds {} samples; {} expects {}",
            path.display(),
            domain.as_deref().unwrap_or("time"),
            if inverse { "the inverse transform" } else { "the transform" },
            want.unwrap_or("time"),
        );
    }
    let out = match &f {
        AnySignal::Exact(s) => signal_to_json(&if inverse { inverse_fwht(s) } else { fwht(s) }, give),
        AnySignal::Float(s) => signal_to_json(&if inverse { inverse_fwht(s) } else { fwht(s) }, give),
    };
    emit(c.out.as_deref(), &to_json_string(&out)?)?;
    Ok(true)
}

fn max_abs_diff<T: Scalar>(a: &Signal<T>, b: &Signal<T>) -> Result<(f64, f64)> {
    let d = a.sub(b)?;
    let diff = d.data().iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    let scale = a.data().iter().map(|x| x.to_f64().abs()).fold(1.0, f64::max);
    Ok((diff, scale))
}

fn cmd_carleson(c: &Common, plugin: &NormPlugin) -> Result<bool> {
    let inp = load_inputs(c, plugin)?;
    let l = inp.f.levels();
    let universe = BitileUniverse::new(l)?;
    let (identical, diff, direct, bitile) = with_signals!([inp.f => f], {
        let direct = carleson_direct(&f, &inp.nfun)?;
        let bitile = carleson_bitile(&f, &inp.nfun, &universe)?;
        let (diff, scale) = max_abs_diff(&direct, &bitile)?;
        let identical = if inp.f.is_exact() { direct == bitile } else { diff <= 1e-9 * scale };
        (identical, diff, signal_to_json(&direct, None), signal_to_json(&bitile, None))
    });
    let result = json!({
        "identical": identical,
        "mode": if inp.f.is_exact() { "exact" } else { "float" },
        "max_abs_diff": diff,
        "nfun": nfun_to_json(&inp.nfun),
        "direct": direct,
        "bitile": bitile,
    });
    let o = Outcome { result, certificates: Vec::new(), rows: vec![("max_abs_diff".into(), diff)] };
    finish("carleson", c, json!({}), plugin, l, o)?;
    Ok(identical)
}

fn cmd_decompose(c: &Common, plugin: &NormPlugin) -> Result<bool> {
    let inp = load_inputs(c, plugin)?;
    let l = inp.f.levels();
    let universe = BitileUniverse::new(l)?;
    let o = if inp.e.is_empty() {
        let d = density_decompose(universe.items(), &inp.e, &inp.nfun, c.q, None)?;
        let mut result = serde_json::to_value(&d)?;
        result["sparse_only"] = json!(true);
        Outcome { result, certificates: d.certificates, rows: Vec::new() }
    } else {
        with_signals!([inp.f => f], {
            let forest = full_decompose(universe.items(), &f, &inp.e, &inp.nfun, c.q, plugin)?;
            let certificates = forest.certificates().cloned().collect();
            let rows = forest.levels.iter().map(|lv| (format!("trees_n{}", lv.n), lv.trees.len() as f64)).collect();
            let mut result = serde_json::to_value(&forest)?;
            if let Some(levels) = result["levels"].as_array_mut() {
                for lv in levels {
                    lv.as_object_mut().map(|m| m.remove("certificates"));
                }
            }
            Outcome { result, certificates, rows }
        })
    };
    finish("decompose", c, json!({}), plugin, l, o)
}

fn cmd_certify(c: &Common, plugin: &NormPlugin) -> Result<bool> {
    let inp = load_inputs(c, plugin)?;
    let l = inp.f.levels();
    let o = with_signals!([inp.f => f, inp.g => g], {
        let r = carleson_form_certificate(&f, &g, &inp.e, &inp.nfun, c.q, plugin)?;
        let rows = vec![
            ("form_ratio".to_string(), r.ratio),
            ("level_ratio".to_string(), r.level_ratio),
            ("max_tree_ratio".to_string(), r.max_tree_ratio),
        ];
        let mut result = serde_json::to_value(&r)?;
        if let Some(levels) = result["forest"]["levels"].as_array_mut() {
            for lv in levels {
                lv.as_object_mut().map(|m| m.remove("certificates"));
            }
        }
        if let Some(trees) = result["trees"].as_array_mut() {
            for t in trees {
                t["tree_lemma"].as_object_mut().map(|m| m.remove("certificates"));
            }
        }
        Outcome { result, certificates: r.certificates, rows }
    });
    finish("certify", c, json!({}), plugin, l, o)
}

fn cmd_tiletype(c: &Common, plugin: &NormPlugin, trials: usize, trees: usize, family: Option<&Path>) -> Result<bool> {
    let mut inp = load_inputs(c, plugin)?;
    let l = inp.f.levels();
    let universe = BitileUniverse::new(l)?;
    let families: Vec<Vec<Tree>> = match family {
        Some(p) => {
            let v = read_json(p).with_context(|| format!("reading {}", p.display()))?;
            vec![serde_json::from_value(v).with_context(|| format!("parsing {}", p.display()))?]
        }
        None => (0..trials).map(|_| random_family(&mut inp.gen, &universe, trees, 1, 2)).collect(),
    };
    let o = with_signals!([inp.f => f], {
        let mut certificates = Vec::new();
        let mut rows = Vec::new();
        let mut runs = Vec::new();
        let (mut max_ratio, mut max_bmo) = (0.0f64, 0.0f64);
        for fam in &families {
            let r = tile_type_constant(fam, &f, c.q, plugin)?;
            max_ratio = max_ratio.max(r.ratio);
            max_bmo = max_bmo.max(r.bmo_ratio);
            rows.push(("tile_type_ratio".to_string(), r.ratio));
            rows.push(("bmo_ratio".to_string(), r.bmo_ratio));
            certificates.extend(r.certificates.iter().cloned());
            let mut v = serde_json::to_value(&r)?;
            v.as_object_mut().map(|m| m.remove("certificates"));
            runs.push(json!({"family": fam, "report": v}));
        }
        Outcome {
            result: json!({"ratio": max_ratio, "bmo_ratio": max_bmo, "trials": runs}),
            certificates,
            rows,
        }
    });
    let extra = json!({"trials": families.len(), "trees": trees, "family": family});
    finish("tiletype", c, extra, plugin, l, o)
}

fn cmd_rwt(c: &Common, plugin: &NormPlugin) -> Result<bool> {
    let inp = load_inputs(c, plugin)?;
    let l = inp.f.levels();
    let o = with_signals!([inp.f => f, inp.g => g], {
        let f = f.restrict(&inp.fset)?;
        let g = g.restrict(&inp.e)?;
        let r = restricted_weak_type(&inp.fset, &inp.e, &f, &g, &inp.nfun, c.p, plugin)?;
        let rows = vec![("log_ratio".to_string(), r.log_ratio), ("power_ratio".to_string(), r.power_ratio)];
        Outcome { result: serde_json::to_value(&r)?, certificates: r.certificates, rows }
    });
    finish("rwt", c, json!({}), plugin, l, o)
}

fn cmd_gen(c: &Common, plugin: &NormPlugin) -> Result<bool> {
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let inp = load_inputs(c, plugin)?;
    let files = [
        ("f.json", any_signal_to_json(&inp.f, None)),
        ("g.json", any_signal_to_json(&inp.g, None)),
        ("E.json", level_set_to_json(&inp.e)),
        ("F.json", level_set_to_json(&inp.fset)),
        ("N.json", nfun_to_json(&inp.nfun)),
    ];
    for (name, v) in files {
        let p = dir.join(name);
        fs::write(&p, to_json_string(&v)?).with_context(|| format!("writing {}", p.display()))?;
        log::info!("wrote {}", p.display());
    }
    Ok(true)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_VAR}=`{v}` is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.command {
        Command::Transform { common, inverse } => {
            common.plugin()?;
            cmd_transform(&common, inverse)
        }
        Command::Carleson { common } => cmd_carleson(&common, &common.validate()?),
        Command::Decompose { common } => cmd_decompose(&common, &common.validate()?),
        Command::Certify { common } => cmd_certify(&common, &common.validate()?),
        Command::Tiletype { common, trials, trees, family } => {
            let plugin = common.validate()?;
            cmd_tiletype(&common, &plugin, trials, trees, family.as_deref())
        }
        Command::Rwt { common } => cmd_rwt(&common, &common.validate()?),
        Command::Gen { common } => cmd_gen(&common, &common.validate()?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
