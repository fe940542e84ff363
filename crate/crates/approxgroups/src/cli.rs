//! Command-line front end.
//!
//! Every subcommand writes one JSON report (schema in [`crate::report`]) and,
//! where a table makes sense, a CSV file. The scenario recorded in the report
//! is the parsed argument set minus output-only flags, so reruns with the same
//! arguments produce byte-identical output.

use crate::context::Ctx;
use crate::descriptor::{parse_chain, parse_elem, parse_group, parse_progression, parse_ratio, parse_set};
use crate::error::{Error, Result};
use crate::gleason::{self, GleasonOptions, StrongApproxParams};
use crate::group::{Elem, Group};
use crate::growth::{self, Congruence, ExplicitSubgroup, FiniteMetricSpace, SubgroupOracle};
use crate::local::{self, PartialGroup};
use crate::metric::{self, Nesting, NestedChain};
use crate::nilprog::{self, Collector, Letter, ProgressionSpec};
use crate::report::{envelope, write_json, Table};
use crate::sanders::{self, Strategy};
use crate::set::ElementSet;
use crate::setops::{self, power_set, product_set};
use crate::fourier;
use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Parser, Debug, Serialize)]
#[command(name = "approxgroups", version, about = "Exact computations with approximate groups")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Global {
    /// Group descriptor, e.g. `cyclic:41`, `lattice:2`, `heisenberg`, `(cyclic:4)*(cyclic:6)` or JSON.
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Set descriptor, e.g. `interval:-10:10`, `box:-2:2:-3:3`, `ball:2:[[1,0],[0,1]]` or JSON.
    #[arg(long, global = true)]
    pub set: Option<String>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// CSV table path for subcommands that produce one.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Largest set any operation may materialise.
    #[arg(long, global = true, default_value_t = crate::context::DEFAULT_MAX_SET)]
    pub budget_max_set: usize,
    /// Largest covering constant searched for by the greedy witness.
    #[arg(long, global = true, default_value_t = 4096)]
    pub budget_k_max: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Doubling statistics and a verified covering witness.
    Analyze,
    /// Small symmetric neighbourhood `S` with `S^m ⊆ A^4`.
    Sanders(SandersArgs),
    /// Strong approximate group checks, escape norms and Gleason constants.
    Gleason(GleasonArgs),
    /// Pseudometric from a nested chain of sets.
    BkMetric(BkArgs),
    /// Nilprogression checks, word collection and growth.
    Nilprog(NilprogArgs),
    /// Spectra and Bogolyubov-type lemmas on finite abelian groups.
    Fourier(FourierArgs),
    /// Ball growth, isoperimetry, coset counts and stabilisers.
    Growth(GrowthArgs),
    /// Local groups given by a restricted domain or a table.
    Local(LocalArgs),
    /// Re-check a certificate from an earlier `analyze` or `sanders` report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SandersArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value = "heuristic", value_parser = ["exact", "heuristic"])]
    pub strategy: String,
    /// Also build the normalised set from the resulting `S`.
    #[arg(long)]
    pub normal: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GleasonArgs {
    /// Core set `S` of the strong approximate group.
    #[arg(long)]
    pub core: String,
    /// `paper` uses the large constants derived from `--k`.
    #[arg(long, default_value = "desk", value_parser = ["desk", "paper"])]
    pub regime: String,
    #[arg(long, default_value_t = 2)]
    pub k: u64,
    #[arg(long, default_value_t = 4)]
    pub m1: u64,
    #[arg(long, default_value_t = 4)]
    pub m2: u64,
    #[arg(long, default_value_t = 3)]
    pub m3: u64,
    /// Power of `A` used by the first trapping clause.
    #[arg(long, default_value_t = 2)]
    pub env: usize,
    #[arg(long, default_value = "1/10")]
    pub eps: String,
    #[arg(long, default_value_t = 3)]
    pub n_psi: usize,
    /// Shift elements as JSON; default is the least non-identity element of `A`.
    #[arg(long)]
    pub shift_g: Option<String>,
    #[arg(long)]
    pub shift_h: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub taylor_n: usize,
    /// Pairs are drawn from `A^envelope`.
    #[arg(long, default_value_t = 1)]
    pub envelope: usize,
    #[arg(long, default_value_t = 1 << 20)]
    pub sample_budget: usize,
    #[arg(long, default_value_t = 2000)]
    pub words: usize,
    #[arg(long, default_value_t = 3)]
    pub word_len: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct BkArgs {
    /// `dyadic:N:K`, `heisenberg_chain:A:C:K`, `heisenberg_central:A:C:K` or `;`-separated sets.
    #[arg(long)]
    pub chain: String,
    #[arg(long, default_value = "plain", value_parser = ["plain", "normal"])]
    pub mode: String,
    #[arg(long, default_value_t = 1)]
    pub normal_power: usize,
    /// Inclusions are checked on `A_0^envelope`.
    #[arg(long, default_value_t = 2)]
    pub envelope: usize,
    /// Continuity probes (normal mode); 0 skips the probe.
    #[arg(long, default_value_t = 200)]
    pub probes: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct NilprogArgs {
    #[arg(value_parser = ["check", "collect", "growth", "shrink"])]
    pub action: String,
    /// `interval`, `gap`, `heisenberg_box`, `heisenberg_normal` or `helfgott`.
    #[arg(long)]
    pub example: Option<String>,
    #[arg(long = "N1")]
    pub n1: Option<i64>,
    #[arg(long = "N2")]
    pub n2: Option<i64>,
    /// Comma-separated integer parameters for the example.
    #[arg(long)]
    pub params: Option<String>,
    /// JSON progression `{"generators": [...], "lengths": [...], "H": set, "C": "p/q"}`.
    #[arg(long)]
    pub progression: Option<String>,
    /// Normal-form constant, overriding the example's.
    #[arg(long = "C")]
    pub c: Option<String>,
    /// Step for the nilpotency check; defaults to the example's.
    #[arg(long)]
    pub step: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub words: usize,
    #[arg(long, default_value_t = 20)]
    pub word_len: usize,
    #[arg(long, default_value_t = 16)]
    pub m_max: usize,
    #[arg(long, default_value_t = 8)]
    pub fit_from: usize,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
}

#[derive(Args, Debug, Serialize)]
pub struct FourierArgs {
    #[arg(value_parser = ["spec", "bogolyubov", "chang", "subgroup", "parseval"])]
    pub action: String,
    /// Spectrum threshold; `bogolyubov` derives the largest admissible one when absent.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Run Bogolyubov even when `δ` misses the hypothesis.
    #[arg(long)]
    pub allow_override: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GrowthArgs {
    #[arg(value_parser = ["profile", "doubling-scale", "isoperimetry", "cosets", "stabilizer"])]
    pub action: String,
    #[arg(long, default_value_t = 10)]
    pub radius: usize,
    /// Set `E` for isoperimetry.
    #[arg(long)]
    pub e: Option<String>,
    /// Comma-separated moduli of a congruence subgroup for `cosets`.
    #[arg(long)]
    pub moduli: Option<String>,
    /// Explicit finite subgroup for `cosets`.
    #[arg(long)]
    pub subgroup: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Growth degree for `doubling-scale`.
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub n_floor: usize,
    /// JSON metric space `{"dist": [[...]], "isometries": [[...]]}` for `stabilizer`.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub point: usize,
    #[arg(long, default_value = "1")]
    pub eps: String,
}

#[derive(Args, Debug, Serialize)]
pub struct LocalArgs {
    #[arg(value_parser = ["cancellative", "word", "quotient", "table"])]
    pub action: String,
    /// Local domain; defaults to `--set`.
    #[arg(long)]
    pub domain: Option<String>,
    /// JSON list of elements for `word`.
    #[arg(long)]
    pub word: Option<String>,
    /// Finite subgroup `H` and set `W` for `quotient`.
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub w: Option<String>,
    /// `inverse-law` or `cancellation` for `table`.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Report written by `analyze` or `sanders`.
    #[arg(long)]
    pub report: PathBuf,
}

/// Report body plus the overall verdict.
struct Outcome {
    pass: bool,
    result: Value,
    table: Option<Table>,
}

impl Outcome {
    fn new(pass: bool, result: Value) -> Self {
        Outcome { pass, result, table: None }
    }

    fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }
}

/// Parse `argv` (including the program name), run, and return the exit code:
/// 0 on success, 1 when a check fails, 2 on usage or input errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.global.threads {
        // A second build in the same process fails harmlessly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(pass) => {
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Verification(_) => 1,
        _ => 2,
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Analyze => analyze(g)?,
        Command::Sanders(a) => sanders_cmd(g, a)?,
        Command::Gleason(a) => gleason_cmd(g, a)?,
        Command::BkMetric(a) => bk_cmd(g, a)?,
        Command::Nilprog(a) => nilprog_cmd(g, a)?,
        Command::Fourier(a) => fourier_cmd(g, a)?,
        Command::Growth(a) => growth_cmd(g, a)?,
        Command::Local(a) => local_cmd(g, a)?,
        Command::Verify(a) => verify_cmd(g, a)?,
    };
    let scenario = serde_json::to_value(cli).expect("arguments serialize");
    write_json(&envelope(scenario, outcome.pass, outcome.result), g.out.as_deref())?;
    match (&g.csv, &outcome.table) {
        (Some(p), Some(t)) => t.write(Some(p))?,
        (Some(_), None) => eprintln!("note: this subcommand produces no table; --csv ignored"),
        _ => {}
    }
    Ok(outcome.pass)
}

fn missing(flag: &str) -> Error {
    Error::Hypothesis(format!("{flag} is required"))
}

fn context(g: &Global) -> Result<Ctx> {
    let group = parse_group(g.group.as_deref().ok_or_else(|| missing("--group"))?)?;
    Ok(Ctx::global(group).with_max_set(g.budget_max_set))
}

fn build_set(ctx: &Ctx, text: &str) -> Result<ElementSet> {
    parse_set(text)?.build(ctx)
}

fn main_set(ctx: &Ctx, g: &Global) -> Result<ElementSet> {
    build_set(ctx, g.set.as_deref().ok_or_else(|| missing("--set"))?)
}

fn ratio_u64(text: &str) -> Result<Ratio<u64>> {
    parse_ratio(text)
}

fn ratio_i64(text: &str) -> Result<Ratio<i64>> {
    let r = parse_ratio(text)?;
    Ok(Ratio::new(*r.numer() as i64, *r.denom() as i64))
}

fn int_list(text: &str) -> Result<Vec<i64>> {
    let mut col = 1;
    let mut out = Vec::new();
    for part in text.split(',') {
        out.push(part.trim().parse::<i64>().map_err(|_| Error::Descriptor {
            msg: format!("expected an integer, found {part:?}"),
            col,
        })?);
        col += part.chars().count() + 1;
    }
    Ok(out)
}

fn elems_json(g: &Group, xs: &[Elem]) -> Value {
    Value::Array(xs.iter().map(|x| g.elem_to_json(x)).collect())
}

/// `{id} ∪ U ∪ U^-1` for the coordinate unit vectors `U`, when the identity is the zero vector.
fn standard_generating_set(ctx: &Ctx) -> Result<ElementSet> {
    let g = &ctx.group;
    if g.identity().iter().any(|&c| c != 0) {
        return Err(Error::Hypothesis(format!("{g} has no standard generating set; pass --set")));
    }
    let gens: Vec<Elem> = (0..g.width())
        .map(|i| {
            let mut e = vec![0; g.width()];
            e[i] = 1;
            g.reduce(&e)
        })
        .collect::<Result<_>>()?;
    crate::catalogue::word_ball(ctx, &gens, 1)
}

fn generating_set(ctx: &Ctx, g: &Global) -> Result<ElementSet> {
    match &g.set {
        Some(s) => build_set(ctx, s),
        None => standard_generating_set(ctx),
    }
}

fn analyze(g: &Global) -> Result<Outcome> {
    let ctx = context(g)?;
    let a = main_set(&ctx, g)?;
    let stats = setops::doubling_stats(&ctx, &a)?;
    let symmetric = setops::is_symmetric(&ctx, &a)? && a.contains(&ctx.identity());
    let target = if symmetric { a.clone() } else { setops::symmetrize(&ctx, &a)? };
    let gr = &ctx.group;
    let witness = setops::approx_group_witness(&ctx, &target, g.budget_k_max)?;
    let (pass, w) = match witness {
        Some(w) => {
            let a2 = product_set(&ctx, &target, &target)?;
            setops::verify_witness(&ctx, &target, &a2, &w.x, w.k)?;
            (true, json!({"K": w.k, "X": w.x.to_json(gr), "method": w.method, "verified": true}))
        }
        None => (false, Value::Null),
    };
    let result = json!({
        "group": gr.to_json(),
        "set_size": a.len(),
        "doubling": stats,
        "symmetric_with_identity": symmetric,
        "approximate_group": {
            "symmetrized": !symmetric,
            "size": target.len(),
            "witness": w,
            "k_max": g.budget_k_max,
        },
    });
    Ok(Outcome::new(pass, result))
}

fn sanders_cmd(g: &Global, args: &SandersArgs) -> Result<Outcome> {
    let ctx = context(g)?;
    let a = main_set(&ctx, g)?;
    let strategy: Strategy = args.strategy.parse()?;
    let cert = sanders::sanders_small_neighbourhood(&ctx, &a, args.m, strategy)?;
    let checks = sanders::verify_certificate(&ctx, &a, &cert)?;
    let mut result = json!({
        "group": ctx.group.to_json(),
        "set_size": a.len(),
        "certificate": cert.to_json(&ctx, a.len()),
        "recheck": checks,
    });
    let mut pass = true;
    if args.normal {
        let normal = sanders::sanders_normal(&ctx, &a, &cert.s, args.m, strategy)?;
        pass &= normal.verified;
        result["normal"] = normal.to_json(&ctx, cert.s.len());
    }
    Ok(Outcome::new(pass, result))
}

fn gleason_cmd(g: &Global, args: &GleasonArgs) -> Result<Outcome> {
    let ctx = context(g)?;
    let a = main_set(&ctx, g)?;
    let s = build_set(&ctx, &args.core)?;
    let params = match args.regime.as_str() {
        "paper" => StrongApproxParams::paper(args.k),
        _ => StrongApproxParams::desk(args.m1, args.m2, args.m3, args.env),
    };
    let id = ctx.identity();
    let default_shift = || {
        a.iter().find(|x| **x != id).cloned().ok_or_else(|| Error::Hypothesis("A has no non-identity element".into()))
    };
    let shift = |t: &Option<String>| -> Result<Elem> {
        match t {
            Some(t) => parse_elem(&ctx.group, t),
            None => default_shift(),
        }
    };
    let (sg, sh) = (shift(&args.shift_g)?, shift(&args.shift_h)?);
    let eps = ratio_i64(&args.eps)?;
    let eps = Ratio::new(*eps.numer() as i128, *eps.denom() as i128);
    let suite = gleason::gleason_suite(&ctx, &a, &s, params, eps, args.n_psi, (&sg, &sh), args.taylor_n)?;
    let opts = GleasonOptions {
        envelope_power: args.envelope,
        sample_budget: args.sample_budget,
        word_len: args.word_len,
        words: args.words,
        seed: g.seed,
    };
    let report = gleason::gleason_verify(&ctx, &a, opts)?;
    let cap = 4 * a.len();
    let norms: Vec<Value> = [&sg, &sh]
        .iter()
        .map(|x| {
            let n = gleason::escape_norm(&ctx, &a, x, cap)?;
            Ok(json!({"element": ctx.group.elem_to_json(x), "norm": n}))
        })
        .collect::<Result<_>>()?;
    let pass = suite.pass() && report.conj_bound_holds() && report.finite();
    Ok(Outcome::new(
        pass,
        json!({
            "params": params,
            "set_size": a.len(),
            "core_size": s.len(),
            "shifts": elems_json(&ctx.group, &[sg.clone(), sh.clone()]),
            "shift_norms": norms,
            "suite": suite.to_json(),
            "constants": report.to_json(),
        }),
    ))
}

fn bk_cmd(g: &Global, args: &BkArgs) -> Result<Outcome> {
    let ctx = context(g)?;
    let sets = parse_chain(&args.chain)?.build(&ctx)?;
    let mode = if args.mode == "normal" { Nesting::Normal } else { Nesting::Plain };
    let chain = NestedChain::new(&ctx, sets, mode, args.normal_power)?;
    let pm = metric::bk_build(&ctx, &chain)?;
    let inclusions = metric::bk_verify_inclusions(&ctx, &chain, &pm, args.envelope)?;
    let mut pass = inclusions.pass;
    let mut table = Table::new(&["level", "ball_size", "set_size", "ball_inside", "set_inside"]);
    for l in &inclusions.levels {
        table.push(vec![
            l.level.to_string(),
            l.ball_size.to_string(),
            l.set_size.to_string(),
            l.ball_inside.pass.to_string(),
            l.set_inside.pass.to_string(),
        ]);
    }
    let continuity = if mode == Nesting::Normal && args.probes > 0 {
        let c = metric::bk_continuity_probe(&ctx, &chain, &pm, args.probes, g.seed)?;
        pass &= c.pass;
        serde_json::to_value(&c).expect("serializable")
    } else {
        Value::Null
    };
    Ok(Outcome::new(
        pass,
        json!({
            "chain": chain.to_json(&ctx),
            "inclusions": inclusions,
            "continuity": continuity,
        }),
    )
    .with_table(table))
}

fn progression(g: &Global, args: &NilprogArgs) -> Result<(Ctx, ProgressionSpec, Vec<String>, bool)> {
    let (ctx, mut spec, warnings) = match (&args.example, &args.progression) {
        (Some(name), None) => {
            let params = match (&args.params, args.n1, args.n2) {
                (Some(p), _, _) => int_list(p)?,
                (None, Some(a), Some(b)) => vec![a, b],
                (None, Some(a), None) => vec![a],
                _ => return Err(missing("--N1/--N2 or --params")),
            };
            let ex = nilprog::standard_example(name, &params)?;
            (ex.ctx.with_max_set(g.budget_max_set), ex.spec, ex.warnings)
        }
        (None, Some(p)) => {
            let ctx = context(g)?;
            let spec = parse_progression(p)?.build(&ctx)?;
            (ctx, spec, vec![])
        }
        _ => return Err(Error::Hypothesis("give exactly one of --example and --progression".into())),
    };
    if let Some(c) = &args.c {
        spec.c = Some(ratio_i64(c)?);
    }
    let has_c = spec.c.is_some();
    if let Some(s) = args.step {
        spec.step = Some(s);
    }
    Ok((ctx, spec, warnings, has_c))
}

fn nilprog_cmd(g: &Global, args: &NilprogArgs) -> Result<Outcome> {
    let (ctx, mut spec, warnings, has_c) = progression(g, args)?;
    let gr = ctx.group.clone();
    let base = json!({"progression": spec.to_json(&gr), "warnings": warnings});
    let mut out = match args.action.as_str() {
        "check" => {
            let step = spec.step.unwrap_or(spec.rank());
            let nil = nilprog::check_nilprogression(&ctx, &spec, step)?;
            // Without a constant the normal-form report is informational.
            if !has_c {
                spec.c = Some(Ratio::from_integer(1));
            }
            let nf = nilprog::check_normal_form(&ctx, &spec)?;
            let pass = nil.clause.pass && (!has_c || nf.pass);
            Outcome::new(pass, json!({"nilpotency": nil, "normal_form": nf, "normal_form_binding": has_c}))
        }
        "collect" => {
            // a word of length L uses each generator at most L times up front
            let collector = Collector::new(&ctx, &spec, (args.word_len as u64).max(8))?;
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let hs: Vec<Elem> = spec.h.as_ref().map(|h| h.to_vec()).unwrap_or_default();
            let (mut mismatches, mut first, mut max_steps) = (0usize, Value::Null, 0usize);
            for _ in 0..args.words {
                let word: Vec<Letter> = (0..args.word_len)
                    .map(|_| {
                        if !hs.is_empty() && rng.gen_range(0..4) == 0 {
                            Letter::Sub(hs[rng.gen_range(0..hs.len())].clone())
                        } else {
                            Letter::Gen(rng.gen_range(0..spec.rank()), if rng.gen() { 1 } else { -1 })
                        }
                    })
                    .collect();
                let c = collector.collect(&word)?;
                max_steps = max_steps.max(c.steps);
                let mut v = ctx.identity();
                for (u, &e) in spec.generators.iter().zip(&c.exponents) {
                    v = ctx.mul(&v, &gr.pow(u, e)?)?;
                }
                v = ctx.mul(&v, &c.h)?;
                if v != collector.evaluate(&word)? {
                    mismatches += 1;
                    if first.is_null() {
                        first = json!(format!("{word:?}"));
                    }
                }
            }
            Outcome::new(
                mismatches == 0,
                json!({"words": args.words, "word_len": args.word_len, "mismatches": mismatches,
                       "first_mismatch": first, "max_steps": max_steps}),
            )
        }
        "growth" => {
            let t = nilprog::nilprog_growth(&ctx, &spec, args.m_max, args.fit_from)?;
            let mut table = Table::new(&["m", "size"]);
            for (m, s) in &t.sizes {
                table.push(vec![m.to_string(), s.to_string()]);
            }
            Outcome::new(true, json!({"growth": t})).with_table(table)
        }
        _ => {
            let r = nilprog::shrink_and_verify(&ctx, &spec, ratio_i64(&args.eps)?, g.budget_k_max)?;
            Outcome::new(r.witness_k.is_some(), json!({"shrink": r}))
        }
    };
    let mut result = base;
    for (k, v) in out.result.as_object().expect("object").clone() {
        result[k] = v;
    }
    out.result = result;
    Ok(out)
}

/// `A + A + … + A` (`k` summands).
fn iterated_sum(ctx: &Ctx, a: &ElementSet, k: usize) -> Result<ElementSet> {
    let mut s = a.clone();
    for _ in 1..k {
        s = product_set(ctx, &s, a)?;
    }
    Ok(s)
}

fn fourier_cmd(g: &Global, args: &FourierArgs) -> Result<Outcome> {
    let ctx = context(g)?;
    let a = main_set(&ctx, g)?;
    let delta = |default: &str| ratio_u64(args.delta.as_deref().unwrap_or(default));
    let out = match args.action.as_str() {
        "spec" => {
            let r = fourier::spectrum(&ctx, &a, delta("1/2")?)?;
            Outcome::new(true, r.to_json())
        }
        "bogolyubov" => {
            let d = match &args.delta {
                Some(t) => ratio_u64(t)?,
                None => {
                    let ka = iterated_sum(&ctx, &a, args.k)?;
                    fourier::bogolyubov_delta(a.len(), ka.len(), args.k, 64)
                }
            };
            let r = fourier::bogolyubov_check(&ctx, &a, args.k, d, args.allow_override)?;
            Outcome::new(r.pass, serde_json::to_value(&r).expect("serializable"))
        }
        "chang" => {
            let r = fourier::chang_rank_check(&ctx, &a, delta("1/2")?)?;
            Outcome::new(true, serde_json::to_value(&r).expect("serializable"))
        }
        "subgroup" => {
            let r = fourier::find_subgroup_in_4a(&ctx, &a)?;
            Outcome::new(r.contained, serde_json::to_value(&r).expect("serializable"))
        }
        _ => {
            let r = fourier::parseval_check(&ctx, &a)?;
            let pass = r.exact.unwrap_or(true) && r.float_ok;
            Outcome::new(pass, serde_json::to_value(&r).expect("serializable"))
        }
    };
    Ok(out)
}

fn growth_cmd(g: &Global, args: &GrowthArgs) -> Result<Outcome> {
    if args.action == "stabilizer" {
        return stabilizer(args);
    }
    let ctx = context(g)?;
    let s = generating_set(&ctx, g)?;
    let out = match args.action.as_str() {
        "profile" => {
            let p = growth::ball_sizes(&ctx, &s, args.radius)?;
            let mut table = Table::new(&["r", "size"]);
            for (r, n) in p.sizes.iter().enumerate() {
                table.push(vec![r.to_string(), n.to_string()]);
            }
            Outcome::new(true, json!({"generators": s.len(), "profile": p})).with_table(table)
        }
        "doubling-scale" => {
            let r = growth::find_doubling_scale(&ctx, &s, args.d, args.n, args.n_floor, g.budget_k_max)?;
            Outcome::new(r.is_some(), json!({"scale": r}))
        }
        "isoperimetry" => {
            let e = build_set(&ctx, args.e.as_deref().ok_or_else(|| missing("--e"))?)?;
            let r = growth::isoperimetry_check(&ctx, &s, &e)?;
            Outcome::new(r.pass && r.averaging_pass, serde_json::to_value(&r).expect("serializable"))
        }
        _ => {
            let oracle: Box<dyn SubgroupOracle> = match (&args.moduli, &args.subgroup) {
                (Some(m), None) => Box::new(Congruence { moduli: int_list(m)? }),
                (None, Some(h)) => {
                    let order = ctx.group.order().ok_or_else(|| Error::Hypothesis("explicit subgroups need a finite group".into()))?;
                    Box::new(ExplicitSubgroup { elements: build_set(&ctx, h)?, group_order: order })
                }
                _ => return Err(Error::Hypothesis("give exactly one of --moduli and --subgroup".into())),
            };
            let r = growth::coset_meeting_count(&ctx, &s, oracle.as_ref(), args.k)?;
            Outcome::new(r.pass, serde_json::to_value(&r).expect("serializable"))
        }
    };
    Ok(out)
}

fn stabilizer(args: &GrowthArgs) -> Result<Outcome> {
    let text = args.space.as_deref().ok_or_else(|| missing("--space"))?;
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Descriptor { msg: e.to_string(), col: e.column() })?;
    let bad = || Error::Hypothesis("space needs \"dist\" (integer or \"p/q\" rows) and \"isometries\"".into());
    let dist = v
        .get("dist")
        .and_then(Value::as_array)
        .ok_or_else(bad)?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|x| match x {
                    Value::String(s) => ratio_i64(s),
                    _ => x.as_i64().map(Ratio::from_integer).ok_or_else(bad),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let isos = v
        .get("isometries")
        .and_then(Value::as_array)
        .ok_or_else(bad)?
        .iter()
        .map(|p| {
            p.as_array().ok_or_else(bad)?.iter().map(|i| i.as_u64().map(|i| i as usize).ok_or_else(bad)).collect()
        })
        .collect::<Result<Vec<Vec<usize>>>>()?;
    let space = FiniteMetricSpace::new(dist, isos)?;
    let r = growth::almost_stabilizer(&space, args.point, ratio_i64(&args.eps)?)?;
    Ok(Outcome::new(r.doubling_pass, serde_json::to_value(&r).expect("serializable")))
}

fn local_cmd(g: &Global, args: &LocalArgs) -> Result<Outcome> {
    if args.action == "table" {
        let t = match args.name.as_deref() {
            Some("inverse-law") => local::inverse_law_counterexample(),
            Some("cancellation") => local::cancellation_counterexample(),
            _ => return Err(missing("--name inverse-law|cancellation")),
        };
        let r = local::check_cancellative(&t);
        return Ok(Outcome::new(true, json!({"elements": t.names, "report": r})));
    }
    let global = context(g)?;
    let domain_text = args.domain.as_deref().or(g.set.as_deref()).ok_or_else(|| missing("--domain"))?;
    let domain = build_set(&global, domain_text)?;
    let ctx = Ctx::restrict(global.group.clone(), domain)?.with_max_set(g.budget_max_set);
    let gr = &ctx.group;
    let out = match args.action.as_str() {
        "cancellative" => {
            let r = local::check_cancellative(&ctx);
            Outcome::new(r.cancellative, json!({"domain_size": PartialGroup::domain(&ctx).len(), "report": r}))
        }
        "word" => {
            let text = args.word.as_deref().ok_or_else(|| missing("--word"))?;
            let v: Value = serde_json::from_str(text)
                .map_err(|e| Error::Descriptor { msg: e.to_string(), col: e.column() })?;
            let word: Vec<Elem> = v
                .as_array()
                .ok_or_else(|| Error::Hypothesis("--word must be a JSON list".into()))?
                .iter()
                .map(|x| gr.elem_from_json(x))
                .collect::<Result<_>>()?;
            if let Some(bad) = word.iter().find(|x| !ctx.in_domain(x)) {
                return Err(Error::ContextMismatch(format!("{bad:?} is outside the domain")));
            }
            let value = local::well_defined_product(&ctx, &word);
            Outcome::new(
                true,
                json!({"word": elems_json(gr, &word), "defined": value.is_some(),
                       "value": value.map(|x| gr.elem_to_json(&x))}),
            )
        }
        _ => {
            let h = build_set(&global, args.h.as_deref().ok_or_else(|| missing("--h"))?)?;
            let w = build_set(&global, args.w.as_deref().ok_or_else(|| missing("--w"))?)?;
            let q = local::quotient(&ctx, &h, &w, None)?;
            local::check_projection(&ctx, &w, &q)?;
            let r = local::check_cancellative(&q.table);
            Outcome::new(
                r.cancellative,
                json!({"classes": q.representatives.len(),
                       "representatives": elems_json(gr, &q.representatives),
                       "projection_verified": true, "report": r}),
            )
        }
    };
    Ok(out)
}

fn set_from_report(ctx: &Ctx, v: Option<&Value>, what: &str) -> Result<ElementSet> {
    let xs = v.and_then(Value::as_array).ok_or_else(|| Error::Hypothesis(format!("report lacks {what}")))?;
    xs.iter().map(|x| ctx.group.elem_from_json(x)).collect()
}

fn verify_cmd(g: &Global, args: &VerifyArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.report)
        .map_err(|e| Error::Hypothesis(format!("cannot read {}: {e}", args.report.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Descriptor { msg: e.to_string(), col: e.column() })?;
    let scenario = &doc["scenario"];
    let field = |k: &str| scenario["global"][k].as_str().map(str::to_string);
    let inner = Global {
        group: field("group"),
        set: field("set"),
        out: None,
        csv: None,
        seed: 0,
        threads: None,
        budget_max_set: g.budget_max_set,
        budget_k_max: g.budget_k_max,
    };
    let ctx = context(&inner)?;
    let a = main_set(&ctx, &inner)?;
    let result = &doc["result"];
    match scenario["command"]["command"].as_str() {
        Some("analyze") => {
            let target = if result["symmetric_with_identity"].as_bool() == Some(true) {
                a
            } else {
                setops::symmetrize(&ctx, &a)?
            };
            let w = &result["approximate_group"]["witness"];
            let k = w["K"].as_u64().ok_or_else(|| Error::Hypothesis("report has no witness".into()))? as usize;
            let x = set_from_report(&ctx, w.get("X"), "X")?;
            let a2 = product_set(&ctx, &target, &target)?;
            setops::verify_witness(&ctx, &target, &a2, &x, k)?;
            Ok(Outcome::new(true, json!({"verified": "analyze", "K": k, "X_size": x.len()})))
        }
        Some("sanders") => {
            let cert = &result["certificate"];
            let m = cert["m"].as_u64().ok_or_else(|| Error::Hypothesis("report lacks m".into()))? as usize;
            let s = set_from_report(&ctx, cert.get("S"), "S")?;
            let s0 = set_from_report(&ctx, cert.get("S0"), "S0")?;
            let symmetric = setops::is_symmetric(&ctx, &s)?;
            let identity = s.contains(&ctx.identity());
            let square = product_set(&ctx, &s0, &s0)? == s;
            let a4 = power_set(&ctx, &a, 4)?;
            let contained = power_set(&ctx, &s, m)?.is_subset(&a4);
            let pass = symmetric && identity && square && contained;
            if !pass {
                return Err(Error::Verification(format!(
                    "symmetric {symmetric}, identity {identity}, S = S0² {square}, S^m ⊆ A^4 {contained}"
                )));
            }
            Ok(Outcome::new(
                true,
                json!({"verified": "sanders", "m": m, "S_size": s.len(), "ratio": format!("{}/{}", s.len(), a.len())}),
            ))
        }
        other => Err(Error::Hypothesis(format!("cannot verify reports from {other:?}"))),
    }
}
