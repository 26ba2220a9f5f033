//! Command-line front end: `gen`, `solve`, `verify` and `oracle`.
//!
//! Exit codes: 0 success, 2 unusable input (parse errors, incompatible class,
//! parameters out of range, instance too large), 3 a failed certificate or a
//! failed verification.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    algorithm1_additive, algorithm2_general, envy_cycles, make_envy_free_from_bounded, max_own_value,
    nsw_pipeline_additive, nsw_pipeline_matroid, subadditive_baseline, two_n_squared, Certificate, NswOptions,
    SolveResult,
};
use crate::envy::{bounded_envy, is_ef1, is_envy_free, is_envy_freeable, min_subsidies, EnvyFreeabilityWitness};
use crate::error::{Error, Result};
use crate::model::io::{instance_to_json, load_instance, AnyInstance};
use crate::model::{social_welfare, Allocation, Instance, ItemSet, ValuationClass};
use crate::oracles::{
    brute_nsw_opt, brute_sw_opt, enumerate_envy_freeable, gen_bad_nsw, gen_constant_sum, gen_imposs, gen_random,
    gen_sqrt, gen_tightness, min_total_transfer, min_transfer_at_welfare, NashKey, WelfareKind,
};
use crate::scalar::{sum, ExactScalar, Rational, Scalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fairpay", version, about = "Envy-free allocations with transfer payments")]
pub struct Cli {
    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated instance as JSON.
    Gen(GenArgs),
    /// Run an algorithm and evaluate its certificates.
    Solve(SolveArgs),
    /// Re-check a stored result from scratch.
    Verify(VerifyArgs),
    /// Run a brute-force oracle.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Tightness,
    BadNsw,
    Imposs,
    ConstantSum,
    Sqrt,
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub generator: Generator,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Valuation class for `random`.
    #[arg(long, default_value = "additive")]
    pub class: String,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Baseline,
    Bounded,
    Nsw,
    NswMatroid,
    Alg1,
    Alg2,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alg: Algorithm,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    /// Envy bound of `--base` for `bounded` (default: its actual bounded envy).
    #[arg(long)]
    pub b: Option<String>,
    /// Starting allocation as comma-separated bundle bitmasks, for `bounded`
    /// and `nsw` (default: envy-cycles from scratch, resp. the Nash optimum).
    #[arg(long)]
    pub base: Option<String>,
    /// `--base` came out of an EF1 conversion that may halve Nash welfare.
    #[arg(long)]
    pub ef1_conversion: bool,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Ef,
    Efable,
    Ef1,
    Bounds,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub result: PathBuf,
    #[arg(long, default_value = "ef")]
    pub check: Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    SwOpt,
    NswOpt,
    EnumEfable,
    MinTransfer,
    MinTransferAtWelfare,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub task: Task,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, default_value = "sw")]
    pub welfare: String,
    /// Allocation for `min-transfer`, as comma-separated bundle bitmasks.
    #[arg(long)]
    pub allocation: Option<String>,
    /// Take the `min-transfer` allocation from a stored report.
    #[arg(short, long)]
    pub result: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub agents: usize,
    pub items: usize,
    pub class: ValuationClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub algorithm: AlgorithmJson,
    /// Bundle bitmasks, one per agent.
    pub allocation: Vec<String>,
    pub subsidies: Vec<String>,
    pub transfers: Vec<String>,
    pub total_transfer: String,
    pub sw: String,
    pub nash_product: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_mean: Option<f64>,
    pub utilities: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
    pub approx: bool,
    #[serde(default)]
    pub advisory: bool,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            name: c.name.clone(),
            lhs: c.lhs.clone(),
            rhs: c.rhs.clone(),
            holds: c.holds,
            approx: c.approx,
            advisory: c.advisory,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceSummary,
    pub result: ResultJson,
    pub certificates: Vec<CertificateJson>,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn from_result<T: Scalar>(inst: &Instance<T>, r: &SolveResult<T>, b: Option<&T>, timing_ms: u64) -> Self {
        let strings = |v: &[T]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        RunReport {
            instance: summary(inst),
            result: ResultJson {
                algorithm: AlgorithmJson {
                    name: r.algorithm.name.to_string(),
                    alpha: r.algorithm.alpha.as_ref().map(|a| a.to_string()),
                    rho: r.algorithm.rho.as_ref().map(|a| a.to_string()),
                    b: b.map(|x| x.to_string()),
                },
                allocation: bitmasks(&r.allocation),
                subsidies: strings(r.subsidies.values()),
                transfers: strings(r.transfers.values()),
                total_transfer: r.total_transfer().to_string(),
                sw: r.report.sw.to_string(),
                nash_product: r.report.nash_product.as_ref().map(|p| p.to_string()),
                rho_mean: r.report.rho_mean,
                utilities: strings(&r.report.utilities),
            },
            certificates: r.certificates.iter().map(CertificateJson::from).collect(),
            timing_ms,
        }
    }

    pub fn all_hold(&self) -> bool {
        self.certificates.iter().all(|c| c.holds || c.advisory)
    }
}

fn summary<T: Scalar>(inst: &Instance<T>) -> InstanceSummary {
    InstanceSummary {
        agents: inst.agents(),
        items: inst.items(),
        class: inst.class(),
    }
}

fn bitmasks(a: &Allocation) -> Vec<String> {
    a.bundles().iter().map(|b| b.bits().to_string()).collect()
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::GuaranteeViolated(_) => EXIT_FAILED,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// What a command printed and the exit code it asks for.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `args` (including the program name) and run the command.
pub fn run_from_args<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                code: EXIT_INPUT,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let mut out = Outcome {
        code: EXIT_OK,
        stdout: String::new(),
        stderr: String::new(),
    };
    let res = pool.install(|| match &cli.command {
        Command::Gen(a) => cmd_gen(a, &mut out),
        Command::Solve(a) => cmd_solve(a, &mut out),
        Command::Verify(a) => cmd_verify(a, &mut out),
        Command::Oracle(a) => cmd_oracle(a, &mut out),
    });
    if let Err(e) = res {
        out.code = e.code;
        out.stderr.push_str(&format!("error: {}\n", e.message));
    }
    out
}

fn parse_rational(what: &str, s: &str) -> CliResult<Rational> {
    Rational::parse_exact(s).ok_or_else(|| CliError::input(format!("cannot parse {what} {s:?} as a rational")))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut Outcome) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            out.stdout.push_str(text);
            out.stdout.push('\n');
            Ok(())
        }
    }
}

fn to_json<S: Serialize>(v: &S) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn load(path: &Path) -> CliResult<AnyInstance> {
    Ok(load_instance(&read(path)?)?)
}

/// Comma-separated decimal bundle bitmasks, one per agent.
pub fn parse_allocation(text: &str, agents: usize, items: usize) -> Result<Allocation> {
    let bundles = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map(ItemSet)
                .map_err(|_| Error::Parse(format!("bad bundle bitmask {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    allocation_from_bundles(bundles, agents, items)
}

fn allocation_from_bundles(bundles: Vec<ItemSet>, agents: usize, items: usize) -> Result<Allocation> {
    if bundles.len() != agents {
        return Err(Error::InvalidAllocation(format!(
            "{} bundles for {agents} agents",
            bundles.len()
        )));
    }
    let a = Allocation::new(items, bundles)?;
    Ok(a)
}

// ---------------------------------------------------------------- gen

fn cmd_gen(a: &GenArgs, out: &mut Outcome) -> CliResult<()> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::input(format!("{flag} is required")));
    let eps = || -> CliResult<Rational> {
        let s = a.eps.as_deref().ok_or_else(|| CliError::input("--eps is required"))?;
        parse_rational("--eps", s)
    };
    let json = match a.generator {
        Generator::Tightness => instance_to_json(&gen_tightness::<Rational>(need(a.n, "--n")?)?),
        Generator::BadNsw => instance_to_json(&gen_bad_nsw::<Rational>(&eps()?)?),
        Generator::Imposs => instance_to_json(&gen_imposs::<Rational>(need(a.n, "--n")?, need(a.m, "--m")?, &eps()?)?),
        Generator::ConstantSum => {
            let n = need(a.n, "--n")?;
            instance_to_json(&gen_constant_sum::<Rational>(n, a.m.unwrap_or(n))?)
        }
        Generator::Sqrt => instance_to_json(&gen_sqrt(need(a.m, "--m")?)?),
        Generator::Random => {
            let seed = a.seed.ok_or_else(|| CliError::input("--seed is required for random instances"))?;
            let class: ValuationClass = a.class.parse().map_err(CliError::input)?;
            instance_to_json(&gen_random::<Rational>(need(a.n, "--n")?, need(a.m, "--m")?, class, seed)?)
        }
    };
    write_or_print(a.out.as_deref(), &json, out)?;
    if let Some(p) = &a.out {
        let inst = load_instance(&json)?;
        out.stdout.push_str(&format!(
            "wrote {} agents, {} items, class {} to {}\n",
            inst.agents(),
            inst.items(),
            inst.class().name(),
            p.display()
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------- solve

fn cmd_solve(a: &SolveArgs, out: &mut Outcome) -> CliResult<()> {
    let report = match load(&a.input)? {
        AnyInstance::Rational(i) => solve_typed(&i, a)?,
        AnyInstance::Surd(i) => solve_typed(&i, a)?,
    };
    write_or_print(a.out.as_deref(), &to_json(&report), out)?;
    let failing: Vec<&CertificateJson> = report.certificates.iter().filter(|c| !c.holds && !c.advisory).collect();
    if failing.is_empty() {
        if a.out.is_some() {
            out.stdout.push_str(&format!(
                "{}: total transfer {}, {} certificates hold\n",
                report.result.algorithm.name,
                report.result.total_transfer,
                report.certificates.len()
            ));
        }
    } else {
        out.code = EXIT_FAILED;
        for c in failing {
            out.stderr.push_str(&format!("certificate failed: {} ({} vs {})\n", c.name, c.lhs, c.rhs));
        }
    }
    Ok(())
}

/// Run the requested algorithm and package its result.
pub fn solve_typed<T: ExactScalar>(inst: &Instance<T>, a: &SolveArgs) -> CliResult<RunReport> {
    let alpha = a.alpha.as_deref().map(|s| parse_rational("--alpha", s)).transpose()?;
    let rho = a.rho.as_deref().map(|s| parse_rational("--rho", s)).transpose()?;
    let base = a
        .base
        .as_deref()
        .map(|s| parse_allocation(s, inst.agents(), inst.items()))
        .transpose()?;
    let start = Instant::now();
    let mut b_used = None;
    let r = match a.alg {
        Algorithm::Baseline => subadditive_baseline(inst, rho.as_ref())?,
        Algorithm::Bounded => {
            let base = match base {
                Some(b) => b,
                None => envy_cycles(inst, inst.all_items(), &Allocation::empty(inst.agents(), inst.items()))?,
            };
            let b = match a.b.as_deref() {
                Some(s) => T::parse_exact(s).ok_or_else(|| CliError::input(format!("cannot parse --b {s:?}")))?,
                None => bounded_envy(inst, &base),
            };
            let r = make_envy_free_from_bounded(inst, &base, &b)?;
            b_used = Some(b);
            r
        }
        Algorithm::Nsw => {
            let opts = NswOptions {
                input: base,
                alpha,
                ef1_conversion: a.ef1_conversion,
            };
            nsw_pipeline_additive(inst, &opts)?
        }
        Algorithm::NswMatroid => nsw_pipeline_matroid(inst)?,
        Algorithm::Alg1 => {
            algorithm1_additive(inst, &alpha.unwrap_or_else(|| Rational::from_integer(1.into())))?
        }
        Algorithm::Alg2 => {
            algorithm2_general(inst, &alpha.unwrap_or_else(|| Rational::new(1.into(), 3.into())))?
        }
    };
    let ms = start.elapsed().as_millis() as u64;
    Ok(RunReport::from_result(inst, &r, b_used.as_ref(), ms))
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Serialize)]
struct VerifyReport {
    check: Check,
    ok: bool,
    failures: Vec<String>,
}

fn cmd_verify(a: &VerifyArgs, out: &mut Outcome) -> CliResult<()> {
    let inst = load(&a.input)?;
    let text = read(&a.result)?;
    let report: RunReport =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("cannot parse result: {e}")))?;
    let failures = match &inst {
        AnyInstance::Rational(i) => verify_typed(i, &report.result, a.check)?,
        AnyInstance::Surd(i) => verify_typed(i, &report.result, a.check)?,
    };
    let v = VerifyReport {
        check: a.check,
        ok: failures.is_empty(),
        failures,
    };
    out.stdout.push_str(&to_json(&v));
    out.stdout.push('\n');
    if !v.ok {
        out.code = EXIT_FAILED;
        for f in &v.failures {
            out.stderr.push_str(&format!("verify failed: {f}\n"));
        }
    }
    Ok(())
}

/// Re-derive the requested property from the raw allocation and payments;
/// stored certificates are never consulted. Returns the failures found.
pub fn verify_typed<T: ExactScalar>(inst: &Instance<T>, r: &ResultJson, check: Check) -> CliResult<Vec<String>> {
    let mut failures = Vec::new();
    let (n, m) = (inst.agents(), inst.items());
    let bundles = r
        .allocation
        .iter()
        .map(|s| s.parse::<u64>().map(ItemSet))
        .collect::<std::result::Result<Vec<_>, _>>();
    let alloc = match bundles
        .map_err(|e| Error::Parse(e.to_string()))
        .and_then(|b| allocation_from_bundles(b, n, m))
    {
        Ok(a) => a,
        Err(e) => return Ok(vec![format!("allocation does not fit the instance: {e}")]),
    };
    let parse_vec = |what: &str, v: &[String]| -> std::result::Result<Vec<T>, String> {
        if v.len() != n {
            return Err(format!("{what} has {} entries for {n} agents", v.len()));
        }
        v.iter()
            .map(|s| T::parse_exact(s).ok_or_else(|| format!("{what} entry {s:?} is not an exact number")))
            .collect()
    };
    let (subsidies, transfers) = match (parse_vec("subsidies", &r.subsidies), parse_vec("transfers", &r.transfers)) {
        (Ok(s), Ok(t)) => (s, t),
        (s, t) => {
            failures.extend(s.err());
            failures.extend(t.err());
            return Ok(failures);
        }
    };

    // Payment integrity: Σt = 0, t = s − s̄, s equals the minimal subsidies.
    let total: T = sum(transfers.iter().cloned());
    if !total.is_zero() {
        failures.push(format!("transfers sum to {total}, not 0"));
    }
    let mean = sum(subsidies.iter().cloned()) / T::from_int(n as i64);
    for i in 0..n {
        let expect = subsidies[i].clone() - mean.clone();
        if expect != transfers[i] {
            failures.push(format!(
                "agent {i}: transfer {} differs from subsidy minus mean subsidy {expect}",
                transfers[i]
            ));
        }
    }
    match min_subsidies(inst, &alloc) {
        Ok(s) => {
            for i in 0..n {
                if s.values()[i] != subsidies[i] {
                    failures.push(format!(
                        "agent {i}: stored subsidy {} differs from minimal subsidy {}",
                        subsidies[i],
                        s.values()[i]
                    ));
                }
            }
        }
        Err(e) => failures.push(e.to_string()),
    }

    match check {
        Check::Ef => {
            let (ok, worst) = is_envy_free(inst, &alloc, &transfers);
            if !ok {
                if let Some(w) = worst {
                    failures.push(format!(
                        "agent {} envies agent {} by {} under the stored transfers",
                        w.envious, w.envied, w.amount
                    ));
                }
            }
        }
        Check::Efable => {
            let cert = is_envy_freeable(inst, &alloc);
            if let EnvyFreeabilityWitness::Cycle(c) = cert.witness {
                failures.push(format!("positive-weight cycle {:?} of weight {}", c.agents, c.weight));
            }
        }
        Check::Ef1 => {
            if !is_ef1(inst, &alloc) {
                failures.push("allocation is not EF1".into());
            }
        }
        Check::Bounds => failures.extend(check_bounds(inst, &alloc, r, &transfers)?),
    }
    Ok(failures)
}

fn check_bounds<T: ExactScalar>(
    inst: &Instance<T>,
    alloc: &Allocation,
    r: &ResultJson,
    transfers: &[T],
) -> CliResult<Vec<String>> {
    let n = inst.agents();
    let total: T = sum(transfers.iter().map(|t| t.abs_val()));
    let alpha = r
        .algorithm
        .alpha
        .as_deref()
        .map(|s| parse_rational("alpha", s))
        .transpose()?;
    let alpha_t = || -> CliResult<T> {
        alpha
            .as_ref()
            .map(T::from_rational)
            .ok_or_else(|| CliError::input(format!("{} result lacks alpha", r.algorithm.name)))
    };
    let mut failures = Vec::new();
    let mut at_most = |name: &str, lhs: &T, rhs: &T| {
        if !rhs.ge_loose(lhs) {
            failures.push(format!("{name}: {lhs} > {rhs}"));
        }
    };
    let sw = social_welfare(inst, alloc, None);
    match r.algorithm.name.as_str() {
        "baseline" | "nsw" | "nsw-matroid" => at_most("total_transfer <= 2n^2", &total, &two_n_squared(n)),
        "bounded" => {
            let b = r
                .algorithm
                .b
                .as_deref()
                .and_then(T::parse_exact)
                .ok_or_else(|| CliError::input("bounded result lacks b"))?;
            at_most("total_transfer <= 2*b*n^2", &total, &(b * two_n_squared::<T>(n)));
        }
        "alg1" | "alg2" => {
            let a = alpha_t()?;
            let opt = brute_sw_opt(inst)?;
            let big = max_own_value(inst, &opt);
            let bound = if r.algorithm.name == "alg1" {
                T::from_int(n as i64) * (a.clone() * big + T::from_int(2))
            } else {
                two_n_squared::<T>(n) * (T::from_int(3) * a.clone() * big + T::from_int(2))
            };
            at_most("total_transfer <= bound", &total, &bound);
            at_most("alpha*sw_opt <= sw", &(a * social_welfare(inst, &opt, None)), &sw);
        }
        other => {
            return Err(CliError::input(format!("unknown algorithm {other:?} in result")));
        }
    }
    Ok(failures)
}

// ---------------------------------------------------------------- oracle

fn cmd_oracle(a: &OracleArgs, out: &mut Outcome) -> CliResult<()> {
    let value = match load(&a.input)? {
        AnyInstance::Rational(i) => oracle_typed(&i, a)?,
        AnyInstance::Surd(i) => oracle_typed(&i, a)?,
    };
    write_or_print(a.out.as_deref(), &to_json(&value), out)
}

/// Run one oracle task; the result as a JSON value with exact strings.
pub fn oracle_typed<T: ExactScalar>(inst: &Instance<T>, a: &OracleArgs) -> CliResult<serde_json::Value> {
    use serde_json::json;
    let task = a.task.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    Ok(match a.task {
        Task::SwOpt => {
            let opt = brute_sw_opt(inst)?;
            json!({"task": task, "allocation": bitmasks(&opt), "sw": social_welfare(inst, &opt, None).to_string()})
        }
        Task::NswOpt => {
            let opt = brute_nsw_opt(inst)?;
            let u: Vec<T> = (0..inst.agents()).map(|i| inst.value(i, opt.bundle(i))).collect();
            let key = NashKey::of(&u);
            json!({
                "task": task,
                "allocation": bitmasks(&opt),
                "nash_product": key.nash_product(inst.agents()).to_string(),
                "positive_agents": key.positive,
            })
        }
        Task::EnumEfable => {
            let all = enumerate_envy_freeable(inst)?;
            let list: Vec<Vec<String>> = all.iter().map(bitmasks).collect();
            json!({"task": task, "count": all.len(), "allocations": list})
        }
        Task::MinTransfer => {
            let alloc = match (&a.allocation, &a.result) {
                (Some(s), _) => parse_allocation(s, inst.agents(), inst.items())?,
                (None, Some(p)) => {
                    let report: RunReport = serde_json::from_str(&read(p)?)
                        .map_err(|e| CliError::input(format!("cannot parse result: {e}")))?;
                    parse_allocation(&report.result.allocation.join(","), inst.agents(), inst.items())?
                }
                (None, None) => return Err(CliError::input("min-transfer needs --allocation or --result")),
            };
            let opt = min_total_transfer(inst, &alloc)?;
            json!({
                "task": task,
                "allocation": bitmasks(&alloc),
                "transfers": opt.transfers.values().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                "total": opt.total.to_string(),
            })
        }
        Task::MinTransferAtWelfare => {
            let alpha = parse_rational(
                "--alpha",
                a.alpha.as_deref().ok_or_else(|| CliError::input("--alpha is required"))?,
            )?;
            let kind: WelfareKind = a.welfare.parse()?;
            match min_transfer_at_welfare(inst, &alpha, kind)? {
                Some(w) => json!({
                    "task": task,
                    "alpha": alpha.to_string(),
                    "welfare": kind,
                    "feasible": true,
                    "value": w.total.to_string(),
                    "allocation": bitmasks(&w.allocation),
                    "transfers": w.transfers.values().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                }),
                None => json!({
                    "task": task,
                    "alpha": alpha.to_string(),
                    "welfare": kind,
                    "feasible": false,
                    "value": null,
                }),
            }
        }
    })
}
