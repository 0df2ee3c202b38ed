//! Command-line front end.
//!
//! Every command prints its findings and ends with one line
//! `RESULT <verdict> [value]`. Exit codes: 0 decided, 1 usage error,
//! 2 undecided within the given fuel or budget, 3 premise violation,
//! 4 disagreement between the engine and direct recursion.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::etr::{cross_validate, Engine, Instance, TraceSink};
use crate::fgh::{broken_instance, direct_f, direct_f_u64, fgh_instance, pair_code, BrokenFghPair, FghPair};
use crate::pairing::split_key;
use crate::partialfn::FinitePartialFn;
use crate::predicate::{check_monotone, parity_pair, premise_check, BasePredicatePair, ExplicitFamily, PremiseHolds};
use crate::verdict::{Fuel, Verdict};

pub const EXIT_DECIDED: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;

/// Steps allowed to the direct evaluator when `verify` computes expected values.
const ORACLE_STEPS: u64 = 10_000_000;

#[derive(Debug, Parser)]
#[command(name = "etr", version, about = "Effective transfinite recursion over well orders")]
struct Cli {
    /// Write engine events to this file, one JSON object per line.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Seed for sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Nesting limit for direct recursion.
    #[arg(long, global = true, default_value_t = 64)]
    depth_budget: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Values of the fast-growing hierarchy.
    Fgh {
        #[command(subcommand)]
        command: FghCommand,
    },
    /// Compare the engine against direct recursion.
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
    /// Decide a single membership query `(x, n) ∈ Y`.
    Member {
        #[arg(long, value_enum, default_value_t = InstanceName::Fgh)]
        instance: InstanceName,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
    /// Approximation checks.
    Approx {
        #[command(subcommand)]
        command: ApproxCommand,
    },
    /// Bounded checks of an instance's premise.
    Premise {
        #[command(subcommand)]
        command: PremiseCommand,
    },
    /// Sampled monotonicity checks of base predicates.
    Monotone {
        #[command(subcommand)]
        command: MonotoneCommand,
    },
}

#[derive(Debug, Subcommand)]
enum FghCommand {
    /// Evaluate F_k(m) by the defining clauses.
    Direct {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Find F_k(m) as the r with (k, pair(m, r)) in Y.
    Etr {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        #[arg(long, value_enum, default_value_t = EngineKind::Search)]
        engine: EngineKind,
        #[arg(long, value_enum, default_value_t = InstanceName::Fgh)]
        instance: InstanceName,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Cross-validate on pair(m, F_k(m)) and pair(m, F_k(m) + 1) for every k, m in range.
    Fgh {
        #[arg(long)]
        k_max: u64,
        #[arg(long)]
        m_max: u64,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
}

#[derive(Debug, Subcommand)]
enum ApproxCommand {
    /// Decide whether the function with the given code is an x-approximation.
    Check {
        #[arg(long, value_enum, default_value_t = InstanceName::Fgh)]
        instance: InstanceName,
        #[arg(long)]
        f_code: BigUint,
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
}

#[derive(Debug, Subcommand)]
enum PremiseCommand {
    /// Check the premise at x against the engine's answers below x.
    Check {
        #[arg(long, value_enum, default_value_t = InstanceName::Fgh)]
        instance: InstanceName,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        n_bound: u64,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        /// Payload bound of the computed family below x.
        #[arg(long, default_value_t = 512)]
        z_bound: u64,
    },
}

#[derive(Debug, Subcommand)]
enum MonotoneCommand {
    Check {
        #[arg(long, value_enum, default_value_t = PairName::Fgh)]
        pair: PairName,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineKind {
    /// Membership queries.
    Search,
    /// Approximations built up from the empty function.
    Construct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InstanceName {
    Fgh,
    /// The hierarchy with ψ₀ replaced by φ₀.
    FghBroken,
}

impl InstanceName {
    fn build(self) -> Instance {
        match self {
            InstanceName::Fgh => fgh_instance(),
            InstanceName::FghBroken => broken_instance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairName {
    Fgh,
    FghBroken,
    /// Entry-count parity, which is not monotone.
    Parity,
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    trace: Option<TraceSink>,
    seed: u64,
    depth_budget: u32,
}

impl Ctx<'_> {
    fn engine(&mut self, instance: Instance) -> Engine {
        let engine = Engine::new(instance);
        match self.trace.take() {
            Some(sink) => engine.with_trace(sink),
            None => engine,
        }
    }

    fn done(&mut self, engine: &mut Engine) {
        if let Some(sink) = engine.take_trace() {
            self.trace = Some(sink);
        }
    }

    fn result(&mut self, verdict: &str, value: Option<String>, code: i32) -> Result<i32> {
        match value {
            Some(v) => writeln!(self.out, "RESULT {verdict} {v}"),
            None => writeln!(self.out, "RESULT {verdict}"),
        }
        .ok();
        Ok(code)
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_DECIDED };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let trace = match cli.trace.as_ref().map(TraceSink::create).transpose() {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot open trace file: {e}");
            return EXIT_USAGE;
        }
    };
    let mut ctx = Ctx { out, trace, seed: cli.seed, depth_budget: cli.depth_budget };
    let code = match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(Error::PremiseViolation { x, n, phi_witness, psi_witness }) => {
            let _ = writeln!(ctx.out, "phi witness: {}", phi_witness.encode());
            let _ = writeln!(ctx.out, "psi witness: {}", psi_witness.encode());
            let _ = writeln!(ctx.out, "RESULT violation x={x} n={n}");
            EXIT_VIOLATION
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    };
    if let Some(sink) = ctx.trace.take() {
        if let Err(e) = sink.finish() {
            let _ = writeln!(err, "error: writing trace: {e}");
            return EXIT_USAGE;
        }
    }
    code
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<i32> {
    match command {
        Command::Fgh { command: FghCommand::Direct { k, m, budget } } => fgh_direct(ctx, k, m, budget),
        Command::Fgh { command: FghCommand::Etr { k, m, fuel, engine, instance } } => {
            fgh_etr(ctx, instance.build(), k, m, fuel, engine)
        }
        Command::Verify { command: VerifyCommand::Fgh { k_max, m_max, fuel } } => verify_fgh(ctx, k_max, m_max, fuel),
        Command::Member { instance, x, n, fuel } => member(ctx, instance.build(), x, n, fuel),
        Command::Approx { command: ApproxCommand::Check { instance, f_code, x, fuel } } => {
            approx_check(ctx, instance.build(), &f_code, x, fuel)
        }
        Command::Premise { command: PremiseCommand::Check { instance, x, n_bound, fuel, z_bound } } => {
            premise(ctx, instance.build(), x, n_bound, fuel, z_bound)
        }
        Command::Monotone { command: MonotoneCommand::Check { pair, samples } } => monotone(ctx, pair, samples),
    }
}

fn fgh_direct(ctx: &mut Ctx, k: u64, m: u64, budget: u64) -> Result<i32> {
    match direct_f(k, m, budget) {
        Ok(v) => {
            writeln!(ctx.out, "{v}").ok();
            ctx.result("yes", Some(v.to_string()), EXIT_DECIDED)
        }
        Err(Error::BudgetExhausted { .. }) => {
            writeln!(ctx.out, "BUDGET").ok();
            ctx.result("unknown", Some("BUDGET".into()), EXIT_UNKNOWN)
        }
        Err(e) => Err(e),
    }
}

fn fgh_etr(ctx: &mut Ctx, instance: Instance, k: u64, m: u64, fuel: u64, kind: EngineKind) -> Result<i32> {
    let mut engine = ctx.engine(instance);
    let mut fuel = Fuel::new(fuel);
    let mut r = 0u64;
    let found = loop {
        let Some(n) = pair_code(m, r) else { break None };
        let decision = match kind {
            EngineKind::Search => engine.membership(k, n, &mut fuel)?.decision(),
            EngineKind::Construct => engine.build_approximation(&FinitePartialFn::empty(), k, n, &mut fuel)?.decision(),
        };
        match decision {
            Some(true) => break Some(r),
            Some(false) => r += 1,
            None => break None,
        }
    };
    ctx.done(&mut engine);
    writeln!(ctx.out, "fuel spent: {}", fuel.spent()).ok();
    match found {
        Some(r) => {
            writeln!(ctx.out, "F_{k}({m}) = {r}").ok();
            ctx.result("yes", Some(r.to_string()), EXIT_DECIDED)
        }
        None => {
            writeln!(ctx.out, "undecided at r = {r}").ok();
            ctx.result("unknown", None, EXIT_UNKNOWN)
        }
    }
}

fn member(ctx: &mut Ctx, instance: Instance, x: u64, n: u64, fuel: u64) -> Result<i32> {
    let mut engine = ctx.engine(instance);
    let v = engine.membership(x, n, &mut Fuel::new(fuel));
    ctx.done(&mut engine);
    match v? {
        Verdict::Yes(f) => ctx.result("yes", Some(f.encode().to_string()), EXIT_DECIDED),
        Verdict::No(f) => ctx.result("no", Some(f.encode().to_string()), EXIT_DECIDED),
        Verdict::Unknown => ctx.result("unknown", None, EXIT_UNKNOWN),
    }
}

fn verify_fgh(ctx: &mut Ctx, k_max: u64, m_max: u64, fuel: u64) -> Result<i32> {
    let mut queries = Vec::new();
    let mut expected = Vec::new();
    for k in 0..=k_max {
        for m in 0..=m_max {
            let Some(v) = direct_f_u64(k, m, ORACLE_STEPS) else {
                writeln!(ctx.out, "skipped k={k} m={m}: F_k(m) out of reach").ok();
                continue;
            };
            for (r, member) in [(v, true), (v + 1, false)] {
                if let Some(n) = pair_code(m, r) {
                    queries.push((k, n));
                    expected.push(((k, n), member));
                }
            }
        }
    }
    let report = cross_validate(&fgh_instance(), &queries, fuel, ctx.depth_budget)?;
    let mismatches = report
        .agreements
        .iter()
        .filter(|(x, n, member)| expected.iter().any(|(q, e)| *q == (*x, *n) && e != member))
        .count();
    writeln!(ctx.out, "queries: {}", queries.len()).ok();
    writeln!(ctx.out, "agreements: {}", report.agreements.len()).ok();
    writeln!(ctx.out, "disagreements: {}", report.disagreements.len()).ok();
    writeln!(ctx.out, "undetermined: {}", report.undetermined.len()).ok();
    writeln!(ctx.out, "violations: {}", report.violations.len()).ok();
    writeln!(ctx.out, "oracle mismatches: {mismatches}").ok();
    for d in &report.disagreements {
        writeln!(ctx.out, "disagreement x={} n={} engine={} direct={}", d.x, d.n, d.engine, d.direct).ok();
    }
    let bad = report.disagreements.len() + mismatches;
    if bad > 0 {
        ctx.result("disagree", Some(bad.to_string()), EXIT_DISAGREEMENT)
    } else if !report.violations.is_empty() {
        ctx.result("violation", Some(report.violations.len().to_string()), EXIT_VIOLATION)
    } else {
        ctx.result("agree", Some(report.agreements.len().to_string()), EXIT_DECIDED)
    }
}

fn approx_check(ctx: &mut Ctx, instance: Instance, code: &BigUint, x: u64, fuel: u64) -> Result<i32> {
    let f = FinitePartialFn::decode_big(code);
    writeln!(ctx.out, "f = {f:?}").ok();
    let mut engine = ctx.engine(instance);
    let v = engine.is_x_approximation(&f, x, &mut Fuel::new(fuel));
    ctx.done(&mut engine);
    match v? {
        Verdict::Yes(cert) => ctx.result("yes", Some(cert.witnesses.len().to_string()), EXIT_DECIDED),
        Verdict::No(failure) => {
            writeln!(ctx.out, "{failure:?}").ok();
            ctx.result("no", None, EXIT_DECIDED)
        }
        Verdict::Unknown => ctx.result("unknown", None, EXIT_UNKNOWN),
    }
}

fn premise(ctx: &mut Ctx, instance: Instance, x: u64, n_bound: u64, fuel: u64, z_bound: u64) -> Result<i32> {
    let order = instance.order.clone();
    let pair = instance.pair.clone();
    if !order.contains(x) {
        return Err(Error::NotAMember { x });
    }
    let below: Vec<u64> = (0..x).filter(|y| order.less(*y, x)).collect();
    let mut z = ExplicitFamily::new(below.iter().copied(), z_bound);
    let mut engine = ctx.engine(instance);
    let mut undecided = 0u64;
    for &y in &below {
        for n in 0..z_bound {
            match engine.membership(y, n, &mut Fuel::new(fuel)) {
                Ok(Verdict::Yes(_)) => {
                    z.insert(y, n);
                }
                Ok(Verdict::No(_)) => {}
                Ok(Verdict::Unknown) => undecided += 1,
                Err(e) => {
                    ctx.done(&mut engine);
                    return Err(e);
                }
            }
        }
    }
    ctx.done(&mut engine);
    writeln!(ctx.out, "family below x: {} members", z.len()).ok();
    if undecided > 0 {
        writeln!(ctx.out, "family undecided at {undecided} payloads").ok();
        return ctx.result("unknown", None, EXIT_UNKNOWN);
    }
    match premise_check(&*pair, &order, x, &z, n_bound, &mut Fuel::new(fuel))? {
        Verdict::Yes(PremiseHolds::Verified { payloads }) => ctx.result("yes", Some(payloads.to_string()), EXIT_DECIDED),
        Verdict::Yes(PremiseHolds::Vacuous { counterexample }) => {
            let (y, n) = split_key(counterexample);
            writeln!(ctx.out, "antecedent fails at x={y} n={n}").ok();
            ctx.result("yes", Some("vacuous".into()), EXIT_DECIDED)
        }
        Verdict::No(v) => {
            writeln!(ctx.out, "phi witness: {}", v.phi_witness.encode()).ok();
            writeln!(ctx.out, "psi witness: {}", v.psi_witness.encode()).ok();
            ctx.result("no", Some(format!("n={}", v.n)), EXIT_VIOLATION)
        }
        Verdict::Unknown => ctx.result("unknown", None, EXIT_UNKNOWN),
    }
}

fn monotone(ctx: &mut Ctx, pair: PairName, samples: u64) -> Result<i32> {
    let parity;
    let pair: &dyn BasePredicatePair = match pair {
        PairName::Fgh => &FghPair,
        PairName::FghBroken => &BrokenFghPair,
        PairName::Parity => {
            parity = parity_pair();
            &parity
        }
    };
    match check_monotone(pair, samples, ctx.seed) {
        Verdict::Yes(n) => ctx.result("yes", Some(n.to_string()), EXIT_DECIDED),
        Verdict::No(c) => {
            writeln!(ctx.out, "{:?} fails at n={} x={}: f={:?} g={:?}", c.side, c.n, c.x, c.f, c.g).ok();
            ctx.result("no", None, EXIT_DECIDED)
        }
        Verdict::Unknown => ctx.result("unknown", None, EXIT_UNKNOWN),
    }
}
