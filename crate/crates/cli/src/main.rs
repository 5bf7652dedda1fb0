//! `symext` command-line front end.
//!
//! Exit codes: 0 success, 1 bad input, 2 numerical failure, 3 a monogamy
//! counterexample was found.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symext::cglmp::{cglmp_max, correlated_qutrit_pair, DEFAULT_CGLMP_RESTARTS};
use symext::io::{self, RunManifest, ScanCsv, State, StateFile};
use symext::monogamy::{self, GammaFamily, DEFAULT_GAMMA_POINTS, DEFAULT_SCAN_STATES};
use symext::qubit::{self, chen_criterion, chsh_direct, chsh_value, DEFAULT_CHSH_RESTARTS};
use symext::sampling::stream_rng;
use symext::symmetric::{eigenidentity_check, rdm_from_dicke, theorem1_check, DickeState};
use symext::tolerance;
use symext::{DensityMatrix, Error, C64};

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_COUNTEREXAMPLE: u8 = 3;

#[derive(Parser)]
#[command(name = "symext", version, about = "Bell-inequality tests for symmetric extendibility")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CHSH value of a two-qubit state.
    #[command(subcommand)]
    Chsh(ChshCommand),
    /// Two-qubit symmetric extendibility test.
    Chen { state: PathBuf },
    /// Non-extendibility verdict.
    Verdict {
        kind: VerdictKind,
        state: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CGLMP_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Two-qubit marginals of symmetric multiqubit states.
    #[command(subcommand)]
    Dicke(DickeCommand),
    /// CGLMP value of a two-qutrit state.
    #[command(subcommand)]
    Cglmp(CglmpCommand),
    /// Three-qutrit monogamy scans.
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Write a reference state file.
    #[command(subcommand)]
    State(StateCommand),
}

#[derive(Subcommand)]
enum ChshCommand {
    /// Closed-form maximum.
    Eval { state: PathBuf },
    /// Direct search over measurement directions, next to the closed form.
    Oracle {
        state: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CHSH_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerdictKind {
    Qubit,
    Qutrit,
}

#[derive(Subcommand)]
enum DickeCommand {
    /// Marginal of a state given by its Dicke coefficients (JSON `[re, im]` pairs, m ascending).
    Rdm {
        #[arg(long)]
        coeffs: PathBuf,
    },
    /// CHSH of the marginal for random symmetric states.
    Theorem1 {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        nmin: usize,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
    },
}

#[derive(Subcommand)]
enum CglmpCommand {
    /// Multi-start maximisation over measurement phases.
    Max {
        state: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CGLMP_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = tolerance::CGLMP_OPTIMIZER)]
        tol: f64,
    },
}

#[derive(Args)]
struct OptimizerArgs {
    #[arg(long, default_value_t = DEFAULT_CGLMP_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = tolerance::CGLMP_OPTIMIZER)]
    tol: f64,
    /// CSV destination; stdout when omitted. A manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScanCommand {
    /// Random pure states; counts states with more than one violating marginal.
    Monogamy {
        #[arg(long, default_value_t = DEFAULT_SCAN_STATES)]
        states: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// One-parameter state families.
    Gamma {
        #[arg(long)]
        family: FamilyArg,
        #[arg(long, default_value_t = monogamy::DEFAULT_GAMMA_RANGE.0, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = monogamy::DEFAULT_GAMMA_RANGE.1, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = DEFAULT_GAMMA_POINTS)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Psi1,
    Psi2,
}

impl From<FamilyArg> for GammaFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Psi1 => GammaFamily::Psi1,
            FamilyArg::Psi2 => GammaFamily::Psi2,
        }
    }
}

#[derive(Subcommand)]
enum StateCommand {
    /// (|00> + |11>) / sqrt 2
    PhiPlus { out: PathBuf },
    /// p |Phi+><Phi+| + (1 - p) I/4
    Werner {
        #[arg(long)]
        p: f64,
        out: PathBuf,
    },
    /// (|00> + gamma |11> + |22>), normalised
    QutritPair {
        #[arg(long, default_value_t = 0.7923)]
        gamma: f64,
        out: PathBuf,
    },
    /// Member of a three-qutrit family
    Family {
        #[arg(long)]
        family: FamilyArg,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INPUT })
        }
    }
}

fn load_density(path: &Path) -> Result<DensityMatrix, Error> {
    Ok(io::load_state(path)?.density_matrix())
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Chsh(ChshCommand::Eval { state }) => {
            let r = chsh_value(&load_density(&state)?)?;
            println!("value={}", num(r.value));
            println!("violates={}", r.violates_with(tolerance::CHSH_VIOLATION));
            let [a, b, c] = r.eigenvalues_u;
            println!("eigenvalues_u={}", join(&[a, b, c]));
        }
        Command::Chsh(ChshCommand::Oracle { state, restarts, seed }) => {
            let rho = load_density(&state)?;
            let closed = chsh_value(&rho)?.value;
            let direct = chsh_direct(&rho, restarts, seed)?;
            println!("value_direct={}", num(direct));
            println!("value_closed_form={}", num(closed));
            println!("difference={}", num(direct - closed));
        }
        Command::Chen { state } => {
            let r = chen_criterion(&load_density(&state)?)?;
            println!("extendible={}", r.extendible);
            println!("lhs={}", num(r.lhs));
            println!("rhs={}", num(r.rhs));
        }
        Command::Verdict { kind: VerdictKind::Qubit, state, .. } => {
            let rho = load_density(&state)?;
            println!("verdict={}", qubit::nonextendibility_verdict_qubit(&rho)?);
            println!("chsh={}", num(chsh_value(&rho)?.value));
        }
        Command::Verdict { kind: VerdictKind::Qutrit, state, restarts, seed } => {
            let rho = load_density(&state)?;
            let (verdict, report) = monogamy::nonextendibility_verdict_qutrit(&rho, restarts, seed)?;
            println!("verdict={verdict}");
            println!("cglmp={}", num(report.value));
        }
        Command::Dicke(DickeCommand::Rdm { coeffs }) => {
            let psi = DickeState::new(io::load_coefficients(&coeffs)?)
                .map_err(|e| Error::Parse { path: coeffs.clone(), message: e.to_string() })?;
            dicke_rdm(&psi)?;
        }
        Command::Dicke(DickeCommand::Theorem1 { samples, seed, nmin, nmax }) => {
            return dicke_theorem1(samples, seed, nmin, nmax);
        }
        Command::Cglmp(CglmpCommand::Max { state, restarts, seed, tol }) => {
            let r = cglmp_max(&load_density(&state)?, restarts, seed, tol)?;
            println!("value={}", num(r.value));
            println!("violates={}", r.violates());
            println!("best_angles={}", join(&r.best_angles.to_flat()));
            println!("restarts={}", r.restarts_used);
            println!("evaluations={}", r.evaluations);
            println!("distribution_residual={:e}", r.distribution_residual);
        }
        Command::Scan(ScanCommand::Monogamy { states, seed, opt }) => {
            return scan_monogamy(states, seed, opt);
        }
        Command::Scan(ScanCommand::Gamma { family, from, to, points, seed, opt }) => {
            return scan_gamma(family.into(), from, to, points, seed, opt);
        }
        Command::State(cmd) => write_reference_state(cmd)?,
    }
    Ok(ExitCode::SUCCESS)
}

/// Shortest round-trip form, switching to exponent notation for tiny or huge
/// magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn cplx(z: C64) -> String {
    format!("({:?},{:?})", z.re, z.im)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

fn dicke_rdm(psi: &DickeState) -> Result<(), Error> {
    let rdm = rdm_from_dicke(psi);
    let rho = rdm.to_density_matrix()?;
    println!("qubits={}", psi.qubits());
    println!("v_plus={}", num(rdm.v_plus));
    println!("v_minus={}", num(rdm.v_minus));
    println!("w={}", num(rdm.w));
    println!("y={}", num(rdm.y));
    println!("x_plus={}", cplx(rdm.x_plus));
    println!("x_minus={}", cplx(rdm.x_minus));
    println!("u={}", cplx(rdm.u));
    for (r, row) in rho.matrix().to_rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|&z| cplx(z)).collect();
        println!("row{r}={}", cells.join(" "));
    }
    println!("chsh={}", num(chsh_value(&rho)?.value));
    let id = eigenidentity_check(psi)?;
    println!("single_purity={}", num(id.single_purity));
    println!("pair_purity={}", num(id.pair_purity));
    println!("extendible={}", chen_criterion(&rho)?.extendible);
    Ok(())
}

fn dicke_theorem1(samples: usize, seed: u64, nmin: usize, nmax: usize) -> Result<ExitCode, Error> {
    if nmin < 3 || nmax < nmin {
        return Err(Error::InvalidArgument(format!(
            "need 3 <= nmin <= nmax, got nmin={nmin} nmax={nmax}"
        )));
    }
    let mut failures = 0;
    for n in nmin..=nmax {
        let mut rng = stream_rng(seed, n as u64);
        let mut max_chsh = f64::NEG_INFINITY;
        for _ in 0..samples {
            let report = theorem1_check(&DickeState::random(n, &mut rng)?)?;
            max_chsh = max_chsh.max(report.chsh);
            failures += usize::from(!report.passed);
        }
        println!("n={n} samples={samples} max_chsh={}", num(max_chsh));
    }
    println!("failures={failures}");
    // A failure here contradicts a theorem, so it points at the numerics.
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERICAL)
    })
}

fn stdout_label() -> PathBuf {
    PathBuf::from("<stdout>")
}

fn scan_monogamy(states: usize, seed: u64, opt: OptimizerArgs) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let outcome = match &opt.out {
        Some(path) => {
            let mut csv = ScanCsv::create(path)?;
            monogamy::monogamy_scan_with(states, seed, opt.restarts, opt.tol, |r| csv.write(r))?
        }
        None => {
            let mut csv = ScanCsv::from_writer(std::io::stdout().lock(), &stdout_label())?;
            monogamy::monogamy_scan_with(states, seed, opt.restarts, opt.tol, |r| csv.write(r))?
        }
    };
    let elapsed = started.elapsed().as_secs_f64();
    let residual = outcome
        .records
        .iter()
        .map(|r| r.distribution_residual)
        .fold(0.0, f64::max);

    let summary = [
        format!("states={}", outcome.summary.states),
        format!("max_second_largest={}", num(outcome.summary.max_second_largest)),
        format!("double_violations={}", outcome.summary.double_violations),
        format!("single_violations={}", outcome.summary.single_violations),
        format!("max_distribution_residual={residual:e}"),
    ];
    report(opt.out.is_some(), &summary);

    if let Some(path) = &opt.out {
        let mut manifest = RunManifest::new("scan monogamy", seed, path)
            .param("states", states)
            .param("restarts", opt.restarts)
            .param("tol", opt.tol);
        manifest.wall_time_seconds = elapsed;
        manifest.record_count = outcome.records.len();
        manifest.write_for(path)?;
    }

    if outcome.counterexamples.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    match &opt.out {
        Some(path) => {
            let dump = io::counterexample_path(path);
            io::write_counterexamples(&dump, &outcome.counterexamples)?;
            eprintln!("counterexamples written to {}", dump.display());
        }
        None => {
            let text = serde_json::to_string_pretty(&outcome.counterexamples)
                .expect("counterexamples serialise");
            eprintln!("{text}");
        }
    }
    Ok(ExitCode::from(EXIT_COUNTEREXAMPLE))
}

fn scan_gamma(family: GammaFamily, from: f64, to: f64, points: usize, seed: u64, opt: OptimizerArgs) -> Result<ExitCode, Error> {
    if points == 0 {
        return Err(Error::InvalidArgument("points must be at least 1".into()));
    }
    let started = Instant::now();
    let grid = monogamy::linspace(from, to, points);
    let sweep = monogamy::gamma_sweep_with(&grid, opt.restarts, seed, opt.tol, |g| {
        monogamy::gamma_state(family, g)
    })?;
    let elapsed = started.elapsed().as_secs_f64();

    match &opt.out {
        Some(path) => io::write_gamma_csv(path, &sweep)?,
        None => io::write_gamma_csv_to(std::io::stdout().lock(), &stdout_label(), &sweep)?,
    }
    let max_violations = sweep.iter().map(|p| p.violations).max().unwrap_or(0);
    report(
        opt.out.is_some(),
        &[
            format!("family={family}"),
            format!("points={}", sweep.len()),
            format!("max_violations={max_violations}"),
        ],
    );
    if let Some(path) = &opt.out {
        let mut manifest = RunManifest::new("scan gamma", seed, path)
            .param("family", family)
            .param("from", from)
            .param("to", to)
            .param("points", points)
            .param("restarts", opt.restarts)
            .param("tol", opt.tol);
        manifest.wall_time_seconds = elapsed;
        manifest.record_count = sweep.len();
        manifest.write_for(path)?;
    }
    Ok(if max_violations >= 2 {
        ExitCode::from(EXIT_COUNTEREXAMPLE)
    } else {
        ExitCode::SUCCESS
    })
}

/// Summary lines go to stdout unless stdout is carrying the CSV.
fn report(to_stdout: bool, lines: &[String]) {
    if to_stdout {
        for l in lines {
            println!("{l}");
        }
    } else {
        let mut err = std::io::stderr().lock();
        for l in lines {
            let _ = writeln!(err, "{l}");
        }
    }
}

fn write_reference_state(cmd: StateCommand) -> Result<(), Error> {
    let (file, out) = match cmd {
        StateCommand::PhiPlus { out } => (StateFile::from_mixed(&qubit::phi_plus()), out),
        StateCommand::Werner { p, out } => (StateFile::from_mixed(&qubit::werner(p)?), out),
        StateCommand::QutritPair { gamma, out } => {
            (StateFile::from_pure(&correlated_qutrit_pair(gamma)?), out)
        }
        StateCommand::Family { family, gamma, out } => {
            (StateFile::from_pure(&monogamy::gamma_state(family.into(), gamma)?), out)
        }
    };
    // Catch anything that would not load back.
    let _: State = file.to_state()?;
    io::save_state(&out, &file)?;
    println!("wrote={}", out.display());
    Ok(())
}
