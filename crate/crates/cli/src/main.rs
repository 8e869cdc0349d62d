//! `qfp` — decides quantifier-free linear integer arithmetic by per-class
//! solution bounds, bit-blasting, and SAT. Subcommands: `solve`, `bound`,
//! `analyze`, `gen`, `dimacs`.
//!
//! Exit codes for `solve`: 10 = sat, 20 = unsat, 1 = error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::Signed;

use qfp_core::analysis::{ClassKind, DomainKind};
use qfp_core::encoder::{emit_dimacs, encode};
use qfp_core::formula::{collect_atoms, parse, Script, SymbolTable};
use qfp_core::gen::{generate, GenParams};
use qfp_core::pipeline::{
    analyze_script, prepare, solve_script, AnalysisResult, Backend, OptPreset, SolveConfig,
    SolveMode, Verdict,
};

#[derive(Parser)]
#[command(name = "qfp", version, about = "SAT-based decision procedure for quantifier-free linear integer arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum OptArg {
    #[default]
    Base,
    Coeff,
    Const,
    All,
}

impl OptArg {
    fn preset(self) -> OptPreset {
        match self {
            OptArg::Base => OptPreset::Base,
            OptArg::Coeff => OptPreset::Coeff,
            OptArg::Const => OptPreset::Const,
            OptArg::All => OptPreset::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum ModeArg {
    #[default]
    Eager,
    Iterative,
}

#[derive(Args, Clone)]
struct EncodingFlags {
    /// Bound optimization preset.
    #[arg(long, value_enum, default_value_t = OptArg::Base)]
    opt: OptArg,
    /// Shift the origin per class to shrink constant terms.
    #[arg(long)]
    shift: bool,
    /// Eliminate uninterpreted functions before solving.
    #[arg(long)]
    ackermann: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide satisfiability of a formula file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        enc: EncodingFlags,
        /// `embedded` or `ext:<command>` for an external DIMACS solver.
        #[arg(long, default_value = "embedded")]
        solver: String,
        /// `eager` solves at full width; `iterative` grows widths on demand.
        #[arg(long, value_enum, default_value_t = ModeArg::Eager)]
        mode: ModeArg,
    },
    /// Report per-class parameters, bounds, and bit widths.
    Bound {
        file: PathBuf,
        #[command(flatten)]
        enc: EncodingFlags,
        /// Machine-readable CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// Corpus statistics: fraction and width of non-difference constraints.
    Analyze {
        files: Vec<PathBuf>,
        /// Machine-readable CSV.
        #[arg(long)]
        csv: bool,
        /// Eliminate uninterpreted functions first.
        #[arg(long)]
        ackermann: bool,
    },
    /// Generate a benchmark formula with planted structure.
    Gen {
        /// Number of variables.
        #[arg(long)]
        vars: usize,
        /// Total number of atoms.
        #[arg(long)]
        atoms: usize,
        /// Number of non-difference atoms.
        #[arg(long = "non-diff", default_value_t = 0)]
        non_diff: usize,
        /// Maximum non-difference width (>= 3 when --non-diff > 0).
        #[arg(long, default_value_t = 3)]
        width: usize,
        /// Maximum absolute coefficient.
        #[arg(long = "max-coeff", default_value_t = 1)]
        max_coeff: u64,
        /// Maximum absolute constant.
        #[arg(long = "max-const", default_value_t = 10)]
        max_const: u64,
        /// Skeleton depth.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Random seed; identical seeds give identical files.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a formula to DIMACS CNF.
    Dimacs {
        file: PathBuf,
        #[command(flatten)]
        enc: EncodingFlags,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // die quietly when the consumer of a pipe goes away (e.g. `qfp bound … | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Solve {
            file,
            enc,
            solver,
            mode,
        } => cmd_solve(&file, &enc, &solver, mode),
        Cmd::Bound { file, enc, csv } => cmd_bound(&file, &enc, csv),
        Cmd::Analyze {
            files,
            csv,
            ackermann,
        } => cmd_analyze(&files, csv, ackermann),
        Cmd::Gen {
            vars,
            atoms,
            non_diff,
            width,
            max_coeff,
            max_const,
            depth,
            seed,
            out,
        } => cmd_gen(
            GenParams {
                vars,
                atoms,
                non_diff,
                width,
                max_coeff,
                max_const,
                depth,
            },
            seed,
            out.as_deref(),
        ),
        Cmd::Dimacs { file, enc, out } => cmd_dimacs(&file, &enc, out.as_deref()),
    }
}

fn load(path: &Path) -> Result<Script> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).map_err(|err| anyhow!("{}: {err}", path.display()))
}

fn parse_backend(solver: &str) -> Result<Backend> {
    if solver == "embedded" {
        Ok(Backend::Embedded {
            conflict_limit: None,
        })
    } else if let Some(command) = solver.strip_prefix("ext:") {
        if command.trim().is_empty() {
            bail!("empty external solver command");
        }
        Ok(Backend::External(command.to_string()))
    } else {
        bail!("unknown solver '{solver}' (expected 'embedded' or 'ext:<command>')");
    }
}

fn format_int(v: &BigInt) -> String {
    if v.is_negative() {
        format!("(- {})", v.magnitude())
    } else {
        v.to_string()
    }
}

fn cmd_solve(path: &Path, enc: &EncodingFlags, solver: &str, mode: ModeArg) -> Result<u8> {
    let script = load(path)?;
    let original_vars = script.symbols.num_vars();
    let config = SolveConfig {
        preset: enc.opt.preset(),
        shift: enc.shift,
        backend: parse_backend(solver)?,
        mode: match mode {
            ModeArg::Eager => SolveMode::Eager,
            ModeArg::Iterative => SolveMode::Iterative,
        },
        ackermann: enc.ackermann,
        ..SolveConfig::default()
    };
    let outcome = solve_script(&script, &config)?;
    match outcome.verdict {
        Verdict::Sat(model) => {
            println!("sat");
            // print the user's variables, not the elimination-introduced ones
            let mut lines: Vec<(String, BigInt)> = model
                .iter()
                .filter(|(v, _)| (v.0 as usize) < original_vars)
                .map(|(v, value)| (outcome.symbols.var_name(v).to_string(), value.clone()))
                .collect();
            lines.sort_by(|a, b| a.0.cmp(&b.0));
            for (name, value) in lines {
                println!("(define-fun {name} () Int {})", format_int(&value));
            }
            Ok(10)
        }
        Verdict::Unsat => {
            println!("unsat");
            Ok(20)
        }
    }
}

fn kind_name(kind: ClassKind) -> &'static str {
    match kind {
        ClassKind::Equality => "equality",
        ClassKind::Difference => "difference",
        ClassKind::Utvpi => "utvpi",
        ClassKind::General => "general",
    }
}

fn domain_name(domain: DomainKind) -> &'static str {
    match domain {
        DomainKind::Unsigned => "unsigned",
        DomainKind::Signed => "signed",
    }
}

fn class_label(analysis: &AnalysisResult, symbols: &SymbolTable, idx: usize) -> String {
    let first = analysis.classes[idx]
        .class
        .vars
        .iter()
        .next()
        .map(|v| symbols.var_name(*v).to_string())
        .unwrap_or_default();
    format!("c{idx}({first})")
}

fn cmd_bound(path: &Path, enc: &EncodingFlags, csv: bool) -> Result<u8> {
    let script = load(path)?;
    let (analysis, symbols) =
        analyze_script(&script, enc.opt.preset(), enc.shift, enc.ackermann)?;
    let widest = analysis
        .classes
        .iter()
        .enumerate()
        .max_by_key(|(_, c)| c.bound.bit_width)
        .map(|(i, _)| i);

    if csv {
        println!("class,n,m,k,w,a_max,b_max,kind,domain,d,bits,max");
        for (i, report) in analysis.classes.iter().enumerate() {
            let p = &report.params;
            println!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                class_label(&analysis, &symbols, i),
                p.n,
                p.m,
                p.k,
                p.w,
                p.a_max,
                p.b_max,
                kind_name(report.class.kind),
                domain_name(report.bound.domain),
                report.bound.d,
                report.bound.bit_width,
                if Some(i) == widest { 1 } else { 0 },
            );
        }
    } else {
        println!(
            "{:<14} {:>5} {:>6} {:>4} {:>3} {:>8} {:>12} {:<10} {:<8} {:>24} {:>5}",
            "class", "n", "m", "k", "w", "a_max", "b_max", "kind", "domain", "d", "bits"
        );
        for (i, report) in analysis.classes.iter().enumerate() {
            let p = &report.params;
            let marker = if Some(i) == widest { " *" } else { "" };
            println!(
                "{:<14} {:>5} {:>6} {:>4} {:>3} {:>8} {:>12} {:<10} {:<8} {:>24} {:>5}{marker}",
                class_label(&analysis, &symbols, i),
                p.n,
                p.m,
                p.k,
                p.w,
                p.a_max.to_string(),
                p.b_max.to_string(),
                kind_name(report.class.kind),
                domain_name(report.bound.domain),
                report.bound.d.to_string(),
                report.bound.bit_width,
            );
        }
        println!(
            "max bits per variable: {} ({} classes, {} atoms)",
            analysis.max_bit_width(),
            analysis.classes.len(),
            analysis.atoms.len()
        );
    }
    Ok(0)
}

struct FileStats {
    atoms: usize,
    non_diff: usize,
    fraction: f64,
    max_width: Option<usize>,
}

fn file_stats(script: &Script, ackermann: bool) -> Result<FileStats> {
    let (_, nnf, _) = prepare(&script.formula, &script.symbols, ackermann)?;
    let atoms = collect_atoms(&nnf);
    let mut non_diff = 0usize;
    let mut max_width: Option<usize> = None;
    for atom in &atoms {
        if !qfp_core::analysis::classify_constraint(atom).is_difference() {
            non_diff += 1;
            max_width = Some(max_width.map_or(atom.width(), |w| w.max(atom.width())));
        }
    }
    let fraction = if atoms.is_empty() {
        0.0
    } else {
        non_diff as f64 / atoms.len() as f64
    };
    Ok(FileStats {
        atoms: atoms.len(),
        non_diff,
        fraction,
        max_width,
    })
}

fn cmd_analyze(paths: &[PathBuf], csv: bool, ackermann: bool) -> Result<u8> {
    if paths.is_empty() {
        bail!("no input files");
    }
    if csv {
        println!("file,atoms,non_difference,fraction,max_width");
    }
    let mut failures = 0usize;
    let mut max_fraction = 0.0f64;
    let mut max_width: Option<usize> = None;
    let mut analyzed = 0usize;
    for path in paths {
        let stats = load(path).and_then(|script| file_stats(&script, ackermann));
        match stats {
            Ok(stats) => {
                analyzed += 1;
                max_fraction = max_fraction.max(stats.fraction);
                if let Some(w) = stats.max_width {
                    max_width = Some(max_width.map_or(w, |m| m.max(w)));
                }
                let width_col = stats
                    .max_width
                    .map(|w| w.to_string())
                    .unwrap_or_default();
                if csv {
                    println!(
                        "{},{},{},{:.6},{}",
                        path.display(),
                        stats.atoms,
                        stats.non_diff,
                        stats.fraction,
                        width_col
                    );
                } else {
                    println!(
                        "{}: atoms={} non-difference={} fraction={:.4} max-width={}",
                        path.display(),
                        stats.atoms,
                        stats.non_diff,
                        stats.fraction,
                        if width_col.is_empty() { "-" } else { &width_col }
                    );
                }
            }
            Err(err) => {
                failures += 1;
                eprintln!("error: {err:#}");
            }
        }
    }
    if analyzed > 0 {
        let width_col = max_width.map(|w| w.to_string());
        if csv {
            println!(
                "TOTAL,,,{:.6},{}",
                max_fraction,
                width_col.unwrap_or_default()
            );
        } else {
            println!(
                "corpus maxima: fraction={:.4} max-width={}",
                max_fraction,
                width_col.as_deref().unwrap_or("-")
            );
        }
    }
    Ok(if failures > 0 { 1 } else { 0 })
}

fn cmd_gen(params: GenParams, seed: u64, out: Option<&Path>) -> Result<u8> {
    let text = generate(&params, seed)?;
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_dimacs(path: &Path, enc: &EncodingFlags, out: Option<&Path>) -> Result<u8> {
    let script = load(path)?;
    let (_, nnf, _) = prepare(&script.formula, &script.symbols, enc.ackermann)?;
    let analysis =
        qfp_core::pipeline::analyze_formula(&nnf, enc.opt.preset(), enc.shift);
    let (cnf, map) = encode(
        &analysis.formula,
        &analysis.domains(),
        &Default::default(),
    )?;
    let summary = format!(
        "integer variables: {} ({} bits total), cnf: {} variables, {} clauses",
        map.vars.len(),
        map.total_bits(),
        cnf.num_vars,
        cnf.clauses.len()
    );
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            emit_dimacs(&cnf, &mut file)?;
            file.flush()?;
            println!("{summary}");
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            emit_dimacs(&cnf, &mut stdout)?;
            stdout.flush()?;
            eprintln!("{summary}");
        }
    }
    Ok(0)
}
