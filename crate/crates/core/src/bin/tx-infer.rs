//! Command line driver: infer types for `.jtx` files and emit the selected
//! artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use tx_infer::error::Error;
use tx_infer::pipeline::{infer_source, Inference, Options};
use tx_infer::table::Builtins;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Constraints,
    Unifiers,
    Generics,
    TypedSource,
    Signatures,
    Descriptors,
    Funifaces,
}

impl Target {
    fn extension(self) -> &'static str {
        match self {
            Target::Constraints => "constraints.txt",
            Target::Unifiers => "unifiers.txt",
            Target::Generics => "generics.txt",
            Target::TypedSource => "typed.jtx",
            Target::Signatures => "sigs.txt",
            Target::Descriptors => "desc.txt",
            Target::Funifaces => "funifaces.txt",
        }
    }

    fn render(self, inf: &Inference) -> String {
        match self {
            Target::Constraints => inf.constraints_dump(),
            Target::Unifiers => inf.unifiers_dump(),
            Target::Generics => inf.generics_dump(),
            Target::TypedSource => inf.typed_source(),
            Target::Signatures => inf.signatures_text(),
            Target::Descriptors => inf.descriptors_text(),
            Target::Funifaces => inf.funifaces_text(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tx-infer", version, about = "Infer types and generics for untyped Java-like programs")]
struct Cli {
    /// Input files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    /// Artifacts to produce.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "typed-source")]
    emit: Vec<Target>,

    /// Builtin class table (JSON) replacing the bundled one.
    #[arg(long, env = "TXINFER_TABLE")]
    table: Option<PathBuf>,

    /// Print an intermediate stage to stderr.
    #[arg(long, value_enum)]
    dump_stage: Vec<Target>,

    /// Cap on the number of reported typings per class.
    #[arg(long)]
    max_solutions: Option<usize>,

    /// Write `<name>.<artifact>` files into this directory instead of
    /// printing to stdout.
    #[arg(long, short = 'o')]
    out_dir: Option<PathBuf>,
}

/// Output of one input file, printed after all files finished.
struct FileReport {
    stdout: String,
    stderr: String,
    code: u8,
}

fn run_file(path: &Path, cli: &Cli, builtins: &Builtins) -> FileReport {
    let mut report = FileReport { stdout: String::new(), stderr: String::new(), code: 0 };
    let src = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            report.stderr = format!("{}: {e}\n", path.display());
            report.code = 2;
            return report;
        }
    };
    let opts = Options { max_solutions: cli.max_solutions, ..Options::default() };
    let inf = match infer_source(&src, builtins, &opts) {
        Ok(inf) => inf,
        Err(e) => {
            report.stderr = format!("{}:{e}\n", path.display());
            report.code = if e.is_type_error() { 1 } else { 2 };
            return report;
        }
    };
    for c in inf.classes.iter().filter(|c| c.truncated) {
        report.stderr.push_str(&format!("{}: note: typings of `{}` were truncated\n", path.display(), c.name));
    }
    for &stage in &cli.dump_stage {
        report.stderr.push_str(&stage.render(&inf));
    }
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    for &target in &cli.emit {
        let text = target.render(&inf);
        match &cli.out_dir {
            Some(dir) => {
                let file = dir.join(format!("{stem}.{}", target.extension()));
                if let Err(e) = fs::write(&file, text) {
                    report.stderr.push_str(&format!("{}: {e}\n", file.display()));
                    report.code = 2;
                }
            }
            None => report.stdout.push_str(&text),
        }
    }
    report
}

fn load_builtins(cli: &Cli) -> Result<Builtins, Error> {
    match &cli.table {
        Some(p) => Builtins::load(p),
        None => Ok(Builtins::bundled().clone()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let builtins = match load_builtins(&cli) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("tx-infer: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = &cli.out_dir {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("tx-infer: {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    let reports: Vec<FileReport> = cli.inputs.par_iter().map(|p| run_file(p, &cli, &builtins)).collect();
    let mut code = 0;
    for r in reports {
        print!("{}", r.stdout);
        eprint!("{}", r.stderr);
        code = code.max(r.code);
    }
    ExitCode::from(code)
}
