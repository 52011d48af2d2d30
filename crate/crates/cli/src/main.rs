use clap::Parser;
use fst_cli::Cli;

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let strict = cli.resolve()?.strict;
    let report = fst_cli::run(&cli)?;
    print!("{}", report.summary);
    println!("wrote {} files to {}", report.files.len(), report.output_dir.display());
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let code = report.exit_code(strict);
    if code != 0 {
        eprintln!("strict mode: {} warnings", report.warnings.len());
        std::process::exit(code);
    }
    Ok(())
}
