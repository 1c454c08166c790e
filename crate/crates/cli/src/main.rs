use clap::Parser;
use matconc_cli::args::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            std::process::exit(if usage { matconc_cli::EXIT_CONFIG } else { matconc_cli::EXIT_PASS });
        }
    };
    std::process::exit(matconc_cli::main_with(&cli.verb));
}
