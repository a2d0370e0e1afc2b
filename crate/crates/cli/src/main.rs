use clap::Parser;

fn main() {
    let cli = benford_ecp_cli::Cli::parse();
    match benford_ecp_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
