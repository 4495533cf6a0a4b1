use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let mut out = std::io::stdout().lock();
    ExitCode::from(icmaus_cli::run_cli(&args, &mut out))
}
