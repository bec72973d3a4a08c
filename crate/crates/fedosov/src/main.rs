use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let code = fedosov::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
