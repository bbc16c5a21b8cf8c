use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("RULINGSET_LOG")).format_timestamp(None).init();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = rulingset::cli::run(std::env::args_os(), &mut out, &mut std::io::stderr());
    let _ = out.flush();
    ExitCode::from(code)
}
