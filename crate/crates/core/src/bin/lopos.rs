use std::process::ExitCode;

fn main() -> ExitCode {
    let out = lopos::cli::run(std::env::args_os());
    print!("{}", out.stdout);
    ExitCode::from(out.code as u8)
}
