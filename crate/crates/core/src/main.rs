use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let result = additive_lab::cli::run(std::env::args_os());
    let body = match result.text {
        Some(text) => text,
        None => serde_json::to_string_pretty(&result.payload).expect("payload serializes") + "\n",
    };
    // A closed pipe on stdout is not an error worth reporting.
    let _ = std::io::stdout().write_all(body.as_bytes());
    ExitCode::from(result.exit_code as u8)
}
