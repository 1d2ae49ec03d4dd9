use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(trackkit::cli::dispatch().clamp(0, 255) as u8)
}
