use clap::Parser;
use qtime_cli::{execute, Args};

fn main() {
    let args = Args::parse();
    let code = match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code as i32);
}
