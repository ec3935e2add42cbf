use std::process::ExitCode;

fn main() -> ExitCode {
    let job = match imc_cli::parse_args(std::env::args_os()) {
        Ok(Ok(job)) => job,
        Ok(Err(help)) => {
            print!("{help}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            if !e.to_string().ends_with('\n') {
                eprintln!();
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match imc_cli::execute(&job) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
