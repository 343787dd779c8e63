use std::process::ExitCode;

fn main() -> ExitCode {
    let result = painleve_torus_cli::parse_args(std::env::args_os())
        .and_then(|inv| painleve_torus_cli::run(&inv));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = painleve_torus_cli::exit_code(&err);
            match err.downcast_ref::<clap::Error>() {
                Some(e) => {
                    let _ = e.print();
                }
                None => eprintln!("error: {err:#}"),
            }
            ExitCode::from(code)
        }
    }
}
