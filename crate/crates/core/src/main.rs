use std::io;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CRYPTRIAGE_LOG", "warn")).init();
    let code = cryptriage::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
