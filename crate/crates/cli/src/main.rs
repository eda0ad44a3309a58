use env_logger::Env;

fn main() {
    let quiet = std::env::args().any(|a| a == "--quiet");
    let default = if quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(Env::new().filter_or("TEAMLMI_LOG", default)).init();
    let code = teamlmi_cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
