fn main() {
    let seed = std::env::var(ptsim_cli::config::SEED_ENV).ok();
    std::process::exit(ptsim_cli::run(std::env::args_os(), seed));
}
