fn main() {
    std::process::exit(decoy_noise::cli::run(std::env::args_os()));
}
