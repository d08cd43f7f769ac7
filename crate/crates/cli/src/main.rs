fn main() {
    std::process::exit(catsim_cli::run(std::env::args_os()));
}
