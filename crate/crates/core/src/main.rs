fn main() {
    std::process::exit(momip::cli::run_cli(std::env::args_os()));
}
