fn main() {
    std::process::exit(episim::cli::cli_main(std::env::args_os()));
}
