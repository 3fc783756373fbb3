fn main() {
    std::process::exit(ure_eval::cli::cli_main(std::env::args_os()));
}
