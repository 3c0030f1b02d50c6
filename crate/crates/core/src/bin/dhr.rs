fn main() {
    std::process::exit(dhr_sieve::cli::main_with_args(std::env::args_os()));
}
