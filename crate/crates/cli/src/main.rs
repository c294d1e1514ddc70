fn main() {
    std::process::exit(qroute_bench::cli::main_with_args(std::env::args_os()));
}
