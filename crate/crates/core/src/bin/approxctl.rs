fn main() {
    std::process::exit(hodge_approx::cli::main_with_args(std::env::args_os()));
}
