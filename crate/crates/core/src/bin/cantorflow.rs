fn main() {
    std::process::exit(cantorflow::cli::main_with_args(std::env::args_os()));
}
