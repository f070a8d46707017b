fn main() {
    std::process::exit(exeuler::cli::main_with_args(std::env::args_os()));
}
