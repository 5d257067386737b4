fn main() {
    std::process::exit(vfplab::cli::main_with_args(std::env::args_os()));
}
