fn main() {
    std::process::exit(modkinetic::cli::main_with_args(std::env::args_os()));
}
