fn main() {
    std::process::exit(spinwave_lab::cli::main_with_args(std::env::args_os()));
}
