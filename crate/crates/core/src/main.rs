fn main() {
    std::process::exit(robust_transducer::commands::main_with_args(std::env::args_os()));
}
