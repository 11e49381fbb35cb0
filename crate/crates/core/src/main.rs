fn main() {
    std::process::exit(crashnet::cli::main_with_args(std::env::args_os()));
}
