fn main() {
    std::process::exit(dafloer::cli::main_with_args(std::env::args_os()));
}
