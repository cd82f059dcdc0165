fn main() {
    std::process::exit(qcayley_cli::main_with_args(std::env::args_os()));
}
