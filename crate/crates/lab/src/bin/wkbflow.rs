fn main() {
    std::process::exit(wkbflow_lab::cli::main_with_args(std::env::args_os()));
}
