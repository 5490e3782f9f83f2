fn main() {
    std::process::exit(lfr_core::cli::main_with_args(std::env::args_os()));
}
