fn main() {
    std::process::exit(acr::cli::main_with_args(std::env::args_os()));
}
