fn main() {
    std::process::exit(sle_rho::cli::main_with_args(std::env::args_os()));
}
