fn main() {
    let code = concavity_lab::cli::main_with_args(std::env::args_os(), std::env::var_os("CONCAVITY_LAB_WORKERS"));
    std::process::exit(code);
}
