fn main() {
    std::process::exit(emr_multifractal::cli::main_with_args(std::env::args_os()));
}
