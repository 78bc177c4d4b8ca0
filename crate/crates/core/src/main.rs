fn main() {
    std::process::exit(qfcalc::cli::main_with_args(std::env::args_os()));
}
