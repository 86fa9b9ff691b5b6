fn main() {
    std::process::exit(macroent::cli::main_with_args(std::env::args_os()));
}
