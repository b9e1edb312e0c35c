fn main() {
    std::process::exit(sqztomo::cli::main_with_args(std::env::args_os()));
}
