fn main() {
    std::process::exit(oiqa_cli::main_with_args(std::env::args_os()));
}
