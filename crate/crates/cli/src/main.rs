fn main() {
    std::process::exit(heislim::main_with_args(std::env::args_os()));
}
