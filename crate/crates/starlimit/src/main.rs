fn main() {
    std::process::exit(starlimit::run(std::env::args_os()));
}
