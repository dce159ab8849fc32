fn main() {
    std::process::exit(xilab::run(std::env::args_os()));
}
