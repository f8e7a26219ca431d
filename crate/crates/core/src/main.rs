fn main() {
    std::process::exit(roe_index::report::run(std::env::args_os()));
}
