fn main() {
    std::process::exit(doublephase::run(std::env::args_os()));
}
