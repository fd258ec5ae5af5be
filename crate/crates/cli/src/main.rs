fn main() {
    std::process::exit(spinlaw_cli::main_with(std::env::args().collect()));
}
