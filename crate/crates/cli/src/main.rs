fn main() {
    std::process::exit(dyad_cli::run(std::env::args_os()));
}
