fn main() {
    std::process::exit(rac_forge_cli::run(std::env::args_os()));
}
