fn main() {
    std::process::exit(fredres::cli::main_with(std::env::args_os()));
}
