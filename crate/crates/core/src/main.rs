fn main() {
    std::process::exit(lwroots::cli::run(std::env::args_os()));
}
