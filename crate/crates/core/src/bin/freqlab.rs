fn main() {
    std::process::exit(freqlab::cli::run(std::env::args_os()));
}
