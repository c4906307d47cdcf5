fn main() {
    std::process::exit(bubble_diamond::cli::run(std::env::args_os()));
}
