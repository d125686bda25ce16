fn main() {
    std::process::exit(chaoslab_cli::dispatch(std::env::args_os()));
}
