fn main() {
    std::process::exit(mirrorvis::cli::main_with_args(std::env::args_os()));
}
