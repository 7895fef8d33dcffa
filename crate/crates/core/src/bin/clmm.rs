fn main() {
    std::process::exit(clmm_game::cli::run(std::env::args_os()));
}
