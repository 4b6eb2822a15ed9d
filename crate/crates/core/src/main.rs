fn main() {
    std::process::exit(outlier_attribution::cli::run(std::env::args_os()));
}
