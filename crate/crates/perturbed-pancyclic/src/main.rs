fn main() {
    std::process::exit(perturbed_pancyclic::cli::run(std::env::args_os()));
}
