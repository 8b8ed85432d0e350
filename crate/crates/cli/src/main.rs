fn main() {
    std::process::exit(conformal_torsion_cli::run_from_env());
}
