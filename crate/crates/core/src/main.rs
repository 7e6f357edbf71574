fn main() -> std::process::ExitCode {
    manta_sim::cli::main()
}
