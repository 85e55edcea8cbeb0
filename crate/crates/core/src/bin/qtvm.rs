fn main() -> std::process::ExitCode {
    qtvm::cli::main()
}
