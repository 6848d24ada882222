fn main() -> std::process::ExitCode {
    almostconv::cli::main()
}
