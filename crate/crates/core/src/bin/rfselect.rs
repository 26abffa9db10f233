fn main() -> std::process::ExitCode {
    rfselect::cli::main()
}
