fn main() -> std::process::ExitCode {
    interact_cli::main()
}
