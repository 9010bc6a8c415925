fn main() -> std::process::ExitCode {
    crashgraph::cli::main()
}
