fn main() {
    std::process::exit(ipcgraph::cli::run(std::env::args_os()));
}
