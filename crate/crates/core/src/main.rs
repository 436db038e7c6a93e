fn main() {
    std::process::exit(ncgeom::cli::run(std::env::args_os()));
}
