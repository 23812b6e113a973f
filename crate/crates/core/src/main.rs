fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(lasso_corr::cli::run(&argv));
}
