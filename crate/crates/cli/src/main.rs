fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let (code, out) = malnormal_cli::run(&argv);
    if code == malnormal_cli::INPUT_ERROR || code == malnormal_cli::BUDGET_EXHAUSTED {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    std::process::exit(code);
}
