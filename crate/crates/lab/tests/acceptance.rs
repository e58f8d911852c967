//! Runs the ten acceptance criteria and prints one PASS/FAIL line each.

use wkbflow_lab::acceptance;

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut failed = 0;
    for c in acceptance::criteria() {
        let r = acceptance::run(&c);
        println!("{}", r.line());
        failed += usize::from(!r.passed);
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
