//! Run every acceptance criterion and print the verdicts.

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    for outcome in su_balance::verify::run_all(seed) {
        println!("{}", outcome.summary_line());
        if let Some(e) = &outcome.error {
            println!("    error: {e}");
        }
        for check in outcome.failed_checks() {
            println!("    {check}");
        }
    }
}
