use std::process::ExitCode;

use rank1kit::acceptance;

fn main() -> ExitCode {
    let mut failed = 0;
    for criterion in acceptance::all() {
        let c = criterion();
        println!("{}", c.line());
        if !c.passed {
            failed += 1;
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
