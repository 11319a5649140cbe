use std::process::ExitCode;

use cknlab_cli::acceptance::run_all;

fn main() -> ExitCode {
    let results = run_all(|o| println!("{}", o.line()));
    let failed = results.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
