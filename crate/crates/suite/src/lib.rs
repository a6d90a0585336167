//! Runs the acceptance criteria defined in `rgreedi_cli::suite` and renders
//! one line per criterion. Kept in its own package so the (slow, possibly
//! red) acceptance target is the last one `cargo test --workspace` runs.

use rgreedi_cli::suite::{self, Scale, CRITERIA};

/// Runs every criterion in sequence, printing each line as it completes.
/// Returns the ids that failed.
pub fn run_all(scale: Scale) -> Vec<u8> {
    let mut failed = Vec::new();
    for id in CRITERIA {
        match suite::run(id, scale) {
            Ok(outcome) => {
                println!("{outcome}");
                if !outcome.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("[FAIL] criterion {id:>2}: error: {e}");
                failed.push(id);
            }
        }
    }
    failed
}
