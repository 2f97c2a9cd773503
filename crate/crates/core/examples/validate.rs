//! Runs the built-in invariant suites, once as shipped and once with the
//! greedy tie-break reversed.

use utilcache::harness::validate::{validate, validate_with, ValidateOptions};
use utilcache::objective::TieBreak;

fn main() {
    print!("{}", validate());
    let mutated = validate_with(&ValidateOptions { tie_break: TieBreak::ReverseLexicographic, ..Default::default() });
    println!("\nwith reversed tie-break:");
    print!("{mutated}");
}
