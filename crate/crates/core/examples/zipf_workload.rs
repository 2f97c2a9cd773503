//! Generates a Zipf request stream and compares empirical frequencies with
//! the catalog pmf.

use utilcache::workload::{generate, write_trace, ZipfCatalog};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = ZipfCatalog::new(1_000, 0.8)?;
    let requesters = [0, 1, 2, 3];
    let n = 200_000;
    let mut counts = vec![0u64; catalog.size()];
    for req in generate(&catalog, &requesters, 12.0, n, 7)? {
        counts[req.content] += 1;
    }
    println!("rank  pmf       observed");
    for c in [0, 1, 2, 9, 99, 999] {
        println!("{:<5} {:.6}  {:.6}", c + 1, catalog.probability(c), counts[c] as f64 / n as f64);
    }
    println!("\nfirst requests as a trace:");
    write_trace(std::io::stdout().lock(), generate(&catalog, &requesters, 12.0, 5, 7)?)?;
    Ok(())
}
