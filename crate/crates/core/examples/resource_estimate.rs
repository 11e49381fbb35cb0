//! Sizes of the quadratized problem for growing networks: the all-monomials
//! upper bound next to the count for the objective's actual term pattern.

use crashnet::reduction::estimate_resources;

fn main() -> crashnet::Result<()> {
    println!(
        "{:>3} {:>4} {:>2} {:>16} {:>16} {:>12} {:>12} {:>22}",
        "n", "bits", "r", "bound terms", "bound ancillas", "terms", "ancillas", "dense bytes"
    );
    for (n, bits, r) in [(3, 5, 3), (3, 5, 5), (10, 7, 3), (100, 7, 3)] {
        let e = estimate_resources(n, bits, r)?;
        let s = &e.structured;
        println!(
            "{n:>3} {bits:>4} {r:>2} {:>16} {:>16} {:>12} {:>12} {:>22}",
            e.max_terms, e.max_ancillas, s.terms, s.ancillas, s.memory_bytes
        );
    }
    Ok(())
}
