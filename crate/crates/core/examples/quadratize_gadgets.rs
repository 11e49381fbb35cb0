//! Certifies k-body gadgets and quadratizes a small cubic polynomial.

use crashnet::hubo::BinaryPolynomial;
use crashnet::reduction::{
    boolean_to_spin, min_over_ancillas, quadratize, reduce_3body_single_ancilla, reduce_kbody_term, GadgetParams,
    GadgetStrategy, QuadratizeConfig, DEFAULT_SCALE,
};

fn main() -> crashnet::Result<()> {
    for (k, jk) in [(3, 1.0), (4, -1.5), (6, 0.7)] {
        let g = reduce_kbody_term(k, jk, &GadgetParams::scaled(jk, DEFAULT_SCALE))?;
        println!(
            "k = {k}, J = {jk}: {} ancillas, {} emitted terms, constant {:.3}",
            g.ancillas,
            g.terms.len(),
            g.constant
        );
    }
    let g = reduce_3body_single_ancilla(-1.0)?;
    println!("single-ancilla gadget for J = -1: {} terms, constant {:.3}", g.terms.len(), g.constant);

    let bp = BinaryPolynomial::from_terms(
        BinaryPolynomial::with_vars(4).labels().to_vec(),
        [(vec![0, 1, 2], -3.0), (vec![1, 2, 3], 2.0), (vec![0, 3], 1.0), (vec![2], 0.5)],
    )?;
    for strategy in [GadgetStrategy::KAncilla, GadgetStrategy::SingleAncillaThreeBody] {
        let config = QuadratizeConfig { strategy, ..Default::default() };
        let (q, stats) = quadratize(&boolean_to_spin(&bp), &config)?;
        println!("{strategy:?}: {} variables, {} couplers", q.size, stats.couplers);
        for code in [0u32, 7, 15] {
            let x: Vec<bool> = (0..4).map(|b| code >> b & 1 == 1).collect();
            println!("  x = {x:?}: polynomial {}, reduced {}", bp.evaluate(&x)?, min_over_ancillas(&q, &x)?);
        }
    }
    Ok(())
}
