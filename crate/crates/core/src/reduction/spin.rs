use crate::hubo::{BinaryPolynomial, SpinPolynomial};

/// Substitutes `x = (1 + σ) / 2` term by term.
pub fn boolean_to_spin(bp: &BinaryPolynomial) -> SpinPolynomial {
    let mut out = SpinPolynomial::zero(bp.labels().to_vec());
    for (vars, c) in bp.terms() {
        let k = vars.len();
        let w = c / (1u64 << k) as f64;
        for_each_subset(vars, |sub| out.add_term(sub, w));
    }
    out
}

/// Substitutes `σ = 2x - 1` term by term.
pub fn spin_to_boolean(sp: &SpinPolynomial) -> BinaryPolynomial {
    let mut out = BinaryPolynomial::zero(sp.labels().to_vec());
    for (vars, c) in sp.terms() {
        let k = vars.len();
        for_each_subset(vars, |sub| {
            let s = sub.len();
            let sign = if (k - s) % 2 == 0 { 1.0 } else { -1.0 };
            out.add_term(sub, sign * c * (1u64 << s) as f64);
        });
    }
    out
}

fn for_each_subset(vars: &[u32], mut f: impl FnMut(Vec<u32>)) {
    let k = vars.len();
    assert!(k < 64, "term order {k} too large to expand");
    for mask in 0u64..(1u64 << k) {
        let sub: Vec<u32> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| vars[b]).collect();
        f(sub);
    }
}
