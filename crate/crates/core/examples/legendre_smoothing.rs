//! Truncated Legendre series of the unit step at increasing degree.

use crashnet::hubo::ThetaPolynomial;

fn main() -> crashnet::Result<()> {
    for r in [1, 3, 7, 11, 15] {
        let t = ThetaPolynomial::new(r)?;
        let worst = (200..=1000)
            .map(|k| k as f64 * 1e-3)
            .map(|x| (1.0 - t.eval(x).unwrap()).abs())
            .fold(0.0, f64::max);
        let samples: Vec<String> = [-1.0, -0.5, 0.0, 0.5, 1.0]
            .iter()
            .map(|&x| format!("{:.3}", t.eval(x).unwrap()))
            .collect();
        println!("r = {r:>2}: T at -1, -1/2, 0, 1/2, 1 = {}; max error on |x| >= 0.2: {worst:.4}", samples.join(", "));
    }
    let t3 = ThetaPolynomial::new(3)?;
    println!("power basis of T_3: {:?}", t3.power_coefficients());
    Ok(())
}
