//! Closed-form limit constants.

use cplr::ReferenceConstants;

fn main() {
    let c = ReferenceConstants::new();
    println!("B0 = 16 zeta(3) = {:.10}", c.b0);
    println!("M0 = {}", c.m0);
    println!("E0 = {:.10}", c.e0);
    for alpha in [0.0, 0.25, 0.5] {
        println!(
            "alpha = {alpha:<4}  M_inf = {:.4}  E_inf = {:.4}",
            c.m_inf(alpha),
            c.e_inf(alpha)
        );
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&c.to_json(&[0.0, 0.25, 0.5])).unwrap()
    );
}
