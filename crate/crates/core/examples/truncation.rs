//! How the truncation gap trades path length against the tail error of zeta.

use cplr::functionals::zeta;
use cplr::path::sample_two_sided;
use cplr::{make_stream, JumpDensity, TruncationPolicy};

fn main() -> cplr::Result<()> {
    let gamma = 0.5;
    for gap in [5.0, 10.0, 20.0, 30.0, 40.0] {
        let policy = TruncationPolicy::new(gap, 10_000_000)?;
        let (mut events, mut worst) = (0usize, 0.0_f64);
        for i in 0..2_000 {
            let path = sample_two_sided(
                &JumpDensity::Gaussian,
                gamma,
                &policy,
                &mut make_stream(4, i),
            )?;
            events += path.plus.truncated_at() + path.minus.truncated_at();
            worst = worst.max(zeta(&path)?.1);
        }
        println!(
            "gap {gap:>4}: rebound prob <= {:.1e}, mean events {:>7.1}, worst tail estimate {worst:.2e}",
            policy.rebound_probability(gap),
            events as f64 / 2_000.0
        );
    }
    Ok(())
}
