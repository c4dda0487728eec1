//! Sample one path of ln Z, read off (zeta, xi^-, xi^+) and dump the events.
//!
//! cargo run --example sample_path -- 0.7 logistic

use cplr::functionals::estimator_triple;
use cplr::path::sample_two_sided;
use cplr::{make_stream, JumpDensity, TruncationPolicy};

fn main() -> cplr::Result<()> {
    let mut args = std::env::args().skip(1);
    let gamma: f64 = args.next().map_or(Ok(1.0), |s| s.parse()).expect("gamma");
    let density = JumpDensity::from_name(&args.next().unwrap_or_else(|| "gaussian".into()))?;

    let path = sample_two_sided(
        &density,
        gamma,
        &TruncationPolicy::default(),
        &mut make_stream(42, 0),
    )?;
    let t = estimator_triple(&path)?;
    eprintln!(
        "events: {} plus, {} minus; max ln Z = {:.4}",
        path.plus.truncated_at(),
        path.minus.truncated_at(),
        path.plus.max().max(path.minus.max())
    );
    eprintln!(
        "zeta = {:.6} (tail estimate {:.1e})",
        t.zeta, t.zeta_tail_bound
    );
    eprintln!(
        "argmax interval = [{:.6}, {:.6}], midpoint {:.6}",
        t.xi_minus,
        t.xi_plus,
        t.xi_alpha(0.5)?
    );

    // in the time units of the Brownian limit
    let rescaled = estimator_triple(&path.rescale_time(density.fisher_information())?)?;
    eprintln!(
        "rescaled: zeta = {:.6}, xi^1/2 = {:.6}",
        rescaled.zeta,
        rescaled.xi_alpha(0.5)?
    );

    path.write_csv(std::io::stdout().lock())
}
