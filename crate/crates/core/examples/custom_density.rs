//! Plugging in a user-supplied innovation density: Student t with 5 degrees
//! of freedom, scaled to unit variance.

use cplr::densities::CustomDensity;
use cplr::montecarlo::{run_sweep_with_density, SweepConfig};
use cplr::{JumpDensity, TruncationPolicy};
use rand::Rng;
use rand_distr::StudentT;

const NU: f64 = 5.0;

fn main() -> cplr::Result<()> {
    let scale = ((NU - 2.0) / NU).sqrt();
    let norm = statrs::function::gamma::ln_gamma((NU + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(NU / 2.0)
        - 0.5 * (NU * std::f64::consts::PI).ln()
        - scale.ln();
    let ln_pdf = move |x: f64| norm - (NU + 1.0) / 2.0 * (1.0 + (x / scale).powi(2) / NU).ln();
    let t = StudentT::new(NU).unwrap();
    let density = JumpDensity::Custom(CustomDensity::new("student5", ln_pdf, move |rng| {
        scale * rng.sample(t)
    })?);

    // (nu + 1) / (nu + 3) for the standard t, divided by the squared scale
    let exact = (NU + 1.0) / (NU + 3.0) / (scale * scale);
    println!(
        "Fisher information: quadrature {:.8}, exact {exact:.8}",
        density.fisher_information()
    );

    let config = SweepConfig {
        gamma_grid: vec![0.5, 2.0],
        alphas: vec![0.0, 0.5],
        reps: 20_000,
        seed: 3,
        density_name: density.name().into(),
        trunc: TruncationPolicy::default(),
        workers: 1,
    };
    for r in run_sweep_with_density(&config, &density)? {
        println!(
            "gamma={} alpha={} B={:.4} M={:.4} E={:.4}",
            r.gamma, r.alpha, r.b_hat, r.m_hat, r.e_hat
        );
    }
    Ok(())
}
