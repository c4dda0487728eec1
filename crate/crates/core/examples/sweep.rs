//! A small gamma x alpha sweep of B, M^alpha and E^alpha, printed as CSV.

use cplr::montecarlo::{run_sweep_with_progress, SweepConfig};
use cplr::{JumpDensity, TruncationPolicy};

fn main() -> cplr::Result<()> {
    let config = SweepConfig {
        gamma_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
        alphas: vec![0.0, 0.25, 0.5],
        reps: 20_000,
        seed: 1,
        density_name: "gaussian".into(),
        trunc: TruncationPolicy::default(),
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let rows = run_sweep_with_progress(&config, &JumpDensity::Gaussian, |cell| {
        let g4 = cell[0].gamma.powi(4);
        eprintln!(
            "gamma {:>5}: gamma^4 B = {:8.3}, E^1/2 = {:.4}",
            cell[0].gamma,
            g4 * cell[0].b_hat,
            cell[2].e_hat
        );
    })?;
    std::io::Write::write_all(&mut std::io::stdout(), &cplr::io::sweep_csv(&rows)?)?;
    Ok(())
}
