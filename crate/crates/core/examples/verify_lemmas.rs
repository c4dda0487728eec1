//! The statistical verification suite at a tenth of its default size.

use cplr::verify::{run_suite, SuiteConfig};
use cplr::JumpDensity;

fn main() -> cplr::Result<()> {
    for density in [JumpDensity::Gaussian, JumpDensity::Logistic] {
        let config = SuiteConfig {
            density,
            seed: 2,
            workers: 1,
            scale: 0.1,
        };
        for report in run_suite(&config)? {
            println!("{report}");
        }
    }
    Ok(())
}
