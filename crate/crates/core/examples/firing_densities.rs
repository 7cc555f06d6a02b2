//! First-click densities of a detector hit by several simultaneous photons.
//!
//! More photons make an early click more likely, so the density moves to
//! shorter delays and narrows. With efficiency below one, the total click
//! probability is `1 - (1 - eta)^k`.

use jitterpovm::{firing_density, DetectorModel, JitterDistribution, PhotonArrivalPattern, TimeGrid};

fn main() -> jitterpovm::Result<()> {
    let jitter = JitterDistribution::lognormal_from_moments(1.0, 0.5)?;
    let grid = TimeGrid::new(0.0, 14.0, 14_001)?;

    println!("{:>3} {:>5} {:>10} {:>9} {:>9} {:>9} {:>9}", "k", "eta", "P(click)", "mode", "mean", "std", "fwhm");
    for eta in [1.0, 0.6] {
        let det = DetectorModel::new(eta, jitter)?;
        for k in [1, 2, 5] {
            let p = firing_density(&det, &PhotonArrivalPattern::simultaneous(k, 0.0)?, &grid)?;
            let s = p.peak_statistics()?;
            println!(
                "{k:>3} {eta:>5} {:>10.6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                p.mass(),
                s.mode,
                s.mean,
                s.std,
                s.fwhm
            );
        }
    }

    // photons need not arrive together: the detector reports only the first click
    let det = DetectorModel::new(0.5, jitter)?;
    let staggered = PhotonArrivalPattern::new(vec![0.0, 3.0, 6.0])?;
    let p = firing_density(&det, &staggered, &TimeGrid::new(0.0, 20.0, 20_001)?)?;
    println!("\nphotons at 0, 3, 6 with eta = 0.5:");
    for (lo, hi) in [(0.0, 3.0), (3.0, 6.0), (6.0, 20.0)] {
        println!("  P(first click in [{lo}, {hi})) = {:.4}", p.integral_between(lo, hi)?);
    }
    println!("  total = {:.6}, expected {:.6}", p.mass(), 1.0 - 0.5f64.powi(3));
    Ok(())
}
