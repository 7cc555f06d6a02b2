//! What a herald click says about the emission time of its twin photon.
//!
//! The pair envelope is a unit-width rectangle. A sharp herald detector pins
//! the emission time; a sloppy one leaves most of the envelope possible.

use jitterpovm::{heralded_state, temporal_spread, DetectorModel, JitterDistribution, TemporalAmplitude, TimeGrid};

fn main() -> jitterpovm::Result<()> {
    let psi = TemporalAmplitude::rectangular(0.0, 1.0)?;
    let grid = TimeGrid::new(-0.5, 0.5, 1001)?;
    let no_information = 1.0 / 12f64.sqrt();

    println!("{:>10} {:>10} {:>10} {:>10}", "jitter std", "herald T", "mean t", "std t");
    for std in [0.01, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let det = DetectorModel::new(1.0, JitterDistribution::lognormal_from_moments(1.0, std)?)?;
        let herald = det.jitter().mean();
        let spread = temporal_spread(&heralded_state(&det, &psi, herald, &grid)?);
        println!("{std:>10} {herald:>10.4} {:>10.4} {:>10.4}", spread.mean, spread.std);
    }
    println!("(a flat state on the envelope has std {no_information:.4})");

    // the click time shifts the heralded state along the envelope
    let det = DetectorModel::new(1.0, JitterDistribution::truncated_gaussian(1.0, 0.1)?)?;
    println!("\nherald time sweep with a 0.1-wide gaussian jitter:");
    for herald in [0.6, 0.8, 1.0, 1.2, 1.4] {
        let spread = temporal_spread(&heralded_state(&det, &psi, herald, &grid)?);
        println!("  T = {herald:.1}: photon emitted at {:+.4} +- {:.4}", spread.mean, spread.std);
    }
    Ok(())
}
