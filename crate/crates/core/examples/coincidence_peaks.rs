//! Start-stop delay histograms of simultaneous photon pairs on two
//! identical detectors. The peak is the cross-correlation of the two
//! jitters: symmetric, and wider for noisier detectors.

use jitterpovm::{
    default_delay_grid, delay_density_factorized, DelayIntensity, DetectorModel, JitterDistribution,
};

fn main() -> jitterpovm::Result<()> {
    let pairs = DelayIntensity::Simultaneous;
    println!("{:>10} {:>10} {:>10} {:>12} {:>10}", "jitter std", "fwhm", "std", "sqrt2 * std", "mass");
    for std in [0.25, 0.5, 1.0] {
        let det = DetectorModel::new(1.0, JitterDistribution::lognormal_from_moments(1.0, std)?)?;
        let grid = default_delay_grid(&det, &det, &pairs, 0.005)?;
        let p = delay_density_factorized(&det, &det, &pairs, &grid)?;
        let s = p.peak_statistics()?;
        println!(
            "{std:>10} {:>10.4} {:>10.4} {:>12.4} {:>10.6}",
            s.fwhm,
            s.std,
            2f64.sqrt() * det.jitter().std(),
            p.mass()
        );
    }

    // different detectors on the two arms shift the peak by the latency difference
    let fast = DetectorModel::new(0.9, JitterDistribution::truncated_gaussian(0.4, 0.05)?)?;
    let slow = DetectorModel::new(0.7, JitterDistribution::lognormal_from_moments(1.0, 0.2)?)?;
    let grid = default_delay_grid(&fast, &slow, &pairs, 0.002)?;
    let p = delay_density_factorized(&fast, &slow, &pairs, &grid)?;
    let s = p.peak_statistics()?;
    println!(
        "\nfast start, slow stop: mean delay {:.4} (latency difference {:.4}), coincidence probability {:.4}",
        s.mean,
        slow.jitter().mean() - fast.jitter().mean(),
        p.mass()
    );
    Ok(())
}
