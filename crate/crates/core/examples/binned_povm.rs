//! Click probabilities in time bins, with and without dark counts, and the
//! click density of a single-photon wavepacket.

use jitterpovm::{
    add_dark_counts, binned_off_probability, binned_on_probability, detect_wavepacket, firing_density,
    DetectorModel, JitterDistribution, PhotonArrivalPattern, TemporalAmplitude, TimeGrid,
};

fn main() -> jitterpovm::Result<()> {
    let det = DetectorModel::new(0.7, JitterDistribution::lognormal_from_moments(1.0, 0.3)?)?.with_dark_count_rate(1e-3)?;
    let grid = TimeGrid::new(0.0, 8.0, 8001)?;
    let photon = firing_density(&det, &PhotonArrivalPattern::simultaneous(1, 0.0)?, &grid)?;
    let with_dark = add_dark_counts(&photon, &det);

    println!("{:>12} {:>12} {:>12} {:>12}", "bin", "P(on)", "P(off)", "P(on)+dark");
    for lo in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let hi = lo + 0.5;
        println!(
            "[{lo:>4}, {hi:>4}) {:>12.6} {:>12.6} {:>12.6}",
            binned_on_probability(&photon, lo, hi)?,
            binned_off_probability(&photon, lo, hi)?,
            binned_on_probability(&with_dark, lo, hi)?
        );
    }

    // a photon with a finite wavepacket: its arrival spread adds to the jitter
    let psi = TemporalAmplitude::gaussian(0.0, 0.4)?;
    let g = TimeGrid::new(-3.0, 8.0, 11_001)?;
    let p = detect_wavepacket(&det, &psi, &g)?;
    let s = p.peak_statistics()?;
    println!(
        "\nwavepacket std 0.4: click probability {:.4}, click-time std {:.4} (jitter {:.4})",
        p.mass(),
        s.std,
        det.jitter().std()
    );
    Ok(())
}
