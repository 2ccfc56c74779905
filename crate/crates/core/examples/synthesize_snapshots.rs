//! Generate noisy matched-filter snapshots and store them on disk.

use mimo_motion::harness::preset;
use mimo_motion::signal::{noise_variance_for_snr, snr_db, synthesize, SnapshotSet};

fn main() -> mimo_motion::Result<()> {
    let s = preset("example2").unwrap();
    let b = s.reflection();
    let sigma2 = noise_variance_for_snr(&s.params, &b, 5.0);
    let set = synthesize(&s, &b, sigma2, 42)?;
    println!(
        "{} snapshots x {} paths, noise variance {sigma2:.4}, SNR {:.2} dB",
        set.len(),
        set.path_count(),
        snr_db(&s.params, &b, sigma2)?
    );
    println!("first sample {:.4}", set.snapshots()[0][0]);

    let path = std::env::temp_dir().join("example2.snp");
    set.save(&path)?;
    let back = SnapshotSet::load(&path)?;
    println!("round trip through {} identical: {}", path.display(), back == set);
    Ok(())
}
