use super::db;
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// A dB value per channel plus the value for all channels pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDb {
    pub per_channel: Vec<f64>,
    pub pooled: f64,
}

fn same_shape(a: &AudioBuffer, b: &AudioBuffer, what: &str) -> Result<()> {
    if a.channels() != b.channels() || a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.channels(),
            a.len(),
            b.channels(),
            b.len()
        )));
    }
    Ok(())
}

/// SNR with channel energies pooled, `10·log10(Σ t² / Σ n²)`.
pub fn snr_db(target: &AudioBuffer, noise: &AudioBuffer) -> Result<f64> {
    Ok(snr_db_per_channel(target, noise)?.pooled)
}

pub fn snr_db_per_channel(target: &AudioBuffer, noise: &AudioBuffer) -> Result<ChannelDb> {
    same_shape(target, noise, "snr")?;
    let t = target.channel_energy();
    let n = noise.channel_energy();
    if n.iter().any(|&e| e == 0.0) {
        return Err(Error::invalid("noise has zero energy"));
    }
    Ok(ChannelDb {
        per_channel: t.iter().zip(&n).map(|(t, n)| db(t / n)).collect(),
        pooled: db(t.iter().sum::<f64>() / n.iter().sum::<f64>()),
    })
}

/// Gain for `noise` that puts the pooled SNR at `desired_db`.
pub fn scale_to_snr(target: &AudioBuffer, noise: &AudioBuffer, desired_db: f64) -> Result<f64> {
    same_shape(target, noise, "scale_to_snr")?;
    if !desired_db.is_finite() {
        return Err(Error::invalid(format!("desired SNR {desired_db} dB is not finite")));
    }
    let pt: f64 = target.channel_energy().iter().sum();
    let pn: f64 = noise.channel_energy().iter().sum();
    if pt == 0.0 || pn == 0.0 {
        return Err(Error::invalid("target and noise must both have nonzero power"));
    }
    Ok((pt / pn / 10f64.powf(desired_db / 10.0)).sqrt())
}

/// `10·log10(Σ(test − ref)² / Σ ref²)`.
pub fn nmse_samplewise(test: &AudioBuffer, reference: &AudioBuffer) -> Result<ChannelDb> {
    same_shape(test, reference, "nmse")?;
    let err = test.try_sub(reference)?.channel_energy();
    let r = reference.channel_energy();
    if r.iter().any(|&e| e == 0.0) {
        return Err(Error::invalid("reference has a silent channel"));
    }
    Ok(ChannelDb {
        per_channel: err.iter().zip(&r).map(|(e, r)| db(e / r)).collect(),
        pooled: db(err.iter().sum::<f64>() / r.iter().sum::<f64>()),
    })
}

/// Per-take error against the sample-wise mean of all takes.
#[derive(Debug, Clone, PartialEq)]
pub struct Repeatability {
    /// `Σ(x_i − x̄)² / Σ x̄²`. Independent noise of relative power `p`
    /// gives `p·(n−1)/n`.
    pub naive_db: Vec<f64>,
    /// Naive value scaled by `n/(n−1)`, an unbiased estimate of `p`.
    pub corrected_db: Vec<f64>,
}

pub fn repeatability_error(takes: &[AudioBuffer]) -> Result<Repeatability> {
    if takes.len() < 2 {
        return Err(Error::invalid("repeatability needs at least two takes"));
    }
    for t in &takes[1..] {
        same_shape(&takes[0], t, "repeatability")?;
    }
    let n = takes.len() as f64;
    let mut mean = takes[0].samples().clone();
    for t in &takes[1..] {
        mean += t.samples();
    }
    mean /= n;
    let ref_energy: f64 = mean.iter().map(|v| v * v).sum();
    if ref_energy == 0.0 {
        return Err(Error::invalid("mean of the takes is silent"));
    }
    let ratios: Vec<f64> = takes
        .iter()
        .map(|t| {
            let e: f64 = t.samples().iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum();
            e / ref_energy
        })
        .collect();
    Ok(Repeatability {
        naive_db: ratios.iter().map(|&r| db(r)).collect(),
        corrected_db: ratios.iter().map(|&r| db(r * n / (n - 1.0))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::SENTINEL_DB;
    use super::*;
    use crate::scene::{substream, white_noise};
    use proptest::prelude::*;

    fn noise(seed: u64, len: usize) -> AudioBuffer {
        let ch: Vec<Vec<f64>> = (0..2).map(|c| white_noise(&mut substream(seed, "lvl", c), len)).collect();
        AudioBuffer::from_channels(&ch, 48_000).unwrap()
    }

    #[test]
    fn snr_examples() {
        let t = noise(1, 1000);
        assert!(snr_db(&t, &t).unwrap().abs() < 1e-12);
        assert!((snr_db(&t, &t.scaled(0.1)).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(snr_db(&t.scaled(0.0), &t).unwrap(), SENTINEL_DB);
        assert!(snr_db(&t, &t.scaled(0.0)).is_err());
        assert!(snr_db(&t, &noise(1, 999)).is_err());
        let per = snr_db_per_channel(&t, &t.scaled(0.5)).unwrap();
        assert_eq!(per.per_channel.len(), 2);
    }

    #[test]
    fn scale_to_snr_examples() {
        let t = noise(2, 1000);
        assert!((scale_to_snr(&t, &t, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((scale_to_snr(&t, &t, 10.0).unwrap() - 0.31622776601683794).abs() < 1e-12);
        assert!(scale_to_snr(&t, &t, f64::NEG_INFINITY).is_err());
        assert!(scale_to_snr(&t.scaled(0.0), &t, 0.0).is_err());
    }

    #[test]
    fn nmse_examples() {
        let r = noise(3, 1000);
        assert_eq!(nmse_samplewise(&r, &r).unwrap().pooled, SENTINEL_DB);
        assert!((nmse_samplewise(&r.scaled(1.1), &r).unwrap().pooled + 20.0).abs() < 1e-9);
        assert!(nmse_samplewise(&r, &noise(3, 10)).is_err());
    }

    #[test]
    fn repeatability_examples() {
        let common = noise(4, 20_000);
        let same = vec![common.clone(); 3];
        let rep = repeatability_error(&same).unwrap();
        assert!(rep.naive_db.iter().all(|&v| v == SENTINEL_DB));
        assert!(repeatability_error(&same[..1]).is_err());

        // −20 dB independent noise per take
        let n = 8;
        let takes: Vec<AudioBuffer> = (0..n)
            .map(|i| common.try_add(&noise(100 + i, 20_000).scaled(0.1)).unwrap())
            .collect();
        let rep = repeatability_error(&takes).unwrap();
        assert_eq!(rep.naive_db.len(), 8);
        let predicted = -20.0 + 10.0 * (7.0f64 / 8.0).log10();
        for (naive, corr) in rep.naive_db.iter().zip(&rep.corrected_db) {
            assert!((naive - predicted).abs() < 0.3, "{naive}");
            assert!((corr + 20.0).abs() < 0.3, "{corr}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn snr_is_scale_invariant(seed in 0u64..1000, c in prop_oneof![-100.0f64..-1e-3, 1e-3f64..100.0]) {
            let t = noise(seed, 256);
            let n = noise(seed + 7, 256);
            let a = snr_db(&t, &n).unwrap();
            let b = snr_db(&t.scaled(c), &n.scaled(c)).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn nmse_is_scale_invariant_and_monotone(seed in 0u64..1000, c in 1e-3f64..100.0, e in 1e-3f64..1.0) {
            let r = noise(seed, 256);
            let p = noise(seed + 9, 256);
            let small = r.try_add(&p.scaled(e)).unwrap();
            let large = r.try_add(&p.scaled(2.0 * e)).unwrap();
            let a = nmse_samplewise(&small, &r).unwrap().pooled;
            let b = nmse_samplewise(&small.scaled(c), &r.scaled(c)).unwrap().pooled;
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(nmse_samplewise(&large, &r).unwrap().pooled > a);
        }

        #[test]
        fn scaled_noise_hits_requested_snr(seed in 0u64..1000, want in -30.0f64..40.0) {
            let t = noise(seed, 256);
            let n = noise(seed + 3, 256);
            let g = scale_to_snr(&t, &n, want).unwrap();
            prop_assert!((snr_db(&t, &n.scaled(g)).unwrap() - want).abs() < 1e-9);
        }
    }
}
