//! Cross-scenario comparison of SNR-gain curves.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SnrGainCurve;

/// Bands centred above this count as "high" in the summary.
pub const HIGH_BAND_HZ: f64 = 2000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub speeds_rev_s: Vec<f64>,
    pub mean_gain_db: Vec<Option<f64>>,
    pub high_band_mean_gain_db: Vec<Option<f64>>,
    /// Stationary high-band mean minus the best moving one.
    pub stationary_gap_db: Option<f64>,
    /// Largest pairwise difference among moving high-band means.
    pub moving_spread_db: Option<f64>,
}

pub fn summarize(curves: &[SnrGainCurve]) -> SweepSummary {
    let high: Vec<Option<f64>> = curves.iter().map(|c| c.mean_gain_above(HIGH_BAND_HZ)).collect();
    let stationary = curves
        .iter()
        .zip(&high)
        .find(|(c, _)| c.speed_rev_s == 0.0)
        .and_then(|(_, h)| *h);
    let moving: Vec<f64> = curves
        .iter()
        .zip(&high)
        .filter(|(c, _)| c.speed_rev_s != 0.0)
        .filter_map(|(_, h)| *h)
        .collect();
    let best = moving.iter().cloned().reduce(f64::max);
    let worst = moving.iter().cloned().reduce(f64::min);
    SweepSummary {
        speeds_rev_s: curves.iter().map(|c| c.speed_rev_s).collect(),
        mean_gain_db: curves.iter().map(SnrGainCurve::mean_gain).collect(),
        high_band_mean_gain_db: high,
        stationary_gap_db: stationary.zip(best).map(|(s, b)| s - b),
        moving_spread_db: best.zip(worst).map(|(b, w)| b - w),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// Wide table: one gain column per speed, one row per band, then three
/// summary rows. Undefined statistics are left empty.
pub fn write_sweep_csv<W: Write>(mut out: W, curves: &[SnrGainCurve], summary: &SweepSummary) -> io::Result<()> {
    let header: Vec<String> = curves.iter().map(|c| format!("gain_db@{}", c.speed_rev_s)).collect();
    writeln!(out, "band_hz,{}", header.join(","))?;
    for (i, band) in curves[0].band_hz.iter().enumerate() {
        let row: Vec<String> = curves.iter().map(|c| cell(c.gain_db.get(i).copied())).collect();
        writeln!(out, "{band},{}", row.join(","))?;
    }
    let high: Vec<String> = summary.high_band_mean_gain_db.iter().map(|&v| cell(v)).collect();
    writeln!(out, "mean_gain_above_2khz_db,{}", high.join(","))?;
    let pad = ",".repeat(curves.len().saturating_sub(1));
    writeln!(out, "stationary_moving_gap_db,{}{pad}", cell(summary.stationary_gap_db))?;
    writeln!(out, "moving_spread_db,{}{pad}", cell(summary.moving_spread_db))?;
    Ok(())
}

/// Parses a `snr_gain.csv` written by the evaluate stage.
pub fn read_gain_csv(path: &Path) -> Result<SnrGainCurve> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    if lines.next() != Some("band_hz,input_snr_db,output_snr_db,gain_db,speed_rev_s") {
        return Err(bad("unexpected header".into()));
    }
    let mut curve = SnrGainCurve {
        speed_rev_s: f64::NAN,
        band_hz: Vec::new(),
        input_snr_db: Vec::new(),
        output_snr_db: Vec::new(),
        gain_db: Vec::new(),
        flagged_hz: Vec::new(),
    };
    for (n, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", n + 1)))?;
        if v.len() != 5 {
            return Err(bad(format!("row {} has {} fields", n + 1, v.len())));
        }
        curve.band_hz.push(v[0]);
        curve.input_snr_db.push(v[1]);
        curve.output_snr_db.push(v[2]);
        curve.gain_db.push(v[3]);
        curve.speed_rev_s = v[4];
    }
    if curve.band_hz.is_empty() {
        return Err(bad("no bands".into()));
    }
    Ok(curve)
}

/// Joins the gain curves of completed scenario runs into `out_csv` and
/// returns the summary.
pub fn sweep_report(dirs: &[PathBuf], out_csv: &Path) -> Result<SweepSummary> {
    if dirs.len() < 2 {
        return Err(Error::invalid("sweep report needs at least two scenario runs"));
    }
    let mut curves = dirs
        .iter()
        .map(|d| read_gain_csv(&d.join("snr_gain.csv")))
        .collect::<Result<Vec<_>>>()?;
    curves.sort_by(|a, b| a.speed_rev_s.total_cmp(&b.speed_rev_s));
    if curves.iter().any(|c| c.band_hz != curves[0].band_hz) {
        return Err(Error::invalid("scenario runs use different band layouts"));
    }
    let summary = summarize(&curves);
    let mut out = fs::File::create(out_csv).map(io::BufWriter::new).map_err(|e| Error::io(out_csv, e))?;
    write_sweep_csv(&mut out, &curves, &summary)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(out_csv, e))?;
    Ok(summary)
}
