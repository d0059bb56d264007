//! CSV writers. Values print in shortest round-trip form, so the bytes are
//! a pure function of the numbers.

use std::io::{self, Write};

use super::{IldCurve, SnrGainCurve, SENTINEL_DB};

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        format!("{SENTINEL_DB}")
    }
}

pub fn write_gain_csv<W: Write>(mut out: W, curves: &[SnrGainCurve]) -> io::Result<()> {
    writeln!(out, "band_hz,input_snr_db,output_snr_db,gain_db,speed_rev_s")?;
    for c in curves {
        for i in 0..c.band_hz.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                num(c.band_hz[i]),
                num(c.input_snr_db[i]),
                num(c.output_snr_db[i]),
                num(c.gain_db[i]),
                num(c.speed_rev_s)
            )?;
        }
    }
    Ok(())
}

pub fn write_repeatability_csv<W: Write>(mut out: W, error_db: &[f64]) -> io::Result<()> {
    writeln!(out, "take,error_db")?;
    for (i, &e) in error_db.iter().enumerate() {
        writeln!(out, "{i},{}", num(e))?;
    }
    Ok(())
}

/// One row per `(label, nmse_db)` pair.
pub fn write_nmse_csv<W: Write>(mut out: W, rows: &[(&str, f64)]) -> io::Result<()> {
    writeln!(out, "channel,nmse_db")?;
    for (label, v) in rows {
        writeln!(out, "{label},{}", num(*v))?;
    }
    Ok(())
}

pub fn write_ild_csv<W: Write>(mut out: W, curves: &[IldCurve]) -> io::Result<()> {
    writeln!(out, "freq_hz,ild_db,theta_deg")?;
    for c in curves {
        for (f, v) in c.freq_hz.iter().zip(&c.ild_db) {
            writeln!(out, "{},{},{}", num(*f), num(*v), num(c.theta_deg))?;
        }
    }
    Ok(())
}

/// Rows of `(azimuth in degrees, ITD in seconds)`; written in microseconds.
pub fn write_itd_csv<W: Write>(mut out: W, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "theta_deg,itd_us")?;
    for (theta, itd) in rows {
        writeln!(out, "{},{}", num(*theta), num(itd * 1e6))?;
    }
    Ok(())
}
