//! CSV and JSON writers. Floats use the shortest representation that
//! round-trips (`{:?}`), so identical runs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::decay::EnvelopeFit;
use crate::error::Result;
use crate::functionals::FunctionalSample;

pub const TRACE_HEADER: &str = "t,E,E0,F,V,omega,tip_slope_velocity,boundary_flux,torque_flux";

pub fn trace_csv(samples: &[FunctionalSample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            s.t, s.e, s.e0, s.f, s.v, s.omega, s.tip_slope_velocity, s.boundary_flux, s.torque_flux
        );
    }
    out
}

pub fn envelope_csv(samples: &[FunctionalSample], fit: &EnvelopeFit) -> Result<String> {
    let mut out = String::from("t,E0,envelope\n");
    for s in samples {
        let _ = writeln!(out, "{:?},{:?},{:?}", s.t, s.e0, fit.value(s.t)?);
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the compact JSON encoding.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("serialisable value"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| std::io::Error::other(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// CSV field, quoted when it contains a separator or a quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip_floats() {
        let s = FunctionalSample {
            t: 0.1,
            e: 1e-20,
            e0: 2.0,
            f: -0.0,
            v: 1.0 / 3.0,
            omega: 3.0,
            tip_slope_velocity: 0.0,
            boundary_flux: 0.0,
            torque_flux: 0.0,
        };
        let csv = trace_csv(&[s]);
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(row, "0.1,1e-20,2.0,-0.0,0.3333333333333333,3.0,0.0,0.0,0.0");
        for (field, value) in row.split(',').zip([s.t, s.e, s.e0, s.f, s.v]) {
            assert_eq!(field.parse::<f64>().unwrap(), value);
        }
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
