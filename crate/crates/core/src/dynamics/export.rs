use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Orbit, OrbitStatus};
use crate::scalar::Scalar;

/// Column order of the CSV export. Part of the file format contract.
pub const CSV_HEADER: &str = "n,re,im,sign,ambiguity";

/// CSV with one row per recorded step, then `# key=value` footer lines.
pub fn orbit_csv<T: Scalar>(orbit: &Orbit<T>, footer: &[(String, String)]) -> String {
    let mut out = String::with_capacity(48 * orbit.len() + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for n in 0..orbit.len() {
        let z = orbit.points()[n];
        let _ = writeln!(
            out,
            "{n},{},{},{},{}",
            z.re,
            z.im,
            orbit.signs()[n].value(),
            orbit.ambiguities()[n]
        );
    }
    let _ = writeln!(out, "# alpha={}", orbit.alpha());
    let _ = writeln!(out, "# alpha_hex={}", orbit.alpha().to_hex_bits());
    let z0 = orbit.z_init();
    let _ = writeln!(out, "# z_init={},{}", z0.re, z0.im);
    let _ = writeln!(out, "# status={}", status_word(&orbit.status()));
    for (k, v) in footer {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

fn status_word(status: &OrbitStatus) -> String {
    match status {
        OrbitStatus::Completed => "completed".into(),
        OrbitStatus::Tie(n) => format!("tie:{n}"),
        OrbitStatus::Warned(ns) => format!("warned:{}", ns.len()),
    }
}

/// JSON view of an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitJson<T> {
    pub alpha: T,
    pub alpha_hex: String,
    pub z_init: [T; 2],
    pub horizon: usize,
    pub status: String,
    pub tie: Option<usize>,
    pub warnings: Vec<usize>,
    pub points: Vec<[T; 2]>,
    pub signs: Vec<i8>,
    pub ambiguities: Vec<T>,
    pub min_ambiguity: T,
}

pub fn orbit_json<T: Scalar>(orbit: &Orbit<T>) -> OrbitJson<T> {
    let z0 = orbit.z_init();
    OrbitJson {
        alpha: orbit.alpha(),
        alpha_hex: orbit.alpha().to_hex_bits(),
        z_init: [z0.re, z0.im],
        horizon: orbit.params().horizon(),
        status: status_word(&orbit.status()),
        tie: orbit.tie(),
        warnings: orbit.warnings().to_vec(),
        points: orbit.points().iter().map(|z| [z.re, z.im]).collect(),
        signs: orbit.signs().iter().map(|s| s.value()).collect(),
        ambiguities: orbit.ambiguities().to_vec(),
        min_ambiguity: orbit.min_ambiguity(0).unwrap_or(T::zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_orbit, Params};
    use num_complex::Complex64;

    #[test]
    fn csv_columns_and_footer() {
        let p = Params::new(0.5, Complex64::new(3.0, 4.0), 2).unwrap();
        let o = run_orbit(&p);
        let text = orbit_csv(&o, &[("period".into(), "k=0 p=1".into())]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[..4], ["0", "2", "4", "-1"]);
        assert!(text.contains("# alpha_hex=0x3fe0000000000000\n"));
        assert!(text.ends_with("# period=k=0 p=1\n"));
    }

    #[test]
    fn json_points_round_trip_bits() {
        let p = Params::new(0.3, Complex64::new(0.1, 2.0), 20).unwrap();
        let o = run_orbit(&p);
        let text = serde_json::to_string(&orbit_json(&o)).unwrap();
        let back: OrbitJson<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.points.len(), 20);
        for (a, b) in back.points.iter().zip(o.points()) {
            assert_eq!(a[0].to_bits(), b.re.to_bits());
            assert_eq!(a[1].to_bits(), b.im.to_bits());
        }
    }
}
