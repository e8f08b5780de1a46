//! Polyline CSV format.
//!
//! ```text
//! # anglewalk v1, seed=<seed>, construction=<tag>, n=<n>, scale=<s>
//! # version=<tool version>, spec=<spec as JSON>
//! t,x,y[,phi,driver]
//! 0,0,0
//! ...
//! ```
//!
//! Rows are the grid vertices `t = k/n`. The seed is written exactly as the
//! user supplied it. Floats use Rust's shortest round-trip formatting, so a
//! file parses back to the same bits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::plane::Point2;
use crate::walks::Polyline;
use crate::{FORMAT_TAG, TOOL_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvHeader {
    pub seed: String,
    pub construction: String,
    pub n: usize,
    pub scale: f64,
    /// Full spec as JSON, written on the second comment line.
    pub spec_json: String,
}

/// Phase and driver columns of a limit realization.
#[derive(Debug, Clone, Copy)]
pub struct Tracks<'a> {
    pub phi: &'a [f64],
    pub driver: &'a [f64],
}

pub fn write_polyline_csv<W: Write>(
    mut out: W,
    header: &CsvHeader,
    path: &Polyline,
    tracks: Option<Tracks<'_>>,
) -> Result<()> {
    let rows = path.vertices().len();
    if let Some(t) = tracks {
        if t.phi.len() != rows || t.driver.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "tracks have {} / {} entries for {rows} vertices",
                t.phi.len(),
                t.driver.len()
            )));
        }
    }
    writeln!(
        out,
        "# {FORMAT_TAG}, seed={}, construction={}, n={}, scale={}",
        header.seed, header.construction, header.n, header.scale
    )?;
    writeln!(out, "# version={TOOL_VERSION}, spec={}", header.spec_json)?;
    match tracks {
        Some(_) => writeln!(out, "t,x,y,phi,driver")?,
        None => writeln!(out, "t,x,y")?,
    }
    let n = path.n();
    for (k, p) in path.vertices().iter().enumerate() {
        let t = k as f64 / n as f64;
        match tracks {
            Some(tr) => writeln!(out, "{t},{},{},{},{}", p.x, p.y, tr.phi[k], tr.driver[k])?,
            None => writeln!(out, "{t},{},{}", p.x, p.y)?,
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub point: Point2,
    pub phi: Option<f64>,
    pub driver: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub header: CsvHeader,
    pub version: String,
    pub rows: Vec<CsvRow>,
}

impl ParsedCsv {
    pub fn polyline(&self) -> Result<Polyline> {
        Polyline::from_vertices(self.rows.iter().map(|r| r.point).collect(), self.header.scale)
    }
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.split(", ")
        .find_map(|part| part.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Format(format!("header is missing `{key}`")))
}

fn number<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::Format(format!("bad {what} `{text}`")))
}

/// Parse a file written by [`write_polyline_csv`].
pub fn read_polyline_csv<R: BufRead>(input: R) -> Result<ParsedCsv> {
    let mut lines = input.lines();
    let mut next_line = |what: &str| -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Format(format!("missing {what}")))
    };
    let first = next_line("header line")?;
    let body = first
        .strip_prefix("# ")
        .and_then(|r| r.strip_prefix(FORMAT_TAG))
        .and_then(|r| r.strip_prefix(", "))
        .ok_or_else(|| Error::Format(format!("expected `# {FORMAT_TAG}, ...` header")))?;
    let seed = field(body, "seed")?.to_string();
    let construction = field(body, "construction")?.to_string();
    let n: usize = number(field(body, "n")?, "n")?;
    let scale: f64 = number(field(body, "scale")?, "scale")?;

    let second = next_line("version line")?;
    let meta = second
        .strip_prefix("# ")
        .ok_or_else(|| Error::Format("expected `# version=...` line".into()))?;
    let version = field(meta, "version")?.to_string();
    let spec_json = meta
        .split_once("spec=")
        .map(|(_, s)| s.to_string())
        .ok_or_else(|| Error::Format("header is missing `spec`".into()))?;

    let columns = next_line("column line")?;
    let with_tracks = match columns.as_str() {
        "t,x,y" => false,
        "t,x,y,phi,driver" => true,
        other => return Err(Error::Format(format!("unexpected columns `{other}`"))),
    };
    let mut rows = Vec::with_capacity(n + 1);
    for line in lines {
        let line = line?;
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| number(v, "value"))
            .collect::<Result<_>>()?;
        let expect = if with_tracks { 5 } else { 3 };
        if vals.len() != expect {
            return Err(Error::Format(format!("row `{line}` has {} fields", vals.len())));
        }
        rows.push(CsvRow {
            t: vals[0],
            point: Point2::new(vals[1], vals[2]),
            phi: with_tracks.then(|| vals[3]),
            driver: with_tracks.then(|| vals[4]),
        });
    }
    if rows.len() != n + 1 {
        return Err(Error::Format(format!("expected {} rows, found {}", n + 1, rows.len())));
    }
    Ok(ParsedCsv {
        header: CsvHeader {
            seed,
            construction,
            n,
            scale,
            spec_json,
        },
        version,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{derive_stream, Seed};
    use crate::walks::{rescale, simulate_walk, RescaleMode, WalkSpec};
    use proptest::prelude::*;

    fn header(n: usize, scale: f64) -> CsvHeader {
        CsvHeader {
            seed: "0x2A".into(),
            construction: "iid".into(),
            n,
            scale,
            spec_json: r#"{"n":3}"#.into(),
        }
    }

    #[test]
    fn exact_layout() {
        let path = Polyline::from_vertices(
            vec![Point2::new(0.0, 0.0), Point2::new(0.5, 0.0), Point2::new(0.5, 0.5)],
            0.5,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_polyline_csv(&mut buf, &header(2, 0.5), &path, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = format!(
            "# anglewalk v1, seed=0x2A, construction=iid, n=2, scale=0.5\n\
             # version={TOOL_VERSION}, spec={{\"n\":3}}\n\
             t,x,y\n0,0,0\n0.5,0.5,0\n1,0.5,0.5\n"
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn track_length_mismatch() {
        let path = Polyline::from_vertices(vec![Point2::default(); 3], 1.0).unwrap();
        let t = Tracks { phi: &[0.0; 2], driver: &[0.0; 3] };
        assert!(write_polyline_csv(Vec::new(), &header(2, 1.0), &path, Some(t)).is_err());
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(read_polyline_csv("x,y\n1,2\n".as_bytes()).is_err());
        let truncated = "# anglewalk v1, seed=1, construction=iid, n=5, scale=1\n# version=0, spec={}\nt,x,y\n0,0,0\n";
        assert!(matches!(read_polyline_csv(truncated.as_bytes()), Err(Error::Format(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip_preserves_bits(seed in any::<u64>(), n in 1usize..300, tracks in any::<bool>()) {
            let spec = WalkSpec::iid(1.0, n).unwrap();
            let walk = simulate_walk(&spec, &mut derive_stream(Seed(seed), 0)).unwrap();
            let path = rescale(&walk.path, RescaleMode::ByN);
            let phi: Vec<f64> = (0..=n).map(|k| (k as f64).sqrt()).collect();
            let drv: Vec<f64> = (0..=n).map(|k| -(k as f64) / 3.0).collect();
            let tr = tracks.then(|| Tracks { phi: &phi, driver: &drv });
            let mut buf = Vec::new();
            write_polyline_csv(&mut buf, &header(n, path.scale()), &path, tr).unwrap();
            let parsed = read_polyline_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(parsed.polyline().unwrap(), path);
            prop_assert_eq!(parsed.header.seed.as_str(), "0x2A");
            if tracks {
                prop_assert_eq!(parsed.rows[n].phi, Some(phi[n]));
            }
        }
    }
}
