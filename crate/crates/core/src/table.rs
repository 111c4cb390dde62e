//! On-disk and interchange formats for [`NatSeries`].
//!
//! Table files are plain text:
//!
//! ```text
//! unimodal-table v1
//! kind U
//! n_max 3
//! checksum sha256:<hex>
//! 1 1
//! 1 1
//! 1 3
//! 1 6
//! ```
//!
//! Each value line is `<number of digits> <decimal digits>`. The checksum is
//! the SHA-256 of the decimal values, one per line, each terminated by `\n`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rug::Integer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::series::{NatSeries, SeriesKind};

const MAGIC: &str = "unimodal-table v1";

pub fn checksum(series: &NatSeries) -> String {
    let mut hasher = Sha256::new();
    let mut buf = String::new();
    for v in series.values() {
        buf.clear();
        let _ = writeln!(buf, "{v}");
        hasher.update(buf.as_bytes());
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(hex, "{b:02x}");
    }
    format!("sha256:{hex}")
}

pub fn write_table<W: Write>(series: &NatSeries, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "kind {}", series.kind().name())?;
    writeln!(out, "n_max {}", series.n_max())?;
    writeln!(out, "checksum {}", checksum(series))?;
    for v in series.values() {
        let digits = v.to_string();
        writeln!(out, "{} {}", digits.len(), digits)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_table<R: BufRead>(input: R) -> Result<NatSeries> {
    let mut lines = input.lines();
    let mut header = |name: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| Error::TableFormat(format!("missing {name} line")))??;
        Ok(line)
    };
    if header("magic")? != MAGIC {
        return Err(Error::TableFormat("bad magic line".into()));
    }
    let kind_line = header("kind")?;
    let kind = kind_line
        .strip_prefix("kind ")
        .and_then(SeriesKind::parse)
        .ok_or_else(|| Error::TableFormat(format!("bad kind line {kind_line:?}")))?;
    let n_line = header("n_max")?;
    let n_max: usize = n_line
        .strip_prefix("n_max ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::TableFormat(format!("bad n_max line {n_line:?}")))?;
    let sum_line = header("checksum")?;
    let expected_sum = sum_line
        .strip_prefix("checksum ")
        .ok_or_else(|| Error::TableFormat("bad checksum line".into()))?
        .to_string();

    let mut values = Vec::new();
    values
        .try_reserve_exact(n_max + 1)
        .map_err(|_| Error::Allocation(n_max + 1))?;
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (len, digits) = line
            .split_once(' ')
            .ok_or_else(|| Error::TableFormat(format!("value line {i} has no length prefix")))?;
        let len: usize = len
            .parse()
            .map_err(|_| Error::TableFormat(format!("bad length on value line {i}")))?;
        if len != digits.len() {
            return Err(Error::TableFormat(format!(
                "value line {i}: length prefix {len} but {} digits",
                digits.len()
            )));
        }
        let v = Integer::from_str_radix(digits, 10)
            .map_err(|_| Error::TableFormat(format!("value line {i} is not an integer")))?;
        values.push(v);
    }
    if values.len() != n_max + 1 {
        return Err(Error::TableFormat(format!(
            "header says n_max {n_max} but {} values follow",
            values.len()
        )));
    }
    let series = NatSeries::from_values(kind, values)?;
    let actual = checksum(&series);
    if actual != expected_sum {
        return Err(Error::TableFormat(format!(
            "checksum mismatch: header {expected_sum}, content {actual}"
        )));
    }
    Ok(series)
}

pub fn save(series: &NatSeries, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    write_table(series, fs::File::create(&tmp)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<NatSeries> {
    read_table(BufReader::new(fs::File::open(path)?))
}

/// File name used by the table cache for `(kind, n_max)`.
pub fn cache_path(dir: &Path, kind: SeriesKind, n_max: usize) -> PathBuf {
    dir.join(format!("{}_{}.tbl", kind.name().to_ascii_lowercase(), n_max))
}

/// CSV with header `n,value`.
pub fn write_csv<W: Write>(series: &NatSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "value"])?;
    for (n, v) in series.values().iter().enumerate() {
        w.write_record([n.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeriesJson {
    pub kind: SeriesKind,
    pub n_max: usize,
    /// Decimal strings; never routed through floating point.
    pub values: Vec<String>,
}

pub fn to_json(series: &NatSeries) -> SeriesJson {
    SeriesJson {
        kind: series.kind(),
        n_max: series.n_max(),
        values: series.values().iter().map(|v| v.to_string()).collect(),
    }
}

pub fn from_json(json: &SeriesJson) -> Result<NatSeries> {
    let values = json
        .values
        .iter()
        .map(|s| {
            Integer::from_str_radix(s, 10)
                .map_err(|_| Error::TableFormat(format!("{s:?} is not a decimal integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != json.n_max + 1 {
        return Err(Error::TableFormat("n_max does not match value count".into()));
    }
    NatSeries::from_values(json.kind, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::gen_all;

    #[test]
    fn file_round_trip() {
        let (_, _, u) = gen_all(300).unwrap();
        let mut buf = Vec::new();
        write_table(&u, &mut buf).unwrap();
        let back = read_table(&buf[..]).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn header_layout() {
        let (_, _, u) = gen_all(3).unwrap();
        let mut buf = Vec::new();
        write_table(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "unimodal-table v1");
        assert_eq!(lines[1], "kind U");
        assert_eq!(lines[2], "n_max 3");
        assert!(lines[3].starts_with("checksum sha256:"));
        assert_eq!(&lines[4..], ["1 1", "1 1", "1 3", "1 6"]);
    }

    #[test]
    fn corrupted_files_are_rejected() {
        let (_, _, u) = gen_all(20).unwrap();
        let mut buf = Vec::new();
        write_table(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let tampered = text.replacen("\n2 21\n", "\n2 22\n", 1);
        assert_ne!(tampered, text);
        assert!(matches!(
            read_table(tampered.as_bytes()),
            Err(Error::TableFormat(msg)) if msg.contains("checksum")
        ));

        let bad_len = text.replacen("\n2 21\n", "\n3 21\n", 1);
        assert!(read_table(bad_len.as_bytes()).is_err());

        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(read_table(truncated.as_bytes()).is_err());
    }

    #[test]
    fn json_keeps_big_integers_exact() {
        let (_, _, u) = gen_all(500).unwrap();
        let json = serde_json::to_string(&to_json(&u)).unwrap();
        let parsed: SeriesJson = serde_json::from_str(&json).unwrap();
        assert_eq!(from_json(&parsed).unwrap(), u);
        assert!(json.contains(&u.values()[500].to_string()));
    }

    #[test]
    fn csv_layout() {
        let (_, _, u) = gen_all(3).unwrap();
        let mut buf = Vec::new();
        write_csv(&u, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,value\n0,1\n1,1\n2,3\n3,6\n");
    }
}
