//! Point datasets: CSV ingestion, coordinate standardization, train/test
//! splitting.
//!
//! All coordinates are planar rectangular (length units); geodetic
//! conversion is the caller's problem. Values are arbitrary scalar
//! measurements carried alongside the coordinates.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Floor below which a coordinate column counts as degenerate.
pub const STD_FLOOR: f64 = 1e-12;

/// A planar location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance between two planar points.
pub fn euclidean_distance(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// One measured location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

impl Sample {
    pub fn new(x: f64, y: f64, value: f64) -> Self {
        Sample { x, y, value }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.value.is_finite()
    }
}

/// An ordered, non-empty collection of samples with unique coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    samples: Vec<Sample>,
}

impl Dataset {
    /// Builds a dataset, rejecting empty input, non-finite fields and
    /// duplicate coordinates.
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashSet::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::invalid_data(format!(
                    "non-finite sample at index {i}: ({}, {}, {})",
                    s.x, s.y, s.value
                )));
            }
            if !seen.insert((s.x.to_bits(), s.y.to_bits())) {
                return Err(Error::invalid_data(format!(
                    "duplicate coordinates ({}, {}) at index {i}",
                    s.x, s.y
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            samples,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, i: usize) -> Result<&Sample> {
        self.samples.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.samples.len(),
        })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.value)
    }

    /// Writes the dataset in the `x,y,value` CSV schema. Floats are printed
    /// in shortest round-trip form, so a written file reloads bit-exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,value")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s.x, s.y, s.value)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Loads a dataset from a `x,y,value` CSV file. Malformed rows are reported
/// with their 1-based line number (the header is line 1).
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| {
        Error::invalid_data(format!("cannot open {}: {e}", path.display()))
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    read_csv(file, name)
}

/// CSV ingestion from any reader; exposed for in-memory tests.
pub fn read_csv<R: std::io::Read>(reader: R, name: impl Into<String>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::invalid_data(format!("unreadable header: {e}")))?;
    let expected = ["x", "y", "value"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::invalid_data(format!(
            "expected header x,y,value, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut samples = Vec::new();
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line().to_string())
                .unwrap_or_else(|| "?".to_string());
            Error::invalid_data(format!("malformed row at line {line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            return Err(Error::invalid_data(format!(
                "malformed row at line {line}: expected 3 fields, got {}",
                record.len()
            )));
        }
        let mut fields = [0.0_f64; 3];
        for (k, raw) in record.iter().enumerate() {
            fields[k] = raw.parse::<f64>().map_err(|_| {
                Error::invalid_data(format!(
                    "malformed row at line {line}: cannot parse `{raw}` as a number"
                ))
            })?;
        }
        let s = Sample::new(fields[0], fields[1], fields[2]);
        if !s.is_finite() {
            return Err(Error::invalid_data(format!(
                "non-finite value at line {line}"
            )));
        }
        if !seen.insert((s.x.to_bits(), s.y.to_bits())) {
            return Err(Error::invalid_data(format!(
                "duplicate coordinates at line {line}"
            )));
        }
        samples.push(s);
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(name, samples)
}

/// Column statistics needed to z-score coordinates and to undo it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean_x: f64,
    pub mean_y: f64,
    pub std_x: f64,
    pub std_y: f64,
}

impl StandardizationParams {
    pub fn apply(&self, p: Point) -> Point {
        Point::new((p.x - self.mean_x) / self.std_x, (p.y - self.mean_y) / self.std_y)
    }

    pub fn invert(&self, p: Point) -> Point {
        Point::new(p.x * self.std_x + self.mean_x, p.y * self.std_y + self.mean_y)
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0usize;
    for x in xs {
        sum += x;
        n += 1;
    }
    (sum / n as f64, n)
}

/// Population standard deviation.
fn pop_std(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (m, n) = mean(xs.clone());
    let ss: f64 = xs.map(|x| (x - m) * (x - m)).sum();
    (ss / n as f64).sqrt()
}

/// Z-scores both coordinate columns (population convention). Values are left
/// untouched. Fails on a constant column.
pub fn standardize_coords(d: &Dataset) -> Result<(Dataset, StandardizationParams)> {
    if d.len() < 2 {
        return Err(Error::invalid_argument(
            "standardization needs at least 2 samples".to_string(),
        ));
    }
    let (mean_x, _) = mean(d.samples.iter().map(|s| s.x));
    let (mean_y, _) = mean(d.samples.iter().map(|s| s.y));
    let std_x = pop_std(d.samples.iter().map(|s| s.x));
    let std_y = pop_std(d.samples.iter().map(|s| s.y));
    if std_x <= STD_FLOOR {
        return Err(Error::ZeroVariance("x column is constant".to_string()));
    }
    if std_y <= STD_FLOOR {
        return Err(Error::ZeroVariance("y column is constant".to_string()));
    }
    let params = StandardizationParams {
        mean_x,
        mean_y,
        std_x,
        std_y,
    };
    let samples = d
        .samples
        .iter()
        .map(|s| {
            let p = params.apply(s.position());
            Sample::new(p.x, p.y, s.value)
        })
        .collect();
    let out = Dataset::new(format!("{}-std", d.name), samples)?;
    Ok((out, params))
}

/// Deterministic seeded shuffle split. Train size is `round(n * fraction)`;
/// the two parts partition the input as multisets.
pub fn split_train_test(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid_argument(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = d.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::invalid_argument(format!(
            "split of {n} samples at fraction {train_fraction} leaves an empty part"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = seeded_rng(seed, "split");
    indices.shuffle(&mut rng);
    let train: Vec<Sample> = indices[..n_train].iter().map(|&i| d.samples[i]).collect();
    let test: Vec<Sample> = indices[n_train..].iter().map(|&i| d.samples[i]).collect();
    Ok((
        Dataset::new(format!("{}-train", d.name), train)?,
        Dataset::new(format!("{}-test", d.name), test)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn csv_roundtrip_in_order() {
        let csv = "x,y,value\n0,0,5.0\n1,0,7.0\n";
        let d = read_csv(csv.as_bytes(), "t").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.samples()[0], Sample::new(0.0, 0.0, 5.0));
        assert_eq!(d.samples()[1], Sample::new(1.0, 0.0, 7.0));
    }

    #[test]
    fn csv_header_only_is_empty() {
        let err = read_csv("x,y,value\n".as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("empty dataset"), "{err}");
    }

    #[test]
    fn csv_duplicate_coordinates_reports_line() {
        let err = read_csv("x,y,value\n0,0,1\n0,0,2\n".as_bytes(), "t").unwrap_err();
        assert!(
            err.to_string().contains("duplicate coordinates at line 3"),
            "{err}"
        );
    }

    #[test]
    fn csv_malformed_row_reports_line() {
        let err = read_csv("x,y,value\n0,0,1\n1,zzz,2\n".as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn csv_rejects_non_finite() {
        let err = read_csv("x,y,value\n0,0,NaN\n".as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let err = read_csv("a,b,c\n0,0,1\n".as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("expected header"), "{err}");
    }

    #[test]
    fn csv_accepts_crlf() {
        let d = read_csv("x,y,value\r\n0,0,1\r\n1,1,2\r\n".as_bytes(), "t").unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn write_then_read_is_bit_exact() {
        let d = Dataset::new(
            "t",
            vec![
                Sample::new(0.1, 0.2, -3.75),
                Sample::new(53.123456789, 1e-8, 2.0f64.sqrt()),
            ],
        )
        .unwrap();
        let back = read_csv(d.to_csv_string().as_bytes(), "t").unwrap();
        assert_eq!(d.samples(), back.samples());
    }

    #[test]
    fn standardize_two_point_symmetry() {
        let d = Dataset::new(
            "t",
            vec![Sample::new(0.0, 5.0, 1.0), Sample::new(2.0, 7.0, 2.0)],
        )
        .unwrap();
        let (sd, _) = standardize_coords(&d).unwrap();
        assert!(close(sd.samples()[0].x, -1.0, 1e-12));
        assert!(close(sd.samples()[1].x, 1.0, 1e-12));
    }

    #[test]
    fn standardize_three_point_population_std() {
        // x in {0, 1, 2}: population std is sqrt(2/3), so z = ±sqrt(3/2).
        let d = Dataset::new(
            "t",
            vec![
                Sample::new(0.0, 0.0, 1.0),
                Sample::new(1.0, 1.0, 2.0),
                Sample::new(2.0, 2.5, 3.0),
            ],
        )
        .unwrap();
        let (sd, _) = standardize_coords(&d).unwrap();
        let expect = (1.5f64).sqrt(); // 1.2247448713915890
        assert!(close(sd.samples()[0].x, -expect, 1e-12));
        assert!(close(sd.samples()[1].x, 0.0, 1e-12));
        assert!(close(sd.samples()[2].x, expect, 1e-12));
    }

    #[test]
    fn standardize_is_idempotent_within_tolerance() {
        let d = Dataset::new(
            "t",
            vec![
                Sample::new(-1.0, -1.0, 1.0),
                Sample::new(0.0, 1.0, 2.0),
                Sample::new(1.0, 0.0, 3.0),
            ],
        )
        .unwrap();
        let (s1, _) = standardize_coords(&d).unwrap();
        let (s2, _) = standardize_coords(&s1).unwrap();
        for (a, b) in s1.samples().iter().zip(s2.samples()) {
            assert!(close(a.x, b.x, 1e-9));
            assert!(close(a.y, b.y, 1e-9));
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let d = Dataset::new(
            "t",
            vec![Sample::new(1.0, 0.0, 1.0), Sample::new(1.0, 1.0, 2.0)],
        )
        .unwrap();
        assert!(matches!(
            standardize_coords(&d),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn split_sizes_follow_rounding() {
        let samples: Vec<Sample> = (0..100)
            .map(|i| Sample::new(i as f64, 0.5 * i as f64, i as f64))
            .collect();
        let d = Dataset::new("t", samples).unwrap();
        let (train, test) = split_train_test(&d, 0.8, 1).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let samples: Vec<Sample> = (0..5)
            .map(|i| Sample::new(i as f64, -(i as f64), i as f64))
            .collect();
        let d = Dataset::new("t", samples.clone()).unwrap();
        let (tr1, te1) = split_train_test(&d, 0.8, 9).unwrap();
        let (tr2, te2) = split_train_test(&d, 0.8, 9).unwrap();
        assert_eq!(tr1.samples(), tr2.samples());
        assert_eq!(te1.samples(), te2.samples());
        assert_eq!(tr1.len(), 4);
        assert_eq!(te1.len(), 1);

        let mut all: Vec<Sample> = tr1.samples().to_vec();
        all.extend_from_slice(te1.samples());
        all.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        assert_eq!(all, samples);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let d = Dataset::new(
            "t",
            vec![Sample::new(0.0, 0.0, 1.0), Sample::new(1.0, 1.0, 2.0)],
        )
        .unwrap();
        assert!(split_train_test(&d, 0.0, 1).is_err());
        assert!(split_train_test(&d, 1.0, 1).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            euclidean_distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)),
            5.0
        );
        assert_eq!(
            euclidean_distance(Point::new(2.0, -1.0), Point::new(2.0, -1.0)),
            0.0
        );
        let d = euclidean_distance(Point::new(1.0, 1.0), Point::new(2.0, 2.0));
        assert!(close(d, std::f64::consts::SQRT_2, 1e-12));
    }

    #[test]
    fn load_csv_from_disk_uses_file_stem_as_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field-a.csv");
        std::fs::write(&path, "x,y,value\n1,2,3\n4,5,6\n").unwrap();
        let d = load_csv(&path).unwrap();
        assert_eq!(d.name(), "field-a");
        assert_eq!(d.len(), 2);

        let err = load_csv(dir.path().join("missing.csv")).unwrap_err();
        assert!(err.to_string().contains("missing.csv"), "{err}");
    }

    #[test]
    fn dataset_rejects_duplicates_and_empty() {
        assert!(matches!(
            Dataset::new("t", vec![]),
            Err(Error::EmptyDataset)
        ));
        let err = Dataset::new(
            "t",
            vec![Sample::new(1.0, 2.0, 0.0), Sample::new(1.0, 2.0, 5.0)],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }
}
