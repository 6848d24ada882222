//! File formats: JSON Lines sequences and sampled functions, generator specs,
//! and the CSV curve export. Every writer goes through [`write_atomic`].

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use almostconv_core::{GeneratorSpec, Norm, SampledFunction, SequenceSample};
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;
use thiserror::Error;

/// Column order of the curve CSV.
pub const CURVE_COLUMNS: [&str; 5] = [
    "n",
    "c_sliding",
    "c_block",
    "residual_sliding",
    "residual_block",
];

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("empty input: expected a JSON header line")]
    Empty,
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: expected {expected} components, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("no step size: the header has no \"step\" and none was given")]
    MissingStep,
    #[error("curve file: {0}")]
    Curve(String),
    #[error(transparent)]
    Core(#[from] almostconv_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// First line of a sequence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceHeader {
    pub dim: usize,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
}

/// First line of a function file: a sequence header plus the grid step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionHeader {
    pub dim: usize,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SequenceFile {
    pub header: SequenceHeader,
    pub sample: SequenceSample,
}

#[derive(Debug, Clone)]
pub struct FunctionFile {
    pub header: FunctionHeader,
    pub function: SampledFunction,
}

/// One row of the curve CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub c_sliding: f64,
    pub c_block: f64,
    pub residual_sliding: f64,
    pub residual_block: f64,
}

fn parse_header<H: for<'de> Deserialize<'de>>(
    lines: &mut impl Iterator<Item = (usize, io::Result<String>)>,
) -> Result<H, FormatError> {
    for (index, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        return serde_json::from_str(&line).map_err(|source| FormatError::Json {
            line: index + 1,
            source,
        });
    }
    Err(FormatError::Empty)
}

fn parse_body(
    lines: impl Iterator<Item = (usize, io::Result<String>)>,
    dim: usize,
) -> Result<Vec<f64>, FormatError> {
    let mut data = Vec::new();
    for (index, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = serde_json::from_str(&line).map_err(|source| FormatError::Json {
            line: index + 1,
            source,
        })?;
        if row.len() != dim {
            return Err(FormatError::Arity {
                line: index + 1,
                expected: dim,
                found: row.len(),
            });
        }
        data.extend(row);
    }
    Ok(data)
}

/// Reads a sequence file; a header without `norm` means l2.
pub fn read_sequence(reader: impl BufRead) -> Result<SequenceFile, FormatError> {
    let mut lines = reader.lines().enumerate();
    let header: SequenceHeader = parse_header(&mut lines)?;
    let data = parse_body(lines, header.dim)?;
    let sample = SequenceSample::from_flat(
        header.dim,
        data,
        header.bound,
        header.norm.unwrap_or_default(),
    )?;
    Ok(SequenceFile { header, sample })
}

/// Reads a function file. `step` overrides the header's step when given.
pub fn read_function(reader: impl BufRead, step: Option<f64>) -> Result<FunctionFile, FormatError> {
    let mut lines = reader.lines().enumerate();
    let header: FunctionHeader = parse_header(&mut lines)?;
    let step = step.or(header.step).ok_or(FormatError::MissingStep)?;
    let data = parse_body(lines, header.dim)?;
    let function = SampledFunction::from_flat(
        step,
        header.dim,
        data,
        header.bound,
        header.norm.unwrap_or_default(),
    )?;
    Ok(FunctionFile { header, function })
}

fn write_rows<'a>(
    mut w: impl Write,
    header: &impl Serialize,
    rows: impl Iterator<Item = &'a [f64]>,
) -> io::Result<()> {
    serde_json::to_writer(&mut w, header)?;
    writeln!(w)?;
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_sequence(w: impl Write, x: &SequenceSample) -> io::Result<()> {
    let header = SequenceHeader {
        dim: x.dim(),
        bound: x.bound(),
        norm: Some(x.norm()),
    };
    write_rows(w, &header, x.iter())
}

pub fn write_function(w: impl Write, f: &SampledFunction) -> io::Result<()> {
    let header = FunctionHeader {
        dim: f.dim(),
        bound: f.bound(),
        norm: Some(f.norm()),
        step: Some(f.step()),
    };
    write_rows(w, &header, f.as_flat().chunks_exact(f.dim()))
}

pub fn write_curve(w: impl Write, rows: &[CurveRow]) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    if rows.is_empty() {
        out.write_record(CURVE_COLUMNS)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a curve CSV, requiring the fixed columns and `n = 1, 2, …`.
pub fn read_curve(reader: impl io::Read) -> Result<Vec<CurveRow>, FormatError> {
    let mut input = csv::Reader::from_reader(reader);
    let columns: Vec<String> = input.headers()?.iter().map(str::to_owned).collect();
    if columns != CURVE_COLUMNS {
        return Err(FormatError::Curve(format!(
            "expected columns {}, found {}",
            CURVE_COLUMNS.join(","),
            columns.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (index, row) in input.deserialize::<CurveRow>().enumerate() {
        let row = row?;
        if row.n != index + 1 {
            return Err(FormatError::Curve(format!(
                "row {} has n = {}, expected {}",
                index + 1,
                row.n,
                index + 1
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FormatError::Curve("no rows".into()));
    }
    Ok(rows)
}

pub fn read_spec(reader: impl io::Read) -> Result<GeneratorSpec, FormatError> {
    serde_json::from_reader(reader).map_err(|source| FormatError::Json {
        line: source.line(),
        source,
    })
}

/// Writes `path` in one step: the content goes to a temporary file in the
/// same directory, which is then renamed over `path`.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<(), FormatError>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> Result<(), FormatError>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn open(path: &Path) -> io::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use almostconv_core::Vector;

    #[test]
    fn sequence_round_trip_is_exact() {
        let xs = [
            Vector::new(vec![0.1, -1.0 / 3.0]).unwrap(),
            Vector::new(vec![1e-300, 2.5]).unwrap(),
        ];
        let x = SequenceSample::new(&xs, 2.6, Norm::Linf).unwrap();
        let mut buf = Vec::new();
        write_sequence(&mut buf, &x).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"dim\":2,\"bound\":2.6,\"norm\":\"linf\"}\n"));
        let back = read_sequence(&buf[..]).unwrap();
        assert_eq!(back.sample.as_flat(), x.as_flat());
        assert_eq!(back.sample.norm(), Norm::Linf);
    }

    proptest::proptest! {
        #[test]
        fn any_finite_sample_round_trips(bits in proptest::collection::vec(proptest::num::u64::ANY, 1..64)) {
            let data: Vec<f64> = bits.into_iter().map(f64::from_bits).filter(|c| c.is_finite()).collect();
            proptest::prop_assume!(!data.is_empty());
            let bound = data.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let x = SequenceSample::from_flat(1, data, bound, Norm::L2).unwrap();
            let mut buf = Vec::new();
            write_sequence(&mut buf, &x).unwrap();
            let back = read_sequence(&buf[..]).unwrap().sample;
            let same = back.as_flat().iter().zip(x.as_flat()).all(|(a, b)| a.to_bits() == b.to_bits());
            proptest::prop_assert!(same);
            proptest::prop_assert_eq!(back.bound().to_bits(), x.bound().to_bits());
        }
    }

    #[test]
    fn header_norm_defaults_to_l2_and_blank_lines_are_skipped() {
        let text = "\n{\"dim\":1,\"bound\":1}\n[1]\n\n[0]\n";
        let f = read_sequence(text.as_bytes()).unwrap();
        assert_eq!(f.header.norm, None);
        assert_eq!(f.sample.norm(), Norm::L2);
        assert_eq!(f.sample.as_flat(), &[1.0, 0.0]);
    }

    #[test]
    fn malformed_sequences() {
        assert!(matches!(
            read_sequence("".as_bytes()),
            Err(FormatError::Empty)
        ));
        assert!(matches!(
            read_sequence("\n\n".as_bytes()),
            Err(FormatError::Empty)
        ));
        let arity = read_sequence("{\"dim\":2,\"bound\":1}\n[0,0]\n[1]\n".as_bytes()).unwrap_err();
        assert!(
            matches!(
                arity,
                FormatError::Arity {
                    line: 3,
                    expected: 2,
                    found: 1
                }
            ),
            "{arity}"
        );
        let json = read_sequence("{\"dim\":1,\"bound\":1}\n[0,\n".as_bytes()).unwrap_err();
        assert!(matches!(json, FormatError::Json { line: 2, .. }));
        let unknown =
            read_sequence("{\"dim\":1,\"bound\":1,\"step\":0.1}\n[0]\n".as_bytes()).unwrap_err();
        assert!(unknown.to_string().contains("step"));
        let bound = read_sequence("{\"dim\":1,\"bound\":1}\n[2]\n".as_bytes()).unwrap_err();
        assert!(matches!(bound, FormatError::Core(_)));
        let header_only = read_sequence("{\"dim\":1,\"bound\":1}\n".as_bytes()).unwrap_err();
        assert!(matches!(
            header_only,
            FormatError::Core(almostconv_core::Error::EmptySequence)
        ));
    }

    #[test]
    fn function_step_from_header_or_override() {
        let text = "{\"dim\":1,\"bound\":1,\"step\":0.5}\n[0]\n[1]\n[0]\n";
        assert_eq!(
            read_function(text.as_bytes(), None)
                .unwrap()
                .function
                .step(),
            0.5
        );
        assert_eq!(
            read_function(text.as_bytes(), Some(0.25))
                .unwrap()
                .function
                .step(),
            0.25
        );
        let no_step = "{\"dim\":1,\"bound\":1}\n[0]\n[1]\n[0]\n";
        assert!(matches!(
            read_function(no_step.as_bytes(), None),
            Err(FormatError::MissingStep)
        ));
        assert_eq!(
            read_function(no_step.as_bytes(), Some(1.0))
                .unwrap()
                .function
                .panels(),
            2
        );

        let f = read_function(text.as_bytes(), None).unwrap().function;
        let mut buf = Vec::new();
        write_function(&mut buf, &f).unwrap();
        let back = read_function(&buf[..], None).unwrap();
        assert_eq!(back.function.as_flat(), f.as_flat());
        assert_eq!(back.header.step, Some(0.5));
    }

    #[test]
    fn curve_round_trip_and_validation() {
        let rows = vec![
            CurveRow {
                n: 1,
                c_sliding: 1.0,
                c_block: 0.0,
                residual_sliding: 0.5,
                residual_block: 0.5,
            },
            CurveRow {
                n: 2,
                c_sliding: 0.1 + 0.2,
                c_block: 1.0 / 3.0,
                residual_sliding: 0.0,
                residual_block: 1e-17,
            },
        ];
        let mut buf = Vec::new();
        write_curve(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,c_sliding,c_block,residual_sliding,residual_block\n"));
        assert_eq!(read_curve(&buf[..]).unwrap(), rows);

        let gap = "n,c_sliding,c_block,residual_sliding,residual_block\n1,1,1,1,1\n3,1,1,1,1\n";
        assert!(read_curve(gap.as_bytes())
            .unwrap_err()
            .to_string()
            .contains("n = 3"));
        let columns = "n,c_block,c_sliding,residual_sliding,residual_block\n1,1,1,1,1\n";
        assert!(read_curve(columns.as_bytes()).is_err());
        let header_only = "n,c_sliding,c_block,residual_sliding,residual_block\n";
        assert!(read_curve(header_only.as_bytes()).is_err());
        assert!(read_curve(
            "n,c_sliding,c_block,residual_sliding,residual_block\n1,x,1,1,1\n".as_bytes()
        )
        .is_err());
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        std::fs::write(&path, "old content that is longer than the new one").unwrap();
        write_atomic(&path, |w| Ok(w.write_all(b"new")?)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new");
        // A failing writer leaves the previous file in place.
        let err = write_atomic(&path, |_| Err(FormatError::Curve("boom".into())));
        assert!(err.is_err());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
