use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Detection channel of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Singles,
    Coincidences,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Singles => "singles",
            Channel::Coincidences => "coincidences",
        })
    }
}

impl FromStr for Channel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "singles" => Ok(Channel::Singles),
            "coincidences" => Ok(Channel::Coincidences),
            other => Err(format!("unknown channel '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Core {
    Core1,
    Core2,
}

impl Core {
    pub fn index(self) -> u64 {
        match self {
            Core::Core1 => 0,
            Core::Core2 => 1,
        }
    }
}

impl fmt::Display for Core {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Core::Core1 => "core1",
            Core::Core2 => "core2",
        })
    }
}

impl FromStr for Core {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "core1" => Ok(Core::Core1),
            "core2" => Ok(Core::Core2),
            other => Err(format!("unknown core '{other}'")),
        }
    }
}

/// One measured interferogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    /// Stage positions in meters, strictly increasing.
    pub positions: Vec<f64>,
    pub counts: Vec<u64>,
    /// Seconds per point.
    pub integration_time: f64,
    pub channel: Channel,
    pub core: Core,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid record: {0}")]
    Invalid(String),
}

const PREAMBLE: &str = "# channel,core,seed,integration_s";
const COLUMNS: &str = "position_m,counts";

/// Rounds a position to the 12 significant digits stored on disk.
pub fn quantize_position(x: f64) -> f64 {
    format_position(x).parse().expect("formatted float parses")
}

fn format_position(x: f64) -> String {
    format!("{x:.11e}")
}

impl ScanRecord {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<(), RecordError> {
        if self.positions.len() != self.counts.len() {
            return Err(RecordError::Invalid(format!(
                "{} positions but {} counts",
                self.positions.len(),
                self.counts.len()
            )));
        }
        if self.positions.iter().any(|p| !p.is_finite()) {
            return Err(RecordError::Invalid("non-finite position".into()));
        }
        if self.positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(RecordError::Invalid("positions are not strictly increasing".into()));
        }
        if !(self.integration_time > 0.0) {
            return Err(RecordError::Invalid("integration time must be positive".into()));
        }
        Ok(())
    }

    /// Writes the record as CSV: a commented metadata line pair followed by
    /// `position_m,counts` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), RecordError> {
        let mut w = std::io::BufWriter::new(writer);
        writeln!(w, "{PREAMBLE}")?;
        writeln!(
            w,
            "# {},{},{},{}",
            self.channel, self.core, self.seed, self.integration_time
        )?;
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        csv.write_record(COLUMNS.split(','))
            .map_err(|e| RecordError::Invalid(e.to_string()))?;
        for (p, c) in self.positions.iter().zip(&self.counts) {
            csv.write_record([format_position(*p), c.to_string()])
                .map_err(|e| RecordError::Invalid(e.to_string()))?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, RecordError> {
        let mut reader = BufReader::new(reader);
        let mut line = String::new();
        reader.read_line(&mut line)?;
        if line.trim_end() != PREAMBLE {
            return Err(RecordError::Parse {
                line: 1,
                message: format!("expected '{PREAMBLE}'"),
            });
        }
        line.clear();
        reader.read_line(&mut line)?;
        let meta = line
            .trim_end()
            .strip_prefix('#')
            .ok_or_else(|| RecordError::Parse {
                line: 2,
                message: "expected '# <channel>,<core>,<seed>,<integration_s>'".into(),
            })?;
        let fields: Vec<&str> = meta.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(RecordError::Parse {
                line: 2,
                message: format!("expected 4 metadata fields, found {}", fields.len()),
            });
        }
        let meta_err = |message: String| RecordError::Parse { line: 2, message };
        let channel = fields[0].parse::<Channel>().map_err(meta_err)?;
        let core = fields[1].parse::<Core>().map_err(meta_err)?;
        let seed = fields[2]
            .parse::<u64>()
            .map_err(|e| meta_err(format!("seed: {e}")))?;
        let integration_time = fields[3]
            .parse::<f64>()
            .map_err(|e| meta_err(format!("integration_s: {e}")))?;

        let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = csv.headers().map_err(|e| RecordError::Parse {
            line: 3,
            message: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != COLUMNS.split(',').collect::<Vec<_>>() {
            return Err(RecordError::Parse {
                line: 3,
                message: format!("expected columns '{COLUMNS}'"),
            });
        }
        let mut positions = Vec::new();
        let mut counts = Vec::new();
        for (i, row) in csv.records().enumerate() {
            let line = i + 4;
            let row = row.map_err(|e| RecordError::Parse {
                line,
                message: e.to_string(),
            })?;
            if row.len() != 2 {
                return Err(RecordError::Parse {
                    line,
                    message: format!("expected 2 columns, found {}", row.len()),
                });
            }
            positions.push(row[0].trim().parse::<f64>().map_err(|e| RecordError::Parse {
                line,
                message: format!("position_m: {e}"),
            })?);
            counts.push(row[1].trim().parse::<u64>().map_err(|e| RecordError::Parse {
                line,
                message: format!("counts: {e}"),
            })?);
        }
        let record = ScanRecord {
            positions,
            counts,
            integration_time,
            channel,
            core,
            seed,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn save(&self, path: &Path) -> Result<(), RecordError> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, RecordError> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> ScanRecord {
        ScanRecord {
            positions: vec![-1.5e-6, 0.0, 2.25e-6],
            counts: vec![10, 0, 123456],
            integration_time: 0.5,
            channel: Channel::Coincidences,
            core: Core::Core2,
            seed: 42,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# channel,core,seed,integration_s");
        assert_eq!(lines[1], "# coincidences,core2,42,0.5");
        assert_eq!(lines[2], "position_m,counts");
        assert_eq!(lines[3], "-1.50000000000e-6,10");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn bad_inputs_report_lines() {
        let text = "# channel,core,seed,integration_s\n# singles,core1,1,0.5\nposition_m,counts\n1e-6,3\n2e-6,x\n";
        match ScanRecord::read_csv(text.as_bytes()) {
            Err(RecordError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        let text = "# channel,core,seed,integration_s\n# photons,core1,1,0.5\nposition_m,counts\n";
        assert!(matches!(
            ScanRecord::read_csv(text.as_bytes()),
            Err(RecordError::Parse { line: 2, .. })
        ));
        let text = "# channel,core,seed,integration_s\n# singles,core1,1,0.5\nposition_m,counts\n2e-6,3\n1e-6,3\n";
        assert!(matches!(ScanRecord::read_csv(text.as_bytes()), Err(RecordError::Invalid(_))));
    }

    proptest! {
        #[test]
        fn quantized_records_round_trip(
            raw in proptest::collection::vec((-1e-3f64..1e-3, 0u64..10_000_000), 1..40),
            seed in any::<u64>(),
            t in 1e-3f64..10.0,
        ) {
            let mut positions: Vec<f64> = raw.iter().map(|(p, _)| quantize_position(*p)).collect();
            positions.sort_by(f64::total_cmp);
            positions.dedup();
            let counts: Vec<u64> = raw.iter().take(positions.len()).map(|(_, c)| *c).collect();
            let rec = ScanRecord { positions, counts, integration_time: t, channel: Channel::Singles, core: Core::Core1, seed };
            let mut buf = Vec::new();
            rec.write_csv(&mut buf).unwrap();
            let back = ScanRecord::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, rec);
        }
    }
}
