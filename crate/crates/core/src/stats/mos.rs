//! MOS table ingestion.

use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::criteria::MosRecord;
use super::{Result, StatsError};

pub const MOS_HEADER: [&str; 7] = ["stimulus_id", "display", "view", "focal_index", "mos", "std", "n"];

#[derive(Debug, Deserialize)]
struct Row {
    stimulus_id: String,
    display: String,
    view: String,
    focal_index: usize,
    mos: f64,
    std: f64,
    n: u32,
}

/// Parses MOS records from CSV with the header
/// `stimulus_id,display,view,focal_index,mos,std,n`.
pub fn read_mos<R: Read>(reader: R) -> Result<Vec<MosRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header != MOS_HEADER {
        return Err(StatsError::Parse(format!("expected header {}, got {}", MOS_HEADER.join(","), header.join(","))));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(csv_error)?;
        let record = MosRecord {
            stimulus_id: row.stimulus_id,
            display: row.display.parse()?,
            view: row.view,
            focal_index: row.focal_index,
            mos: row.mos,
            std: row.std,
            n: row.n,
        };
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_mos(path: &Path) -> Result<Vec<MosRecord>> {
    let file = std::fs::File::open(path).map_err(|e| StatsError::Parse(format!("{}: {e}", path.display())))?;
    read_mos(file)
}

/// Serializes records in the ingestion format (round-trips through [`read_mos`]).
pub fn write_mos<W: std::io::Write>(writer: W, records: &[MosRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MOS_HEADER).map_err(csv_error)?;
    for r in records {
        w.write_record([
            r.stimulus_id.clone(),
            r.display.to_string(),
            r.view.clone(),
            r.focal_index.to_string(),
            r.mos.to_string(),
            r.std.to_string(),
            r.n.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| StatsError::Parse(e.to_string()))?;
    Ok(())
}

fn csv_error(e: csv::Error) -> StatsError {
    StatsError::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::criteria::Display;

    #[test]
    fn parses_and_round_trips() {
        let text = "stimulus_id,display,view,focal_index,mos,std,n\nh1_q1,OPT,center,0,3.5,0.8,18\nh1_q1,2D,right_corner,1,4.25,1.0,20\n";
        let recs = read_mos(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].display, Display::TwoD);
        assert_eq!(recs[1].mos, 4.25);
        let mut buf = Vec::new();
        write_mos(&mut buf, &recs).unwrap();
        assert_eq!(read_mos(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn rejects_bad_header_and_values() {
        assert!(read_mos("id,mos\n".as_bytes()).is_err());
        let bad = "stimulus_id,display,view,focal_index,mos,std,n\nx,OPT,c,0,3.0,-1,5\n";
        assert!(read_mos(bad.as_bytes()).is_err());
        let zero = "stimulus_id,display,view,focal_index,mos,std,n\nx,OPT,c,0,3.0,1,0\n";
        assert!(read_mos(zero.as_bytes()).is_err());
    }
}
