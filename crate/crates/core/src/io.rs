//! Result files: sweep CSV/JSON, per-replication triples, atomic writes.

use crate::functionals::EstimatorTriple;
use crate::montecarlo::SweepRow;
use crate::Result;
use serde::Serialize;
use std::io::{Read, Write};
use std::path::Path;

/// Column order of the sweep CSV.
pub const SWEEP_COLUMNS: [&str; 10] = [
    "gamma",
    "alpha",
    "B_hat",
    "B_se",
    "M_hat",
    "M_se",
    "E_hat",
    "reps",
    "trunc_failures",
    "seed",
];

/// Column order of the per-replication triple CSV.
pub const TRIPLE_COLUMNS: [&str; 5] = ["rep", "zeta", "xi_minus", "xi_plus", "tail_bound"];

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Serializes records with a header row taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SWEEP_COLUMNS)?;
        return Ok(w.into_inner().map_err(|e| e.into_error())?);
    }
    to_csv(rows)
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(SWEEP_COLUMNS.iter().copied()) {
        return Err(crate::Error::InvalidArgument(format!(
            "sweep CSV header {:?} does not match {:?}",
            header.iter().collect::<Vec<_>>(),
            SWEEP_COLUMNS
        )));
    }
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

#[derive(Serialize)]
struct TripleRecord {
    rep: u64,
    zeta: f64,
    xi_minus: f64,
    xi_plus: f64,
    tail_bound: f64,
}

/// `(replication index, triple)` pairs as CSV.
pub fn triples_csv(triples: &[(u64, EstimatorTriple)]) -> Result<Vec<u8>> {
    let records: Vec<TripleRecord> = triples
        .iter()
        .map(|(rep, t)| TripleRecord {
            rep: *rep,
            zeta: t.zeta,
            xi_minus: t.xi_minus,
            xi_plus: t.xi_plus,
            tail_bound: t.zeta_tail_bound,
        })
        .collect();
    to_csv(&records)
}
