//! Delimited-text readers and writers for feature and label files.
//!
//! Feature files carry the header `image_id,woman_id,view,side,f0,..,f{p-1}`;
//! label files carry `image_id,reader_id,score`. Lines starting with `#` are
//! comments (used for provenance) and are skipped on load. Floats are written
//! in shortest round-trip form so that load, write, load is lossless.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::table::{FeatureTable, ImageRecord, LabelEntry, LabelTable};
use crate::error::{Error, Result};

pub(crate) fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(file))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn write_provenance(out: &mut impl Write, path: &Path, provenance: Option<&str>) -> Result<()> {
    if let Some(p) = provenance {
        writeln!(out, "# {p}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn header_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Header {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn load_feature_table(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers()?.clone();
    let fixed = ["image_id", "woman_id", "view", "side"];
    if header.len() < fixed.len() || fixed.iter().zip(header.iter()).any(|(a, b)| *a != b) {
        return Err(header_error(path, "expected image_id,woman_id,view,side,f0,..."));
    }
    let p = header.len() - fixed.len();
    for (j, name) in header.iter().skip(fixed.len()).enumerate() {
        if name != format!("f{j}") {
            return Err(header_error(path, format!("column {} should be f{j}, found {name:?}", j + 5)));
        }
    }

    let mut records = Vec::new();
    let mut values = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::row(path, row, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let image_id = rec[0].to_string();
        if !seen.insert(image_id.clone()) {
            return Err(Error::row(path, row, format!("duplicate image_id {image_id}")));
        }
        let view = rec[2].parse().map_err(|e: String| Error::row(path, row, e))?;
        let side = rec[3].parse().map_err(|e: String| Error::row(path, row, e))?;
        for field in rec.iter().skip(fixed.len()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::row(path, row, format!("cannot parse feature {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::row(path, row, format!("non-finite feature {field:?}")));
            }
            values.push(v);
        }
        records.push(ImageRecord::new(image_id, &rec[1], view, side));
    }
    let features = Array2::from_shape_vec((records.len(), p), values)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    FeatureTable::new(records, features, false)
}

/// Writes a table without a bias column. A biased table is written with its
/// bias column dropped.
pub fn write_feature_table(table: &FeatureTable, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    write_provenance(&mut out, path, provenance)?;
    let p = table.dim() - usize::from(table.has_bias());
    let io = |e| Error::io(path, e);
    write!(out, "image_id,woman_id,view,side").map_err(io)?;
    for j in 0..p {
        write!(out, ",f{j}").map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for (rec, row) in table.records().iter().zip(table.features().rows()) {
        write!(out, "{},{},{},{}", rec.image_id, rec.woman_id, rec.view, rec.side).map_err(io)?;
        for v in row.iter().take(p) {
            write!(out, ",{v}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Loads a label file. `manifest` fixes the reader ordering; without it
/// readers are ordered by first appearance.
pub fn load_label_table(path: impl AsRef<Path>, manifest: Option<Vec<String>>) -> Result<LabelTable> {
    let path = path.as_ref();
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["image_id", "reader_id", "score"] {
        return Err(header_error(path, "expected image_id,reader_id,score"));
    }
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::row(path, row, format!("expected 3 fields, found {}", rec.len())));
        }
        let score: f64 = rec[2]
            .trim()
            .parse()
            .map_err(|_| Error::row(path, row, format!("cannot parse score {:?}", &rec[2])))?;
        if !(score.is_finite() && (0.0..=100.0).contains(&score)) {
            return Err(Error::row(path, row, format!("score {score} outside [0,100]")));
        }
        if !seen.insert((rec[0].to_string(), rec[1].to_string())) {
            return Err(Error::row(
                path,
                row,
                format!("duplicate label for ({}, {})", &rec[0], &rec[1]),
            ));
        }
        entries.push(LabelEntry {
            image_id: rec[0].to_string(),
            reader_id: rec[1].to_string(),
            score,
        });
    }
    LabelTable::new(entries, manifest)
}

pub fn write_label_table(table: &LabelTable, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    write_provenance(&mut out, path, provenance)?;
    writeln!(out, "image_id,reader_id,score").map_err(io)?;
    for e in table.entries() {
        writeln!(out, "{},{},{}", e.image_id, e.reader_id, e.score).map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn tmp(contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        fs::write(&p, contents).unwrap();
        (dir, p)
    }

    #[test]
    fn loads_well_formed_features() {
        let (_d, p) = tmp(
            "image_id,woman_id,view,side,f0,f1,f2,f3\n\
             i1,w1,CC,L,1,2,3,4\n\
             i2,w1,MLO,L,0.5,0,0,1e-3\n\
             i3,w2,CC,R,-1,-2,-3,-4\n",
        );
        let t = load_feature_table(&p).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.dim(), 4);
        assert!(!t.has_bias());
        assert_eq!(t.features()[[1, 3]], 1e-3);
    }

    #[test]
    fn nan_reported_with_row() {
        let (_d, p) = tmp("image_id,woman_id,view,side,f0\ni1,w1,CC,L,1\ni2,w1,CC,R,NaN\n");
        match load_feature_table(&p) {
            Err(Error::Row { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_only_gives_empty_table() {
        let (_d, p) = tmp("image_id,woman_id,view,side,f0,f1\n");
        let t = load_feature_table(&p).unwrap();
        assert_eq!(t.len(), 0);
        assert_eq!(t.dim(), 2);
    }

    #[test]
    fn feature_errors() {
        let (_d, p) = tmp("image,woman_id,view,side,f0\n");
        assert!(matches!(load_feature_table(&p), Err(Error::Header { .. })));
        let (_d, p) = tmp("image_id,woman_id,view,side,f0\ni1,w,CC,L,1,2\n");
        assert!(matches!(load_feature_table(&p), Err(Error::Row { row: 1, .. })));
        let (_d, p) = tmp("image_id,woman_id,view,side,f0\ni1,w,CC,L,1\ni1,w,CC,R,2\n");
        assert!(matches!(load_feature_table(&p), Err(Error::Row { row: 2, .. })));
        let (_d, p) = tmp("image_id,woman_id,view,side,f0\ni1,w,XX,L,1\n");
        assert!(matches!(load_feature_table(&p), Err(Error::Row { row: 1, .. })));
    }

    #[test]
    fn labels_parse_and_reject() {
        let (_d, p) = tmp("image_id,reader_id,score\ni1,A,30\ni1,B,40\n");
        let t = load_label_table(&p, None).unwrap();
        assert_eq!(t.reader_count(), 2);
        assert_eq!(t.entries().len(), 2);

        let (_d, p) = tmp("image_id,reader_id,score\ni1,A,101\n");
        assert!(matches!(load_label_table(&p, None), Err(Error::Row { row: 1, .. })));
        let (_d, p) = tmp("image_id,reader_id,score\ni1,A,1\ni2,A,3\ni1,A,2\n");
        assert!(matches!(load_label_table(&p, None), Err(Error::Row { row: 3, .. })));
    }

    #[test]
    fn provenance_comment_is_skipped() {
        let (_d, p) = tmp("# config_sha256=ab seed=1\nimage_id,reader_id,score\ni1,A,5\n");
        assert_eq!(load_label_table(&p, None).unwrap().entries().len(), 1);
    }
}
