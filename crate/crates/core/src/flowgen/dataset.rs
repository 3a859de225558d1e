use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pressure_field, solve_cross_section, CrossSection, DuctGeometry, FlowError};

pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const CASES_FILE: &str = "cases.csv";

/// Residual tolerance (relative to `|c|`) used for dataset solves.
const DATASET_TOL: f64 = 1e-10;

/// One sample of the 3D flow field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub re: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub c: f64,
    pub re: f64,
    pub u_max: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowDataset {
    pub train: Vec<FlowRecord>,
    pub test: Vec<FlowRecord>,
    /// One row per distinct gradient, ordered by increasing `|c|`.
    pub case_table: Vec<CaseRow>,
}

fn axial_stations(length: f64, nx: usize) -> Vec<f64> {
    let m = (nx - 1) as f64;
    (0..nx)
        .map(|i| if i == nx - 1 { length } else { length * i as f64 / m })
        .collect()
}

fn records_for(
    cs: &CrossSection,
    geometry: &DuctGeometry,
    xs: &[f64],
    out: &mut Vec<FlowRecord>,
) -> Result<(), FlowError> {
    for &x in xs {
        let p = pressure_field(cs.c, geometry, x)?;
        for (iy, &y) in cs.ys.iter().enumerate() {
            for (iz, &z) in cs.zs.iter().enumerate() {
                out.push(FlowRecord {
                    x,
                    y,
                    z,
                    re: cs.re,
                    u: cs.at(iy, iz),
                    p,
                });
            }
        }
    }
    Ok(())
}

/// Solves every distinct gradient once and replicates each cross-section at
/// `nx` evenly spaced axial stations (the flow is fully developed).
pub fn assemble_dataset(
    geometry: &DuctGeometry,
    c_train: &[f64],
    c_test: &[f64],
    nx: usize,
    ny: usize,
    nz: usize,
) -> Result<FlowDataset, FlowError> {
    geometry.validate()?;
    if c_train.is_empty() || c_test.is_empty() || nx < 2 {
        return Err(FlowError::EmptyDataset);
    }
    let mut distinct: Vec<f64> = c_train.iter().chain(c_test).copied().collect();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();

    let solved: Vec<CrossSection> = distinct
        .par_iter()
        .map(|&c| solve_cross_section(c, geometry, ny, nz, DATASET_TOL))
        .collect::<Result<_, _>>()?;
    let by_c: BTreeMap<u64, &CrossSection> = solved.iter().map(|cs| (cs.c.to_bits(), cs)).collect();

    let xs = axial_stations(geometry.length, nx);
    let build = |cs_list: &[f64]| -> Result<Vec<FlowRecord>, FlowError> {
        let mut out = Vec::with_capacity(cs_list.len() * nx * ny * nz);
        for c in cs_list {
            records_for(by_c[&c.to_bits()], geometry, &xs, &mut out)?;
        }
        Ok(out)
    };
    let train = build(c_train)?;
    let test = build(c_test)?;
    let case_table = solved
        .iter()
        .map(|cs| CaseRow {
            c: cs.c,
            re: cs.re,
            u_max: cs.u_max,
        })
        .collect();
    Ok(FlowDataset {
        train,
        test,
        case_table,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FlowError + '_ {
    move |source| FlowError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> FlowError + '_ {
    move |source| FlowError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), FlowError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(std::io::BufWriter::new(file));
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    let mut inner = w.into_inner().map_err(|e| FlowError::Io {
        path: path.display().to_string(),
        source: e.into_error(),
    })?;
    inner.flush().map_err(io_err(path))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, FlowError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

/// Writes `x,y,z,re,u,p` rows; floats use shortest round-trip formatting.
pub fn write_records(path: &Path, records: &[FlowRecord]) -> Result<(), FlowError> {
    write_rows(path, &["x", "y", "z", "re", "u", "p"], records)
}

pub fn read_records(path: &Path) -> Result<Vec<FlowRecord>, FlowError> {
    read_rows(path)
}

pub fn write_case_table(path: &Path, rows: &[CaseRow]) -> Result<(), FlowError> {
    write_rows(path, &["c", "re", "u_max"], rows)
}

pub fn read_case_table(path: &Path) -> Result<Vec<CaseRow>, FlowError> {
    read_rows(path)
}

/// Writes `train.csv`, `test.csv` and `cases.csv` into `dir`.
pub fn export_csv(ds: &FlowDataset, dir: &Path) -> Result<(), FlowError> {
    write_records(&dir.join(TRAIN_FILE), &ds.train)?;
    write_records(&dir.join(TEST_FILE), &ds.test)?;
    write_case_table(&dir.join(CASES_FILE), &ds.case_table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FlowDataset {
        assemble_dataset(
            &DuctGeometry::default(),
            &[-1000.0, -3000.0],
            &[-2000.0, -3000.0],
            3,
            17,
            17,
        )
        .unwrap()
    }

    #[test]
    fn record_counts_and_case_table() {
        let ds = small();
        assert_eq!(ds.train.len(), 2 * 3 * 17 * 17);
        assert_eq!(ds.test.len(), 2 * 3 * 17 * 17);
        let cs: Vec<f64> = ds.case_table.iter().map(|r| r.c).collect();
        assert_eq!(cs, vec![-1000.0, -2000.0, -3000.0]);
        assert!(ds.case_table.windows(2).all(|w| w[0].re < w[1].re));
    }

    #[test]
    fn velocity_independent_of_station() {
        let ds = small();
        let per_station = 17 * 17;
        for case in ds.train.chunks(3 * per_station) {
            let first = &case[..per_station];
            for station in case.chunks(per_station).skip(1) {
                for (a, b) in first.iter().zip(station) {
                    assert_eq!((a.y, a.z, a.u, a.re), (b.y, b.z, b.u, b.re));
                    assert!(b.x > a.x);
                }
            }
        }
        assert!(ds
            .train
            .iter()
            .all(|r| r.u >= 0.0 && r.p >= 0.0 && (0.0..=5.0).contains(&r.x)));
    }

    #[test]
    fn shared_case_is_identical_in_both_splits() {
        let ds = small();
        let n = 3 * 17 * 17;
        assert_eq!(&ds.train[n..], &ds.test[n..]);
    }

    #[test]
    fn rejects_empty_inputs() {
        let g = DuctGeometry::default();
        assert!(matches!(
            assemble_dataset(&g, &[], &[-1.0], 3, 17, 17),
            Err(FlowError::EmptyDataset)
        ));
        assert!(matches!(
            assemble_dataset(&g, &[-1.0], &[-1.0], 1, 17, 17),
            Err(FlowError::EmptyDataset)
        ));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let ds = small();
        let dir = tempfile::tempdir().unwrap();
        export_csv(&ds, dir.path()).unwrap();
        let train = read_records(&dir.path().join(TRAIN_FILE)).unwrap();
        assert_eq!(train.len(), ds.train.len());
        for (a, b) in train.iter().zip(&ds.train) {
            for (p, q) in [(a.x, b.x), (a.y, b.y), (a.z, b.z), (a.re, b.re), (a.u, b.u), (a.p, b.p)] {
                assert_eq!(p.to_bits(), q.to_bits());
            }
        }
        let cases = read_case_table(&dir.path().join(CASES_FILE)).unwrap();
        assert_eq!(cases, ds.case_table);
        let header = std::fs::read_to_string(dir.path().join(TEST_FILE)).unwrap();
        assert!(header.starts_with("x,y,z,re,u,p\n"));
    }

    #[test]
    fn empty_export_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        export_csv(&FlowDataset::default(), dir.path()).unwrap();
        assert_eq!(
            std::fs::read_to_string(dir.path().join(TRAIN_FILE)).unwrap(),
            "x,y,z,re,u,p\n"
        );
        assert_eq!(
            std::fs::read_to_string(dir.path().join(CASES_FILE)).unwrap(),
            "c,re,u_max\n"
        );
        assert!(read_records(&dir.path().join(TRAIN_FILE)).unwrap().is_empty());
    }

    #[test]
    fn unwritable_path_names_the_file() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let bad = f.path().join("sub");
        let err = export_csv(&FlowDataset::default(), &bad).unwrap_err();
        assert!(err.to_string().contains("sub"), "{err}");
    }
}
