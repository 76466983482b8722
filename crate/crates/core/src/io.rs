//! File formats: CSV grids, the JSON configuration envelope, and dataset
//! archives.
//!
//! CSV grids carry one lattice row per line with values in scientific
//! notation at 17 significant digits, which round-trips every `f64` exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CamError, Result};
use crate::lattice::Configuration;
use crate::rule::RuleParams;
use crate::scenario::{ObservedDataset, ScenarioSpec};

/// 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(cfg: &Configuration, out: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in cfg.cells().chunks(cfg.width()) {
        wtr.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Configuration> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut cells = Vec::new();
    let mut width = None;
    let mut height = 0;
    for record in rdr.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CamError::InvalidConfig(format!(
                    "row {height} has {} values, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| CamError::InvalidConfig(format!("not a number: {field:?}")))?;
            cells.push(v);
        }
        height += 1;
    }
    Configuration::new(height, width.unwrap_or(0), cells)
}

pub fn save_csv(cfg: &Configuration, path: &Path) -> Result<()> {
    write_csv(cfg, BufWriter::new(File::create(path)?))
}

pub fn load_csv(path: &Path) -> Result<Configuration> {
    read_csv(File::open(path)?)
}

pub fn save_json(cfg: &Configuration, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, cfg)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn load_json(path: &Path) -> Result<Configuration> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// `manifest.json` of a dataset archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub spec: ScenarioSpec,
    pub truth: RuleParams,
    pub seed: u64,
    pub init_seed: u64,
    pub steps: usize,
    pub clean: Vec<String>,
    pub observed: Vec<String>,
}

/// Writes `clean/step_XXX.csv`, `observed/step_XXX.csv` and `manifest.json`
/// under `dir`.
pub fn write_dataset(data: &ObservedDataset, dir: &Path) -> Result<DatasetManifest> {
    fs::create_dir_all(dir.join("clean"))?;
    fs::create_dir_all(dir.join("observed"))?;
    let mut clean = Vec::with_capacity(data.clean.len());
    let mut observed = Vec::with_capacity(data.observed.len());
    for (t, (c, o)) in data.clean.iter().zip(&data.observed).enumerate() {
        let c_name = format!("clean/step_{t:03}.csv");
        let o_name = format!("observed/step_{t:03}.csv");
        save_csv(c, &dir.join(&c_name))?;
        save_csv(o, &dir.join(&o_name))?;
        clean.push(c_name);
        observed.push(o_name);
    }
    let manifest = DatasetManifest {
        spec: data.spec.clone(),
        truth: data.truth.clone(),
        seed: data.spec.seed,
        init_seed: data.spec.init_seed,
        steps: data.steps(),
        clean,
        observed,
    };
    let mut w = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(manifest)
}

pub fn read_dataset(dir: &Path) -> Result<ObservedDataset> {
    let manifest: DatasetManifest =
        serde_json::from_reader(File::open(dir.join("manifest.json"))?)?;
    let load_all = |names: &[String]| -> Result<Vec<Configuration>> {
        names.iter().map(|n| load_csv(&dir.join(n))).collect()
    };
    Ok(ObservedDataset {
        clean: load_all(&manifest.clean)?,
        observed: load_all(&manifest.observed)?,
        spec: manifest.spec,
        truth: manifest.truth,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::neighborhood::Topology;
    use crate::scenario::{build_dataset, ThetaScheme};

    #[test]
    fn csv_layout() {
        let cfg = Configuration::new(2, 2, vec![0.5, 0.25, 1.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "5.0000000000000000e-1,2.5000000000000000e-1\n1.0000000000000000e0,0.0000000000000000e0\n"
        );
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(read_csv("0.1,0.2\n0.3\n".as_bytes()).is_err());
        assert!(read_csv("0.1,x\n".as_bytes()).is_err());
        assert!(read_csv("0.1,1.2\n".as_bytes()).is_err());
    }

    #[test]
    fn plain_decimal_csv_accepted() {
        let cfg = read_csv("0.1, 0.2\n0.3, 0.4\n".as_bytes()).unwrap();
        assert_eq!(cfg.shape(), (2, 2));
        assert_eq!(cfg.get(1, 0), 0.3);
    }

    #[test]
    fn dataset_archive_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = ScenarioSpec::standard(Topology::Moore, 1, ThetaScheme::DistanceBased, 1, 2);
        spec.height = 6;
        spec.width = 5;
        spec.steps = 2;
        let data = build_dataset(&spec).unwrap();
        let manifest = write_dataset(&data, dir.path()).unwrap();
        assert_eq!(manifest.clean.len(), 3);
        assert_eq!(read_dataset(dir.path()).unwrap(), data);
    }

    proptest! {
        #[test]
        fn csv_and_json_round_trip_exactly(
            (h, w, cells) in (1usize..6, 1usize..6).prop_flat_map(|(h, w)| {
                (Just(h), Just(w), prop::collection::vec(0.0f64..=1.0, h * w))
            })
        ) {
            let cfg = Configuration::new(h, w, cells).unwrap();
            let mut buf = Vec::new();
            write_csv(&cfg, &mut buf).unwrap();
            prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), cfg.clone());
            let json = serde_json::to_string(&cfg).unwrap();
            prop_assert_eq!(serde_json::from_str::<Configuration>(&json).unwrap(), cfg);
        }
    }
}
