//! Multi-view dataset loading, saving, and synthetic generation.
//!
//! A dataset on disk is a manifest file plus one headerless CSV matrix per
//! view (row per sample, '.' decimal separator) and an optional label file
//! with one 0-based integer per line. The manifest is TOML:
//!
//! ```toml
//! name = "webkb"
//! view_paths = ["view_0.csv", "view_1.csv", "view_2.csv"]
//! label_path = "labels.csv"
//! expected_n = 203
//! expected_c = 4
//! ```
//!
//! Relative paths resolve against the manifest's directory. Matrices are
//! written with Rust's shortest round-trip float formatting, so a save
//! followed by a load reproduces every value bit-exactly.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub view_paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_c: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MultiViewDataset {
    pub name: String,
    pub views: Vec<FeatureMatrix>,
    pub labels: Option<Vec<usize>>,
}

impl MultiViewDataset {
    pub fn n_samples(&self) -> usize {
        self.views.first().map_or(0, |v| v.n_samples())
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    /// Number of distinct ground-truth labels, when labels are present.
    pub fn n_clusters(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().collect::<std::collections::HashSet<_>>().len())
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let manifest: DatasetManifest = toml::from_str(&text).map_err(|e| Error::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if manifest.view_paths.is_empty() {
        return Err(Error::Manifest {
            path: path.to_path_buf(),
            message: "manifest lists no views".into(),
        });
    }
    Ok(manifest)
}

/// Read a headerless CSV matrix. Every row must have the same number of
/// numeric fields.
fn load_view(path: &Path, view_id: usize) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;

    let mut data = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: row + 1,
            message: e.to_string(),
        })?;
        let cols = *n_cols.get_or_insert(record.len());
        if record.len() != cols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: row + 1,
                message: format!("expected {} columns, found {}", cols, record.len()),
            });
        }
        for field in record.iter() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: row + 1,
                message: format!("not a number: {field:?}"),
            })?;
            data.push(value);
        }
        n_rows += 1;
    }
    let n_cols = n_cols.unwrap_or(0);
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: "empty matrix".into(),
        });
    }
    FeatureMatrix::new(DMatrix::from_row_slice(n_rows, n_cols, &data), view_id)
}

fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let file = fs::File::open(path).map_err(io_error(path))?;
    let mut labels = Vec::new();
    for (row, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_error(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let label: usize = trimmed.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row: row + 1,
            message: format!("not a 0-based integer label: {trimmed:?}"),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

/// Load every view and the labels referenced by a manifest file, validating
/// sample counts across views and against the manifest's expected shape.
pub fn load_dataset(manifest_path: &Path) -> Result<MultiViewDataset> {
    let manifest = load_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

    let mut views = Vec::with_capacity(manifest.view_paths.len());
    for (view_id, path) in manifest.view_paths.iter().enumerate() {
        views.push(load_view(&resolve(path), view_id)?);
    }
    let n = views[0].n_samples();
    for (view_id, view) in views.iter().enumerate() {
        if view.n_samples() != n {
            return Err(Error::SampleCountMismatch {
                view: view_id,
                rows: view.n_samples(),
                expected: n,
            });
        }
    }

    let labels = match &manifest.label_path {
        Some(path) => {
            let path = resolve(path);
            let labels = load_labels(&path)?;
            if labels.len() != n {
                return Err(Error::LabelLengthMismatch {
                    labels: labels.len(),
                    samples: n,
                    file: path.display().to_string(),
                });
            }
            Some(labels)
        }
        None => None,
    };

    let dataset = MultiViewDataset {
        name: manifest.name.clone(),
        views,
        labels,
    };
    if let Some(expected) = manifest.expected_n {
        if n != expected {
            return Err(Error::DatasetShape {
                name: manifest.name.clone(),
                what: "samples",
                expected,
                found: n,
            });
        }
    }
    if let (Some(expected), Some(found)) = (manifest.expected_c, dataset.n_clusters()) {
        if found != expected {
            return Err(Error::DatasetShape {
                name: manifest.name,
                what: "clusters",
                expected,
                found,
            });
        }
    }
    Ok(dataset)
}

/// Write a dataset into `dir` as `view_<i>.csv`, `labels.csv`, and
/// `manifest.toml`; returns the manifest path. Values are formatted with the
/// shortest representation that parses back to the same float.
pub fn save_dataset(dataset: &MultiViewDataset, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;

    let mut view_paths = Vec::new();
    for (view_id, view) in dataset.views.iter().enumerate() {
        let file_name = PathBuf::from(format!("view_{view_id}.csv"));
        let path = dir.join(&file_name);
        let mut out = BufWriter::new(fs::File::create(&path).map_err(io_error(&path))?);
        for i in 0..view.n_samples() {
            let row: Vec<String> = (0..view.dim()).map(|j| view.data[(i, j)].to_string()).collect();
            writeln!(out, "{}", row.join(",")).map_err(io_error(&path))?;
        }
        out.flush().map_err(io_error(&path))?;
        view_paths.push(file_name);
    }

    let label_path = match &dataset.labels {
        Some(labels) => {
            let file_name = PathBuf::from("labels.csv");
            let path = dir.join(&file_name);
            let body: String = labels.iter().map(|l| format!("{l}\n")).collect();
            fs::write(&path, body).map_err(io_error(&path))?;
            Some(file_name)
        }
        None => None,
    };

    let manifest = DatasetManifest {
        name: dataset.name.clone(),
        view_paths,
        label_path,
        expected_n: Some(dataset.n_samples()),
        expected_c: dataset.n_clusters(),
    };
    let manifest_path = dir.join("manifest.toml");
    let text = toml::to_string_pretty(&manifest).map_err(|e| Error::Manifest {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&manifest_path, text).map_err(io_error(&manifest_path))?;
    Ok(manifest_path)
}

/// Shape of a synthetic dataset, parseable from a compact
/// `"n=50,c=3,v=3,dim=8,noise=0.3"` string where `n` is samples per
/// cluster and `noise` is the corrupted fraction of view 0. Omitted keys
/// keep these defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_per_cluster: usize,
    pub n_clusters: usize,
    pub n_views: usize,
    pub dim: usize,
    pub noise_fraction: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_per_cluster: 50,
            n_clusters: 3,
            n_views: 3,
            dim: 8,
            noise_fraction: 0.3,
        }
    }
}

impl SyntheticSpec {
    pub fn generate(&self, seed: u64) -> MultiViewDataset {
        generate_synthetic(
            self.n_per_cluster,
            self.n_clusters,
            self.n_views,
            self.dim,
            self.noise_fraction,
            seed,
        )
    }
}

impl std::str::FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidHyperparam(format!("synthetic spec: {msg}"));
        let mut spec = Self::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            let parse_usize = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("{key} must be a positive integer, got {v:?}")))
            };
            match key.trim() {
                "n" => spec.n_per_cluster = parse_usize(value)?,
                "c" => spec.n_clusters = parse_usize(value)?,
                "v" => spec.n_views = parse_usize(value)?,
                "dim" => spec.dim = parse_usize(value)?,
                "noise" => {
                    spec.noise_fraction = value
                        .trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|f| (0.0..=1.0).contains(f))
                        .ok_or_else(|| bad(format!("noise must be in [0,1], got {value:?}")))?;
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(spec)
    }
}

/// Synthetic multi-view Gaussian blobs with an injected inconsistent view.
///
/// Each view independently draws `c` cluster centers with coordinates from
/// N(0, 6^2), re-drawn until all pairwise center distances reach 6 (six
/// noise standard deviations, so clean views are well separated), then adds
/// unit-variance Gaussian noise per sample. In view 0 a `noise_fraction`
/// share of samples is replaced by draws from a uniform distribution over
/// the centers' bounding box padded by 6, unrelated to any cluster. Sample
/// `i` belongs to cluster `i / n_per_cluster`. Output is deterministic in
/// `seed`; the clean portion does not depend on `noise_fraction`.
pub fn generate_synthetic(
    n_per_cluster: usize,
    c: usize,
    n_views: usize,
    dim: usize,
    noise_fraction: f64,
    seed: u64,
) -> MultiViewDataset {
    assert!(n_per_cluster >= 1 && c >= 1 && n_views >= 1 && dim >= 1);
    let n = n_per_cluster * c;
    assert!(n >= 2, "need at least two samples");
    let noise_fraction = noise_fraction.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let labels: Vec<usize> = (0..n).map(|i| i / n_per_cluster).collect();
    let mut views = Vec::with_capacity(n_views);
    let mut boxes = Vec::with_capacity(n_views);

    for view_id in 0..n_views {
        let centers = draw_separated_centers(&mut rng, &normal, c, dim);
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for center in &centers {
            for (j, &x) in center.iter().enumerate() {
                lo[j] = lo[j].min(x);
                hi[j] = hi[j].max(x);
            }
        }
        boxes.push((lo, hi));

        let data = DMatrix::from_fn(n, dim, |i, j| centers[labels[i]][j])
            .map(|x| x + normal.sample(&mut rng));
        views.push(FeatureMatrix::new(data, view_id).expect("finite synthetic data"));
    }

    let n_noisy = (noise_fraction * n as f64).floor() as usize;
    if n_noisy > 0 {
        let mut corrupted = sample_indices(&mut rng, n, n_noisy).into_vec();
        corrupted.sort_unstable();
        let (lo, hi) = &boxes[0];
        for i in corrupted {
            for j in 0..dim {
                views[0].data[(i, j)] = rng.gen_range((lo[j] - 6.0)..(hi[j] + 6.0));
            }
        }
    }

    MultiViewDataset {
        name: format!("synthetic_n{n_per_cluster}_c{c}_v{n_views}_d{dim}_f{noise_fraction}_s{seed}"),
        views,
        labels: Some(labels),
    }
}

/// Cluster centers with all pairwise distances at least 6. Rejection
/// sampling almost always succeeds; after 1000 failed draws the center is
/// placed on a widening axis-aligned lattice, which always terminates.
fn draw_separated_centers(
    rng: &mut ChaCha8Rng,
    normal: &Normal<f64>,
    c: usize,
    dim: usize,
) -> Vec<Vec<f64>> {
    let far_enough = |candidate: &[f64], accepted: &[Vec<f64>]| {
        accepted.iter().all(|other| {
            let d2: f64 = candidate.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 >= 36.0
        })
    };
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(c);
    for t in 0..c {
        let mut placed = false;
        for _ in 0..1000 {
            let candidate: Vec<f64> = (0..dim).map(|_| 6.0 * normal.sample(rng)).collect();
            if far_enough(&candidate, &centers) {
                centers.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            let mut multiplier = 1.0;
            loop {
                let mut candidate = vec![0.0; dim];
                candidate[t % dim] = 12.0 * multiplier;
                if far_enough(&candidate, &centers) {
                    centers.push(candidate);
                    break;
                }
                multiplier += 1.0;
            }
        }
    }
    centers
}
