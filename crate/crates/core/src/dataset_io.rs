//! Dataset, label, and layout file formats plus SVG rendering.
//!
//! Formats are fixed and documented here:
//! * raw-f32 vectors: 8-byte little-endian header (`n: u32`, `d: u32`)
//!   followed by `n * d` little-endian `f32` values, row-major.
//! * tsv vectors: `n` lines of `d` tab-separated decimal numbers.
//! * labels: tsv lines `id<TAB>class`; class ids are remapped to
//!   contiguous 0-based integers in first-occurrence order.
//! * layouts: tsv lines `id<TAB>x<TAB>y`, coordinates printed with
//!   9 significant digits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense feature vectors with implicit ids `0..n-1`.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    d: usize,
    vectors: Vec<f32>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, vectors: Vec<f32>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Param(format!("dataset must have n >= 1 and d >= 1, got n={n}, d={d}")));
        }
        if vectors.len() != n * d {
            return Err(Error::Param(format!(
                "vector buffer has {} values, expected n*d = {}",
                vectors.len(),
                n * d
            )));
        }
        if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::Param(format!("non-finite value at flat index {i}")));
        }
        Ok(Dataset { n, d, vectors })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn vector(&self, id: usize) -> &[f32] {
        &self.vectors[id * self.d..(id + 1) * self.d]
    }

    pub fn values(&self) -> &[f32] {
        &self.vectors
    }

    /// Euclidean distance between two samples, accumulated in f64.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let va = self.vector(a);
        let vb = self.vector(b);
        let mut acc = 0.0f64;
        for (x, y) in va.iter().zip(vb) {
            let diff = f64::from(*x) - f64::from(*y);
            acc += diff * diff;
        }
        acc.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorFormat {
    Tsv,
    RawF32,
}

/// Load vectors from `path` in the given format.
pub fn load_vectors(path: &Path, format: VectorFormat) -> Result<Dataset> {
    match format {
        VectorFormat::RawF32 => load_raw_f32(path),
        VectorFormat::Tsv => load_tsv(path),
    }
}

fn load_raw_f32(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut header = [0u8; 8];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::binary(path, 0, "malformed header: expected 8 bytes (n: u32 LE, d: u32 LE)"))?;
    let n = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    if n == 0 || d == 0 {
        return Err(Error::binary(path, 0, format!("header declares n={n}, d={d}; both must be >= 1")));
    }
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let expected = n * d * 4;
    if bytes.len() != expected {
        return Err(Error::binary(
            path,
            8 + bytes.len() as u64,
            format!("expected {expected} payload bytes for {n}x{d} f32 values, found {}", bytes.len()),
        ));
    }
    let mut vectors = Vec::with_capacity(n * d);
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::binary(path, 8 + (i as u64) * 4, format!("non-finite value {v}")));
        }
        vectors.push(v);
    }
    Dataset::new(n, d, vectors)
}

fn load_tsv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut vectors: Vec<f32> = Vec::new();
    let mut d = 0usize;
    let mut n = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut width = 0usize;
        for field in line.split('\t') {
            let v: f32 = field
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("cannot parse '{field}' as a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, lineno, format!("non-finite value {v}")));
            }
            vectors.push(v);
            width += 1;
        }
        if n == 0 {
            d = width;
        } else if width != d {
            return Err(Error::parse(
                path,
                lineno,
                format!("inconsistent row width: expected {d} fields, found {width}"),
            ));
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::parse(path, 1, "empty vector file"));
    }
    Dataset::new(n, d, vectors)
}

/// Write vectors in the raw-f32 format; exact inverse of loading.
pub fn write_vectors_raw(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let n = dataset.len() as u32;
    let d = dataset.dim() as u32;
    w.write_all(&n.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    w.write_all(&d.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    for v in dataset.values() {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Class labels for a dataset of `n` objects; not every id needs a label.
#[derive(Debug, Clone)]
pub struct LabelSet {
    labels: Vec<Option<u32>>,
    class_count: usize,
}

impl LabelSet {
    pub fn empty(n: usize) -> Self {
        LabelSet { labels: vec![None; n], class_count: 0 }
    }

    pub fn from_classes(classes: &[u32]) -> Self {
        let class_count = classes.iter().map(|c| *c as usize + 1).max().unwrap_or(0);
        LabelSet { labels: classes.iter().map(|c| Some(*c)).collect(), class_count }
    }

    pub fn label(&self, id: u32) -> Option<u32> {
        self.labels.get(id as usize).copied().flatten()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.iter().all(|l| l.is_none())
    }

    /// Ids that carry a label, ascending.
    pub fn labeled_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|_| i as u32))
    }
}

/// Load labels as tsv `id<TAB>class` lines; `n` is the dataset size used
/// for range checking. Raw class ids are remapped to contiguous 0-based
/// ids in first-occurrence order.
pub fn load_labels(path: &Path, n: usize) -> Result<LabelSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut labels: Vec<Option<u32>> = vec![None; n];
    let mut remap: BTreeMap<i64, u32> = BTreeMap::new();
    let mut next_class = 0u32;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut fields = line.split('\t');
        let id: usize = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, lineno, "expected 'id<TAB>class'"))?;
        let raw_class: i64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, lineno, "expected 'id<TAB>class'"))?;
        if id >= n {
            return Err(Error::parse(path, lineno, format!("id {id} out of range for dataset of {n} objects")));
        }
        if labels[id].is_some() {
            return Err(Error::parse(path, lineno, format!("duplicate id {id}")));
        }
        let class = *remap.entry(raw_class).or_insert_with(|| {
            let c = next_class;
            next_class += 1;
            c
        });
        labels[id] = Some(class);
    }
    Ok(LabelSet { labels, class_count: next_class as usize })
}

/// Mapping object id -> 2D coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layout {
    positions: BTreeMap<u32, [f64; 2]>,
}

impl Layout {
    pub fn new() -> Self {
        Layout::default()
    }

    pub fn insert(&mut self, id: u32, pos: [f64; 2]) {
        self.positions.insert(id, pos);
    }

    pub fn get(&self, id: u32) -> Option<[f64; 2]> {
        self.positions.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Iterate `(id, position)` in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, [f64; 2])> + '_ {
        self.positions.iter().map(|(k, v)| (*k, *v))
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.positions.keys().copied()
    }

    /// Ids in `0..n` that are absent from this layout.
    pub fn missing_ids(&self, n: usize) -> Vec<u32> {
        (0..n as u32).filter(|id| !self.positions.contains_key(id)).collect()
    }
}

impl FromIterator<(u32, [f64; 2])> for Layout {
    fn from_iter<T: IntoIterator<Item = (u32, [f64; 2])>>(iter: T) -> Self {
        Layout { positions: iter.into_iter().collect() }
    }
}

/// Format a finite f64 with 9 significant digits, trailing zeros trimmed.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let prec = (8 - exp).max(0) as usize;
    let mut s = format!("{:.*}", prec, x);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// The value `format_g9` output parses back to; the fixed point of one
/// write/read cycle.
pub fn quantize_g9(x: f64) -> f64 {
    format_g9(x).parse().unwrap()
}

/// Write a layout as tsv `id<TAB>x<TAB>y` lines in ascending id order.
pub fn write_layout(layout: &Layout, path: &Path) -> Result<()> {
    if layout.is_empty() {
        return Err(Error::Contract("cannot write an empty layout".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, [x, y]) in layout.iter() {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Contract(format!("non-finite coordinate for id {id}")));
        }
        writeln!(w, "{id}\t{}\t{}", format_g9(x), format_g9(y)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a layout written by [`write_layout`].
pub fn read_layout(path: &Path) -> Result<Layout> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut layout = Layout::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut fields = line.split('\t');
        let id: u32 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, lineno, "expected 'id<TAB>x<TAB>y'"))?;
        let x: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, lineno, "expected 'id<TAB>x<TAB>y'"))?;
        let y: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, lineno, "expected 'id<TAB>x<TAB>y'"))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::parse(path, lineno, "non-finite coordinate"));
        }
        if layout.get(id).is_some() {
            return Err(Error::parse(path, lineno, format!("duplicate id {id}")));
        }
        layout.insert(id, [x, y]);
    }
    Ok(layout)
}

/// Fixed 20-color palette; class id indexes it modulo 20.
pub const PALETTE: [&str; 20] = [
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896",
    "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f", "#c7c7c7",
    "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
];

const UNLABELED_FILL: &str = "#808080";

/// Render the layout as an SVG scatter plot, one circle per object.
///
/// Deterministic: identical layout and labels produce byte-identical SVG.
pub fn emit_svg(layout: &Layout, labels: Option<&LabelSet>, path: &Path, point_radius: f64) -> Result<()> {
    if layout.is_empty() {
        return Err(Error::Contract("cannot render an empty layout".into()));
    }
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (_, [x, y]) in layout.iter() {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let width = max_x - min_x;
    let height = max_y - min_y;
    let pad_x = if width > 0.0 { width * 0.02 } else { 1.0 };
    let pad_y = if height > 0.0 { height * 0.02 } else { 1.0 };

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        format_g9(min_x - pad_x),
        format_g9(min_y - pad_y),
        format_g9(width + 2.0 * pad_x),
        format_g9(height + 2.0 * pad_y)
    )
    .map_err(|e| Error::io(path, e))?;
    for (id, [x, y]) in layout.iter() {
        let fill = match labels.and_then(|l| l.label(id)) {
            Some(class) => PALETTE[class as usize % PALETTE.len()],
            None => UNLABELED_FILL,
        };
        writeln!(
            w,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>",
            format_g9(x),
            format_g9(y),
            format_g9(point_radius),
            fill
        )
        .map_err(|e| Error::io(path, e))?;
    }
    writeln!(w, "</svg>").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::fs;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn raw_f32_header_contract() {
        let dir = tmp();
        let path = dir.path().join("v.f32");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        for v in [1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(&path, bytes).unwrap();
        let ds = load_vectors(&path, VectorFormat::RawF32).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.vector(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn raw_f32_truncated_header_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("v.f32");
        fs::write(&path, [1u8, 2, 3]).unwrap();
        let err = load_vectors(&path, VectorFormat::RawF32).unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }

    #[test]
    fn raw_f32_payload_size_mismatch_names_offset() {
        let dir = tmp();
        let path = dir.path().join("v.f32");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        fs::write(&path, bytes).unwrap();
        let err = load_vectors(&path, VectorFormat::RawF32).unwrap_err();
        assert!(matches!(err, Error::Binary { .. }), "{err}");
    }

    #[test]
    fn raw_f32_non_finite_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("v.f32");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        fs::write(&path, bytes).unwrap();
        let err = load_vectors(&path, VectorFormat::RawF32).unwrap_err();
        assert!(matches!(err, Error::Binary { offset: 12, .. }), "{err}");
    }

    #[test]
    fn tsv_small_matrix() {
        let dir = tmp();
        let path = dir.path().join("v.tsv");
        fs::write(&path, "1.0\t2.0\n3.0\t4.0\n").unwrap();
        let ds = load_vectors(&path, VectorFormat::Tsv).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.vector(0), &[1.0, 2.0]);
    }

    #[test]
    fn tsv_ragged_row_names_line() {
        let dir = tmp();
        let path = dir.path().join("v.tsv");
        fs::write(&path, "1.0\t2.0\n3.0\n").unwrap();
        let err = load_vectors(&path, VectorFormat::Tsv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn raw_roundtrip_is_bit_exact() {
        let dir = tmp();
        let path = dir.path().join("v.f32");
        let ds = Dataset::new(3, 2, vec![0.1, -2.5, 3.25, 1e-20, 1e20, -0.0]).unwrap();
        write_vectors_raw(&ds, &path).unwrap();
        let back = load_vectors(&path, VectorFormat::RawF32).unwrap();
        assert_eq!(ds.values(), back.values());
    }

    #[test]
    fn labels_remap_in_first_occurrence_order() {
        let dir = tmp();
        let path = dir.path().join("l.tsv");
        fs::write(&path, "0\t7\n1\t7\n2\t3\n").unwrap();
        let ls = load_labels(&path, 3).unwrap();
        assert_eq!(ls.label(0), Some(0));
        assert_eq!(ls.label(1), Some(0));
        assert_eq!(ls.label(2), Some(1));
        assert_eq!(ls.class_count(), 2);
    }

    #[test]
    fn labels_empty_file() {
        let dir = tmp();
        let path = dir.path().join("l.tsv");
        fs::write(&path, "").unwrap();
        let ls = load_labels(&path, 4).unwrap();
        assert!(ls.is_empty());
        assert_eq!(ls.class_count(), 0);
    }

    #[test]
    fn labels_out_of_range_id_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("l.tsv");
        fs::write(&path, "0\t1\n1\t1\n5\t2\n").unwrap();
        let err = load_labels(&path, 4).unwrap_err();
        assert!(err.to_string().contains("id 5"), "{err}");
    }

    #[test]
    fn labels_duplicate_id_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("l.tsv");
        fs::write(&path, "0\t1\n0\t2\n").unwrap();
        let err = load_labels(&path, 4).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn layout_write_format_is_exact() {
        let dir = tmp();
        let path = dir.path().join("layout.tsv");
        let layout: Layout = [(0u32, [1.5f64, 2.5f64])].into_iter().collect();
        write_layout(&layout, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "0\t1.5\t2.5\n");
    }

    #[test]
    fn layout_roundtrip_recovers_f32_coordinates() {
        // 9 significant decimal digits identify an f32 uniquely, so layouts
        // whose coordinates come from f32 data survive a write/read cycle.
        let dir = tmp();
        let path = dir.path().join("layout.tsv");
        let mut layout = Layout::new();
        let mut v = 0.37f32;
        for id in 0..200u32 {
            v = v * 1.7f32 % 10.0 - 4.0;
            let w = v * 0.31f32;
            layout.insert(id, [f64::from(v), f64::from(w)]);
        }
        write_layout(&layout, &path).unwrap();
        let back = read_layout(&path).unwrap();
        for (id, [x, y]) in layout.iter() {
            let [bx, by] = back.get(id).unwrap();
            assert_eq!(x as f32, bx as f32);
            assert_eq!(y as f32, by as f32);
        }
    }

    #[test]
    fn layout_roundtrip_within_relative_tolerance() {
        // Coordinates expressible in 9 significant digits round-trip within
        // 1e-9 relative; a representative spread of such values.
        let dir = tmp();
        let path = dir.path().join("layout.tsv");
        let mut layout = Layout::new();
        for id in 0..500u32 {
            let x = quantize_g9(f64::from(id) * 0.7310941 - 180.0);
            let y = quantize_g9((f64::from(id) * 1.3371).sin() * 42.5);
            layout.insert(id, [x, y]);
        }
        write_layout(&layout, &path).unwrap();
        let back = read_layout(&path).unwrap();
        for (id, [x, y]) in layout.iter() {
            let [bx, by] = back.get(id).unwrap();
            assert!((x - bx).abs() <= 1e-9 * x.abs().max(1e-12), "id {id}: {x} vs {bx}");
            assert!((y - by).abs() <= 1e-9 * y.abs().max(1e-12), "id {id}: {y} vs {by}");
        }
    }

    #[test]
    fn layout_duplicate_id_is_an_error() {
        let dir = tmp();
        let path = dir.path().join("layout.tsv");
        fs::write(&path, "0\t1.0\t2.0\n0\t3.0\t4.0\n").unwrap();
        let err = read_layout(&path).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn svg_single_unlabeled_point() {
        let dir = tmp();
        let path = dir.path().join("p.svg");
        let layout: Layout = [(0u32, [0.0, 0.0])].into_iter().collect();
        emit_svg(&layout, None, &path, 1.0).unwrap();
        let svg = fs::read_to_string(&path).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains(UNLABELED_FILL));
    }

    #[test]
    fn svg_two_classes_two_fills() {
        let dir = tmp();
        let path = dir.path().join("p.svg");
        let layout: Layout =
            [(0u32, [0.0, 0.0]), (1, [1.0, 0.0]), (2, [0.0, 1.0])].into_iter().collect();
        let labels = LabelSet::from_classes(&[0, 1, 0]);
        emit_svg(&layout, Some(&labels), &path, 0.5).unwrap();
        let svg = fs::read_to_string(&path).unwrap();
        assert!(svg.contains(PALETTE[0]));
        assert!(svg.contains(PALETTE[1]));
    }

    #[test]
    fn svg_is_deterministic() {
        let dir = tmp();
        let a = dir.path().join("a.svg");
        let b = dir.path().join("b.svg");
        let layout: Layout =
            (0..50u32).map(|i| (i, [f64::from(i) * 0.3, f64::from(i % 7)])).collect();
        let labels = LabelSet::from_classes(&(0..50).map(|i| i % 4).collect::<Vec<_>>());
        emit_svg(&layout, Some(&labels), &a, 0.7).unwrap();
        emit_svg(&layout, Some(&labels), &b, 0.7).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn format_g9_examples() {
        assert_eq!(format_g9(1.5), "1.5");
        assert_eq!(format_g9(0.0), "0");
        assert_eq!(format_g9(-0.0), "0");
        assert_eq!(format_g9(123456789.0), "123456789");
        assert_eq!(format_g9(0.000123456789), "0.000123456789");
        assert_eq!(format_g9(-2.0), "-2");
    }

    proptest! {
        #[test]
        fn prop_raw_roundtrip(values in proptest::collection::vec(-1e30f32..1e30f32, 1..64)) {
            let dir = tmp();
            let path = dir.path().join("v.f32");
            let n = values.len();
            let ds = Dataset::new(n, 1, values).unwrap();
            write_vectors_raw(&ds, &path).unwrap();
            let back = load_vectors(&path, VectorFormat::RawF32).unwrap();
            prop_assert_eq!(ds.values(), back.values());
        }

        #[test]
        fn prop_layout_second_roundtrip_is_exact(coords in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..32)) {
            // After one write/read cycle the representation is stable:
            // further roundtrips are bit-exact.
            let dir = tmp();
            let p1 = dir.path().join("l1.tsv");
            let p2 = dir.path().join("l2.tsv");
            let layout: Layout = coords.iter().enumerate().map(|(i, &(x, y))| (i as u32, [x, y])).collect();
            write_layout(&layout, &p1).unwrap();
            let once = read_layout(&p1).unwrap();
            write_layout(&once, &p2).unwrap();
            let twice = read_layout(&p2).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
