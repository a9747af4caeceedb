//! Sampled fields and their on-disk formats.

use std::fmt::Write as _;
use std::path::Path;

use caustica::C64;
use serde::{Deserialize, Serialize};

use crate::config::GridSpec;
use crate::CliError;

/// Where a field came from.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub example: String,
    pub representation: String,
    /// Maslov index values entering the local operators
    pub indices: Vec<f64>,
    /// largest quadrature node count per axis over the grid, when quadrature was used
    pub max_nodes: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<C64>,
    pub h: f64,
    pub grid: Option<GridSpec>,
    pub provenance: Provenance,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl WaveField {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.points.len() != self.values.len() {
            return Err(CliError::Numerical(format!("{} samples for {} grid points", self.values.len(), self.points.len())));
        }
        if let Some(g) = &self.grid {
            if g.len() != self.points.len() {
                return Err(CliError::Numerical(format!("grid has {} points but field has {}", g.len(), self.points.len())));
            }
        }
        match self.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            Some(i) => Err(CliError::Numerical(format!("non-finite value at {:?}", self.points[i]))),
            None => Ok(()),
        }
    }

    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(0, Vec::len);
        let mut s: String = (1..=dim).map(|i| format!("x{i},")).collect();
        s.push_str("re,im,abs\n");
        for (p, v) in self.points.iter().zip(&self.values) {
            for x in p {
                s.push_str(&fmt_f64(*x));
                s.push(',');
            }
            let _ = writeln!(s, "{},{},{}", fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm()));
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// The two axes with more than one node, if there are exactly two.
    pub fn slice_axes(&self) -> Option<(usize, usize)> {
        let g = self.grid.as_ref()?;
        let wide: Vec<usize> = (0..g.axes.len()).filter(|&i| g.axes[i].count > 1).collect();
        (wide.len() == 2).then(|| (wide[0], wide[1]))
    }

    /// 8-bit binary PGM of |u| scaled linearly from 0 to max|u|. Rows run along the
    /// first varying axis, columns along the second.
    pub fn to_pgm(&self) -> Option<(Vec<u8>, f64)> {
        let (a, b) = self.slice_axes()?;
        let g = self.grid.as_ref()?;
        let (rows, cols) = (g.axes[a].count, g.axes[b].count);
        let max = self.max_abs();
        let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
        // row-major order with the last axis fastest matches (row a, column b)
        out.extend(self.values.iter().map(|v| if max > 0.0 { (255.0 * v.norm() / max).round() as u8 } else { 0 }));
        Some((out, max))
    }

    /// Writes `<stem>.csv`, `<stem>.json` and, for two-dimensional slices when asked, `<stem>.pgm`
    /// with its scale in `<stem>.scale.txt`.
    pub fn write(&self, dir: &Path, stem: &str, heatmap: bool) -> Result<Vec<String>, CliError> {
        self.validate()?;
        let mut written = Vec::new();
        let mut put = |name: String, bytes: &[u8]| -> Result<(), CliError> {
            std::fs::write(dir.join(&name), bytes).map_err(|e| CliError::Io(format!("cannot write {name}: {e}")))?;
            written.push(name);
            Ok(())
        };
        put(format!("{stem}.csv"), self.to_csv().as_bytes())?;
        let meta = serde_json::json!({
            "h": self.h,
            "grid": self.grid,
            "samples": self.values.len(),
            "provenance": self.provenance,
        });
        put(format!("{stem}.json"), serde_json::to_string_pretty(&meta).expect("plain data").as_bytes())?;
        if heatmap {
            if let Some((pgm, max)) = self.to_pgm() {
                put(format!("{stem}.pgm"), &pgm)?;
                put(format!("{stem}.scale.txt"), format!("quantity abs\nmin 0\nmax {}\n", fmt_f64(max)).as_bytes())?;
            }
        }
        Ok(written)
    }
}

/// Points and values of a CSV written by [`WaveField::to_csv`].
pub fn read_csv(text: &str) -> Result<(Vec<Vec<f64>>, Vec<C64>), CliError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| CliError::Config("empty CSV".into()))?.split(',').collect();
    if header.len() < 3 || header[header.len() - 3..] != ["re", "im", "abs"] {
        return Err(CliError::Config(format!("unexpected CSV header {header:?}")));
    }
    let dim = header.len() - 3;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (n, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("CSV row {}: {e}", n + 1)))?;
        if row.len() != header.len() {
            return Err(CliError::Config(format!("CSV row {} has {} fields, expected {}", n + 1, row.len(), header.len())));
        }
        points.push(row[..dim].to_vec());
        values.push(C64::new(row[dim], row[dim + 1]));
    }
    Ok((points, values))
}
