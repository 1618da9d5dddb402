//! On-disk formats: time-series CSV, binary field dumps and PNG heatmaps.

use anyhow::{bail, Context, Result};
use atomtronics_core::{ComplexField2D, GridSpec, TimeSeries};
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

pub const CSV_HEADER: &str = "t_dimless,t_ms,survival,norm,energy,width_x,width_y";

pub const DUMP_MAGIC: &[u8; 4] = b"GPE2";
pub const DUMP_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_series_csv(path: &Path, series: &TimeSeries, ms_per_unit: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "{CSV_HEADER}")?;
    for k in 0..series.len() {
        let row = [
            series.times[k],
            series.times[k] * ms_per_unit,
            series.survival[k],
            series.norm[k],
            series.energy[k],
            series.width_x[k],
            series.width_y[k],
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Generic CSV with a caller-supplied header and numeric rows.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Layout: `GPE2`, u32 version, u64 nx, u64 ny, f64 dx, dy, x0, y0, t,
/// then `nx·ny` samples as (re, im) f64 pairs in row-major order, all
/// little-endian.
pub fn write_field_dump(path: &Path, field: &ComplexField2D, t: f64) -> Result<()> {
    let g = field.grid();
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(g.nx as u64).to_le_bytes())?;
    w.write_all(&(g.ny as u64).to_le_bytes())?;
    for v in [g.dx, g.dy, g.x0, g.y0, t] {
        w.write_all(&v.to_le_bytes())?;
    }
    for c in field.values() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub field: ComplexField2D,
    pub t: f64,
}

pub fn read_field_dump(path: &Path) -> Result<FieldDump> {
    let mut bytes = Vec::new();
    File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read_to_end(&mut bytes)?;
    let mut cur = bytes.as_slice();
    let mut take = |n: usize| -> Result<&[u8]> {
        if cur.len() < n {
            bail!("{} is truncated", path.display());
        }
        let (head, tail) = cur.split_at(n);
        cur = tail;
        Ok(head)
    };
    if take(4)? != DUMP_MAGIC {
        bail!("{} is not a GPE2 dump", path.display());
    }
    let version = u32::from_le_bytes(take(4)?.try_into()?);
    if version != DUMP_VERSION {
        bail!("unsupported dump version {version}");
    }
    let nx = u64::from_le_bytes(take(8)?.try_into()?) as usize;
    let ny = u64::from_le_bytes(take(8)?.try_into()?) as usize;
    let mut f = [0.0; 5];
    for v in &mut f {
        *v = f64::from_le_bytes(take(8)?.try_into()?);
    }
    let [dx, dy, x0, y0, t] = f;
    let grid = atomtronics_core::make_grid(nx, ny, dx, dy)?;
    if grid.x0 != x0 || grid.y0 != y0 {
        bail!("dump origin ({x0}, {y0}) is not the centred grid origin");
    }
    let mut values = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        let re = f64::from_le_bytes(take(8)?.try_into()?);
        let im = f64::from_le_bytes(take(8)?.try_into()?);
        values.push(Complex64::new(re, im));
    }
    if !cur.is_empty() {
        bail!("{} has {} trailing bytes", path.display(), cur.len());
    }
    Ok(FieldDump {
        field: ComplexField2D::new(Arc::new(grid), values)?,
        t,
    })
}

/// `density_t<t>.png` with `t` to four decimals.
pub fn heatmap_name(prefix: &str, t: f64) -> String {
    format!("{prefix}_t{t:010.4}.png")
}

/// 8-bit grayscale `|ψ|²`, scaled so the frame maximum is 255. Rows run
/// from `y_max` at the top to `y_min` at the bottom. Returns the raw maximum.
pub fn write_heatmap(path: &Path, field: &ComplexField2D) -> Result<f64> {
    let g: &GridSpec = field.grid();
    let density = field.density();
    let max = density.max();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let mut pixels = Vec::with_capacity(g.len());
    for j in (0..g.ny).rev() {
        for i in 0..g.nx {
            pixels.push((density.at(i, j) * scale).round().clamp(0.0, 255.0) as u8);
        }
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), g.nx as u32, g.ny as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header()?;
    writer.write_image_data(&pixels)?;
    writer.finish()?;
    Ok(max)
}
