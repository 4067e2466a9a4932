use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{AzimuthalWave, CartesianField, OAMSpectrum};
use crate::error::Result;

/// Metadata written next to each image as `<image>.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageSidecar {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch_m: f64,
    pub z_m: f64,
    pub quantity: String,
    /// Physical value represented by grey level 65535.
    pub full_scale: f64,
    pub mapping: String,
}

fn write_pgm(path: &Path, n: usize, levels: &[u16], sidecar: &ImageSidecar) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "P5\n{n} {n}\n65535\n")?;
    let mut bytes = Vec::with_capacity(levels.len() * 2);
    for v in levels {
        bytes.extend_from_slice(&v.to_be_bytes());
    }
    f.write_all(&bytes)?;
    f.flush()?;
    let json = path.with_extension("json");
    std::fs::write(json, serde_json::to_vec_pretty(sidecar)?)?;
    Ok(())
}

/// 16-bit greyscale `|ψ|²`, linearly scaled so the brightest pixel is 65535.
pub fn write_intensity_pgm(field: &CartesianField, path: &Path) -> Result<ImageSidecar> {
    let intensity: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    let levels: Vec<u16> = intensity
        .iter()
        .map(|&i| if peak > 0.0 { (i / peak * 65535.0).round() as u16 } else { 0 })
        .collect();
    let sidecar = ImageSidecar {
        width: field.n,
        height: field.n,
        pixel_pitch_m: field.pitch,
        z_m: field.z,
        quantity: "intensity |psi|^2 (m^-2)".into(),
        full_scale: peak,
        mapping: "linear: value = level / 65535 * full_scale".into(),
    };
    write_pgm(path, field.n, &levels, &sidecar)?;
    Ok(sidecar)
}

/// 16-bit greyscale `arg ψ`, with `[0, 2π)` mapped linearly onto `[0, 65535]`.
pub fn write_phase_pgm(field: &CartesianField, path: &Path) -> Result<ImageSidecar> {
    let levels: Vec<u16> = field
        .values
        .iter()
        .map(|v| {
            let p = v.arg().rem_euclid(2.0 * PI);
            ((p / (2.0 * PI) * 65536.0).floor() as u32).min(65535) as u16
        })
        .collect();
    let sidecar = ImageSidecar {
        width: field.n,
        height: field.n,
        pixel_pitch_m: field.pitch,
        z_m: field.z,
        quantity: "phase arg(psi) (rad)".into(),
        full_scale: 2.0 * PI,
        mapping: "linear: phase = level / 65536 * 2pi, range [0, 2pi)".into(),
    };
    write_pgm(path, field.n, &levels, &sidecar)?;
    Ok(sidecar)
}

/// Columns `m,rho,re_u,im_u`, one row per order and grid point.
pub fn write_profile_csv<W: std::io::Write>(wave: &AzimuthalWave, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "rho", "re_u", "im_u"])?;
    for (&m, c) in &wave.components {
        for (j, v) in c.u.iter().enumerate() {
            w.write_record(&[
                m.to_string(),
                format!("{:e}", wave.grid.rho(j)),
                format!("{:e}", v.re),
                format!("{:e}", v.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `m,power`.
pub fn write_spectrum_csv<W: std::io::Write>(spectrum: &OAMSpectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "power"])?;
    for (m, p) in spectrum {
        w.write_record(&[m.to_string(), format!("{p:e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_beam;
    use crate::wave::{lg_mode, oam_spectrum, synthesize_2d, LGModeSpec, RadialGrid};

    #[test]
    fn pgm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let beam = make_beam(80e3).unwrap();
        let grid = RadialGrid::with_extent(256, 8e-6).unwrap();
        let wave = lg_mode(&[LGModeSpec::new(1, 1e-6)], grid, beam, 0.0).unwrap();
        let f = synthesize_2d(&wave, 32, 2e-7).unwrap();
        let p = dir.path().join("i.pgm");
        let side = write_intensity_pgm(&f, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let header = b"P5\n32 32\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 32 * 32 * 2);
        let max = bytes[header.len()..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .max()
            .unwrap();
        assert_eq!(max, 65535);
        assert_eq!(side.width, 32);
        let json: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("i.json")).unwrap()).unwrap();
        assert_eq!(json["pixel_pitch_m"], 2e-7);
        write_phase_pgm(&f, &dir.path().join("p.pgm")).unwrap();
    }

    #[test]
    fn csv_headers() {
        let beam = make_beam(80e3).unwrap();
        let grid = RadialGrid::with_extent(128, 0.3e-6).unwrap();
        let wave = lg_mode(&[LGModeSpec::new(1, 0.05e-6)], grid, beam, 0.0).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&wave, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("m,rho,re_u,im_u\n"));
        assert_eq!(text.lines().count(), 129);
        let mut buf = Vec::new();
        write_spectrum_csv(&oam_spectrum(&wave), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "m,power\n1,1e0\n");
    }
}
