//! Executes one experiment and writes its files into the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use oam_lens::analytic::{
    afocal_stack_magnification, afocal_stack_matrix, approx_focal_length, column_matrix,
    dispersion_summary, focal_length, larmor_phase, variable_spacing_abcd,
    variable_spacing_magnification, Aperture, Imaging, OpticalColumn,
};
use oam_lens::ray::{focal_crossing, launch_radius, trace, write_trajectory_csv, RayState, TraceOptions};
use oam_lens::wave::{
    decompose, dichroism, lg_mode, oam_spectrum, propagate, rms_radius, synthesize_2d,
    waist_position, write_intensity_pgm, write_phase_pgm, write_profile_csv, write_spectrum_csv,
};
use oam_lens::{BeamParameters, Error};
use serde_json::{json, Value};

use crate::config::{wave_options, ExperimentConfig, RunConfig, SteppingConfig};

/// Output directory that remembers every file written to it.
pub struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Relative paths in the order they were written.
    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(PathBuf::from(name));
        self.dir.join(name)
    }

    fn create(&mut self, name: &str) -> anyhow::Result<std::fs::File> {
        let p = self.path(name);
        std::fs::File::create(&p).with_context(|| format!("cannot create {}", p.display()))
    }

    fn csv(&mut self, name: &str) -> anyhow::Result<csv::Writer<std::fs::File>> {
        Ok(csv::Writer::from_writer(self.create(name)?))
    }

    /// Registers an image and its JSON sidecar.
    fn image(&mut self, stem: &str) -> PathBuf {
        let p = self.path(&format!("{stem}.pgm"));
        self.files.push(PathBuf::from(format!("{stem}.json")));
        p
    }
}

fn e(x: f64) -> String {
    format!("{x:e}")
}

fn not_found<T>(r: oam_lens::Result<T>) -> anyhow::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotFound(_)) => Ok(None),
        Err(err) => Err(err.into()),
    }
}

pub fn execute(cfg: &ExperimentConfig, base: &Path, out: &mut Output) -> anyhow::Result<Value> {
    let beam = cfg.beam()?;
    let column = cfg.column(base)?;
    match &cfg.run {
        RunConfig::Focal { m_values } => focal(&beam, &column, m_values, out),
        RunConfig::Trace {
            m_values,
            rho0_m,
            w0_m,
            slope,
            z_end_m,
            stepping,
            sample_planes_m,
        } => {
            let mut opts = match stepping {
                SteppingConfig::Adaptive { rel_tol } => TraceOptions::adaptive(*rel_tol),
                SteppingConfig::Fixed { steps } => TraceOptions::fixed(*steps),
            };
            opts = opts.with_samples(sample_planes_m.clone());
            let mut results = Vec::new();
            for &m in m_values {
                let rho = match (rho0_m, w0_m) {
                    (Some(r), _) => *r,
                    (None, Some(w0)) => launch_radius(*w0, m),
                    (None, None) => bail!("config field `run`: trace needs `rho0_m` or `w0_m`"),
                };
                let start = RayState {
                    z: column.object_z(),
                    rho,
                    rho_prime: *slope,
                    m,
                };
                let tr = trace(start, &column, &beam, *z_end_m, &opts)?;
                write_trajectory_csv(&tr, out.create(&format!("trajectory_m{m}.csv"))?)?;
                let last = tr.samples.last().copied();
                results.push(json!({
                    "m": m,
                    "rho0_m": rho,
                    "focus_z_m": not_found(focal_crossing(&tr))?,
                    "final": last,
                    "samples": tr.samples.len(),
                }));
            }
            Ok(json!({ "rays": results }))
        }
        RunConfig::Propagate {
            grid,
            sample_planes_m,
            images,
            numerics,
        } => {
            let grid = grid.build()?;
            let wave = lg_mode(&cfg.modes()?, grid, beam, column.object_z())?;
            let opts = wave_options(numerics);
            let run = propagate(&wave, &column, sample_planes_m, &opts)?;
            let orders: Vec<i32> = wave.components.keys().copied().collect();

            let mut w = out.csv("rms.csv")?;
            let mut header = vec!["z".to_string()];
            header.extend(orders.iter().map(|m| format!("rms_m{m}")));
            w.write_record(&header)?;
            for (z, s) in &run.snapshots {
                let mut row = vec![e(*z)];
                row.extend(orders.iter().map(|&m| e(rms_radius(s, m).unwrap_or(f64::NAN))));
                w.write_record(&row)?;
            }
            w.flush()?;

            let mut waists = BTreeMap::new();
            for &m in &orders {
                waists.insert(m.to_string(), not_found(waist_position(&run.snapshots, m))?);
            }

            let mut written = Vec::new();
            if let Some(img) = images {
                for (i, &z) in img.planes_m.iter().enumerate() {
                    let Some((_, s)) = run.snapshots.iter().find(|(zs, _)| *zs == z) else {
                        bail!("config field `run.images.planes_m[{i}]`: {z:e} is not a sample plane");
                    };
                    write_profile_csv(s, out.create(&format!("profile_{i}.csv"))?)?;
                    let field = synthesize_2d(s, img.pixels, img.pitch_m)?;
                    write_intensity_pgm(&field, &out.image(&format!("intensity_{i}")))?;
                    write_phase_pgm(&field, &out.image(&format!("phase_{i}")))?;
                    written.push(json!({ "index": i, "z_m": z }));
                }
            }
            write_spectrum_csv(&oam_spectrum(&run.final_wave), out.create("spectrum_final.csv")?)?;
            Ok(json!({
                "waist_z_m": waists,
                "steps": run.steps,
                "absorbed": run.final_wave.absorbed(),
                "norm_final": run.final_wave.norm(),
                "images": written,
                "options": opts,
            }))
        }
        RunConfig::Stack {
            pairs,
            m_values,
            lambda,
            f0_m,
            spacing_s,
            flag_tolerance,
        } => {
            let (f0, lam) = match (f0_m, lambda) {
                (Some(f), Some(l)) => (*f, *l),
                _ => {
                    let Some(first) = column.elements().first() else {
                        bail!("config field `run`: stack needs `f0_m` and `lambda` or a lens element");
                    };
                    let s = dispersion_summary(&first.model, &beam)?;
                    (f0_m.unwrap_or(s.f0), lambda.unwrap_or(s.lambda))
                }
            };
            let mut w = out.csv("afocal_stack.csv")?;
            w.write_record(["pairs", "m", "exact", "approx", "abcd", "rel_gap", "flag"])?;
            let mut flagged = 0usize;
            for n in 1..=*pairs {
                for &m in m_values {
                    let mag = afocal_stack_magnification(lam, m, n)?;
                    let abcd = afocal_stack_matrix(f0, lam, m, n)?.a;
                    let gap = ((mag.approx - mag.exact) / mag.exact).abs();
                    let flag = gap > *flag_tolerance;
                    flagged += flag as usize;
                    w.write_record(&[
                        n.to_string(),
                        m.to_string(),
                        e(mag.exact),
                        e(mag.approx),
                        e(abcd),
                        e(gap),
                        flag.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            if !spacing_s.is_empty() {
                let mut w = out.csv("variable_spacing.csv")?;
                w.write_record(["s", "m", "closed_form", "abcd_magnification", "image_distance"])?;
                for &s in spacing_s {
                    for &m in m_values {
                        let closed = variable_spacing_magnification(lam, m, s)?.value();
                        let (mag, dist) = match variable_spacing_abcd(f0, lam, m, s)? {
                            Imaging::Finite {
                                image_distance,
                                magnification,
                            } => (magnification, image_distance),
                            Imaging::AtInfinity { .. } => (f64::INFINITY, f64::INFINITY),
                        };
                        w.write_record(&[e(s), m.to_string(), e(closed), e(mag), e(dist)])?;
                    }
                }
                w.flush()?;
            }
            Ok(json!({ "f0_m": f0, "lambda": lam, "flagged_rows": flagged }))
        }
        RunConfig::Dichroism {
            grid,
            aperture_z_m,
            aperture_radius_m,
            numerics,
        } => {
            let grid = grid.build()?;
            let wave = lg_mode(&cfg.modes()?, grid, beam, column.object_z())?;
            let aperture = Aperture {
                z: *aperture_z_m,
                radius: *aperture_radius_m,
            };
            let arms = dichroism(&wave, &column, aperture, &wave_options(numerics))?;
            let mut w = out.csv("dichroism.csv")?;
            w.write_record(["polarity", "m", "transmitted"])?;
            for arm in &arms {
                for (m, t) in &arm.transmitted {
                    w.write_record(&[arm.polarity.to_string(), m.to_string(), e(*t)])?;
                }
            }
            w.flush()?;
            Ok(json!({ "aperture": aperture, "arms": arms }))
        }
        RunConfig::Spectrum {
            grid,
            z_m,
            pixels,
            pitch_m,
            n_phi,
            numerics,
        } => {
            let grid = grid.build()?;
            let wave = lg_mode(&cfg.modes()?, grid, beam, column.object_z())?;
            let source = oam_spectrum(&wave);
            let run = propagate(&wave, &column, &[*z_m], &wave_options(numerics))?;
            let after = oam_spectrum(&run.final_wave);
            let field = synthesize_2d(&run.final_wave, *pixels, *pitch_m)?;
            let decomposed = decompose(&field, &grid, *n_phi)?;
            write_spectrum_csv(&source, out.create("spectrum_source.csv")?)?;
            write_spectrum_csv(&after, out.create("spectrum_propagated.csv")?)?;
            write_spectrum_csv(&decomposed, out.create("spectrum_decomposed.csv")?)?;
            let key = |s: &BTreeMap<i32, f64>| -> BTreeMap<String, f64> {
                s.iter().map(|(m, p)| (m.to_string(), *p)).collect()
            };
            Ok(json!({
                "source": key(&source),
                "propagated": key(&after),
                "decomposed": key(&decomposed),
                "absorbed": run.final_wave.absorbed(),
            }))
        }
    }
}

fn focal(
    beam: &BeamParameters,
    column: &OpticalColumn,
    m_values: &[i32],
    out: &mut Output,
) -> anyhow::Result<Value> {
    let mut elements = Vec::new();
    let mut w = out.csv("focal.csv")?;
    w.write_record(["element", "m", "f_exact_m", "f_approx_m", "larmor_phase_rad"])?;
    for (i, el) in column.elements().iter().enumerate() {
        let s = dispersion_summary(&el.model, beam)?;
        for &m in m_values {
            let f = focal_length(&el.model, beam, m)?.value();
            w.write_record(&[
                i.to_string(),
                m.to_string(),
                e(f),
                e(approx_focal_length(s.f0, s.lambda, m)),
                e(larmor_phase(&el.model, beam, m)?),
            ])?;
        }
        elements.push(json!({
            "index": i,
            "z_center_m": el.z_center,
            "extent_m": el.model.extent(),
            "f0_m": s.f0,
            "lambda": s.lambda,
            "beta0": s.beta0,
        }));
    }
    w.flush()?;

    let mut w = out.csv("column_matrix.csv")?;
    w.write_record(["m", "a", "b", "c", "d"])?;
    let mut warnings = BTreeMap::new();
    for &m in m_values {
        let cm = column_matrix(column, beam, m)?;
        let t = cm.matrix;
        w.write_record(&[m.to_string(), e(t.a), e(t.b), e(t.c), e(t.d)])?;
        if !cm.thin_lens_warnings.is_empty() {
            warnings.insert(m.to_string(), cm.thin_lens_warnings);
        }
    }
    w.flush()?;
    Ok(json!({ "elements": elements, "thin_lens_warnings": warnings }))
}
