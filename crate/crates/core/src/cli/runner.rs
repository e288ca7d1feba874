//! Experiment pipeline: build the generator, prepare and propagate the two
//! competing states, detect crossings and write CSV plus report files.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use crate::cli::config::{fmt_f64, BUnit, ExperimentConfig, NearState, DEFAULT_T_MAX, DEFAULT_T_MIN, RESULT_PREFIX};
use crate::dynamics::{self, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::metrics::{self, Metric, MpembaReport};
use crate::relaxation::{self, BathParams, LiouvillianOptions, Superoperator, SystemParams};
use crate::spectral::{self, ModeDecomposition};
use crate::state::DensityMatrix;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything fixed before propagation.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    /// Parameters in the units the generator is built in.
    pub system: SystemParams,
    pub bath: BathParams,
    /// K0 of the physical parameters, s⁻¹.
    pub k0_physical: f64,
    pub liouvillian: Superoperator,
    pub reference: DensityMatrix,
    pub far: DensityMatrix,
    pub near: DensityMatrix,
    pub times: Vec<f64>,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (p_phys, bp_phys) = config.physical_params();
        let k0_physical = bp_phys.k0();
        let (system, bath) = if config.dimensionless {
            let (p, bp, _) = relaxation::to_dimensionless(&p_phys, &bp_phys)?;
            (p, bp)
        } else {
            (p_phys, bp_phys)
        };
        let opts = LiouvillianOptions {
            coupling: config.coupling,
            spectral_mode: config.spectral_mode,
            channels: config.channels,
            fault: None,
        };
        let liouvillian = relaxation::build_liouvillian(&system, &bath, &opts)?;
        let reference = relaxation::thermal_state(&system);
        let far = dynamics::far_state(&system);
        let near = match config.near_state {
            NearState::Theta => dynamics::near_state(config.theta_deg.to_radians(), &system)?,
            NearState::Genuine => dynamics::near_state_genuine(&system),
        };
        let unit = if config.dimensionless { 1.0 } else { 1.0 / k0_physical };
        let t_min = config.t_min.unwrap_or(DEFAULT_T_MIN * unit);
        let t_max = config.t_max.unwrap_or(DEFAULT_T_MAX * unit);
        let times = dynamics::time_grid(t_min, t_max, config.points, config.spacing)?;
        Ok(Self { config: config.clone(), system, bath, k0_physical, liouvillian, reference, far, near, times })
    }

    pub fn metric(&self) -> Metric {
        self.config.metric
    }

    /// `metric_far(t) − metric_near(t)` by direct propagation.
    pub fn gap_at(&self, t: f64) -> Result<f64> {
        let f = dynamics::propagate(&self.liouvillian, &self.far, &[t])?;
        let n = dynamics::propagate(&self.liouvillian, &self.near, &[t])?;
        let m = self.metric();
        Ok(m.evaluate(&f.states()[0], &self.reference)? - m.evaluate(&n.states()[0], &self.reference)?)
    }

    pub fn time_unit(&self) -> &'static str {
        if self.config.dimensionless {
            "1/K0"
        } else {
            "s"
        }
    }
}

/// Results of one run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: Experiment,
    pub traj_far: Trajectory,
    pub traj_near: Trajectory,
    pub metric_far: Vec<f64>,
    pub metric_near: Vec<f64>,
    pub modes: ModeDecomposition,
    pub overlaps_far: Vec<C64>,
    pub overlaps_near: Vec<C64>,
    pub report: MpembaReport,
}

pub fn execute(exp: Experiment) -> Result<Outcome> {
    let params = exp.config.to_text();
    let traj_far = dynamics::propagate(&exp.liouvillian, &exp.far, &exp.times)?.with_parameters(params.clone());
    let traj_near = dynamics::propagate(&exp.liouvillian, &exp.near, &exp.times)?.with_parameters(params);
    let metric = exp.metric();
    let metric_far = metrics::metric_series(&traj_far, metric, &exp.reference)?;
    let metric_near = metrics::metric_series(&traj_near, metric, &exp.reference)?;

    let mut report = metrics::detect_crossing(&traj_far, &traj_near, metric, &exp.reference)?;
    metrics::refine_crossings(&mut report, |t| exp.gap_at(t))?;

    let modes = spectral::eigendecompose(&spectral::population_generator(&exp.liouvillian)?)?;
    let p_far = exp.far.populations();
    let p_near = exp.near.populations();
    let overlaps_far = spectral::overlaps(&modes, &p_far)?;
    let overlaps_near = spectral::overlaps(&modes, &p_near)?;
    let report = metrics::classify(&modes, &p_far, &p_near, report)?;
    Ok(Outcome { experiment: exp, traj_far, traj_near, metric_far, metric_near, modes, overlaps_far, overlaps_near, report })
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex(z: C64) -> String {
    format!("{} {}", num(z.re), num(z.im))
}

pub fn render_csv(out: &Outcome) -> String {
    let exp = &out.experiment;
    let sym = exp.metric().symbol();
    let scale = if exp.config.rescale_by_epsilon { exp.metric().rescale_factor(exp.system.epsilon) } else { 1.0 };
    let n_modes = out.modes.dim();
    let mut header = vec!["time".to_string(), format!("{sym}_far"), format!("{sym}_near")];
    for tag in ["far", "near"] {
        header.extend(["p00", "p01", "p10", "p11"].iter().map(|p| format!("{p}_{tag}")));
    }
    if exp.config.mode_columns {
        for tag in ["far", "near"] {
            header.extend((0..n_modes).map(|k| format!("mode{k}_{tag}")));
        }
    }
    let mut s = header.join(",");
    s.push('\n');

    let pf = out.traj_far.populations();
    let pn = out.traj_near.populations();
    for (k, &t) in exp.times.iter().enumerate() {
        let mut row = vec![num(t), num(out.metric_far[k] * scale), num(out.metric_near[k] * scale)];
        row.extend(pf[k].as_slice().iter().map(|&x| num(x)));
        row.extend(pn[k].as_slice().iter().map(|&x| num(x)));
        if exp.config.mode_columns {
            for p in [&pf[k], &pn[k]] {
                // measured mode content w_n · p(t)
                let c = spectral::overlaps(&out.modes, p).unwrap_or_default();
                row.extend(c.iter().map(|z| num(z.re)));
            }
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn render_report(out: &Outcome) -> String {
    let exp = &out.experiment;
    let r = &out.report;
    let mut s = String::from("# qmpemba run report\n");
    s.push_str(&exp.config.to_text());
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{RESULT_PREFIX}{k} = {v}");
    };
    put("tool_version", TOOL_VERSION.to_string());
    put("time_unit", exp.time_unit().to_string());
    put(
        "b_interpretation",
        match exp.config.b_unit {
            BUnit::Hz => "b in Hz, angular b = 2*pi*b".to_string(),
            BUnit::Angular => "b in rad/s".to_string(),
        },
    );
    put("k0_physical", num(exp.k0_physical));
    put("k0_model", num(exp.bath.k0()));
    put("generator_fingerprint", format!("{:016x}", out.traj_far.metadata.generator_fingerprint));
    for (k, lam) in out.modes.eigenvalues().iter().enumerate() {
        put(&format!("lambda_{k}"), complex(*lam));
    }
    for (k, a) in out.overlaps_far.iter().enumerate() {
        put(&format!("a_far_{k}"), complex(*a));
    }
    for (k, a) in out.overlaps_near.iter().enumerate() {
        put(&format!("a_near_{k}"), complex(*a));
    }
    put("metric", r.metric.to_string());
    if exp.config.rescale_by_epsilon {
        put("metric_scale", num(r.metric.rescale_factor(exp.system.epsilon)));
    }
    put("crossing_time", r.crossing_time.map_or_else(|| "none".to_string(), num));
    put("crossings", r.crossings.iter().map(|c| num(c.time)).collect::<Vec<_>>().join(","));
    put("initial_gap", num(r.initial_gap));
    if let Some(a) = r.slow_overlaps {
        put("a1_far", complex(a.far));
        put("a1_near", complex(a.near));
    }
    put("classification", r.classification.to_string());
    s
}

/// Paths of the files written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub report: PathBuf,
}

pub fn output_paths(cfg: &ExperimentConfig) -> RunFiles {
    RunFiles { csv: PathBuf::from(format!("{}.csv", cfg.output)), report: PathBuf::from(format!("{}_report.txt", cfg.output)) }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Outcome, RunFiles)> {
    let out = execute(Experiment::new(cfg)?)?;
    let files = output_paths(cfg);
    if let Some(dir) = files.csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(Error::Usage(format!("output directory {} does not exist", dir.display())));
        }
    }
    fs::write(&files.csv, render_csv(&out))?;
    fs::write(&files.report, render_report(&out))?;
    log::info!("wrote {} and {}", files.csv.display(), files.report.display());
    Ok((out, files))
}

/// One-line human summary.
pub fn summary(out: &Outcome) -> String {
    let r = &out.report;
    format!(
        "{}: metric={} classification={} crossing_time={} ({})",
        out.experiment.config.preset,
        r.metric,
        r.classification,
        r.crossing_time.map_or_else(|| "none".into(), fmt_f64),
        out.experiment.time_unit()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::Preset;
    use crate::metrics::Classification;

    fn quick(preset: Preset) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset(preset);
        cfg.points = 60;
        cfg
    }

    #[test]
    fn fig3a_is_strong() {
        let out = execute(Experiment::new(&quick(Preset::Fig3a)).unwrap()).unwrap();
        assert_eq!(out.report.classification, Classification::Strong);
        assert!(out.report.crossing_time.is_some());
        assert!(out.report.initial_gap > 0.0);
    }

    #[test]
    fn fig3d_is_genuine() {
        let out = execute(Experiment::new(&quick(Preset::Fig3dGenuine)).unwrap()).unwrap();
        assert_eq!(out.report.classification, Classification::Genuine);
        assert_eq!(out.report.crossings.len(), 1);
    }

    #[test]
    fn csv_shape() {
        let out = execute(Experiment::new(&quick(Preset::Fig3bOverlaps)).unwrap()).unwrap();
        let csv = render_csv(&out);
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header[0], "time");
        assert_eq!(header.len(), 3 + 8 + 8);
        assert_eq!(lines.count(), 61);
    }
}
