//! The file-producing commands and their run directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use phaseless::artifacts::{curve_csv, curve_summary, errors_csv, farfield_csv, fmt_real, intensity_csv, parse_intensities, updates_csv};
use phaseless::field_system::{assemble_field_system, write_matrix_dump};
use phaseless::forward::{add_noise, synthesize_farfield, PhaselessSamples};
use phaseless::geometry::ParamGrid;
use phaseless::inversion::{reconstruct as run_inversion, RunHistory, Termination};
use phaseless::StarCurveF64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

/// Collects written files (relative to the run directory) for the manifest.
struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.push(rel.to_string());
        Ok(())
    }

    fn finish(mut self, command: &str, config: &RunConfig, mut extra: Value) -> Result<(), CliError> {
        self.files.push("manifest.json".into());
        let manifest = json!({
            "program": "phaseless",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": config.noise.seed,
            "config": config,
            "files": self.files,
        });
        let mut manifest = manifest.as_object().cloned().expect("object");
        if let Value::Object(map) = extra.take() {
            manifest.extend(map);
        }
        let text = serde_json::to_string_pretty(&Value::Object(manifest)).expect("manifest serializes");
        fs::write(self.root.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

fn curve_json(c: &StarCurveF64) -> String {
    let (cx, cy, coeffs, m) = curve_summary(c);
    serde_json::to_string_pretty(&json!({ "c": [cx, cy], "coeffs": coeffs, "M": m })).expect("curve serializes") + "\n"
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn synthesize_data(cfg: &RunConfig, dir: &mut RunDir) -> Result<PhaselessSamples<f64>, CliError> {
    let grid = ParamGrid::new(cfg.solver.n)?;
    let obstacle = cfg.obstacle()?;
    let ball = cfg.ball.enabled.then(|| cfg.ball()).transpose()?;
    let wave = cfg.wave()?;
    let noise = cfg.noise()?;
    let u = synthesize_farfield(obstacle.as_ref(), ball.as_ref(), &wave, &grid)?;
    let noisy = add_noise(&u.intensities(), noise.delta, noise.seed, noise.kind)?;
    dir.write("farfield.csv", farfield_csv(&u))?;
    dir.write("data.csv", intensity_csv(&noisy))?;
    dir.write("exact_curve.csv", curve_csv(obstacle.as_ref(), &grid))?;
    Ok(noisy)
}

pub fn synthesize(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let t0 = Instant::now();
    let mut dir = RunDir::create(out)?;
    dir.write("config.toml", cfg.to_toml())?;
    synthesize_data(cfg, &mut dir)?;
    println!("wrote {} samples to {}", 2 * cfg.solver.n, out.join("farfield.csv").display());
    dir.finish("synthesize", cfg, json!({ "timings_ms": { "synthesis": ms(t0) } }))
}

fn check_grid(data: &PhaselessSamples<f64>, grid: &ParamGrid) -> Result<(), CliError> {
    let knots = grid.knots::<f64>();
    if data.len() != knots.len() || data.angles.iter().zip(&knots).any(|(a, k)| (a - k).abs() > 1e-9) {
        return Err(CliError::Config(format!(
            "data grid ({} samples) does not match the configured grid n = {} ({} knots)",
            data.len(),
            grid.n(),
            knots.len()
        )));
    }
    Ok(())
}

/// Writes the reconstruction artifacts and returns the manifest fields.
fn write_history(
    dir: &mut RunDir,
    cfg: &RunConfig,
    history: &RunHistory<f64>,
    grid: &ParamGrid,
    dump_matrix: bool,
) -> Result<Value, CliError> {
    dir.write("errors.csv", errors_csv(history))?;
    dir.write("updates.csv", updates_csv(history))?;
    for r in &history.records {
        dir.write(&format!("curves/curve_{:04}.csv", r.k), curve_csv(&r.curve, grid))?;
    }
    dir.write("final_curve.json", curve_json(history.final_curve()))?;
    if dump_matrix {
        let sys = assemble_field_system(history.final_curve(), Some(&cfg.ball()?), &cfg.wave()?, grid)?;
        let mut buf = Vec::new();
        write_matrix_dump(&mut buf, sys.matrix())?;
        dir.write("field_matrix.bin", buf)?;
    }
    let last = history.last();
    Ok(json!({
        "termination": history.termination.as_str(),
        "message": history.message,
        "iterations": last.k,
        "final_error": fmt_real(last.error),
        "final_boundary_error": last.boundary_error.map(fmt_real),
    }))
}

fn outcome(history: &RunHistory<f64>) -> Result<(), CliError> {
    let last = history.last();
    println!(
        "{}: k = {}, E = {:.6}, Er = {}",
        history.termination.as_str(),
        last.k,
        last.error,
        last.boundary_error.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
    );
    match history.termination {
        Termination::Converged => Ok(()),
        Termination::Budget => Err(CliError::Budget),
        Termination::Degenerate | Termination::Conditioning => {
            Err(CliError::Solver(history.message.clone().unwrap_or_else(|| history.termination.as_str().into())))
        }
    }
}

pub fn reconstruct(cfg: &RunConfig, data_path: &Path, out: &Path, dump_matrix: bool) -> Result<(), CliError> {
    let text = fs::read_to_string(data_path).map_err(|e| CliError::Config(format!("{}: {e}", data_path.display())))?;
    let data = parse_intensities(&text)?;
    let solver = cfg.solver()?;
    let grid = solver.grid()?;
    check_grid(&data, &grid)?;
    let exact = cfg.obstacle()?;
    let t0 = Instant::now();
    let history = run_inversion(&solver, &data, Some(exact.as_ref()))?;
    let elapsed = ms(t0);
    let mut dir = RunDir::create(out)?;
    dir.write("config.toml", cfg.to_toml())?;
    let mut extra = write_history(&mut dir, cfg, &history, &grid, dump_matrix)?;
    extra["data"] = json!(data_path.display().to_string());
    extra["timings_ms"] = json!({ "reconstruction": elapsed });
    dir.finish("reconstruct", cfg, extra)?;
    outcome(&history)
}

pub fn run_preset(cfg: &RunConfig, out: &Path, dump_matrix: bool) -> Result<(), CliError> {
    let solver = cfg.solver()?;
    let grid = solver.grid()?;
    let mut dir = RunDir::create(out)?;
    dir.write("config.toml", cfg.to_toml())?;
    let t0 = Instant::now();
    let data = synthesize_data(cfg, &mut dir)?;
    let t_syn = ms(t0);
    let exact = cfg.obstacle()?;
    let t1 = Instant::now();
    let history = run_inversion(&solver, &data, Some(exact.as_ref()))?;
    let t_rec = ms(t1);
    let mut extra = write_history(&mut dir, cfg, &history, &grid, dump_matrix)?;
    extra["timings_ms"] = json!({ "synthesis": t_syn, "reconstruction": t_rec });
    dir.finish("run-preset", cfg, extra)?;
    outcome(&history)
}

/// Balls at (4,0) and (6,0) with R in {0.4, 0.8}, directions -pi/6 and 4pi/3.
pub fn sweep_cells(base: &RunConfig) -> Vec<RunConfig> {
    let pi = std::f64::consts::PI;
    let mut cells = Vec::new();
    for bx in [4.0, 6.0] {
        for r in [0.4, 0.8] {
            for theta in [-pi / 6.0, 4.0 * pi / 3.0] {
                let mut c = base.clone();
                c.ball.center = [bx, 0.0];
                c.ball.radius = r;
                c.wave.direction = theta;
                c.noise.seed = base.noise.seed + cells.len() as u64;
                cells.push(c);
            }
        }
    }
    cells
}

fn worker_threads() -> Result<usize, CliError> {
    match std::env::var("PHASELESS_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("PHASELESS_THREADS must be a positive integer, got '{v}'"))),
    }
}

struct CellResult {
    history: Result<RunHistory<f64>, String>,
    seconds: f64,
}

fn run_cell(cfg: &RunConfig) -> CellResult {
    let t0 = Instant::now();
    let go = || -> Result<RunHistory<f64>, CliError> {
        let solver = cfg.solver()?;
        let grid = solver.grid()?;
        let obstacle = cfg.obstacle()?;
        let noise = cfg.noise()?;
        let u = synthesize_farfield(obstacle.as_ref(), Some(&solver.ball), &solver.wave, &grid)?;
        let data = add_noise(&u.intensities(), noise.delta, noise.seed, noise.kind)?;
        Ok(run_inversion(&solver, &data, Some(obstacle.as_ref()))?)
    };
    CellResult { history: go().map_err(|e| e.to_string()), seconds: t0.elapsed().as_secs_f64() }
}

pub fn sweep(base: &RunConfig, out: &Path) -> Result<(), CliError> {
    base.solver()?;
    let threads = worker_threads()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let cells = sweep_cells(base);
    let t0 = Instant::now();
    let results: Vec<CellResult> = pool.install(|| cells.par_iter().map(run_cell).collect());
    let wall = ms(t0);

    let mut dir = RunDir::create(out)?;
    dir.write("config.toml", base.to_toml())?;
    let mut table = String::from("cell,ball_x,ball_y,ball_r,direction,seed,termination,iterations,E,Er,seconds\n");
    let mut converged = 0;
    for (i, (c, r)) in cells.iter().zip(&results).enumerate() {
        let (term, k, e, er) = match &r.history {
            Ok(h) => {
                dir.write(&format!("cells/cell_{i}_errors.csv"), errors_csv(h))?;
                converged += usize::from(h.converged());
                let last = h.last();
                (h.termination.as_str().to_string(), last.k.to_string(), fmt_real(last.error), last.boundary_error.map(fmt_real).unwrap_or_default())
            }
            Err(msg) => (format!("error: {}", msg.replace(',', ";")), String::new(), String::new(), String::new()),
        };
        table += &format!(
            "{i},{},{},{},{},{},{term},{k},{e},{er},{:.3}\n",
            fmt_real(c.ball.center[0]),
            fmt_real(c.ball.center[1]),
            fmt_real(c.ball.radius),
            fmt_real(c.wave.direction),
            c.noise.seed,
            r.seconds
        );
    }
    dir.write("sweep.csv", &table)?;
    print!("{table}");
    println!("{converged}/{} cells converged", cells.len());
    let cells_json: Vec<Value> = cells.iter().map(|c| serde_json::to_value(c).expect("config serializes")).collect();
    dir.finish(
        "sweep",
        base,
        json!({ "converged": converged, "cells": cells_json, "threads": threads, "timings_ms": { "wall": wall } }),
    )
}
