use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use soliton_jj::approx::{certify, default_grids, CertRow};
use soliton_jj::dynamics::{self, PortraitCell};
use soliton_jj::metrology;
use soliton_jj::model::wrap_angle;
use soliton_jj::steady::{self, SteadyState};
use soliton_jj::{EvalKind, Orbit, Params, State, ThetaBranch};

use crate::config::{CommonArgs, Format, Preset, RunConfig};
use crate::output::{json_bytes, Artifacts, Table};
use crate::svg::{regime_style, Dash, Plot, Series, PALETTE};
use crate::CliError;

/// Per-run artifact collector bound to one output directory.
pub struct Sink<'a> {
    pub cfg: &'a RunConfig,
    pub dir: std::path::PathBuf,
    files: Artifacts,
}

impl<'a> Sink<'a> {
    pub fn new(cfg: &'a RunConfig, dir: &Path) -> Self {
        Self {
            cfg,
            dir: dir.to_path_buf(),
            files: Artifacts::default(),
        }
    }

    pub fn csv(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        if self.cfg.wants(Format::Csv) {
            self.files.add(self.dir.join(name), t.to_bytes()?);
        }
        Ok(())
    }

    pub fn json<S: Serialize>(&mut self, name: &str, v: &S) -> Result<(), CliError> {
        if self.cfg.wants(Format::Json) {
            self.files.add(self.dir.join(name), json_bytes(v)?);
        }
        Ok(())
    }

    pub fn svg(&mut self, name: &str, p: &Plot) {
        if self.cfg.wants(Format::Svg) {
            self.files.add(self.dir.join(name), p.render().into_bytes());
        }
    }

    /// Writes everything plus the `run.json` sidecar.
    pub fn finish(mut self, summary: Value) -> Result<(), CliError> {
        let mut names = self.files.names();
        let run_path = self.dir.join("run.json");
        names.push(run_path.display().to_string());
        let sidecar = json!({
            "program": "soliton-jj",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.cfg,
            "artifacts": names,
            "summary": summary,
        });
        self.files.add(run_path, json_bytes(&sidecar)?);
        for p in self.files.commit()? {
            println!("wrote {}", p.display());
        }
        Ok(())
    }
}

pub fn kind_name(k: EvalKind) -> &'static str {
    match k {
        EvalKind::Quadrature => "quadrature",
        EvalKind::Polynomial => "polynomial",
        EvalKind::Limit => "limit",
    }
}

fn check_z(z: f64, what: &str) -> Result<(), CliError> {
    if z.is_finite() && z.abs() <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Domain(format!("{what} out of [−1,1] (got {z})")))
    }
}

pub fn provenance(cfg: &RunConfig) -> Value {
    json!({
        "functional_mode": cfg.mode.name(),
        "tolerances": cfg.tolerances,
    })
}

pub fn functionals(c: &CommonArgs, z: Option<Vec<f64>>, sweep_delta: bool) -> Result<(), CliError> {
    let preset = Preset {
        z_range: Some((-1.0, 1.0, 41)),
        ..Default::default()
    };
    let cfg = RunConfig::resolve("functionals", c, &preset)?;
    let zs = z.unwrap_or_else(|| cfg.grid.z_values());
    for &zv in &zs {
        check_z(zv, "z")?;
    }
    let ds = if sweep_delta { cfg.grid.delta_values() } else { vec![cfg.delta] };
    let ev = cfg.evaluator();
    let pts: Vec<(f64, f64)> = ds.iter().flat_map(|&d| zs.iter().map(move |&z| (z, d))).collect();
    let vals = pts
        .par_iter()
        .map(|&(z, d)| ev.eval(z, d))
        .collect::<soliton_jj::Result<Vec<_>>>()?;

    let mut t = Table::new(&["z", "delta", "i", "j", "di_dz", "dj_dz", "kind"]);
    for (&(z, d), v) in pts.iter().zip(&vals) {
        t.push(vec![z.into(), d.into(), v.i_val.into(), v.j_val.into(), v.di_dz.into(), v.dj_dz.into(), kind_name(v.mode).into()]);
    }
    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    sink.csv("functionals.csv", &t)?;
    for (name, pick, label) in [("functionals_I.svg", 0usize, "I"), ("functionals_J.svg", 1, "J")] {
        let mut series = Vec::new();
        for (k, &d) in ds.iter().enumerate().take(PALETTE.len()) {
            let pts: Vec<(f64, f64)> = pts
                .iter()
                .zip(&vals)
                .filter(|((_, dd), _)| *dd == d)
                .map(|((z, _), v)| (*z, if pick == 0 { v.i_val } else { v.j_val }))
                .collect();
            series.push(Series::line(format!("Δ = {d}"), pts, Dash::Solid, PALETTE[k]));
        }
        sink.svg(
            name,
            &Plot {
                title: format!("{label}(z, Δ)"),
                x_label: "z".into(),
                y_label: label.into(),
                series,
                ..Default::default()
            },
        );
    }
    sink.finish(json!({ "points": pts.len(), "provenance": provenance(&cfg) }))
}

fn cert_table(rows: &[CertRow]) -> Table {
    let mut t = Table::new(&["z", "delta", "poly", "quad", "rel_err"]);
    for r in rows {
        t.push(vec![r.z.into(), r.delta.into(), r.poly.into(), r.quad.into(), r.rel_err.into()]);
    }
    t
}

pub fn validate_approx(c: &CommonArgs, tol_rel: f64, random_points: usize) -> Result<(), CliError> {
    let cfg = RunConfig::resolve("validate-approx", c, &Preset::default())?;
    if !(tol_rel > 0.0) {
        return Err(CliError::Domain(format!("tol-rel must be positive, got {tol_rel}")));
    }
    let (dg, zg) = default_grids();
    let mut report = certify(&dg, &zg, tol_rel, cfg.tolerances.quad_tol)?;
    let grid_points = dg.len() * zg.len();
    if random_points > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let extra: Vec<(f64, f64)> = (0..random_points)
            .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..=1.5)))
            .collect();
        for (z, d) in extra {
            let r = certify(&[d], &[z], tol_rel, cfg.tolerances.quad_tol)?;
            if r.max_rel_err > report.max_rel_err {
                report.max_rel_err = r.max_rel_err;
                report.worst = r.worst;
                report.worst_functional = r.worst_functional;
            }
            report.rows_i.extend(r.rows_i);
            report.rows_j.extend(r.rows_j);
        }
        report.pass = report.max_rel_err <= tol_rel;
    }

    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    sink.csv("validate_approx_I.csv", &cert_table(&report.rows_i))?;
    sink.csv("validate_approx_J.csv", &cert_table(&report.rows_j))?;
    let summary = json!({
        "tol_rel": report.tol_rel,
        "max_rel_err": report.max_rel_err,
        "worst": report.worst,
        "worst_functional": report.worst_functional,
        "pass": report.pass,
        "grid_points": grid_points,
        "random_points": random_points,
        "seed": cfg.seed,
        "quad_tol": cfg.tolerances.quad_tol,
    });
    sink.json("validate_approx.json", &summary)?;
    let mut series = Vec::new();
    for (rows, label, color) in [(&report.rows_i, "I", PALETTE[0]), (&report.rows_j, "J", PALETTE[1])] {
        let pts: Vec<(f64, f64)> = dg
            .iter()
            .map(|&d| {
                let m = rows.iter().filter(|r| r.delta == d).fold(0.0f64, |m, r| m.max(r.rel_err));
                (d, m)
            })
            .collect();
        series.push(Series::line(format!("max rel. error of {label}"), pts, Dash::Solid, color));
    }
    series.push(Series::line("tolerance", vec![(0.0, tol_rel), (1.5, tol_rel)], Dash::Dashed, "#000000"));
    sink.svg(
        "validate_approx.svg",
        &Plot {
            title: "Polynomial fits against quadrature".into(),
            x_label: "Δ".into(),
            y_label: "max over z of relative error".into(),
            series,
            ..Default::default()
        },
    );
    sink.finish(summary)?;
    println!(
        "max relative error {:.4e} ({:?} at z = {}, Δ = {}), tolerance {tol_rel}: {}",
        report.max_rel_err,
        report.worst_functional,
        report.worst.z,
        report.worst.delta,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "certification failed: max relative error {:.4e} exceeds {tol_rel}",
            report.max_rel_err
        )))
    }
}

/// All steady states at one parameter point, zero and π branches first.
pub fn all_steady(p: &Params, cfg: &RunConfig) -> Result<Vec<(String, SteadyState<f64>)>, CliError> {
    let ev = cfg.evaluator();
    let mut out = Vec::new();
    for b in [ThetaBranch::Zero, ThetaBranch::Pi] {
        for s in steady::branch_roots(p, b, &ev)? {
            out.push((format!("{}_{}", b.name(), s.branch.name()), s));
        }
    }
    for s in steady::noon_steady(p, &ev)? {
        out.push((s.branch.name().to_string(), s));
    }
    Ok(out)
}

pub fn steady_table() -> Table {
    Table::new(&["delta", "omega_ratio", "branch", "z_star", "theta_star", "stability", "residual"])
}

pub fn steady_states(c: &CommonArgs, sweep: bool) -> Result<(), CliError> {
    let cfg = RunConfig::resolve("steady-states", c, &Preset::default())?;
    let base = cfg.params()?;
    let ds = if sweep { cfg.grid.delta_values() } else { vec![cfg.delta] };
    let per: Vec<Vec<(String, SteadyState<f64>)>> = ds
        .iter()
        .map(|&d| all_steady(&base.with_delta(d)?, &cfg))
        .collect::<Result<_, _>>()?;
    let mut t = steady_table();
    let mut count = 0;
    for (&d, states) in ds.iter().zip(&per) {
        for (name, s) in states {
            t.push(vec![
                d.into(),
                cfg.omega_ratio.into(),
                name.clone().into(),
                s.z_star.into(),
                s.theta_star.into(),
                s.stability.name().into(),
                s.residual.into(),
            ]);
            count += 1;
        }
    }
    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    sink.csv("steady_states.csv", &t)?;
    if sweep {
        sink.svg("steady_states.svg", &steady_plot(&ds, &per, &format!("Steady states, Ω/Λ = {}", cfg.omega_ratio)));
    }
    sink.finish(json!({ "states": count, "provenance": provenance(&cfg) }))
}

/// Scatter of z* versus Δ: blue zero phase, red π phase; centers filled
/// circles, saddles grey.
pub fn steady_plot(ds: &[f64], per: &[Vec<(String, SteadyState<f64>)>], title: &str) -> Plot {
    let mut series = Vec::new();
    for (prefix, color, label) in [("zero_", PALETTE[0], "Θ = 0"), ("pi_", PALETTE[1], "Θ = π")] {
        for (stab, tag, col) in [
            (steady::Stability::Center, "center", color),
            (steady::Stability::Saddle, "saddle", "#7f7f7f"),
        ] {
            let pts: Vec<(f64, f64)> = ds
                .iter()
                .zip(per)
                .flat_map(|(&d, st)| {
                    st.iter()
                        .filter(|(n, s)| n.starts_with(prefix) && s.stability == stab)
                        .map(move |(_, s)| (d, s.z_star))
                })
                .collect();
            series.push(Series {
                label: format!("{label} {tag}"),
                points: pts,
                dash: Dash::Solid,
                color: col,
                scatter: true,
            });
        }
    }
    Plot {
        title: title.into(),
        x_label: "Δ".into(),
        y_label: "z*".into(),
        series,
        y_range: Some((-1.05, 1.05)),
        ..Default::default()
    }
}

pub fn bifurcation_artifacts(sink: &mut Sink, cfg: &RunConfig, base: &Params) -> Result<Value, CliError> {
    let ev = cfg.evaluator();
    let r = steady::trace_bifurcation(base, (cfg.grid.delta_min, cfg.grid.delta_max), cfg.grid.delta_points, &ev)?;
    let mut t = Table::new(&["delta", "n_roots", "z_plus", "z_minus"]);
    for p in &r.branch_pts {
        t.push(vec![p.delta.into(), p.n_roots.into(), p.z_plus.into(), p.z_minus.into()]);
    }
    sink.csv("bifurcation.csv", &t)?;
    let up: Vec<(f64, f64)> = r.branch_pts.iter().map(|p| (p.delta, p.z_plus)).collect();
    let dn: Vec<(f64, f64)> = r.branch_pts.iter().map(|p| (p.delta, p.z_minus)).collect();
    sink.svg(
        "bifurcation.svg",
        &Plot {
            title: format!("Zero-phase roots, Ω/Λ = {}, Δc = {:.4}", cfg.omega_ratio, r.delta_c),
            x_label: "Δ".into(),
            y_label: "z".into(),
            series: vec![
                Series::line("largest root", up, Dash::Solid, PALETTE[0]),
                Series::line("smallest root", dn, Dash::Solid, PALETTE[1]),
                Series::line("Δc", vec![(r.delta_c, -1.0), (r.delta_c, 1.0)], Dash::Dashed, "#000000"),
            ],
            y_range: Some((-1.05, 1.05)),
            ..Default::default()
        },
    );
    let summary = json!({
        "delta_c": r.delta_c,
        "delta_tol": steady::DELTA_TOL,
        "omega_ratio": cfg.omega_ratio,
        "samples": r.branch_pts.len(),
        "provenance": provenance(cfg),
    });
    sink.json("bifurcation.json", &summary)?;
    Ok(summary)
}

pub fn bifurcation(c: &CommonArgs) -> Result<(), CliError> {
    let preset = Preset {
        mode: Some(soliton_jj::FunctionalMode::Sextic),
        delta_range: Some((0.0, 1.5, 151)),
        ..Default::default()
    };
    let cfg = RunConfig::resolve("bifurcation", c, &preset)?;
    let base = cfg.params()?;
    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    let summary = bifurcation_artifacts(&mut sink, &cfg, &base)?;
    println!("delta_c = {}", summary["delta_c"]);
    sink.finish(summary)
}

pub fn trajectory_table(tr: &Orbit) -> Table {
    let mut t = Table::new(&["tau", "z", "theta", "energy"]);
    for ((tau, s), e) in tr.t_grid.iter().zip(&tr.states).zip(&tr.energies) {
        t.push(vec![(*tau).into(), s.z.into(), s.theta.into(), (*e).into()]);
    }
    t
}

pub fn simulate(c: &CommonArgs, z0: f64, theta0: f64) -> Result<(), CliError> {
    check_z(z0, "z0")?;
    if !theta0.is_finite() {
        return Err(CliError::Domain("theta0 must be finite".into()));
    }
    let cfg = RunConfig::resolve("simulate", c, &Preset::default())?;
    let p = cfg.params()?;
    let tr = dynamics::integrate(&p, State::new(z0, theta0), cfg.grid.t_final, &cfg.evaluator(), &cfg.integrate_options())?;
    let label = match dynamics::classify(&tr) {
        Ok(l) => json!(l),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    sink.csv("trajectory.csv", &trajectory_table(&tr))?;
    let summary = json!({
        "z0": z0,
        "theta0": theta0,
        "outcome": tr.outcome,
        "energy_drift": tr.energy_drift,
        "steps": tr.steps,
        "frequency": dynamics::measure_frequency(&tr),
        "regime": label,
        "provenance": provenance(&cfg),
    });
    sink.json("trajectory.json", &summary)?;
    for (name, pick, y) in [("trajectory_z.svg", 0, "z"), ("trajectory_theta.svg", 1, "Θ")] {
        let pts: Vec<(f64, f64)> = tr
            .t_grid
            .iter()
            .zip(&tr.states)
            .map(|(t, s)| (*t, if pick == 0 { s.z } else { s.theta }))
            .collect();
        sink.svg(
            name,
            &Plot {
                title: format!("z0 = {z0}, Θ0 = {theta0}, Δ = {}, Ω/Λ = {}", cfg.delta, cfg.omega_ratio),
                x_label: "τ".into(),
                y_label: y.into(),
                series: vec![Series::line("", pts, Dash::Solid, PALETTE[0])],
                ..Default::default()
            },
        );
    }
    let complete = tr.is_complete();
    let outcome = format!("{:?}", tr.outcome);
    sink.finish(summary)?;
    if complete {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("integration stopped early: {outcome}")))
    }
}

fn cell_label(cell: &PortraitCell<f64>) -> (String, f64, f64) {
    match (&cell.label, &cell.trajectory) {
        (Ok(l), _) => (l.label.name().to_string(), l.z_mean, l.theta_winding),
        (Err(e), Some(tr)) => {
            let n = tr.states.len() as f64;
            let zm = tr.states.iter().map(|s| s.z).sum::<f64>() / n;
            let w = (tr.states[tr.states.len() - 1].theta - tr.states[0].theta) / (2.0 * PI);
            let tag = if matches!(e, soliton_jj::Error::Ambiguous(_)) { "ambiguous" } else { "failed" };
            (tag.to_string(), zm, w)
        }
        (Err(_), None) => ("failed".to_string(), f64::NAN, f64::NAN),
    }
}

/// Phase-plane polylines in (Θ mod 2π, z), split where Θ wraps.
pub fn portrait_plot(cells: &[PortraitCell<f64>], title: &str) -> Plot {
    let mut series = Vec::new();
    for cell in cells {
        let Some(tr) = &cell.trajectory else { continue };
        let (label, _, _) = cell_label(cell);
        let (dash, color) = regime_style(&label);
        let stride = (tr.states.len() / 1500).max(1);
        let mut pts = Vec::new();
        let mut prev: Option<f64> = None;
        for s in tr.states.iter().step_by(stride) {
            let th = wrap_angle(s.theta);
            if let Some(p) = prev {
                if (th - p).abs() > PI {
                    pts.push((f64::NAN, f64::NAN));
                }
            }
            pts.push((th, s.z));
            prev = Some(th);
        }
        series.push(Series::line(label, pts, dash, color));
    }
    Plot {
        title: title.into(),
        x_label: "Θ".into(),
        y_label: "z".into(),
        series,
        x_range: Some((-PI, PI)),
        y_range: Some((-1.05, 1.05)),
    }
}

pub fn portrait_artifacts(sink: &mut Sink, cfg: &RunConfig, p: &Params, stem: &str, title: &str) -> Result<Value, CliError> {
    let zs = cfg.grid.z_values();
    let ths = cfg.grid.theta_values();
    let cells = dynamics::phase_portrait(p, &zs, &ths, cfg.grid.t_final, &cfg.evaluator(), &cfg.integrate_options());
    let mut t = Table::new(&["z0", "theta0", "label", "z_mean", "winding"]);
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    let mut max_drift = 0.0f64;
    for cell in &cells {
        if let Some(tr) = &cell.trajectory {
            max_drift = max_drift.max(tr.energy_drift);
        }
        let (label, zm, w) = cell_label(cell);
        *counts.entry(label.clone()).or_default() += 1;
        t.push(vec![cell.initial.z.into(), cell.initial.theta.into(), label.into(), zm.into(), w.into()]);
    }
    sink.csv(&format!("{stem}.csv"), &t)?;
    sink.svg(&format!("{stem}.svg"), &portrait_plot(&cells, title));
    Ok(json!({
        "cells": cells.len(),
        "labels": counts,
        "max_energy_drift": max_drift,
        "delta": p.delta_sep,
        "omega_ratio": p.omega_ratio,
        "t_final": cfg.grid.t_final,
        "provenance": provenance(cfg),
    }))
}

pub fn phase_portrait(c: &CommonArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve("phase-portrait", c, &Preset::default())?;
    let p = cfg.params()?;
    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    let title = format!("Phase plane, Δ = {}, Ω/Λ = {}", cfg.delta, cfg.omega_ratio);
    let summary = portrait_artifacts(&mut sink, &cfg, &p, "phase_portrait", &title)?;
    sink.finish(summary)
}

pub fn metrology_noon(c: &CommonArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve("metrology noon", c, &Preset::default())?;
    let p = cfg.params()?;
    let rep = metrology::noon_interference(cfg.n_particles, cfg.omega_ratio)?;
    // σ_Ω is the estimand; its singularity at ωr = 0 is an error here.
    let sigma = metrology::omega_sensitivity(cfg.n_particles, cfg.omega_ratio, p.lambda_scale)?;
    let border = metrology::omega_sensitivity_border(cfg.n_particles, cfg.omega_ratio, p.lambda_scale).ok();
    let out = json!({
        "n_particles": cfg.n_particles,
        "omega_ratio": cfg.omega_ratio,
        "lambda_scale": p.lambda_scale,
        "theta_prime": rep.theta_prime,
        "sigma_mean": rep.sigma_mean,
        "sigma_var": rep.sigma_var,
        "sensitivity": rep.sensitivity,
        "sigma_omega": sigma,
        "sigma_omega_border_approx": border,
        "domain_ok": rep.domain_ok,
        "provenance": provenance(&cfg),
    });
    println!("{}", serde_json::to_string(&out).map_err(|e| CliError::Io(e.to_string()))?);
    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    sink.json("metrology_noon.json", &out)?;
    sink.finish(out)
}

pub fn cat_json(cfg: &RunConfig, p: &Params, cat: &soliton_jj::Cat) -> Value {
    let exact = metrology::overlap_epsilon_exact(cat.z_plus, cat.z_minus, p, cfg.tolerances.quad_tol).ok();
    json!({
        "delta": p.delta_sep,
        "omega_ratio": p.omega_ratio,
        "n_particles": cat.n_particles,
        "z_plus": cat.z_plus,
        "z_minus": cat.z_minus,
        "epsilon": cat.epsilon,
        "epsilon_quadrature": exact,
        "eta": cat.eta,
        "eta_underflow": cat.eta_underflow,
        "c1": if cat.singular { None } else { Some(cat.c1) },
        "c2": if cat.singular { None } else { Some(cat.c2) },
        "singular": cat.singular,
        "provenance": provenance(cfg),
    })
}

pub fn metrology_cat(c: &CommonArgs, locate_c2: Option<f64>) -> Result<(), CliError> {
    let cfg = RunConfig::resolve("metrology cat", c, &Preset::default())?;
    let mut p = cfg.params()?;
    let ev = cfg.evaluator();
    let cat = match locate_c2 {
        None => metrology::build_cat_report(&p, &ev)?,
        Some(target) => {
            let (d, cat) = metrology::locate_delta_for_c2(&p, &ev, target, (cfg.grid.delta_min, cfg.grid.delta_max), 1e-6)?;
            p = p.with_delta(d)?;
            cat
        }
    };
    let mut out = cat_json(&cfg, &p, &cat);
    out["located_from_c2"] = json!(locate_c2);
    println!("{}", serde_json::to_string(&out).map_err(|e| CliError::Io(e.to_string()))?);
    let mut sink = Sink::new(&cfg, &cfg.output_dir);
    sink.json("metrology_cat.json", &out)?;
    sink.finish(out)
}
