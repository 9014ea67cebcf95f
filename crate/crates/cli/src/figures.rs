//! Canned parameter bundles, one per figure.

use std::f64::consts::PI;

use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::{json, Value};
use soliton_jj::metrology;
use soliton_jj::steady::{self, Stability};
use soliton_jj::{Error, FunctionalMode, State, ThetaBranch};

use crate::commands::{bifurcation_artifacts, portrait_artifacts, provenance, steady_table, Sink};
use crate::config::{linspace, CommonArgs, Preset, RunConfig};
use crate::output::Table;
use crate::svg::{Dash, Plot, Series, PALETTE};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig4e,
    Fig4f,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig7,
    Fig8,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig4c => "fig4c",
            FigureId::Fig4d => "fig4d",
            FigureId::Fig4e => "fig4e",
            FigureId::Fig4f => "fig4f",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig5c => "fig5c",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
        }
    }

    /// Separation and level spacing of the phase-plane panels.
    fn portrait(self) -> Option<(f64, f64)> {
        Some(match self {
            FigureId::Fig4a => (0.0, 0.0),
            FigureId::Fig4b => (0.75, 0.0),
            FigureId::Fig4c => (1.2, 0.0),
            FigureId::Fig4d => (1.5, 0.0),
            FigureId::Fig4e => (3.0, 0.0),
            FigureId::Fig4f => (10.0, 0.0),
            FigureId::Fig5a => (0.75, 0.05 * PI),
            FigureId::Fig5b => (0.75, PI),
            FigureId::Fig5c => (0.75, 1.5 * PI),
            _ => return None,
        })
    }

    pub fn preset(self) -> Preset {
        let mut p = Preset::default();
        if let Some((d, w)) = self.portrait() {
            p.delta = Some(d);
            p.omega_ratio = Some(w);
            p.z_range = Some((-0.9, 0.9, 13));
            p.theta_range = Some((0.0, PI, 3));
            p.t_final = Some(200.0);
            return p;
        }
        match self {
            FigureId::Fig2 => {
                p.z_range = Some((-0.99, 0.99, 397));
            }
            FigureId::Fig3 => {
                p.mode = Some(FunctionalMode::Sextic);
                p.delta_range = Some((0.0, 1.5, 301));
            }
            FigureId::Fig7 => {
                p.mode = Some(FunctionalMode::Quartic);
                p.n = Some(10);
                p.delta_range = Some((0.0, 1.5, 301));
            }
            FigureId::Fig8 => {
                p.n = Some(200);
            }
            _ => {}
        }
        p
    }
}

pub fn reproduce(c: &CommonArgs, fig: FigureId) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&format!("reproduce {}", fig.name()), c, &fig.preset())?;
    let dir = cfg.output_dir.join(fig.name());
    let mut sink = Sink::new(&cfg, &dir);
    let summary = match fig {
        FigureId::Fig2 => fig2(&mut sink, &cfg)?,
        FigureId::Fig3 => fig3(&mut sink, &cfg)?,
        FigureId::Fig7 => fig7(&mut sink, &cfg)?,
        FigureId::Fig8 => fig8(&mut sink, &cfg)?,
        _ => {
            let p = cfg.params()?;
            let title = format!("Phase plane, Δ = {}, Ω/Λ = {:.4}", cfg.delta, cfg.omega_ratio);
            portrait_artifacts(&mut sink, &cfg, &p, fig.name(), &title)?
        }
    };
    sink.finish(summary)
}

/// Stationary condition ωr(z) on both phase branches with the stability of
/// the resulting steady state.
fn fig2(sink: &mut Sink, cfg: &RunConfig) -> Result<Value, CliError> {
    let ev = cfg.evaluator();
    let base = cfg.params()?;
    let zs = cfg.grid.z_values();
    let mut rows = Vec::new();
    for b in [ThetaBranch::Zero, ThetaBranch::Pi] {
        let part = zs
            .par_iter()
            .map(|&z| -> Result<_, CliError> {
                let w = steady::stationarity(b, z, cfg.delta, &ev)?;
                let closed = soliton_jj::approx::stationarity_smalldelta(b, z);
                let p = base.with_omega_ratio(w)?;
                let st = steady::classify_stability(&p, &State::new(z, b.theta()), &ev)?;
                Ok((b, z, w, closed, st))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.extend(part);
    }
    let mut t = Table::new(&["z", "branch", "omega_ratio", "omega_ratio_closed", "stability"]);
    for &(b, z, w, cl, st) in &rows {
        t.push(vec![z.into(), b.name().into(), w.into(), cl.into(), st.name().into()]);
    }
    sink.csv("fig2.csv", &t)?;
    let mut series = Vec::new();
    for (b, color) in [(ThetaBranch::Zero, PALETTE[0]), (ThetaBranch::Pi, PALETTE[1])] {
        for (stab, dash, tag) in [(Stability::Center, Dash::Solid, "stable"), (Stability::Saddle, Dash::Dashed, "unstable")] {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.0 == b)
                .map(|r| if r.4 == stab { (r.1, r.2) } else { (f64::NAN, f64::NAN) })
                .collect();
            series.push(Series::line(format!("Θ = {} {tag}", if b == ThetaBranch::Zero { "0" } else { "π" }), pts, dash, color));
        }
    }
    sink.svg(
        "fig2.svg",
        &Plot {
            title: format!("Stationary condition, Δ = {}", cfg.delta),
            x_label: "z".into(),
            y_label: "Ω/Λ".into(),
            series,
            ..Default::default()
        },
    );
    Ok(json!({ "points": rows.len(), "delta": cfg.delta, "provenance": provenance(cfg) }))
}

/// Zero-phase steady states versus Δ for several level spacings.
fn fig3(sink: &mut Sink, cfg: &RunConfig) -> Result<Value, CliError> {
    let ev = cfg.evaluator();
    let ds = cfg.grid.delta_values();
    let omegas = [0.0, 0.05 * PI, 0.5 * PI];
    let mut t = steady_table();
    let mut series = Vec::new();
    for (k, &w) in omegas.iter().enumerate() {
        let base = cfg.params()?.with_omega_ratio(w)?;
        let per = ds
            .iter()
            .map(|&d| steady::branch_roots(&base.with_delta(d)?, ThetaBranch::Zero, &ev))
            .collect::<soliton_jj::Result<Vec<_>>>()?;
        let mut centers = Vec::new();
        let mut saddles = Vec::new();
        for (&d, roots) in ds.iter().zip(&per) {
            for s in roots {
                t.push(vec![
                    d.into(),
                    w.into(),
                    format!("zero_{}", s.branch.name()).into(),
                    s.z_star.into(),
                    s.theta_star.into(),
                    s.stability.name().into(),
                    s.residual.into(),
                ]);
                if s.stability == Stability::Center {
                    centers.push((d, s.z_star));
                } else {
                    saddles.push((d, s.z_star));
                }
            }
        }
        series.push(Series {
            label: format!("Ω/Λ = {w:.4} stable"),
            points: centers,
            dash: Dash::Solid,
            color: PALETTE[k],
            scatter: true,
        });
        series.push(Series {
            label: if k == 0 { "unstable".into() } else { String::new() },
            points: saddles,
            dash: Dash::Dotted,
            color: "#7f7f7f",
            scatter: true,
        });
    }
    sink.csv("fig3.csv", &t)?;
    sink.svg(
        "fig3.svg",
        &Plot {
            title: "Zero-phase steady states".into(),
            x_label: "Δ".into(),
            y_label: "z*".into(),
            series,
            y_range: Some((-1.05, 1.05)),
            ..Default::default()
        },
    );
    let base = cfg.params()?.with_omega_ratio(0.0)?;
    let bif = bifurcation_artifacts(sink, cfg, &base)?;
    Ok(json!({ "omega_ratios": omegas, "delta_c": bif["delta_c"], "provenance": provenance(cfg) }))
}

/// Cat-pair coefficients versus Δ at N = 10.
fn fig7(sink: &mut Sink, cfg: &RunConfig) -> Result<Value, CliError> {
    let ev = cfg.evaluator();
    let ds = cfg.grid.delta_values();
    let omegas = [0.0, 0.05 * PI];
    let mut t = Table::new(&["omega_ratio", "delta", "z_plus", "z_minus", "epsilon", "eta", "c1", "c2"]);
    let mut c_series = Vec::new();
    let mut e_series = Vec::new();
    for (k, &w) in omegas.iter().enumerate() {
        let base = cfg.params()?.with_omega_ratio(w)?;
        let cats = ds
            .par_iter()
            .map(|&d| match metrology::build_cat_report(&base.with_delta(d)?, &ev) {
                Ok(c) if !c.singular => Ok(Some(c)),
                Ok(_) | Err(Error::NoPair { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<soliton_jj::Result<Vec<_>>>()?;
        let (mut c1, mut c2, mut eps) = (Vec::new(), Vec::new(), Vec::new());
        for (&d, c) in ds.iter().zip(&cats) {
            match c {
                Some(c) => {
                    t.push(vec![w.into(), d.into(), c.z_plus.into(), c.z_minus.into(), c.epsilon.into(), c.eta.into(), c.c1.into(), c.c2.into()]);
                    c1.push((d, c.c1));
                    c2.push((d, c.c2));
                    eps.push((d, c.epsilon));
                }
                None => {
                    c1.push((f64::NAN, f64::NAN));
                    c2.push((f64::NAN, f64::NAN));
                    eps.push((f64::NAN, f64::NAN));
                }
            }
        }
        c_series.push(Series::line(format!("c1, Ω/Λ = {w:.4}"), c1, Dash::Solid, PALETTE[k]));
        c_series.push(Series::line(format!("c2, Ω/Λ = {w:.4}"), c2, Dash::Dashed, PALETTE[k]));
        e_series.push(Series::line(format!("Ω/Λ = {w:.4}"), eps, Dash::Solid, PALETTE[k]));
    }
    sink.csv("fig7.csv", &t)?;
    sink.svg(
        "fig7.svg",
        &Plot {
            title: format!("Qubit coefficients, N = {}", cfg.n_particles),
            x_label: "Δ".into(),
            y_label: "c1, c2".into(),
            series: c_series,
            ..Default::default()
        },
    );
    sink.svg(
        "fig7_epsilon.svg",
        &Plot {
            title: "Single-particle overlap".into(),
            x_label: "Δ".into(),
            y_label: "ε".into(),
            series: e_series,
            ..Default::default()
        },
    );
    let base = cfg.params()?.with_omega_ratio(0.05 * PI)?;
    let located = metrology::locate_delta_for_c2(&base, &ev, 0.203, (0.5, 1.5), 1e-6)
        .map(|(d, c)| json!({ "delta": d, "epsilon": c.epsilon, "c1": c.c1, "c2": c.c2 }))
        .unwrap_or(Value::Null);
    let out = json!({ "omega_ratios": omegas, "rows": t.rows.len(), "c2_0203_at_omega_005pi": located, "provenance": provenance(cfg) });
    sink.json("fig7.json", &out)?;
    Ok(out)
}

/// N00N interference fringe ⟨Σ⟩ over the admissible window.
fn fig8(sink: &mut Sink, cfg: &RunConfig) -> Result<Value, CliError> {
    let win: f64 = metrology::noon_window();
    let ws = linspace(-win, win, 4001);
    let mut t = Table::new(&["omega_ratio", "theta_prime", "sigma_mean", "sigma_var"]);
    let mut pts = Vec::with_capacity(ws.len());
    for &w in &ws {
        let r = metrology::noon_interference(cfg.n_particles, w)?;
        t.push(vec![w.into(), r.theta_prime.into(), r.sigma_mean.into(), r.sigma_var.into()]);
        pts.push((w, r.sigma_mean));
    }
    sink.csv("fig8.csv", &t)?;
    sink.svg(
        "fig8.svg",
        &Plot {
            title: format!("N00N interference, N = {}", cfg.n_particles),
            x_label: "Ω/Λ".into(),
            y_label: "⟨Σ⟩".into(),
            series: vec![Series::line("", pts, Dash::Solid, PALETTE[0])],
            y_range: Some((-1.05, 1.05)),
            ..Default::default()
        },
    );
    Ok(json!({ "n_particles": cfg.n_particles, "points": ws.len(), "window": win }))
}
