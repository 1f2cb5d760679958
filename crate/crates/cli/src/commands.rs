//! One function per subcommand. Each resolves its parameters (flag, then
//! config file, then default), runs the computation, and returns the
//! tables, figures and summary values; nothing is written here.

use std::f64::consts::{FRAC_PI_2, PI};

use nematic_core::harmonic::{self, StateKind, Tiling};
use nematic_core::ldg::{self, LdgParams};
use nematic_core::of_strong::{self, ElasticParams};
use nematic_core::of_weak::{self, AnchoringParams};
use nematic_core::pde::{
    self, BifurcationPoint, BoundaryCondition, DirectorField, PolarGrid, SolveOptions,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::*;
use crate::error::CliError;
use crate::svg::{LinePlot, Quiver, Series};
use crate::table::{field_table, Table};

/// Everything a command produces, keyed by output file stem.
#[derive(Debug, Default)]
pub struct Output {
    pub tables: Vec<(String, Table)>,
    pub figures: Vec<(String, String)>,
    pub summary: Map<String, Value>,
}

impl Output {
    fn table(&mut self, stem: impl Into<String>, t: Table) {
        self.tables.push((stem.into(), t));
    }

    fn figure(&mut self, stem: impl Into<String>, svg: String) {
        self.figures.push((stem.into(), svg));
    }

    fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.into(), v.into());
    }
}

pub fn dispatch(cmd: &Command, cfg: &ConfigFile) -> Result<Output, CliError> {
    match cmd {
        Command::StabilityStrong(a) => stability_strong(a, cfg),
        Command::StabilityWeak(a) => stability_weak(a, cfg),
        Command::Spiral(a) => spiral(a, cfg),
        Command::DefectStates(a) => defect_states(a, cfg),
        Command::PdeSolve(a) => pde_solve(a, cfg),
        Command::Bifurcation(a) => bifurcation(a, cfg),
        Command::LdgProfile(a) => ldg_profile(a, cfg),
        Command::LdgStability(a) => ldg_stability(a, cfg),
    }
}

fn curve_series(table: &Table, label: impl Fn(u32) -> String) -> Vec<Series> {
    let mut ks: Vec<u32> = table.rows.iter().map(|r| r[2] as u32).collect();
    ks.dedup();
    ks.into_iter()
        .map(|k| Series {
            label: label(k),
            points: table
                .rows
                .iter()
                .filter(|r| r[2] as u32 == k)
                .map(|r| (r[0], r[1]))
                .collect(),
        })
        .collect()
}

fn stability_strong(a: &StabilityStrongArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let s = &cfg.sweep;
    let lo = pick(a.b_min, s.b_min, 0.05);
    let hi = pick(a.b_max, s.b_max, 0.95);
    let steps = pick(a.steps, s.steps, 200);
    let n = pick(a.mode, s.mode, 1);
    check_range("b", lo, hi, steps)?;
    check_b(lo)?;
    check_b(hi)?;
    if n == 0 {
        return Err(CliError::Config(
            "radial mode number must be at least 1".into(),
        ));
    }
    let col = format!("delta{n}");
    let mut t = Table::new(
        format!("critical anisotropy delta_{n} = 1 - 1/(1 + (n pi/ln b)^2) of the defect-free state, strong anchoring; b dimensionless"),
        &["b", &col],
    );
    for b in linspace(lo, hi, steps) {
        t.push(vec![b, of_strong::delta_n(b, n)]);
    }
    let mut out = Output::default();
    let plot = LinePlot {
        title: format!("Strong anchoring: critical anisotropy, mode {n}"),
        x_label: "b".into(),
        y_label: format!("δ{n}"),
        series: vec![Series {
            label: format!("δ{n}(b)"),
            points: t.rows.iter().map(|r| (r[0], r[1])).collect(),
        }],
    };
    out.figure("stability-strong", plot.render());
    out.table("stability-strong", t);
    Ok(out)
}

fn stability_weak(a: &StabilityWeakArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let s = &cfg.sweep;
    let b = check_b(pick(a.b, cfg.geometry.b, 0.5))?;
    let ks = pick(a.k.clone(), s.k.clone(), vec![0, 1, 2, 3]);
    let lo = pick(a.alpha_min, s.alpha_min, 0.05);
    let hi = pick(a.alpha_max, s.alpha_max, 3.0);
    let steps = pick(a.steps, s.steps, 100);
    check_range("alpha", lo, hi, steps)?;
    if ks.is_empty() {
        return Err(CliError::Config(
            "need at least one azimuthal order k".into(),
        ));
    }
    let alphas = linspace(lo, hi, steps);
    let k_max = *ks.iter().max().unwrap_or(&0);
    let curves = of_weak::stability_region(b, k_max, &alphas)?;
    let mut out = Output::default();
    let mut series = Vec::new();
    for k in &ks {
        let curve = &curves[*k as usize];
        let mut t = Table::new(
            format!("critical anisotropy delta_(1,k) (x) against anchoring strength alpha (y) at b = {b}; alpha without a root omitted"),
            &["x", "y", "k"],
        );
        for &(alpha, delta) in &curve.points {
            t.push(vec![delta, alpha, *k as f64]);
        }
        out.note(&format!("points_k{k}"), curve.points.len());
        series.push(Series {
            label: format!("k = {k}"),
            points: t.rows.iter().map(|r| (r[0], r[1])).collect(),
        });
        out.table(format!("stability-weak-k{k}"), t);
    }
    let plot = LinePlot {
        title: format!("Weak anchoring: stability curves, b = {b}"),
        x_label: "δ".into(),
        y_label: "α".into(),
        series,
    };
    out.figure("stability-weak", plot.render());
    Ok(out)
}

fn spiral(a: &SpiralArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let b = check_b(pick(a.b, cfg.geometry.b, 0.5))?;
    let delta = pick(a.delta, cfg.elastic.delta, 1.0);
    let k3 = pick(a.k3, cfg.elastic.k3, 1.0);
    let nodes = pick(a.nodes, cfg.grid.nodes, 2001);
    let elastic = ElasticParams::new(delta, k3)?;
    let state = of_strong::spiral_solve_with_nodes(delta, b, nodes)?;
    let energy = of_strong::spiral_energy(&state, &elastic)?;
    let radial = of_strong::defect_free_energy(&of_strong::AnnulusGeometry::new(b)?, &elastic);
    let mut t = Table::new(
        format!("spiral offset U(r) = theta - phi - pi/2 in radians at delta = {delta}, b = {b}; r dimensionless"),
        &["r", "value"],
    );
    let radii = state.profile.radii();
    for (r, u) in radii.iter().zip(&state.profile.values).rev() {
        t.push(vec![*r, *u]);
    }
    let mut out = Output::default();
    out.note("delta1", of_strong::delta_n(b, 1));
    out.note("u0", state.u0);
    out.note("energy", energy);
    out.note("defect_free_energy", radial);
    out.note("has_mirror_branch", state.has_mirror_branch);
    let plot = LinePlot {
        title: format!("Spiral offset, δ = {delta}, b = {b}"),
        x_label: "r".into(),
        y_label: "U".into(),
        series: vec![Series {
            label: "U(r)".into(),
            points: t.rows.iter().map(|r| (r[0], r[1])).collect(),
        }],
    };
    out.figure("spiral", plot.render());
    out.table("spiral", t);
    Ok(out)
}

fn kind_label(kind: StateKind) -> &'static str {
    match kind {
        StateKind::U1 => "U1",
        StateKind::U2 => "U2",
        StateKind::U3 => "U3",
        StateKind::D => "D",
    }
}

fn defect_states(a: &DefectStatesArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let b = check_b(pick(a.b, cfg.geometry.b, 0.5))?;
    let n_max = pick(a.n_max, cfg.sweep.n_max, 10);
    let eps = a.eps.or(cfg.geometry.eps);
    let k3 = pick(a.k3, cfg.elastic.k3, 1.0);
    if n_max == 0 {
        return Err(CliError::Config("n-max must be at least 1".into()));
    }
    let comment = match eps {
        Some(e) => format!(
            "sector energy K pi (ln(1/eps) + E~) per unit K with K = {k3}, eps = {e}, b = {b}"
        ),
        None => format!("normalized sector energy E~ (dimensionless) at b = {b}"),
    };
    let rows: Vec<Vec<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut row = vec![n as f64];
            for kind in StateKind::ALL {
                row.push(match eps {
                    Some(e) => harmonic::total_energy(kind, n, b, e, k3)?,
                    None => harmonic::normalized_energy(kind, n, b)?,
                });
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = Table::new(comment, &["N", "E_U1", "E_U2", "E_U3", "E_D"]);
    rows.into_iter().for_each(|r| t.push(r));
    let mut out = Output::default();
    out.note("crossover_n", harmonic::crossover_n(b, n_max.max(2))?);
    let series = StateKind::ALL
        .iter()
        .enumerate()
        .map(|(c, kind)| Series {
            label: kind_label(*kind).into(),
            points: t.rows.iter().map(|r| (r[0], r[c + 1])).collect(),
        })
        .collect();
    let plot = LinePlot {
        title: format!("Defect-state energies, b = {b}"),
        x_label: "N".into(),
        y_label: if eps.is_some() {
            "E / K".into()
        } else {
            "normalized energy".into()
        },
        series,
    };
    out.figure("defect-states", plot.render());
    out.table("defect-states", t);
    Ok(out)
}

fn pde_solve(a: &PdeSolveArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let b = check_b(pick(a.b, cfg.geometry.b, 0.5))?;
    let delta = pick(a.delta, cfg.elastic.delta, 0.5);
    let k3 = pick(a.k3, cfg.elastic.k3, 1.0);
    let state = pick(a.state, cfg.sweep.state, StateArg::DefectFree);
    let n = pick(a.n, cfg.geometry.n_sectors, 4);
    let nr = pick(a.nr, cfg.grid.nr, 41);
    let nphi = pick(a.nphi, cfg.grid.nphi, 64);
    let alpha = a.alpha.or(cfg.anchoring.alpha);
    let perturb = pick(a.perturb, cfg.sweep.perturb, 0.0);
    let eps = a.eps.or(cfg.geometry.eps);
    let opts = SolveOptions {
        tol: pick(a.tol, cfg.grid.tol, SolveOptions::default().tol),
        max_iter: pick(
            a.max_iter,
            cfg.grid.max_iter,
            SolveOptions::default().max_iter,
        ),
    };
    let init = match state {
        StateArg::DefectFree => {
            let grid = PolarGrid::annulus(b, nr, nphi)?;
            let bc = match alpha {
                Some(al) => BoundaryCondition::Weak(AnchoringParams::tangent(al)?),
                None => BoundaryCondition::Dirichlet,
            };
            let lb = b.ln();
            DirectorField::from_fn(grid, bc, |r, phi| {
                phi + FRAC_PI_2 + perturb * (PI * r.ln() / lb).sin()
            })?
        }
        kind => {
            if alpha.is_some() {
                return Err(CliError::Config(
                    "weak anchoring is only available for the defect-free state".into(),
                ));
            }
            let kind = match kind {
                StateArg::U1 => StateKind::U1,
                StateArg::U2 => StateKind::U2,
                StateArg::U3 => StateKind::U3,
                _ => StateKind::D,
            };
            let spec = harmonic::state_coefficients(kind, n, Tiling::Sector)?;
            DirectorField::defect_state(PolarGrid::sector(b, n, nr, nphi)?, &spec)?
        }
    };
    let (field, report) = pde::solve_el(&init, delta, &opts)?;
    let mut out = Output::default();
    out.note(
        "energy",
        pde::of_energy_2d(
            &field,
            delta,
            k3,
            if state == StateArg::DefectFree {
                None
            } else {
                eps
            },
        )?,
    );
    if state == StateArg::DefectFree {
        out.note(
            "deviation_from_defect_free",
            field.deviation_from_defect_free(),
        );
    } else if let Ok(fit) = pde::corner_energy_fit(&field, delta) {
        out.note("normalized_energy", fit.normalized_energy);
        out.note("corner_fit_misfit", fit.misfit);
    }
    out.note("iterations", report.iterations);
    out.note("final_residual", report.final_residual);
    out.note("damping_events", report.damping_events);
    let label = match state {
        StateArg::DefectFree => "defect-free".to_string(),
        s => format!("{s:?} on {n} sectors"),
    };
    let stride_r = (nr / 16).max(1);
    let stride_phi = (nphi / 32).max(1);
    let glyphs = field
        .samples()
        .into_iter()
        .enumerate()
        .filter(|(k, _)| (k / nphi) % stride_r == 0 && (k % nphi) % stride_phi == 0)
        .map(|(_, g)| g)
        .collect();
    let quiver = Quiver {
        title: format!("Director, {label}, δ = {delta}, b = {b}"),
        b,
        height: field.grid.height(),
        glyphs,
        glyph_length: 0.6 * (1.0 - b) / (nr / stride_r).max(1) as f64,
    };
    out.figure("pde-solve", quiver.render());
    out.table(
        "pde-solve",
        field_table(&field, format!("director angle theta (radians) at nodes (r, phi) for {label}, delta = {delta}, b = {b}")),
    );
    Ok(out)
}

fn bifurcation(a: &BifurcationArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let s = &cfg.sweep;
    let b = check_b(pick(a.b, cfg.geometry.b, 0.2))?;
    let d1 = of_strong::delta_n(b, 1);
    let lo = pick(a.delta_min, s.delta_min, (d1 - 0.1).max(0.0));
    let hi = pick(a.delta_max, s.delta_max, (d1 + 0.1).min(0.99));
    let steps = pick(a.steps, s.steps, 21);
    let seed = pick(a.seed, s.seed, 0.05);
    let nr = pick(a.nr, cfg.grid.nr, 161);
    check_range("delta", lo, hi, steps)?;
    let deltas = linspace(lo, hi, steps);
    let points = pde::bifurcation_scan_on(PolarGrid::annulus(b, nr, 16)?, &deltas, seed)?;
    let mut near: Vec<BifurcationPoint> = points
        .iter()
        .copied()
        .filter(|p| p.amplitude > 1e-4)
        .collect();
    near.sort_by(|p, q| p.amplitude.total_cmp(&q.amplitude));
    near.truncate(5);
    let mut out = Output::default();
    out.note("delta1", d1);
    out.note("onset", pde::pitchfork_onset(&near, 1e-4));
    let mut t = Table::new(
        format!("pitchfork amplitude max|theta - theta*| in radians (y) against anisotropy delta (x), b = {b}"),
        &["x", "y", "k"],
    );
    for p in &points {
        t.push(vec![p.delta, p.amplitude, 0.0]);
    }
    let mut series = curve_series(&t, |_| "PDE".into());
    if let Ok(amp) = deltas
        .iter()
        .map(|&d| of_strong::pitchfork_amplitude(d, b).map(|a| (d, a)))
        .collect::<Result<Vec<_>, _>>()
    {
        series.push(Series {
            label: "weakly nonlinear".into(),
            points: amp,
        });
    }
    let plot = LinePlot {
        title: format!("Radial pitchfork, b = {b}"),
        x_label: "δ".into(),
        y_label: "amplitude".into(),
        series,
    };
    out.figure("bifurcation", plot.render());
    out.table("bifurcation", t);
    Ok(out)
}

fn ldg_profile(a: &LdgProfileArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let b = check_b(pick(a.b, cfg.geometry.b, 0.5))?;
    let t = pick(a.t, cfg.ldg.t, 10.0);
    let kind = pick(a.kind, cfg.ldg.kind, ProfileArg::S);
    let nodes = pick(a.nodes, cfg.grid.nodes, 401);
    let params = LdgParams::new(t)?;
    let profile = match kind {
        ProfileArg::S => ldg::solve_s(b, params, nodes)?,
        ProfileArg::U => ldg::solve_u(b, params, nodes)?,
    };
    let name = match kind {
        ProfileArg::S => "s",
        ProfileArg::U => "u",
    };
    let mut table = Table::new(
        format!("order-parameter profile {name}(r) (dimensionless) at t = {t}, b = {b}"),
        &["r", "value"],
    );
    for (r, v) in profile.r.iter().zip(&profile.values) {
        table.push(vec![*r, *v]);
    }
    let mut out = Output::default();
    let (r_min, v_min) = profile.minimum();
    out.note("r_min", r_min);
    out.note("min_value", v_min);
    out.note("energy", ldg::ldg_energy(&profile));
    let plot = LinePlot {
        title: format!("Landau-de Gennes profile {name}, t = {t}, b = {b}"),
        x_label: "r".into(),
        y_label: name.into(),
        series: vec![Series {
            label: format!("{name}(r)"),
            points: table.rows.iter().map(|r| (r[0], r[1])).collect(),
        }],
    };
    out.figure("ldg-profile", plot.render());
    out.table("ldg-profile", table);
    Ok(out)
}

fn ldg_stability(a: &LdgStabilityArgs, cfg: &ConfigFile) -> Result<Output, CliError> {
    let s = &cfg.sweep;
    let lo = pick(a.b_min, s.b_min, 0.2);
    let hi = pick(a.b_max, s.b_max, 0.9);
    let steps = pick(a.steps, s.steps, 8);
    let ns = pick(a.n.clone(), s.n.clone(), vec![0, 1, 2]);
    let factor = pick(a.t_factor, cfg.ldg.t_factor, 1.05);
    let nodes = pick(a.nodes, cfg.grid.nodes, 401);
    check_range("b", lo, hi, steps)?;
    check_b(lo)?;
    check_b(hi)?;
    if factor.is_nan() || factor <= 0.0 {
        return Err(CliError::Config(format!(
            "t-factor {factor} must be positive"
        )));
    }
    let bs = linspace(lo, hi, steps);
    let jobs: Vec<(u32, f64)> = ns
        .iter()
        .flat_map(|&n| bs.iter().map(move |&b| (n, b)))
        .collect();
    let rows: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(n, b)| {
            let params = LdgParams::new(factor * ldg::stability_threshold(b))?;
            Ok(vec![b, ldg::min_eig_ln(n, b, params, nodes)?, n as f64])
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = Table::new(
        format!("smallest eigenvalue of L_n (y) against b (x) at t = {factor} * 3(b^2+1)^2/(2b^4); k column holds n"),
        &["x", "y", "k"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    let mut out = Output::default();
    let min = t.rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    out.note("min_eigenvalue", min);
    let plot = LinePlot {
        title: format!("Landau-de Gennes stability, t = {factor} × threshold"),
        x_label: "b".into(),
        y_label: "min eigenvalue".into(),
        series: curve_series(&t, |n| format!("L{n}")),
    };
    out.figure("ldg-stability", plot.render());
    out.table("ldg-stability", t);
    Ok(out)
}

/// JSON document for `--format json`: summary values plus every table.
pub fn to_json(command: &str, out: &Output) -> Value {
    let tables: Map<String, Value> = out
        .tables
        .iter()
        .map(|(stem, t)| (stem.clone(), serde_json::to_value(t).unwrap_or(Value::Null)))
        .collect();
    json!({ "schema_version": SCHEMA_VERSION, "command": command, "summary": out.summary, "tables": tables })
}
