//! One function per subcommand, each returning a [`RunReport`].

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use obsrenorm::decoherence::{uniform_grid, BipartiteState, GridKernel};
use obsrenorm::divcalc::DiagramShape;
use obsrenorm::extensions::{self, Phi6Mode};
use obsrenorm::osm::{
    self, trace_formal, Branch, InternalFactor, PerturbativeState, RelevantObservable,
};
use obsrenorm::phi4::{
    self, BetaTable, MassShift, SourceProfile, SubtractionMode, TheoryConfig,
};

use crate::config::{tolerance_from_env, RunConfig, StateFile};
use crate::report::RunReport;
use crate::CliError;

fn cjson(c: Complex64) -> Value {
    json!({ "re": c.re, "im": c.im })
}

pub fn divscan(l: u32, n: u32, p_max: u32) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("divscan", json!({ "l": l, "n": n, "p_max": p_max }));
    let mut rows = Vec::new();
    for p in 1..=p_max {
        let shape = DiagramShape::new(l, p, n)?;
        let Ok(loops) = shape.loop_count() else {
            continue; // vanishing correlator at this vertex count
        };
        let profile = shape.divergence_profile()?;
        rows.push(json!({
            "p": p,
            "loops": loops,
            "propagators": shape.total_propagators()?,
            "internal": shape.internal_propagators().ok(),
            "slots": profile.slots.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
        }));
    }
    if rows.is_empty() {
        return Err(CliError::Domain(format!(
            "no valid diagram shapes for l={l}, n={n} up to p={p_max}"
        )));
    }
    report.results = json!({ "rows": rows });
    Ok(report)
}

pub fn project(state_path: &Path) -> Result<RunReport, CliError> {
    let tol = tolerance_from_env()?;
    let (state, obs) = StateFile::load(state_path)?;
    let mut report = RunReport::new(
        "project",
        json!({ "state": state_path.display().to_string(), "order": state.order() }),
    );
    let formal = trace_formal(&state, &obs)?;
    let projected_state = state.project();
    let projected = trace_formal(&projected_state, &obs)?;
    let counterterm = osm::counterterm_transform(&formal);
    report.push_ledger("formal_trace", &formal);
    report.push_ledger("projected_trace", &projected);
    report.results = json!({
        "divergence_degree": formal.divergence_degree(),
        "finite_part": cjson(formal.finite_part()),
        "projected_value": cjson(projected.finite_part()),
        "counterterm_value": cjson(counterterm),
    });
    report.push_check(
        "projection_vs_counterterm",
        (projected.finite_part() - counterterm).norm(),
        tol,
    );
    report.push_check(
        "projected_degree_zero",
        f64::from(projected.divergence_degree()),
        0.0,
    );
    Ok(report)
}

fn random_state(rng: &mut ChaCha8Rng, max_order: u32) -> (PerturbativeState, RelevantObservable) {
    let mut c = |rng: &mut ChaCha8Rng| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    };
    let p = rng.random_range(1..=max_order);
    let mut branches = Vec::new();
    for k in 0..p {
        if k > 0 && rng.random_bool(0.3) {
            continue;
        }
        let factors = (0..p)
            .map(|_| InternalFactor::new(c(rng), c(rng)))
            .collect();
        branches.push(Branch {
            external_index: k,
            factors,
        });
    }
    let state = PerturbativeState::new(p, branches).expect("generated state is well-formed");
    let obs = RelevantObservable::new((0..p).map(|k| (k, c(rng)))).expect("finite traces");
    (state, obs)
}

pub fn compare(
    state_path: Option<&Path>,
    seed: u64,
    max_order: u32,
    count: u32,
) -> Result<RunReport, CliError> {
    let tol = tolerance_from_env()?;
    let mut report = RunReport::new(
        "compare",
        json!({
            "state": state_path.map(|p| p.display().to_string()),
            "seed": seed,
            "max_order": max_order,
            "count": count,
        }),
    );
    let mut max_delta: f64 = 0.0;
    let mut states_checked = 0u32;
    let mut check_one = |state: &PerturbativeState,
                         obs: &RelevantObservable|
     -> Result<(), CliError> {
        let ledger = trace_formal(state, obs)?;
        let via_counterterm = osm::counterterm_transform(&ledger);
        let via_projection = trace_formal(&state.project(), obs)?.finite_part();
        max_delta = max_delta.max((via_counterterm - via_projection).norm());
        states_checked += 1;
        Ok(())
    };
    if let Some(path) = state_path {
        let (state, obs) = StateFile::load(path)?;
        check_one(&state, &obs)?;
    } else {
        if max_order == 0 {
            return Err(CliError::Config("max order must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let (state, obs) = random_state(&mut rng, max_order);
            check_one(&state, &obs)?;
        }
    }
    report.results = json!({
        "states_checked": states_checked,
        "max_finite_part_delta": max_delta,
    });
    report.push_check("projection_vs_counterterm", max_delta, tol);
    Ok(report)
}

pub fn phi4_mass_shift(
    m0: f64,
    lambda: f64,
    mu: f64,
    order: u32,
    mode: SubtractionMode,
) -> Result<RunReport, CliError> {
    let cfg = TheoryConfig::new(m0, lambda, mu, order)?;
    let table = BetaTable::first_order(&cfg);
    let mut report = RunReport::new(
        "phi4 mass-shift",
        json!({ "m0": m0, "lambda": lambda, "mu": mu, "order": order, "mode": mode }),
    );
    let projected = match phi4::mass_shift(&cfg, &table, SubtractionMode::Projected)? {
        MassShift::Projected(v) => v,
        MassShift::Formal(_) => unreachable!(),
    };
    let formal = match phi4::mass_shift(&cfg, &table, SubtractionMode::Formal)? {
        MassShift::Formal(s) => s,
        MassShift::Projected(_) => unreachable!(),
    };
    report.push_ledger("mass_shift_formal", &formal);
    report.push_ledger("tadpole", &phi4::tadpole_series(&cfg));
    report.results = json!({
        "mode": mode,
        "m0_squared": m0 * m0,
        "mass_shift_projected": cjson(projected),
        "requested": match mode {
            SubtractionMode::Projected => cjson(projected),
            SubtractionMode::Formal => json!(null),
        },
    });
    report.push_check(
        "formal_finite_slot_vs_projected",
        (formal.finite_part() - projected).norm(),
        tolerance_from_env()?,
    );
    Ok(report)
}

pub fn phi4_two_point(config_path: &Path, q2: Option<f64>) -> Result<RunReport, CliError> {
    let tol = tolerance_from_env()?;
    let cfg_file = RunConfig::load(config_path)?;
    let cfg = &cfg_file.theory;
    let table = cfg_file.beta_table()?;
    let mut report = RunReport::new(
        "phi4 two-point",
        json!({ "config": config_path.display().to_string(), "q2": q2 }),
    );
    report.config_echo = Some(cfg_file.canonical_echo());

    let tp = phi4::two_point_series(cfg, &table)?;
    for (s, series) in &tp.corrections {
        report.push_ledger(&format!("correction_s{s}"), series);
    }
    let m2_zero = tp
        .corrections
        .get(&0)
        .map(osm::counterterm_transform)
        .unwrap_or(Complex64::ZERO);

    let projected = match phi4::mass_shift(cfg, &table, SubtractionMode::Projected)? {
        MassShift::Projected(v) => v,
        MassShift::Formal(_) => unreachable!(),
    };
    let reduced = phi4::first_order_reduced_state(cfg);
    let projection_route =
        cfg.coupling_weight(1) * reduced.symmetry_factor * reduced.rho_nd_weight;

    let mut results = json!({
        "free_coefficient": cjson(tp.free_coefficient),
        "self_energy_m2": cjson(m2_zero),
        "mass_shift_projected": cjson(projected),
    });

    if let Some(src) = &cfg_file.source {
        let mut traces = serde_json::Map::new();
        for k in 0..=cfg.order {
            traces.insert(k.to_string(), json!(phi4::external_trace(k, cfg, src)?));
        }
        results["external_traces"] = Value::Object(traces);
    }

    if let Some(q2) = q2 {
        let closed = phi4::resummed_propagator(q2, cfg, m2_zero)?;
        let partial = phi4::propagator_partial_sum(q2, cfg, m2_zero, 40);
        results["resummed_propagator"] = cjson(closed);
        report.push_check("partial_sum_vs_closed_form", (closed - partial).norm(), 1e-10);
    }
    report.results = results;

    if cfg.order >= 1 {
        report.push_check(
            "counterterm_vs_projection_first_order",
            (osm::counterterm_transform(&tp.corrections[&0]) - projection_route).norm(),
            tol,
        );
    }
    Ok(report)
}

pub fn qed_self_energy(p2: f64, m: f64, mu: f64, e2: f64) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(
        "qed self-energy",
        json!({ "p2": p2, "m": m, "mu": mu, "e2": e2 }),
    );
    let se = extensions::qed_self_energy(p2, m, mu, e2)?;
    let refined = extensions::qed_self_energy_with_nodes(
        p2,
        m,
        mu,
        e2,
        extensions::QED_QUADRATURE_NODES * 10,
    )?;
    let trace = extensions::qed_trace(&se, Complex64::ONE);
    report.push_ledger("trace_pslash", &trace.pslash);
    report.push_ledger("trace_mass", &trace.mass);
    report.results = json!({
        "diagonal": { "pslash": cjson(se.diagonal.coeff_pslash), "mass": cjson(se.diagonal.coeff_mass) },
        "non_diagonal": { "pslash": cjson(se.non_diagonal.coeff_pslash), "mass": cjson(se.non_diagonal.coeff_mass) },
    });
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(f64::MIN_POSITIVE);
    report.push_check(
        "quadrature_refinement_pslash",
        rel(se.non_diagonal.coeff_pslash, refined.non_diagonal.coeff_pslash),
        1e-8,
    );
    report.push_check(
        "quadrature_refinement_mass",
        rel(se.non_diagonal.coeff_mass, refined.non_diagonal.coeff_mass),
        1e-8,
    );
    Ok(report)
}

pub fn phi6_first_order(
    mode: Phi6Mode,
    m0: f64,
    lambda: f64,
    mu: f64,
) -> Result<RunReport, CliError> {
    let cfg = TheoryConfig::new(m0, lambda, mu, 1)?;
    let mut report = RunReport::new(
        "phi6 first-order",
        json!({ "mode": mode, "m0": m0, "lambda": lambda, "mu": mu }),
    );
    let series = extensions::phi6_first_order(&cfg, mode);
    report.push_ledger("phi6_series", &series);
    let loops = DiagramShape::new(6, 1, 2)?.loop_count()?;
    report.results = json!({
        "mode": mode,
        "pole_order": series.divergence_degree(),
        "finite_part": cjson(series.finite_part()),
        "loop_count_bound": loops,
    });
    let square = phi4::tadpole_series(&cfg).pow(2);
    if mode == Phi6Mode::FullSquare {
        let mut worst: f64 = 0.0;
        for o in -2..=square.truncation_order().unwrap_or(0) {
            worst = worst.max((series.coeff(o) - square.coeff(o)).norm());
        }
        report.push_check("equals_tadpole_squared", worst, 0.0);
    }
    report.push_check(
        "pole_order_matches_loop_count",
        f64::from(series.divergence_degree().abs_diff(loops)),
        0.0,
    );
    Ok(report)
}

pub fn deco_demo(
    dim_system: usize,
    dim_env: usize,
    grid_points: usize,
    seed: u64,
) -> Result<RunReport, CliError> {
    let tol = tolerance_from_env()?;
    if dim_system < 2 || dim_env < 2 || dim_system * dim_env > 256 {
        return Err(CliError::Config(
            "system and environment dimensions must be at least 2 (product at most 256)".into(),
        ));
    }
    if grid_points < 8 {
        return Err(CliError::Config("grid needs at least 8 points".into()));
    }
    let mut report = RunReport::new(
        "deco demo",
        json!({
            "dim_system": dim_system,
            "dim_env": dim_env,
            "grid_points": grid_points,
            "seed": seed,
        }),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = |rng: &mut ChaCha8Rng| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    };
    let dim = dim_system * dim_env;
    let raw = DMatrix::from_fn(dim, dim, |_, _| c(&mut rng));
    let mut rho = &raw * raw.adjoint();
    let trace = rho.trace();
    rho /= trace;
    let state = BipartiteState::new(dim_system, dim_env, rho, 1e-9)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let a = DMatrix::from_fn(dim_system, dim_system, |_, _| c(&mut rng));
    let o_s = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let full_route = state.relevant_mean_value(&o_s)?;
    let reduced_route = (state.partial_trace_env() * &o_s).trace();

    let points = uniform_grid(-8.0, 8.0, grid_points);
    let kernel = GridKernel::from_profiles(
        points.clone(),
        |w| Complex64::new((-w * w / 2.0).exp(), 0.0),
        |w, v| Complex64::new((-(w * w + v * v) / 3.0).exp(), 0.0),
        1e-9,
    )?;
    let o_d: Vec<Complex64> = points
        .iter()
        .map(|&w| Complex64::new((-w * w / 4.0).exp(), 0.0))
        .collect();
    let o_nd = DMatrix::from_fn(grid_points, grid_points, |i, j| {
        Complex64::new((-(points[i] - points[j]).powi(2) / 5.0).exp(), 0.0)
    });
    let before = kernel.continuous_trace_formal(&o_d, &o_nd)?;
    let after = kernel.project().continuous_trace_formal(&o_d, &o_nd)?;
    report.push_ledger("grid_trace", &before);
    report.push_ledger("grid_trace_projected", &after);
    report.results = json!({
        "mean_value_full": cjson(full_route),
        "mean_value_reduced": cjson(reduced_route),
        "delta_slot_before": cjson(before.coeff(1)),
        "delta_slot_after": cjson(after.coeff(1)),
    });
    report.push_check(
        "relevant_mean_value_identity",
        (full_route - reduced_route).norm(),
        tol,
    );
    report.push_check("projection_removes_delta_slot", after.coeff(1).norm(), 0.0);
    Ok(report)
}
