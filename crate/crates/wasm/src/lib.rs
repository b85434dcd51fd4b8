//! Browser bindings for the schedule synthesizer. Every export takes plain
//! scalars and returns a JSON string with either the payload or an
//! `{"error": ...}` object, so the page needs no wasm-specific glue beyond
//! `JSON.parse`.

use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

use spinforge_core::{
    coupling_bounds_check, evolve_virtual_closed_form, gaussian_state_profile, sample_evolution,
    synthesize, tolerance_threshold, w_state_profile, FidelityCurve, SingleExcitationState,
    SiteProbabilityProfile, SweepContext,
};

fn build_profile(state: &str, n: u32, sigma: f64) -> Result<SiteProbabilityProfile, String> {
    match state {
        "w" => w_state_profile(n as usize).map_err(|e| e.to_string()),
        "gaussian" => gaussian_state_profile(n as usize, sigma).map_err(|e| e.to_string()),
        other => Err(format!("unknown state kind {other:?}; use w or gaussian")),
    }
}

fn error_json(msg: String) -> String {
    json!({ "error": msg }).to_string()
}

/// Synthesize a schedule and return couplings, intervals, tail times,
/// phases, the bounds verdict, and the generated per-site probabilities.
#[wasm_bindgen]
pub fn synthesize_schedule(state: &str, n: u32, sigma: f64, j1: f64) -> String {
    let run = || -> Result<String, String> {
        let profile = build_profile(state, n, sigma)?;
        let schedule = synthesize(&profile, j1).map_err(|e| e.to_string())?;
        let bounds = coupling_bounds_check(&schedule);
        let generated = evolve_virtual_closed_form(&schedule).map_err(|e| e.to_string())?;
        Ok(json!({
            "n": schedule.size().n(),
            "j1": schedule.j1(),
            "total_time": schedule.total_time(),
            "couplings": schedule.couplings().values(),
            "intervals": schedule.intervals(),
            "tails": schedule.tails(),
            "phases": schedule.phases(),
            "bounds_pass": bounds.pass,
            "ratios": bounds.ratios,
            "target": profile.values(),
            "generated": generated.probabilities(),
        })
        .to_string())
    };
    run().unwrap_or_else(error_json)
}

/// Per-site probability trace of the pulsed evolution: sampled times, one
/// probability row per time, and the pulse instants for markers.
#[wasm_bindgen]
pub fn evolution_trace(state: &str, n: u32, sigma: f64, j1: f64, samples_per_interval: u32) -> String {
    let run = || -> Result<String, String> {
        let profile = build_profile(state, n, sigma)?;
        let schedule = synthesize(&profile, j1).map_err(|e| e.to_string())?;
        let initial = SingleExcitationState::basis_state(schedule.size(), 1)
            .map_err(|e| e.to_string())?;
        let trace = sample_evolution(
            schedule.couplings(),
            schedule.intervals(),
            samples_per_interval as usize,
            &initial,
        )
        .map_err(|e| e.to_string())?;
        let times: Vec<f64> = trace.iter().map(|row| row.time).collect();
        let probabilities: Vec<&[f64]> =
            trace.iter().map(|row| row.probabilities.as_slice()).collect();
        let pulse_times: Vec<f64> = schedule.intervals()[..schedule.size().n() - 1]
            .iter()
            .scan(0.0, |acc, t| {
                *acc += t;
                Some(*acc)
            })
            .collect();
        Ok(json!({
            "sites": schedule.size().sites(),
            "times": times,
            "probabilities": probabilities,
            "pulse_times": pulse_times,
            "total_time": schedule.total_time(),
        })
        .to_string())
    };
    run().unwrap_or_else(error_json)
}

/// Fidelity-versus-timing-error curve with the F* tolerance threshold.
#[wasm_bindgen]
pub fn timing_sensitivity(
    state: &str,
    n: u32,
    sigma: f64,
    j1: f64,
    eps_max: f64,
    steps: u32,
    f_star: f64,
) -> String {
    let run = || -> Result<String, String> {
        if steps < 2 {
            return Err("steps must be at least 2".into());
        }
        if eps_max <= 0.0 || !eps_max.is_finite() {
            return Err("eps_max must be positive".into());
        }
        let profile = build_profile(state, n, sigma)?;
        let ctx = SweepContext::new(&profile, j1).map_err(|e| e.to_string())?;
        let mut points = Vec::with_capacity(steps as usize);
        for i in 0..steps {
            let eps = eps_max * i as f64 / (steps - 1) as f64;
            let f = ctx.fidelity_at(eps).map_err(|e| e.to_string())?;
            points.push((eps, f));
        }
        let curve = FidelityCurve {
            label: state.into(),
            n: n as usize,
            points: points.clone(),
        };
        let threshold = tolerance_threshold(&curve, f_star).map_err(|e| e.to_string())?;
        Ok(json!({
            "points": points,
            "f_star": f_star,
            "eps_star": threshold.eps_star,
            "unbounded": threshold.unbounded,
        })
        .to_string())
    };
    run().unwrap_or_else(error_json)
}
