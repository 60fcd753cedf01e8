use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use shor_afs::decoherence::{combined_success_estimate, state_noise_sweep, CombinedSuccess, NoiseScanner, StepNoiseReport};
use shor_afs::fit::linear_fit;
use shor_afs::layout::bit_reverse;
use shor_afs::noise::FrequencyGrid;
use shor_afs::number::{multiplicative_order, success_set};
use shor_afs::observables::{magnetization_fluct, magnetization_specs, w_ratio, Scope};
use shor_afs::pauli::{components_label, parse_components};
use shor_afs::pipeline::{evolve_clean, run_clean, success_probability, CapturePolicy};
use shor_afs::schedule::Schedule;
use shor_afs::scaling::{landmark_fluctuations, perturbative_fragility, scaling_verdicts};
use shor_afs::{BackendKind, Pauli, RegisterLayout};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, write_json, write_svg};
use crate::svg::{Plot, Series, Style};

fn prepare(cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("run_config.toml"), cfg.to_toml()?)?;
    Ok(dir)
}

#[derive(Serialize)]
struct LayoutSummary {
    modulus: u64,
    base: u64,
    l1: usize,
    l2: usize,
    total_qubits: usize,
}

impl From<&RegisterLayout> for LayoutSummary {
    fn from(l: &RegisterLayout) -> Self {
        Self { modulus: l.modulus(), base: l.base(), l1: l.l1(), l2: l.l2(), total_qubits: l.total_qubits() }
    }
}

#[derive(Serialize)]
struct TraceRow {
    step: usize,
    phase: &'static str,
    alpha: char,
    scope: &'static str,
    fluct: f64,
}

#[derive(Serialize)]
struct TraceSummary {
    layout: LayoutSummary,
    steps: usize,
    x_all_modexp: Option<f64>,
    z_all_final: Option<f64>,
    x_r1_modexp: Option<f64>,
    z_r1_final: Option<f64>,
    w_x_modexp: Option<f64>,
    w_z_final: Option<f64>,
}

pub fn trace(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let layout = cfg.circuit.layout()?;
    let components = cfg.trace_components()?;
    let policy = cfg.capture.policy();
    let schedule = Schedule::build(&layout);
    let [_, _, me, fin] = schedule.boundaries();
    let dir = prepare(cfg)?;

    // States are visited one at a time; at L = 30 they do not fit in memory together.
    let mut rows = Vec::new();
    let mut summary = TraceSummary {
        layout: (&layout).into(),
        steps: schedule.len(),
        x_all_modexp: None,
        z_all_final: None,
        x_r1_modexp: None,
        z_r1_final: None,
        w_x_modexp: None,
        w_z_final: None,
    };
    evolve_clean(&layout, cfg.circuit.backend, |m, st| {
        if policy.wants(m, &schedule) {
            let phase = schedule.phase_of(m).label();
            for &p in &components {
                for &scope in &cfg.trace.scopes {
                    rows.push(TraceRow { step: m, phase, alpha: p.symbol(), scope: scope.label(), fluct: magnetization_fluct(st, p, scope)? });
                }
            }
        }
        if m == me {
            summary.x_all_modexp = Some(magnetization_fluct(st, Pauli::X, Scope::All)?);
            summary.x_r1_modexp = Some(magnetization_fluct(st, Pauli::X, Scope::R1)?);
            summary.w_x_modexp = w_ratio(st, Pauli::X).ok();
        }
        if m == fin {
            summary.z_all_final = Some(magnetization_fluct(st, Pauli::Z, Scope::All)?);
            summary.z_r1_final = Some(magnetization_fluct(st, Pauli::Z, Scope::R1)?);
            summary.w_z_final = w_ratio(st, Pauli::Z).ok();
        }
        Ok(())
    })?;

    let mut files = vec![
        write_csv(&dir, "trace.csv", "trace", &rows)?,
        write_json(&dir, "trace_summary.json", &summary)?,
    ];
    if cfg.output.svg {
        let mut series = Vec::new();
        for &p in &components {
            for &scope in &cfg.trace.scopes {
                let pts = rows
                    .iter()
                    .filter(|r| r.alpha == p.symbol() && r.scope == scope.label())
                    .map(|r| (r.step as f64, r.fluct))
                    .collect();
                series.push(Series { name: format!("{p} {}", scope.label()), points: pts, style: Style::Line });
            }
        }
        let plot = Plot {
            title: format!("Fluctuations, N = {}, x = {}, L = {}", layout.modulus(), layout.base(), layout.total_qubits()),
            x_label: "step m".into(),
            y_label: "<(ΔM)²>".into(),
            series,
        };
        files.push(write_svg(&dir, "trace.svg", &plot)?);
    }
    Ok(files)
}

#[derive(Serialize)]
struct SpectrumRow {
    cbar: u64,
    p: f64,
}

#[derive(Serialize)]
struct SpectrumSummary {
    layout: LayoutSummary,
    order: u64,
    success_set: Vec<u64>,
    t_clean: f64,
    total_probability: f64,
    /// The `order` most probable outcomes, most probable first.
    dominant_peaks: Vec<(u64, f64)>,
}

pub fn spectrum(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let layout = cfg.circuit.layout()?;
    let q = Schedule::build(&layout).len();
    let run = run_clean(&layout, cfg.circuit.backend, &CapturePolicy::Steps([q].into_iter().collect()))?;
    let fin = run.final_state().ok_or(shor_afs::Error::MissingStep(q))?;
    let dir = prepare(cfg)?;

    let dist = fin.register1_distribution()?;
    let mut rows = Vec::with_capacity(dist.len());
    for cbar in 0..dist.len() as u64 {
        rows.push(SpectrumRow { cbar, p: dist[bit_reverse(cbar, layout.l1())? as usize] });
    }
    let order = multiplicative_order(layout.base(), layout.modulus())?;
    let set = success_set(&layout, order);
    let mut ranked: Vec<(u64, f64)> = rows.iter().map(|r| (r.cbar, r.p)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(order as usize);
    let summary = SpectrumSummary {
        layout: (&layout).into(),
        order,
        success_set: set.reversed_values().collect(),
        t_clean: success_probability(fin, &set)?,
        total_probability: rows.iter().map(|r| r.p).sum(),
        dominant_peaks: ranked,
    };

    let mut files = vec![
        write_csv(&dir, "spectrum.csv", "spectrum", &rows)?,
        write_json(&dir, "spectrum_summary.json", &summary)?,
    ];
    if cfg.output.svg {
        let plot = Plot {
            title: format!("Outcome distribution, N = {}, x = {}", layout.modulus(), layout.base()),
            x_label: "bit-reversed outcome c̄".into(),
            y_label: "P".into(),
            series: vec![Series {
                name: "P(c̄)".into(),
                points: rows.iter().map(|r| (r.cbar as f64, r.p)).collect(),
                style: Style::Line,
            }],
        };
        files.push(write_svg(&dir, "spectrum.svg", &plot)?);
    }
    Ok(files)
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct NoiseScanRow {
    m: usize,
    phase: &'static str,
    F: f64,
    F_stderr: f64,
    S: f64,
    S_stderr: f64,
    Gamma: f64,
    T: f64,
    T_stderr: f64,
    r_m: Option<f64>,
    F_pert: f64,
}

impl From<&StepNoiseReport> for NoiseScanRow {
    fn from(r: &StepNoiseReport) -> Self {
        let t = r.success.expect("success computed");
        Self {
            m: r.step,
            phase: r.phase.label(),
            F: r.fidelity.mean,
            F_stderr: r.fidelity.stderr,
            S: r.entropy.mean + 0.0,
            S_stderr: r.entropy.stderr,
            Gamma: r.gamma.mean,
            T: t.mean,
            T_stderr: t.stderr,
            r_m: r.reduction_rate,
            F_pert: r.predicted.fidelity,
        }
    }
}

#[derive(Serialize)]
struct NoiseSummary {
    layout: LayoutSummary,
    lambda: f64,
    components: String,
    samples: usize,
    seed: u64,
    autocorrelation: f64,
    t_clean: f64,
    /// Present when every interval `0..=Q` was scanned.
    combined: Option<CombinedSuccess>,
}

fn require_dense(cfg: &RunConfig) -> CliResult<()> {
    if cfg.circuit.backend != BackendKind::Dense {
        return Err(CliError::Config("noise runs need the dense backend".into()));
    }
    Ok(())
}

pub fn noise_scan(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    require_dense(cfg)?;
    let layout = cfg.circuit.layout()?;
    let noise = cfg.noise.to_config()?;
    let scanner = NoiseScanner::new(layout, noise.clone())?;
    let q = scanner.schedule().len();
    let steps: Vec<usize> = cfg.noise_scan.steps.clone().unwrap_or_else(|| (0..=q).collect());
    let dir = prepare(cfg)?;
    let reports = scanner.scan(&steps, true)?;
    let rows: Vec<NoiseScanRow> = reports.iter().map(Into::into).collect();

    let per_step: BTreeMap<usize, f64> = rows.iter().map(|r| (r.m, r.T)).collect();
    let summary = NoiseSummary {
        layout: (&layout).into(),
        lambda: noise.lambda,
        components: components_label(&noise.components),
        samples: noise.samples,
        seed: noise.seed,
        autocorrelation: scanner.grid().autocorrelation(1.0),
        t_clean: scanner.t_clean(),
        combined: combined_success_estimate(scanner.t_clean(), &per_step, 0..=q).ok(),
    };

    let mut files = vec![
        write_csv(&dir, "noise_scan.csv", "noise-scan", &rows)?,
        write_json(&dir, "noise_scan_summary.json", &summary)?,
    ];
    if cfg.output.svg {
        let plot = Plot {
            title: format!("Success vs fidelity, {}-noise, λ = {}", summary.components, noise.lambda),
            x_label: "F_m".into(),
            y_label: "T_m".into(),
            series: vec![Series { name: "steps".into(), points: rows.iter().map(|r| (r.F, r.T)).collect(), style: Style::Markers }],
        };
        files.push(write_svg(&dir, "noise_scan.svg", &plot)?);
    }
    Ok(files)
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct StateNoiseRow {
    lambda: f64,
    component: char,
    F: f64,
    F_stderr: f64,
    T: f64,
    T_stderr: f64,
    S: f64,
    S_stderr: f64,
    r_m: Option<f64>,
}

#[derive(Serialize)]
struct ComponentSummary {
    component: char,
    /// R² of the straight-line fit of T against F.
    r_squared: Option<f64>,
    /// `(max − min)/|mean|` of the defined `r_m` values.
    r_m_spread: Option<f64>,
}

#[derive(Serialize)]
struct StateNoiseSummary {
    layout: LayoutSummary,
    step: usize,
    samples: usize,
    seed: u64,
    t_clean: f64,
    components: Vec<ComponentSummary>,
}

pub fn state_noise(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    require_dense(cfg)?;
    let layout = cfg.circuit.layout()?;
    let noise = cfg.noise.to_config()?;
    let step = cfg.state_noise.step.unwrap_or(2 * layout.l1());
    let q = Schedule::build(&layout).len();
    if step > q {
        return Err(CliError::Config(format!("step {step} is beyond the last step {q}")));
    }
    if cfg.state_noise.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(CliError::Config("couplings must be finite and non-negative".into()));
    }
    let components = parse_components(&cfg.state_noise.components)?;
    let scanner = NoiseScanner::with_capture(layout, noise.clone(), CapturePolicy::Steps([step].into_iter().collect()))?;
    let dir = prepare(cfg)?;
    let reports = state_noise_sweep(&scanner, step, &cfg.state_noise.lambdas, &components)?;
    let rows: Vec<StateNoiseRow> = reports
        .iter()
        .map(|r| {
            let t = r.success.expect("success computed");
            StateNoiseRow {
                lambda: r.lambda,
                component: r.components[0].symbol(),
                F: r.fidelity.mean,
                F_stderr: r.fidelity.stderr,
                T: t.mean,
                T_stderr: t.stderr,
                S: r.entropy.mean + 0.0,
                S_stderr: r.entropy.stderr,
                r_m: r.reduction_rate,
            }
        })
        .collect();

    let per_component: Vec<ComponentSummary> = components
        .iter()
        .map(|p| {
            let sel: Vec<&StateNoiseRow> = rows.iter().filter(|r| r.component == p.symbol()).collect();
            let fs: Vec<f64> = sel.iter().map(|r| r.F).collect();
            let ts: Vec<f64> = sel.iter().map(|r| r.T).collect();
            let rs: Vec<f64> = sel.iter().filter_map(|r| r.r_m).collect();
            let spread = (!rs.is_empty()).then(|| {
                let mean = rs.iter().sum::<f64>() / rs.len() as f64;
                let hi = rs.iter().fold(f64::MIN, |a, &b| a.max(b));
                let lo = rs.iter().fold(f64::MAX, |a, &b| a.min(b));
                (hi - lo) / mean.abs()
            });
            ComponentSummary { component: p.symbol(), r_squared: linear_fit(&fs, &ts).ok().map(|f| f.r_squared), r_m_spread: spread }
        })
        .collect();
    let summary = StateNoiseSummary {
        layout: (&layout).into(),
        step,
        samples: noise.samples,
        seed: noise.seed,
        t_clean: scanner.t_clean(),
        components: per_component,
    };

    let mut files = vec![
        write_csv(&dir, "state_noise.csv", "state-noise", &rows)?,
        write_json(&dir, "state_noise_summary.json", &summary)?,
    ];
    if cfg.output.svg {
        let series = components
            .iter()
            .map(|p| Series {
                name: format!("f_{p}"),
                points: rows.iter().filter(|r| r.component == p.symbol()).map(|r| (r.F, r.T)).collect(),
                style: Style::Line,
            })
            .collect();
        let plot = Plot {
            title: format!("Success vs fidelity of the state after step {step}"),
            x_label: "F_m".into(),
            y_label: "T_m".into(),
            series,
        };
        files.push(write_svg(&dir, "state_noise.svg", &plot)?);
    }
    Ok(files)
}

#[derive(Serialize)]
struct ScalingRow {
    total_qubits: usize,
    modulus: u64,
    base: u64,
    state: &'static str,
    alpha: char,
    scope: &'static str,
    fluct: f64,
}

#[derive(Serialize)]
struct VerdictRow {
    state: &'static str,
    alpha: char,
    scope: &'static str,
    p: Option<f64>,
    classification: &'static str,
}

#[derive(Serialize)]
struct FragilityCsvRow {
    state: &'static str,
    alpha: char,
    exponent: Option<f64>,
    delta: Option<f64>,
}

#[derive(Serialize)]
struct ScalingSummary {
    runs: Vec<LayoutSummary>,
    lambda: f64,
    autocorrelation: f64,
    afs: Vec<String>,
    fragility: Vec<shor_afs::scaling::FragilityRow>,
}

pub fn scaling(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    if cfg.scaling.runs.len() < 2 {
        return Err(CliError::Config("scaling needs at least two runs".into()));
    }
    let layouts: Vec<(RegisterLayout, BackendKind)> =
        cfg.scaling.runs.iter().map(|r| r.layout().map(|l| (l, r.backend))).collect::<CliResult<_>>()?;
    let dir = prepare(cfg)?;
    let specs = magnetization_specs();
    let mut points = Vec::new();
    for (layout, backend) in &layouts {
        points.extend(landmark_fluctuations(layout, *backend, &specs)?);
    }
    let rows: Vec<ScalingRow> = points
        .iter()
        .zip(layouts.iter().flat_map(|(l, _)| std::iter::repeat_n(l, 4 * specs.len())))
        .map(|(p, l)| ScalingRow {
            total_qubits: p.total_qubits,
            modulus: l.modulus(),
            base: l.base(),
            state: p.landmark.label(),
            alpha: p.spec.pauli.symbol(),
            scope: p.spec.scope.label(),
            fluct: p.fluct,
        })
        .collect();
    let verdicts = scaling_verdicts(&points)?;
    let verdict_rows: Vec<VerdictRow> = verdicts
        .iter()
        .map(|v| VerdictRow {
            state: v.landmark.label(),
            alpha: v.spec.pauli.symbol(),
            scope: v.spec.scope.label(),
            p: v.verdict.p,
            classification: v.verdict.classification.label(),
        })
        .collect();

    let c = FrequencyGrid::for_steps(cfg.scaling.reference_steps, cfg.noise.omega_high_factor)?.autocorrelation(1.0);
    let fragility = perturbative_fragility(&points, cfg.scaling.lambda, c)?;
    let fragility_rows: Vec<FragilityCsvRow> = fragility
        .iter()
        .map(|f| FragilityCsvRow {
            state: f.landmark.label(),
            alpha: f.pauli.symbol(),
            exponent: f.fit.map(|x| x.exponent),
            delta: f.fit.map(|x| x.delta),
        })
        .collect();
    let summary = ScalingSummary {
        runs: layouts.iter().map(|(l, _)| l.into()).collect(),
        lambda: cfg.scaling.lambda,
        autocorrelation: c,
        afs: verdict_rows
            .iter()
            .filter(|v| v.classification == "AFS")
            .map(|v| format!("{} {} {}", v.state, v.alpha, v.scope))
            .collect(),
        fragility,
    };
    Ok(vec![
        write_csv(&dir, "scaling_points.csv", "scaling-points", &rows)?,
        write_csv(&dir, "scaling_verdicts.csv", "scaling-verdicts", &verdict_rows)?,
        write_csv(&dir, "scaling_fragility.csv", "scaling-fragility", &fragility_rows)?,
        write_json(&dir, "scaling_summary.json", &summary)?,
    ])
}
