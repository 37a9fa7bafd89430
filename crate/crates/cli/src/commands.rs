use std::fs;

use anyhow::{Context, Result};
use crossmag::oracle::{run_triangle, DrawSettings};
use crossmag::sweep::{ExtremumKind, SweepEngine};
use crossmag::{
    load_config, Axis, AxisKind, Complex64, DelayMethod, DetuningMode, LoadedConfig, Observable, ProbeConfig,
    SteadyState, SweepSpec, SystemParams,
};

use crate::figures;
use crate::output::{Cell, ColumnKind, Format, RunManifest, Sink, Table};
use crate::plot::{HeatMap, LinePlot, Series};
use crate::{Cli, Command, Common, DelayArgs, Layout, Method, Mode, ProbeArgs, SigmaAxisArgs, Status, Sweep2dArgs};

/// Resolved inputs shared by all subcommands.
struct RunContext {
    params: SystemParams,
    probe: ProbeConfig,
    sweep: SweepSpec,
    steady: SteadyState,
}

fn load(common: &Common) -> Result<LoadedConfig> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = load_config(&text).with_context(|| match &common.config {
        Some(p) => format!("invalid config {}", p.display()),
        None => "invalid default config".into(),
    })?;
    if let Some(x) = common.gmb_override {
        cfg.params.g_mb_effective_override = Some(Complex64::new(x * cfg.params.omega_b, 0.0));
    }
    if let Some(mode) = common.mode {
        cfg.params.drive_detuning_mode = match mode {
            Mode::Pinned => DetuningMode::ResolvedSidebandPinned,
            Mode::Selfconsistent => DetuningMode::SelfConsistent,
        };
    }
    cfg.params.validate()?;
    Ok(cfg)
}

fn context(common: &Common, probe: Option<&ProbeArgs>) -> Result<RunContext> {
    let cfg = load(common)?;
    let mut probe_cfg = cfg.probe;
    if let Some(p) = probe {
        if let Some(xi) = p.xi {
            probe_cfg.xi = xi;
        }
        if let Some(phi) = p.phi {
            probe_cfg.phi = phi;
        }
    }
    probe_cfg.validate()?;
    let steady = crossmag::solve_steady_state(&cfg.params)?;
    Ok(RunContext {
        params: cfg.params,
        probe: probe_cfg,
        sweep: cfg.sweep,
        steady,
    })
}

pub fn run(cli: &Cli) -> Result<Status> {
    let common = &cli.common;
    match &cli.command {
        Command::Steady => steady(common),
        Command::Spectrum(args) => spectrum(common, &args.probe, &args.axis, args.observable),
        Command::Delay(args) => delay(common, args),
        Command::Sweep2d(args) => sweep2d(common, args),
        Command::Verify(args) => verify(common, args.draws, args.seed, args.time_domain_draws),
        Command::Fig { id } => figure(common, *id),
    }
}

fn report(files: &[std::path::PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn steady(common: &Common) -> Result<Status> {
    let ctx = context(common, None)?;
    let s = &ctx.steady;
    let w = ctx.params.omega_b;
    let mut table = Table::new(
        "steady/1",
        &[
            ("m_s", ColumnKind::Complex),
            ("b_s", ColumnKind::Complex),
            ("c1_s", ColumnKind::Complex),
            ("c2_s", ColumnKind::Complex),
            ("delta_m_rad_s", ColumnKind::Real),
            ("delta_m_over_omega_b", ColumnKind::Real),
            ("g_eff", ColumnKind::Complex),
            ("g_eff_over_omega_b", ColumnKind::Real),
            ("g_eff_pinned", ColumnKind::Flag),
            ("iterations", ColumnKind::Count),
            ("converged", ColumnKind::Flag),
        ],
    );
    table.push(vec![
        Cell::Complex(s.m_s),
        Cell::Complex(s.b_s),
        Cell::Complex(s.c1_s),
        Cell::Complex(s.c2_s),
        Cell::Real(s.delta_m),
        Cell::Real(s.delta_m / w),
        Cell::Complex(s.g_eff),
        Cell::Real(s.g_eff.norm() / w),
        Cell::Flag(s.g_eff_pinned),
        Cell::Count(s.iterations as u64),
        Cell::Flag(s.converged),
    ]);
    println!(
        "|G_mb|/ω_b = {:.6}, Δ_m/ω_b = {:.6}, iterations = {}",
        s.g_eff.norm() / w,
        s.delta_m / w,
        s.iterations
    );
    let mut manifest = RunManifest::new("steady", &ctx.params);
    manifest.steady = Some(s.clone());
    let mut sink = Sink::new(&common.out, common.format, manifest)?;
    sink.table("steady", &table)?;
    report(&sink.finish("steady")?);
    Ok(Status::Ok)
}

/// σ axis from flags, falling back to the config's sweep when it scans σ.
fn sigma_axis(ctx: &RunContext, args: &SigmaAxisArgs) -> Axis {
    let base = if ctx.sweep.axis1.kind == AxisKind::Sigma && ctx.sweep.axis2.is_none() {
        ctx.sweep.axis1
    } else {
        Axis::default_sigma()
    };
    Axis::new(
        AxisKind::Sigma,
        args.start.unwrap_or(base.start),
        args.stop.unwrap_or(base.stop),
        args.count.unwrap_or(base.count),
    )
}

fn spectrum(common: &Common, probe: &ProbeArgs, axis: &SigmaAxisArgs, observable: Observable) -> Result<Status> {
    let ctx = context(common, Some(probe))?;
    let axis = sigma_axis(&ctx, axis);
    let spec = SweepSpec::one_d(axis, observable, ctx.probe);
    spec.validate()?;
    let engine = SweepEngine::new(&ctx.params, &ctx.steady);
    let model = engine.model();
    let w = ctx.params.omega_b;

    let mut table = Table::new(
        "spectrum/1",
        &[
            ("sigma_over_omega_b", ColumnKind::Real),
            ("sigma_rad_s", ColumnKind::Real),
            ("absorption", ColumnKind::Real),
            ("dispersion", ColumnKind::Real),
            ("c1_plus", ColumnKind::Complex),
            ("t_p", ColumnKind::Complex),
            ("t_m", ColumnKind::Complex),
            ("t_ph", ColumnKind::Complex),
            ("intensity", ColumnKind::Real),
        ],
    );
    let mut absorption = Vec::new();
    let mut dispersion = Vec::new();
    for x in axis.values() {
        let probe = ctx.probe.with_sigma(x * w);
        let r = model.response(&probe)?;
        let t = model.transmission(&probe)?;
        absorption.push((x, Some(r.chi_r)));
        dispersion.push((x, Some(r.chi_i)));
        table.push(vec![
            Cell::Real(x),
            Cell::Real(x * w),
            Cell::Real(r.chi_r),
            Cell::Real(r.chi_i),
            Cell::Complex(r.c1_plus),
            Cell::Complex(t.t_p),
            Cell::Complex(t.t_m),
            Cell::Complex(t.t_ph),
            Cell::Real(t.intensity),
        ]);
    }

    let result = engine.run(&spec)?;
    let extrema = engine.locate_extrema(&result, true)?;
    let mut ext = Table::new(
        "extrema/1",
        &[
            ("observable", ColumnKind::Text),
            ("kind", ColumnKind::Text),
            ("sigma_over_omega_b", ColumnKind::Real),
            ("value", ColumnKind::Real),
            ("refined", ColumnKind::Flag),
        ],
    );
    for e in &extrema {
        let kind = match e.kind {
            ExtremumKind::Minimum => "minimum",
            ExtremumKind::Maximum => "maximum",
        };
        ext.push(vec![
            Cell::Text(observable.name()),
            Cell::Text(kind),
            Cell::Real(e.coordinate),
            Cell::Real(e.value),
            Cell::Flag(e.refined),
        ]);
    }

    let mut manifest = RunManifest::new("spectrum", &ctx.params);
    manifest.probe = Some(ctx.probe);
    manifest.sweep = Some(spec);
    manifest.steady = Some(ctx.steady.clone());
    let mut sink = Sink::new(&common.out, common.format, manifest)?;
    sink.table("spectrum", &table)?;
    sink.table("spectrum_extrema", &ext)?;
    if common.svg {
        let plot = LinePlot {
            title: format!("ξ = {}, φ = {:.4}", ctx.probe.xi, ctx.probe.phi),
            x_label: "σ/ω_b".into(),
            y_label: "ε_T".into(),
            series: vec![
                Series { label: "absorption".into(), points: absorption },
                Series { label: "dispersion".into(), points: dispersion },
            ],
        };
        sink.svg("spectrum", &plot.render())?;
    }
    report(&sink.finish("spectrum")?);
    Ok(Status::Ok)
}

fn delay(common: &Common, args: &DelayArgs) -> Result<Status> {
    let ctx = context(common, Some(&args.probe))?;
    let axis = sigma_axis(&ctx, &args.axis);
    let spec = SweepSpec::one_d(axis, Observable::GroupDelay, ctx.probe);
    spec.validate()?;
    let engine = SweepEngine::new(&ctx.params, &ctx.steady);
    let w = ctx.params.omega_b;
    let method = match args.method {
        Method::Analytic => DelayMethod::Analytic,
        Method::Fd => DelayMethod::FiniteDifference,
    };
    let mut table = Table::new(
        "delay/1",
        &[
            ("sigma_over_omega_b", ColumnKind::Real),
            ("sigma_rad_s", ColumnKind::Real),
            ("t_p", ColumnKind::Complex),
            ("intensity", ColumnKind::Real),
            ("tau_g_seconds", ColumnKind::Real),
            ("singular_flag", ColumnKind::Flag),
        ],
    );
    let mut points = Vec::new();
    for x in axis.values() {
        let t = engine.model().group_delay(&ctx.probe.with_sigma(x * w), method, w)?;
        points.push((x, t.tau_g.map(|v| v * 1e6)));
        table.push(vec![
            Cell::Real(x),
            Cell::Real(x * w),
            Cell::Complex(t.t_p),
            Cell::Real(t.intensity),
            t.tau_g.map_or(Cell::Missing, Cell::Real),
            Cell::Flag(t.singular),
        ]);
    }
    let mut manifest = RunManifest::new("delay", &ctx.params);
    manifest.probe = Some(ctx.probe);
    manifest.sweep = Some(spec);
    manifest.steady = Some(ctx.steady.clone());
    let mut sink = Sink::new(&common.out, common.format, manifest)?;
    sink.table("delay", &table)?;
    if common.svg {
        let plot = LinePlot {
            title: format!("Group delay, ξ = {}, φ = {:.4}", ctx.probe.xi, ctx.probe.phi),
            x_label: "σ/ω_b".into(),
            y_label: "τ_g (μs)".into(),
            series: vec![Series { label: "τ_g".into(), points }],
        };
        sink.svg("delay", &plot.render())?;
    }
    report(&sink.finish("delay")?);
    Ok(Status::Ok)
}

fn column_name(kind: AxisKind) -> &'static str {
    match kind {
        AxisKind::Sigma => "sigma_over_omega_b",
        AxisKind::Phi => "phi",
        AxisKind::Xi => "xi",
    }
}

fn default_axis(kind: AxisKind) -> Axis {
    crossmag::config::default_axis(kind)
}

fn sweep_spec(ctx: &RunContext, args: &Sweep2dArgs) -> Result<SweepSpec> {
    // The config's sweep is used when it is already two-dimensional.
    let (cfg1, cfg2) = match ctx.sweep.axis2 {
        Some(a2) => (ctx.sweep.axis1, a2),
        None => (default_axis(AxisKind::Phi), default_axis(AxisKind::Xi)),
    };
    let pick = |kind: Option<AxisKind>, cfg: Axis| {
        let kind = kind.unwrap_or(cfg.kind);
        if kind == cfg.kind {
            cfg
        } else {
            default_axis(kind)
        }
    };
    let a1 = pick(args.axis1, cfg1);
    let a2 = pick(args.axis2, cfg2);
    let mut fixed = ctx.probe;
    if let Some(s) = args.sigma {
        fixed.sigma = s * ctx.params.omega_b;
    }
    let spec = SweepSpec {
        axis1: Axis::new(
            a1.kind,
            args.axis1_start.unwrap_or(a1.start),
            args.axis1_stop.unwrap_or(a1.stop),
            args.axis1_count.unwrap_or(a1.count),
        ),
        axis2: Some(Axis::new(
            a2.kind,
            args.axis2_start.unwrap_or(a2.start),
            args.axis2_stop.unwrap_or(a2.stop),
            args.axis2_count.unwrap_or(a2.count),
        )),
        observable: args.observable.unwrap_or(if ctx.sweep.axis2.is_some() {
            ctx.sweep.observable
        } else {
            Observable::Absorption
        }),
        fixed,
    };
    spec.validate()?;
    Ok(spec)
}

fn sweep2d(common: &Common, args: &Sweep2dArgs) -> Result<Status> {
    let ctx = context(common, Some(&args.probe))?;
    let spec = sweep_spec(&ctx, args)?;
    let engine = SweepEngine::new(&ctx.params, &ctx.steady);
    let result = engine.run(&spec)?;
    let a1 = spec.axis1;
    let a2 = spec.axis2.expect("two-dimensional");
    let value = |v: &std::result::Result<f64, _>| v.as_ref().map_or(Cell::Missing, |v: &f64| Cell::Real(*v));

    let table = match (args.layout, common.format) {
        (Layout::Matrix, Format::Csv) => {
            let mut columns = vec![(format!("{}\\{}", column_name(a2.kind), column_name(a1.kind)), ColumnKind::Real)];
            columns.extend(a1.values().iter().map(|x| (x.to_string(), ColumnKind::Real)));
            let mut t = Table::with_columns("sweep2d-matrix/1", columns);
            for (j, y) in a2.values().into_iter().enumerate() {
                let mut row = vec![Cell::Real(y)];
                row.extend(result.nodes[j * a1.count..(j + 1) * a1.count].iter().map(|n| value(&n.value)));
                t.push(row);
            }
            t
        }
        _ => {
            let mut t = Table::new(
                "sweep2d/1",
                &[
                    (column_name(a1.kind), ColumnKind::Real),
                    (column_name(a2.kind), ColumnKind::Real),
                    (spec.observable.name(), ColumnKind::Real),
                ],
            );
            for n in &result.nodes {
                t.push(vec![Cell::Real(n.x), Cell::Real(n.y.unwrap_or_default()), value(&n.value)]);
            }
            t
        }
    };

    let mut manifest = RunManifest::new("sweep2d", &ctx.params);
    manifest.probe = Some(ctx.probe);
    manifest.sweep = Some(spec);
    manifest.steady = Some(ctx.steady.clone());
    let mut sink = Sink::new(&common.out, common.format, manifest)?;
    sink.table("sweep2d", &table)?;
    if common.svg {
        let heat = HeatMap {
            title: spec.observable.name().into(),
            x_label: column_name(a1.kind).into(),
            y_label: column_name(a2.kind).into(),
            xs: a1.values(),
            ys: a2.values(),
            values: result.nodes.iter().map(|n| n.value.as_ref().ok().copied()).collect(),
        };
        sink.svg("sweep2d", &heat.render())?;
    }
    report(&sink.finish("sweep2d")?);
    Ok(Status::Ok)
}

fn verify(common: &Common, draws: usize, seed: u64, time_domain_draws: Option<usize>) -> Result<Status> {
    let cfg = load(common)?;
    let settings = DrawSettings {
        draws,
        seed,
        time_domain_draws: time_domain_draws.unwrap_or(draws),
        ..Default::default()
    };
    let report = run_triangle(&settings)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let mut sink = Sink::new(&common.out, Format::Json, RunManifest::new("verify", &cfg.params))?;
    sink.json("verify", &report)?;
    report_files(sink.finish("verify")?);
    Ok(if report.passed { Status::Ok } else { Status::VerificationFailed })
}

fn report_files(files: Vec<std::path::PathBuf>) {
    for f in files {
        eprintln!("wrote {}", f.display());
    }
}

fn figure(common: &Common, id: figures::FigureId) -> Result<Status> {
    let fig = figures::build(id)?;
    let stem = format!("fig{}", id.name());
    let mut sink = Sink::new(&common.out, common.format, RunManifest::new(format!("fig {}", id.name()), &fig.params))?;
    sink.table(&stem, &fig.table)?;
    sink.svg(&stem, &fig.plot.render())?;
    report(&sink.finish(&stem)?);
    Ok(Status::Ok)
}
