use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use landauer_core::bounds::heat_decomposition;
use landauer_core::experiments::{
    add_guides, collisional_row, critical_a_for_q, critical_row, engineered_run, fig1_rows,
    fig2_data, CriticalRow, Fig1Curves, HeatCapacityPoint, HeatCapacityScaling, SweepRow,
};
use landauer_core::optimizer::{anneal_energies, anneal_full, AnnealConfig, AnnealResult};
use landauer_core::spectra::{
    critical_max_heat_capacity, engineered_interacting, non_interacting_qubits, EngineeredParams,
};
use landauer_core::thermo::{heat_capacity, SystemDiag};
use landauer_core::{max_cool, Policy};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{Command, Settings};
use crate::error::{CliError, CliResult, Context};
use crate::output::Sink;
use crate::svg::{Plot, Series};

pub fn run(command: Command, s: &Settings) -> CliResult<Sink> {
    let mut sink = Sink::new(command.name(), s)?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = s.threads {
            b = b.num_threads(t);
        }
        b.build()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?
    };
    pool.install(|| match command {
        Command::ErasureSweep => erasure_sweep(s, &mut sink),
        Command::Collisional => collisional(s, &mut sink),
        Command::Bounds => bounds(s, &mut sink),
        Command::HeatCapacity => heat_capacity_table(s, &mut sink),
        Command::Critical => critical(s, &mut sink, false),
        Command::Optimize => optimize(s, &mut sink),
        Command::Fig1 => fig1(s, &mut sink),
        Command::Fig2 => fig2(s, &mut sink),
        Command::Fig3 => critical(s, &mut sink, true),
    })?;
    Ok(sink)
}

/// Parallel map preserving input order.
fn par<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> CliResult<R> + Sync + Send) -> CliResult<Vec<R>> {
    items.par_iter().map(f).collect()
}

fn pairs<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn q_target(s: &Settings, n: usize) -> CliResult<f64> {
    match s.q {
        Some(q) => Ok(q),
        None => s
            .q_convention
            .target(n, s.alpha, s.beta)
            .context(|| format!("q target at n = {n}")),
    }
}

/// Groups `(curve, x, y)` triples into series, in first-seen order.
fn group(points: impl IntoIterator<Item = (String, f64, f64)>) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut order = Vec::new();
    let mut map: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (name, x, y) in points {
        if !map.contains_key(&name) {
            order.push(name.clone());
        }
        map.entry(name).or_default().push((x, y));
    }
    order
        .into_iter()
        .map(|k| {
            let v = map.remove(&k).unwrap_or_default();
            (k, v)
        })
        .collect()
}

fn sigma_plot(title: &str) -> Plot<'_> {
    Plot {
        title,
        x_label: "bath qubits n",
        y_label: "entropy production",
        log_x: true,
        log_y: true,
    }
}

fn sweep_series(rows: &[SweepRow]) -> Vec<Series> {
    group(
        rows.iter()
            .filter_map(|r| Some((r.policy.clone(), r.n as f64, r.sigma?))),
    )
    .into_iter()
    .map(|(name, pts)| {
        let series = Series::line(name.clone(), pts);
        if name.starts_with("ref_") {
            series.dashed()
        } else {
            series
        }
    })
    .collect()
}

fn erasure_sweep(s: &Settings, sink: &mut Sink) -> CliResult<()> {
    let rows = par(&pairs(&s.n_list, &s.policies), |&(n, p)| {
        engineered_run(n, s.alpha, s.beta, p)
            .map(|r| r.row)
            .context(|| format!("erasure-sweep n = {n} policy = {p}"))
    })?;
    sink.table("erasure_sweep", &rows)?;
    if sink.wants_svg() {
        let mut series = sweep_series(&rows);
        let ub: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.n as f64, r.ub_quadratic?)))
            .collect();
        if !ub.is_empty() {
            let mut ub = ub;
            ub.dedup();
            series.push(Series::line("2pi^2/n^2", ub).dashed());
        }
        sink.svg("erasure_sweep", &sigma_plot("Engineered-bath erasure").render(&series))?;
    }
    Ok(())
}

fn collisional(s: &Settings, sink: &mut Sink) -> CliResult<()> {
    let rows = par(&pairs(&s.n_list, &s.families), |&(n, f)| {
        let q = q_target(s, n)?;
        collisional_row(f, n, s.alpha, s.beta, q).context(|| format!("collisional n = {n} family = {f}"))
    })?;
    sink.table("collisional", &rows)?;
    if sink.wants_svg() {
        let mut series = sweep_series(&rows);
        let mut floor: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.n as f64, r.lb_nonint?)))
            .collect();
        floor.dedup_by(|a, b| a.0 == b.0);
        series.push(Series::line("non-interacting floor", floor).dashed());
        sink.svg("collisional", &sigma_plot("Collisional erasure").render(&series))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsRow {
    n: usize,
    alpha: f64,
    beta: f64,
    policy: String,
    q: f64,
    #[serde(rename = "dS_system")]
    ds_system: f64,
    sigma: f64,
    beta_star: f64,
    lb_nonint: Option<f64>,
    lb_rw: Option<f64>,
    lb_heatcap: Option<f64>,
    ub_quadratic: Option<f64>,
    #[serde(rename = "betaQ")]
    beta_q: f64,
    term_a: Option<f64>,
    term_b: Option<f64>,
    term_c: Option<f64>,
    term_d: Option<f64>,
}

fn bounds(s: &Settings, sink: &mut Sink) -> CliResult<()> {
    let rows = par(&pairs(&s.n_list, &s.policies), |&(n, p)| {
        let ctx = || format!("bounds n = {n} policy = {p}");
        let r = engineered_run(n, s.alpha, s.beta, p).context(ctx)?;
        // The four-term heat split describes the level-shift permutation only.
        let terms = match p {
            Policy::LevelShift => Some(
                EngineeredParams::new(n, s.alpha, s.beta)
                    .and_then(|params| heat_decomposition(&params))
                    .context(ctx)?,
            ),
            Policy::Sorted => None,
        };
        let o = r.outcome;
        Ok(BoundsRow {
            n,
            alpha: s.alpha,
            beta: s.beta,
            policy: p.name().to_string(),
            q: o.q_excited,
            ds_system: o.ds_system,
            sigma: o.sigma,
            beta_star: r.beta_star,
            lb_nonint: r.row.lb_nonint,
            lb_rw: r.row.lb_rw,
            lb_heatcap: r.row.lb_heatcap,
            ub_quadratic: r.row.ub_quadratic,
            beta_q: o.beta_q(),
            term_a: terms.as_ref().map(|t| t.a),
            term_b: terms.as_ref().map(|t| t.b),
            term_c: terms.as_ref().map(|t| t.c),
            term_d: terms.as_ref().map(|t| t.d),
        })
    })?;
    sink.table("bounds", &rows)
}

#[derive(Serialize)]
struct HeatCapacityRow {
    family: &'static str,
    n: usize,
    beta: f64,
    a: Option<f64>,
    c: f64,
    c_per_n: f64,
    c_per_n2: f64,
    reference: Option<f64>,
}

fn heat_capacity_table(s: &Settings, sink: &mut Sink) -> CliResult<()> {
    let per_n = par(&s.n_list, |&n| {
        let ctx = || format!("heat-capacity n = {n}");
        let nf = n as f64;
        let row = |family, a, c: f64, reference| HeatCapacityRow {
            family,
            n,
            beta: s.beta,
            a,
            c,
            c_per_n: c / nf,
            c_per_n2: c / (nf * nf),
            reference,
        };
        let eng = EngineeredParams::new(n, s.alpha, s.beta)
            .and_then(|p| engineered_interacting(&p))
            .and_then(|sp| heat_capacity(&sp, s.beta))
            .context(ctx)?;
        let free = non_interacting_qubits(n, 1.0 / s.beta)
            .and_then(|sp| heat_capacity(&sp, s.beta))
            .context(ctx)?;
        let (a, crit) = critical_max_heat_capacity(n, s.beta).context(ctx)?;
        Ok(vec![
            row("engineered", None, eng, None),
            row("noninteracting", None, free, None),
            row("critical_max", Some(a), crit, Some(0.25 * nf * nf * LN_2 * LN_2)),
        ])
    })?;
    let rows: Vec<HeatCapacityRow> = per_n.into_iter().flatten().collect();
    sink.table("heat_capacity", &rows)
}

fn critical(s: &Settings, sink: &mut Sink, guides: bool) -> CliResult<()> {
    let mut rows: Vec<CriticalRow> = par(&s.n_list, |&n| {
        let ctx = || format!("critical n = {n}");
        let a = match s.a {
            Some(a) => a,
            None => critical_a_for_q(n, s.beta, q_target(s, n)?).context(ctx)?,
        };
        critical_row(n, a, s.beta).context(ctx)
    })?;
    let name = if guides {
        add_guides(&mut rows);
        "fig3"
    } else {
        "critical"
    };
    sink.table(name, &rows)?;
    if sink.wants_svg() {
        let pick = |f: fn(&CriticalRow) -> Option<f64>| -> Vec<(f64, f64)> {
            rows.iter().filter_map(|r| Some((r.n as f64, f(r)?))).collect()
        };
        let mut series = vec![Series::line("critical sigma", pick(|r| Some(r.sigma)))];
        if guides {
            series.push(Series::line("1/n", pick(|r| r.guide_linear)).dashed());
            series.push(Series::line("1/n^2", pick(|r| r.guide_quadratic)).dashed());
        }
        sink.svg(name, &sigma_plot("Entropy production at criticality").render(&series))?;
    }
    Ok(())
}

fn fig1(s: &Settings, sink: &mut Sink) -> CliResult<()> {
    let curves = Fig1Curves {
        policies: s.policies.clone(),
        families: s.families.clone(),
        references: s.references,
    };
    let rows: Vec<SweepRow> = par(&s.n_list, |&n| {
        fig1_rows(n, s.alpha, s.beta, s.q_convention, &curves).context(|| format!("fig1 n = {n}"))
    })?
    .into_iter()
    .flatten()
    .collect();
    sink.table("fig1", &rows)?;
    sink.svg("fig1", &sigma_plot("Landauer erasure").render(&sweep_series(&rows)))
}

fn fig2(s: &Settings, sink: &mut Sink) -> CliResult<()> {
    let parts = par(&s.n_list, |&n| {
        fig2_data(&[n], s.alpha, s.beta, s.grid_points).context(|| format!("fig2 n = {n}"))
    })?;
    let mut curves: Vec<HeatCapacityPoint> = Vec::new();
    let mut scaling: Vec<HeatCapacityScaling> = Vec::new();
    for p in parts {
        curves.extend(p.curves);
        scaling.extend(p.scaling);
    }
    sink.table("fig2_curves", &curves)?;
    sink.table("fig2_scaling", &scaling)?;
    if sink.wants_svg() {
        let main: Vec<Series> = group(
            curves
                .iter()
                .map(|p| (format!("{} n={}", p.family.name(), p.n), p.gamma, p.c_per_n)),
        )
        .into_iter()
        .map(|(name, pts)| Series::line(name, pts).plain())
        .collect();
        let panel = Plot {
            title: "Heat capacity per qubit",
            x_label: "inverse temperature",
            y_label: "C/n",
            log_x: false,
            log_y: false,
        };
        sink.svg("fig2", &panel.render(&main))?;
        let inset: Vec<Series> = group(scaling.iter().map(|p| (p.family.name().to_string(), p.n as f64, p.c)))
            .into_iter()
            .map(|(name, pts)| Series::line(name, pts))
            .collect();
        let panel = Plot {
            title: "Heat capacity at the design temperature",
            x_label: "bath qubits n",
            y_label: "C",
            log_x: true,
            log_y: true,
        };
        sink.svg("fig2_scaling", &panel.render(&inset))?;
    }
    Ok(())
}

fn ansatz_degeneracies(n: usize) -> Vec<BigUint> {
    (0..=n)
        .map(|i| if i == 0 { BigUint::from(1u8) } else { BigUint::from(1u8) << (i - 1) })
        .collect()
}

fn optimize(s: &Settings, sink: &mut Sink) -> CliResult<()> {
    let n = s.n_list[0];
    let q = q_target(s, n)?;
    let seeds: Vec<u64> = (0..s.chains as u64).map(|k| s.seed.wrapping_add(k)).collect();
    let results: Vec<(u64, AnnealResult)> = par(&seeds, |&seed| {
        let cfg = AnnealConfig {
            beta: s.beta,
            ..AnnealConfig::for_target(q, s.steps, seed)
        };
        let r = if s.full {
            anneal_full(n, &cfg)
        } else {
            anneal_energies(n, &ansatz_degeneracies(n), &cfg)
        };
        r.map(|r| (seed, r)).context(|| format!("optimize n = {n} seed = {seed}"))
    })?;
    let (seed, best) = results
        .into_iter()
        .reduce(|a, b| if b.1.objective < a.1.objective { b } else { a })
        .expect("at least one chain");

    let ansatz = EngineeredParams::new(n, s.alpha, s.beta)
        .and_then(|p| engineered_interacting(&p))
        .and_then(|sp| max_cool(&SystemDiag::maximally_mixed(2), &sp, s.beta, Policy::Sorted))
        .map(|(_, o)| o)
        .ok();
    let summary = json!({
        "n": n,
        "target_q": q,
        "seed": seed,
        "chains": s.chains,
        "steps": s.steps,
        "full": s.full,
        "objective": best.objective,
        "initial_objective": best.initial_objective,
        "improved": best.improved,
        "accepted": best.accepted,
        "ln_r": best.ln_r,
        "degeneracies": best.degeneracies.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "outcome": best.outcome,
        "ansatz_sorted": ansatz,
    });
    if s.out.is_some() {
        sink.table("optimize_log", &best.log)?;
        let doc = serde_json::to_value(best.spectrum.to_document(Some(s.beta))).expect("spectrum serializes");
        sink.document("optimize_spectrum", &doc)?;
    }
    let summary = sink.envelope("optimize_summary", summary);
    sink.document("optimize_summary", &summary)
}
