//! One function per subcommand. Each returns a [`Report`] that can be
//! rendered as JSON or CSV.

use std::path::Path;

use ballotflow::outcome::outcome_from_partition;
use ballotflow::{
    aggregate_n, dead_zone_sigma_bound, estimate_sigma_historic, implied_sigma,
    max_attainable_support, ordering_partition, simplex_grid, simulate_paths, sweep_positions,
    sweep_priors, sweep_sigma, winprob_paths, InfoSchedule, PollSeries, Ranking, SourceSet,
    StrategyError, SweepTable,
};
use serde_json::{json, Value};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::output::{float, json_float, json_floats, CsvDoc, Report};

pub const SPECTRUM_CONVENTION: &str =
    "candidates are listed by position: if x_j < x_k then candidate j is placed politically to the left of candidate k";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    Sigma,
    Priors,
    Positions,
}

fn ranking_names(r: &Ranking, names: &[String]) -> Vec<String> {
    r.as_slice().iter().map(|&k| names[k].clone()).collect()
}

fn ranking_label(r: &Ranking, names: &[String]) -> String {
    ranking_names(r, names).join(" > ")
}

fn schedule_json(s: &InfoSchedule) -> Value {
    match s {
        InfoSchedule::Constant(sigma) => json_float(*sigma),
        InfoSchedule::PiecewiseConstant { breakpoints, rates } => {
            json!({ "breakpoints": json_floats(breakpoints), "rates": json_floats(rates) })
        }
    }
}

fn schedule_comment(s: &InfoSchedule) -> String {
    match s {
        InfoSchedule::Constant(sigma) => format!("sigma={}", float(*sigma)),
        InfoSchedule::PiecewiseConstant { breakpoints, rates } => format!(
            "sigma breakpoints=[{}] rates=[{}]",
            breakpoints
                .iter()
                .map(|&b| float(b))
                .collect::<Vec<_>>()
                .join(" "),
            rates
                .iter()
                .map(|&r| float(r))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    }
}

fn scenario_comments(doc: &mut CsvDoc, s: &Scenario) {
    doc.comment(SPECTRUM_CONVENTION);
    for (k, name) in s.names.iter().enumerate() {
        doc.comment(format!(
            "candidate {name}: position={} prior={}",
            float(s.model.positions()[k]),
            float(s.model.priors()[k])
        ));
    }
    doc.comment(format!("horizon_years={}", float(s.model.horizon())));
    doc.comment(schedule_comment(s.model.schedule()));
}

pub fn forecast(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let s = cfg.scenario()?;
    let m = &s.model;
    let partition = ordering_partition(m);
    let out = outcome_from_partition(m, &partition);
    let sigma = m.schedule().constant_rate();
    let total = out.total();

    let centre_bound = if m.num_candidates() == 3 && m.priors().iter().all(|&p| p > 0.0) {
        let b = dead_zone_sigma_bound(m.positions(), m.priors(), m.horizon())?;
        Some(json!({
            "candidate": s.names[1],
            "sigma_bound": b.sigma.map(json_float),
            "closed_form": b.closed_form.map(json_float),
        }))
    } else {
        None
    };

    let candidates: Vec<Value> = (0..m.num_candidates())
        .map(|k| {
            json!({
                "name": s.names[k],
                "position": json_float(m.positions()[k]),
                "prior": json_float(m.priors()[k]),
                "win_probability": json_float(out.win[k]),
                "dead_zone": !partition.can_win(k),
            })
        })
        .collect();
    let orderings: Vec<Value> = out
        .orderings
        .iter()
        .map(|o| json!({ "ranking": ranking_names(&o.ranking, &s.names), "probability": json_float(o.probability) }))
        .collect();
    let cells: Vec<Value> = partition
        .cells()
        .iter()
        .map(|c| {
            json!({
                "lower_y": json_float(c.lower),
                "upper_y": json_float(c.upper),
                "lower_xi": sigma.map(|v| json_float(c.lower / v)),
                "upper_xi": sigma.map(|v| json_float(c.upper / v)),
                "ranking": ranking_names(&c.ranking, &s.names),
            })
        })
        .collect();
    let json = json!({
        "convention": SPECTRUM_CONVENTION,
        "horizon_years": json_float(m.horizon()),
        "sigma": schedule_json(m.schedule()),
        "terminal_variance": json_float(m.terminal_variance()),
        "candidates": candidates,
        "orderings": orderings,
        "ordering_sum": json_float(total),
        "degenerate_tie": out.degenerate_tie,
        "partition": cells,
        "centre_dead_zone": centre_bound,
    });

    let mut csv = CsvDoc::new();
    scenario_comments(&mut csv, &s);
    csv.comment(format!("ordering_sum={}", float(total)));
    if out.degenerate_tie {
        csv.comment("warning: two crossing thresholds coincide");
    }
    csv.record(["outcome", "probability"]);
    for (k, name) in s.names.iter().enumerate() {
        csv.record([format!("win:{name}"), float(out.win[k])]);
    }
    for o in &out.orderings {
        csv.record([
            format!("rank:{}", ranking_label(&o.ranking, &s.names)),
            float(o.probability),
        ]);
    }
    Ok(Report { json, csv })
}

fn require_grid(cfg: &ScenarioConfig) -> Result<Vec<f64>, CliError> {
    cfg.sigma_grid()?
        .ok_or(CliError::MissingBlock("sigma_grid"))
}

fn sweep_json(axis: &str, table: &SweepTable, names: &[String], value_key: &str) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let mut row = serde_json::Map::new();
            for (p, v) in table.parameters.iter().zip(&r.params) {
                row.insert(p.clone(), json_float(*v));
            }
            row.insert(value_key.into(), json_floats(&r.values));
            if !r.cannot_win.is_empty() {
                row.insert("cannot_win".into(), json!(r.cannot_win));
            }
            Value::Object(row)
        })
        .collect();
    json!({ "axis": axis, "candidates": names, "rows": rows })
}

pub fn sweep(cfg: &ScenarioConfig, axis: Axis) -> Result<Report, CliError> {
    let s = cfg.scenario()?;
    let m = &s.model;
    let mut csv = CsvDoc::new();
    scenario_comments(&mut csv, &s);
    match axis {
        Axis::Sigma => {
            let grid = require_grid(cfg)?;
            let table = sweep_sigma(m, &grid).map_err(|e| grid_error("sigma_grid", e))?;
            csv.comment("axis=sigma");
            csv.record(
                std::iter::once("sigma".to_string())
                    .chain(s.names.iter().map(|n| format!("p_win_{n}"))),
            );
            for r in &table.rows {
                csv.record(
                    std::iter::once(float(r.params[0])).chain(r.values.iter().map(|&v| float(v))),
                );
            }
            Ok(Report {
                json: sweep_json("sigma", &table, &s.names, "p_win"),
                csv,
            })
        }
        Axis::Priors => {
            let block = cfg
                .prior_grid
                .as_ref()
                .ok_or(CliError::MissingBlock("prior_grid"))?;
            let divisions = (1.0 / block.step).round();
            if !(block.step > 0.0
                && divisions >= 1.0
                && (divisions * block.step - 1.0).abs() < 1e-9)
            {
                return Err(CliError::config("prior_grid.step", "must divide 1 evenly"));
            }
            let sigmas = match &block.sigmas {
                Some(v) if !v.is_empty() => v.clone(),
                Some(_) => return Err(CliError::config("prior_grid.sigmas", "list is empty")),
                None => vec![m.schedule().constant_rate().ok_or_else(|| {
                    CliError::config("prior_grid.sigmas", "required when sigma is piecewise")
                })?],
            };
            let n = m.num_candidates();
            let grid = simplex_grid(n, divisions as usize, block.min_prior);
            let table = sweep_priors(m.positions(), m.horizon(), &sigmas, &grid)
                .map_err(|e| grid_error("prior_grid.sigmas", e))?;
            csv.comment(format!(
                "axis=priors step={} min_prior={}",
                float(block.step),
                float(block.min_prior)
            ));
            let header: Vec<String> = (1..=n)
                .map(|i| format!("p{i}"))
                .chain(std::iter::once("sigma".to_string()))
                .chain(s.names.iter().map(|name| format!("p_win_{name}")))
                .chain(s.names.iter().map(|name| format!("cannot_win_{name}")))
                .collect();
            csv.record(header);
            for r in &table.rows {
                csv.record(
                    r.params
                        .iter()
                        .chain(&r.values)
                        .map(|&v| float(v))
                        .chain(r.cannot_win.iter().map(|&d| (d as u8).to_string())),
                );
            }
            Ok(Report {
                json: sweep_json("priors", &table, &s.names, "p_win"),
                csv,
            })
        }
        Axis::Positions => {
            let grid = require_grid(cfg)?;
            let raw = cfg
                .position_variants
                .as_ref()
                .ok_or(CliError::MissingBlock("position_variants"))?;
            let mut variants = Vec::with_capacity(raw.len());
            for (i, v) in raw.iter().enumerate() {
                if v.len() != m.num_candidates() {
                    return Err(CliError::config(
                        format!("position_variants[{i}]"),
                        format!("expected {} positions, got {}", m.num_candidates(), v.len()),
                    ));
                }
                let sorted = s.reorder(v);
                m.with_positions(sorted.clone())
                    .map_err(|e| CliError::config(format!("position_variants[{i}]"), e))?;
                variants.push(sorted);
            }
            let table =
                sweep_positions(m, &variants, &grid).map_err(|e| grid_error("sigma_grid", e))?;
            csv.comment("axis=positions; values are win probability under the variant minus under the base positions");
            csv.record(
                std::iter::once("sigma".to_string())
                    .chain(s.names.iter().map(|n| format!("delta_{n}"))),
            );
            let mut current = None;
            for r in &table.rows {
                let v = r.params[0] as usize;
                if current != Some(v) {
                    let pos: Vec<String> = variants[v].iter().map(|&x| float(x)).collect();
                    csv.comment(format!("variant {v}: positions=({})", pos.join(",")));
                    current = Some(v);
                }
                csv.record(
                    std::iter::once(float(r.params[1])).chain(r.values.iter().map(|&d| float(d))),
                );
            }
            let mut json = sweep_json("positions", &table, &s.names, "delta");
            json["variants"] = Value::Array(variants.iter().map(|v| json_floats(v)).collect());
            Ok(Report { json, csv })
        }
    }
}

fn grid_error(field: &str, e: StrategyError) -> CliError {
    match e {
        StrategyError::Model(m) => CliError::config(field, m),
        other => other.into(),
    }
}

pub fn simulate(cfg: &ScenarioConfig, seed: Option<u64>) -> Result<Report, CliError> {
    let s = cfg.scenario()?;
    let block = cfg
        .simulation
        .as_ref()
        .ok_or(CliError::MissingBlock("simulation"))?;
    let seed = seed.unwrap_or(block.seed);
    let ensemble = simulate_paths(&s.model, block.n_paths, block.n_steps, seed)?;
    let bundle = winprob_paths(&ensemble, &s.model)?;
    let wins = bundle
        .win_probability
        .as_ref()
        .expect("win paths requested");

    let mut csv = CsvDoc::new();
    scenario_comments(&mut csv, &s);
    csv.comment(format!(
        "seed={seed} n_paths={} n_steps={}",
        block.n_paths, block.n_steps
    ));
    let header: Vec<String> = ["path", "t", "latent"]
        .into_iter()
        .map(String::from)
        .chain(s.names.iter().map(|n| format!("pi_{n}")))
        .chain(s.names.iter().map(|n| format!("win_{n}")))
        .collect();
    csv.record(header);
    let mut paths = Vec::with_capacity(ensemble.n_paths);
    for (i, (support, win)) in bundle.support.iter().zip(wins).enumerate() {
        let latent = &s.names[ensemble.latent[i]];
        for ((&t, pi), w) in bundle.times.iter().zip(support).zip(win) {
            csv.record(
                [i.to_string(), float(t), latent.clone()]
                    .into_iter()
                    .chain(pi.iter().map(|&v| float(v)))
                    .chain(w.iter().map(|&v| float(v))),
            );
        }
        paths.push(json!({
            "latent": latent,
            "signal": json_floats(&ensemble.signal_paths[i]),
            "support": support.iter().map(|r| json_floats(r)).collect::<Vec<_>>(),
            "win_probability": win.iter().map(|r| json_floats(r)).collect::<Vec<_>>(),
        }));
    }
    let json = json!({
        "seed": seed,
        "n_paths": ensemble.n_paths,
        "n_steps": ensemble.n_steps,
        "candidates": s.names,
        "times": json_floats(&bundle.times),
        "paths": paths,
    });
    Ok(Report { json, csv })
}

pub fn deadzone(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let s = cfg.scenario()?;
    let m = &s.model;
    let partition = ordering_partition(m);
    let dead: Vec<bool> = (0..m.num_candidates())
        .map(|k| !partition.can_win(k))
        .collect();

    let mut csv = CsvDoc::new();
    scenario_comments(&mut csv, &s);
    let centre = if m.num_candidates() == 3 {
        match dead_zone_sigma_bound(m.positions(), m.priors(), m.horizon()) {
            Ok(b) => {
                let by_bound = match (m.schedule().constant_rate(), b.closed_form) {
                    (Some(sigma), Some(bound)) => Some(sigma < bound),
                    (Some(_), None) => Some(false),
                    (None, _) => None,
                };
                csv.comment(format!(
                    "centre sigma_bound={} closed_form={}",
                    b.sigma.map_or("none".into(), float),
                    b.closed_form.map_or("none".into(), float)
                ));
                json!({
                    "candidate": s.names[1],
                    "sigma_bound": b.sigma.map(json_float),
                    "closed_form": b.closed_form.map(json_float),
                    "is_dead_by_bound": by_bound,
                })
            }
            Err(StrategyError::ZeroPrior(k)) => {
                json!({ "unavailable": format!("{} has zero support", s.names[k]) })
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        Value::Null
    };
    csv.record(["candidate", "is_dead"]);
    for (name, &d) in s.names.iter().zip(&dead) {
        csv.record([name.clone(), d.to_string()]);
    }
    let json = json!({
        "convention": SPECTRUM_CONVENTION,
        "sigma": schedule_json(m.schedule()),
        "candidates": s.names.iter().zip(&dead).map(|(n, &d)| json!({ "name": n, "is_dead": d })).collect::<Vec<_>>(),
        "centre": centre,
    });
    Ok(Report { json, csv })
}

pub fn maxsupport(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let s = cfg.scenario()?;
    let grid = cfg
        .sigma_grid()?
        .unwrap_or_else(ballotflow::default_sigma_grid);
    let n = s.model.num_candidates();

    let mut csv = CsvDoc::new();
    scenario_comments(&mut csv, &s);
    csv.comment(
        "pi_max is the largest attainable election-day support; xi_star is where it is reached",
    );
    csv.record(
        std::iter::once("sigma".to_string())
            .chain(s.names.iter().map(|x| format!("pi_max_{x}")))
            .chain(s.names.iter().map(|x| format!("xi_star_{x}"))),
    );
    let mut rows = Vec::with_capacity(grid.len());
    for &sigma in &grid {
        let m = s
            .model
            .with_schedule(InfoSchedule::Constant(sigma))
            .map_err(|e| CliError::config("sigma_grid", e))?;
        let reports = (0..n)
            .map(|k| max_attainable_support(&m, k))
            .collect::<Result<Vec<_>, _>>()?;
        csv.record(
            std::iter::once(float(sigma))
                .chain(reports.iter().map(|r| float(r.pi_max)))
                .chain(reports.iter().map(|r| float(r.xi_star.unwrap_or(f64::NAN)))),
        );
        rows.push(json!({
            "sigma": json_float(sigma),
            "candidates": reports.iter().map(|r| json!({
                "name": s.names[r.candidate],
                "pi_max": json_float(r.pi_max),
                "y_star": json_float(r.y_star),
                "xi_star": r.xi_star.map(json_float),
                "residual": json_float(r.residual),
            })).collect::<Vec<_>>(),
        }));
    }
    Ok(Report {
        json: json!({ "candidates": s.names, "rows": rows }),
        csv,
    })
}

pub fn aggregate(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let block = cfg
        .sources
        .as_ref()
        .ok_or(CliError::MissingBlock("sources"))?;
    let n = block.rates.len();
    let correlation = block.correlation.clone().unwrap_or_else(|| {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    });
    let sources = SourceSet::new(block.rates.clone(), correlation)?;
    let channel = aggregate_n(&sources)?;

    let mut csv = CsvDoc::new();
    csv.comment(format!("effective_sigma={}", float(channel.sigma)));
    csv.record(["source", "rate", "noise_weight"]);
    for (i, (&r, &w)) in block.rates.iter().zip(&channel.noise_weights).enumerate() {
        csv.record([i.to_string(), float(r), float(w)]);
    }
    let json = json!({
        "rates": json_floats(&block.rates),
        "sigma": json_float(channel.sigma),
        "noise_weights": json_floats(&channel.noise_weights),
        "rate_sensitivity": json_floats(channel.rate_sensitivity()),
    });
    Ok(Report { json, csv })
}

/// Reads a poll CSV with header `t,<name>,...` into position order.
pub fn read_poll_csv(path: &Path, s: &Scenario) -> Result<PollSeries, CliError> {
    let data_err = |row: usize, message: String| CliError::Data {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => data_err(1, format!("{other:?}")),
        })?;
    let header = reader
        .headers()
        .map_err(|e| data_err(1, e.to_string()))?
        .clone();
    if header.get(0) != Some("t") {
        return Err(data_err(1, "first column must be `t`".into()));
    }
    let mut columns = Vec::with_capacity(s.names.len());
    for name in &s.names {
        let col = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data_err(1, format!("no column for candidate `{name}`")))?;
        columns.push(col);
    }
    if header.len() != s.names.len() + 1 {
        return Err(data_err(
            1,
            format!("expected {} columns", s.names.len() + 1),
        ));
    }

    let mut times = Vec::new();
    let mut supports = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            data_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse = |col: usize| -> Result<f64, CliError> {
            record[col]
                .parse::<f64>()
                .map_err(|_| data_err(line, format!("`{}` is not a number", &record[col])))
        };
        times.push(parse(0)?);
        supports.push(
            columns
                .iter()
                .map(|&c| parse(c))
                .collect::<Result<Vec<_>, _>>()?,
        );
        lines.push(line);
    }
    PollSeries::new(times, supports, s.model.positions().to_vec()).map_err(|e| {
        use ballotflow::CalibrationError as E;
        match e {
            E::NonIncreasingTimes { row } | E::InvalidSupport { row } => {
                data_err(lines[row], e.to_string())
            }
            other => data_err(lines.last().copied().unwrap_or(1), other.to_string()),
        }
    })
}

pub fn calibrate(cfg: &ScenarioConfig, data: Option<&Path>) -> Result<Report, CliError> {
    let s = cfg.scenario()?;
    let target = cfg.calibration.as_ref().and_then(|c| c.target.as_ref());
    if data.is_none() && target.is_none() {
        return Err(CliError::MissingBlock(
            "calibration.target (or pass --data)",
        ));
    }
    let mut csv = CsvDoc::new();
    scenario_comments(&mut csv, &s);
    csv.record(["quantity", "value"]);

    let historic = match data {
        Some(path) => {
            let series = read_poll_csv(path, &s)?;
            let est = estimate_sigma_historic(&series);
            if est.degenerate {
                eprintln!("warning: supports never change; the historic estimate is 0");
            }
            csv.record(["historic_sigma".to_string(), float(est.sigma)]);
            csv.record(["historic_std_error".to_string(), float(est.std_error)]);
            csv.record([
                "effective_increments".to_string(),
                float(est.effective_increments),
            ]);
            csv.record(["degenerate".to_string(), est.degenerate.to_string()]);
            json!({
                "sigma": json_float(est.sigma),
                "std_error": json_float(est.std_error),
                "n_increments": est.n_increments,
                "effective_increments": json_float(est.effective_increments),
                "degenerate": est.degenerate,
            })
        }
        None => Value::Null,
    };

    let implied = match target {
        Some(t) => {
            let k = s.index_of(&t.candidate).ok_or_else(|| {
                CliError::config(
                    "calibration.target.candidate",
                    format!("unknown candidate `{}`", t.candidate),
                )
            })?;
            let r = implied_sigma(&s.model, k, t.probability).map_err(|e| match e {
                ballotflow::CalibrationError::InvalidTarget(_) => {
                    CliError::config("calibration.target.probability", e)
                }
                other => other.into(),
            })?;
            for (i, &v) in r.solutions.iter().enumerate() {
                csv.record([format!("implied_sigma_{i}"), float(v)]);
            }
            for (i, p) in r.plateaus.iter().enumerate() {
                csv.record([format!("plateau_{i}_lower"), float(p.lower)]);
                csv.record([format!("plateau_{i}_upper"), float(p.upper)]);
            }
            json!({
                "candidate": t.candidate,
                "target": json_float(t.probability),
                "solutions": json_floats(&r.solutions),
                "plateaus": r.plateaus.iter().map(|p| json!({ "lower": json_float(p.lower), "upper": json_float(p.upper) })).collect::<Vec<_>>(),
            })
        }
        None => Value::Null,
    };
    Ok(Report {
        json: json!({ "historic": historic, "implied": implied }),
        csv,
    })
}
