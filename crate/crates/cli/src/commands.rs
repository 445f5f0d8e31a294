use std::path::Path;

use rdeq::info::{CondPmf, Pmf};
use rdeq::orderings::{self, classify_bec_bsc, Certificate, OrderingVerdict, Regime};
use rdeq::regions::{
    self, evaluate_inner, evaluate_outer, optimize_inner_with, optimize_outer, optimize_outer_with, prop3_max_delta,
    AuxChannelSystem, AuxSourceSystem, ChannelAuxiliaries, OptimizerConfig, RegionError, RegionOptimum,
};
use rdeq::sim::{self, SchemeRates, SimConfig, SimReport};
use serde_json::{json, Value};

use crate::model::{self, Model};
use crate::output::{self, csv_number, round};
use crate::{
    Bound, ClassifyArgs, CliError, ModelArgs, OrderArgs, Pair, RegionArgs, Relation, ReproArgs, SimArgs, SimCommand,
    SweepArgs, SweepBound,
};

const BISECTION_STEPS: usize = 60;

fn config_json(c: &OptimizerConfig) -> Value {
    json!({
        "u_card": c.u_card,
        "v_card": c.v_card,
        "q_card": c.q_card,
        "t_card": c.t_card,
        "restarts": c.restarts,
        "grid_resolution": c.grid_resolution,
        "max_iterations": c.max_iterations,
        "tolerance": c.tolerance,
    })
}

fn load_model(args: &ModelArgs) -> Result<Model, CliError> {
    model::load(&args.model, args.beta, args.eps, args.zeta)
}

fn builtin_params(m: &Model, what: &str) -> Result<(f64, f64, f64), CliError> {
    m.builtin.ok_or_else(|| CliError::Usage(format!("{what} needs the {} model", model::BUILTIN)))
}

/// Optimum of `bound` at one point; `starts` seed the inner search.
fn solve(
    m: &Model,
    bound: Bound,
    k: f64,
    d: f64,
    config: &OptimizerConfig,
    starts: &[(AuxSourceSystem, AuxChannelSystem)],
) -> Result<RegionOptimum, RegionError> {
    match bound {
        Bound::Inner => optimize_inner_with(&m.source, &m.channel, k, d, config, ChannelAuxiliaries::Free, starts),
        Bound::Outer => {
            let seed = match optimize_inner_with(&m.source, &m.channel, k, d, config, ChannelAuxiliaries::Free, starts)
            {
                Ok(o) => vec![(o.source, o.channel)],
                Err(RegionError::Infeasible { .. }) => vec![],
                Err(e) => return Err(e),
            };
            optimize_outer_with(&m.source, &m.channel, k, d, config, &seed)
        }
        Bound::Prop1 => regions::prop1_max_delta(&m.source, &m.channel, k, d, config),
        Bound::Prop2 => regions::prop2_max_delta(&m.source, &m.channel, k, d, config),
        Bound::Prop3 => unreachable!("closed form handled by the caller"),
    }
}

fn check_prop3(m: &Model, k: f64, d: f64) -> Result<(f64, f64, f64), CliError> {
    let params = builtin_params(m, "prop3")?;
    if k != 1.0 || d != 0.0 {
        return Err(CliError::Usage(format!("prop3 is defined for k = 1 and D = 0, got k = {k}, D = {d}")));
    }
    Ok(params)
}

/// Whether the ordering a special-case bound relies on holds for `m`.
fn applicability(m: &Model, bound: Bound) -> Result<Option<bool>, CliError> {
    let grid = orderings::DEFAULT_LESS_NOISY_GRID;
    Ok(match bound {
        Bound::Prop1 => Some(orderings::is_less_noisy(&m.source.b_given_a(), &m.source.e_given_a(), grid)?.holds),
        Bound::Prop2 => Some(orderings::is_less_noisy(&m.channel.z_given_x(), &m.channel.y_given_x(), grid)?.holds),
        _ => None,
    })
}

fn bound_name(b: Bound) -> &'static str {
    match b {
        Bound::Inner => "inner",
        Bound::Outer => "outer",
        Bound::Prop1 => "prop1",
        Bound::Prop2 => "prop2",
        Bound::Prop3 => "prop3",
    }
}

pub fn region(args: &RegionArgs) -> Result<Value, CliError> {
    let m = load_model(&args.model)?;
    let config = args.optimizer.config();
    let inputs = json!({
        "model": m.description,
        "bound": bound_name(args.bound),
        "k": args.k,
        "D": args.d,
        "eval_constant": args.eval_constant,
    });
    let results = if args.bound == Bound::Prop3 {
        let (beta, eps, zeta) = check_prop3(&m, args.k, args.d)?;
        if args.eval_constant {
            let v = regions::prop3_delta(beta, eps, zeta, 0.5, 0.5)?;
            json!({ "delta": round(v.delta), "constraint_ok": v.constraint_ok, "u": 0.5, "q": 0.5 })
        } else {
            let o = prop3_max_delta(beta, eps, zeta, config.grid_resolution)?;
            json!({ "delta": round(o.delta), "u": round(o.u), "q": round(o.q) })
        }
    } else if args.eval_constant {
        constant_evaluation(&m, args.bound, args.k)?
    } else {
        let o = solve(&m, args.bound, args.k, args.d, &config, &[])?;
        let mut r = output::optimum(args.k, args.d, &o);
        if let Some(holds) = applicability(&m, args.bound)? {
            r["ordering_holds"] = json!(holds);
        }
        r
    };
    let seed = (args.bound != Bound::Prop3 && !args.eval_constant).then_some(config.seed);
    Ok(output::record("region", inputs, results, output::provenance(seed, config_json(&config))))
}

fn constant_evaluation(m: &Model, bound: Bound, k: f64) -> Result<Value, CliError> {
    let source = AuxSourceSystem::constant(&m.source)?;
    let channel = AuxChannelSystem::constant(Pmf::uniform(m.channel.x_size())?)?;
    Ok(match bound {
        Bound::Outer => {
            let e = evaluate_outer(&m.source, &m.channel, &source.to_joint(), &channel, k)?;
            json!({
                "delta": round(e.delta_bound),
                "distortion": round(e.distortion),
                "rate_ok": e.rate_ok,
                "rate_lhs": round(e.rate_lhs),
                "rate_rhs": round(e.rate_rhs),
            })
        }
        _ => {
            let e = evaluate_inner(&m.source, &m.channel, &source, &channel, k)?;
            json!({
                "delta": round(e.delta_bound),
                "distortion": round(e.distortion),
                "rate1_ok": e.rate1_ok,
                "rate2_ok": e.rate2_ok,
            })
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    Beta,
    Eps,
    Zeta,
    K,
    D,
}

impl Param {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "beta" => Param::Beta,
            "eps" => Param::Eps,
            "zeta" => Param::Zeta,
            "k" => Param::K,
            "D" => Param::D,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Param::Beta => "beta",
            Param::Eps => "eps",
            Param::Zeta => "zeta",
            Param::K => "k",
            Param::D => "D",
        }
    }
}

struct Axis {
    param: Param,
    values: Vec<f64>,
}

fn parse_axis(spec: &str) -> Result<Axis, CliError> {
    let bad = || CliError::Usage(format!("axis {spec:?} is not name=start:stop:count"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let param = Param::parse(name.trim())
        .ok_or_else(|| CliError::Usage(format!("unknown axis {name:?}; expected beta, eps, zeta, k or D")))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, count] = parts[..] else { return Err(bad()) };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if count == 0 {
        return Err(CliError::Usage(format!("axis {} is empty", param.name())));
    }
    let values = if count == 1 {
        vec![start]
    } else {
        (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect()
    };
    Ok(Axis { param, values })
}

struct Point {
    beta: f64,
    eps: f64,
    zeta: f64,
    k: f64,
    d: f64,
}

impl Point {
    fn set(&mut self, p: Param, x: f64) {
        match p {
            Param::Beta => self.beta = x,
            Param::Eps => self.eps = x,
            Param::Zeta => self.zeta = x,
            Param::K => self.k = x,
            Param::D => self.d = x,
        }
    }
}

/// Every combination of axis values, first axis outermost.
fn grid(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&x| {
                    let mut row = prefix.clone();
                    row.push(x);
                    row
                })
            })
            .collect();
    }
    out
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: &dyn std::fmt::Display| CliError::Model(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(&e))?;
    {
        let mut w = csv::Writer::from_writer(tmp.as_file());
        w.write_record(header).map_err(|e| io(&e))?;
        for row in rows {
            w.write_record(row).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))?;
    }
    tmp.persist(path).map_err(|e| io(&e.error))?;
    Ok(())
}

fn flag(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

pub fn sweep(args: &SweepArgs) -> Result<Value, CliError> {
    if args.axis.is_empty() || args.axis.len() > 2 {
        return Err(CliError::Usage(format!("sweep takes one or two axes, got {}", args.axis.len())));
    }
    let axes = args.axis.iter().map(|s| parse_axis(s)).collect::<Result<Vec<_>, _>>()?;
    if axes.len() == 2 && axes[0].param == axes[1].param {
        return Err(CliError::Usage(format!("axis {} given twice", axes[0].param.name())));
    }
    let config = args.optimizer.config();
    let header_params: Vec<String> = axes.iter().map(|a| a.param.name().to_string()).collect();

    let (header, rows) = if args.bound == SweepBound::Classify {
        if axes.len() != 1 || axes[0].param != Param::Eps {
            return Err(CliError::Usage("classify sweeps take exactly one axis, eps".into()));
        }
        classify_rows(&axes[0].values)?
    } else {
        let bound = match args.bound {
            SweepBound::Inner => Bound::Inner,
            SweepBound::Outer => Bound::Outer,
            SweepBound::Prop1 => Bound::Prop1,
            SweepBound::Prop2 => Bound::Prop2,
            SweepBound::Prop3 => Bound::Prop3,
            SweepBound::Classify => unreachable!(),
        };
        let file_model = args.model.model != model::BUILTIN;
        if file_model && axes.iter().any(|a| matches!(a.param, Param::Beta | Param::Eps | Param::Zeta)) {
            return Err(CliError::Usage("beta, eps and zeta axes need the builtin model".into()));
        }
        bound_rows(args, bound, &axes, &config)?
    };
    let header: Vec<String> =
        if args.bound == SweepBound::Classify { header } else { header_params.iter().cloned().chain(header).collect() };
    write_csv(&args.output, &header, &rows)?;

    let inputs = json!({
        "model": args.model.model,
        "bound": format!("{:?}", args.bound).to_lowercase(),
        "axes": args.axis,
        "k": args.k,
        "D": args.d,
    });
    let results = json!({ "output": args.output.display().to_string(), "rows": rows.len(), "columns": header });
    let seed = matches!(args.bound, SweepBound::Inner | SweepBound::Outer | SweepBound::Prop1 | SweepBound::Prop2)
        .then_some(config.seed);
    Ok(output::record("sweep", inputs, results, output::provenance(seed, config_json(&config))))
}

fn bound_rows(
    args: &SweepArgs,
    bound: Bound,
    axes: &[Axis],
    config: &OptimizerConfig,
) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let header = ["delta", "distortion", "status", "common_rate_active", "private_rate_active", "distortion_active"]
        .map(String::from)
        .to_vec();
    // warm starts carry over only when the model itself is fixed
    let warm = bound == Bound::Inner && axes.iter().all(|a| matches!(a.param, Param::K | Param::D));
    let mut solved: Vec<(f64, f64, RegionOptimum)> = Vec::new();
    let mut rows = Vec::new();
    for values in grid(axes) {
        let mut p = Point { beta: args.model.beta, eps: args.model.eps, zeta: args.model.zeta, k: args.k, d: args.d };
        for (axis, &x) in axes.iter().zip(&values) {
            p.set(axis.param, x);
        }
        let m = model::load(&args.model.model, p.beta, p.eps, p.zeta)?;
        let mut row: Vec<String> = values.iter().map(|&x| csv_number(x)).collect();
        if bound == Bound::Prop3 {
            let (beta, eps, zeta) = check_prop3(&m, p.k, p.d)?;
            let o = prop3_max_delta(beta, eps, zeta, config.grid_resolution)?;
            row.extend([
                csv_number(o.delta),
                csv_number(0.0),
                "ok".into(),
                String::new(),
                String::new(),
                String::new(),
            ]);
            rows.push(row);
            continue;
        }
        let starts: Vec<_> = if warm {
            solved
                .iter()
                .filter(|(k, d, _)| *k <= p.k && *d <= p.d)
                .max_by(|a, b| a.2.delta.total_cmp(&b.2.delta))
                .map(|(_, _, o)| (o.source.clone(), o.channel.clone()))
                .into_iter()
                .collect()
        } else {
            vec![]
        };
        match solve(&m, bound, p.k, p.d, config, &starts) {
            Ok(o) => {
                let a = &o.activity;
                row.extend([
                    csv_number(o.delta),
                    csv_number(o.distortion),
                    "ok".into(),
                    flag(a.common_rate_slack.map(|_| a.common_rate_active())),
                    flag(Some(a.private_rate_active())),
                    flag(Some(a.distortion_active())),
                ]);
                if warm {
                    solved.push((p.k, p.d, o));
                }
            }
            Err(RegionError::Infeasible { .. }) => {
                row.extend(["".into(), "".into(), "infeasible".into(), "".into(), "".into(), "".into()]);
            }
            Err(e) => return Err(e.into()),
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn rank(r: Regime) -> u8 {
    match r {
        Regime::MarkovDegraded => 0,
        Regime::LessNoisy => 1,
        Regime::MoreCapable => 2,
        Regime::None => 3,
    }
}

/// Largest β in [0, 1] whose regime is at least as strong as `level`.
fn boundary(eps: f64, level: Regime) -> Result<f64, CliError> {
    let within = |beta: f64| -> Result<bool, CliError> { Ok(rank(classify_bec_bsc(beta, eps)?.regime) <= rank(level)) };
    if within(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if within(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn classify_rows(eps_values: &[f64]) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let header = ["eps", "beta_markov_degraded", "beta_less_noisy", "beta_more_capable"].map(String::from).to_vec();
    let mut rows = Vec::with_capacity(eps_values.len());
    for &eps in eps_values {
        let mut row = vec![csv_number(eps)];
        for level in [Regime::MarkovDegraded, Regime::LessNoisy, Regime::MoreCapable] {
            row.push(csv_number(boundary(eps, level)?));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn classify(args: &ClassifyArgs) -> Result<Value, CliError> {
    let c = classify_bec_bsc(args.beta, args.eps)?;
    let results = json!({
        "regime": c.regime.name(),
        "thresholds": {
            "markov_degraded": round(c.thresholds.0),
            "less_noisy": round(c.thresholds.1),
            "more_capable": round(c.thresholds.2),
        },
    });
    let inputs = json!({ "beta": args.beta, "eps": args.eps });
    Ok(output::record("classify", inputs, results, output::provenance(None, json!({}))))
}

fn parse_channel(spec: &str) -> Result<CondPmf, CliError> {
    let bad = || CliError::Usage(format!("channel {spec:?} is not bsc:p or bec:p"));
    let (kind, p) = spec.split_once(':').ok_or_else(bad)?;
    let p: f64 = p.trim().parse().map_err(|_| bad())?;
    let c = match kind.trim() {
        "bsc" => CondPmf::bsc(p),
        "bec" => CondPmf::bec(p),
        _ => return Err(bad()),
    };
    c.map_err(|e| CliError::Model(e.to_string()))
}

fn certificate(v: &OrderingVerdict) -> Value {
    match &v.certificate {
        None => Value::Null,
        Some(Certificate::DegradingChannel(w)) => json!({
            "degrading_channel": w.rows().map(|r| r.iter().map(|&x| round(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
        Some(Certificate::ConcavityViolation { left, right, gap }) => json!({
            "concavity_violation": {
                "left": left.probs().iter().map(|&x| round(x)).collect::<Vec<_>>(),
                "right": right.probs().iter().map(|&x| round(x)).collect::<Vec<_>>(),
                "gap": gap,
            },
        }),
    }
}

pub fn order(args: &OrderArgs) -> Result<Value, CliError> {
    let (first, second, described) = match (&args.first, &args.second, args.pair) {
        (Some(f), Some(s), _) => (parse_channel(f)?, parse_channel(s)?, json!({ "first": f, "second": s })),
        (None, None, Some(pair)) => {
            let m = load_model(&args.model)?;
            let (f, s, name) = match pair {
                Pair::Source => (m.source.b_given_a(), m.source.e_given_a(), "source"),
                Pair::Channel => (m.channel.y_given_x(), m.channel.z_given_x(), "channel"),
            };
            (f, s, json!({ "model": m.description, "pair": name }))
        }
        _ => return Err(CliError::Usage("give either --first and --second, or --pair".into())),
    };
    let (verdict, relation) = match args.relation {
        Relation::Degraded => (orderings::is_degraded(&first, &second)?, "degraded"),
        Relation::LessNoisy => (orderings::is_less_noisy(&first, &second, args.grid)?, "less-noisy"),
    };
    let mut inputs = described;
    inputs["relation"] = json!(relation);
    inputs["grid"] = json!(args.grid);
    let results = json!({
        "holds": verdict.holds,
        "certificate": certificate(&verdict),
        "tolerance_used": verdict.tolerance_used,
    });
    Ok(output::record("order", inputs, results, output::provenance(None, json!({}))))
}

fn sim_config(a: &SimArgs) -> SimConfig {
    SimConfig { n: a.n, trials: a.trials, seed: a.seed, beta: a.beta, eps: a.eps, zeta: a.zeta, parallel: !a.serial }
}

fn report_json(r: &SimReport) -> Value {
    json!({
        "mean_distortion": round(r.mean_distortion),
        "decode_error_rate": round(r.decode_error_rate),
        "equivocation_per_symbol": round(r.equivocation_per_symbol),
        "confidence_halfwidth": round(r.confidence_halfwidth),
        "trials": r.trials,
        "n": r.n,
    })
}

pub fn sim(cmd: &SimCommand) -> Result<Value, CliError> {
    let (scheme, args, report, extra) = match cmd {
        SimCommand::Uncoded(a) => ("uncoded", a, sim::sim_uncoded(&sim_config(a))?, json!({})),
        SimCommand::Binning { sim: a, rate } => {
            ("binning", a, sim::sim_binning_lossless(&sim_config(a), *rate)?, json!({ "rate": rate }))
        }
        SimCommand::Separation { sim: a, r1, r2, rc, rp, rf, k } => {
            let rates = SchemeRates { r1: *r1, r2: *r2, rc: *rc, rp: *rp, rf: *rf, k: *k };
            let report = sim::sim_separation_scheme(&sim_config(a), &rates)?;
            ("separation", a, report, json!({ "r1": r1, "r2": r2, "rc": rc, "rp": rp, "rf": rf, "k": k }))
        }
    };
    let mut inputs = json!({
        "scheme": scheme,
        "n": args.n,
        "trials": args.trials,
        "beta": args.beta,
        "eps": args.eps,
        "zeta": args.zeta,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut inputs, extra) {
        dst.extend(src);
    }
    let config = json!({ "parallel": !args.serial });
    Ok(output::record("sim", inputs, report_json(&report), output::provenance(Some(args.seed), config)))
}

pub fn repro(args: &ReproArgs) -> Result<Value, CliError> {
    let (beta, eps, zeta) = (1.0, 0.1, 0.1);
    let config = args.optimizer.config();
    let m = model::builtin(beta, eps, zeta)?;
    let separated = prop3_max_delta(beta, eps, zeta, config.grid_resolution)?;
    let uncoded = sim::uncoded_equivocation(eps, zeta)?;
    let outer = optimize_outer(&m.source, &m.channel, 1.0, 0.0, &config)?;
    let results = json!({
        "separated_delta": round(separated.delta),
        "separated_u": round(separated.u),
        "separated_q": round(separated.q),
        "uncoded_delta": round(uncoded),
        "outer_delta": round(outer.delta),
        "gap": round(uncoded - separated.delta),
        "uncoded_beats_separated": uncoded > separated.delta,
    });
    let inputs = json!({ "model": m.description, "k": 1.0, "D": 0.0 });
    Ok(output::record(
        "repro-counterexample",
        inputs,
        results,
        output::provenance(Some(config.seed), config_json(&config)),
    ))
}
