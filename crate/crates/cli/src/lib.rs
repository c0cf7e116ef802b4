//! Command-line front end for the dynamical coherence toolbox. Every
//! computation is a batch subcommand with table, CSV, or JSON output;
//! `reproduce` re-derives the published closed-form values and compares.

use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use dyncoh_core::{
    conversion_distance, dephasing_log_robustness, distill_closed_form, dmax_channels,
    exact_one_shot_cost, log_robustness, make_channel, matrix_to_nested, monotone_g,
    one_shot_distill, read_channel_file, smoothed_log_robustness, superchannel_to_value,
    ChannelChoi, ChannelSpec, FreeSet, MonotoneProbe, SpecFileError,
};

const FEAS_TOL: f64 = 1e-8;
const REPRODUCE_TOL: f64 = 1e-5;

#[derive(Parser)]
#[command(
    name = "dyncoh",
    version,
    about = "Dynamical coherence of quantum channels: free-set membership, \
             robustness measures, and one-shot conversion, cost, and distillation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetArg {
    Misc,
    Disc,
}

impl SetArg {
    fn free_set(self) -> FreeSet {
        match self {
            SetArg::Misc => FreeSet::Misc,
            SetArg::Disc => FreeSet::Disc,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SetArg::Misc => "misc",
            SetArg::Disc => "disc",
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutFormat::Table)]
    out: OutFormat,
    /// Largest acceptable certified optimality gap.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Include solution witnesses in the report.
    #[arg(long)]
    witness: bool,
}

#[derive(Args)]
struct ChannelArg {
    /// Channel spec: identity:d, dephasing:d, depolarizing:L:d,
    /// partial-dephasing:L:d, replace-plus:d, choi-file:PATH, unitary-file:PATH.
    #[arg(long)]
    channel: String,
}

#[derive(Args)]
struct SecondChannelArg {
    /// Second channel, same grammar as --channel.
    #[arg(long)]
    channel2: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Remarks,
    DistillLemmas,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether a channel is classical (diagonal Choi matrix).
    Classify {
        #[command(flatten)]
        channel: ChannelArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Log-robustness of coherence.
    Lr {
        #[command(flatten)]
        channel: ChannelArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dephasing log-robustness: max-relative entropy to the channel's
    /// classical part.
    LrDelta {
        #[command(flatten)]
        channel: ChannelArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Channel max-relative entropy between two channels.
    Dmax {
        #[command(flatten)]
        channel: ChannelArg,
        #[command(flatten)]
        channel2: SecondChannelArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Smoothed log-robustness within diamond-distance eps.
    #[command(allow_negative_numbers = true)]
    SmoothLr {
        #[command(flatten)]
        channel: ChannelArg,
        /// Smoothing radius in half diamond norm, in [0, 1).
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monotone family value G_P for a probe channel P (default: identity
    /// probe of the channel's input dimension).
    Monotone {
        #[command(flatten)]
        channel: ChannelArg,
        /// Probe channel P, same grammar as --channel.
        #[arg(long)]
        channel2: Option<String>,
        /// Free superchannel set to optimize over.
        #[arg(long, value_enum)]
        set: SetArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conversion distance from one channel to another under a free set.
    Convert {
        #[command(flatten)]
        channel: ChannelArg,
        #[command(flatten)]
        channel2: SecondChannelArg,
        /// Free superchannel set to optimize over.
        #[arg(long, value_enum)]
        set: SetArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact one-shot coherence cost with the realizing superchannel.
    Cost {
        #[command(flatten)]
        channel: ChannelArg,
        /// Free superchannel set.
        #[arg(long, value_enum)]
        set: SetArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One-shot distillable coherence at error tolerance eps.
    #[command(allow_negative_numbers = true)]
    Distill {
        #[command(flatten)]
        channel: ChannelArg,
        /// Fidelity error tolerance, in [0, 1).
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Free superchannel set.
        #[arg(long, value_enum)]
        set: SetArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute published closed-form values and compare row by row.
    Reproduce {
        /// Which table to reproduce.
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug)]
struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            msg: msg.into(),
        }
    }

    fn solver(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            msg: msg.into(),
        }
    }
}

fn solver_err(e: impl std::fmt::Display) -> CliError {
    CliError::solver(format!("solver failure: {e}"))
}

/// Parse the inline channel grammar or load a channel file.
fn parse_channel_arg(arg: &str) -> Result<ChannelChoi, CliError> {
    let bad = |msg: String| CliError::usage(msg);
    let (head, rest) = arg
        .split_once(':')
        .ok_or_else(|| bad(format!("unknown channel spec {arg:?}: expected kind:args")))?;
    let dim = |s: &str| -> Result<usize, CliError> {
        s.parse::<usize>()
            .map_err(|_| bad(format!("bad dimension {s:?} in channel spec {arg:?}")))
    };
    let spec = match head {
        "identity" => ChannelSpec::Identity { d: dim(rest)? },
        "dephasing" => ChannelSpec::Dephasing { d: dim(rest)? },
        "replace-plus" => ChannelSpec::ReplacePlus { d: dim(rest)? },
        "depolarizing" | "partial-dephasing" => {
            let (lam, d) = rest.split_once(':').ok_or_else(|| {
                bad(format!("channel spec {arg:?} needs {head}:lambda:d"))
            })?;
            let lambda = lam
                .parse::<f64>()
                .map_err(|_| bad(format!("bad lambda {lam:?} in channel spec {arg:?}")))?;
            let d = dim(d)?;
            if head == "depolarizing" {
                ChannelSpec::Depolarizing { lambda, d }
            } else {
                ChannelSpec::PartialDephasing { lambda, d }
            }
        }
        "choi-file" | "unitary-file" => {
            let spec = read_channel_file(Path::new(rest)).map_err(|e| match e {
                SpecFileError::Channel(inner) => bad(format!("{rest}: {inner}")),
                other => bad(format!("{other}")),
            })?;
            let ok = match (head, &spec) {
                ("choi-file", ChannelSpec::Choi { .. }) => true,
                ("unitary-file", ChannelSpec::Unitary { .. }) => true,
                _ => false,
            };
            if !ok {
                return Err(bad(format!(
                    "{rest}: file does not describe a {} channel",
                    if head == "choi-file" { "choi" } else { "unitary" }
                )));
            }
            spec
        }
        other => return Err(bad(format!("unknown channel kind {other:?} in {arg:?}"))),
    };
    make_channel(&spec).map_err(|e| bad(format!("invalid channel {arg:?}: {e}")))
}

fn check_eps(eps: f64) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&eps) || eps.is_nan() {
        return Err(CliError::usage(format!(
            "eps must lie in [0, 1), got {eps}"
        )));
    }
    Ok(())
}

/// One computed report, ready to render in any output format.
struct Report {
    command: &'static str,
    inputs: Vec<(&'static str, Value)>,
    value: Option<f64>,
    gap: Option<f64>,
    witness: Option<Value>,
    /// Extra table lines such as the integer part of a one-shot result.
    details: Vec<(String, String)>,
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mut s = format!("{:.9}", v);
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.push('0');
    }
    s
}

fn fmt_gap(g: f64) -> String {
    if g.is_finite() {
        format!("{g:.3e}")
    } else {
        "inf".into()
    }
}

fn json_num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

impl Report {
    fn render(&self, output: &OutputArgs, time_ms: u128) -> String {
        match output.out {
            OutFormat::Table => {
                let mut lines = vec![format!(
                    "# dyncoh {} (gap tol {:e}, feasibility tol {:e})",
                    self.command, output.tol, FEAS_TOL
                )];
                for (k, v) in &self.inputs {
                    let shown = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    lines.push(format!("{k} {shown}"));
                }
                lines.push(format!(
                    "value {}",
                    self.value.map_or("inf".into(), fmt_value)
                ));
                if let Some(g) = self.gap {
                    lines.push(format!("gap {}", fmt_gap(g)));
                }
                for (k, v) in &self.details {
                    lines.push(format!("{k} {v}"));
                }
                lines.push(format!("time_ms {time_ms}"));
                if let Some(w) = &self.witness {
                    lines.push(format!("witness {w}"));
                }
                lines.join("\n")
            }
            OutFormat::Csv => {
                let inputs = self
                    .inputs
                    .iter()
                    .map(|(k, v)| match v {
                        Value::String(s) => format!("{k}={s}"),
                        other => format!("{k}={other}"),
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                let mut s = format!(
                    "# gap_tol={:e} feas_tol={:e}\ncommand,inputs,value,gap,time_ms\n",
                    output.tol, FEAS_TOL
                );
                s.push_str(&format!(
                    "{},\"{}\",{},{},{}",
                    self.command,
                    inputs,
                    self.value.map_or("inf".into(), fmt_value),
                    self.gap.map_or(String::new(), fmt_gap),
                    time_ms
                ));
                s
            }
            OutFormat::Json => {
                let mut inputs = Map::new();
                for (k, v) in &self.inputs {
                    inputs.insert((*k).into(), v.clone());
                }
                inputs.insert("tol".into(), json_num(output.tol));
                inputs.insert("feas_tol".into(), json_num(FEAS_TOL));
                for (k, v) in &self.details {
                    inputs.insert(k.clone(), Value::String(v.clone()));
                }
                let mut obj = Map::new();
                obj.insert("command".into(), Value::String(self.command.into()));
                obj.insert("inputs".into(), Value::Object(inputs));
                obj.insert(
                    "value".into(),
                    self.value.map_or(Value::Null, json_num),
                );
                obj.insert("gap".into(), self.gap.map_or(Value::Null, json_num));
                obj.insert("time_ms".into(), Value::from(time_ms as u64));
                if let Some(w) = &self.witness {
                    obj.insert("witness".into(), w.clone());
                }
                Value::Object(obj).to_string()
            }
        }
    }
}

fn run_command(cmd: &Cmd) -> Result<(Report, &OutputArgs), CliError> {
    match cmd {
        Cmd::Classify { channel, output } => {
            let c = parse_channel_arg(&channel.channel)?;
            let deviation = c.choi().sub(c.classical_part().choi()).frobenius();
            let is_classical = deviation <= output.tol.max(FEAS_TOL);
            Ok((
                Report {
                    command: "classify",
                    inputs: vec![("channel", channel.channel.clone().into())],
                    value: Some(deviation),
                    gap: None,
                    witness: None,
                    details: vec![(
                        "classical".into(),
                        if is_classical { "yes" } else { "no" }.into(),
                    )],
                },
                output,
            ))
        }
        Cmd::Lr { channel, output } => {
            let c = parse_channel_arg(&channel.channel)?;
            let r = log_robustness(&c).map_err(solver_err)?;
            let witness = output.witness.then(|| {
                json!({
                    "omega": matrix_to_nested(&r.primal_witness),
                    "eta": matrix_to_nested(&r.dual_witness),
                })
            });
            Ok((
                Report {
                    command: "lr",
                    inputs: vec![("channel", channel.channel.clone().into())],
                    value: Some(r.value),
                    gap: Some(r.gap),
                    witness,
                    details: vec![],
                },
                output,
            ))
        }
        Cmd::LrDelta { channel, output } => {
            let c = parse_channel_arg(&channel.channel)?;
            let r = dephasing_log_robustness(&c).map_err(solver_err)?;
            let witness = output
                .witness
                .then(|| {
                    r.certificate
                        .as_ref()
                        .map(|m| json!({ "certificate": matrix_to_nested(m) }))
                })
                .flatten();
            Ok((
                Report {
                    command: "lr-delta",
                    inputs: vec![("channel", channel.channel.clone().into())],
                    value: r.value.is_finite().then_some(r.value.max(0.0)),
                    gap: r.value.is_finite().then_some(r.gap),
                    witness,
                    details: vec![],
                },
                output,
            ))
        }
        Cmd::Dmax {
            channel,
            channel2,
            output,
        } => {
            let c = parse_channel_arg(&channel.channel)?;
            let e = parse_channel_arg(&channel2.channel2)?;
            if c.sys() != e.sys() {
                return Err(CliError::usage(format!(
                    "dimension mismatch: {} is {}x{}, {} is {}x{}",
                    channel.channel,
                    c.sys().d_in,
                    c.sys().d_out,
                    channel2.channel2,
                    e.sys().d_in,
                    e.sys().d_out
                )));
            }
            let r = dmax_channels(&c, &e).map_err(solver_err)?;
            let witness = output
                .witness
                .then(|| {
                    r.certificate
                        .as_ref()
                        .map(|m| json!({ "certificate": matrix_to_nested(m) }))
                })
                .flatten();
            Ok((
                Report {
                    command: "dmax",
                    inputs: vec![
                        ("channel", channel.channel.clone().into()),
                        ("channel2", channel2.channel2.clone().into()),
                    ],
                    value: r.value.is_finite().then_some(r.value),
                    gap: r.value.is_finite().then_some(r.gap),
                    witness,
                    details: vec![],
                },
                output,
            ))
        }
        Cmd::SmoothLr {
            channel,
            eps,
            output,
        } => {
            check_eps(*eps)?;
            let c = parse_channel_arg(&channel.channel)?;
            let v = smoothed_log_robustness(&c, *eps).map_err(solver_err)?;
            Ok((
                Report {
                    command: "smooth-lr",
                    inputs: vec![
                        ("channel", channel.channel.clone().into()),
                        ("eps", json_num(*eps)),
                    ],
                    value: Some(v),
                    gap: None,
                    witness: None,
                    details: vec![],
                },
                output,
            ))
        }
        Cmd::Monotone {
            channel,
            channel2,
            set,
            output,
        } => {
            let c = parse_channel_arg(&channel.channel)?;
            let probe_arg = channel2
                .clone()
                .unwrap_or_else(|| format!("identity:{}", c.sys().d_in));
            let p = parse_channel_arg(&probe_arg)?;
            let probe = MonotoneProbe {
                p,
                set: set.free_set(),
            };
            let v = monotone_g(&probe, &c).map_err(solver_err)?;
            Ok((
                Report {
                    command: "monotone",
                    inputs: vec![
                        ("channel", channel.channel.clone().into()),
                        ("channel2", probe_arg.into()),
                        ("set", set.name().into()),
                    ],
                    value: Some(v),
                    gap: None,
                    witness: None,
                    details: vec![],
                },
                output,
            ))
        }
        Cmd::Convert {
            channel,
            channel2,
            set,
            output,
        } => {
            let c = parse_channel_arg(&channel.channel)?;
            let m = parse_channel_arg(&channel2.channel2)?;
            let r = conversion_distance(&c, &m, set.free_set()).map_err(solver_err)?;
            let witness = output.witness.then(|| {
                json!({
                    "theta": superchannel_to_value(&r.theta),
                    "omega": matrix_to_nested(&r.omega),
                })
            });
            Ok((
                Report {
                    command: "convert",
                    inputs: vec![
                        ("channel", channel.channel.clone().into()),
                        ("channel2", channel2.channel2.clone().into()),
                        ("set", set.name().into()),
                    ],
                    value: Some(r.value),
                    gap: Some(r.gap()),
                    witness,
                    details: vec![],
                },
                output,
            ))
        }
        Cmd::Cost {
            channel,
            set,
            output,
        } => {
            let c = parse_channel_arg(&channel.channel)?;
            let r = exact_one_shot_cost(&c, set.free_set()).map_err(solver_err)?;
            let witness = output
                .witness
                .then(|| json!({ "omega": superchannel_to_value(&r.omega) }));
            Ok((
                Report {
                    command: "cost",
                    inputs: vec![
                        ("channel", channel.channel.clone().into()),
                        ("set", set.name().into()),
                    ],
                    value: Some(r.cost_bits),
                    gap: None,
                    witness,
                    details: vec![
                        ("m".into(), r.m.to_string()),
                        ("lr".into(), fmt_value(r.lr)),
                    ],
                },
                output,
            ))
        }
        Cmd::Distill {
            channel,
            eps,
            set,
            output,
        } => {
            check_eps(*eps)?;
            let c = parse_channel_arg(&channel.channel)?;
            let r = one_shot_distill(&c, *eps, set.free_set()).map_err(solver_err)?;
            let witness = output.witness.then(|| {
                json!({
                    "rho": matrix_to_nested(&r.rho),
                    "gamma": matrix_to_nested(&r.gamma),
                })
            });
            Ok((
                Report {
                    command: "distill",
                    inputs: vec![
                        ("channel", channel.channel.clone().into()),
                        ("eps", json_num(*eps)),
                        ("set", set.name().into()),
                    ],
                    value: Some(r.bits),
                    gap: None,
                    witness,
                    details: vec![("n".into(), r.n.to_string())],
                },
                output,
            ))
        }
        Cmd::Reproduce { .. } => unreachable!("reproduce handled separately"),
    }
}

/// One comparison row of a reproduction suite.
struct RepRow {
    key: String,
    label: &'static str,
    computed: f64,
    expected: f64,
    exact: bool,
}

impl RepRow {
    fn diff(&self) -> f64 {
        (self.computed - self.expected).abs()
    }

    fn pass(&self) -> bool {
        if self.exact {
            self.computed == self.expected
        } else {
            self.diff() <= REPRODUCE_TOL
        }
    }
}

fn remark_rows() -> Result<Vec<RepRow>, CliError> {
    let jobs: Vec<(&str, &str, f64)> = vec![
        ("lr dephasing:2", "value", 0.0),
        ("lr identity:2", "value", 1.0),
        ("lr replace-plus:2", "value", 1.0),
        ("monotone dephasing:2", "value", 0.0),
        ("monotone identity:2", "value", 2.0),
        ("monotone replace-plus:2", "value", 2.0),
    ];
    jobs.into_par_iter()
        .map(|(key, label, expected)| {
            let (cmd, chan) = key.split_once(' ').expect("job key");
            let c = parse_channel_arg(chan)?;
            let computed = match cmd {
                "lr" => log_robustness(&c).map_err(solver_err)?.value,
                _ => {
                    let probe = MonotoneProbe {
                        p: parse_channel_arg("identity:2")?,
                        set: FreeSet::Misc,
                    };
                    monotone_g(&probe, &c).map_err(solver_err)?
                }
            };
            Ok(RepRow {
                key: key.into(),
                label,
                computed,
                expected,
                exact: false,
            })
        })
        .collect()
}

fn distill_lemma_rows() -> Result<Vec<RepRow>, CliError> {
    let mut jobs = Vec::new();
    for family in ["depolarizing", "partial-dephasing"] {
        for d in [2usize, 3] {
            for lambda in [0.0, 0.3, 0.7, 1.0] {
                for eps in [0.05, 0.2, 0.5] {
                    jobs.push((family, d, lambda, eps));
                }
            }
        }
    }
    let mut rows: Vec<RepRow> = jobs
        .into_par_iter()
        .map(|(family, d, lambda, eps)| {
            let key = format!("{family}:{d}:{lambda:.2}:{eps:.2}");
            let c = parse_channel_arg(&format!("{family}:{lambda}:{d}"))?;
            let expected = distill_closed_form(lambda, d, eps) as f64;
            let mut out = Vec::new();
            for (set, label) in [(FreeSet::Misc, "misc"), (FreeSet::Disc, "disc")] {
                let n = one_shot_distill(&c, eps, set).map_err(solver_err)?.n;
                out.push(RepRow {
                    key: key.clone(),
                    label,
                    computed: n as f64,
                    expected,
                    exact: true,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<RepRow>>, CliError>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| a.key.cmp(&b.key).then(a.label.cmp(b.label)));
    Ok(rows)
}

fn run_reproduce(suite: Suite, output: &OutputArgs) -> Result<(String, i32), CliError> {
    let start = Instant::now();
    let (name, rows) = match suite {
        Suite::Remarks => ("remarks", remark_rows()?),
        Suite::DistillLemmas => ("distill-lemmas", distill_lemma_rows()?),
    };
    let time_ms = start.elapsed().as_millis();
    let failures = rows.iter().filter(|r| !r.pass()).count();

    let text = match output.out {
        OutFormat::Table => {
            let mut lines = vec![format!(
                "# dyncoh reproduce {name} (continuous tol {REPRODUCE_TOL:e}, integer rows exact)"
            )];
            let width = rows.iter().map(|r| r.key.len()).max().unwrap_or(4).max(4);
            lines.push(format!(
                "{:width$}  {:5}  {:>12}  {:>12}  {:>9}  pass",
                "row", "set", "computed", "expected", "|diff|"
            ));
            for r in &rows {
                lines.push(format!(
                    "{:width$}  {:5}  {:>12}  {:>12}  {:>9}  {}",
                    r.key,
                    r.label,
                    fmt_value(r.computed),
                    fmt_value(r.expected),
                    fmt_gap(r.diff()),
                    if r.pass() { "yes" } else { "NO" }
                ));
            }
            lines.push(format!("time_ms {time_ms}"));
            lines.push(if failures == 0 {
                format!("PASS ({} rows)", rows.len())
            } else {
                format!("FAIL ({failures} of {} rows)", rows.len())
            });
            lines.join("\n")
        }
        OutFormat::Csv => {
            let mut s = format!(
                "# continuous_tol={REPRODUCE_TOL:e} integer_rows=exact\nrow,set,computed,expected,diff,pass\n"
            );
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.key,
                    r.label,
                    fmt_value(r.computed),
                    fmt_value(r.expected),
                    fmt_gap(r.diff()),
                    r.pass()
                ));
            }
            s.push_str(&if failures == 0 {
                format!("# PASS ({} rows)", rows.len())
            } else {
                format!("# FAIL ({failures} of {} rows)", rows.len())
            });
            s
        }
        OutFormat::Json => {
            let rows_json: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "row": r.key,
                        "set": r.label,
                        "computed": r.computed,
                        "expected": r.expected,
                        "diff": r.diff(),
                        "pass": r.pass(),
                    })
                })
                .collect();
            json!({
                "command": "reproduce",
                "inputs": { "suite": name, "continuous_tol": REPRODUCE_TOL },
                "value": failures as f64,
                "gap": Value::Null,
                "time_ms": time_ms as u64,
                "rows": rows_json,
            })
            .to_string()
        }
    };
    Ok((text, if failures == 0 { 0 } else { 1 }))
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    if let Cmd::Reproduce { suite, output } = &cli.cmd {
        let (text, code) = run_reproduce(*suite, output)?;
        println!("{text}");
        return Ok(code);
    }
    let start = Instant::now();
    let (report, output) = run_command(&cli.cmd)?;
    let time_ms = start.elapsed().as_millis();
    if let Some(g) = report.gap {
        if !(g <= output.tol) {
            return Err(CliError::solver(format!(
                "certified gap {} exceeds tol {:e} for {}",
                fmt_gap(g),
                output.tol,
                report.command
            )));
        }
    }
    println!("{}", report.render(output, time_ms));
    Ok(0)
}

/// Parse arguments and run; the returned code is the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let is_usage = e.use_stderr();
            let _ = e.print();
            return if is_usage { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dyncoh: {}", e.msg);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyncoh_core::{channel_to_value, parse_channel_text};

    #[test]
    fn builtin_grammar_round_trips_through_export() {
        for spec in [
            "identity:2",
            "dephasing:3",
            "depolarizing:0.35:2",
            "partial-dephasing:0.6:3",
            "replace-plus:2",
        ] {
            let c = parse_channel_arg(spec).unwrap();
            let text = serde_json::to_string(&channel_to_value(&c)).unwrap();
            let back = make_channel(&parse_channel_text(&text).unwrap()).unwrap();
            assert!(
                back.choi().sub(c.choi()).frobenius() < 1e-12,
                "round trip changed {spec}"
            );
        }
    }

    #[test]
    fn grammar_rejects_malformed_specs() {
        for bad in [
            "identity",
            "identity:zero",
            "depolarizing:0.5",
            "depolarizing:x:2",
            "teleport:2",
            "depolarizing:1.5:2",
        ] {
            let err = parse_channel_arg(bad).unwrap_err();
            assert_eq!(err.code, 2, "{bad} should be a usage error");
        }
    }

    #[test]
    fn value_formatting_is_stable() {
        assert_eq!(fmt_value(1.0), "1.0");
        assert_eq!(fmt_value(0.0), "0.0");
        assert_eq!(fmt_value(2.782539676), "2.782539676");
        assert_eq!(fmt_value(1.5849625007211), "1.584962501");
        assert_eq!(fmt_value(f64::INFINITY), "inf");
    }

    #[test]
    fn eps_validation_is_a_usage_error() {
        assert_eq!(check_eps(0.0).err().map(|e| e.code), None);
        assert_eq!(check_eps(1.0).unwrap_err().code, 2);
        assert_eq!(check_eps(-0.1).unwrap_err().code, 2);
        assert_eq!(check_eps(f64::NAN).unwrap_err().code, 2);
    }
}
