//! Command-line front end: load restaking graphs, run the exact analyses,
//! and emit reports with witnesses in human-readable or canonical JSON form.
//!
//! Exit codes: 0 = condition holds / query answered; 1 = condition fails
//! (with a witness in the report); 2 = usage or model error; 3 = enumeration
//! cap refusal. Diagnostics and timing go to standard error; with `--json`
//! standard output carries exactly one canonical report, byte-identical for
//! identical inputs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use restake_core::analysis::{
    check_header_overcollateralization, header_max_gamma, is_secure, max_slack, Attack,
    EnumLimits, SlackStatus,
};
use restake_core::cascade::{
    parse_cascade_witness, reference_depth, serialize_cascade_witness, shock_admissible,
    verify_cascade, worst_case_loss_global, worst_case_loss_local, Cascade, CascadeMode,
};
use restake_core::conditions::{
    el_condition_local, el_condition_scaled, el_max_gamma, el_max_gamma_local, ConditionReport,
    GammaStatus,
};
use restake_core::constructions::{
    gen_cycle_demo, gen_freerider_demo, gen_local_variant, gen_noslack, gen_ring,
    gen_stable_union_counterexample, gen_triangle, gen_two_validator, ConstructionOutput,
};
use restake_core::{
    format_rational, parse_rational, rat_int, Error, Rational, RestakingGraph,
    ServiceSet, ValidatorSet,
};

#[derive(Parser)]
#[command(
    name = "restake",
    version,
    about = "Exact security analysis for restaking networks",
    after_help = "Exit codes: 0 holds/answered, 1 fails (witness attached), 2 usage/model error, 3 enumeration cap refusal."
)]
struct Cli {
    /// Emit one canonical JSON report on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Enumeration caps as "services,validators" (defaults 16,20).
    #[arg(long, global = true, value_name = "S,V")]
    cap: Option<String>,
    /// Acknowledge the exponential cost of caps above the defaults.
    #[arg(long, global = true)]
    allow_large: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct GraphArg {
    /// Path to a restaking graph JSON file.
    graph: PathBuf,
}

#[derive(Subcommand)]
enum Verb {
    /// Decide security, or gamma-slack security with --gamma.
    Check {
        #[command(flatten)]
        graph: GraphArg,
        /// Require a (1+gamma) stake margin over every coalition's profit.
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Check the per-validator load condition (global, scaled, or local).
    El {
        #[command(flatten)]
        graph: GraphArg,
        /// Scale profits by (1+gamma). Defaults to 0.
        #[arg(long)]
        gamma: Option<String>,
        /// Check the coalition-local condition for these services.
        #[arg(long, value_name = "IDS")]
        local: Option<String>,
    },
    /// Largest tolerated gamma: exact search and the load-condition proxy.
    MaxGamma {
        #[command(flatten)]
        graph: GraphArg,
        /// Compute the coalition-local measures for these services.
        #[arg(long, value_name = "IDS")]
        local: Option<String>,
    },
    /// Check overcollateralization of every attack head inside a coalition.
    Headers {
        #[command(flatten)]
        graph: GraphArg,
        /// The coalition of services whose local security is asserted.
        #[arg(long, value_name = "IDS")]
        local: String,
        /// Margin factor (1+gamma). Defaults to 0.
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Inspect a stake shock: budget admissibility and post-shock security.
    Shock {
        #[command(flatten)]
        graph: GraphArg,
        /// Validators removed by the shock.
        #[arg(long, value_name = "IDS")]
        set: String,
        /// Shock budget as a fraction of (exclusive) stake.
        #[arg(long)]
        psi: Option<String>,
        /// Measure the budget against this coalition's exclusive stake.
        #[arg(long, value_name = "IDS")]
        local: Option<String>,
    },
    /// Worst-case stake loss under budget-psi shocks, global or local.
    Loss {
        #[command(flatten)]
        graph: GraphArg,
        /// Shock budget as a fraction of (exclusive) stake.
        #[arg(long)]
        psi: String,
        /// Compute the coalition-local loss for these services.
        #[arg(long, value_name = "IDS")]
        local: Option<String>,
        /// Restrict cascade steps to stable attacks (local only).
        #[arg(long)]
        stable: bool,
    },
    /// Verify a shock-plus-cascade witness file against a graph.
    CascadeVerify {
        #[command(flatten)]
        graph: GraphArg,
        /// Path to a cascade witness JSON file.
        #[arg(long)]
        witness: PathBuf,
        /// Also require the witness shock to fit this budget.
        #[arg(long)]
        psi: Option<String>,
        /// Measure the budget against this coalition's exclusive stake.
        #[arg(long, value_name = "IDS")]
        local: Option<String>,
    },
    /// Reference depth of a cascade witness: how far back steps reach.
    Depth {
        #[command(flatten)]
        graph: GraphArg,
        /// Path to a cascade witness JSON file.
        #[arg(long)]
        witness: PathBuf,
    },
    /// Upper bound on the length of any worthwhile cascade.
    LengthBound {
        #[command(flatten)]
        graph: GraphArg,
        /// The graph's overcollateralization slack (must be positive).
        #[arg(long)]
        gamma: String,
        /// Shock budget (must be positive).
        #[arg(long)]
        psi: String,
        /// Reference depth to assume (must be at least 1).
        #[arg(long)]
        depth: usize,
    },
    /// Emit a benchmark construction: graph JSON plus its expected claims.
    Generate {
        /// One of: two-validator, noslack, triangle, ring, local-variant,
        /// stable-union, freerider, cycle.
        name: String,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        pi: Option<String>,
        #[arg(long)]
        sigma_a: Option<String>,
        /// Ring size (a positive multiple of 6).
        #[arg(long)]
        n: Option<usize>,
        /// Base graph for the local-variant construction.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Coalition on the base graph for the local-variant construction.
        #[arg(long, value_name = "IDS")]
        local: Option<String>,
    },
}

/// A report: verdict map, optional witness, diagnostics. JSON rendering is
/// canonical (sorted keys) so identical runs are byte-identical.
struct Report {
    verb: &'static str,
    verdicts: Map<String, Value>,
    witness: Option<Value>,
    diagnostics: Vec<String>,
    /// Exit 1 instead of 0 when the checked condition fails.
    failed: bool,
}

impl Report {
    fn new(verb: &'static str) -> Self {
        Report {
            verb,
            verdicts: Map::new(),
            witness: None,
            diagnostics: Vec::new(),
            failed: false,
        }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.verdicts.insert(key.to_string(), value);
    }

    fn set_rational(&mut self, key: &str, r: &Rational) {
        self.set(key, Value::String(format_rational(r)));
    }
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } | Error::LengthBoundOverflow => 3,
            _ => 2,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    let code = match result {
        Ok(report) => {
            emit(&report, cli.json);
            if report.failed {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    eprintln!("elapsed: {:.3?}", start.elapsed());
    ExitCode::from(code)
}

fn parse_limits(cli: &Cli) -> Result<EnumLimits, CliError> {
    let defaults = EnumLimits::default();
    let Some(spec) = &cli.cap else {
        return Ok(defaults);
    };
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::usage(format!(
            "--cap expects \"services,validators\", got {spec:?}"
        )));
    }
    let max_services: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("--cap services count {:?} is not a number", parts[0])))?;
    let max_validators: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("--cap validators count {:?} is not a number", parts[1])))?;
    if max_services > 128 || max_validators > 128 {
        return Err(CliError::usage(
            "caps beyond 128 exceed the index-set representation",
        ));
    }
    if (max_services > defaults.max_services || max_validators > defaults.max_validators)
        && !cli.allow_large
    {
        return Err(CliError::usage(format!(
            "caps {max_services},{max_validators} exceed the defaults {},{}; \
             enumeration is exponential — pass --allow-large to proceed",
            defaults.max_services, defaults.max_validators
        )));
    }
    Ok(EnumLimits {
        max_services,
        max_validators,
    })
}

fn load_graph(path: &PathBuf) -> Result<RestakingGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(restake_core::parse_graph(&text)?)
}

fn parse_rat(text: &str, flag: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::usage(format!("{flag}: {e}")))
}

fn split_ids(list: &str) -> Vec<&str> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_services(g: &RestakingGraph, list: &str) -> Result<ServiceSet, CliError> {
    Ok(g.service_set(&split_ids(list))?)
}

fn parse_validators(g: &RestakingGraph, list: &str) -> Result<ValidatorSet, CliError> {
    Ok(g.validator_set(&split_ids(list))?)
}

fn attack_value(g: &RestakingGraph, attack: &Attack) -> Value {
    json!({
        "services": g.service_ids(attack.services),
        "validators": g.validator_ids(attack.attackers),
    })
}

fn gamma_status_value(status: &GammaStatus) -> Value {
    Value::String(status.to_string())
}

fn slack_status_value(status: &SlackStatus) -> Value {
    Value::String(match status {
        SlackStatus::Insecure => "insecure".to_string(),
        SlackStatus::Finite(g) => format_rational(g),
        SlackStatus::Unbounded => "unbounded".to_string(),
    })
}

fn condition_values(report: &mut Report, condition: &ConditionReport) {
    report.set("holds", json!(condition.holds));
    let mut loads = Map::new();
    for (id, load) in &condition.per_validator_load {
        loads.insert(id.as_str().to_string(), Value::String(format_rational(load)));
    }
    report.set("loads", Value::Object(loads));
    report.set(
        "violating_validators",
        json!(condition
            .violating_validators
            .iter()
            .map(|v| v.as_str())
            .collect::<Vec<_>>()),
    );
    report.set(
        "unsatisfiable_services",
        json!(condition
            .unsatisfiable_services
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()),
    );
}

fn cascade_witness_value(
    g: &RestakingGraph,
    shock: ValidatorSet,
    cascade: &Cascade,
) -> Result<Value, CliError> {
    let text = serialize_cascade_witness(g, shock, cascade)?;
    Ok(serde_json::from_str(&text).expect("witness serialization is valid JSON"))
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let limits = parse_limits(cli)?;
    match &cli.verb {
        Verb::Check { graph, gamma } => {
            let g = load_graph(&graph.graph)?;
            let mut report = Report::new("check");
            match gamma {
                None => {
                    let security = is_secure(&g, &limits)?;
                    report.set("secure", json!(security.secure));
                    if let Some(attack) = security.counterexample {
                        report.witness = Some(attack_value(&g, &attack));
                        report.diagnostics.push(
                            "a valid attack exists; witness lists its services and attackers"
                                .to_string(),
                        );
                    }
                    report.failed = !security.secure;
                }
                Some(text) => {
                    let gamma = parse_rat(text, "--gamma")?;
                    let slack = max_slack(&g, &limits)?;
                    let holds = match &slack.status {
                        SlackStatus::Insecure => false,
                        SlackStatus::Finite(best) => gamma <= *best,
                        SlackStatus::Unbounded => true,
                    };
                    report.set("gamma", Value::String(format_rational(&gamma)));
                    report.set("slack_secure", json!(holds));
                    report.set("max_slack", slack_status_value(&slack.status));
                    if !holds {
                        if let Some(attack) = slack.witness {
                            report.witness = Some(attack_value(&g, &attack));
                            report.diagnostics.push(
                                "witness coalition attains the maximum slack and beats the requested margin"
                                    .to_string(),
                            );
                        }
                    }
                    report.failed = !holds;
                }
            }
            Ok(report)
        }
        Verb::El {
            graph,
            gamma,
            local,
        } => {
            let g = load_graph(&graph.graph)?;
            let gamma = match gamma {
                None => rat_int(0),
                Some(text) => parse_rat(text, "--gamma")?,
            };
            let mut report = Report::new("el");
            report.set("gamma", Value::String(format_rational(&gamma)));
            let condition = match local {
                None => el_condition_scaled(&g, &gamma)?,
                Some(list) => {
                    let coalition = parse_services(&g, list)?;
                    report.set("coalition", json!(g.service_ids(coalition)));
                    el_condition_local(&g, coalition, &gamma)?
                }
            };
            condition_values(&mut report, &condition);
            report.failed = !condition.holds;
            Ok(report)
        }
        Verb::MaxGamma { graph, local } => {
            let g = load_graph(&graph.graph)?;
            let mut report = Report::new("max-gamma");
            match local {
                None => {
                    let slack = max_slack(&g, &limits)?;
                    report.set("exact", slack_status_value(&slack.status));
                    report.set("el_proxy", gamma_status_value(&el_max_gamma(&g)?));
                    if let Some(attack) = slack.witness {
                        report.witness = Some(attack_value(&g, &attack));
                    }
                }
                Some(list) => {
                    let coalition = parse_services(&g, list)?;
                    report.set("coalition", json!(g.service_ids(coalition)));
                    report.set(
                        "exact",
                        gamma_status_value(&header_max_gamma(&g, coalition, &limits)?),
                    );
                    report.set(
                        "el_proxy",
                        gamma_status_value(&el_max_gamma_local(&g, coalition)?),
                    );
                }
            }
            Ok(report)
        }
        Verb::Headers {
            graph,
            local,
            gamma,
        } => {
            let g = load_graph(&graph.graph)?;
            let coalition = parse_services(&g, local)?;
            let gamma = match gamma {
                None => rat_int(0),
                Some(text) => parse_rat(text, "--gamma")?,
            };
            let result = check_header_overcollateralization(&g, coalition, &gamma, &limits)?;
            let mut report = Report::new("headers");
            report.set("coalition", json!(g.service_ids(coalition)));
            report.set("gamma", Value::String(format_rational(&gamma)));
            report.set("holds", json!(result.holds));
            if let Some(header) = result.violation {
                report.witness = Some(json!({
                    "services": g.service_ids(header.services),
                    "validators": g.validator_ids(header.attackers),
                }));
                report.diagnostics.push(
                    "violating head: presuming all non-exclusive stake adversarial, \
                     burning the witness validators beats the margined profit"
                        .to_string(),
                );
            }
            report.failed = !result.holds;
            Ok(report)
        }
        Verb::Shock {
            graph,
            set,
            psi,
            local,
        } => {
            let g = load_graph(&graph.graph)?;
            let removed = parse_validators(&g, set)?;
            let mut report = Report::new("shock");
            report.set("removed", json!(g.validator_ids(removed)));
            if let Some(text) = psi {
                let psi = parse_rat(text, "--psi")?;
                report.set("psi", Value::String(format_rational(&psi)));
                let coalition = match local {
                    None => None,
                    Some(list) => {
                        let c = parse_services(&g, list)?;
                        report.set("coalition", json!(g.service_ids(c)));
                        Some(c)
                    }
                };
                let admissible = shock_admissible(&g, removed, &psi, coalition)?;
                report.set("admissible", json!(admissible));
                report.failed = !admissible;
            } else if local.is_some() {
                return Err(CliError::usage("--local on shock requires --psi"));
            }
            let shocked = g.remove_validators(removed)?;
            let security = is_secure(&shocked, &limits)?;
            report.set("post_shock_secure", json!(security.secure));
            if let Some(attack) = security.counterexample {
                report.witness = Some(attack_value(&shocked, &attack));
                report
                    .diagnostics
                    .push("witness attack is valid on the shocked graph".to_string());
            }
            Ok(report)
        }
        Verb::Loss {
            graph,
            psi,
            local,
            stable,
        } => {
            let g = load_graph(&graph.graph)?;
            let psi = parse_rat(psi, "--psi")?;
            let mut report = Report::new("loss");
            report.set("psi", Value::String(format_rational(&psi)));
            let loss = match local {
                None => {
                    if *stable {
                        return Err(CliError::usage(
                            "--stable applies to the coalition-local measure; pass --local",
                        ));
                    }
                    worst_case_loss_global(&g, &psi, &limits)?
                }
                Some(list) => {
                    let coalition = parse_services(&g, list)?;
                    report.set("coalition", json!(g.service_ids(coalition)));
                    let mode = if *stable {
                        CascadeMode::Stable
                    } else {
                        CascadeMode::Valid
                    };
                    worst_case_loss_local(&g, coalition, &psi, mode, &limits)?
                }
            };
            report.set_rational("loss", &loss.loss);
            report.set_rational("realized_shock_fraction", &loss.realized_shock_fraction);
            report.witness = Some(cascade_witness_value(
                &g,
                loss.witness_shock.removed,
                &loss.witness_cascade,
            )?);
            Ok(report)
        }
        Verb::CascadeVerify {
            graph,
            witness,
            psi,
            local,
        } => {
            let g = load_graph(&graph.graph)?;
            let text = std::fs::read_to_string(witness)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", witness.display())))?;
            let (shock, cascade) = parse_cascade_witness(&g, &text)?;
            let mut report = Report::new("cascade-verify");
            report.set("shock", json!(g.validator_ids(shock)));
            report.set("steps", json!(cascade.steps.len()));
            report.set(
                "mode",
                serde_json::to_value(cascade.mode).expect("mode serializes"),
            );
            let mut ok = true;
            if let Some(text) = psi {
                let psi = parse_rat(text, "--psi")?;
                report.set("psi", Value::String(format_rational(&psi)));
                let coalition = match local {
                    None => None,
                    Some(list) => {
                        let c = parse_services(&g, list)?;
                        report.set("coalition", json!(g.service_ids(c)));
                        Some(c)
                    }
                };
                let admissible = shock_admissible(&g, shock, &psi, coalition)?;
                report.set("admissible", json!(admissible));
                ok &= admissible;
            } else if local.is_some() {
                return Err(CliError::usage("--local on cascade-verify requires --psi"));
            }
            let verdict = verify_cascade(&g, shock, &cascade, &limits)?;
            report.set("ok", json!(verdict.ok));
            if let Some(step) = verdict.failing_step {
                report.set("failing_step", json!(step));
            }
            if let Some(reason) = verdict.reason {
                report.diagnostics.push(reason);
            }
            ok &= verdict.ok;
            report.failed = !ok;
            Ok(report)
        }
        Verb::Depth { graph, witness } => {
            let g = load_graph(&graph.graph)?;
            let text = std::fs::read_to_string(witness)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", witness.display())))?;
            let (shock, cascade) = parse_cascade_witness(&g, &text)?;
            let depth = reference_depth(&g, shock, &cascade)?;
            let mut report = Report::new("depth");
            report.set("depth", json!(depth));
            report.set("steps", json!(cascade.steps.len()));
            Ok(report)
        }
        Verb::LengthBound {
            graph,
            gamma,
            psi,
            depth,
        } => {
            let g = load_graph(&graph.graph)?;
            let gamma = parse_rat(gamma, "--gamma")?;
            let psi = parse_rat(psi, "--psi")?;
            let bound = restake_core::cascade::length_bound(&g, &gamma, &psi, *depth)?;
            let mut report = Report::new("length-bound");
            report.set("gamma", Value::String(format_rational(&gamma)));
            report.set("psi", Value::String(format_rational(&psi)));
            report.set("depth", json!(depth));
            report.set_rational("bound", &bound);
            Ok(report)
        }
        Verb::Generate {
            name,
            epsilon,
            psi,
            gamma,
            pi,
            sigma_a,
            n,
            base,
            local,
        } => {
            let output = generate(
                name, epsilon, psi, gamma, pi, sigma_a, n, base, local, &limits,
            )?;
            let mut report = Report::new("generate");
            report.set("name", json!(name));
            report.set(
                "graph",
                serde_json::from_str(&restake_core::serialize_graph(&output.graph))
                    .expect("graph serialization is valid JSON"),
            );
            report.set(
                "claims",
                serde_json::to_value(&output.claims).expect("claims serialize"),
            );
            Ok(report)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn generate(
    name: &str,
    epsilon: &Option<String>,
    psi: &Option<String>,
    gamma: &Option<String>,
    pi: &Option<String>,
    sigma_a: &Option<String>,
    n: &Option<usize>,
    base: &Option<PathBuf>,
    local: &Option<String>,
    limits: &EnumLimits,
) -> Result<ConstructionOutput, CliError> {
    let need = |flag: &str, value: &Option<String>| -> Result<Rational, CliError> {
        match value {
            Some(text) => parse_rat(text, flag),
            None => Err(CliError::usage(format!("{name} requires {flag}"))),
        }
    };
    match name {
        "two-validator" => Ok(gen_two_validator(&need("--epsilon", epsilon)?)?),
        "noslack" => Ok(gen_noslack(
            &need("--psi", psi)?,
            &need("--gamma", gamma)?,
            &need("--epsilon", epsilon)?,
            &need("--sigma-a", sigma_a)?,
        )?),
        "triangle" => Ok(gen_triangle(
            &need("--gamma", gamma)?,
            &need("--pi", pi)?,
            &need("--sigma-a", sigma_a)?,
        )?),
        "ring" => {
            let n = n.ok_or_else(|| CliError::usage("ring requires --n"))?;
            Ok(gen_ring(n)?)
        }
        "local-variant" => {
            let base = base
                .as_ref()
                .ok_or_else(|| CliError::usage("local-variant requires --base"))?;
            let g = load_graph(base)?;
            let coalition = match local {
                Some(list) => parse_services(&g, list)?,
                None => return Err(CliError::usage("local-variant requires --local")),
            };
            Ok(gen_local_variant(
                &g,
                coalition,
                &need("--epsilon", epsilon)?,
                limits,
            )?)
        }
        "stable-union" => Ok(gen_stable_union_counterexample()?),
        "freerider" => Ok(gen_freerider_demo()?),
        "cycle" => Ok(gen_cycle_demo()?),
        other => Err(CliError::usage(format!(
            "unknown construction {other:?}; expected one of two-validator, noslack, \
             triangle, ring, local-variant, stable-union, freerider, cycle"
        ))),
    }
}

fn emit(report: &Report, json: bool) {
    if json {
        let mut obj = Map::new();
        obj.insert("verb".to_string(), json!(report.verb));
        obj.insert(
            "verdicts".to_string(),
            Value::Object(report.verdicts.clone()),
        );
        if let Some(witness) = &report.witness {
            obj.insert("witness".to_string(), witness.clone());
        }
        obj.insert("diagnostics".to_string(), json!(report.diagnostics));
        println!(
            "{}",
            serde_json::to_string_pretty(&Value::Object(obj)).expect("report serializes")
        );
        return;
    }
    for (key, value) in &report.verdicts {
        println!("{key}: {}", render_text(value));
    }
    if let Some(witness) = &report.witness {
        println!(
            "witness: {}",
            serde_json::to_string_pretty(witness).expect("witness serializes")
        );
    }
    for line in &report.diagnostics {
        eprintln!("note: {line}");
    }
}

/// Text rendering: rationals get a clearly marked decimal approximation.
fn render_text(value: &Value) -> String {
    match value {
        Value::String(s) => match parse_rational(s) {
            Ok(r) => format!("{s} (~{:.6}, approx)", restake_core::rational::approx_decimal(&r)),
            Err(_) => s.clone(),
        },
        Value::Bool(b) => b.to_string(),
        other => serde_json::to_string(other).expect("value serializes"),
    }
}
