//! Command orchestration and output formatting.
//!
//! CSV schemas:
//!
//! * `blocking`, `sweep-k`: `K,P_B,P_D,utilization,carried_load`
//! * `optimize-k`: `K,score,satisfied,chosen`
//! * `cac-sim`, `sweep-t`: `T,entries,handovers,unnecessary,fraction,ci95`
//! * `des-validate`: `metric,closed_form,empirical,std_error,z,pass`
//!
//! Undefined values are written as `NA`.

use std::fmt::Write as _;

use crate::config::{Command, Config, Format};
use crate::queuing::{
    blocking_report, optimize_k, sweep_guard_threshold, BlockingReport, GuardChannelParams,
    OptimizationCriterion, QueuingError,
};
use crate::signaling::{
    build_flow_script, execute_flow, precedence_check, validate_trace, FaultConfig, FlowKind,
    Outcome, Topology, Validation,
};
use crate::sim::{des::ClassEstimate, run_blocking_des, sweep_threshold_time, AggregateStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub config: Config,
    pub format: Format,
    /// Only for `flow`.
    pub flow: Option<FlowKind>,
    /// Only for `flow`: drop this step to observe divergence.
    pub drop_step: Option<u32>,
}

/// What a command produced. `output` is the artifact (CSV, summary or trace
/// text); `diagnostics` is human-oriented commentary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub output: String,
    pub diagnostics: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub message: String,
    pub exit_code: i32,
}

impl RunError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: EXIT_CONFIG,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for RunError {}

fn na(value: Option<f64>) -> String {
    match value {
        Some(v) if v.is_finite() => format!("{v}"),
        _ => "NA".to_string(),
    }
}

fn queuing(config: &Config) -> Result<GuardChannelParams, RunError> {
    config
        .queuing
        .ok_or_else(|| RunError::config("missing [queuing] section"))
}

pub fn run(rc: &RunConfig) -> Result<RunOutput, RunError> {
    match rc.command {
        Command::Blocking => {
            let params = queuing(&rc.config)?;
            Ok(ok(blocking_table(&[(params.guard_threshold, blocking_report(&params))], rc.format)))
        }
        Command::SweepK => {
            let params = queuing(&rc.config)?;
            let table = sweep_guard_threshold(&params).map_err(|e| RunError::config(e.to_string()))?;
            let rows: Vec<_> = table.iter().map(|r| (r.guard_threshold, r.report)).collect();
            Ok(ok(blocking_table(&rows, rc.format)))
        }
        Command::OptimizeK => run_optimize(rc),
        Command::CacSim => {
            let sc = &rc.config.scenario;
            let t = sc.thresholds.min_dwell;
            let rows = sweep_threshold_time(sc, &[t]).map_err(|e| RunError::config(e.to_string()))?;
            Ok(ok(stats_table(&rows, rc.format)))
        }
        Command::SweepT => {
            let rows = sweep_threshold_time(&rc.config.scenario, &rc.config.threshold_times)
                .map_err(|e| RunError::config(e.to_string()))?;
            Ok(ok(stats_table(&rows, rc.format)))
        }
        Command::DesValidate => run_des_validate(rc),
        Command::Flow => run_flow(rc),
    }
}

fn ok(output: String) -> RunOutput {
    RunOutput {
        output,
        diagnostics: String::new(),
        exit_code: EXIT_OK,
    }
}

pub fn blocking_table(rows: &[(usize, BlockingReport)], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("K,P_B,P_D,utilization,carried_load\n");
            for (k, r) in rows {
                let _ = writeln!(
                    out,
                    "{k},{},{},{},{}",
                    r.new_call_blocking, r.handover_blocking, r.utilization, r.carried_load
                );
            }
        }
        Format::Summary => {
            for (k, r) in rows {
                let _ = writeln!(
                    out,
                    "K={k:<4} P_B={:.6}  P_D={:.6}  utilization={:.4}  carried_load={:.4} erl",
                    r.new_call_blocking, r.handover_blocking, r.utilization, r.carried_load
                );
            }
        }
    }
    out
}

pub fn stats_table(rows: &[(f64, AggregateStats)], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("T,entries,handovers,unnecessary,fraction,ci95\n");
            for (t, s) in rows {
                let _ = writeln!(
                    out,
                    "{t},{},{},{},{},{}",
                    s.entries,
                    s.handovers,
                    s.unnecessary(),
                    na(s.unnecessary_fraction()),
                    na(s.ci95_halfwidth())
                );
            }
        }
        Format::Summary => {
            for (t, s) in rows {
                let _ = writeln!(
                    out,
                    "T={t} s: {} entries, {} handovers ({} incl. return legs), {} unnecessary \
                     ({} return, {} termination), fraction={} ± {}",
                    s.entries,
                    s.handovers,
                    s.total_handover_events(),
                    s.unnecessary(),
                    s.unnecessary_return,
                    s.unnecessary_termination,
                    na(s.unnecessary_fraction()),
                    na(s.ci95_halfwidth())
                );
            }
        }
    }
    out
}

fn run_optimize(rc: &RunConfig) -> Result<RunOutput, RunError> {
    let params = queuing(&rc.config)?;
    let table = sweep_guard_threshold(&params).map_err(|e| RunError::config(e.to_string()))?;
    let criterion = rc.config.criterion;
    let describe = match criterion {
        OptimizationCriterion::MaxKWithinTarget { target } => format!("max K with P_D <= {target}"),
        OptimizationCriterion::MarginalTradeoff { ratio_threshold } => {
            format!("marginal tradeoff ratio < {ratio_threshold}")
        }
    };
    let choice = match optimize_k(&table, criterion) {
        Ok(choice) => choice,
        Err(e @ QueuingError::Infeasible { .. }) => {
            return Ok(RunOutput {
                output: String::new(),
                diagnostics: format!("infeasible: {e}\n"),
                exit_code: EXIT_VALIDATION,
            })
        }
        Err(e) => return Err(RunError::config(e.to_string())),
    };

    let mut out = String::new();
    match rc.format {
        Format::Csv => {
            out.push_str("K,score,satisfied,chosen\n");
            for step in &choice.trace {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    step.guard_threshold,
                    na(Some(step.score)),
                    u8::from(step.satisfied),
                    u8::from(step.guard_threshold == choice.guard_threshold && step.satisfied)
                );
            }
        }
        Format::Summary => {
            let _ = writeln!(out, "criterion: {describe}");
            for step in &choice.trace {
                let _ = writeln!(
                    out,
                    "  K={:<4} score={}  {}",
                    step.guard_threshold,
                    na(Some(step.score)),
                    if step.satisfied { "satisfied" } else { "rejected" }
                );
            }
            let _ = writeln!(out, "chosen K = {}", choice.guard_threshold);
            let chosen = table.iter().find(|r| r.guard_threshold == choice.guard_threshold);
            let full = table.last();
            if let (Some(c), Some(f)) = (chosen, full) {
                let _ = writeln!(
                    out,
                    "utilization {:.4} vs {:.4} without guard channels ({:+.2} points, {:+.2}% relative)",
                    c.report.utilization,
                    f.report.utilization,
                    (c.report.utilization - f.report.utilization) * 100.0,
                    (c.report.utilization / f.report.utilization - 1.0) * 100.0
                );
            }
        }
    }
    Ok(RunOutput {
        output: out,
        diagnostics: format!("chosen K = {} ({describe})\n", choice.guard_threshold),
        exit_code: EXIT_OK,
    })
}

/// Pass threshold for the empirical-vs-closed-form comparison.
pub const DES_MAX_Z: f64 = 3.0;

fn run_des_validate(rc: &RunConfig) -> Result<RunOutput, RunError> {
    let params = queuing(&rc.config)?;
    let exact = blocking_report(&params);
    let sim = run_blocking_des(&params, rc.config.des_horizon, rc.config.scenario.seed)
        .map_err(|e| RunError::config(e.to_string()))?;

    let check = |est: &ClassEstimate, reference: f64| {
        let z = est.z_score(reference);
        (z, z.map(|z| z < DES_MAX_Z))
    };
    let (z_b, pass_b) = check(&sim.new_calls, exact.new_call_blocking);
    let (z_d, pass_d) = check(&sim.handovers, exact.handover_blocking);
    let passed = pass_b.unwrap_or(true) && pass_d.unwrap_or(true);
    let flag = |p: Option<bool>| match p {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "NA",
    };

    let mut out = String::new();
    match rc.format {
        Format::Csv => {
            out.push_str("metric,closed_form,empirical,std_error,z,pass\n");
            let _ = writeln!(
                out,
                "P_B,{},{},{},{},{}",
                exact.new_call_blocking,
                na(sim.new_calls.blocking),
                na(sim.new_calls.std_error),
                na(z_b),
                flag(pass_b)
            );
            let _ = writeln!(
                out,
                "P_D,{},{},{},{},{}",
                exact.handover_blocking,
                na(sim.handovers.blocking),
                na(sim.handovers.std_error),
                na(z_d),
                flag(pass_d)
            );
            let _ = writeln!(out, "utilization,{},{},NA,NA,NA", exact.utilization, sim.utilization);
        }
        Format::Summary => {
            let _ = writeln!(
                out,
                "P_B: closed form {:.6}, empirical {} (se {}, z {}) {}",
                exact.new_call_blocking,
                na(sim.new_calls.blocking),
                na(sim.new_calls.std_error),
                na(z_b),
                flag(pass_b)
            );
            let _ = writeln!(
                out,
                "P_D: closed form {:.6}, empirical {} (se {}, z {}) {}",
                exact.handover_blocking,
                na(sim.handovers.blocking),
                na(sim.handovers.std_error),
                na(z_d),
                flag(pass_d)
            );
            let _ = writeln!(
                out,
                "utilization: closed form {:.6}, empirical {:.6}",
                exact.utilization, sim.utilization
            );
        }
    }
    Ok(RunOutput {
        output: out,
        diagnostics: format!(
            "verdict: {} ({} new-call and {} handover arrivals)\n",
            if passed { "PASS" } else { "FAIL" },
            sim.new_calls.arrivals,
            sim.handovers.arrivals
        ),
        exit_code: if passed { EXIT_OK } else { EXIT_VALIDATION },
    })
}

fn run_flow(rc: &RunConfig) -> Result<RunOutput, RunError> {
    let kind = rc
        .flow
        .ok_or_else(|| RunError::config("flow: name a call flow, e.g. SMALL_MACRO_TO_FEMTO"))?;
    let script = build_flow_script(kind);
    let fault = rc.drop_step.map_or(FaultConfig::none(), FaultConfig::drop_step);
    let trace = execute_flow(&script, &Topology::for_scale(script.scale), fault)
        .map_err(|e| RunError::config(e.to_string()))?;

    let mut diag = String::new();
    let mut passed = true;
    match trace.outcome {
        Outcome::Completed => {
            let _ = writeln!(diag, "{kind}: completed {} steps", trace.entries.len());
        }
        Outcome::Diverged { seq_no } => {
            passed = false;
            let _ = writeln!(diag, "{kind}: diverged at step {seq_no}");
        }
    }
    match validate_trace(&trace, &script) {
        Validation::Ok => diag.push_str("validate_trace: ok\n"),
        Validation::FirstDivergence(seq) => {
            passed = false;
            let _ = writeln!(diag, "validate_trace: first divergence at step {seq}");
        }
    }
    let violations = precedence_check(&trace);
    if violations.is_empty() {
        diag.push_str("precedence_check: no violations\n");
    } else {
        passed = false;
        for v in &violations {
            let _ = writeln!(diag, "precedence_check: {v}");
        }
    }
    if !script.reconstructed.is_empty() {
        let steps: Vec<String> = script.reconstructed.iter().map(u32::to_string).collect();
        let _ = writeln!(diag, "note: steps {} are reconstructed", steps.join(", "));
    }

    Ok(RunOutput {
        output: trace.to_text(),
        diagnostics: diag,
        exit_code: if passed { EXIT_OK } else { EXIT_VALIDATION },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn rc(command: Command, text: &str) -> RunConfig {
        RunConfig {
            command,
            config: parse_config(text, command).unwrap(),
            format: Format::Csv,
            flow: None,
            drop_step: None,
        }
    }

    const FIG8A: &str = "[queuing]\nN = 10\nK = 8\nnew_call_rate = 0.1\nhandover_rate = 0.075\nservice_time = 120 s\n";

    #[test]
    fn blocking_emits_one_row() {
        let out = run(&rc(Command::Blocking, FIG8A)).unwrap();
        let lines: Vec<&str> = out.output.lines().collect();
        assert_eq!(lines[0], "K,P_B,P_D,utilization,carried_load");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("8,"));
    }

    #[test]
    fn optimize_reports_infeasibility() {
        let text = format!("{FIG8A}[optimize]\ntarget = 0.000001\n");
        let out = run(&rc(Command::OptimizeK, &text)).unwrap();
        assert_eq!(out.exit_code, EXIT_VALIDATION);
        assert!(out.diagnostics.contains("infeasible"));
    }

    #[test]
    fn optimize_marks_chosen_row() {
        let out = run(&rc(Command::OptimizeK, FIG8A)).unwrap();
        assert_eq!(out.exit_code, EXIT_OK);
        let last = out.output.lines().last().unwrap();
        assert!(last.starts_with("8,") && last.ends_with(",1,1"), "{last}");
        assert!(out.diagnostics.contains("chosen K = 8"));
    }

    #[test]
    fn undefined_fraction_is_na() {
        let text = "[cac]\nvelocity_threshold = 0.0000000001 m/s\ntrials = 500\n";
        let out = run(&rc(Command::CacSim, text)).unwrap();
        let row = out.output.lines().nth(1).unwrap();
        assert!(row.ends_with(",0,0,NA,NA"), "{row}");
    }

    #[test]
    fn flow_without_name_is_config_error() {
        let err = run(&rc(Command::Flow, "")).unwrap_err();
        assert_eq!(err.exit_code, EXIT_CONFIG);
    }

    #[test]
    fn dropped_flow_step_fails_validation() {
        let mut r = rc(Command::Flow, "");
        r.flow = Some(FlowKind::SmallMacroToFemto);
        r.drop_step = Some(11);
        let out = run(&r).unwrap();
        assert_eq!(out.exit_code, EXIT_VALIDATION);
        assert_eq!(out.output.lines().count(), 10);
        assert!(out.diagnostics.contains("diverged at step 11"));
    }
}
