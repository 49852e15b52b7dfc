use std::fmt;

use super::{
    EntityRole, FlowKind, FlowScript, Outcome, Scale, SignalingError, Step, StepKind, TraceEntry,
    TraceRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    Ok,
    FirstDivergence(u32),
}

/// Positional comparison of (kind, actor, peer, label) per step.
pub fn validate_trace(trace: &TraceRecord, script: &FlowScript) -> Validation {
    let mut executed = trace.steps();
    for expected in &script.steps {
        match executed.next() {
            Some(step) if step.same_action(expected) => {}
            _ => return Validation::FirstDivergence(expected.seq_no),
        }
    }
    if executed.next().is_some() {
        return Validation::FirstDivergence(script.steps.len() as u32 + 1);
    }
    Validation::Ok
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Data forwarding only after target-link setup completes.
    ForwardAfterLinkSetup,
    /// Old-link deletion only after handover completion has been signalled.
    DeleteAfterComplete,
    /// Directory update is the final action of a small-scale flow.
    DirectoryUpdateLast,
    /// Authorization precedes admission control in medium-scale macro-to-femto.
    AuthorizeBeforeAdmission,
}

impl Rule {
    pub fn code(&self) -> &'static str {
        match self {
            Rule::ForwardAfterLinkSetup => "P1",
            Rule::DeleteAfterComplete => "P2",
            Rule::DirectoryUpdateLast => "P3",
            Rule::AuthorizeBeforeAdmission => "P4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    /// seq_no of the offending step.
    pub seq_no: u32,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at step {}: {}", self.rule.code(), self.seq_no, self.detail)
    }
}

fn has_prefix(step: &Step, prefix: &str) -> bool {
    step.label == prefix || step.label.starts_with(&format!("{prefix}."))
}

fn positions<'a>(steps: &'a [&'a Step], prefixes: &'a [&str]) -> impl Iterator<Item = usize> + 'a {
    steps
        .iter()
        .enumerate()
        .filter(move |(_, s)| prefixes.iter().any(|p| has_prefix(s, p)))
        .map(|(i, _)| i)
}

/// Every step matching `later` must come after every step matching `earlier`,
/// and `earlier` must be present whenever `later` is.
fn ordered_after(
    steps: &[&Step],
    earlier: &[&str],
    later: &[&str],
    rule: Rule,
    out: &mut Vec<Violation>,
) {
    let last_earlier = positions(steps, earlier).max();
    for idx in positions(steps, later) {
        let ok = matches!(last_earlier, Some(e) if e < idx);
        if !ok {
            out.push(Violation {
                rule,
                seq_no: steps[idx].seq_no,
                detail: format!(
                    "`{}` precedes completion of {}",
                    steps[idx].label,
                    earlier.join("/")
                ),
            });
        }
    }
}

/// Cross-flow safety properties over an executed trace.
pub fn precedence_check(trace: &TraceRecord) -> Vec<Violation> {
    let steps: Vec<&Step> = trace.steps().collect();
    let mut violations = Vec::new();

    ordered_after(
        &steps,
        &["link-setup"],
        &["data-forwarding"],
        Rule::ForwardAfterLinkSetup,
        &mut violations,
    );
    ordered_after(
        &steps,
        &["handover-complete", "path-switch-ack"],
        &["old-link-delete"],
        Rule::DeleteAfterComplete,
        &mut violations,
    );

    if trace.flow_kind.scale() == Scale::Small {
        let first_update = positions(&steps, &["fis-update"]).min();
        match first_update {
            Some(first) => {
                if let Some(step) = steps.iter().skip(first).find(|s| !has_prefix(s, "fis-update")) {
                    violations.push(Violation {
                        rule: Rule::DirectoryUpdateLast,
                        seq_no: step.seq_no,
                        detail: format!("`{}` follows the directory update", step.label),
                    });
                }
            }
            None if trace.outcome == Outcome::Completed => violations.push(Violation {
                rule: Rule::DirectoryUpdateLast,
                seq_no: steps.last().map_or(0, |s| s.seq_no),
                detail: "completed flow has no directory update".into(),
            }),
            None => {}
        }
    }

    if trace.flow_kind == FlowKind::MediumMacroToFemto {
        ordered_after(
            &steps,
            &["authorization-check"],
            &["cac-rrc", "cac-rrc-interference"],
            Rule::AuthorizeBeforeAdmission,
            &mut violations,
        );
    }

    violations
}

impl TraceRecord {
    /// Wraps externally produced steps (e.g. a trace file) as a completed
    /// trace with a fresh logical clock.
    pub fn from_steps(flow_kind: FlowKind, steps: Vec<Step>) -> Self {
        TraceRecord {
            flow_kind,
            entries: steps
                .into_iter()
                .enumerate()
                .map(|(i, step)| TraceEntry {
                    clock: i as u64 + 1,
                    step,
                })
                .collect(),
            outcome: Outcome::Completed,
        }
    }
}

/// Parses the tab-separated trace format. Blank lines are skipped.
pub fn parse_trace_text(text: &str) -> Result<Vec<Step>, SignalingError> {
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| SignalingError::TraceSyntax {
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [seq, kind, actor, peer, label] = fields[..] else {
            return Err(err(format!("expected 5 tab-separated fields, got {}", fields.len())));
        };
        let seq_no = seq
            .parse::<u32>()
            .map_err(|e| err(format!("bad seq_no `{seq}`: {e}")))?;
        let kind = match kind {
            "message" => StepKind::Message,
            "local_action" => StepKind::LocalAction,
            other => return Err(err(format!("unknown step kind `{other}`"))),
        };
        let actor: EntityRole = actor.parse().map_err(|e: SignalingError| err(e.to_string()))?;
        let peer = match peer {
            "-" => None,
            p => Some(p.parse::<EntityRole>().map_err(|e| err(e.to_string()))?),
        };
        if kind == StepKind::Message && peer.is_none() {
            return Err(err("message without a receiver".into()));
        }
        steps.push(Step {
            seq_no,
            kind,
            actor,
            peer,
            label: label.to_string(),
        });
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signaling::{build_flow_script, execute_flow, FaultConfig, Topology};

    fn canonical(kind: FlowKind) -> (FlowScript, TraceRecord) {
        let script = build_flow_script(kind);
        let trace = execute_flow(&script, &Topology::for_scale(script.scale), FaultConfig::none()).unwrap();
        (script, trace)
    }

    fn reorder(kind: FlowKind, edit: impl FnOnce(&mut Vec<Step>)) -> TraceRecord {
        let mut steps = build_flow_script(kind).steps;
        edit(&mut steps);
        TraceRecord::from_steps(kind, steps)
    }

    #[test]
    fn canonical_traces_validate_and_obey_rules() {
        for kind in FlowKind::ALL {
            let (script, trace) = canonical(kind);
            assert_eq!(validate_trace(&trace, &script), Validation::Ok, "{kind}");
            assert!(precedence_check(&trace).is_empty(), "{kind}: {:?}", precedence_check(&trace));
        }
    }

    #[test]
    fn swapped_steps_diverge_at_first_swap() {
        let script = build_flow_script(FlowKind::SmallMacroToFemto);
        let trace = reorder(FlowKind::SmallMacroToFemto, |s| s.swap(11, 12));
        assert_eq!(validate_trace(&trace, &script), Validation::FirstDivergence(12));
    }

    #[test]
    fn truncated_trace_diverges_at_first_missing() {
        let script = build_flow_script(FlowKind::SmallFemtoToMacro);
        let trace = reorder(FlowKind::SmallFemtoToMacro, |s| s.truncate(17));
        assert_eq!(validate_trace(&trace, &script), Validation::FirstDivergence(18));
    }

    #[test]
    fn extra_step_diverges_past_end() {
        let script = build_flow_script(FlowKind::SmallFemtoToMacro);
        let trace = reorder(FlowKind::SmallFemtoToMacro, |s| {
            let extra = s[0].clone();
            s.push(extra)
        });
        assert_eq!(validate_trace(&trace, &script), Validation::FirstDivergence(26));
    }

    #[test]
    fn forwarding_before_link_setup_violates_p1() {
        let trace = reorder(FlowKind::SmallMacroToFemto, |s| {
            let fwd = s.remove(14);
            s.insert(13, fwd);
        });
        let v = precedence_check(&trace);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::ForwardAfterLinkSetup);
        assert_eq!(v[0].seq_no, 15);
    }

    #[test]
    fn directory_update_before_delete_violates_p3() {
        let trace = reorder(FlowKind::SmallMacroToFemto, |s| {
            let updates: Vec<Step> = s.drain(25..).collect();
            for (offset, u) in updates.into_iter().enumerate() {
                s.insert(22 + offset, u);
            }
        });
        let rules: Vec<Rule> = precedence_check(&trace).iter().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::DirectoryUpdateLast));
    }

    #[test]
    fn delete_before_complete_violates_p2() {
        let trace = reorder(FlowKind::SmallFemtoToMacro, |s| {
            let del = s.remove(20);
            s.insert(17, del);
        });
        let rules: Vec<Rule> = precedence_check(&trace).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec![Rule::DeleteAfterComplete]);
    }

    #[test]
    fn admission_before_authorization_violates_p4() {
        let trace = reorder(FlowKind::MediumMacroToFemto, |s| {
            let cac = s.remove(10);
            s.insert(8, cac);
        });
        let rules: Vec<Rule> = precedence_check(&trace).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec![Rule::AuthorizeBeforeAdmission]);
    }

    #[test]
    fn trace_text_round_trip() {
        for kind in FlowKind::ALL {
            let (script, trace) = canonical(kind);
            let parsed = parse_trace_text(&trace.to_text()).unwrap();
            assert_eq!(parsed, script.steps);
        }
    }

    #[test]
    fn trace_text_errors_carry_line() {
        let err = parse_trace_text("1\tmessage\tMS\tNodeB\tx\n2\tmessage\tMS\n").unwrap_err();
        assert!(matches!(err, SignalingError::TraceSyntax { line: 2, .. }));
        let err = parse_trace_text("1\tmessage\tMS\t-\tx\n").unwrap_err();
        assert!(matches!(err, SignalingError::TraceSyntax { line: 1, .. }));
        let err = parse_trace_text("1\tmessage\tSGSN\tMS\tx\n").unwrap_err();
        assert!(matches!(err, SignalingError::TraceSyntax { line: 1, .. }));
    }
}
