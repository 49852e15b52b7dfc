//! The four built-in call flows.
//!
//! Grouped steps are expanded one per seq_no with `.1`, `.2`, ... suffixes.
//! Label prefixes are significant: the precedence rules key on
//! `link-setup`, `data-forwarding`, `handover-complete`, `path-switch-ack`,
//! `old-link-delete`, `fis-update`, `authorization-check` and `cac-rrc`.

use super::EntityRole::{self, *};
use super::{FlowKind, FlowScript, Step};

struct ScriptBuilder {
    steps: Vec<Step>,
}

impl ScriptBuilder {
    fn new() -> Self {
        Self { steps: Vec::new() }
    }

    fn next_seq(&self) -> u32 {
        self.steps.len() as u32 + 1
    }

    fn msg(mut self, actor: EntityRole, peer: EntityRole, label: &str) -> Self {
        let seq = self.next_seq();
        self.steps.push(Step::message(seq, actor, peer, label));
        self
    }

    /// A grouped exchange: hop `i` of `hops` is labelled `label.i`.
    fn chain(mut self, hops: &[(EntityRole, EntityRole)], label: &str) -> Self {
        for (i, (from, to)) in hops.iter().enumerate() {
            self = self.msg(*from, *to, &format!("{label}.{}", i + 1));
        }
        self
    }

    fn local(mut self, actor: EntityRole, label: &str) -> Self {
        let seq = self.next_seq();
        self.steps.push(Step::local(seq, actor, label));
        self
    }

    fn joint(mut self, actor: EntityRole, co_actor: EntityRole, label: &str) -> Self {
        let seq = self.next_seq();
        let mut step = Step::local(seq, actor, label);
        step.peer = Some(co_actor);
        self.steps.push(step);
        self
    }

    fn finish(self, flow_kind: FlowKind, reconstructed: Vec<u32>) -> FlowScript {
        FlowScript {
            flow_kind,
            scale: flow_kind.scale(),
            steps: self.steps,
            reconstructed,
        }
    }
}

pub fn build_flow_script(flow_kind: FlowKind) -> FlowScript {
    match flow_kind {
        FlowKind::SmallMacroToFemto => small_macro_to_femto(),
        FlowKind::SmallFemtoToMacro => small_femto_to_macro(),
        FlowKind::MediumMacroToFemto => medium_macro_to_femto(),
        FlowKind::MediumFemtoToMacro => medium_femto_to_macro(),
    }
}

fn small_macro_to_femto() -> FlowScript {
    ScriptBuilder::new()
        .chain(&[(Ms, NodeB), (Ms, NodeB)], "measurement-report") // 1-2
        .local(Ms, "handover-decision") // 3
        .msg(NodeB, Rnc, "handover-request") // 4
        .chain(&[(Rnc, Fis), (Fis, Rnc)], "fis-info-check") // 5-6
        .chain(&[(Rnc, Cn), (Cn, Rnc), (Rnc, Fap)], "handover-request-forward") // 7-9
        .local(Fap, "cac-rrc") // 10
        .msg(Fap, Rnc, "handover-response") // 11
        .chain(&[(Rnc, Fap), (Fap, Rnc), (Rnc, Fap)], "link-setup") // 12-14
        .msg(Rnc, Fap, "data-forwarding") // 15
        .chain(&[(Ms, Fap), (Fap, Ms)], "channel-reestablish") // 16-17
        .msg(Ms, NodeB, "detach") // 18
        .chain(&[(Ms, Fap), (Fap, Ms)], "synchronization") // 19-20
        .chain(&[(Ms, Fap), (Fap, Rnc)], "handover-complete") // 21-22
        .chain(&[(NodeB, Rnc), (Rnc, NodeB), (NodeB, Rnc)], "old-link-delete") // 23-25
        .chain(&[(Rnc, Fis), (Fis, Rnc)], "fis-update") // 26-27
        .finish(FlowKind::SmallMacroToFemto, Vec::new())
}

fn small_femto_to_macro() -> FlowScript {
    ScriptBuilder::new()
        .chain(&[(Ms, Fap), (Ms, Fap)], "measurement-report") // 1-2
        .local(Fap, "handover-decision") // 3
        .msg(Fap, Rnc, "handover-request") // 4
        .chain(&[(Rnc, Cn), (Cn, Rnc), (Rnc, NodeB)], "handover-request-forward") // 5-7
        .joint(NodeB, Rnc, "cac-rrc") // 8
        .msg(NodeB, Rnc, "handover-response") // 9
        .chain(&[(Rnc, NodeB), (NodeB, Rnc), (Rnc, NodeB)], "link-setup") // 10-12
        .msg(Rnc, NodeB, "data-forwarding") // 13
        .chain(&[(Ms, NodeB), (NodeB, Ms)], "channel-reestablish") // 14-15
        .msg(Ms, Fap, "detach") // 16
        .chain(&[(Ms, NodeB), (NodeB, Ms)], "synchronization") // 17-18
        .chain(&[(Ms, NodeB), (NodeB, Rnc)], "handover-complete") // 19-20
        .chain(&[(Fap, Rnc), (Rnc, Fap), (Fap, Rnc)], "old-link-delete") // 21-23
        .chain(&[(Rnc, Fis), (Fis, Rnc)], "fis-update") // 24-25
        .finish(FlowKind::SmallFemtoToMacro, Vec::new())
}

fn medium_macro_to_femto() -> FlowScript {
    ScriptBuilder::new()
        .chain(&[(Ms, NodeB), (Ms, NodeB)], "measurement-report") // 1-2
        .local(Ms, "handover-decision") // 3
        .msg(NeighborDb, NodeB, "neighbor-list-provision") // 4
        .msg(NodeB, Rnc, "handover-request") // 5
        .chain(&[(Rnc, Cn), (Cn, Fgw), (Fgw, Fap)], "handover-request-forward") // 6-8
        .chain(&[(Fap, Fgw), (Fgw, Fap)], "authorization-check") // 9-10
        .local(Fap, "cac-rrc-interference") // 11
        .chain(&[(Fap, Fgw), (Fgw, Cn), (Cn, Rnc)], "handover-response") // 12-14
        .chain(
            &[(Rnc, Cn), (Cn, Fgw), (Fgw, Fap), (Fap, Fgw), (Fgw, Fap)],
            "link-setup",
        ) // 15-19
        .msg(Fgw, Fap, "data-forwarding") // 20
        .chain(&[(Ms, Fap), (Fap, Ms)], "channel-reestablish") // 21-22
        .msg(Ms, NodeB, "detach") // 23
        .chain(&[(Ms, Fap), (Fap, Ms)], "synchronization") // 24-25
        // 26-28 are not enumerated in the source flow description.
        .chain(&[(Ms, Fap), (Fap, Fgw)], "handover-complete") // 26-27
        .msg(Fgw, Cn, "path-switch-ack") // 28
        .chain(&[(NodeB, Rnc), (Rnc, NodeB), (NodeB, Rnc)], "old-link-delete") // 29-31
        .finish(FlowKind::MediumMacroToFemto, vec![26, 27, 28])
}

fn medium_femto_to_macro() -> FlowScript {
    ScriptBuilder::new()
        .chain(&[(Ms, Fap), (Ms, Fap)], "measurement-report") // 1-2
        .local(Fap, "handover-decision") // 3
        .msg(Fap, Fgw, "handover-request") // 4
        .chain(&[(Fgw, Cn), (Cn, Rnc), (Rnc, NodeB)], "handover-request-forward") // 5-7
        .local(NodeB, "cac-rrc") // 8
        .msg(NodeB, Rnc, "handover-response") // 9
        .chain(
            &[
                (Rnc, NodeB),
                (NodeB, Rnc),
                (Rnc, Cn),
                (Cn, Fgw),
                (Fgw, Cn),
                (Cn, Rnc),
                (Rnc, NodeB),
            ],
            "link-setup",
        ) // 10-16
        .msg(Rnc, NodeB, "data-forwarding") // 17
        .chain(&[(Ms, NodeB), (NodeB, Ms)], "channel-reestablish") // 18-19
        .msg(Ms, Fap, "detach") // 20
        .chain(&[(Ms, NodeB), (NodeB, Ms)], "synchronization") // 21-22
        .chain(&[(Ms, NodeB), (NodeB, Rnc), (Rnc, Cn)], "handover-complete") // 23-25
        .chain(&[(Fap, Rnc), (Rnc, Fap), (Fap, Rnc)], "old-link-delete") // 26-28
        .finish(FlowKind::MediumFemtoToMacro, Vec::new())
}
