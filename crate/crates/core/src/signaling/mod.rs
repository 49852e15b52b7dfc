//! Handover call flows between the macrocell and femtocell layers.
//!
//! Each flow is an ordered script of steps over network entities. The
//! engine enacts a script over an in-memory bus with one state machine per
//! entity, and the checks compare the resulting trace against the script and
//! against ordering rules that every flow must respect.

mod check;
mod engine;
mod scripts;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use check::{parse_trace_text, precedence_check, validate_trace, Rule, Validation, Violation};
pub use engine::{execute_flow, FaultConfig, Outcome, TraceEntry, TraceRecord};
pub use scripts::build_flow_script;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignalingError {
    #[error("unknown flow kind `{0}`")]
    UnknownFlow(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("{role} is not part of the {scale} topology")]
    RoleMissing { role: EntityRole, scale: Scale },
    #[error("trace line {line}: {reason}")]
    TraceSyntax { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityRole {
    Ms,
    NodeB,
    Fap,
    Rnc,
    Fis,
    Cn,
    Fgw,
    NeighborDb,
}

impl EntityRole {
    pub const ALL: [EntityRole; 8] = [
        EntityRole::Ms,
        EntityRole::NodeB,
        EntityRole::Fap,
        EntityRole::Rnc,
        EntityRole::Fis,
        EntityRole::Cn,
        EntityRole::Fgw,
        EntityRole::NeighborDb,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityRole::Ms => "MS",
            EntityRole::NodeB => "NodeB",
            EntityRole::Fap => "FAP",
            EntityRole::Rnc => "RNC",
            EntityRole::Fis => "FIS",
            EntityRole::Cn => "CN",
            EntityRole::Fgw => "FGW",
            EntityRole::NeighborDb => "NeighborDB",
        }
    }
}

impl fmt::Display for EntityRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityRole {
    type Err = SignalingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| SignalingError::UnknownEntity(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    Small,
    Medium,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Small => "small-scale",
            Scale::Medium => "medium-scale",
        })
    }
}

/// The set of entities deployed in an architecture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub scale: Scale,
    pub roles: BTreeSet<EntityRole>,
}

impl Topology {
    /// RNC-anchored deployment with a femtocell information server.
    pub fn small() -> Self {
        use EntityRole::*;
        Self {
            scale: Scale::Small,
            roles: [Ms, NodeB, Fap, Rnc, Fis, Cn].into_iter().collect(),
        }
    }

    /// Gateway deployment: FAPs sit behind an FGW that reaches the RNC
    /// through the core; each NodeB hosts a neighbor database.
    pub fn medium() -> Self {
        use EntityRole::*;
        Self {
            scale: Scale::Medium,
            roles: [Ms, NodeB, Fap, Rnc, Cn, Fgw, NeighborDb].into_iter().collect(),
        }
    }

    pub fn for_scale(scale: Scale) -> Self {
        match scale {
            Scale::Small => Self::small(),
            Scale::Medium => Self::medium(),
        }
    }

    pub fn contains(&self, role: EntityRole) -> bool {
        self.roles.contains(&role)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Message,
    LocalAction,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Message => "message",
            StepKind::LocalAction => "local_action",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub seq_no: u32,
    pub kind: StepKind,
    pub actor: EntityRole,
    /// Receiver of a message. On a local action, an optional co-actor.
    pub peer: Option<EntityRole>,
    pub label: String,
}

impl Step {
    pub fn message(seq_no: u32, actor: EntityRole, peer: EntityRole, label: &str) -> Self {
        Self {
            seq_no,
            kind: StepKind::Message,
            actor,
            peer: Some(peer),
            label: label.to_string(),
        }
    }

    pub fn local(seq_no: u32, actor: EntityRole, label: &str) -> Self {
        Self {
            seq_no,
            kind: StepKind::LocalAction,
            actor,
            peer: None,
            label: label.to_string(),
        }
    }

    /// Fields that take part in positional comparison (everything but seq_no).
    pub fn same_action(&self, other: &Step) -> bool {
        self.kind == other.kind
            && self.actor == other.actor
            && self.peer == other.peer
            && self.label == other.label
    }

    /// `seq_no<TAB>kind<TAB>actor<TAB>peer<TAB>label`, with `-` for no peer.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.seq_no,
            self.kind.as_str(),
            self.actor,
            self.peer.map_or("-", |p| p.as_str()),
            self.label
        )
    }

    pub(crate) fn roles(&self) -> impl Iterator<Item = EntityRole> + '_ {
        std::iter::once(self.actor).chain(self.peer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowKind {
    SmallMacroToFemto,
    SmallFemtoToMacro,
    MediumMacroToFemto,
    MediumFemtoToMacro,
}

impl FlowKind {
    pub const ALL: [FlowKind; 4] = [
        FlowKind::SmallMacroToFemto,
        FlowKind::SmallFemtoToMacro,
        FlowKind::MediumMacroToFemto,
        FlowKind::MediumFemtoToMacro,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FlowKind::SmallMacroToFemto => "SMALL_MACRO_TO_FEMTO",
            FlowKind::SmallFemtoToMacro => "SMALL_FEMTO_TO_MACRO",
            FlowKind::MediumMacroToFemto => "MEDIUM_MACRO_TO_FEMTO",
            FlowKind::MediumFemtoToMacro => "MEDIUM_FEMTO_TO_MACRO",
        }
    }

    pub fn scale(&self) -> Scale {
        match self {
            FlowKind::SmallMacroToFemto | FlowKind::SmallFemtoToMacro => Scale::Small,
            FlowKind::MediumMacroToFemto | FlowKind::MediumFemtoToMacro => Scale::Medium,
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlowKind {
    type Err = SignalingError;

    /// Case-insensitive; `-` is accepted in place of `_`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| SignalingError::UnknownFlow(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowScript {
    pub flow_kind: FlowKind,
    pub scale: Scale,
    pub steps: Vec<Step>,
    /// Steps whose content is inferred because the source enumeration skips them.
    pub reconstructed: Vec<u32>,
}

impl FlowScript {
    pub fn step(&self, seq_no: u32) -> Option<&Step> {
        self.steps.get(seq_no.checked_sub(1)? as usize)
    }

    /// Every role the script references, in role order.
    pub fn roles(&self) -> BTreeSet<EntityRole> {
        self.steps.iter().flat_map(|s| s.roles()).collect()
    }

    /// One line per step, newline-terminated.
    pub fn to_text(&self) -> String {
        self.steps.iter().map(|s| s.to_line() + "\n").collect()
    }
}
