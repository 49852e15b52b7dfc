use std::collections::{BTreeMap, VecDeque};

use super::{EntityRole, FlowKind, FlowScript, SignalingError, Step, StepKind, Topology};

/// Single-fault injection: the step with this seq_no never takes effect.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FaultConfig {
    pub drop_step: Option<u32>,
}

impl FaultConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn drop_step(seq_no: u32) -> Self {
        Self {
            drop_step: Some(seq_no),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    Diverged { seq_no: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    /// Logical clock, strictly increasing along the trace.
    pub clock: u64,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub flow_kind: FlowKind,
    pub entries: Vec<TraceEntry>,
    pub outcome: Outcome,
}

impl TraceRecord {
    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.entries.iter().map(|e| &e.step)
    }

    /// Line-oriented export, one executed step per line.
    pub fn to_text(&self) -> String {
        self.steps().map(|s| s.to_line() + "\n").collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Send(u32),
    Receive(u32),
    Act(u32),
}

/// Per-entity projection of the script: the entity may only take the event
/// at the head of its queue.
#[derive(Debug)]
struct EntityMachine {
    pending: VecDeque<Event>,
}

impl EntityMachine {
    fn project(role: EntityRole, script: &FlowScript) -> Self {
        let mut pending = VecDeque::new();
        for step in &script.steps {
            match step.kind {
                StepKind::Message => {
                    if step.actor == role {
                        pending.push_back(Event::Send(step.seq_no));
                    }
                    if step.peer == Some(role) {
                        pending.push_back(Event::Receive(step.seq_no));
                    }
                }
                StepKind::LocalAction => {
                    if step.actor == role || step.peer == Some(role) {
                        pending.push_back(Event::Act(step.seq_no));
                    }
                }
            }
        }
        Self { pending }
    }

    fn advance(&mut self, expected: Event) -> bool {
        if self.pending.front() == Some(&expected) {
            self.pending.pop_front();
            true
        } else {
            false
        }
    }
}

struct Envelope {
    seq_no: u32,
    to: EntityRole,
}

/// Enacts `script` over an in-memory, lossless, in-order bus.
///
/// A step fires only after the previous step has taken effect, so a dropped
/// message or failed local action halts the flow at that step.
pub fn execute_flow(
    script: &FlowScript,
    topology: &Topology,
    fault: FaultConfig,
) -> Result<TraceRecord, SignalingError> {
    if let Some(role) = script.roles().into_iter().find(|r| !topology.contains(*r)) {
        return Err(SignalingError::RoleMissing {
            role,
            scale: topology.scale,
        });
    }

    let mut machines: BTreeMap<EntityRole, EntityMachine> = script
        .roles()
        .into_iter()
        .map(|r| (r, EntityMachine::project(r, script)))
        .collect();
    let mut bus: VecDeque<Envelope> = VecDeque::new();
    let mut entries = Vec::with_capacity(script.steps.len());
    let mut clock = 0u64;

    for step in &script.steps {
        let seq = step.seq_no;
        let diverged = Outcome::Diverged { seq_no: seq };
        let dropped = fault.drop_step == Some(seq);

        let took_effect = match step.kind {
            StepKind::LocalAction => {
                let participants: Vec<EntityRole> = step.roles().collect();
                let ready = participants
                    .iter()
                    .all(|r| machines[r].pending.front() == Some(&Event::Act(seq)));
                if ready && !dropped {
                    for r in &participants {
                        machines.get_mut(r).expect("projected").advance(Event::Act(seq));
                    }
                    true
                } else {
                    false
                }
            }
            StepKind::Message => {
                let peer = step.peer.expect("messages have a receiver");
                let sent = machines
                    .get_mut(&step.actor)
                    .expect("projected")
                    .advance(Event::Send(seq));
                if sent && !dropped {
                    bus.push_back(Envelope { seq_no: seq, to: peer });
                }
                let mut delivered = false;
                while let Some(envelope) = bus.pop_front() {
                    delivered |= machines
                        .get_mut(&envelope.to)
                        .expect("projected")
                        .advance(Event::Receive(envelope.seq_no))
                        && envelope.seq_no == seq;
                }
                delivered
            }
        };

        if !took_effect {
            return Ok(TraceRecord {
                flow_kind: script.flow_kind,
                entries,
                outcome: diverged,
            });
        }
        clock += 1;
        entries.push(TraceEntry {
            clock,
            step: step.clone(),
        });
    }

    Ok(TraceRecord {
        flow_kind: script.flow_kind,
        entries,
        outcome: Outcome::Completed,
    })
}
