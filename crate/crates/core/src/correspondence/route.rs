use serde::{Deserialize, Serialize};

use super::{CorrespondenceError, TableMeta};
use crate::model::{BoundaryEdition, GeoLevel};

/// One step of a route; both variants name the table they use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "direction", content = "table", rename_all = "snake_case")]
pub enum Step {
    /// Redistribute from the table's `from_edition` to its `to_edition`.
    Forward(TableMeta),
    /// Rebuild the table's `from_edition` from its `to_edition`.
    Backward(TableMeta),
}

impl Step {
    pub fn table(&self) -> TableMeta {
        match *self {
            Step::Forward(t) | Step::Backward(t) => t,
        }
    }

    pub fn source_edition(&self) -> BoundaryEdition {
        match *self {
            Step::Forward(t) => t.from_edition,
            Step::Backward(t) => t.to_edition,
        }
    }

    pub fn target_edition(&self) -> BoundaryEdition {
        match *self {
            Step::Forward(t) => t.to_edition,
            Step::Backward(t) => t.from_edition,
        }
    }

    fn is_backward(&self) -> bool {
        matches!(self, Step::Backward(_))
    }
}

/// Shortest sequence of steps between two editions using the tables at `level`.
///
/// Fewer steps wins, then fewer backward steps, then the earlier sequence of
/// visited editions. A direct table therefore always beats a detour.
pub fn plan_route(
    from: BoundaryEdition,
    to: BoundaryEdition,
    level: GeoLevel,
    available: &[TableMeta],
) -> Result<Vec<Step>, CorrespondenceError> {
    if from == to {
        return Ok(Vec::new());
    }
    let mut moves: Vec<Step> = Vec::new();
    for t in available.iter().filter(|t| t.level == level && t.from_edition != t.to_edition) {
        moves.push(Step::Forward(*t));
        moves.push(Step::Backward(*t));
    }
    let mut best: Option<(usize, usize, Vec<BoundaryEdition>, Vec<Step>)> = None;
    let mut path = Vec::new();
    let mut visited = vec![from];
    search(to, &moves, &mut path, &mut visited, &mut best);
    best.map(|(_, _, _, steps)| steps).ok_or(CorrespondenceError::NoRoute { from, to })
}

type Best = Option<(usize, usize, Vec<BoundaryEdition>, Vec<Step>)>;

fn search(
    goal: BoundaryEdition,
    moves: &[Step],
    path: &mut Vec<Step>,
    visited: &mut Vec<BoundaryEdition>,
    best: &mut Best,
) {
    let here = *visited.last().expect("route starts somewhere");
    if here == goal {
        let key = (path.len(), path.iter().filter(|s| s.is_backward()).count(), visited.clone());
        let better = match best {
            None => true,
            Some((l, b, v, _)) => key < (*l, *b, v.clone()),
        };
        if better {
            *best = Some((key.0, key.1, key.2, path.clone()));
        }
        return;
    }
    for m in moves {
        if m.source_edition() != here || visited.contains(&m.target_edition()) {
            continue;
        }
        path.push(*m);
        visited.push(m.target_edition());
        search(goal, moves, path, visited, best);
        visited.pop();
        path.pop();
    }
}
