use super::{Decision, JobId, PendingSet, TracePolicy};
use crate::policyz::PriorityTable;

/// Policy Z in the trace engine: the stream is chosen by the index table
/// from the active queue lengths, and within the stream the oldest job runs.
/// The within-stream order ignores deadlines, matching the memoryless model
/// the indices are derived from.
#[derive(Debug, Clone)]
pub struct IndexPolicy {
    table: PriorityTable,
}

impl IndexPolicy {
    pub fn new(table: PriorityTable) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &PriorityTable {
        &self.table
    }
}

impl TracePolicy for IndexPolicy {
    fn name(&self) -> &str {
        "policyz"
    }

    fn decide(&mut self, pending: &mut PendingSet, _running: Option<JobId>) -> Decision {
        match self.table.select(pending.queue_lengths()) {
            Some(stream) => Decision::Run {
                job: pending.head_of(stream).expect("selected stream is nonempty"),
                until: None,
            },
            None => Decision::Idle,
        }
    }
}
