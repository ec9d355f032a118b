use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    Completion,
    Expiry,
    Preemption,
    Phase,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::Completion => "completion",
            EventKind::Expiry => "expiry",
            EventKind::Preemption => "preemption",
            EventKind::Phase => "phase",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub stream: usize,
    pub job: usize,
}

/// Optional per-event trace of a run.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    pub records: Vec<EventRecord>,
}

impl EventLog {
    pub fn push(&mut self, time: f64, kind: EventKind, stream: usize, job: usize) {
        debug_assert!(self.records.last().is_none_or(|r| r.time <= time));
        self.records.push(EventRecord { time, kind, stream, job });
    }

    /// CSV with header `time,kind,stream,job`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,kind,stream,job\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.time, r.kind.as_str(), r.stream, r.job);
        }
        out
    }
}
