//! JSON-lines trace of engine events, one object per line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ApproxCheck,
    ApproxVerdict,
    MemberQuery,
    MemberVerdict,
    BuildStep,
    PremiseViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub event: EventKind,
    pub x: Option<u64>,
    pub n: Option<u64>,
    /// Decimal canonical code of the partial function involved.
    pub f_code: Option<String>,
    pub verdict: Option<&'static str>,
    pub fuel_left: u64,
}

pub struct TraceSink {
    out: Box<dyn Write + Send>,
    error: Option<io::Error>,
}

impl TraceSink {
    pub fn new(out: impl Write + Send + 'static) -> Self {
        TraceSink { out: Box::new(out), error: None }
    }

    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self::new(BufWriter::new(File::create(path)?)))
    }

    /// Writes one record and flushes. After the first I/O error further
    /// events are dropped; [`TraceSink::finish`] reports it.
    pub fn emit(&mut self, event: &TraceEvent) {
        if self.error.is_some() {
            return;
        }
        let line = serde_json::to_string(event).expect("trace events serialize");
        let res = writeln!(self.out, "{line}").and_then(|_| self.out.flush());
        if let Err(e) = res {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()
    }
}
