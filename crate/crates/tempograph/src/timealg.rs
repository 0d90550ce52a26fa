//! Time-interval selection, window extension, and overlap testing.

use std::fmt;

use crate::error::{Error, Result};
use crate::relmodel::{RelationInstance, TimeInterval};

/// Which timestamps ground an event's intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeSource {
    TimexOnly,
    DocDateOnly,
    /// Time expressions where available, otherwise the document creation date.
    TimexAndDocDate,
}

impl TimeSource {
    pub const ALL: [TimeSource; 3] = [
        TimeSource::TimexOnly,
        TimeSource::DocDateOnly,
        TimeSource::TimexAndDocDate,
    ];

    /// Parses the short command-line token.
    pub fn parse(s: &str) -> Result<TimeSource> {
        match s {
            "timex" => Ok(TimeSource::TimexOnly),
            "docdate" => Ok(TimeSource::DocDateOnly),
            "both" => Ok(TimeSource::TimexAndDocDate),
            _ => Err(Error::Invalid(format!(
                "unknown time source `{s}` (expected timex, docdate, or both)"
            ))),
        }
    }
}

impl fmt::Display for TimeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TimeSource::TimexOnly => "timexOnly",
            TimeSource::DocDateOnly => "docDateOnly",
            TimeSource::TimexAndDocDate => "timexAndDocDate",
        };
        write!(f, "{name}")
    }
}

/// Window of N days applied to each interval end; 0 means no window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WindowDays(pub u32);

impl fmt::Display for WindowDays {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether the window extends both intervals or only one side of the comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WindowMode {
    /// Extend both intervals by N days; one-day events d apart overlap iff d <= 2N.
    #[default]
    Both,
    /// Extend one interval only; one-day events d apart overlap iff d <= N.
    Single,
}

impl WindowMode {
    pub fn parse(s: &str) -> Result<WindowMode> {
        match s {
            "both" => Ok(WindowMode::Both),
            "single" => Ok(WindowMode::Single),
            _ => Err(Error::Invalid(format!(
                "unknown window mode `{s}` (expected both or single)"
            ))),
        }
    }

    /// Total slack added to the gap test between two intervals.
    fn slack(self, w: WindowDays) -> i64 {
        match self {
            WindowMode::Both => 2 * i64::from(w.0),
            WindowMode::Single => i64::from(w.0),
        }
    }
}

/// Resolves an instance's intervals under the chosen time source.
///
/// Absence of usable time yields an empty list, never an error.
pub fn resolve_intervals(inst: &RelationInstance, src: TimeSource) -> Vec<TimeInterval> {
    let doc_interval = || inst.doc_date.map(TimeInterval::day).into_iter().collect();
    match src {
        TimeSource::TimexOnly => inst.timex_intervals.clone(),
        TimeSource::DocDateOnly => doc_interval(),
        TimeSource::TimexAndDocDate => {
            if inst.timex_intervals.is_empty() {
                doc_interval()
            } else {
                inst.timex_intervals.clone()
            }
        }
    }
}

/// Extends an interval by `w` days on each side.
pub fn extend(iv: TimeInterval, w: WindowDays) -> TimeInterval {
    let n = i64::from(w.0);
    TimeInterval::new(iv.start() - n, iv.end() + n).expect("extension preserves ordering")
}

/// True iff the two intervals, extended per the window mode, intersect as
/// closed intervals. Adjacent endpoints count as overlap.
pub fn overlaps_in(a: TimeInterval, b: TimeInterval, w: WindowDays, mode: WindowMode) -> bool {
    let slack = mode.slack(w);
    a.start() - slack <= b.end() && b.start() - slack <= a.end()
}

/// Overlap test in the default mode (both intervals extended).
pub fn overlaps(a: TimeInterval, b: TimeInterval, w: WindowDays) -> bool {
    overlaps_in(a, b, w, WindowMode::Both)
}
