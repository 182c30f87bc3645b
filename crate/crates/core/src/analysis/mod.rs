//! Recurrence quantities over exact backends: correlation series, threshold
//! hit sets and their gaps, windowed averages and empirical joinings.
//!
//! Syndeticity cannot be decided from finitely many terms, so every verdict
//! here is a finite-horizon witness: `WITNESSED-SYNDETIC(K)` means the gap
//! bound `K` held up to the series horizon.

mod averages;
mod backend;
mod gaps;
mod joining;
mod series;

pub use averages::{
    convergence_probe, convergence_probe_with, probe_schedule, window_average, window_deviation_sup, ConvergenceProbe,
    PrefixSums, WindowAverage,
};
pub use backend::ExactBackend;
pub use gaps::{fk_scan, gap_stats, khintchine_scan, report_from_hits, threshold_scan, GapReport, GapStats, Verdict};
pub use joining::{empirical_joining, empirical_joining_with, joining_exact_checks, JoiningChecks, JoiningEstimate};
pub use series::{
    correlation_series, correlation_series_with, tref_label, CorrelationSeries, Entry, EntryValue, SeriesLabels,
    SeriesMeta,
};
