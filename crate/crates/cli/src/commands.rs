use std::path::{Path, PathBuf};

use num_traits::Zero;
use reclab::analysis::{
    correlation_series, empirical_joining, fk_scan, joining_exact_checks, khintchine_scan, probe_schedule,
    window_average, window_deviation_sup, CorrelationSeries, EntryValue, ExactBackend, SeriesLabels, WindowAverage,
};
use reclab::montecarlo::{self, mc_correlation_series, mc_window_average, Estimator, McConfig};
use reclab::par::Execution;
use reclab::rational::{self, Rational};
use reclab::report::{JoiningSection, Report, SpectralSection, VdcSection};
use reclab::spectral::{
    eigen_return_times, grid_spectra, jdlg_split_product, jdlg_split_rotation, vdc_surrogate, wm_average_vanishing,
    BaseSpace, FourierObservable, GridFunction, ProductMap,
};
use reclab::sym::{ConstraintSet, SymbolicSystem, Tref};
use reclab::torus::{diam_recurrence_scan, dirichlet_min, parse_angle_list, Angle, ArcSet, RotationTuple};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{Cli, Command, EstimatorArg, Format, SeriesArgs, SplitClass};
use crate::error::{CliError, CliResult};
use crate::output::{csv_document, emit, Provenance};
use crate::systems::{
    arc_partition, default_maps, parse_arcs, parse_inclusive, parse_maps, parse_rational, parse_window, resolve_system,
    rotation_canonical, sha256_hex, symbolic_partition, symbolic_set, warn_decimals, Loaded, Resolved,
};

/// What a command produced: a JSON report plus a flat table for CSV.
struct Artifact {
    report: Report,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    default_format: Format,
    provenance: Provenance,
    /// Failure raised after the artifact has been written.
    deferred: Option<CliError>,
}

impl Artifact {
    fn new(provenance: Provenance, default_format: Format) -> Self {
        Self {
            report: Report::default(),
            columns: Vec::new(),
            rows: Vec::new(),
            default_format,
            provenance,
            deferred: None,
        }
    }

    fn summary(mut self, pairs: Vec<(&str, String)>) -> Self {
        self.columns = vec!["quantity", "value"];
        self.rows = pairs.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
        self
    }

    fn render(mut self, format: Option<Format>) -> CliResult<(String, Option<CliError>)> {
        let text = match format.unwrap_or(self.default_format) {
            Format::Csv => csv_document(&self.provenance, &self.columns, &self.rows)?,
            Format::Json => {
                self.report.details.insert("provenance".into(), self.provenance.to_value());
                self.report.validate()?;
                self.report.to_json()? + "\n"
            }
        };
        Ok((text, self.deferred))
    }
}

fn fmt(r: &Rational) -> String {
    rational::format(r)
}

fn rational_value(r: &Rational) -> Value {
    Value::String(fmt(r))
}

enum Terms {
    Sym(SymbolicSystem, Vec<(Tref, ConstraintSet)>),
    Rot(RotationTuple, Vec<(Tref, ArcSet)>),
}

/// Runs `$body` with `$b` bound to the backend and `$t` to its terms.
macro_rules! with_terms {
    ($terms:expr, |$b:ident, $t:ident| $body:expr) => {
        match $terms {
            Terms::Sym($b, $t) => $body,
            Terms::Rot($b, $t) => $body,
        }
    };
}

struct SeriesSetup {
    terms: Terms,
    labels: SeriesLabels,
    range: std::ops::Range<i64>,
    provenance: Provenance,
}

fn setup(command: &str, args: &SeriesArgs) -> CliResult<SeriesSetup> {
    let resolved = resolve_system(&args.system, args.min_den)?;
    let maps = match &args.maps {
        Some(m) => parse_maps(m)?,
        None => default_maps(&resolved),
    };
    let range = parse_inclusive(&args.range)?;
    let Resolved { loaded, label, hash } = resolved;
    let terms = match loaded {
        Loaded::Symbolic { mut system, document } => {
            if let Some(limit) = args.cell_limit {
                system = system.with_cell_limit(limit);
            }
            let set = symbolic_set(&args.set, &system, document.as_ref())?;
            Terms::Sym(system, maps.iter().map(|t| (*t, set.clone())).collect())
        }
        Loaded::Rotation(r) => {
            let set = parse_arcs(&args.set)?;
            Terms::Rot(r, maps.iter().map(|t| (*t, set.clone())).collect())
        }
    };
    let mut provenance = Provenance::new(command);
    provenance.system = Some(label.clone());
    provenance.system_sha256 = Some(hash);
    provenance.horizon = Some(range.end - 1);
    provenance.backend = Some(with_terms!(&terms, |b, _t| b.tag()));
    let labels = SeriesLabels { system: label, sets: vec![args.set.clone()] };
    Ok(SeriesSetup { terms, labels, range, provenance })
}

fn exact_series(s: &SeriesSetup) -> CliResult<(CorrelationSeries, Rational)> {
    with_terms!(&s.terms, |b, t| {
        let series = correlation_series(b, t, s.range.clone(), &s.labels)?;
        Ok((series, b.measure(&t[0].1)?))
    })
}

fn unavailable_error(series: &CorrelationSeries) -> Option<CliError> {
    let missing: Vec<(i64, &str)> = series
        .entries()
        .iter()
        .filter_map(|e| match &e.value {
            EntryValue::Unavailable(reason) => Some((e.n, reason.as_str())),
            _ => None,
        })
        .collect();
    let (n, reason) = missing.first()?;
    Some(CliError::Limit(format!("{} entries unavailable (first n={n}: {reason})", missing.len())))
}

fn series_rows(series: &CorrelationSeries) -> Vec<Vec<String>> {
    series
        .entries()
        .iter()
        .map(|e| {
            let (value, status) = match &e.value {
                EntryValue::Exact(v) => (fmt(v), "exact".to_string()),
                EntryValue::Interval { estimate, half_width } => (format!("{estimate}"), format!("ci95 ±{half_width}")),
                EntryValue::Unavailable(reason) => (String::new(), format!("unavailable: {reason}")),
            };
            vec![e.n.to_string(), value, fmt(&e.drift), status]
        })
        .collect()
}

fn series_values(series: &CorrelationSeries) -> Value {
    Value::Array(
        series
            .entries()
            .iter()
            .map(|e| match &e.value {
                EntryValue::Exact(v) => json!({ "n": e.n, "value": fmt(v) }),
                EntryValue::Interval { estimate, half_width } => {
                    json!({ "n": e.n, "estimate": estimate, "half_width": half_width })
                }
                EntryValue::Unavailable(reason) => json!({ "n": e.n, "unavailable": reason }),
            })
            .collect(),
    )
}

fn corr(args: &SeriesArgs) -> CliResult<Artifact> {
    let s = setup("corr", args)?;
    let (series, _) = exact_series(&s)?;
    let mut a = Artifact::new(s.provenance, Format::Csv);
    a.columns = vec!["n", "value", "drift", "status"];
    a.rows = series_rows(&series);
    a.report.details.insert("values".into(), series_values(&series));
    a.deferred = unavailable_error(&series);
    a.report.series_meta = Some(series.meta);
    Ok(a)
}

fn hit_rows(hits: &[i64]) -> Vec<Vec<String>> {
    hits.iter().map(|h| vec![h.to_string()]).collect()
}

fn khintchine(args: &SeriesArgs, eps: &str, power: Option<u32>) -> CliResult<Artifact> {
    let s = setup("khintchine", args)?;
    let eps = parse_rational(eps)?;
    let power = power.unwrap_or(with_terms!(&s.terms, |_b, t| t.len() as u32));
    let (series, measure) = exact_series(&s)?;
    let report = khintchine_scan(&series, &measure, power, &eps)?;
    let mut a = Artifact::new(s.provenance, Format::Json);
    a.columns = vec!["hit"];
    a.rows = hit_rows(&report.hits);
    a.report.details.insert("measure".into(), rational_value(&measure));
    a.report.details.insert("power".into(), json!(power));
    a.report.details.insert("eps".into(), rational_value(&eps));
    a.report.finite_horizon = true;
    a.deferred = unavailable_error(&series);
    a.report.gap_report = Some(report);
    a.report.series_meta = Some(series.meta);
    Ok(a)
}

fn fk(args: &SeriesArgs, window: i64) -> CliResult<Artifact> {
    let s = setup("fk", args)?;
    let (series, _) = exact_series(&s)?;
    let (c_star, report) = fk_scan(&series, window)?;
    let mut a = Artifact::new(s.provenance, Format::Json);
    a.columns = vec!["hit"];
    a.rows = hit_rows(&report.hits);
    a.report.details.insert("c_star".into(), rational_value(&c_star));
    a.report.details.insert("window".into(), json!(window));
    a.report.finite_horizon = true;
    a.deferred = unavailable_error(&series);
    a.report.gap_report = Some(report);
    a.report.series_meta = Some(series.meta);
    Ok(a)
}

fn average_rows(averages: &[WindowAverage]) -> Vec<Vec<String>> {
    averages
        .iter()
        .map(|w| {
            let hw = w.half_width.map(|h| h.to_string()).unwrap_or_default();
            vec![w.m.to_string(), w.n.to_string(), fmt(&w.value), hw]
        })
        .collect()
}

fn average(
    args: &SeriesArgs,
    windows: Option<&str>,
    len: Option<i64>,
    target: Option<&str>,
    probe: bool,
) -> CliResult<Artifact> {
    let s = setup("average", args)?;
    let count = with_terms!(&s.terms, |_b, t| t.len());
    let (series, measure) = exact_series(&s)?;
    let target = match target {
        Some(t) => parse_rational(t)?,
        None => num_traits::pow(measure, count),
    };
    let windows = match windows {
        Some(list) => list.split(',').map(parse_window).collect::<CliResult<Vec<_>>>()?,
        None => vec![(series.start(), series.end() + 1)],
    };
    let averages = windows.iter().map(|&(m, n)| window_average(&series, m, n)).collect::<reclab::Result<Vec<_>>>()?;
    let mut a = Artifact::new(s.provenance, Format::Csv);
    a.columns = vec!["M", "N", "value", "half_width"];
    a.rows = average_rows(&averages);
    a.report.details.insert("target".into(), rational_value(&target));
    if let Some(len) = len {
        let (dev, at) = window_deviation_sup(&series, &target, len, series.start())?;
        a.report.details.insert("deviation_sup".into(), json!({ "len": len, "sup": fmt(&dev), "M": at.m, "N": at.n }));
    }
    if probe {
        let probes = probe_schedule(&series, &target)?;
        a.report
            .details
            .insert("probes".into(), serde_json::to_value(&probes).map_err(|e| CliError::Usage(e.to_string()))?);
        a.report.finite_horizon = true;
    }
    a.report.averages = averages;
    a.deferred = unavailable_error(&series);
    a.report.series_meta = Some(series.meta);
    Ok(a)
}

fn joining(system: &str, maps: Option<&str>, partition: &str, window: &str, min_den: i64) -> CliResult<Artifact> {
    let resolved = resolve_system(system, min_den)?;
    let (m, n) = parse_window(window)?;
    let mut provenance = Provenance::new("joining");
    provenance.system = Some(resolved.label.clone());
    provenance.system_sha256 = Some(resolved.hash.clone());
    provenance.horizon = Some(n - 1);
    let count = match &resolved.loaded {
        Loaded::Symbolic { system, .. } => system.transforms().len(),
        Loaded::Rotation(r) => r.dimension(),
    };
    let maps = match maps {
        Some(text) => parse_maps(text)?,
        None => (0..count).map(Tref::Index).collect(),
    };
    let specs: Vec<&str> = partition.split(';').collect();
    let spec_for = |i: usize| if specs.len() == 1 { specs[0] } else { specs.get(i).copied().unwrap_or("") };
    if specs.len() != 1 && specs.len() != maps.len() {
        return Err(CliError::Usage(format!("{} partitions given for {} maps", specs.len(), maps.len())));
    }
    let (je, tag) = match &resolved.loaded {
        Loaded::Symbolic { system, .. } => {
            let parts =
                (0..maps.len()).map(|i| symbolic_partition(spec_for(i), system)).collect::<CliResult<Vec<_>>>()?;
            (empirical_joining(system, &maps, &parts, m, n)?, system.tag())
        }
        Loaded::Rotation(r) => {
            let parts = (0..maps.len()).map(|i| arc_partition(spec_for(i))).collect::<CliResult<Vec<_>>>()?;
            (empirical_joining(r, &maps, &parts, m, n)?, r.tag())
        }
    };
    provenance.backend = Some(tag);
    let checks = joining_exact_checks(&je);
    let mut a = Artifact::new(provenance, Format::Json);
    a.columns = vec!["index", "mass"];
    a.rows = je
        .tensor
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            let mut rest = flat;
            let mut index = vec![0; je.shape.len()];
            for (d, size) in je.shape.iter().enumerate().rev() {
                index[d] = rest % size;
                rest /= size;
            }
            let label = index.iter().map(usize::to_string).collect::<Vec<_>>().join(":");
            vec![label, fmt(v)]
        })
        .collect();
    a.report.details.insert("window".into(), json!({ "M": m, "N": n }));
    if !checks.passed() {
        a.deferred = Some(CliError::Invariant(format!("joining exact checks failed: {checks:?}")));
    }
    a.report.joining = Some(JoiningSection::new(&je, checks));
    Ok(a)
}

fn angles_of(text: &str, min_den: i64) -> CliResult<RotationTuple> {
    warn_decimals(text);
    Ok(RotationTuple::new(parse_angle_list(text, min_den)?)?)
}

fn rotation_provenance(command: &str, r: &RotationTuple, horizon: i64) -> Provenance {
    let labels: Vec<&str> = r.angles().iter().map(|a| a.label.as_str()).collect();
    let mut p = Provenance::new(command);
    p.system = Some(format!("rot:{}", labels.join(",")));
    p.system_sha256 = Some(sha256_hex(rotation_canonical(r).as_bytes()));
    p.horizon = Some(horizon);
    p.backend = Some(r.tag());
    p
}

fn diam(angles: &str, horizon: i64, scaled: bool, min_den: i64) -> CliResult<Artifact> {
    let r = angles_of(angles, min_den)?;
    let scan = diam_recurrence_scan(&r, horizon)?;
    let mut a = Artifact::new(rotation_provenance("diam", &r, horizon), Format::Csv);
    a.columns = if scaled {
        vec!["n", "diam", "running_min", "scaled", "running_min_scaled", "drift", "unreliable"]
    } else {
        vec!["n", "diam", "running_min", "drift", "unreliable"]
    };
    a.rows = scan
        .points
        .iter()
        .map(|p| {
            let mut row = vec![p.n.to_string(), fmt(&p.diam), fmt(&p.running_min)];
            if scaled {
                row.push(p.scaled.to_string());
                row.push(p.running_min_scaled.to_string());
            }
            row.push(fmt(&p.drift));
            row.push(p.unreliable.to_string());
            row
        })
        .collect();
    let last = scan.points.last();
    a.report.details.insert("k".into(), json!(scan.k));
    a.report.details.insert("min_scaled".into(), json!(scan.min_scaled()));
    a.report.details.insert("running_min".into(), json!(last.map(|p| fmt(&p.running_min))));
    a.report.finite_horizon = true;
    Ok(a)
}

fn dirichlet(angles: &str, horizon: i64, min_den: i64) -> CliResult<Artifact> {
    let r = angles_of(angles, min_den)?;
    let d = dirichlet_min(&r, horizon)?;
    let a = Artifact::new(rotation_provenance("dirichlet", &r, horizon), Format::Csv);
    let pairs = vec![
        ("k", d.k.to_string()),
        ("horizon", d.horizon.to_string()),
        ("n_star", d.n_star.to_string()),
        ("value", fmt(&d.value)),
        ("bound_holds", d.bound_holds.to_string()),
        ("drift", fmt(&d.drift)),
        ("robust", d.robust.to_string()),
    ];
    let mut a = a.summary(pairs.clone());
    for (k, v) in pairs {
        a.report.details.insert(k.into(), Value::String(v));
    }
    if !d.bound_holds {
        a.deferred = Some(CliError::Invariant(format!("Dirichlet bound fails at N={horizon}")));
    }
    Ok(a)
}

fn jdlg(
    grid: usize,
    ax: &str,
    ay: &str,
    input: Option<&Path>,
    class: SplitClass,
    export: Option<&Path>,
) -> CliResult<Artifact> {
    let obs = match input {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|source| CliError::Io { path: path.into(), source })?;
            GridFunction::read_csv(file)?
        }
        None => GridFunction::box_indicator(grid, &parse_arcs(ax)?, &parse_arcs(ay)?),
    };
    let split = match class {
        SplitClass::Rotation => jdlg_split_rotation(&obs)?,
        SplitClass::RotationDoubling => jdlg_split_product(&obs)?,
    };
    if let Some(path) = export {
        let file = std::fs::File::create(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        split.compact_part.write_csv(std::io::BufWriter::new(file))?;
    }
    let mut p = Provenance::new("jdlg");
    p.system = Some(format!("{class:?}").to_lowercase());
    p.backend = Some(format!("grid:{}", obs.resolution()));
    let mut pairs = vec![
        ("resolution", obs.resolution().to_string()),
        ("residual_norm", split.residual_norm.to_string()),
        ("inner_product", split.inner_product.to_string()),
        ("compact_y_constant", split.compact_is_y_constant().to_string()),
    ];
    if let Some(l) = &split.indicator_checks {
        pairs.push(("min_f", l.min_f.to_string()));
        pairs.push(("max_f", l.max_f.to_string()));
        pairs.push(("integral_af", fmt(&l.integral_af)));
        pairs.push(("measure_sq", fmt(&l.measure_sq)));
        pairs.push(("integral_ok", l.integral_ok.to_string()));
        pairs.push(("positivity_on_A", l.positivity_on_a.to_string()));
    }
    let mut a = Artifact::new(p, Format::Json).summary(pairs);
    a.report.spectral = Some(SpectralSection::from_split(&split));
    a.report.details.insert("system_tag".into(), serde_json::to_value(split.system_tag).unwrap_or(Value::Null));
    if let Some(l) = &split.indicator_checks {
        a.report.details.insert("integral_af".into(), rational_value(&l.integral_af));
        a.report.details.insert("measure_sq".into(), rational_value(&l.measure_sq));
        if !(l.bounds_ok && l.integral_ok && l.positivity_on_a) {
            a.deferred = Some(CliError::Invariant("compact part fails the indicator checks".into()));
        }
    }
    Ok(a)
}

fn vdc(angle: &str, second: Option<&str>, grid: usize, window: i64, h: usize, min_den: i64) -> CliResult<Artifact> {
    warn_decimals(angle);
    let omega = Angle::parse(angle, min_den)?;
    let mut terms = vec![(
        ProductMap::RotationDoubling(omega.clone()),
        FourierObservable::cosines(BaseSpace::Torus2, &[((0, 1), 1.0)])?,
    )];
    if let Some(text) = second {
        warn_decimals(text);
        terms.push((
            ProductMap::Rotation(Angle::parse(text, min_den)?),
            FourierObservable::cosines(BaseSpace::Torus2, &[((0, 0), 0.5), ((1, 0), 0.5)])?,
        ));
    }
    let wm = wm_average_vanishing(&terms, grid, &[(0, window)])?;
    let xs = grid_spectra(Execution::default_for_build(), &terms, 0, window, grid)?;
    let v = vdc_surrogate(&xs, h)?;
    let mut p = Provenance::new("vdc");
    p.system = Some(match second {
        Some(s) => format!("rotation-doubling:{angle}+rotation:{s}"),
        None => format!("rotation-doubling:{angle}"),
    });
    p.horizon = Some(window - 1);
    p.backend = Some(format!("fourier-grid:{grid}"));
    let pairs = vec![
        ("window_norm", wm.max_norm.to_string()),
        ("phase_drift", wm.phase_drift.to_string()),
        ("H", v.h.to_string()),
        ("lhs", v.lhs.to_string()),
        ("rhs", v.rhs.to_string()),
        ("slack", v.slack.to_string()),
        ("holds", v.holds.to_string()),
    ];
    let mut a = Artifact::new(p, Format::Json).summary(pairs);
    a.report.spectral =
        Some(SpectralSection { split_residual: None, indicator_checks: None, vdc: Some(VdcSection::from(&v)) });
    a.report.details.insert("wm".into(), serde_json::to_value(&wm).map_err(|e| CliError::Usage(e.to_string()))?);
    a.report.details.insert("holds".into(), json!(v.holds));
    a.report.finite_horizon = true;
    Ok(a)
}

fn eigen(angles: &str, amp: &str, delta: &str, horizon: i64, min_den: i64) -> CliResult<Artifact> {
    let r = angles_of(angles, min_den)?;
    let amp = rational::to_f64(&parse_rational(amp)?);
    let delta = rational::to_f64(&parse_rational(delta)?);
    let report = eigen_return_times(r.angles(), amp, delta, horizon)?;
    let mut a = Artifact::new(rotation_provenance("eigen", &r, horizon), Format::Json);
    a.columns = vec!["hit"];
    a.rows = hit_rows(report.hits());
    a.report.details.insert("tolerance".into(), json!(report.tolerance));
    a.report.details.insert("phase_drift".into(), json!(report.phase_drift));
    a.report.finite_horizon = true;
    a.report.gap_report = Some(report.gaps);
    Ok(a)
}

fn mc_run<S: montecarlo::PointSampler>(
    sampler: &S,
    terms: &[(Tref, S::Set)],
    s: &SeriesSetup,
    cfg: &McConfig,
    window: Option<(i64, i64)>,
    mut a: Artifact,
) -> CliResult<Artifact> {
    a.provenance.backend = Some(montecarlo::PointSampler::tag(sampler));
    match window {
        Some((m, n)) => {
            let est = mc_window_average(sampler, terms, m, n, cfg)?;
            let value = Rational::from_float(est.estimate).unwrap_or_else(Rational::zero);
            a.report.averages = vec![WindowAverage { m, n, value, half_width: Some(est.half_width) }];
            a.report.ci = Some(est.half_width);
            a.columns = vec!["M", "N", "estimate", "half_width"];
            a.rows = vec![vec![m.to_string(), n.to_string(), est.estimate.to_string(), est.half_width.to_string()]];
            a.default_format = Format::Json;
        }
        None => {
            let series = mc_correlation_series(sampler, terms, s.range.clone(), cfg, &s.labels)?;
            let ci = series
                .entries()
                .iter()
                .filter_map(|e| match e.value {
                    EntryValue::Interval { half_width, .. } => Some(half_width),
                    _ => None,
                })
                .fold(0.0, f64::max);
            a.report.ci = Some(ci);
            a.columns = vec!["n", "estimate", "half_width"];
            a.rows = series
                .entries()
                .iter()
                .map(|e| match &e.value {
                    EntryValue::Interval { estimate, half_width } => {
                        vec![e.n.to_string(), estimate.to_string(), half_width.to_string()]
                    }
                    EntryValue::Exact(v) => vec![e.n.to_string(), fmt(v), "0".into()],
                    EntryValue::Unavailable(_) => vec![e.n.to_string(), String::new(), String::new()],
                })
                .collect();
            a.report.details.insert("values".into(), series_values(&series));
            a.report.series_meta = Some(series.meta);
        }
    }
    Ok(a)
}

fn mc(
    args: &SeriesArgs,
    seed: u64,
    samples: usize,
    burn_in: usize,
    estimator: EstimatorArg,
    window: Option<&str>,
) -> CliResult<Artifact> {
    let s = setup("mc", args)?;
    let estimator = match estimator {
        EstimatorArg::Plain => Estimator::Plain,
        EstimatorArg::Antithetic => Estimator::Antithetic,
    };
    let cfg = McConfig::new(seed, samples)?.with_burn_in(burn_in).with_estimator(estimator);
    let window = window.map(parse_window).transpose()?;
    let mut prov = s.provenance.clone();
    prov.seed = Some(seed);
    prov.samples = Some(samples);
    if let Some((_, n)) = window {
        prov.horizon = Some(n - 1);
    }
    let mut a = Artifact::new(prov, Format::Csv);
    a.report.seed = Some(seed);
    a.report.samples = Some(samples);
    a.report.details.insert("burn_in".into(), json!(burn_in));
    a.report.details.insert("estimator".into(), serde_json::to_value(estimator).unwrap_or(Value::Null));
    with_terms!(&s.terms, |b, t| mc_run(b, t, &s, &cfg, window, a))
}

fn validate_report(path: &Path) -> CliResult<Artifact> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let report = Report::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut p = Provenance::new("validate-report");
    p.system = report.series_meta.as_ref().map(|m| m.system.clone());
    let pairs = vec![("path", path.display().to_string()), ("valid", "true".into())];
    Ok(Artifact::new(p, Format::Csv).summary(pairs))
}

/// Batch description accepted by `rlab run`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: String,
    #[serde(default, alias = "system_ref")]
    pub system: Option<String>,
    #[serde(default)]
    pub params: serde_json::Map<String, Value>,
    #[serde(default)]
    pub output: Option<RunOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOutput {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl<'de> Deserialize<'de> for Format {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(serde::de::Error::custom(format!("unknown format {other:?}"))),
        }
    }
}

const RUN_COMMANDS: &[&str] =
    &["corr", "khintchine", "fk", "average", "joining", "diam", "dirichlet", "jdlg", "vdc", "mc"];
const ANGLE_COMMANDS: &[&str] = &["diam", "dirichlet", "eigen"];

/// Translates a run spec into the equivalent command line.
pub fn run_spec_argv(spec: &RunSpec) -> CliResult<Vec<String>> {
    if !RUN_COMMANDS.contains(&spec.command.as_str()) && spec.command != "eigen" {
        return Err(CliError::Usage(format!("unknown command {:?} in run spec", spec.command)));
    }
    let mut argv = vec!["rlab".to_string()];
    if let Some(out) = &spec.output {
        if let Some(path) = &out.path {
            argv.push("--out".into());
            argv.push(path.display().to_string());
        }
        if let Some(format) = out.format {
            argv.push("--format".into());
            argv.push(if format == Format::Csv { "csv" } else { "json" }.into());
        }
    }
    argv.push(spec.command.clone());
    if let Some(system) = &spec.system {
        if ANGLE_COMMANDS.contains(&spec.command.as_str()) {
            let angles = system.strip_prefix("builtin:").unwrap_or(system);
            argv.push("--angles".into());
            argv.push(angles.strip_prefix("rot:").unwrap_or(angles).into());
        } else {
            argv.push("--system".into());
            argv.push(system.clone());
        }
    }
    for (key, value) in &spec.params {
        let flag = format!("--{}", key.replace('_', "-"));
        let flag = if key == "N" || key == "n" || key == "H" { format!("--{key}") } else { flag };
        match value {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => {
                argv.push(flag);
                argv.push(s.clone());
            }
            Value::Number(n) => {
                argv.push(flag);
                argv.push(n.to_string());
            }
            other => return Err(CliError::Usage(format!("parameter {key:?} has unsupported value {other}"))),
        }
    }
    Ok(argv)
}

fn run_spec(path: &Path) -> CliResult<Option<CliError>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let spec: RunSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))?;
    let argv = run_spec_argv(&spec)?;
    let cli = <Cli as clap::Parser>::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(cli.command, Command::Run { .. }) {
        return Err(CliError::Usage("run specs cannot nest".into()));
    }
    execute(&cli)
}

/// Runs one command and writes its artifact. Returns a failure detected
/// after writing (invariant violations, unavailable entries).
pub fn execute(cli: &Cli) -> CliResult<Option<CliError>> {
    let artifact = match &cli.command {
        Command::Corr(s) => corr(s)?,
        Command::Khintchine { series, eps, power } => khintchine(series, eps, *power)?,
        Command::Fk { series, window } => fk(series, *window)?,
        Command::Average { series, windows, len, target, probe } => {
            average(series, windows.as_deref(), *len, target.as_deref(), *probe)?
        }
        Command::Joining { system, maps, partition, window, min_den } => {
            joining(system, maps.as_deref(), partition, window, *min_den)?
        }
        Command::Diam { angles, horizon, scaled, min_den } => diam(angles, *horizon, *scaled, *min_den)?,
        Command::Dirichlet { angles, horizon, min_den } => dirichlet(angles, *horizon, *min_den)?,
        Command::Jdlg { grid, ax, ay, input, class, export_compact } => {
            jdlg(*grid, ax, ay, input.as_deref(), *class, export_compact.as_deref())?
        }
        Command::Vdc { angle, second, grid, window, h, min_den } => {
            vdc(angle, second.as_deref(), *grid, *window, *h, *min_den)?
        }
        Command::Eigen { angles, a, delta, horizon, min_den } => eigen(angles, a, delta, *horizon, *min_den)?,
        Command::Mc { series, seed, samples, burn_in, estimator, window } => {
            mc(series, *seed, *samples, *burn_in, *estimator, window.as_deref())?
        }
        Command::ValidateReport { path } => validate_report(path)?,
        Command::Run { spec } => return run_spec(spec),
    };
    let (text, deferred) = artifact.render(cli.format)?;
    emit(cli.out.as_deref(), &text)?;
    Ok(deferred)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> RunSpec {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn run_spec_to_argv() {
        let s = spec(
            r#"{"command":"corr","system":"builtin:triple","params":{"set":"distinct","n":"1..5"},
                "output":{"path":"out.csv","format":"csv"}}"#,
        );
        let argv = run_spec_argv(&s).unwrap();
        assert_eq!(
            argv,
            [
                "rlab",
                "--out",
                "out.csv",
                "--format",
                "csv",
                "corr",
                "--system",
                "builtin:triple",
                "--n",
                "1..5",
                "--set",
                "distinct"
            ]
        );
    }

    #[test]
    fn run_spec_angles_and_flags() {
        let s = spec(r#"{"command":"diam","system":"rot:sqrt2-1","params":{"N":100,"scaled":true,"min_den":1000}}"#);
        let argv = run_spec_argv(&s).unwrap();
        assert_eq!(argv, ["rlab", "diam", "--angles", "sqrt2-1", "--N", "100", "--min-den", "1000", "--scaled"]);
    }

    #[test]
    fn run_spec_rejects_unknown() {
        assert!(run_spec_argv(&spec(r#"{"command":"plot"}"#)).is_err());
        assert!(serde_json::from_str::<RunSpec>(r#"{"command":"corr","extra":1}"#).is_err());
    }

    #[test]
    fn artifact_json_validates() {
        let a = Artifact::new(Provenance::new("x"), Format::Json).summary(vec![("a", "1".into())]);
        let (text, deferred) = a.render(None).unwrap();
        assert!(deferred.is_none());
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back.details["provenance"]["command"], "x");
    }
}
