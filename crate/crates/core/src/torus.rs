//! Rotations of the circle `ℝ/ℤ` with exact arc arithmetic.
//!
//! Irrational angles are carried as rational continued-fraction surrogates
//! together with a drift budget `δ ≥ |ω − surrogate|`; every result derived
//! from `n` iterates reports the accumulated bound `n·δ`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rational::{self, circle_norm, frac, int, Rational};

/// Smallest surrogate denominator used for named irrational constants.
pub const DEFAULT_MIN_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Angle {
    pub surrogate: Rational,
    pub label: String,
    /// Bound on `|ω − surrogate|`; zero for genuinely rational angles.
    pub drift: Rational,
}

impl Angle {
    /// An exactly rational angle, reduced mod 1.
    pub fn rational(value: Rational) -> Self {
        let label = rational::format(&value);
        Self { surrogate: frac(&value), label, drift: Rational::zero() }
    }

    /// Convergent `p_depth / q_depth` of `[a0; a1, a2, …]`.
    ///
    /// When `depth` is the last index the continued fraction is taken as the
    /// exact value; otherwise the drift is the classical bound
    /// `1/(q_depth · q_{depth+1})`.
    pub fn from_continued_fraction(terms: &[i64], depth: usize, label: impl Into<String>) -> Result<Self> {
        if terms.is_empty() || depth >= terms.len() {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} outside continued fraction of length {}",
                terms.len()
            )));
        }
        if terms[1..].iter().any(|&a| a <= 0) {
            return Err(Error::InvalidArgument("partial quotients after a0 must be positive".into()));
        }
        let convergents = convergents(terms);
        let (p, qd) = convergents[depth].clone();
        let drift = match convergents.get(depth + 1) {
            Some((_, qn)) => Rational::new(BigInt::one(), &qd * qn),
            None => Rational::zero(),
        };
        Ok(Self { surrogate: frac(&Rational::new(p, qd)), label: label.into(), drift })
    }

    /// Named irrational constant expanded until the convergent denominator
    /// reaches `min_denominator`.
    pub fn named(name: &str, min_denominator: i64) -> Result<Self> {
        let pattern: (&[i64], &[i64]) = match name {
            "sqrt2-1" => (&[0], &[2]),
            "sqrt3-1" => (&[0], &[1, 2]),
            "golden-1" => (&[0], &[1]),
            _ => return Err(Error::Parse(format!("unknown named angle {name:?}"))),
        };
        let (head, period) = pattern;
        let mut terms: Vec<i64> = head.to_vec();
        let target = BigInt::from(min_denominator.max(1));
        loop {
            terms.extend_from_slice(period);
            let conv = convergents(&terms);
            if let Some(depth) = conv.iter().position(|(_, q)| *q >= target) {
                if depth + 1 < conv.len() {
                    return Self::from_continued_fraction(&terms, depth, name);
                }
            }
        }
    }

    /// Parses `p/q`, `cf:[a0;a1,a2,…]@depth`, or a named constant.
    pub fn parse(text: &str, min_denominator: i64) -> Result<Self> {
        let s = text.trim();
        if let Some(rest) = s.strip_prefix("cf:") {
            let (body, depth) =
                rest.rsplit_once('@').ok_or_else(|| Error::Parse(format!("missing @depth in {s:?}")))?;
            let depth: usize = depth.trim().parse().map_err(|_| Error::Parse(format!("bad depth in {s:?}")))?;
            let body = body.trim().trim_start_matches('[').trim_end_matches(']');
            let terms = body
                .split([';', ','])
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse(format!("bad partial quotient in {s:?}")))?;
            return Self::from_continued_fraction(&terms, depth, s);
        }
        if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Self::named(s, min_denominator);
        }
        Ok(Self::rational(rational::parse(s)?.value))
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.surrogate)
    }
}

/// Parses a comma-separated angle list, keeping `cf:[…]` groups intact.
pub fn parse_angle_list(text: &str, min_denominator: i64) -> Result<Vec<Angle>> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(Angle::parse(&text[start..i], min_denominator)?);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(Angle::parse(&text[start..], min_denominator)?);
    Ok(out)
}

/// Convergents `(p_i, q_i)` of a finite continued fraction.
pub fn convergents(terms: &[i64]) -> Vec<(BigInt, BigInt)> {
    let (mut p0, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q0, mut q1) = (BigInt::one(), BigInt::zero());
    terms
        .iter()
        .map(|&a| {
            let a = BigInt::from(a);
            let p = &a * &p1 + &p0;
            let q = &a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p.clone());
            q0 = std::mem::replace(&mut q1, q.clone());
            (p, q)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationTuple {
    angles: Vec<Angle>,
}

impl RotationTuple {
    pub fn new(angles: Vec<Angle>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument("rotation tuple needs at least one angle".into()));
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn dimension(&self) -> usize {
        self.angles.len()
    }

    pub fn max_drift(&self) -> Rational {
        self.angles.iter().map(|a| a.drift.clone()).max().unwrap_or_else(Rational::zero)
    }
}

/// Finite union of half-open arcs `[a, b)` with `0 ≤ a < b ≤ 1`, sorted,
/// disjoint and non-adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArcSet {
    arcs: Vec<(Rational, Rational)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        Self { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        Self { arcs: vec![(Rational::zero(), Rational::one())] }
    }

    /// Builds from arcs given as `(start, end)`. `end ≤ start` wraps through 0;
    /// an arc whose end is exactly 1 stops at the top of the circle.
    pub fn new(arcs: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut pieces = Vec::new();
        for (a, b) in arcs {
            let zero = Rational::zero();
            let one = Rational::one();
            if a.is_negative() || a >= one || b.is_negative() || b > one {
                return Err(Error::InvalidSet(format!(
                    "arc endpoints must lie in [0,1): {}..{}",
                    rational::format(&a),
                    rational::format(&b)
                )));
            }
            if b > a {
                pieces.push((a, b));
            } else {
                pieces.push((a, one));
                if b > zero {
                    pieces.push((zero, b));
                }
            }
        }
        Ok(Self::normalized(pieces))
    }

    /// `[start, end)` without wrap.
    pub fn interval(start: Rational, end: Rational) -> Result<Self> {
        Self::new([(start, end)])
    }

    fn normalized(mut pieces: Vec<(Rational, Rational)>) -> Self {
        pieces.retain(|(a, b)| b > a);
        pieces.sort();
        let mut arcs: Vec<(Rational, Rational)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match arcs.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => arcs.push((a, b)),
            }
        }
        Self { arcs }
    }

    /// Parses `a..b` pieces separated by `,` or `+`, e.g. `0..1/2,3/4..1`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut arcs = Vec::new();
        for piece in text.split([',', '+']).map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) =
                piece.split_once("..").ok_or_else(|| Error::Parse(format!("arc {piece:?} is not of the form a..b")))?;
            arcs.push((rational::parse(a)?.value, rational::parse(b)?.value));
        }
        Self::new(arcs)
    }

    pub fn arcs(&self) -> &[(Rational, Rational)] {
        &self.arcs
    }

    pub fn measure(&self) -> Rational {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let x = frac(x);
        self.arcs.iter().any(|(a, b)| *a <= x && x < *b)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let x = x - x.floor();
        self.arcs.iter().any(|(a, b)| rational::to_f64(a) <= x && x < rational::to_f64(b))
    }

    /// `self − t mod 1`.
    pub fn translate_back(&self, t: &Rational) -> Self {
        if t.is_zero() {
            return self.clone();
        }
        let one = Rational::one();
        let mut pieces = Vec::with_capacity(self.arcs.len() + 1);
        for (a, b) in &self.arcs {
            let start = frac(&(a - t));
            let end = &start + (b - a);
            if end > one {
                pieces.push((Rational::zero(), &end - &one));
                pieces.push((start, one.clone()));
            } else {
                pieces.push((start, end));
            }
        }
        Self::normalized(pieces)
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.arcs.len() && j < other.arcs.len() {
            let (a1, b1) = &self.arcs[i];
            let (a2, b2) = &other.arcs[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet { arcs: out }
    }

    pub fn endpoint_count(&self) -> usize {
        2 * self.arcs.len()
    }
}

impl std::fmt::Display for ArcSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> =
            self.arcs.iter().map(|(a, b)| format!("{}..{}", rational::format(a), rational::format(b))).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `R^{-n}(s) = s − n·ω mod 1`.
pub fn rot_preimage(angle: &Angle, n: i64, s: &ArcSet) -> ArcSet {
    s.translate_back(&(&angle.surrogate * int(n)))
}

/// Exact length of the intersection of all sets (the full circle for none).
pub fn arcs_intersect_measure(sets: &[ArcSet]) -> Rational {
    let mut iter = sets.iter();
    let Some(first) = iter.next() else { return Rational::one() };
    let mut acc = first.clone();
    for s in iter {
        if acc.arcs.is_empty() {
            break;
        }
        acc = acc.intersect(s);
    }
    acc.measure()
}

/// Diameter of `{x, R_1^n x, …, R_k^n x}` with its drift qualification.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDiameter {
    pub n: i64,
    pub diam: Rational,
    /// `n · max_i δ_i`.
    pub drift: Rational,
    pub unreliable: bool,
}

/// Max pairwise circle distance of `{0, nω_1, …, nω_k}`; independent of `x`.
pub fn orbit_diam(r: &RotationTuple, n: i64) -> OrbitDiameter {
    let nn = int(n);
    let mut points = vec![Rational::zero()];
    points.extend(r.angles.iter().map(|a| frac(&(&a.surrogate * &nn))));
    let mut diam = Rational::zero();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = circle_norm(&(&points[i] - &points[j]));
            if d > diam {
                diam = d;
            }
        }
    }
    let drift = r.max_drift() * nn.abs();
    let unreliable = drift > &diam / int(2);
    OrbitDiameter { n, diam, drift, unreliable }
}

fn max_norm(r: &RotationTuple, n: i64) -> Rational {
    let nn = int(n);
    r.angles.iter().map(|a| circle_norm(&(&a.surrogate * &nn))).max().expect("non-empty tuple")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletReport {
    pub k: usize,
    pub horizon: i64,
    /// Smallest minimiser of `max_i ‖n·ω_i‖` over `1 ≤ n ≤ horizon`.
    pub n_star: i64,
    pub value: Rational,
    /// `value < horizon^{-1/k}`, decided exactly as `value^k · horizon < 1`.
    pub bound_holds: bool,
    pub drift: Rational,
    /// The bound still holds after adding the drift to `value`.
    pub robust: bool,
}

/// Exhaustive simultaneous-approximation minimum over `1 ≤ n ≤ horizon`.
pub fn dirichlet_min(r: &RotationTuple, horizon: i64) -> Result<DirichletReport> {
    dirichlet_min_with(Execution::default_for_build(), r, horizon)
}

pub fn dirichlet_min_with(exec: Execution, r: &RotationTuple, horizon: i64) -> Result<DirichletReport> {
    if horizon < 1 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let values = par::map_range(exec, 1..horizon + 1, |n| max_norm(r, n));
    let (idx, value) = values
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1 < best.1 { cur } else { best })
        .expect("non-empty range");
    let n_star = idx as i64 + 1;
    let k = r.dimension();
    let below = |v: &Rational| num_traits::pow(v.clone(), k) * int(horizon) < Rational::one();
    let drift = r.max_drift() * int(n_star);
    let bound_holds = below(&value);
    let robust = below(&(&value + &drift));
    Ok(DirichletReport { k, horizon, n_star, value, bound_holds, drift, robust })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiamPoint {
    pub n: i64,
    pub diam: Rational,
    /// `n^{1/k} · diam`.
    pub scaled: f64,
    pub running_min: Rational,
    pub running_min_scaled: f64,
    pub drift: Rational,
    pub unreliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiamScan {
    pub k: usize,
    pub points: Vec<DiamPoint>,
}

impl DiamScan {
    pub fn min_scaled(&self) -> f64 {
        self.points.last().map_or(f64::INFINITY, |p| p.running_min_scaled)
    }

    pub fn at(&self, n: i64) -> Option<&DiamPoint> {
        self.points.get(usize::try_from(n - 1).ok()?)
    }
}

/// Orbit diameters for `1 ≤ n ≤ horizon` with running minima.
pub fn diam_recurrence_scan(r: &RotationTuple, horizon: i64) -> Result<DiamScan> {
    diam_recurrence_scan_with(Execution::default_for_build(), r, horizon)
}

pub fn diam_recurrence_scan_with(exec: Execution, r: &RotationTuple, horizon: i64) -> Result<DiamScan> {
    if horizon < 1 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let k = r.dimension();
    let raw = par::map_range(exec, 1..horizon + 1, |n| orbit_diam(r, n));
    let mut points = Vec::with_capacity(raw.len());
    let mut best: Option<Rational> = None;
    let mut best_scaled = f64::INFINITY;
    for d in raw {
        let scaled = (d.n as f64).powf(1.0 / k as f64) * d.diam.to_f64().unwrap_or(f64::NAN);
        if best.as_ref().is_none_or(|b| d.diam < *b) {
            best = Some(d.diam.clone());
        }
        best_scaled = best_scaled.min(scaled);
        points.push(DiamPoint {
            n: d.n,
            diam: d.diam,
            scaled,
            running_min: best.clone().expect("set above"),
            running_min_scaled: best_scaled,
            drift: d.drift,
            unreliable: d.unreliable,
        });
    }
    Ok(DiamScan { k, points })
}
