use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::par::{compensated_sum, map_range, Execution};
use crate::rational::{q, Rational};
use crate::torus::ArcSet;

/// Cell-constant function on an `R × R` dyadic grid of the two-torus.
///
/// Values are stored row-major: row `i` is the x-cell `[i/R, (i+1)/R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    res: usize,
    values: Vec<f64>,
}

pub(crate) fn check_resolution(res: usize, min: usize) -> Result<()> {
    if !res.is_power_of_two() || res < min {
        return Err(Error::InvalidArgument(format!("grid resolution must be a power of two ≥ {min}, got {res}")));
    }
    Ok(())
}

fn cell_centres_in(s: &ArcSet, res: usize) -> Vec<bool> {
    let den = 2 * res as i64;
    (0..res as i64).map(|i| s.contains(&q(2 * i + 1, den))).collect()
}

impl GridFunction {
    pub fn new(res: usize, values: Vec<f64>) -> Result<Self> {
        if res == 0 || values.len() != res * res {
            return Err(Error::InvalidArgument(format!(
                "grid of resolution {res} needs {} values, got {}",
                res * res,
                values.len()
            )));
        }
        Ok(Self { res, values })
    }

    pub fn constant(res: usize, v: f64) -> Self {
        Self { res, values: vec![v; res * res] }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(res: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = 1.0 / res as f64;
        let mut values = Vec::with_capacity(res * res);
        for i in 0..res {
            for j in 0..res {
                values.push(f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
            }
        }
        Self { res, values }
    }

    /// Indicator of `sx × sy`, a cell counted in when its centre is.
    pub fn box_indicator(res: usize, sx: &ArcSet, sy: &ArcSet) -> Self {
        let xs = cell_centres_in(sx, res);
        let ys = cell_centres_in(sy, res);
        let mut values = Vec::with_capacity(res * res);
        for &a in &xs {
            for &b in &ys {
                values.push(if a && b { 1.0 } else { 0.0 });
            }
        }
        Self { res, values }
    }

    pub fn resolution(&self) -> usize {
        self.res
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.res + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.res..(i + 1) * self.res]
    }

    pub fn is_indicator(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// `∫ self · other` with the uniform cell measure.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.same_grid(other)?;
        let rows = map_range(Execution::default_for_build(), 0..self.res as i64, |i| {
            let i = i as usize;
            compensated_sum(self.row(i).iter().zip(other.row(i)).map(|(a, b)| a * b))
        });
        Ok(compensated_sum(rows) / (self.res * self.res) as f64)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).map(f64::sqrt).unwrap_or(f64::NAN)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { res: self.res, values })
    }

    fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.res != other.res {
            return Err(Error::InvalidArgument(format!("grid mismatch: {} vs {}", self.res, other.res)));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for i in 0..self.res {
            out.write_record(self.row(i).iter().map(|v| format!("{v:e}"))).map_err(|e| Error::Parse(e.to_string()))?;
        }
        out.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a square grid written by [`GridFunction::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut input =
            csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let mut values = Vec::new();
        let mut rows = 0usize;
        for (line, record) in input.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            for field in record.iter() {
                let v: f64 =
                    field.parse().map_err(|_| Error::Parse(format!("row {}: bad number {field:?}", line + 1)))?;
                values.push(v);
            }
            rows += 1;
        }
        Self::new(rows, values)
    }
}

/// Which concrete system the split is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemTag {
    Rotation,
    RotationDoubling,
}

/// Grid checks of the compact part of an indicator.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IndicatorChecks {
    pub min_f: f64,
    pub max_f: f64,
    pub bounds_ok: bool,
    #[serde(with = "crate::rational::serde_str")]
    pub integral_af: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub measure_sq: Rational,
    pub integral_ok: bool,
    pub positivity_on_a: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    pub compact_part: GridFunction,
    pub wm_part: GridFunction,
    pub residual_norm: f64,
    pub inner_product: f64,
    pub system_tag: SystemTag,
    /// Present only for indicator input.
    pub indicator_checks: Option<IndicatorChecks>,
}

impl SpectralSplit {
    /// True when `f` takes one value along every row.
    pub fn compact_is_y_constant(&self) -> bool {
        let f = &self.compact_part;
        (0..f.resolution()).all(|i| f.row(i).iter().all(|&v| v == f.row(i)[0]))
    }
}

/// Split for a pure rotation: every vector is compact.
pub fn jdlg_split_rotation(obs: &GridFunction) -> Result<SpectralSplit> {
    check_resolution(obs.resolution(), 256)?;
    let res = obs.resolution();
    let indicator_checks = obs.is_indicator().then(|| {
        let count = obs.values.iter().filter(|&&v| v == 1.0).count() as i64;
        let area = (res * res) as i64;
        let mu = q(count, area);
        IndicatorChecks {
            min_f: obs.values.iter().copied().fold(f64::INFINITY, f64::min),
            max_f: obs.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            bounds_ok: true,
            integral_af: mu.clone(),
            measure_sq: &mu * &mu,
            integral_ok: mu >= &mu * &mu,
            positivity_on_a: true,
        }
    });
    Ok(SpectralSplit {
        compact_part: obs.clone(),
        wm_part: GridFunction::constant(res, 0.0),
        residual_norm: 0.0,
        inner_product: 0.0,
        system_tag: SystemTag::Rotation,
        indicator_checks,
    })
}

/// Split for `(x, y) ↦ (x + ω, 2y)`: the compact part is the conditional
/// expectation onto the rotation factor, i.e. the mean over `y`.
pub fn jdlg_split_product(obs: &GridFunction) -> Result<SpectralSplit> {
    jdlg_split_product_with(Execution::default_for_build(), obs)
}

pub fn jdlg_split_product_with(exec: Execution, obs: &GridFunction) -> Result<SpectralSplit> {
    let res = obs.resolution();
    check_resolution(res, 256)?;
    let means = map_range(exec, 0..res as i64, |i| compensated_sum(obs.row(i as usize).iter().copied()) / res as f64);
    let mut fv = Vec::with_capacity(res * res);
    for m in &means {
        fv.extend(std::iter::repeat_n(*m, res));
    }
    let f = GridFunction { res, values: fv };
    let g = obs.sub(&f)?;
    let recon: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a + b).collect();
    let residual_norm = obs.sub(&GridFunction { res, values: recon })?.l2_norm();
    let inner_product = f.inner(&g)?;

    let indicator_checks = obs.is_indicator().then(|| {
        let counts: Vec<i64> = (0..res).map(|i| obs.row(i).iter().filter(|&&v| v == 1.0).count() as i64).collect();
        let r = res as i64;
        let sum_c: i64 = counts.iter().sum();
        let sum_c2: i128 = counts.iter().map(|&c| (c as i128) * (c as i128)).sum();
        let integral_af = Rational::new(sum_c2.into(), (r as i128 * r as i128 * r as i128).into());
        let mu = q(sum_c, r * r);
        let measure_sq = &mu * &mu;
        let min_f = means.iter().copied().fold(f64::INFINITY, f64::min);
        let max_f = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bounds_ok = counts.iter().all(|&c| (0..=r).contains(&c)) && min_f >= -1e-9 && max_f <= 1.0 + 1e-9;
        let positivity_on_a = counts.iter().zip(&means).all(|(&c, &m)| c == 0 || m > 1e-12);
        IndicatorChecks {
            min_f,
            max_f,
            bounds_ok,
            integral_ok: integral_af >= measure_sq,
            integral_af,
            measure_sq,
            positivity_on_a,
        }
    });
    Ok(SpectralSplit {
        compact_part: f,
        wm_part: g,
        residual_norm,
        inner_product,
        system_tag: SystemTag::RotationDoubling,
        indicator_checks,
    })
}
