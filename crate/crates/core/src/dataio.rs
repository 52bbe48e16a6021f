//! Mixed-frequency data ingestion.
//!
//! Pipeline: read `date,value` CSV files listed in a manifest, fill daily
//! holiday gaps, apply the transformation code of each series, then bin
//! everything onto the quarterly grid of the target.
//!
//! Transformation codes:
//!
//! | code | transform            |
//! |------|----------------------|
//! | 1    | none                 |
//! | 2    | first difference     |
//! | 3    | second difference    |
//! | 4    | log                  |
//! | 5    | log difference       |
//! | 6    | second log difference|
//! | 7    | percent change       |

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfesn::{FrequencyGroup, MultiFreqSeries};

/// Daily observations per quarter after binning, unless configured otherwise.
pub const DEFAULT_DAILY_KAPPA: usize = 60;
/// Preceding values averaged to fill a holiday.
pub const HOLIDAY_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Quarterly,
    Monthly,
    Daily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub code: String,
    pub frequency: Frequency,
    pub transform_code: u8,
    /// Strictly increasing dates; `NaN` marks a missing value.
    pub observations: Vec<(NaiveDate, f64)>,
}

impl RawSeries {
    pub fn new(
        code: impl Into<String>,
        frequency: Frequency,
        transform_code: u8,
        observations: Vec<(NaiveDate, f64)>,
    ) -> Result<Self> {
        let code = code.into();
        match transform_code {
            1..=7 => {}
            8 => {
                return Err(Error::Series {
                    code,
                    reason: "transformation code 8 (volatility) is not supported".into(),
                })
            }
            c => {
                return Err(Error::Series {
                    code,
                    reason: format!("unknown transformation code {c}"),
                })
            }
        }
        if let Some(w) = observations.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::Series {
                code,
                reason: format!("dates not strictly increasing at {}", w[1].0),
            });
        }
        Ok(Self {
            code,
            frequency,
            transform_code,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.1).collect()
    }

    /// The transformed series, tagged with code 1.
    pub fn transformed(&self) -> Result<RawSeries> {
        Ok(RawSeries {
            code: self.code.clone(),
            frequency: self.frequency,
            transform_code: 1,
            observations: apply_transform(self)?,
        })
    }
}

fn log_values(series: &RawSeries) -> Result<Vec<f64>> {
    series
        .observations
        .iter()
        .map(|&(date, v)| {
            if v.is_nan() {
                Ok(v)
            } else if v > 0.0 {
                Ok(v.ln())
            } else {
                Err(Error::Series {
                    code: series.code.clone(),
                    reason: format!("log of nonpositive value {v} on {date}"),
                })
            }
        })
        .collect()
}

fn diff(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Applies the series' transformation code, dropping the leading entries it leaves undefined.
pub fn apply_transform(series: &RawSeries) -> Result<Vec<(NaiveDate, f64)>> {
    let raw = series.values();
    let values = match series.transform_code {
        1 => raw,
        2 => diff(&raw),
        3 => diff(&diff(&raw)),
        4 => log_values(series)?,
        5 => diff(&log_values(series)?),
        6 => diff(&diff(&log_values(series)?)),
        7 => raw.windows(2).map(|w| w[1] / w[0] - 1.0).collect(),
        c => {
            return Err(Error::Series {
                code: series.code.clone(),
                reason: format!("unsupported transformation code {c}"),
            })
        }
    };
    let skip = series.observations.len() - values.len();
    Ok(series.observations[skip..]
        .iter()
        .zip(values)
        .map(|(&(d, _), v)| (d, v))
        .collect())
}

/// Inverse of code 2: cumulative sum starting from the first level.
pub fn integrate_differences(first_level: f64, diffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(diffs.len() + 1);
    out.push(first_level);
    let mut level = first_level;
    for d in diffs {
        level += d;
        out.push(level);
    }
    out
}

/// Business days: weekdays not listed as closures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessCalendar {
    #[serde(default)]
    pub closures: BTreeSet<NaiveDate>,
}

impl BusinessCalendar {
    pub fn weekdays() -> Self {
        Self::default()
    }

    pub fn is_business_day(&self, date: NaiveDate) -> bool {
        !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) && !self.closures.contains(&date)
    }

    /// Business days in `[from, to]`.
    pub fn days(&self, from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
        let mut out = Vec::new();
        let mut d = from;
        while d <= to {
            if self.is_business_day(d) {
                out.push(d);
            }
            d += Duration::days(1);
        }
        out
    }
}

/// Fills every business day without a value by the mean of the five
/// preceding values, left to right (earlier fills count as values).
pub fn interpolate_holidays(series: &RawSeries, calendar: &BusinessCalendar) -> Result<RawSeries> {
    let (Some(first), Some(last)) = (series.observations.first(), series.observations.last()) else {
        return Ok(series.clone());
    };
    let mut observed = series.observations.iter().peekable();
    let mut out: Vec<(NaiveDate, f64)> = Vec::with_capacity(series.len());
    for day in calendar.days(first.0, last.0) {
        while let Some(&&(d, v)) = observed.peek() {
            if d >= day {
                break;
            }
            // observation on a non-business day
            if !v.is_nan() {
                out.push((d, v));
            }
            observed.next();
        }
        let value = match observed.peek() {
            Some(&&(d, v)) if d == day => {
                observed.next();
                v
            }
            _ => f64::NAN,
        };
        if value.is_nan() {
            if out.len() < HOLIDAY_WINDOW {
                return Err(Error::Series {
                    code: series.code.clone(),
                    reason: format!(
                        "gap on {day} has fewer than {HOLIDAY_WINDOW} preceding observations"
                    ),
                });
            }
            let fill = out[out.len() - HOLIDAY_WINDOW..].iter().map(|o| o.1).sum::<f64>()
                / HOLIDAY_WINDOW as f64;
            out.push((day, fill));
        } else {
            out.push((day, value));
        }
    }
    for &(d, v) in observed {
        if !v.is_nan() {
            out.push((d, v));
        }
    }
    RawSeries::new(series.code.clone(), series.frequency, series.transform_code, out)
}

/// `(year, quarter 0..4)`.
pub fn quarter_of(date: NaiveDate) -> (i32, u32) {
    (date.year(), date.month0() / 3)
}

fn quarter_index(date: NaiveDate) -> i64 {
    let (y, q) = quarter_of(date);
    i64::from(y) * 4 + i64::from(q)
}

fn quarter_bounds(index: i64) -> (NaiveDate, NaiveDate) {
    let year = index.div_euclid(4) as i32;
    let q = index.rem_euclid(4) as u32;
    let start = NaiveDate::from_ymd_opt(year, 3 * q + 1, 1).expect("valid quarter start");
    let next = if q == 3 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, 3 * q + 4, 1)
    }
    .expect("valid quarter start");
    (start, next - Duration::days(1))
}

pub fn quarter_label(index: i64) -> String {
    format!("{}Q{}", index.div_euclid(4), index.rem_euclid(4) + 1)
}

/// Half-open bin boundaries `[⌊jn/κ⌋, ⌊(j+1)n/κ⌋)` splitting `n` days into `κ` bins.
pub fn daily_bins(n: usize, kappa: usize) -> Vec<(usize, usize)> {
    (0..kappa).map(|j| (j * n / kappa, (j + 1) * n / kappa)).collect()
}

/// A group of same-frequency series to be aligned together.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupInput {
    pub name: String,
    pub frequency: Frequency,
    /// Sub-periods per quarter; only used for daily groups.
    pub daily_kappa: usize,
    /// Already transformed (and, for daily data, interpolated).
    pub series: Vec<RawSeries>,
}

/// One column of a group on the quarterly grid: `κ` values per quarter, NaN where unobserved.
fn align_column(
    series: &RawSeries,
    kappa: usize,
    first_q: i64,
    quarters: usize,
    calendar: &BusinessCalendar,
) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; quarters * kappa];
    match series.frequency {
        Frequency::Quarterly | Frequency::Monthly => {
            for &(date, v) in &series.observations {
                let q = quarter_index(date) - first_q;
                if q < 0 || q as usize >= quarters {
                    continue;
                }
                let pos = match series.frequency {
                    Frequency::Quarterly => 0,
                    _ => (date.month0() % 3) as usize,
                };
                out[q as usize * kappa + pos] = v;
            }
        }
        Frequency::Daily => {
            for q in 0..quarters {
                let (start, end) = quarter_bounds(first_q + q as i64);
                let days = calendar.days(start, end);
                let mut last_in_bin = vec![None; kappa];
                let bins = daily_bins(days.len(), kappa);
                if bins.iter().any(|(a, b)| a == b) {
                    return Err(Error::Series {
                        code: series.code.clone(),
                        reason: format!(
                            "{} business days in {} cannot fill {kappa} bins",
                            days.len(),
                            quarter_label(first_q + q as i64)
                        ),
                    });
                }
                let lo = series.observations.partition_point(|o| o.0 < start);
                let hi = series.observations.partition_point(|o| o.0 <= end);
                for &(date, v) in &series.observations[lo..hi] {
                    if v.is_nan() {
                        continue;
                    }
                    let Ok(pos) = days.binary_search(&date) else {
                        continue;
                    };
                    let j = bins.partition_point(|&(_, b)| b <= pos);
                    last_in_bin[j] = Some(v);
                }
                for (j, v) in last_in_bin.into_iter().enumerate() {
                    if let Some(v) = v {
                        out[q * kappa + j] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Lines up the target and regressor groups on the target's quarterly grid.
///
/// The sample starts at the first quarter where the target and every group
/// are fully observed and ends at the target's last quarter. Missing
/// sub-periods are only accepted as a trailing block.
pub fn regularize_calendar(
    target: &RawSeries,
    groups: &[GroupInput],
    calendar: &BusinessCalendar,
) -> Result<MultiFreqSeries> {
    if target.frequency != Frequency::Quarterly {
        return Err(Error::Series {
            code: target.code.clone(),
            reason: "target must be quarterly".into(),
        });
    }
    let valid: Vec<(NaiveDate, f64)> = target.observations.iter().copied().filter(|o| !o.1.is_nan()).collect();
    let (Some(first), Some(last)) = (valid.first(), valid.last()) else {
        return Err(Error::Series {
            code: target.code.clone(),
            reason: "no target observations".into(),
        });
    };
    let t0 = quarter_index(first.0);
    let quarters = (quarter_index(last.0) - t0 + 1) as usize;

    let mut columns: Vec<(usize, usize, Vec<Vec<f64>>)> = Vec::new();
    for g in groups {
        let kappa = match g.frequency {
            Frequency::Quarterly => 1,
            Frequency::Monthly => 3,
            Frequency::Daily => g.daily_kappa,
        };
        if kappa == 0 {
            return Err(Error::invalid("daily_kappa", "must be >= 1"));
        }
        if g.series.is_empty() {
            return Err(Error::invalid("group", format!("group `{}` has no series", g.name)));
        }
        let mut cols = Vec::new();
        for s in &g.series {
            if s.frequency != g.frequency {
                return Err(Error::Series {
                    code: s.code.clone(),
                    reason: format!("frequency differs from group `{}`", g.name),
                });
            }
            cols.push(align_column(s, kappa, t0, quarters, calendar)?);
        }
        columns.push((kappa, g.series.len(), cols));
    }

    // first quarter with everything observed
    let complete = |q: usize| {
        target_value(&valid, t0 + q as i64).is_some()
            && columns
                .iter()
                .all(|(kappa, _, cols)| cols.iter().all(|c| c[q * kappa..(q + 1) * kappa].iter().all(|v| !v.is_nan())))
    };
    let start = (0..quarters).find(|&q| complete(q)).ok_or_else(|| {
        Error::InsufficientData("no quarter where the target and all regressors are observed".into())
    })?;

    let periods = quarters - start;
    let target_values: Vec<f64> = (start..quarters)
        .map(|q| target_value(&valid, t0 + q as i64).unwrap_or(f64::NAN))
        .collect();
    let labels = (start..quarters).map(|q| quarter_label(t0 + q as i64)).collect();
    let mut out_groups = Vec::with_capacity(groups.len());
    for (g, (kappa, dim, cols)) in groups.iter().zip(&columns) {
        let mut values = Vec::with_capacity(periods * kappa * dim);
        for r in start * kappa..quarters * kappa {
            for c in cols {
                values.push(c[r]);
            }
        }
        out_groups.push(FrequencyGroup::new(g.name.clone(), *kappa, *dim, values)?);
    }
    MultiFreqSeries::new(target_values, out_groups, labels)
}

fn target_value(valid: &[(NaiveDate, f64)], q: i64) -> Option<f64> {
    valid.iter().find(|o| quarter_index(o.0) == q).map(|o| o.1)
}

/// Reads a `date,value` CSV. Empty, `.`, `NA` and `NaN` values are missing.
pub fn read_series_csv(path: &Path, code: &str, frequency: Frequency, transform_code: u8) -> Result<RawSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "date" || &headers[1] != "value" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("series `{code}`: expected header `date,value`"),
        });
    }
    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: format!("series `{code}`: {reason}"),
        };
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| parse_err(format!("bad date `{}`: {e}", &record[0])))?;
        let raw = record.get(1).unwrap_or("");
        let value = match raw {
            "" | "." | "NA" | "NaN" | "nan" => f64::NAN,
            s => s.parse::<f64>().map_err(|e| parse_err(format!("bad value `{s}`: {e}")))?,
        };
        observations.push((date, value));
    }
    RawSeries::new(code, frequency, transform_code, observations).map_err(|e| match e {
        Error::Series { code, reason } => Error::Series {
            code,
            reason: format!("{reason} (in {})", path.display()),
        },
        other => other,
    })
}

/// Writes a `date,value` CSV; missing values are left empty.
pub fn write_series_csv<W: Write>(writer: W, observations: &[(NaiveDate, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "value"])?;
    for (d, v) in observations {
        let value = if v.is_nan() { String::new() } else { format!("{v}") };
        w.write_record([d.format("%Y-%m-%d").to_string(), value])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// One input file listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub code: String,
    /// Relative to the manifest's directory.
    pub file: PathBuf,
    pub frequency: Frequency,
    pub transform_code: u8,
    /// Regressor group name; ignored for the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub target: SeriesEntry,
    pub series: Vec<SeriesEntry>,
    #[serde(default = "default_daily_kappa")]
    pub daily_kappa: usize,
    #[serde(default)]
    pub calendar: BusinessCalendar,
}

fn default_daily_kappa() -> usize {
    DEFAULT_DAILY_KAPPA
}

impl Manifest {
    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

fn load_entry(base: &Path, entry: &SeriesEntry, calendar: &BusinessCalendar) -> Result<RawSeries> {
    let raw = read_series_csv(&base.join(&entry.file), &entry.code, entry.frequency, entry.transform_code)?;
    let filled = if entry.frequency == Frequency::Daily {
        interpolate_holidays(&raw, calendar)?
    } else {
        raw
    };
    filled.transformed()
}

/// Loads, interpolates, transforms and aligns every series in the manifest.
/// Groups keep the order in which their names first appear.
pub fn load_manifest(path: &Path) -> Result<MultiFreqSeries> {
    let manifest = Manifest::from_path(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let target = load_entry(base, &manifest.target, &manifest.calendar)?;
    let mut groups: Vec<GroupInput> = Vec::new();
    for entry in &manifest.series {
        let series = load_entry(base, entry, &manifest.calendar)?;
        let name = entry.group.clone().unwrap_or_else(|| {
            match entry.frequency {
                Frequency::Quarterly => "quarterly",
                Frequency::Monthly => "monthly",
                Frequency::Daily => "daily",
            }
            .to_string()
        });
        match groups.iter_mut().find(|g| g.name == name) {
            Some(g) => g.series.push(series),
            None => groups.push(GroupInput {
                name,
                frequency: entry.frequency,
                daily_kappa: manifest.daily_kappa,
                series: vec![series],
            }),
        }
    }
    regularize_calendar(&target, &groups, &manifest.calendar)
}
