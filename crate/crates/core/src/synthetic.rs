//! Regime-switching mixed-frequency data generator.
//!
//! A daily AR(1) factor drives a monthly factor; the quarterly target loads
//! on both factors as observed at the end of the previous quarter, plus a
//! Markov-switching intercept. Daily series have a few random holidays.

use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataio::{
    interpolate_holidays, quarter_of, regularize_calendar, write_series_csv, BusinessCalendar,
    Frequency, GroupInput, Manifest, RawSeries, SeriesEntry,
};
use crate::error::{Error, Result};
use crate::mfesn::MultiFreqSeries;
use crate::seeding::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub quarters: usize,
    pub start_year: i32,
    pub monthly_dim: usize,
    pub daily_dim: usize,
    pub daily_kappa: usize,
    /// Probability of staying in the current regime each quarter.
    pub regime_stay: f64,
    pub regime_means: [f64; 2],
    /// Regime-dependent drift of the daily factor, `±regime_signal`.
    #[serde(default)]
    pub regime_signal: f64,
    pub target_noise: f64,
    pub holiday_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            quarters: 80,
            start_year: 2000,
            monthly_dim: 3,
            daily_dim: 2,
            daily_kappa: 30,
            regime_stay: 0.9,
            regime_means: [0.5, -1.0],
            regime_signal: 1.0,
            target_noise: 0.3,
            holiday_rate: 0.01,
            seed: 0,
        }
    }
}

/// Dated raw series; all carry transformation code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPanel {
    pub target: RawSeries,
    pub monthly: Vec<RawSeries>,
    pub daily: Vec<RawSeries>,
    pub daily_kappa: usize,
    pub regimes: Vec<usize>,
}

fn normal<R: Rng>(r: &mut R) -> f64 {
    StandardNormal.sample(r)
}

fn first_of_month(year: i32, month0: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year + (month0 / 12) as i32, month0 % 12 + 1, 1).expect("valid month")
}

pub fn generate_panel(config: &SyntheticConfig) -> Result<SyntheticPanel> {
    if config.quarters < 2 {
        return Err(Error::invalid("quarters", "need at least 2"));
    }
    if !(0.0..=1.0).contains(&config.regime_stay) || !(0.0..0.5).contains(&config.holiday_rate) {
        return Err(Error::invalid("synthetic", "probabilities out of range"));
    }
    if config.monthly_dim == 0 && config.daily_dim == 0 {
        return Err(Error::invalid("synthetic", "at least one regressor is required"));
    }
    let mut r = rng(config.seed, 0);
    let calendar = BusinessCalendar::weekdays();
    let start = NaiveDate::from_ymd_opt(config.start_year, 1, 1)
        .ok_or_else(|| Error::invalid("start_year", "out of range"))?;
    let end = first_of_month(config.start_year, 3 * config.quarters as u32) - chrono::Duration::days(1);
    let days = calendar.days(start, end);

    let daily_load: Vec<f64> = (0..config.daily_dim).map(|j| 1.0 - 0.3 * j as f64).collect();
    let monthly_load: Vec<f64> = (0..config.monthly_dim).map(|i| 1.0 - 0.2 * i as f64).collect();

    let mut daily = vec![Vec::with_capacity(days.len()); config.daily_dim];
    let mut monthly = vec![Vec::with_capacity(3 * config.quarters); config.monthly_dim];
    let mut target = Vec::with_capacity(config.quarters);
    let mut regimes = Vec::with_capacity(config.quarters);

    let mut d_factor = 0.0;
    let mut m_factor = 0.0;
    let mut regime = 0usize;
    let mut day_iter = days.iter().peekable();
    let mut month_daily_sum = 0.0;
    let mut month_daily_n = 0usize;
    let mut slow = 0.0;
    let mut predictor = 0.0;

    for q in 0..config.quarters {
        if q > 0 && r.random::<f64>() >= config.regime_stay {
            regime = 1 - regime;
        }
        regimes.push(regime);
        let y = config.regime_means[regime] + predictor + config.target_noise * normal(&mut r);
        let (qy, qq) = (config.start_year + (q / 4) as i32, (q % 4) as u32);
        target.push((NaiveDate::from_ymd_opt(qy, 3 * qq + 1, 1).expect("valid quarter"), y));

        for m in 0..3u32 {
            let month = first_of_month(config.start_year, 3 * q as u32 + m);
            while let Some(&&day) = day_iter.peek() {
                if (day.year(), day.month0()) != (month.year(), month.month0()) {
                    break;
                }
                day_iter.next();
                let drift = if regime == 0 { config.regime_signal } else { -config.regime_signal };
                d_factor = 0.95 * d_factor + 0.05 * drift + 0.3 * normal(&mut r);
                month_daily_sum += d_factor;
                month_daily_n += 1;
                slow = 0.98 * slow + 0.02 * d_factor;
                for (j, series) in daily.iter_mut().enumerate() {
                    let v = 10.0 + daily_load[j] * d_factor + 0.05 * normal(&mut r);
                    let holiday = series.len() >= 5 && r.random::<f64>() < config.holiday_rate;
                    if !holiday {
                        series.push((day, v));
                    }
                }
            }
            let daily_mean = month_daily_sum / month_daily_n.max(1) as f64;
            month_daily_sum = 0.0;
            month_daily_n = 0;
            m_factor = 0.6 * m_factor + 0.5 * daily_mean + 0.4 * normal(&mut r);
            for (i, series) in monthly.iter_mut().enumerate() {
                series.push((month, monthly_load[i] * m_factor + 0.1 * normal(&mut r)));
            }
        }
        predictor = 0.6 * m_factor + 1.5 * slow;
    }

    let target = RawSeries::new("Y", Frequency::Quarterly, 1, target)?;
    let monthly = monthly
        .into_iter()
        .enumerate()
        .map(|(i, obs)| RawSeries::new(format!("M{}", i + 1), Frequency::Monthly, 1, obs))
        .collect::<Result<_>>()?;
    let daily = daily
        .into_iter()
        .enumerate()
        .map(|(j, obs)| RawSeries::new(format!("D{}", j + 1), Frequency::Daily, 1, obs))
        .collect::<Result<_>>()?;
    debug_assert_eq!(quarter_of(start), (config.start_year, 0));
    Ok(SyntheticPanel {
        target,
        monthly,
        daily,
        daily_kappa: config.daily_kappa,
        regimes,
    })
}

impl SyntheticPanel {
    fn groups(&self, calendar: &BusinessCalendar) -> Result<Vec<GroupInput>> {
        let mut groups = Vec::new();
        if !self.monthly.is_empty() {
            groups.push(GroupInput {
                name: "monthly".into(),
                frequency: Frequency::Monthly,
                daily_kappa: self.daily_kappa,
                series: self.monthly.clone(),
            });
        }
        if !self.daily.is_empty() {
            groups.push(GroupInput {
                name: "daily".into(),
                frequency: Frequency::Daily,
                daily_kappa: self.daily_kappa,
                series: self
                    .daily
                    .iter()
                    .map(|s| interpolate_holidays(s, calendar))
                    .collect::<Result<_>>()?,
            });
        }
        Ok(groups)
    }

    /// Aligned panel, monthly group first.
    pub fn to_series(&self) -> Result<MultiFreqSeries> {
        let calendar = BusinessCalendar::weekdays();
        regularize_calendar(&self.target, &self.groups(&calendar)?, &calendar)
    }

    /// Writes one CSV per series plus `manifest.json`; returns the manifest path.
    pub fn write_dataset(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |s: &RawSeries, group: Option<&str>| -> Result<SeriesEntry> {
            let file = PathBuf::from(format!("{}.csv", s.code));
            let path = dir.join(&file);
            write_series_csv(File::create(&path).map_err(|e| Error::io(&path, e))?, &s.observations)?;
            Ok(SeriesEntry {
                code: s.code.clone(),
                file,
                frequency: s.frequency,
                transform_code: s.transform_code,
                group: group.map(str::to_string),
            })
        };
        let target = write(&self.target, None)?;
        let mut series = Vec::new();
        for s in &self.monthly {
            series.push(write(s, Some("monthly"))?);
        }
        for s in &self.daily {
            series.push(write(s, Some("daily"))?);
        }
        let manifest = Manifest {
            target,
            series,
            daily_kappa: self.daily_kappa,
            calendar: BusinessCalendar::weekdays(),
        };
        let path = dir.join("manifest.json");
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(file, &manifest)?;
        Ok(path)
    }
}

/// Generates and aligns in one step.
pub fn generate(config: &SyntheticConfig) -> Result<MultiFreqSeries> {
    generate_panel(config)?.to_series()
}
