//! Per-hour calendar labels for a horizon.
//!
//! Every step of a horizon carries its wall-clock timestamp together with the
//! labels used by tariffs and avoided-cost averaging: month, day type and hour
//! of day.

use std::collections::BTreeSet;
use std::ops::Range;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayType {
    Weekday,
    Weekend,
    Holiday,
}

impl DayType {
    /// Weekends and holidays share one bucket for avoided-cost averaging.
    pub fn is_weekday(self) -> bool {
        matches!(self, DayType::Weekday)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
            DayType::Holiday => "holiday",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HourLabel {
    pub timestamp: NaiveDateTime,
    /// 1..=12
    pub month: u32,
    pub day_type: DayType,
    /// 0..=23
    pub hour: u32,
}

impl HourLabel {
    pub fn new(timestamp: NaiveDateTime, holidays: &BTreeSet<NaiveDate>) -> Self {
        let date = timestamp.date();
        let day_type = if holidays.contains(&date) {
            DayType::Holiday
        } else if matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            DayType::Weekend
        } else {
            DayType::Weekday
        };
        HourLabel {
            timestamp,
            month: date.month(),
            day_type,
            hour: timestamp.hour(),
        }
    }

    /// Key used to bucket avoided costs: (month, weekday flag, hour of day).
    pub fn acc_bucket(&self) -> (u32, bool, u32) {
        (self.month, self.day_type.is_weekday(), self.hour)
    }

    fn billing_month(&self) -> (i32, u32) {
        (self.timestamp.year(), self.month)
    }
}

/// Hourly calendar covering a horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    labels: Vec<HourLabel>,
}

impl Calendar {
    /// Consecutive hourly labels starting at `start`.
    pub fn hourly(start: NaiveDateTime, len: usize, holidays: &[NaiveDate]) -> Self {
        let holidays: BTreeSet<NaiveDate> = holidays.iter().copied().collect();
        let labels = (0..len)
            .map(|k| HourLabel::new(start + Duration::hours(k as i64), &holidays))
            .collect();
        Calendar { labels }
    }

    pub fn from_labels(labels: Vec<HourLabel>) -> Self {
        Calendar { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[HourLabel] {
        &self.labels
    }

    pub fn get(&self, t: usize) -> &HourLabel {
        &self.labels[t]
    }

    pub fn start(&self) -> Option<NaiveDateTime> {
        self.labels.first().map(|l| l.timestamp)
    }

    pub fn slice(&self, range: Range<usize>) -> Calendar {
        Calendar {
            labels: self.labels[range].to_vec(),
        }
    }

    /// Contiguous index ranges sharing one calendar month, in horizon order.
    pub fn billing_months(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut begin = 0;
        for t in 1..self.labels.len() {
            if self.labels[t].billing_month() != self.labels[t - 1].billing_month() {
                out.push(begin..t);
                begin = t;
            }
        }
        if !self.labels.is_empty() {
            out.push(begin..self.labels.len());
        }
        out
    }
}

/// Accepts `2023-07-01T13:00`, `2023-07-01T13:00:00`, `2023-07-01 13:00` and
/// the same with seconds.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%d %H:%M",
    ];
    let s = s.trim();
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        parse_timestamp(s).unwrap()
    }

    #[test]
    fn weekend_and_holiday_labels() {
        // 2023-07-01 is a Saturday, 2023-07-04 a Tuesday.
        let holidays = [parse_date("2023-07-04").unwrap()];
        let cal = Calendar::hourly(ts("2023-07-01T00:00"), 24 * 5, &holidays);
        assert_eq!(cal.get(0).day_type, DayType::Weekend);
        assert_eq!(cal.get(24).day_type, DayType::Weekend);
        assert_eq!(cal.get(48).day_type, DayType::Weekday);
        assert_eq!(cal.get(72 + 5).day_type, DayType::Holiday);
        assert_eq!(cal.get(72 + 5).hour, 5);
        assert_eq!(cal.get(96).day_type, DayType::Weekday);
    }

    #[test]
    fn billing_months_split_on_month_boundary() {
        let cal = Calendar::hourly(ts("2023-01-31T00:00"), 24 + 28 * 24 + 3, &[]);
        let months = cal.billing_months();
        assert_eq!(months, vec![0..24, 24..24 + 28 * 24, 24 + 28 * 24..24 + 28 * 24 + 3]);
    }

    #[test]
    fn timestamp_formats() {
        assert_eq!(ts("2023-07-01 13:00"), ts("2023-07-01T13:00:00"));
        assert!(parse_timestamp("13").is_none());
    }
}
