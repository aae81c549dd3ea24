use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};

use super::ModelError;

const MICROS_PER_SECOND: i64 = 1_000_000;
const MICROS_PER_DAY: i64 = 86_400 * MICROS_PER_SECOND;

/// Timezone-naive instant at microsecond precision, stored as microseconds
/// since 1970-01-01 00:00:00. Ordering is chronological.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_micros(micros: i64) -> Self {
        Timestamp(micros)
    }

    pub const fn as_micros(self) -> i64 {
        self.0
    }

    pub fn from_day_and_time(day: Day, hour: u32, minute: u32, second: u32, micros: u32) -> Self {
        let secs = i64::from(hour) * 3600 + i64::from(minute) * 60 + i64::from(second);
        Timestamp(day.start().0 + secs * MICROS_PER_SECOND + i64::from(micros))
    }

    /// Calendar date component.
    pub fn day(self) -> Day {
        Day(self.0.div_euclid(MICROS_PER_DAY) as i32)
    }

    /// Parses `YYYY-MM-DD HH:MM:SS[.ffffff]` (zero to six fractional digits).
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::InvalidTimestamp(s.to_string());
        let s_trim = s.trim();
        if let Some((_, frac)) = s_trim.split_once('.') {
            if frac.is_empty() || frac.len() > 6 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
        }
        let dt = NaiveDateTime::parse_from_str(s_trim, "%Y-%m-%d %H:%M:%S%.f").map_err(|_| bad())?;
        let date = dt.date();
        let day = Day::from_ymd(date.year(), date.month(), date.day()).ok_or_else(bad)?;
        let micros = dt.nanosecond() / 1_000;
        Ok(Timestamp::from_day_and_time(day, dt.hour(), dt.minute(), dt.second(), micros))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let day = self.day();
        let rem = self.0 - day.start().0;
        let secs = rem / MICROS_PER_SECOND;
        let micros = rem % MICROS_PER_SECOND;
        write!(
            f,
            "{} {:02}:{:02}:{:02}.{:06}",
            day,
            secs / 3600,
            (secs / 60) % 60,
            secs % 60,
            micros
        )
    }
}

impl FromStr for Timestamp {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

/// A calendar date, counted in days since 1970-01-01.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Day(i32);

impl Day {
    pub const fn from_days(days: i32) -> Self {
        Day(days)
    }

    pub const fn as_days(self) -> i32 {
        self.0
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        let date = NaiveDate::from_ymd_opt(year, month, day)?;
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1)?;
        Some(Day((date - epoch).num_days() as i32))
    }

    pub fn offset(self, days: i32) -> Day {
        Day(self.0 + days)
    }

    /// First microsecond of the day.
    pub fn start(self) -> Timestamp {
        Timestamp(i64::from(self.0) * MICROS_PER_DAY)
    }

    /// 1970-01-01 was a Thursday.
    pub fn is_weekend(self) -> bool {
        matches!(self.0.rem_euclid(7), 2 | 3)
    }

    fn to_naive(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch") + chrono::Duration::days(i64::from(self.0))
    }
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_naive().format("%Y-%m-%d"))
    }
}

impl FromStr for Day {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let date = NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
            .map_err(|_| ModelError::InvalidTimestamp(s.to_string()))?;
        Day::from_ymd(date.year(), date.month(), date.day())
            .ok_or_else(|| ModelError::InvalidTimestamp(s.to_string()))
    }
}
