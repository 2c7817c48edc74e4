//! Regularity of salary inflows.

use chrono::Datelike;

use crate::history::AccountHistory;

/// Share of salary income that must land in one window.
pub const CONSISTENCY_SHARE: f64 = 0.7;
pub const MONTHLY_WINDOW_DAYS: u32 = 10;
pub const WEEKLY_WINDOW_DAYS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SalaryConsistency {
    pub monthly: bool,
    pub weekly: bool,
}

/// Largest share of salary income in any 10-day day-of-month window.
///
/// Windows slide over days 1..=31 without wrapping into the next month.
pub fn best_monthly_share(history: &AccountHistory, salary: &[bool]) -> Option<f64> {
    let mut by_day = [0f64; 32];
    for (tx, _) in history.transactions.iter().zip(salary).filter(|(_, s)| **s) {
        by_day[tx.date.day() as usize] += tx.amount as f64;
    }
    let total: f64 = by_day.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let last_start = 31 - MONTHLY_WINDOW_DAYS + 1;
    let best = (1..=last_start)
        .map(|s| by_day[s as usize..(s + MONTHLY_WINDOW_DAYS) as usize].iter().sum::<f64>())
        .fold(0.0, f64::max);
    Some(best / total)
}

/// Largest share of salary income in any 3-day day-of-week window. The
/// week is cyclic, so Saturday-Sunday-Monday is a window.
pub fn best_weekly_share(history: &AccountHistory, salary: &[bool]) -> Option<f64> {
    let mut by_weekday = [0f64; 7];
    for (tx, _) in history.transactions.iter().zip(salary).filter(|(_, s)| **s) {
        by_weekday[tx.date.weekday().num_days_from_monday() as usize] += tx.amount as f64;
    }
    let total: f64 = by_weekday.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let best = (0..7)
        .map(|s| (0..WEEKLY_WINDOW_DAYS as usize).map(|k| by_weekday[(s + k) % 7]).sum::<f64>())
        .fold(0.0, f64::max);
    Some(best / total)
}

/// Monthly / weekly consistency flags; both false without salary income.
pub fn salary_consistency(history: &AccountHistory, salary: &[bool]) -> SalaryConsistency {
    SalaryConsistency {
        monthly: best_monthly_share(history, salary).is_some_and(|s| s > CONSISTENCY_SHARE),
        weekly: best_weekly_share(history, salary).is_some_and(|s| s > CONSISTENCY_SHARE),
    }
}
