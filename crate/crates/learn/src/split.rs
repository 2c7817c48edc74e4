//! Out-of-time train/test splitting and class balancing.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use fvkit_core::rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitPlan {
    pub train_fraction: f64,
    /// Time key of the training window; the test window is the next one.
    /// When unset, the most populated window that has a successor is used.
    pub train_window: Option<i32>,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan { train_fraction: 0.8, train_window: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub train_window: i32,
    pub test_window: i32,
}

/// Choose `k` rows keeping the positive share of `rows`.
fn stratified_sample(rows: &[usize], target: &[Option<bool>], k: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| target[i] == Some(true));
    let share = pos.len() as f64 / rows.len() as f64;
    let k_pos = ((k as f64 * share).round() as usize).min(pos.len()).max(k.saturating_sub(neg.len()));
    pos.shuffle(rng);
    neg.shuffle(rng);
    let mut out: Vec<usize> = pos[..k_pos].iter().chain(&neg[..k - k_pos]).copied().collect();
    out.sort_unstable();
    out
}

fn check_classes(rows: &[usize], target: &[Option<bool>], window: i32) -> Result<()> {
    let pos = rows.iter().filter(|&&i| target[i] == Some(true)).count();
    if pos == 0 || pos == rows.len() {
        return Err(Error::SingleClass(format!("window {window} has one class")));
    }
    Ok(())
}

/// Train on a stratified share of the training window, test on a
/// stratified holdout from the window one step later. Rows with a missing
/// target are ignored.
pub fn split_out_of_time(time_keys: &[i32], target: &[Option<bool>], plan: &SplitPlan) -> Result<Split> {
    if !(0.0..1.0).contains(&plan.train_fraction) || plan.train_fraction == 0.0 {
        return Err(Error::Config(format!("train fraction {} outside (0, 1)", plan.train_fraction)));
    }
    let mut windows: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, (&key, t)) in time_keys.iter().zip(target).enumerate() {
        if t.is_some() {
            windows.entry(key).or_default().push(i);
        }
    }
    let train_window = match plan.train_window {
        Some(w) => w,
        None => windows
            .iter()
            .filter(|(w, _)| windows.contains_key(&(**w + 1)))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
            .map(|(w, _)| *w)
            .ok_or(Error::NoLaterWindow)?,
    };
    let test_window = train_window + 1;
    let (a, b) = match (windows.get(&train_window), windows.get(&test_window)) {
        (Some(a), Some(b)) => (a, b),
        (None, _) => return Err(Error::Dataset(format!("no rows in window {train_window}"))),
        (Some(_), None) => return Err(Error::NoLaterWindow),
    };
    check_classes(a, target, train_window)?;
    check_classes(b, target, test_window)?;
    let n = (a.len() + b.len()) as f64;
    let n_train = ((plan.train_fraction * n).round() as usize).min(a.len());
    let n_test = (((1.0 - plan.train_fraction) * n).round() as usize).min(b.len());
    let train = stratified_sample(a, target, n_train, &mut rng::stream(plan.seed, "split.train", 0));
    let test = stratified_sample(b, target, n_test, &mut rng::stream(plan.seed, "split.test", 0));
    Ok(Split { train, test, train_window, test_window })
}

/// Down-sample the majority class to the minority count.
pub fn balance_training(rows: &[usize], target: &[Option<bool>], seed: u64) -> Result<Vec<usize>> {
    let (pos, neg): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| target[i] == Some(true));
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass("training set has one class".into()));
    }
    let (minority, mut majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    majority.shuffle(&mut rng::stream(seed, "balance", 0));
    let mut out: Vec<usize> = minority.iter().chain(&majority[..minority.len()]).copied().collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_windows(n_a: usize, n_b: usize, pos_every: usize) -> (Vec<i32>, Vec<Option<bool>>) {
        let keys = (0..n_a + n_b).map(|i| if i < n_a { 10 } else { 11 }).collect();
        let target = (0..n_a + n_b).map(|i| Some(i % pos_every == 0)).collect();
        (keys, target)
    }

    #[test]
    fn fractions_of_two_windows() {
        let (keys, target) = two_windows(800, 200, 3);
        let s = split_out_of_time(&keys, &target, &SplitPlan::default()).unwrap();
        assert_eq!(s.train.len(), 800);
        assert_eq!(s.test.len(), 200);
        assert!(s.train.iter().all(|&i| keys[i] == 10));
        assert!(s.test.iter().all(|&i| keys[i] == 11));
        assert_eq!((s.train_window, s.test_window), (10, 11));
    }

    #[test]
    fn one_window_is_an_error() {
        let keys = vec![5; 10];
        let target: Vec<_> = (0..10).map(|i| Some(i % 2 == 0)).collect();
        let err = split_out_of_time(&keys, &target, &SplitPlan::default()).unwrap_err();
        assert_eq!(err.to_string(), "no later window");
    }

    #[test]
    fn stratification_keeps_ratio() {
        // 30% positives in each window, 2000 rows per window
        let keys: Vec<i32> = (0..4000).map(|i| if i < 2000 { 0 } else { 1 }).collect();
        let target: Vec<_> = (0..4000).map(|i| Some(i % 10 < 3)).collect();
        let s = split_out_of_time(&keys, &target, &SplitPlan::default()).unwrap();
        let pos = |rows: &[usize]| rows.iter().filter(|&&i| target[i] == Some(true)).count();
        assert_eq!(s.train.len(), 2000);
        assert!((pos(&s.train) as i64 - 600).abs() <= 1);
        assert_eq!(s.test.len(), 800);
        assert!((pos(&s.test) as i64 - 240).abs() <= 1);
    }

    #[test]
    fn single_class_window_is_an_error() {
        let keys: Vec<i32> = (0..20).map(|i| if i < 10 { 0 } else { 1 }).collect();
        let target: Vec<_> = (0..20).map(|i| Some(i < 10 && i % 2 == 0)).collect();
        assert!(matches!(split_out_of_time(&keys, &target, &SplitPlan::default()), Err(Error::SingleClass(_))));
    }

    #[test]
    fn balancing() {
        let target: Vec<_> = (0..1000).map(|i| Some(i < 300)).collect();
        let rows: Vec<usize> = (0..1000).collect();
        let b = balance_training(&rows, &target, 4).unwrap();
        assert_eq!(b.len(), 600);
        assert_eq!(b.iter().filter(|&&i| target[i] == Some(true)).count(), 300);
        assert_eq!(b, balance_training(&rows, &target, 4).unwrap());
        let even: Vec<_> = (0..1000).map(|i| Some(i % 2 == 0)).collect();
        assert_eq!(balance_training(&rows, &even, 4).unwrap(), rows);
    }
}
