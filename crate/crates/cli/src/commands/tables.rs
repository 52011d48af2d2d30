//! Class lists behind the tabular outputs.

use fst_core::{DayGrid, IntervalClass};

/// A table row: one class, or contiguous intraday intervals whose results
/// are averaged.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    pub label: String,
    pub members: Vec<IntervalClass>,
}

impl ClassGroup {
    fn single(class: IntervalClass) -> Self {
        Self {
            label: class.label.clone(),
            members: vec![class],
        }
    }
}

/// Spans (minutes) of the averaged intraday rows.
const AVERAGED_SPANS: [u32; 3] = [10, 20, 38];

/// Averaged 10/20/38-min rows (those that tile the session), morning,
/// afternoon, trading day, overnight and the multiday classes that fit in
/// `n_days`.
pub fn table_groups(grid: &DayGrid, overnight: &IntervalClass, multiday: &[usize], n_days: usize) -> Vec<ClassGroup> {
    let close = grid.close_index();
    let mut groups: Vec<ClassGroup> = AVERAGED_SPANS
        .iter()
        .filter_map(|&minutes| {
            let secs = minutes * 60;
            if secs % grid.bar_spacing_secs() != 0 {
                return None;
            }
            let bars = (secs / grid.bar_spacing_secs()) as usize;
            if bars == 0 || !close.is_multiple_of(bars) {
                return None;
            }
            Some(ClassGroup {
                label: format!("{minutes}-min"),
                members: (0..close / bars).map(|j| IntervalClass::intraday(j * bars, (j + 1) * bars)).collect(),
            })
        })
        .collect();
    groups.push(ClassGroup::single(IntervalClass::morning(grid)));
    groups.push(ClassGroup::single(IntervalClass::afternoon(grid)));
    groups.push(ClassGroup::single(IntervalClass::trading_day(grid)));
    groups.push(ClassGroup::single(overnight.clone()));
    groups.extend(
        multiday
            .iter()
            .filter(|&&k| k >= 1 && k < n_days)
            .map(|&k| ClassGroup::single(IntervalClass::multiday(k))),
    );
    groups
}

pub(crate) fn average(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sp500_groups() {
        let g = DayGrid::sp500_minute();
        let groups = table_groups(&g, &IntervalClass::overnight(), &[2, 3, 5, 10], 100);
        let labels: Vec<&str> = groups.iter().map(|g| g.label.as_str()).collect();
        assert_eq!(
            labels,
            ["10-min", "20-min", "38-min", "morning", "afternoon", "trading day", "overnights", "2 days", "3 days", "5 days", "10 days"]
        );
        assert_eq!(groups[0].members.len(), 38);
        assert_eq!(groups[1].members.len(), 19);
        assert_eq!(groups[2].members.len(), 10);
        assert_eq!(table_groups(&g, &IntervalClass::overnight(), &[2, 3, 5, 10], 4).len(), 9);
    }
}
