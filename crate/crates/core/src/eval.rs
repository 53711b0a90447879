//! Grade assignment, agreement with clinician labels and cluster quality.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::curve::{AdjustedGrade, HbGrade};
use crate::error::{Error, Result};

/// Maps a raw HB grade (1..=6) onto the adjusted ladder.
pub fn adjust_hb(raw: i64) -> Result<AdjustedGrade> {
    HbGrade::from_raw(raw).map(HbGrade::adjusted)
}

/// Frequencies of raw grades 1..=6 folded onto the ladder (1, 2, 3, 6).
pub fn adjust_counts(raw_counts: [usize; 6]) -> [usize; 4] {
    let mut out = [0; 4];
    for (i, &c) in raw_counts.iter().enumerate() {
        let g = adjust_hb(i as i64 + 1).expect("1..=6 is valid");
        out[ladder_index(&AdjustedGrade::LADDER, g).expect("ladder covers all grades")] += c;
    }
    out
}

fn ladder_index(ladder: &[AdjustedGrade], g: AdjustedGrade) -> Option<usize> {
    ladder.iter().position(|&x| x == g)
}

/// Grade assigned to each cluster id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeMap {
    pub grades: Vec<AdjustedGrade>,
}

impl GradeMap {
    pub fn grade(&self, cluster: usize) -> AdjustedGrade {
        self.grades[cluster]
    }

    pub fn k(&self) -> usize {
        self.grades.len()
    }
}

/// Mean of each cluster's symmetry values over members and grid points.
pub fn cluster_mean_levels(labels: &[usize], k: usize, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    if labels.len() != rows.len() {
        return Err(Error::SizeMismatch(format!(
            "{} labels for {} curves",
            labels.len(),
            rows.len()
        )));
    }
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&l, row) in labels.iter().zip(rows) {
        if l >= k {
            return Err(Error::OutOfRange(format!("cluster {l} with k = {k}")));
        }
        sums[l] += row.iter().sum::<f64>();
        counts[l] += row.len();
    }
    if counts.contains(&0) {
        return Err(Error::InvalidParameter("a cluster has no members".into()));
    }
    Ok(sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect())
}

/// Clusters ranked by mean level, highest first, receive the ladder in order.
pub fn grades_from_levels(levels: &[f64], ladder: &[AdjustedGrade]) -> Result<GradeMap> {
    if levels.len() != ladder.len() {
        return Err(Error::UnsupportedGradeCount {
            k: levels.len(),
            ladder: ladder.len(),
        });
    }
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[b].total_cmp(&levels[a]).then(a.cmp(&b)));
    let mut grades = vec![ladder[0]; levels.len()];
    for (rank, &c) in order.iter().enumerate() {
        grades[c] = ladder[rank];
    }
    Ok(GradeMap { grades })
}

/// Grade map from cluster labels and the cohort's symmetry curves on the grid.
pub fn assign_grades(
    labels: &[usize],
    k: usize,
    rows: &[Vec<f64>],
    ladder: &[AdjustedGrade],
) -> Result<GradeMap> {
    if k != ladder.len() {
        return Err(Error::UnsupportedGradeCount {
            k,
            ladder: ladder.len(),
        });
    }
    grades_from_levels(&cluster_mean_levels(labels, k, rows)?, ladder)
}

/// Counts of (assigned grade, clinician grade) pairs over a ladder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub ladder: Vec<AdjustedGrade>,
    /// `counts[assigned][label]`, both indexed along the ladder.
    pub counts: Vec<Vec<usize>>,
}

impl ContingencyTable {
    pub fn new(ladder: Vec<AdjustedGrade>, counts: Vec<Vec<usize>>) -> Result<Self> {
        let l = ladder.len();
        if l == 0 || counts.len() != l || counts.iter().any(|r| r.len() != l) {
            return Err(Error::SizeMismatch(format!("contingency table must be {l} x {l}")));
        }
        Ok(Self { ladder, counts })
    }

    /// Table over the standard ladder (1, 2, 3, 6).
    pub fn standard(counts: [[usize; 4]; 4]) -> Self {
        Self {
            ladder: AdjustedGrade::LADDER.to_vec(),
            counts: counts.iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    fn agreeing(&self, max_gap: usize) -> Result<f64> {
        let n = self.total();
        if n == 0 {
            return Err(Error::InsufficientData("contingency table is empty".into()));
        }
        let hits: usize = self
            .counts
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (i, j, c)))
            .filter(|&(i, j, _)| i.abs_diff(j) <= max_gap)
            .map(|(_, _, c)| c)
            .sum();
        Ok(hits as f64 / n as f64)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["assigned".to_string()];
        header.extend(self.ladder.iter().map(|g| g.name().to_string()));
        w.write_record(&header)?;
        for (g, row) in self.ladder.iter().zip(&self.counts) {
            let mut rec = vec![g.name().to_string()];
            rec.extend(row.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("assigned") {
            return Err(Error::Structure("contingency CSV must start with `assigned`".into()));
        }
        let parse_grade = |s: &str| -> Result<AdjustedGrade> {
            AdjustedGrade::LADDER
                .into_iter()
                .find(|g| g.name() == s)
                .ok_or_else(|| Error::Structure(format!("unknown grade `{s}`")))
        };
        let ladder: Vec<AdjustedGrade> = header.iter().skip(1).map(parse_grade).collect::<Result<_>>()?;
        let mut counts = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if ladder.get(i) != Some(&parse_grade(&rec[0])?) {
                return Err(Error::Structure(format!(
                    "row {} must be labelled like column {}",
                    i + 1,
                    i + 1
                )));
            }
            counts.push(
                rec.iter()
                    .skip(1)
                    .map(|v| {
                        v.trim().parse::<usize>().map_err(|_| Error::Parse {
                            line,
                            message: format!("bad count `{v}`"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Self::new(ladder, counts)
    }
}

/// Cross-tabulates assigned grades against clinician grades.
pub fn contingency(
    grade_map: &GradeMap,
    labels: &[usize],
    clinician: &[HbGrade],
    ladder: &[AdjustedGrade],
) -> Result<ContingencyTable> {
    if labels.len() != clinician.len() {
        return Err(Error::MissingLabels(format!(
            "{} clinician labels for {} items",
            clinician.len(),
            labels.len()
        )));
    }
    let l = ladder.len();
    let mut counts = vec![vec![0; l]; l];
    for (&c, h) in labels.iter().zip(clinician) {
        let assigned = ladder_index(ladder, grade_map.grade(c))
            .ok_or_else(|| Error::OutOfRange(format!("grade {} not on the ladder", grade_map.grade(c))))?;
        let truth = ladder_index(ladder, h.adjusted())
            .ok_or_else(|| Error::OutOfRange(format!("grade {} not on the ladder", h.adjusted())))?;
        counts[assigned][truth] += 1;
    }
    ContingencyTable::new(ladder.to_vec(), counts)
}

/// Fraction on the diagonal.
pub fn ccr(table: &ContingencyTable) -> Result<f64> {
    table.agreeing(0)
}

/// Fraction whose assigned and clinician grades are at most one ladder step apart.
pub fn approx_ccr(table: &ContingencyTable) -> Result<f64> {
    table.agreeing(1)
}

/// Per-item silhouette widths and their mean; singletons score 0.
pub fn silhouette(labels: &[usize], k: usize, dist: &crate::cluster::DistanceMatrix) -> Result<(Vec<f64>, f64)> {
    if k < 2 {
        return Err(Error::InvalidParameter("silhouette needs at least 2 clusters".into()));
    }
    let n = labels.len();
    if dist.len() != n {
        return Err(Error::SizeMismatch(format!("{n} labels for a {} x {0} matrix", dist.len())));
    }
    let mut sizes = vec![0usize; k];
    for &l in labels {
        if l >= k {
            return Err(Error::OutOfRange(format!("cluster {l} with k = {k}")));
        }
        sizes[l] += 1;
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidParameter("silhouette needs nonempty clusters".into()));
    }
    let widths: Vec<f64> = (0..n)
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                sums[labels[j]] += dist.get(i, j);
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .collect();
    let mean = widths.iter().sum::<f64>() / n as f64;
    Ok((widths, mean))
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(format!("lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("spearman needs at least 2 pairs".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let m = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - m) * (b - m);
        sxx += (a - m) * (a - m);
        syy += (b - m) * (b - m);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// One row of the method comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub route: String,
    pub k: usize,
    pub n: usize,
    pub ccr: f64,
    pub approx_ccr: f64,
    pub silhouette: Option<f64>,
    pub grade_map: Vec<AdjustedGrade>,
    pub cluster_sizes: Vec<usize>,
    pub contingency: ContingencyTable,
}

/// Assembles a report after checking that every part describes the same items.
pub fn report(
    route: &str,
    cluster_sizes: Vec<usize>,
    grade_map: &GradeMap,
    table: &ContingencyTable,
    silhouette: Option<f64>,
) -> Result<AnalysisReport> {
    let n: usize = cluster_sizes.iter().sum();
    if !cluster_sizes.is_empty() && n != table.total() {
        return Err(Error::SizeMismatch(format!(
            "clustering has {n} items, contingency table {}",
            table.total()
        )));
    }
    if !cluster_sizes.is_empty() && cluster_sizes.len() != grade_map.k() {
        return Err(Error::SizeMismatch(format!(
            "{} clusters, {} grades",
            cluster_sizes.len(),
            grade_map.k()
        )));
    }
    Ok(AnalysisReport {
        route: route.to_string(),
        k: grade_map.k(),
        n: table.total(),
        ccr: ccr(table)?,
        approx_ccr: approx_ccr(table)?,
        silhouette,
        grade_map: grade_map.grades.clone(),
        cluster_sizes,
        contingency: table.clone(),
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Plain-text comparison table: method, CCR, approximate CCR, silhouette.
pub fn text_table(reports: &[AnalysisReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<14} {:>8} {:>12} {:>12}", "method", "CCR", "approx CCR", "silhouette");
    for r in reports {
        let sil = r.silhouette.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(s, "{:<14} {:>8.4} {:>12.4} {:>12}", r.route, r.ccr, r.approx_ccr, sil);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::DistanceMatrix;
    use proptest::prelude::*;

    const TS: [[usize; 4]; 4] = [[33, 16, 8, 0], [21, 3, 6, 2], [2, 1, 6, 8], [1, 0, 3, 10]];

    #[test]
    fn hb_adjustment() {
        assert_eq!(adjust_hb(1).unwrap(), AdjustedGrade::Hb1);
        assert_eq!(adjust_hb(4).unwrap(), AdjustedGrade::Hb3);
        assert_eq!(adjust_hb(5).unwrap(), AdjustedGrade::Hb6);
        assert!(matches!(adjust_hb(0), Err(Error::InvalidGrade(0))));
        assert!(adjust_hb(7).is_err());
        assert_eq!(adjust_counts([57, 20, 18, 5, 5, 15]), [57, 20, 23, 20]);
    }

    #[test]
    fn grades_follow_symmetry_level() {
        let g = grades_from_levels(&[0.95, 0.9, 0.7, 0.5], &AdjustedGrade::LADDER).unwrap();
        assert_eq!(g.grades, AdjustedGrade::LADDER.to_vec());
        let g = grades_from_levels(&[0.5, 0.7, 0.9, 0.95], &AdjustedGrade::LADDER).unwrap();
        assert_eq!(
            g.grades,
            vec![AdjustedGrade::Hb6, AdjustedGrade::Hb3, AdjustedGrade::Hb2, AdjustedGrade::Hb1]
        );
        assert!(matches!(
            grades_from_levels(&[0.9, 0.5, 0.1], &AdjustedGrade::LADDER),
            Err(Error::UnsupportedGradeCount { k: 3, ladder: 4 })
        ));
        let short = [AdjustedGrade::Hb1, AdjustedGrade::Hb6];
        assert_eq!(grades_from_levels(&[0.2, 0.9], &short).unwrap().grades, vec![AdjustedGrade::Hb6, AdjustedGrade::Hb1]);
    }

    #[test]
    fn cluster_levels_average_members_and_grid() {
        let rows = vec![vec![1.0, 0.8], vec![0.5, 0.5], vec![0.9, 0.9]];
        let lv = cluster_mean_levels(&[0, 1, 0], 2, &rows).unwrap();
        assert!((lv[0] - 0.9).abs() < 1e-15 && lv[1] == 0.5);
    }

    #[test]
    fn table_six_metrics() {
        let t = ContingencyTable::standard(TS);
        assert_eq!(t.total(), 120);
        assert_eq!(ccr(&t).unwrap(), 52.0 / 120.0);
        assert_eq!(approx_ccr(&t).unwrap(), 107.0 / 120.0);
    }

    #[test]
    fn extreme_tables() {
        let mut diag = [[0; 4]; 4];
        for (i, row) in diag.iter_mut().enumerate() {
            row[i] = 5;
        }
        let t = ContingencyTable::standard(diag);
        assert_eq!(ccr(&t).unwrap(), 1.0);
        assert_eq!(approx_ccr(&t).unwrap(), 1.0);
        let mut worst = [[0; 4]; 4];
        worst[0][3] = 9;
        let t = ContingencyTable::standard(worst);
        assert_eq!(approx_ccr(&t).unwrap(), 0.0);
        assert!(ccr(&ContingencyTable::standard([[0; 4]; 4])).is_err());
    }

    #[test]
    fn contingency_from_labels() {
        let gm = GradeMap {
            grades: AdjustedGrade::LADDER.to_vec(),
        };
        let hb = |r| HbGrade::from_raw(r).unwrap();
        let t = contingency(&gm, &[0, 1, 2, 3], &[hb(1), hb(2), hb(4), hb(5)], &AdjustedGrade::LADDER).unwrap();
        assert_eq!(ccr(&t).unwrap(), 1.0);
        let t = contingency(&gm, &[2], &[hb(6)], &AdjustedGrade::LADDER).unwrap();
        assert_eq!(t.counts[2][3], 1);
        assert_eq!(t.total(), 1);
        assert!(matches!(
            contingency(&gm, &[0, 1], &[hb(1)], &AdjustedGrade::LADDER),
            Err(Error::MissingLabels(_))
        ));
    }

    #[test]
    fn contingency_csv_round_trip() {
        let t = ContingencyTable::standard(TS);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("assigned,HB1,HB2,HB3,HB6\nHB1,33,16,8,0\n"));
        assert_eq!(ContingencyTable::read_csv(buf.as_slice()).unwrap(), t);
    }

    fn line(xs: &[f64]) -> DistanceMatrix {
        DistanceMatrix::euclidean(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn silhouette_hand_worked() {
        let d = line(&[0.0, 1.0, 3.0, 7.0, 10.0]);
        let (w, mean) = silhouette(&[0, 0, 0, 1, 1], 2, &d).unwrap();
        let want = [6.5 / 8.5, 0.8, 3.0 / 5.5, 8.0 / 17.0, 17.0 / 26.0];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{w:?}");
        }
        assert!((mean - want.iter().sum::<f64>() / 5.0).abs() < 1e-15);
    }

    #[test]
    fn silhouette_edge_cases() {
        let d = line(&[0.0, 0.1, 100.0, 100.1]);
        assert!(silhouette(&[0, 0, 1, 1], 2, &d).unwrap().1 > 0.9);
        let same = line(&[5.0; 4]);
        let (w, _) = silhouette(&[0, 0, 1, 1], 2, &same).unwrap();
        assert!(w.iter().all(|&s| s <= 0.0));
        let (w, _) = silhouette(&[0, 1, 1], 2, &line(&[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(w[0], 0.0);
        assert!(silhouette(&[0, 0], 1, &line(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        assert_eq!(spearman(&x, &y).unwrap(), 1.0);
        let r: Vec<f64> = x.iter().map(|v| -v * v * v).collect();
        assert_eq!(spearman(&x, &r).unwrap(), -1.0);
        // ranks (1, 2.5, 2.5, 4) and (1, 2, 3.5, 3.5): 3.75 / 4.5
        let rho = spearman(&[1.0, 2.0, 2.0, 4.0], &[10.0, 20.0, 30.0, 30.0]).unwrap();
        assert!((rho - 3.75 / 4.5).abs() < 1e-15);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::UndefinedCorrelation)));
    }

    #[test]
    fn report_json_round_trip() {
        let t = ContingencyTable::standard(TS);
        let gm = GradeMap {
            grades: AdjustedGrade::LADDER.to_vec(),
        };
        let r = report("ts-dtw", vec![57, 32, 17, 14], &gm, &t, Some(0.41)).unwrap();
        assert_eq!(format!("{:.4}", r.ccr), "0.4333");
        assert_eq!(AnalysisReport::from_json(&r.to_json().unwrap()).unwrap(), r);
        assert!(text_table(std::slice::from_ref(&r)).contains("0.4333"));
        assert!(report("x", vec![1, 2, 3, 4], &gm, &t, None).is_err());
    }

    fn table() -> impl Strategy<Value = [[usize; 4]; 4]> {
        prop::array::uniform4(prop::array::uniform4(0usize..20))
    }

    proptest! {
        #[test]
        fn approx_dominates_exact(t in table()) {
            let t = ContingencyTable::standard(t);
            prop_assume!(t.total() > 0);
            prop_assert!(approx_ccr(&t).unwrap() >= ccr(&t).unwrap());
        }

        #[test]
        fn reversal_of_ladder_preserves_metrics(t in table()) {
            let t = ContingencyTable::standard(t);
            prop_assume!(t.total() > 0);
            // reversing the ladder maps index distance onto itself
            let rev: Vec<Vec<usize>> = t.counts.iter().rev().map(|r| r.iter().rev().copied().collect()).collect();
            let mut ladder = t.ladder.clone();
            ladder.reverse();
            let r = ContingencyTable::new(ladder, rev).unwrap();
            prop_assert_eq!(ccr(&t).unwrap(), ccr(&r).unwrap());
            prop_assert_eq!(approx_ccr(&t).unwrap(), approx_ccr(&r).unwrap());
        }

        #[test]
        fn diagonal_permutation_preserves_ccr(t in table(), perm in Just([2usize, 0, 3, 1])) {
            let t = ContingencyTable::standard(t);
            prop_assume!(t.total() > 0);
            let p: Vec<Vec<usize>> = (0..4).map(|i| (0..4).map(|j| t.counts[perm[i]][perm[j]]).collect()).collect();
            let ladder = perm.iter().map(|&i| t.ladder[i]).collect();
            prop_assert_eq!(ccr(&t).unwrap(), ccr(&ContingencyTable::new(ladder, p).unwrap()).unwrap());
        }

        #[test]
        fn silhouette_bounded(xs in prop::collection::vec(-10.0f64..10.0, 4..20), seed in any::<u64>()) {
            let n = xs.len();
            let labels: Vec<usize> = (0..n).map(|i| ((seed >> (i % 60)) as usize + i) % 3).collect();
            prop_assume!((0..3).all(|c| labels.contains(&c)));
            let (w, mean) = silhouette(&labels, 3, &line(&xs)).unwrap();
            prop_assert!(w.iter().all(|s| (-1.0..=1.0).contains(s)));
            prop_assert!((mean - w.iter().sum::<f64>() / n as f64).abs() < 1e-15);
        }

        #[test]
        fn spearman_monotone_invariance(
            pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30)
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assume!(x.iter().any(|v| *v != x[0]) && y.iter().any(|v| *v != y[0]));
            let a = spearman(&x, &y).unwrap();
            let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| 3.0 * v + 1.0).collect();
            prop_assert!((a - spearman(&tx, &ty).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }
}
