//! Charts: cohort curves, clusters, memberships, scree and score scatter.

use fdaclust_core::curve::SampledCurve;
use fdaclust_core::eval::ContingencyTable;
use fdaclust_core::fpca::ScoreMatrix;

use crate::svg::{color, padded_range, Panel, Svg};

const MARGIN_L: f64 = 60.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

fn curve_panel(curves: &[&SampledCurve], x: f64, w: f64, h: f64) -> Panel {
    let xlim = padded_range(curves.iter().flat_map(|c| c.times().iter().copied()));
    let ylim = padded_range(curves.iter().flat_map(|c| c.values().iter().copied()));
    Panel {
        x,
        y: MARGIN_T,
        w,
        h,
        xlim,
        ylim,
    }
}

fn draw_curve(svg: &mut Svg, p: &Panel, c: &SampledCurve, stroke: &str, width: f64, opacity: f64) {
    let pts: Vec<(f64, f64)> = c.times().iter().zip(c.values()).map(|(&t, &v)| p.map(t, v)).collect();
    svg.path(&pts, stroke, width, opacity);
}

/// Every curve of a cohort in one panel.
pub fn spaghetti(curves: &[SampledCurve], title: &str) -> String {
    let (w, h) = (640.0, 400.0);
    let mut svg = Svg::new(w, h);
    let refs: Vec<&SampledCurve> = curves.iter().collect();
    let p = curve_panel(&refs, MARGIN_L, w - MARGIN_L - 20.0, h - MARGIN_T - MARGIN_B);
    p.axes(&mut svg, title, "time", "value", true);
    for (i, c) in curves.iter().enumerate() {
        draw_curve(&mut svg, &p, c, color(i), 1.0, 0.7);
    }
    svg.finish()
}

/// One panel per cluster: members in the cluster colour, pointwise mean in black.
pub fn clusters(curves: &[SampledCurve], labels: &[usize], k: usize, names: &[String]) -> String {
    let panel_w = 220.0;
    let h = 300.0;
    let w = MARGIN_L + k as f64 * (panel_w + 20.0);
    let mut svg = Svg::new(w, h);
    let all: Vec<&SampledCurve> = curves.iter().collect();
    let shared = curve_panel(&all, 0.0, panel_w, h - MARGIN_T - MARGIN_B);
    for c in 0..k {
        let p = Panel {
            x: MARGIN_L + c as f64 * (panel_w + 20.0),
            ..shared
        };
        let members: Vec<&SampledCurve> = curves.iter().zip(labels).filter(|(_, &l)| l == c).map(|(cv, _)| cv).collect();
        let title = names.get(c).cloned().unwrap_or_else(|| format!("cluster {}", c + 1));
        p.axes(&mut svg, &format!("{title} (n = {})", members.len()), "time", if c == 0 { "value" } else { "" }, true);
        for m in &members {
            draw_curve(&mut svg, &p, m, color(c), 1.0, 0.5);
        }
        if let Some(first) = members.first() {
            if members.iter().all(|m| m.times() == first.times()) {
                let mean: Vec<(f64, f64)> = first
                    .times()
                    .iter()
                    .enumerate()
                    .map(|(j, &t)| p.map(t, members.iter().map(|m| m.values()[j]).sum::<f64>() / members.len() as f64))
                    .collect();
                svg.path(&mean, "#000000", 2.0, 1.0);
            }
        }
    }
    svg.finish()
}

/// Stacked membership bars, items grouped by their strongest cluster.
pub fn memberships(ids: &[String], u: &[Vec<f64>]) -> String {
    let k = u.first().map_or(0, Vec::len);
    let bar = 6.0;
    let w = MARGIN_L + 20.0 + (u.len() as f64 * bar).max(200.0) + 100.0;
    let h = 320.0;
    let mut svg = Svg::new(w, h);
    let best = |r: &[f64]| {
        r.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (j, &v)| if v > b.1 { (j, v) } else { b })
    };
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, va) = best(&u[a]);
        let (cb, vb) = best(&u[b]);
        ca.cmp(&cb).then(vb.total_cmp(&va)).then(ids[a].cmp(&ids[b]))
    });
    let p = Panel {
        x: MARGIN_L,
        y: MARGIN_T,
        w: (u.len() as f64 * bar).max(200.0),
        h: h - MARGIN_T - MARGIN_B,
        xlim: (0.0, u.len().max(1) as f64),
        ylim: (0.0, 1.0),
    };
    for (slot, &i) in order.iter().enumerate() {
        let mut base = 0.0;
        for (c, &v) in u[i].iter().enumerate() {
            let (x0, y_top) = p.map(slot as f64, base + v);
            let (_, y_bot) = p.map(slot as f64, base);
            svg.rect(x0, y_top, bar * 0.9, y_bot - y_top, color(c), None);
            base += v;
        }
    }
    p.axes(&mut svg, "membership degrees", "items", "membership", true);
    for c in 0..k {
        let y = MARGIN_T + 14.0 * c as f64;
        let x = p.x + p.w + 15.0;
        svg.rect(x, y, 10.0, 10.0, color(c), None);
        svg.text((x + 14.0, y + 9.0), 10.0, "start", &format!("cluster {}", c + 1));
    }
    svg.finish()
}

/// Explained-variance bars with the cumulative fraction and threshold line.
pub fn scree(eigenvalues: &[f64], threshold: f64) -> String {
    let positive: Vec<f64> = eigenvalues.iter().copied().filter(|&v| v > 0.0).collect();
    let total: f64 = positive.iter().sum();
    let shown = positive.len().clamp(1, 10);
    let (w, h) = (560.0, 360.0);
    let mut svg = Svg::new(w, h);
    let p = Panel {
        x: MARGIN_L,
        y: MARGIN_T,
        w: w - MARGIN_L - 30.0,
        h: h - MARGIN_T - MARGIN_B,
        xlim: (0.5, shown as f64 + 0.5),
        ylim: (0.0, 1.0),
    };
    let mut cum = 0.0;
    let mut line = Vec::new();
    for j in 0..shown {
        let frac = if total > 0.0 { positive.get(j).copied().unwrap_or(0.0) / total } else { 0.0 };
        cum += frac;
        let x = j as f64 + 1.0;
        let (x0, top) = p.map(x - 0.35, frac);
        let (x1, bottom) = p.map(x + 0.35, 0.0);
        svg.rect(x0, top, x1 - x0, bottom - top, color(0), None);
        line.push(p.map(x, cum));
    }
    svg.path(&line, color(1), 2.0, 1.0);
    for &pt in &line {
        svg.circle(pt, 3.0, color(1));
    }
    let (a, b) = (p.map(p.xlim.0, threshold), p.map(p.xlim.1, threshold));
    svg.line(a, b, "#555555", 1.0, true);
    p.axes(&mut svg, "explained variance", "component", "fraction of variance", true);
    svg.finish()
}

/// Pairwise scatter of the leading scores, coloured by cluster when given.
pub fn score_matrix(scores: &ScoreMatrix, labels: Option<&[usize]>) -> String {
    let q = scores.q().min(6);
    let cell = 130.0;
    let side = MARGIN_L + q.max(1) as f64 * cell + 20.0;
    let mut svg = Svg::new(side, side);
    let ranges: Vec<(f64, f64)> = (0..q).map(|j| padded_range(scores.values.iter().map(|r| r[j]))).collect();
    for a in 0..q {
        for b in 0..q {
            let p = Panel {
                x: MARGIN_L + b as f64 * cell + 5.0,
                y: 20.0 + a as f64 * cell + 5.0,
                w: cell - 10.0,
                h: cell - 10.0,
                xlim: ranges[b],
                ylim: ranges[a],
            };
            p.axes(&mut svg, "", "", "", false);
            if a == b {
                svg.text((p.x + p.w / 2.0, p.y + p.h / 2.0 + 5.0), 14.0, "middle", &format!("PC{}", a + 1));
                continue;
            }
            for (i, row) in scores.values.iter().enumerate() {
                let c = labels.map_or(0, |l| l[i]);
                svg.circle(p.map(row[b], row[a]), 2.0, color(c));
            }
        }
    }
    svg.finish()
}

/// Contingency counts as a shaded grid.
pub fn contingency(table: &ContingencyTable) -> String {
    let l = table.ladder.len();
    let cell = 60.0;
    let side = 90.0 + l as f64 * cell;
    let mut svg = Svg::new(side, side);
    let max = table.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let x = 70.0 + j as f64 * cell;
            let y = 40.0 + i as f64 * cell;
            let shade = 255 - (200.0 * c as f64 / max).round() as u8;
            svg.rect(x, y, cell, cell, &format!("#{shade:02x}{shade:02x}ff"), Some("#333333"));
            svg.text((x + cell / 2.0, y + cell / 2.0 + 5.0), 13.0, "middle", &c.to_string());
        }
        svg.text((64.0, 40.0 + i as f64 * cell + cell / 2.0 + 4.0), 11.0, "end", table.ladder[i].name());
        svg.text((70.0 + i as f64 * cell + cell / 2.0, 34.0), 11.0, "middle", table.ladder[i].name());
    }
    svg.text((side / 2.0, 16.0), 12.0, "middle", "assigned (rows) by clinician grade (columns)");
    svg.finish()
}
