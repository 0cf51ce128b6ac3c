//! Static SVG figures: similarity heatmaps and a labelled scatter plot.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{CliError, Result};

const HEATMAP_SIZE: f64 = 600.0;

/// Grey level for a value in [0, 1]: 0 is white, 1 is black.
pub fn grey(value: f64) -> u8 {
    (255.0 * (1.0 - value.clamp(0.0, 1.0))).round() as u8
}

/// Point order that groups rows by modal cluster, keeping the original
/// order within each cluster.
pub fn order_by_cluster(labels: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by_key(|&i| labels[i]);
    order
}

/// Renders an N×N matrix as one rect per cell. Cell `(i, j)` of the figure
/// shows `m[order[i], order[j]]`; without an order rows keep their place.
pub fn heatmap(m: &Array2<f64>, order: Option<&[usize]>) -> Result<String> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(CliError::Config(format!(
            "heatmap needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if let Some(o) = order {
        let mut seen = vec![false; n];
        if o.len() != n
            || o.iter()
                .any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
        {
            return Err(CliError::Config(
                "heatmap order is not a permutation".into(),
            ));
        }
    }
    if let Some(v) = m.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(CliError::Config(format!(
            "heatmap value {v} lies outside [0, 1]"
        )));
    }
    let idx = |i: usize| order.map_or(i, |o| o[i]);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{HEATMAP_SIZE}" height="{HEATMAP_SIZE}" viewBox="0 0 {n} {n}" shape-rendering="crispEdges">"#
    )
    .unwrap();
    for i in 0..n {
        for j in 0..n {
            let g = grey(m[[idx(i), idx(j)]]);
            writeln!(
                out,
                r##"<rect x="{j}" y="{i}" width="1" height="1" fill="#{g:02x}{g:02x}{g:02x}"/>"##
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const PANEL: f64 = 400.0;
const MARGIN: f64 = 20.0;

/// Scatter plot coloured by label: one panel for two features, the three
/// pairwise panels for three. Point opacity is `1 − uncertainty`.
pub fn scatter(x: &Array2<f64>, labels: &[usize], uncertainty: &[f64]) -> Option<String> {
    let pairs: &[(usize, usize)] = match x.ncols() {
        2 => &[(0, 1)],
        3 => &[(0, 1), (0, 2), (1, 2)],
        _ => return None,
    };
    let width = pairs.len() as f64 * (PANEL + MARGIN) + MARGIN;
    let height = PANEL + 2.0 * MARGIN;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">"#
    )
    .unwrap();
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let left = MARGIN + p as f64 * (PANEL + MARGIN);
        let (lo_a, hi_a) = range(x.column(a).iter());
        let (lo_b, hi_b) = range(x.column(b).iter());
        writeln!(
            out,
            r#"<g><rect x="{left}" y="{MARGIN}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">x{} vs x{}</text>"#,
            left + PANEL / 2.0,
            MARGIN - 6.0,
            a + 1,
            b + 1
        )
        .unwrap();
        for i in 0..x.nrows() {
            let cx = left + 5.0 + (PANEL - 10.0) * (x[[i, a]] - lo_a) / (hi_a - lo_a);
            let cy = MARGIN + PANEL - 5.0 - (PANEL - 10.0) * (x[[i, b]] - lo_b) / (hi_b - lo_b);
            let colour = PALETTE[labels[i] % PALETTE.len()];
            let opacity = 1.0 - uncertainty.get(i).copied().unwrap_or(0.0);
            writeln!(
                out,
                r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="3" fill="{colour}" fill-opacity="{opacity:.3}"/>"#
            )
            .unwrap();
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn range<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fills(svg: &str) -> Vec<&str> {
        svg.match_indices("fill=\"#")
            .map(|(i, _)| &svg[i + 7..i + 13])
            .collect()
    }

    #[test]
    fn identity_has_black_diagonal() {
        let svg = heatmap(&array![[1.0, 0.0], [0.0, 1.0]], None).unwrap();
        assert_eq!(fills(&svg), vec!["000000", "ffffff", "ffffff", "000000"]);
    }

    #[test]
    fn all_ones_is_uniformly_black() {
        let svg = heatmap(&Array2::ones((3, 3)), None).unwrap();
        assert_eq!(svg.matches("<rect").count(), 9);
        assert!(fills(&svg).iter().all(|&f| f == "000000"));
    }

    #[test]
    fn half_is_mid_grey() {
        let svg = heatmap(&array![[1.0, 0.5], [0.5, 1.0]], None).unwrap();
        assert_eq!(fills(&svg)[1], "808080");
    }

    #[test]
    fn reordering_moves_cells() {
        let m = array![[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]];
        let order = order_by_cluster(&[0, 1, 0]);
        assert_eq!(order, vec![0, 2, 1]);
        let svg = heatmap(&m, Some(&order)).unwrap();
        assert_eq!(fills(&svg)[..3], ["000000", "000000", "ffffff"]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(heatmap(&array![[1.0, 2.0], [0.0, 1.0]], None).is_err());
        assert!(heatmap(&Array2::ones((2, 3)), None).is_err());
        assert!(heatmap(&Array2::ones((2, 2)), Some(&[0, 0])).is_err());
    }

    #[test]
    fn scatter_only_for_low_dimensions() {
        let x = array![[0.0, 1.0], [1.0, 0.0]];
        let svg = scatter(&x, &[0, 1], &[0.0, 0.5]).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(scatter(&Array2::zeros((2, 4)), &[0, 0], &[]).is_none());
        let x3 = Array2::zeros((2, 3));
        assert_eq!(
            scatter(&x3, &[0, 0], &[])
                .unwrap()
                .matches("<circle")
                .count(),
            6
        );
    }
}
