//! Brute-force reference implementations, deliberately written without any
//! of the library's helpers. Sums of squares go through the pairwise
//! identity `Σ_i ‖x_i − c‖² = Σ_{i<j} ‖x_i − x_j‖² / n` rather than through
//! centroids.
#![allow(dead_code, clippy::needless_range_loop)]

pub type Points = Vec<Vec<f64>>;

fn sq(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for d in 0..a.len() {
        s += (a[d] - b[d]) * (a[d] - b[d]);
    }
    s
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq(a, b).sqrt()
}

fn clusters(labels: &[usize]) -> Vec<usize> {
    let mut c: Vec<usize> = labels.to_vec();
    c.sort();
    c.dedup();
    c
}

fn size(labels: &[usize], c: usize) -> usize {
    labels.iter().filter(|&&l| l == c).count()
}

fn centroid(x: &Points, labels: &[usize], c: usize) -> Vec<f64> {
    let mut m = vec![0.0; x[0].len()];
    let mut count = 0.0;
    for i in 0..x.len() {
        if labels[i] == c {
            for d in 0..m.len() {
                m[d] += x[i][d];
            }
            count += 1.0;
        }
    }
    m.iter().map(|v| v / count).collect()
}

fn within_ss(x: &Points, labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for c in clusters(labels) {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                if labels[i] == c && labels[j] == c {
                    s += sq(&x[i], &x[j]);
                }
            }
        }
        total += s / size(labels, c) as f64;
    }
    total
}

fn total_ss(x: &Points) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            s += sq(&x[i], &x[j]);
        }
    }
    s / x.len() as f64
}

pub fn similarity(probs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = probs.len();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                s[i][j] = 1.0;
            } else {
                s[i][j] = probs[i].iter().zip(&probs[j]).map(|(a, b)| a * b).sum();
            }
        }
    }
    s
}

pub fn ch(x: &Points, labels: &[usize]) -> f64 {
    let n = x.len() as f64;
    let k = clusters(labels).len() as f64;
    let within = within_ss(x, labels);
    let between = total_ss(x) - within;
    (between / (k - 1.0)) / (within / (n - k))
}

pub fn xb(x: &Points, labels: &[usize]) -> f64 {
    let cs = clusters(labels);
    let mut min = f64::INFINITY;
    for a in 0..cs.len() {
        for b in 0..cs.len() {
            if a != b {
                min = min.min(sq(&centroid(x, labels, cs[a]), &centroid(x, labels, cs[b])));
            }
        }
    }
    within_ss(x, labels) / (x.len() as f64 * min)
}

pub fn dunn(x: &Points, labels: &[usize]) -> f64 {
    let mut min_between = f64::INFINITY;
    let mut max_within = 0.0_f64;
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i == j {
                continue;
            }
            if labels[i] == labels[j] {
                max_within = max_within.max(dist(&x[i], &x[j]));
            } else {
                min_between = min_between.min(dist(&x[i], &x[j]));
            }
        }
    }
    min_between / max_within
}

pub fn silhouette(x: &Points, labels: &[usize]) -> f64 {
    let cs = clusters(labels);
    let mut total = 0.0;
    for i in 0..x.len() {
        if size(labels, labels[i]) == 1 {
            continue;
        }
        let mut a = 0.0;
        for j in 0..x.len() {
            if j != i && labels[j] == labels[i] {
                a += dist(&x[i], &x[j]);
            }
        }
        a /= (size(labels, labels[i]) - 1) as f64;
        let mut b = f64::INFINITY;
        for &c in &cs {
            if c == labels[i] {
                continue;
            }
            let mut s = 0.0;
            for j in 0..x.len() {
                if labels[j] == c {
                    s += dist(&x[i], &x[j]);
                }
            }
            b = b.min(s / size(labels, c) as f64);
        }
        total += (b - a) / a.max(b);
    }
    total / x.len() as f64
}

pub fn davies_bouldin(x: &Points, labels: &[usize]) -> f64 {
    let cs = clusters(labels);
    let spread = |c: usize| {
        let m = centroid(x, labels, c);
        let mut s = 0.0;
        for i in 0..x.len() {
            if labels[i] == c {
                s += dist(&x[i], &m);
            }
        }
        s / size(labels, c) as f64
    };
    let mut total = 0.0;
    for &a in &cs {
        let mut worst = 0.0_f64;
        for &b in &cs {
            if a != b {
                let r = (spread(a) + spread(b))
                    / dist(&centroid(x, labels, a), &centroid(x, labels, b));
                worst = worst.max(r);
            }
        }
        total += worst;
    }
    total / cs.len() as f64
}

/// `Σ_i Σ_d ln N(x_id | mean_d, var_d)` at the per-dimension sample mean and
/// (biased) sample variance.
pub fn single_gaussian_loglik(x: &Points) -> f64 {
    let n = x.len() as f64;
    let mut total = 0.0;
    for d in 0..x[0].len() {
        let mean = x.iter().map(|r| r[d]).sum::<f64>() / n;
        let var = x.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / n;
        for r in x {
            total += -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                - (r[d] - mean).powi(2) / (2.0 * var);
        }
    }
    total
}

/// Equal within `tol`, scaled by the magnitude once it exceeds one.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
