//! Adaptive Gauss–Legendre quadrature for scalar and vector integrands.

use std::sync::OnceLock;

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 30;

/// Nodes and weights on [-1, 1], found by Newton iteration on P_n.
fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Integrates `f` over [a, b]. The interval is first cut at `breaks` (points
/// outside (a, b) are ignored) and into `panels` equal pieces, then each piece
/// is bisected until the two halves agree with the whole to the tolerance.
/// The tolerance applies per accepted panel, not to the total.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    panels: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    let cuts = cut_points(a, b, breaks, panels);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let whole = panel(&mut f, w[0], w[1]);
        total += refine(&mut f, w[0], w[1], whole, abs_tol, rel_tol, 0);
    }
    total
}

fn refine<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: f64, abs_tol: f64, rel_tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    let halves = left + right;
    if depth >= MAX_DEPTH || (halves - whole).abs() <= abs_tol.max(rel_tol * halves.abs()) {
        return halves;
    }
    refine(f, a, mid, left, abs_tol, rel_tol, depth + 1) + refine(f, mid, b, right, abs_tol, rel_tol, depth + 1)
}

fn cut_points(a: f64, b: f64, breaks: &[f64], panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    let mut cuts: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
    cuts.extend(breaks.iter().copied().filter(|x| *x > a && *x < b));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// Vector-valued variant: `f(x, out)` fills `out` (length `dim`) with the
/// integrand components at `x`. The error test uses the largest component
/// difference, so every component is resolved to `abs_tol`.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    panels: usize,
    abs_tol: f64,
) -> Vec<f64> {
    let cuts = cut_points(a, b, breaks, panels);
    let mut scratch = vec![0.0; dim];
    let mut total = vec![0.0; dim];
    for w in cuts.windows(2) {
        let whole = panel_vec(&mut f, &mut scratch, dim, w[0], w[1]);
        let piece = refine_vec(&mut f, &mut scratch, dim, w[0], w[1], whole, abs_tol, 0);
        for (t, p) in total.iter_mut().zip(piece) {
            *t += p;
        }
    }
    total
}

fn panel_vec<F: FnMut(f64, &mut [f64])>(f: &mut F, scratch: &mut [f64], dim: usize, a: f64, b: f64) -> Vec<f64> {
    let (nodes, weights) = rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = vec![0.0; dim];
    for (x, w) in nodes.iter().zip(weights) {
        f(mid + half * x, scratch);
        for (s, v) in acc.iter_mut().zip(scratch.iter()) {
            *s += w * v;
        }
    }
    acc.iter_mut().for_each(|s| *s *= half);
    acc
}

#[allow(clippy::too_many_arguments)]
fn refine_vec<F: FnMut(f64, &mut [f64])>(
    f: &mut F,
    scratch: &mut [f64],
    dim: usize,
    a: f64,
    b: f64,
    whole: Vec<f64>,
    abs_tol: f64,
    depth: u32,
) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let left = panel_vec(f, scratch, dim, a, mid);
    let right = panel_vec(f, scratch, dim, mid, b);
    let err = whole.iter().zip(left.iter().zip(&right)).map(|(w, (l, r))| (l + r - w).abs()).fold(0.0, f64::max);
    if depth >= MAX_DEPTH || err <= abs_tol {
        return left.iter().zip(&right).map(|(l, r)| l + r).collect();
    }
    let l = refine_vec(f, scratch, dim, a, mid, left, abs_tol, depth + 1);
    let r = refine_vec(f, scratch, dim, mid, b, right, abs_tol, depth + 1);
    l.iter().zip(&r).map(|(x, y)| x + y).collect()
}
