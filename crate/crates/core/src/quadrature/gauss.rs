use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "need at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `[a, b]` with `cells` equal cells of `m` nodes each.
pub(crate) fn composite(a: f64, b: f64, cells: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(m);
    let h = (b - a) / cells as f64;
    let mut xs = Vec::with_capacity(cells * m);
    let mut ws = Vec::with_capacity(cells * m);
    for c in 0..cells {
        let lo = a + h * c as f64;
        for (ti, wi) in t.iter().zip(&w) {
            xs.push(lo + 0.5 * h * (ti + 1.0));
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for m in 1..=20 {
            let (_, w) = gauss_legendre(m);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn exact_for_degree_2m_minus_1() {
        let m = 6;
        let (x, w) = gauss_legendre(m);
        for deg in 0..(2 * m) {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn composite_integrates_sine() {
        let (x, w) = composite(0.0, PI, 4, 8);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert!((q - 2.0).abs() < 1e-13);
    }
}
