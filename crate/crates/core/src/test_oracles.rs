//! Independent numerical oracles used only by unit tests: a tensor-product
//! Gauss rule on the triangle via the Duffy transform, and a dense
//! partial-pivoting solver. Deliberately separate from the production
//! quadrature tables and sparse LU.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor-product rule on the reference triangle via the Duffy transform
/// x = u, y = v(1−u); exact for total degree ≤ 2·n1d − 2.
pub(crate) fn duffy_rule(n1d: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let (nodes, weights) = gauss_legendre(n1d);
    // map [-1,1] -> [0,1]
    let map = |t: f64| 0.5 * (t + 1.0);
    let mut pts = Vec::with_capacity(n1d * n1d);
    let mut ws = Vec::with_capacity(n1d * n1d);
    for (iu, &tu) in nodes.iter().enumerate() {
        for (iv, &tv) in nodes.iter().enumerate() {
            let u = map(tu);
            let v = map(tv);
            pts.push([u, v * (1.0 - u)]);
            ws.push(0.25 * weights[iu] * weights[iv] * (1.0 - u));
        }
    }
    (pts, ws)
}

/// Dense Gaussian elimination with partial pivoting.
pub(crate) fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = a.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        assert!(a[k][k] != 0.0, "dense oracle hit a zero pivot");
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duffy_rule_integrates_monomials() {
        let fact = |m: u32| (1..=m).map(|v| v as f64).product::<f64>().max(1.0);
        let (pts, ws) = duffy_rule(8);
        for a in 0..=10u32 {
            for b in 0..=(10 - a) {
                let approx: f64 = pts
                    .iter()
                    .zip(&ws)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!(
                    (approx - exact).abs() < 1e-14,
                    "x^{a} y^{b}: {approx} vs {exact}"
                );
            }
        }
    }
}
