//! Small numerical kernels shared by the modules: finite-difference weights,
//! quadrature rules, sphere areas.

use std::f64::consts::PI;

/// Finite-difference weights at `x0` for the given nodes, for derivatives
/// `0..=max_deriv` (Fornberg's recursion). Row `d` holds the weights of the
/// d-th derivative.
pub fn fd_weights(x0: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Start of a window of `width` consecutive indices in `0..len` that is as
/// centred on `i` as the ends allow.
pub fn window_start(i: usize, width: usize, len: usize) -> usize {
    if len <= width {
        return 0;
    }
    let half = width / 2;
    i.saturating_sub(half).min(len - width)
}

/// Area of the unit sphere S^k.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature weights on a uniform grid of `len` samples with spacing `h`.
/// Open grids use the fourth-order Gregory end correction when there are
/// enough samples; periodic grids (last sample repeating the first) use the
/// plain periodic trapezoid over the distinct samples.
pub fn gregory_weights(len: usize, h: f64, periodic: bool) -> Vec<f64> {
    if periodic {
        let mut w = vec![h; len];
        if let Some(last) = w.last_mut() {
            *last = 0.0;
        }
        return w;
    }
    if len < 8 {
        return trapezoid_weights(len, h);
    }
    let mut w = vec![h; len];
    let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    for (j, e) in ends.iter().enumerate() {
        w[j] = e * h;
        w[len - 1 - j] = e * h;
    }
    w
}

pub fn trapezoid_weights(len: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; len];
    if len > 0 {
        w[0] = 0.5 * h;
        w[len - 1] = 0.5 * h;
    }
    if len == 1 {
        w[0] = 0.0;
    }
    w
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Wrap an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_weights_centred_five_point() {
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let c = fd_weights(0.0, &nodes, 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in c[1].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((c[0][2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fd_weights_midpoint_interpolation() {
        let nodes = [-1.0, 0.0, 1.0, 2.0];
        let c = fd_weights(0.5, &nodes, 1);
        let expect = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
        for (a, b) in c[0].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let expect_d = [1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0];
        for (a, b) in c[1].iter().zip(expect_d) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gregory_is_exact_for_cubics() {
        let len = 21;
        let h = 0.1;
        let w = gregory_weights(len, h, false);
        let s: f64 = (0..len)
            .map(|i| {
                let x = i as f64 * h;
                w[i] * x * x * x
            })
            .sum();
        assert!((s - 4.0).abs() < 1e-13);
    }

    #[test]
    fn window_is_clamped() {
        assert_eq!(window_start(0, 5, 10), 0);
        assert_eq!(window_start(5, 5, 10), 3);
        assert_eq!(window_start(9, 5, 10), 5);
        assert_eq!(window_start(1, 5, 3), 0);
    }
}
