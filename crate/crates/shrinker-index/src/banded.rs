//! Symmetric tridiagonal matrices, optionally with a cyclic corner entry,
//! and the two kernels the eigensolver needs: inertia counts of A − σM and
//! solves with A − σM (M diagonal).

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// off[i] couples rows i and i+1.
    pub off: Vec<f64>,
    /// Coupling between row 0 and row N−1 for periodic operators.
    pub corner: Option<f64>,
}

fn pivot_floor(scale: f64) -> f64 {
    (f64::EPSILON * scale).max(f64::MIN_POSITIVE / f64::EPSILON)
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(a, b)| a * b).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        if let Some(c) = self.corner {
            y[0] += c * x[n - 1];
            y[n - 1] += c * x[0];
        }
        y
    }

    /// xᵀ A y.
    /// xᵀAy, evaluated term by term so that swapping x and y is bit-exact.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.len();
        let mut sum = 0.0;
        for i in 0..n {
            sum += self.diag[i] * (x[i] * y[i]);
            if i + 1 < n {
                sum += self.off[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
            }
        }
        if let Some(c) = self.corner {
            sum += c * (x[0] * y[n - 1] + x[n - 1] * y[0]);
        }
        sum
    }

    fn shifted_diag(&self, sigma: f64, mass: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(mass).map(|(a, m)| a - sigma * m).collect()
    }

    fn row_scale(&self, d: &[f64], i: usize) -> f64 {
        let n = self.len();
        let mut s = d[i].abs();
        if i > 0 {
            s += self.off[i - 1].abs();
        }
        if i + 1 < n {
            s += self.off[i].abs();
        }
        s
    }

    /// Number of negative eigenvalues of A − σM (Sylvester inertia of an
    /// LDLᵀ factorization; bordered elimination for the cyclic case).
    pub fn negative_count(&self, sigma: f64, mass: &[f64]) -> usize {
        let n = self.len();
        let a = self.shifted_diag(sigma, mass);
        let guard = |v: f64, i: usize| {
            let floor = pivot_floor(self.row_scale(&a, i));
            if v.abs() < floor {
                -floor
            } else {
                v
            }
        };
        match self.corner {
            None => {
                let mut count = 0;
                let mut d = 0.0;
                for i in 0..n {
                    d = if i == 0 {
                        a[0]
                    } else {
                        a[i] - self.off[i - 1] * self.off[i - 1] / d
                    };
                    d = guard(d, i);
                    if d < 0.0 {
                        count += 1;
                    }
                }
                count
            }
            Some(c) => {
                let last = n - 1;
                let mut count = 0;
                let mut d_prev = 0.0;
                let mut g_prev = 0.0;
                let mut schur = 0.0;
                for i in 0..last {
                    let d = if i == 0 {
                        a[0]
                    } else {
                        a[i] - self.off[i - 1] * self.off[i - 1] / d_prev
                    };
                    let d = guard(d, i);
                    let mut e = 0.0;
                    if i == 0 {
                        e += c;
                    }
                    if i + 1 == last {
                        e += self.off[last - 1];
                    }
                    let g = if i == 0 {
                        e
                    } else {
                        e - self.off[i - 1] / d_prev * g_prev
                    };
                    schur += g * g / d;
                    if d < 0.0 {
                        count += 1;
                    }
                    d_prev = d;
                    g_prev = g;
                }
                let fin = guard(a[last] - schur, last);
                if fin < 0.0 {
                    count += 1;
                }
                count
            }
        }
    }

    /// Solve (A − σM) x = b. Near-singular shifts are allowed (this is the
    /// inverse-iteration use case): tiny pivots are replaced by a floor.
    pub fn solve_shifted(&self, sigma: f64, mass: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let d = self.shifted_diag(sigma, mass);
        let scale = d
            .iter()
            .map(|v| v.abs())
            .chain(self.off.iter().map(|v| v.abs()))
            .fold(0.0, f64::max);
        match self.corner {
            None => gtsv(&self.off, &d, &self.off, b, scale),
            Some(c) => {
                let gamma = if d[0] == 0.0 { -scale.max(1.0) } else { -d[0] };
                let mut dd = d.clone();
                dd[0] -= gamma;
                dd[n - 1] -= c * c / gamma;
                let y = gtsv(&self.off, &dd, &self.off, b, scale);
                let mut u = vec![0.0; n];
                u[0] = gamma;
                u[n - 1] = c;
                let z = gtsv(&self.off, &dd, &self.off, &u, scale);
                let vy = y[0] + c / gamma * y[n - 1];
                let vz = z[0] + c / gamma * z[n - 1];
                let denom = 1.0 + vz;
                let denom = if denom.abs() < f64::EPSILON {
                    f64::EPSILON.copysign(denom)
                } else {
                    denom
                };
                let f = vy / denom;
                y.iter().zip(&z).map(|(yi, zi)| yi - f * zi).collect()
            }
        }
    }

    /// Gershgorin interval for the eigenvalues of the pencil (A, M).
    pub fn pencil_bounds(&self, mass: &[f64]) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs() / (mass[i - 1] * mass[i]).sqrt();
            }
            if i + 1 < n {
                rad += self.off[i].abs() / (mass[i] * mass[i + 1]).sqrt();
            }
            if let Some(c) = self.corner {
                if i == 0 || i == n - 1 {
                    rad += c.abs() / (mass[0] * mass[n - 1]).sqrt();
                }
            }
            let centre = self.diag[i] / mass[i];
            lo = lo.min(centre - rad);
            hi = hi.max(centre + rad);
        }
        let pad = 1e-8 * (lo.abs() + hi.abs() + 1.0);
        (lo - pad, hi + pad)
    }
}

/// Gaussian elimination with partial pivoting for a general tridiagonal
/// system (sub-diagonal `dl`, diagonal `d`, super-diagonal `du`).
pub fn gtsv(dl: &[f64], d: &[f64], du: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    let n = d.len();
    let floor = pivot_floor(scale.max(f64::MIN_POSITIVE));
    let fix = |v: f64| if v.abs() < floor { floor.copysign(if v == 0.0 { 1.0 } else { v }) } else { v };
    let mut dl = dl.to_vec();
    let mut d = d.to_vec();
    let mut du = du.to_vec();
    let mut b = b.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            let piv = fix(d[i]);
            d[i] = piv;
            let f = dl[i] / piv;
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du[i + 1];
            }
            du[i] = t;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - f * b[i + 1];
        }
        dl[i] = 0.0;
    }
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    x[n - 1] = b[n - 1] / fix(d[n - 1]);
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / fix(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / fix(d[i]);
    }
    x
}
