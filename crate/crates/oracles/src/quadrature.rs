//! Deterministic quadrature rules.

/// Adaptive Simpson integration of `f` on `[a, b]` to the given tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrates `f` over the whole real line through the substitution
/// `x = center + scale * tan(theta)`, which keeps heavy polynomial tails
/// inside a finite interval.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: &F, center: f64, scale: f64, tol: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let g = |theta: f64| {
        let c = theta.cos();
        if c.abs() < 1e-12 {
            return 0.0;
        }
        let x = center + scale * theta.tan();
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (c * c)
        }
    };
    adaptive_simpson(&g, -half_pi + 1e-12, half_pi - 1e-12, tol)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on the Legendre
/// polynomial recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A plane quadrature node: `(x, y)` location and its combined weight.
#[derive(Debug, Clone, Copy)]
pub struct PlaneNode {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// Tensor-product nodes covering the plane: each axis is tan-transformed and
/// carries its own center and scale. The caller evaluates the integrand and
/// accumulates `weight * f(x, y)` (plus any error propagation it needs).
pub fn plane_nodes(center: [f64; 2], scale: [f64; 2], n_per_axis: usize) -> Vec<PlaneNode> {
    let (t, w) = gauss_legendre(n_per_axis);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut axis = Vec::with_capacity(2);
    for a in 0..2 {
        let pts: Vec<(f64, f64)> = t
            .iter()
            .zip(&w)
            .map(|(&ti, &wi)| {
                let theta = ti * (half_pi - 1e-10);
                let c = theta.cos();
                let x = center[a] + scale[a] * theta.tan();
                let jac = scale[a] / (c * c) * (half_pi - 1e-10);
                (x, wi * jac)
            })
            .collect();
        axis.push(pts);
    }
    let mut out = Vec::with_capacity(n_per_axis * n_per_axis);
    for &(x, wx) in &axis[0] {
        for &(y, wy) in &axis[1] {
            out.push(PlaneNode {
                x,
                y,
                weight: wx * wy,
            });
        }
    }
    out
}
