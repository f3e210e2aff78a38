//! Gaussian-weighted quadrature on a slice `C_I` and on `H`.
//!
//! Radial integrals `int_0^inf g(r) r^a dr` with `g ~ e^{-c r^2}` use the
//! Gauss rule of the half-range weight `x^a e^{-x^2}` (`a = 1` on a slice,
//! `a = 3` in four dimensions) after the substitution `x = sqrt(c) r`. The
//! rule is exact for every polynomial in `r` of degree `< 2 N_r`, odd powers
//! included, which keeps `|f|^p` for odd `p` spectrally accurate.
//!
//! Weights are stored pre-multiplied by `e^{x^2}` so integrands are passed
//! with their Gaussian factor already applied.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::exec::Exec;
use crate::quat::{ImaginaryUnit, Quaternion};

pub const DEFAULT_RADIAL: usize = 64;
pub const DEFAULT_ANGULAR: usize = 128;
pub const DEFAULT_SPHERE: usize = 64;
/// Largest radial rule; bigger rules lose accuracy in the recurrence.
pub const MAX_RADIAL: usize = 1024;

/// Nodes whose unscaled Gauss weight is below `e^{-700}` are dropped.
const PRUNE_LN_WEIGHT: f64 = -700.0;

/// Grid sizes and execution policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub radial: usize,
    pub angular: usize,
    pub sphere: usize,
    #[serde(default)]
    pub exec: Exec,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            radial: DEFAULT_RADIAL,
            angular: DEFAULT_ANGULAR,
            sphere: DEFAULT_SPHERE,
            exec: Exec::default(),
        }
    }
}

impl QuadSettings {
    pub fn doubled(self) -> Self {
        QuadSettings {
            radial: 2 * self.radial,
            angular: 2 * self.angular,
            sphere: 2 * self.sphere,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial == 0 || self.angular == 0 || self.sphere == 0 {
            return Err(FockError::Domain("quadrature sizes must be positive".into()));
        }
        if self.radial > MAX_RADIAL {
            return Err(FockError::Domain(format!(
                "radial rule size {} exceeds {MAX_RADIAL}",
                self.radial
            )));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss rule for `x^power e^{-x^2}` on `[0, inf)`: nodes and scaled weights
/// `w_i e^{x_i^2}`.
#[derive(Debug, Clone)]
struct BaseRule {
    nodes: Vec<f64>,
    scaled_weights: Vec<f64>,
}

fn base_rule(power: u32, n: usize) -> Arc<BaseRule> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<BaseRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&(power, n)) {
        return r.clone();
    }
    let rule = Arc::new(build_base_rule(power, n));
    cache.lock().unwrap().insert((power, n), rule.clone());
    rule
}

fn build_base_rule(power: u32, n: usize) -> BaseRule {
    // Discretize the weight by composite Gauss–Legendre on [0, L].
    let length = 2.0 * (n as f64).sqrt() + 12.0;
    let panels = (length / (0.8 / (n as f64).sqrt()).min(0.1)).ceil() as usize;
    let h = length / panels as f64;
    let (gx, gw) = gauss_legendre(24);
    let mut t = Vec::with_capacity(panels * gx.len());
    let mut v = Vec::with_capacity(panels * gx.len());
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let s = a + 0.5 * h * (x + 1.0);
            t.push(s);
            v.push(0.5 * h * w * s.powi(power as i32) * (-s * s).exp());
        }
    }
    let mu0: f64 = v.iter().sum();

    // Stieltjes procedure on the vectors sqrt(v_j) p_k(t_j), which stay
    // normalized.
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    let mut prev = vec![0.0; t.len()];
    let mut cur: Vec<f64> = v.iter().map(|w| (w / mu0).sqrt()).collect();
    let mut b_prev = 0.0;
    for k in 0..n {
        let a: f64 = (0..t.len()).map(|j| t[j] * cur[j] * cur[j]).sum();
        diag.push(a);
        if k + 1 == n {
            break;
        }
        let mut next: Vec<f64> = (0..t.len())
            .map(|j| (t[j] - a) * cur[j] - b_prev * prev[j])
            .collect();
        let b = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in next.iter_mut() {
            *x /= b;
        }
        off.push(b);
        prev = std::mem::replace(&mut cur, next);
        b_prev = b;
    }

    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Christoffel function, rescaled as it grows so that the scaled weights
    // stay accurate where the plain weights underflow.
    let mut kept_nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x in &nodes {
        let mut p_prev = 0.0;
        let mut p = 1.0 / mu0.sqrt();
        let mut sum = p * p;
        let mut ln_scale = 0.0;
        for k in 0..n - 1 {
            let b_before = if k == 0 { 0.0 } else { off[k - 1] };
            let next = ((x - diag[k]) * p - b_before * p_prev) / off[k];
            p_prev = p;
            p = next;
            sum += p * p;
            if p.abs() > 1e100 {
                p *= 1e-100;
                p_prev *= 1e-100;
                sum *= 1e-200;
                ln_scale += 100.0 * std::f64::consts::LN_10;
            }
        }
        let ln_scaled = x * x - sum.ln() - 2.0 * ln_scale;
        if ln_scaled - x * x < PRUNE_LN_WEIGHT {
            continue;
        }
        kept_nodes.push(x);
        weights.push(ln_scaled.exp());
    }
    BaseRule {
        nodes: kept_nodes,
        scaled_weights: weights,
    }
}

/// Rule for `int_0^inf g(r) r^power dr` with `g ~ e^{-scale r^2}`.
#[derive(Debug, Clone)]
pub struct RadialRule {
    pub power: u32,
    pub scale: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn new(power: u32, n: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(FockError::Domain(format!("radial scale {scale} must be positive")));
        }
        if n == 0 || n > MAX_RADIAL {
            return Err(FockError::Domain(format!("radial node count {n} outside 1..={MAX_RADIAL}")));
        }
        let base = base_rule(power, n);
        let root = scale.sqrt();
        let factor = scale.powf(-0.5 * (power as f64 + 1.0));
        Ok(RadialRule {
            power,
            scale,
            nodes: base.nodes.iter().map(|x| x / root).collect(),
            weights: base.scaled_weights.iter().map(|w| w * factor).collect(),
        })
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * g(*r)).sum()
    }

    pub fn max_node(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Slice,
    Volume,
}

/// Product grid in polar (slice) or `rho, theta, u` (volume) coordinates.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub mode: Mode,
    pub radial: RadialRule,
    /// `(theta, weight)`; `[0, 2 pi)` on a slice, `(0, pi)` with `sin^2`
    /// folded into the weight in volume mode.
    pub angular: Vec<(f64, f64)>,
    /// Sphere nodes and weights (volume mode only); weights sum to `4 pi`.
    pub sphere: Vec<(ImaginaryUnit, f64)>,
}

impl QuadratureGrid {
    pub fn slice(scale: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if n_angular == 0 {
            return Err(FockError::Domain("angular node count must be positive".into()));
        }
        let h = 2.0 * PI / n_angular as f64;
        Ok(QuadratureGrid {
            mode: Mode::Slice,
            radial: RadialRule::new(1, n_radial, scale)?,
            angular: (0..n_angular).map(|j| (j as f64 * h, h)).collect(),
            sphere: Vec::new(),
        })
    }

    pub fn volume(scale: f64, n_radial: usize, n_angular: usize, n_sphere: usize) -> Result<Self> {
        if n_angular == 0 || n_sphere == 0 {
            return Err(FockError::Domain("angular and sphere node counts must be positive".into()));
        }
        let h = PI / (n_angular as f64 + 1.0);
        let angular = (1..=n_angular)
            .map(|j| {
                let t = j as f64 * h;
                (t, h * t.sin().powi(2))
            })
            .collect();
        Ok(QuadratureGrid {
            mode: Mode::Volume,
            radial: RadialRule::new(3, n_radial, scale)?,
            angular,
            sphere: sphere_rule(n_sphere),
        })
    }

    pub fn from_settings(mode: Mode, scale: f64, s: &QuadSettings) -> Result<Self> {
        s.validate()?;
        match mode {
            Mode::Slice => Self::slice(scale, s.radial, s.angular),
            Mode::Volume => Self::volume(scale, s.radial, s.angular, s.sphere),
        }
    }

    pub fn node_count(&self) -> usize {
        self.radial.nodes.len() * self.angular.len() * self.sphere.len().max(1)
    }
}

/// Product Gauss–Legendre (in `cos phi`) by uniform azimuth rule on the unit
/// sphere with at least `count` nodes: `round(sqrt(count / 2))` polar nodes
/// and enough azimuths to reach `count`.
pub fn sphere_rule(count: usize) -> Vec<(ImaginaryUnit, f64)> {
    let n_polar = ((count as f64 / 2.0).sqrt().round() as usize).max(1);
    let n_az = count.div_ceil(n_polar).max(1);
    let (cz, wz) = gauss_legendre(n_polar);
    let dphi = 2.0 * PI / n_az as f64;
    let mut out = Vec::with_capacity(n_polar * n_az);
    for (z, wz) in cz.iter().zip(&wz) {
        let s = (1.0 - z * z).max(0.0).sqrt();
        for a in 0..n_az {
            let phi = (a as f64 + 0.5) * dphi;
            let u = ImaginaryUnit::new(s * phi.cos(), s * phi.sin(), *z)
                .expect("sphere node has unit length");
            out.push((u, wz * dphi));
        }
    }
    out
}

fn check(value: f64, node: Quaternion) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FockError::IntegrandOverflow { node, value })
    }
}

/// `int_{C_I} g dA` (plain Lebesgue area on the slice).
pub fn integrate_slice(
    g: impl Fn(Quaternion) -> f64 + Sync,
    unit: ImaginaryUnit,
    grid: &QuadratureGrid,
    exec: Exec,
) -> Result<f64> {
    let r = &grid.radial;
    let rows = exec.try_map(r.nodes.len(), |i| {
        let rho = r.nodes[i];
        let mut acc = 0.0;
        for &(t, w) in &grid.angular {
            let z = unit.point(rho * t.cos(), rho * t.sin());
            acc += w * check(g(z), z)?;
        }
        Ok::<_, FockError>(r.weights[i] * acc)
    })?;
    Ok(rows.iter().sum())
}

/// `int_H g dm` via `q = rho (cos theta + u sin theta)`,
/// `dm = rho^3 sin^2 theta d rho d theta d sigma(u)`.
pub fn integrate_volume(
    g: impl Fn(Quaternion) -> f64 + Sync,
    grid: &QuadratureGrid,
    exec: Exec,
) -> Result<f64> {
    if grid.mode != Mode::Volume {
        return Err(FockError::Domain("volume integration needs a volume grid".into()));
    }
    let r = &grid.radial;
    let rows = exec.try_map(r.nodes.len(), |i| {
        let rho = r.nodes[i];
        let mut acc = 0.0;
        for &(t, wt) in &grid.angular {
            let (x, y) = (rho * t.cos(), rho * t.sin());
            let mut inner = 0.0;
            for &(u, ws) in &grid.sphere {
                let q = u.point(x, y);
                inner += ws * check(g(q), q)?;
            }
            acc += wt * inner;
        }
        Ok::<_, FockError>(r.weights[i] * acc)
    })?;
    Ok(rows.iter().sum())
}

/// `int_{-pi}^{pi} h(t) dt` by the periodic trapezoid rule with `n` nodes.
///
/// Exact for trigonometric polynomials of degree `< n`; `cos(n t)` aliases to
/// the constant 1 and integrates to `2 pi`.
pub fn circle_average(h: impl Fn(f64) -> f64, n: usize) -> f64 {
    let step = 2.0 * PI / n as f64;
    (0..n).map(|j| h(-PI + j as f64 * step)).sum::<f64>() * step
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 24] {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - want).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn half_range_moments() {
        // int_0^inf r^{a+j} e^{-r^2} dr = Gamma((a+j+1)/2) / 2
        for (a, n) in [(1u32, 16usize), (3, 16), (1, 64), (3, 128), (1, 512), (3, 1024)] {
            let rule = RadialRule::new(a, n, 1.0).unwrap();
            for j in 0..(2 * n - a as usize).min(60) {
                let got = rule.integrate(|r| r.powi(j as i32) * (-r * r).exp());
                let s = (a as f64 + j as f64 + 1.0) / 2.0;
                let want = 0.5 * ln_gamma(s).exp();
                assert!(rel(got, want) < 1e-12, "a={a} n={n} j={j}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn radial_size_cap() {
        assert!(RadialRule::new(1, MAX_RADIAL + 1, 1.0).is_err());
        assert!(QuadSettings {
            radial: 2 * MAX_RADIAL,
            ..QuadSettings::default()
        }
        .validate()
        .is_err());
    }

    fn ln_gamma(s: f64) -> f64 {
        // Half-integer arguments only.
        if (s - s.round()).abs() < 1e-12 {
            (1..s.round() as usize).map(|k| (k as f64).ln()).sum()
        } else {
            let mut v = 0.5 * PI.ln();
            let mut x = 0.5;
            while x < s - 1e-9 {
                v += x.ln();
                x += 1.0;
            }
            v
        }
    }

    #[test]
    fn slice_examples() {
        let alpha = 1.7;
        let grid = QuadratureGrid::slice(alpha, 64, 128).unwrap();
        let e = |z: Quaternion| (-alpha * z.norm_sqr()).exp();
        let v = integrate_slice(e, ImaginaryUnit::I, &grid, Exec::Sequential).unwrap();
        assert!(rel(v, PI / alpha) < 1e-12);
        let m = |z: Quaternion| z.norm_sqr() * (-alpha * z.norm_sqr()).exp();
        let v = integrate_slice(m, ImaginaryUnit::J, &grid, Exec::Parallel).unwrap();
        assert!(rel(v, PI / alpha / alpha) < 1e-12);
        let u = ImaginaryUnit::K;
        let c = |z: Quaternion| {
            let (x, _) = u.coords(z);
            let r = z.norm();
            if r == 0.0 { 0.0 } else { x / r * (-alpha * z.norm_sqr()).exp() }
        };
        assert!(integrate_slice(c, u, &grid, Exec::Sequential).unwrap().abs() < 1e-14);
    }

    #[test]
    fn volume_examples() {
        let alpha = 0.8;
        let grid = QuadratureGrid::volume(alpha, 64, 32, 64).unwrap();
        let g = |q: Quaternion| (-alpha * q.norm_sqr()).exp();
        let v = integrate_volume(g, &grid, Exec::Parallel).unwrap();
        assert!(rel(v, PI * PI / alpha.powi(2)) < 1e-12);
        let g = |q: Quaternion| q.norm_sqr() * (-alpha * q.norm_sqr()).exp();
        let v = integrate_volume(g, &grid, Exec::Sequential).unwrap();
        assert!(rel(v, 2.0 * PI * PI / alpha.powi(3)) < 1e-12);
        let g = |q: Quaternion| q.y * (-alpha * q.norm_sqr()).exp();
        assert!(integrate_volume(g, &grid, Exec::Sequential).unwrap().abs() < 1e-13);
    }

    #[test]
    fn moment_exactness() {
        let alpha = 1.3;
        let grid = QuadratureGrid::slice(alpha, 64, 8).unwrap();
        let mut fact = 1.0;
        for k in 0..=24 {
            if k > 0 {
                fact *= k as f64;
            }
            let g = |z: Quaternion| z.norm_sqr().powi(k) * (-alpha * z.norm_sqr()).exp();
            let v = integrate_slice(g, ImaginaryUnit::I, &grid, Exec::Sequential).unwrap();
            let want = PI * fact / alpha.powi(k + 1);
            assert!(rel(v, want) < 1e-11, "k={k}");
        }
        let grid = QuadratureGrid::volume(alpha, 64, 4, 4).unwrap();
        let mut fact = 1.0;
        for k in 0..=16 {
            fact *= (k + 1) as f64;
            let g = |q: Quaternion| q.norm_sqr().powi(k) * (-alpha * q.norm_sqr()).exp();
            let v = integrate_volume(g, &grid, Exec::Sequential).unwrap();
            let want = PI * PI * fact / alpha.powi(k + 2);
            assert!(rel(v, want) < 1e-9, "k={k}");
        }
    }

    #[test]
    fn sphere_rule_integrates_low_degree_harmonics() {
        let s = sphere_rule(64);
        assert!(s.len() >= 64);
        let total: f64 = s.iter().map(|(_, w)| w).sum();
        assert!(rel(total, 4.0 * PI) < 1e-14);
        let second: f64 = s.iter().map(|(u, w)| w * u.components()[0].powi(2)).sum();
        assert!(rel(second, 4.0 * PI / 3.0) < 1e-14);
        let odd: f64 = s.iter().map(|(u, w)| w * u.components()[2]).sum();
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn overflow_reports_node() {
        let grid = QuadratureGrid::slice(1.0, 8, 8).unwrap();
        let err = integrate_slice(|_| f64::INFINITY, ImaginaryUnit::I, &grid, Exec::Sequential);
        assert!(matches!(err, Err(FockError::IntegrandOverflow { .. })));
    }

    #[test]
    fn circle_average_examples() {
        assert!((circle_average(|_| 1.0, 5) - 2.0 * PI).abs() < 1e-14);
        assert!((circle_average(|t| t.cos().powi(2), 8) - PI).abs() < 1e-14);
        // aliasing: cos(N t) sampled at N nodes is constant
        assert!((circle_average(|t| (8.0 * t).cos(), 8) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn parallel_is_bit_identical() {
        let grid = QuadratureGrid::slice(1.0, 64, 128).unwrap();
        let g = |z: Quaternion| (z.w.sin() + z.x * z.x) * (-z.norm_sqr()).exp();
        let a = integrate_slice(g, ImaginaryUnit::I, &grid, Exec::Sequential).unwrap();
        let b = integrate_slice(g, ImaginaryUnit::I, &grid, Exec::Parallel).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
