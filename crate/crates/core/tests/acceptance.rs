//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use slice_fock::approx::{verify_jackson, verify_vdp};
use slice_fock::fock::{
    default_radii, gram_first, gram_second, growth_bound_check, norm_value, order_type, slice_norm_ratio, NormSpec,
};
use slice_fock::kernel::{fit_with_sections, real_centers};
use slice_fock::operators::{fejer_op, jackson_op, jackson_r, moment_bound, taylor_op, vdp_op, MultiplierOperator};
use slice_fock::quadrature::QuadSettings;
use slice_fock::{FockError, ImaginaryUnit, Quaternion, SliceSeries};

type Outcome = (bool, String);

struct Rng(SplitMix64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(seed))
    }

    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn unit(&mut self) -> ImaginaryUnit {
        let z = 2.0 * self.uniform() - 1.0;
        let phi = 2.0 * PI * self.uniform();
        let s = (1.0 - z * z).sqrt();
        ImaginaryUnit::new(s * phi.cos(), s * phi.sin(), z).unwrap()
    }

    /// Uniform in the ball of radius `r`.
    fn ball(&mut self, r: f64) -> Quaternion {
        loop {
            let v = [0; 4].map(|_| 2.0 * self.uniform() - 1.0);
            if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                return Quaternion::from_array(v.map(|x| r * x));
            }
        }
    }

    fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }
}

fn diagonal_unit() -> ImaginaryUnit {
    ImaginaryUnit::new(1.0, 1.0, 1.0).unwrap()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn basis_orthonormality() -> Outcome {
    let quad = QuadSettings::default();
    let basis_units = [ImaginaryUnit::I, ImaginaryUnit::J, diagonal_unit()];
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0] {
        let fs: Vec<SliceSeries> = (0..=12).map(|k| SliceSeries::basis(k, alpha)).collect();
        for unit in basis_units {
            let g = gram_second(&fs, alpha, unit, &quad).unwrap();
            for (a, row) in g.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    let target = if a == b { Quaternion::ONE } else { Quaternion::ZERO };
                    worst = worst.max((*v - target).norm());
                }
            }
        }
    }
    (worst <= 1e-8, format!("max |G - Id| = {worst:.3e}"))
}

fn norm_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0] {
        for k in 0..=12 {
            let f = SliceSeries::monomial(k);
            let second = norm_value(&f, &NormSpec::second(2.0, alpha, ImaginaryUnit::I)).unwrap();
            let first = norm_value(&f, &NormSpec::first(2.0, alpha)).unwrap();
            let ak = alpha.powi(k as i32);
            worst = worst.max(rel(second * second, factorial(k) / ak));
            worst = worst.max(rel(first * first, factorial(k + 1) / ak));
        }
    }
    (worst <= 1e-9, format!("max relative error = {worst:.3e}"))
}

fn first_kind_band() -> Outcome {
    let fs: Vec<SliceSeries> = (0..=8).map(SliceSeries::monomial).collect();
    let g = gram_first(&fs, 1.0, &QuadSettings::default()).unwrap();
    let mut min_band = f64::INFINITY;
    let mut max_off: f64 = 0.0;
    for m in 0..=8usize {
        for n in 0..=8usize {
            let d = m.abs_diff(n);
            let v = g[m][n].norm();
            if d == 2 && m.min(n) <= 6 {
                min_band = min_band.min(v);
            }
            if d % 2 == 1 || d >= 4 {
                max_off = max_off.max(v);
            }
        }
    }
    (
        min_band > 1e-3 && max_off < 1e-8,
        format!("min |<q^m, q^(m+2)>| = {min_band:.3e}, max vanishing entry = {max_off:.3e}"),
    )
}

fn test_family(alpha: f64) -> Vec<(String, SliceSeries)> {
    let mut v = vec![
        ("exp".to_string(), SliceSeries::exp()),
        (format!("gauss:{}", alpha / 4.0), SliceSeries::gauss(alpha / 4.0)),
    ];
    for s in 0..10u64 {
        v.push((format!("random:{}:{s}", 3 + s as usize), SliceSeries::random(3 + s as usize, s)));
    }
    v
}

fn growth_bounds() -> Outcome {
    let alpha = 1.0;
    let mut rng = Rng::new(4);
    let samples: Vec<Quaternion> = (0..1000).map(|_| rng.ball(3.0)).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [1.0, 2.0] {
        for (label, spec) in [
            ("first", NormSpec::first(p, alpha)),
            ("second", NormSpec::second(p, alpha, ImaginaryUnit::I)),
        ] {
            let mut max_ratio: f64 = 0.0;
            let mut constant = 0.0;
            for (_, f) in test_family(alpha) {
                let r = growth_bound_check(&f, &spec, &samples).unwrap();
                ok &= r.passed();
                max_ratio = max_ratio.max(r.max_ratio);
                constant = r.constant;
            }
            detail.push(format!("{label} p={p}: max ratio {max_ratio:.3} <= {constant:.3}"));
        }
    }
    (ok, detail.join("; "))
}

fn slice_equivalence() -> Outcome {
    let quad = QuadSettings::default();
    let mut rng = Rng::new(5);
    let pairs: Vec<(ImaginaryUnit, ImaginaryUnit)> = (0..10).map(|_| (rng.unit(), rng.unit())).collect();
    let polys: Vec<SliceSeries> = (0..200u64)
        .map(|s| SliceSeries::random(1 + rng.below(12) as usize, 500 + s))
        .collect();
    let mut worst: f64 = 0.0;
    for p in [1.0, 2.0, 4.0] {
        for f in &polys {
            for &(a, b) in &pairs {
                worst = worst.max(slice_norm_ratio(f, p, 1.0, a, b, &quad).unwrap());
            }
        }
    }
    (worst <= 2.0, format!("max ratio = {worst:.4}"))
}

fn operator_identities() -> Outcome {
    let mut fejer_err: f64 = 0.0;
    for n in [1, 2, 3, 5, 8, 16, 64] {
        let op = fejer_op(n).unwrap();
        for k in 0..=n + 2 {
            let exact = if k < n { 1.0 - k as f64 / n as f64 } else { 0.0 };
            fejer_err = fejer_err.max((op.rho(k) - exact).abs());
        }
    }
    let mut vdp_err: f64 = 0.0;
    for n in [1, 2, 4, 8, 16] {
        let op = vdp_op(n).unwrap();
        for s in 0..5 {
            let f = SliceSeries::random(n, 100 * n as u64 + s);
            let g = op.apply(&f);
            for k in 0..=n {
                vdp_err = vdp_err.max((g.coeff(k) - f.coeff(k)).norm());
            }
        }
    }
    let mut degree_ok = true;
    for n in [1, 2, 4, 8, 16] {
        for m in 0..=2 {
            for p in [1.0, 1.5, 2.0, 3.0] {
                let r = ((p * (m as f64 + 1.0) + 2.0) / 2.0).ceil() as usize;
                let op = jackson_op(n, m, p).unwrap();
                degree_ok &= r == jackson_r(m, p) && op.degree_bound == r * (n - 1);
                let g = op.apply(&SliceSeries::random(r * n + 5, 9));
                degree_ok &= g.degree().is_some_and(|d| d <= r * (n - 1));
            }
        }
    }
    (
        fejer_err <= 1e-12 && vdp_err <= 1e-12 && degree_ok,
        format!("fejer error {fejer_err:.2e}, vdp reproduction error {vdp_err:.2e}, jackson degree bounds exact: {degree_ok}"),
    )
}

fn multiplier_vs_direct() -> Outcome {
    let ops: Vec<MultiplierOperator> = vec![
        taylor_op(6),
        fejer_op(5).unwrap(),
        vdp_op(4).unwrap(),
        jackson_op(4, 0, 2.0).unwrap(),
        jackson_op(3, 1, 2.0).unwrap(),
    ];
    let units = [ImaginaryUnit::I, ImaginaryUnit::new(1.0, 0.0, 1.0).unwrap()];
    let mut rng = Rng::new(7);
    let mut action: f64 = 0.0;
    let mut across: f64 = 0.0;
    for op in &ops {
        let nodes = 64 * (op.degree_bound + 13);
        for s in 0..4 {
            let f = SliceSeries::random(rng.below(13) as usize, 700 + s);
            let g = op.apply(&f);
            let (x, y) = (2.0 * rng.uniform() - 1.0, rng.uniform());
            let mut vals = Vec::new();
            for u in units {
                let q = u.point(x, y);
                let d = op.direct(&f, q, nodes).unwrap();
                action = action.max((d - g.evaluate(q).unwrap()).norm());
                vals.push(d);
            }
            let mirrored = op.direct(&f, units[0].point(x, -y), nodes).unwrap();
            let rebuilt = representation(units[0], units[1], vals[0], mirrored);
            across = across.max((vals[1] - rebuilt).norm());
        }
        for k in 0..=12 {
            let mono = SliceSeries::monomial(k);
            let mut rhos = Vec::new();
            for u in units {
                let q = u.point(0.6, 0.8);
                let d = op.direct(&mono, q, nodes).unwrap();
                rhos.push((q.powi(k).inverse().unwrap() * d).w);
            }
            across = across.max((rhos[0] - rhos[1]).abs());
            action = action.max((rhos[0] - op.rho(k)).abs());
        }
    }
    (
        action <= 1e-9 && across <= 1e-10,
        format!("max |direct - coefficient action| = {action:.2e}, max difference across slices = {across:.2e}"),
    )
}

/// Value at `x + J y` from the values `a` at `x + I y` and `b` at `x - I y`.
fn representation(i: ImaginaryUnit, j: ImaginaryUnit, a: Quaternion, b: Quaternion) -> Quaternion {
    let ji = j.as_quaternion() * i.as_quaternion();
    (a + b) * 0.5 - ji * (a - b) * 0.5
}

fn vdp_inequality() -> Outcome {
    let alpha = 1.0;
    let quad = QuadSettings::default();
    let mut fs = vec![SliceSeries::exp(), SliceSeries::gauss(alpha / 4.0)];
    fs.extend((0..8u64).map(|s| SliceSeries::random(24, 800 + s)));
    let mut min_slack = f64::INFINITY;
    let mut ok = true;
    for f in &fs {
        for n in [2, 4, 8, 16] {
            let r = verify_vdp(f, n, 2.0, alpha, ImaginaryUnit::I, &quad).unwrap();
            ok &= r.passed();
            if let Some(s) = r.slack {
                min_slack = min_slack.min(s);
            }
        }
    }
    (ok, format!("min slack = {min_slack:.3e}"))
}

fn jackson_boundedness() -> Outcome {
    let quad = QuadSettings::default();
    let f = SliceSeries::exp();
    let ns = [4, 8, 16, 32, 64];
    let mut ok = true;
    let mut detail = Vec::new();
    for (m, p) in [(0, 1.0), (0, 2.0), (1, 2.0)] {
        let ratios: Vec<f64> = ns
            .iter()
            .map(|&n| verify_jackson(&f, n, m, p, 1.0, ImaginaryUnit::I, 8, &quad).unwrap().ratio.unwrap())
            .collect();
        let rspread = spread(&ratios);
        let moments: Vec<f64> = ns.iter().map(|&n| moment_bound(n, m, p).unwrap()).collect();
        let mspread = spread(&moments);
        ok &= rspread < 10.0 && mspread < 4.0;
        detail.push(format!("(m={m}, p={p}): ratio max/min {rspread:.3}, moment max/min {mspread:.3}"));
    }
    (ok, detail.join("; "))
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

fn density_trends() -> Outcome {
    let spec = NormSpec::second(2.0, 1.0, ImaginaryUnit::I);
    let exp = SliceSeries::exp();
    let mut taylor_err: f64 = 0.0;
    for n in 0..=12 {
        let e = norm_value(&taylor_op(n).apply(&exp).sub(&exp).unwrap(), &spec).unwrap();
        let exact = ((n + 1)..60).map(|k| 1.0 / factorial(k)).sum::<f64>().sqrt();
        taylor_err = taylor_err.max(rel(e, exact));
    }
    let taylor_ok = taylor_err <= 1e-9;

    let rs: [f64; 3] = [0.9, 0.99, 0.999];
    let dil: Vec<f64> = rs
        .iter()
        .map(|&r| {
            let d = SliceSeries::from_coeffs(
                (0..=80)
                    .map(|k| Quaternion::real((r.powi(k as i32) - 1.0) / factorial(k)))
                    .collect(),
            );
            norm_value(&d, &spec).unwrap()
        })
        .collect();
    let dil_steps = [dil[0] / dil[1], dil[1] / dil[2]];
    let dil_ok = dil_steps.iter().all(|&s| s >= 10.0);

    let targets = [
        ("mono:1", SliceSeries::monomial(1)),
        ("mono:2", SliceSeries::monomial(2)),
        ("exp truncated at 8", exp.taylor_truncate(8)),
    ];
    let mut kernel_ok = true;
    let mut kernel_detail = Vec::new();
    for (label, f) in &targets {
        let r2 = fit_with_sections(f, &real_centers(-1.0, 1.0, 2), 1.0).unwrap().residual;
        let r8 = fit_with_sections(f, &real_centers(-1.0, 1.0, 8), 1.0).unwrap().residual;
        kernel_ok &= r2 >= 10.0 * r8;
        kernel_detail.push(format!("{label} {:.3}x", r2 / r8));
    }
    (
        taylor_ok && dil_ok && kernel_ok,
        format!(
            "taylor rel error {taylor_err:.2e}; dilation step ratios {:.3}, {:.3}; kernel residual drop {}",
            dil_steps[0],
            dil_steps[1],
            kernel_detail.join(", ")
        ),
    )
}

fn order_and_type() -> Outcome {
    let alpha = 1.0;
    let radii = default_radii();
    let mut family = test_family(alpha);
    family.push(("mono:3".into(), SliceSeries::monomial(3)));
    family.push((
        "kernel section".into(),
        SliceSeries::kernel_section(Quaternion::new(0.5, 0.3, -0.2, 0.1), alpha),
    ));
    let mut max_order = f64::NEG_INFINITY;
    let mut gauss = None;
    for (label, f) in &family {
        let r = order_type(f, &radii).unwrap();
        max_order = max_order.max(r.order);
        if label.starts_with("gauss") {
            gauss = Some((r.order, r.type_estimate));
        }
    }
    let (g_order, g_type) = gauss.unwrap();
    let g_type = g_type.unwrap_or(f64::INFINITY);
    let rejected = matches!(
        norm_value(&SliceSeries::gauss(0.6 * alpha), &NormSpec::second(2.0, alpha, ImaginaryUnit::I)),
        Err(FockError::NotInSpace(_))
    );
    (
        max_order <= 2.05 && (g_order - 2.0).abs() <= 0.05 && g_type <= 0.525 * alpha && rejected,
        format!(
            "max order {max_order:.4}; gauss:{} order {g_order:.4} type {g_type:.4}; gauss:{} rejected: {rejected}",
            alpha / 4.0,
            0.6 * alpha
        ),
    )
}

fn quadrature_self_check() -> Outcome {
    let alpha = 1.0;
    let fs = [
        SliceSeries::exp(),
        SliceSeries::gauss(alpha / 4.0),
        SliceSeries::monomial(3),
        SliceSeries::random(8, 12),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [1.0, 2.0, 3.0] {
        let specs = [
            NormSpec::second(p, alpha, ImaginaryUnit::I),
            NormSpec::second(p, alpha, diagonal_unit()),
            NormSpec::first(p, alpha),
        ];
        let mut worst: f64 = 0.0;
        for f in &fs {
            for spec in &specs {
                let a = norm_value(f, spec).unwrap();
                let b = norm_value(f, &spec.with_quad(spec.quad.doubled())).unwrap();
                worst = worst.max(rel(a, b));
            }
        }
        ok &= worst <= 1e-10;
        detail.push(format!("p={p}: max relative change {worst:.2e}"));
    }
    (ok, detail.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("basis orthonormality", basis_orthonormality),
        ("norm oracles", norm_oracles),
        ("first-kind band structure", first_kind_band),
        ("growth bounds", growth_bounds),
        ("slice-norm equivalence", slice_equivalence),
        ("operator identities", operator_identities),
        ("multiplier vs direct integral", multiplier_vs_direct),
        ("de la Vallee Poussin inequality", vdp_inequality),
        ("Jackson boundedness", jackson_boundedness),
        ("density trends", density_trends),
        ("order and type", order_and_type),
        ("quadrature self-check", quadrature_self_check),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {detail} ({secs:.2} s)", i + 1);
        if !ok {
            failed += 1;
        }
    }
    println!("{failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
