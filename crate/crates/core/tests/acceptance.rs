//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any failure.

use std::time::{Duration, Instant};

use instab::contfrac::{eval_adaptive, truncations, Direction, TailSpec, Truncation};
use instab::dispersion::{nu0_estimate, DispersionSpec, Nu0Options, RootOptions};
use instab::eigensystem::{build_w, EigenOptions};
use instab::spectral::{det_i_plus_k, growth_rate, max_real_eig};
use instab::{classify, Error, FlowParams, LatticeVector, ModelKind, PointClass};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const P: LatticeVector = LatticeVector::new(3, 1);
const Q0: LatticeVector = LatticeVector::new(-1, 2);
const QPLUS: LatticeVector = LatticeVector::new(0, -2);
const QMINUS: LatticeVector = LatticeVector::new(2, -2);
const ROOT_TOL: f64 = 1e-13;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn params(model: ModelKind, q: LatticeVector, nu: f64, alpha: f64) -> FlowParams {
    FlowParams::new(model, P, q, nu, Some(alpha)).expect("valid instance")
}

fn cf_root(p: &FlowParams) -> Result<f64, Error> {
    DispersionSpec::new(p.clone(), Truncation::adaptive(ROOT_TOL))?
        .find_root(&RootOptions::with_tol(ROOT_TOL))
        .map(|r| r.lambda)
}

fn classification() -> Outcome {
    let cases = [
        (Q0, PointClass::TypeI0),
        (QPLUS, PointClass::TypeIPlus),
        (QMINUS, PointClass::TypeIMinus),
        (LatticeVector::new(-1, 1), PointClass::TypeII),
        (LatticeVector::new(-2, 3), PointClass::Type0),
    ];
    let start = Instant::now();
    let got: Vec<PointClass> = cases.iter().map(|(q, _)| classify(*q, P)).collect();
    let elapsed = start.elapsed();
    let exact = got.iter().zip(&cases).all(|(g, (_, want))| g == want);
    outcome(
        exact && elapsed < Duration::from_millis(1),
        format!("5/5 exact={exact}, {elapsed:?}"),
    )
}

fn figure_instance() -> Outcome {
    let start = Instant::now();
    let spec = DispersionSpec::new(
        FlowParams::new(ModelKind::NavierStokes, P, Q0, 0.06, None).unwrap(),
        Truncation::Fixed(10),
    )
    .unwrap();
    let grid: Vec<f64> = (1..=200).map(|i| i as f64 * 0.01).collect();
    let values: Vec<f64> = grid.iter().map(|&l| spec.value(l).unwrap()).collect();
    let changes = values.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    let root = spec.find_root(&RootOptions {
        lambda_cap: Some(2.0),
        ..RootOptions::with_tol(1e-10)
    });
    let elapsed = start.elapsed();
    let found = root.as_ref().map(|r| r.found).unwrap_or(false);
    let lambda = root.map(|r| r.lambda).unwrap_or(f64::NAN);
    outcome(
        changes >= 1 && found && elapsed < Duration::from_millis(100),
        format!("sign changes on (0,2]: {changes}, depth-10 root {lambda:.10}, {elapsed:?}"),
    )
}

fn oracle_triangle() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    let mut worst_matrix: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    let mut failures = Vec::new();
    for model in ModelKind::ALL {
        for q in [Q0, QPLUS, QMINUS] {
            let nu = 0.01;
            let p = params(model, q, nu, 0.5);
            let label = format!("{model}/{}", p.class());
            let below = nu0_estimate(
                &p,
                &Nu0Options {
                    nu_min: 1e-3,
                    ..Default::default()
                },
            )
            .map(|r| nu < r.nu0)
            .unwrap_or(false);
            let lam = match cf_root(&p) {
                Ok(l) => l,
                Err(e) => {
                    failures.push(format!("{label}: {e}"));
                    continue;
                }
            };
            let matrix = max_real_eig(&p, 128).unwrap();
            let em = (lam - matrix).abs() / lam.abs().max(1.0);
            worst_matrix = worst_matrix.max(em);
            let mut ok = below && em <= 1e-8;
            if model == ModelKind::NavierStokes {
                let d = det_i_plus_k(lam, &p, 128).unwrap().value.abs();
                worst_det = worst_det.max(d);
                ok &= d <= 1e-6;
            }
            if !ok {
                failures.push(format!("{label}: below_nu0={below} matrix_err={em:.2e}"));
            }
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && count >= 10 && elapsed < Duration::from_secs(30),
        format!(
            "{count} instances, max |dλ|/max(1,λ) {worst_matrix:.2e}, max |det| {worst_det:.2e}, {elapsed:?}{}",
            if failures.is_empty() { String::new() } else { format!(" failures: {failures:?}") }
        ),
    )
}

fn eigenvector_certification() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let p = FlowParams::new(ModelKind::NavierStokes, P, Q0, 0.06, None).unwrap();
    let lam = cf_root(&p).unwrap();
    let ev = build_w(lam, &p, 1024, &EigenOptions::for_root_tol(ROOT_TOL)).unwrap();
    let fit = ev.decay.unwrap();
    pass &= ev.residual <= 1e-10 && ev.sign_ok && fit.rate > 0.0 && fit.r_squared >= 0.999;
    notes.push(format!(
        "I0: residual {:.1e}, signs {}, δ {:.3}, R² {:.5}",
        ev.residual, ev.sign_ok, fit.rate, fit.r_squared
    ));
    for q in [QPLUS, QMINUS] {
        let p = FlowParams::new(ModelKind::NavierStokes, P, q, 0.01, None).unwrap();
        let lam = cf_root(&p).unwrap();
        let ev = build_w(lam, &p, 1024, &EigenOptions::for_root_tol(ROOT_TOL)).unwrap();
        let fit = ev.decay.unwrap();
        pass &= ev.residual <= 1e-10 && ev.sign_ok && fit.rate > 0.0 && fit.r_squared >= 0.999;
        notes.push(format!(
            "{}: residual {:.1e}, signs {}, δ {:.3}, R² {:.5}",
            p.class(),
            ev.residual,
            ev.sign_ok,
            fit.rate,
            fit.r_squared
        ));
    }
    outcome(pass, notes.join("; "))
}

fn dynamic_oracle() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (q, nu) in [(Q0, 0.06), (QPLUS, 0.01), (QMINUS, 0.01)] {
        let p = FlowParams::new(ModelKind::NavierStokes, P, q, nu, None).unwrap();
        let lam = cf_root(&p).unwrap();
        let start = Instant::now();
        let g = growth_rate(&p, 32, 200.0, None, 2024).unwrap();
        let elapsed = start.elapsed();
        let rel = (g - lam).abs() / lam;
        pass &= rel <= 1e-3 && elapsed < Duration::from_secs(5);
        notes.push(format!("{}: rel {rel:.1e} in {elapsed:?}", p.class()));
    }
    outcome(pass, notes.join("; "))
}

fn innermost_first(coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |tail, &a| 1.0 / (a + tail))
}

fn bracketing() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut violations = 0usize;
    let mut worst_mismatch: f64 = 0.0;
    for _ in 0..100 {
        let coeffs: Vec<f64> = (0..200).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        let t: Vec<f64> = (1..=coeffs.len()).map(|k| innermost_first(&coeffs[..k])).collect();
        for (fast, slow) in truncations(&coeffs).iter().zip(&t) {
            worst_mismatch = worst_mismatch.max((fast - slow).abs() / slow.abs());
        }
        let slack = |x: f64| 8.0 * f64::EPSILON * x.abs();
        let evens: Vec<f64> = t.iter().skip(1).step_by(2).copied().collect();
        let odds: Vec<f64> = t.iter().step_by(2).copied().collect();
        violations += evens.windows(2).filter(|w| w[1] < w[0] - slack(w[0])).count();
        violations += odds.windows(2).filter(|w| w[1] > w[0] + slack(w[0])).count();
        let max_even = evens.iter().copied().fold(f64::MIN, f64::max);
        let min_odd = odds.iter().copied().fold(f64::MAX, f64::min);
        violations += usize::from(max_even > min_odd + slack(min_odd));
    }
    outcome(
        violations == 0 && worst_mismatch <= 1e-12,
        format!(
            "100 streams x depth 200, {violations} violations, convergents vs innermost-first {worst_mismatch:.1e}"
        ),
    )
}

fn even_truncation_slope() -> Outcome {
    let h = 1e-8;
    let p = FlowParams::new(ModelKind::NavierStokes, P, Q0, h, None).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        for dir in [Direction::Forward, Direction::Backward] {
            let t = TailSpec::new(&p, dir, 0.0).truncation(2 * k).unwrap();
            let slope = instab::contfrac::even_trunc_slope_at_zero(k, dir, &p).unwrap();
            worst = worst.max((t / h - slope).abs() / slope);
        }
    }
    outcome(worst <= 1e-5, format!("k=1..3 both tails, max rel err {worst:.1e}"))
}

fn alpha_reduction() -> Outcome {
    let ns = cf_root(&FlowParams::new(ModelKind::NavierStokes, P, Q0, 0.06, None).unwrap()).unwrap();
    let alpha = cf_root(&params(ModelKind::NsAlpha, Q0, 0.06, 1e-3)).unwrap();
    let d = (ns - alpha).abs();
    outcome(d <= 1e-4, format!("|λ_α − λ_NS| = {d:.2e}"))
}

fn nu0_behaviour() -> Outcome {
    let p = FlowParams::new(ModelKind::NavierStokes, P, Q0, 0.06, None).unwrap();
    let nu0 = nu0_estimate(&p, &Nu0Options::default()).unwrap().nu0;
    let spec = DispersionSpec::new(p, Truncation::adaptive(ROOT_TOL)).unwrap();
    let opts = RootOptions::with_tol(1e-10);
    let below = spec.with_nu(0.9 * nu0).unwrap().find_root(&opts);
    let above_spec = spec.with_nu(1.1 * nu0).unwrap();
    let above = above_spec.find_root(&opts);
    let negative = above_spec
        .scan_grid(&opts)
        .iter()
        .all(|&l| above_spec.value(l).unwrap() < 0.0);
    let pass = below.is_ok() && matches!(above, Err(Error::NoSignChange { .. })) && negative;
    outcome(
        pass,
        format!(
            "ν̂₀ = {nu0:.8}, root at 0.9ν̂₀: {}, 1.1ν̂₀: no sign change={}, negative on grid={negative}",
            below.map(|r| format!("{:.6}", r.lambda)).unwrap_or_else(|e| e.to_string()),
            matches!(above, Err(Error::NoSignChange { .. }))
        ),
    )
}

fn second_grade_limits() -> Outcome {
    let alpha = 0.5;
    let tails = |nu: f64| {
        let p = params(ModelKind::SecondGrade, Q0, nu, alpha);
        let f = eval_adaptive(&TailSpec::forward(&p, 0.0), 1e-10, 1 << 20).unwrap().value;
        let g = eval_adaptive(&TailSpec::backward(&p, 0.0), 1e-10, 1 << 20).unwrap().value;
        (f, g)
    };
    let values: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4].iter().map(|&nu| tails(nu)).collect();
    let monotone = values.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
        && values.iter().all(|&(f, g)| f < 1.0 && g < 1.0);
    let (f4, g4) = values[2];
    let gap = (1.0 - f4).max(1.0 - g4);
    outcome(
        monotone && gap < 0.05,
        format!(
            "α={alpha}: f,g at ν=1e-3 ({:.5}, {:.5}), at ν=1e-4 ({f4:.5}, {g4:.5}), gap {gap:.1e}",
            values[1].0, values[1].1
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("classification fidelity", classification),
        ("figure instance, depth-10 root", figure_instance),
        ("oracle triangle", oracle_triangle),
        ("eigenvector certification", eigenvector_certification),
        ("dynamic oracle", dynamic_oracle),
        ("bracketing property", bracketing),
        ("even-truncation slope", even_truncation_slope),
        ("alpha reduction", alpha_reduction),
        ("nu0 behaviour", nu0_behaviour),
        ("second-grade tail limits", second_grade_limits),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {} (total {:?})", i + 1, o.detail, start.elapsed());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
