//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vlock_core::front::{
    build_front, fixed_point_residual, positivity_certificate, FrontSolution, FrontTolerances,
};
use vlock_core::linear::{decay_rates_for_speed, linear_spreading_speed, m_star};
use vlock_core::model::{LinearParams, RationalSpeed};
use vlock_core::regions::{
    asymptotic_c_bounds_1q, c_bounds, c_bounds_from, width_scaling_exponent,
};
use vlock_core::roots::char_roots;
use vlock_core::sim::SimConfig;
use vlock_core::spectral::{default_ring, lambda_max, point_spectrum_scan};
use vlock_core::sweeps::{compare_grid, linspace, plateaus, staircase, theory_intervals};

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

fn speed(p: u32, q: u32) -> RationalSpeed {
    RationalSpeed::new(p, q).unwrap()
}

const R_FRONT: f64 = 1.3;
const FOUR_SPEEDS: [(u32, u32); 4] = [(1, 2), (1, 3), (2, 5), (3, 8)];

/// `m = m*/2` at `r = 1.3`.
fn half_tip(s: RationalSpeed) -> LinearParams {
    LinearParams::new(R_FRONT, m_star(R_FRONT, s).unwrap().m / 2.0).unwrap()
}

fn c1_spreading_speed() -> Outcome {
    let t = Instant::now();
    let lin = linear_spreading_speed(&LinearParams::new(1.1, 0.1).unwrap()).unwrap();
    let dt = t.elapsed();
    let pass = (lin.s_lin - 0.1443).abs() <= 5e-4 && dt < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "s_lin(1.1, 0.1) = {:.6} (want 0.1443 +- 5e-4) in {dt:.2?}",
            lin.s_lin
        ),
    )
}

fn c2_front_fixed_points() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, q) in FOUR_SPEEDS {
        let s = speed(p, q);
        let t = Instant::now();
        let lp = half_tip(s);
        let front = build_front(&lp, s).unwrap();
        let b = c_bounds_from(&front.solution).unwrap();
        let params = lp.with_threshold(0.5 * (b.c_min + b.c_max)).unwrap();
        let residual = fixed_point_residual(&front, &params, s).unwrap();
        let cert = positivity_certificate(&front);
        let sum: Complex64 = front.solution.coefficients.ks.iter().sum();
        let dt = t.elapsed();
        let ok = residual < 1e-10
            && cert.positive
            && cert.tail_certified
            && (sum - 1.0).norm() <= 1e-12
            && dt < Duration::from_secs(1);
        pass &= ok;
        parts.push(format!(
            "{s}: res {residual:.1e}, |sum k - 1| {:.1e}, i* {:?}, {dt:.1?}",
            (sum - 1.0).norm(),
            cert.i_star
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Random interior draw with `q - p = n`.
fn draw_with_n(rng: &mut ChaCha8Rng, n: u32) -> (LinearParams, RationalSpeed) {
    loop {
        let r = rng.random_range(1.05..1.9);
        let q = rng.random_range(n + 1..=n + 12);
        // Non-coprime pairs are rejected by the constructor.
        let Ok(s) = RationalSpeed::new(q - n, q) else {
            continue;
        };
        let ms = m_star(r, s).unwrap().m;
        let m = ms * rng.random_range(0.2..0.9);
        return (LinearParams::new(r, m).unwrap(), s);
    }
}

/// Random interior draw with `q - p ≤ max_n`.
fn draw(rng: &mut ChaCha8Rng, max_n: u32) -> (LinearParams, RationalSpeed) {
    let n = rng.random_range(1..=max_n);
    draw_with_n(rng, n)
}

fn c3_coefficient_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst_agreement: f64 = 0.0;
    let mut worst_system: f64 = 0.0;
    let mut max_n = 0;
    let mut failures = Vec::new();
    // Cycle through every N so each size is covered.
    for i in 0..50 {
        let (lp, s) = draw_with_n(&mut rng, 1 + i % 12);
        max_n = max_n.max(s.n());
        match FrontSolution::solve(&lp, s) {
            Ok(sol) => {
                worst_agreement = worst_agreement.max(sol.coefficients.agreement);
                // The product-formula weights must solve Σ_j k_j ζ_j^n = 1 for n < N.
                let ks = &sol.coefficients.ks;
                let scale = ks.iter().map(|k| k.norm()).fold(0.0, f64::max);
                for n in 0..s.n() as i32 {
                    let row: Complex64 = ks
                        .iter()
                        .zip(&sol.roots.zetas)
                        .map(|(k, z)| k * z.powi(n))
                        .sum();
                    let mag: f64 = ks
                        .iter()
                        .zip(&sol.roots.zetas)
                        .map(|(k, z)| (k * z.powi(n)).norm())
                        .sum();
                    worst_system = worst_system.max((row - 1.0).norm() / mag.max(scale));
                }
            }
            Err(e) => failures.push(format!("r={:.3} m={:.4} {s}: {e}", lp.r(), lp.m())),
        }
    }
    let pass = failures.is_empty() && worst_agreement <= 1e-10 && worst_system <= 1e-10;
    let mut detail = format!(
        "50 draws, N up to {max_n}: max product/LU gap {worst_agreement:.1e}, max Vandermonde residual {worst_system:.1e}"
    );
    if !failures.is_empty() {
        detail += &format!("; {} failed, first: {}", failures.len(), failures[0]);
    }
    outcome(pass, detail)
}

fn c4_asymptotic_slopes() -> Outcome {
    let m = 1e-4;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for r in [1.1, 1.2, 1.5] {
        for q in 2..=6 {
            let b = c_bounds(&LinearParams::new(r, m).unwrap(), speed(1, q)).unwrap();
            let (lo, hi) = asymptotic_c_bounds_1q(r, q);
            let e = (b.c_min / m / lo - 1.0)
                .abs()
                .max((b.c_max / m / hi - 1.0).abs());
            worst = worst.max(e);
            pass &= e <= 0.01;
        }
    }
    outcome(pass, format!("q = 2..6, r in {{1.1, 1.2, 1.5}}, m = 1e-4: worst relative slope error {worst:.2e} (limit 1e-2)"))
}

fn c5_width_scaling() -> Outcome {
    let cases = [(1, 3, 1.2, 0.1), (2, 5, 1.3, 0.1), (3, 8, 1.3, 0.15)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, q, r, tol) in cases {
        let slope = width_scaling_exponent(r, speed(p, q), (1e-4, 1e-2), 12).unwrap();
        pass &= (slope - p as f64).abs() <= tol;
        parts.push(format!("{p}/{q} (r={r}): {slope:.4} vs {p} +- {tol}"));
    }
    outcome(pass, parts.join("; "))
}

fn c6_root_count() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let (lp, s) = draw(&mut rng, 19);
        let lin = linear_spreading_speed(&lp).unwrap();
        assert!(s.value() > lin.s_lin);
        let pair = decay_rates_for_speed(&lp, s).unwrap();
        // char_roots itself rejects residuals above 1e-9.
        let roots = match char_roots(&lp, s, Complex64::new(1.0, 0.0)) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("{s} r={:.3} m={:.4}: {e}", lp.r(), lp.m()));
                continue;
            }
        };
        let inside: Vec<Complex64> = roots
            .iter()
            .copied()
            .filter(|g| g.norm() <= pair.gamma_s * (1.0 + 1e-9))
            .collect();
        let closed = inside.iter().all(|z| {
            z.im == 0.0
                || inside
                    .iter()
                    .any(|w| (*w - z.conj()).norm() <= 1e-9 * z.norm())
        });
        if inside.len() != s.n() as usize || !closed {
            bad.push(format!(
                "{s} r={:.3} m={:.4}: {} inside, closed {closed}",
                lp.r(),
                lp.m(),
                inside.len()
            ));
        }
    }
    let detail = match bad.first() {
        None => {
            "100 draws: exactly q - p roots inside gamma_s, conjugate-closed, residuals within 1e-9"
                .to_string()
        }
        Some(first) => format!("{} of 100 draws failed, first: {first}", bad.len()),
    };
    outcome(bad.is_empty(), detail)
}

fn c7_spectrum_normalization() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, q) in FOUR_SPEEDS {
        let s = speed(p, q);
        let lp = half_tip(s);
        let pair = decay_rates_for_speed(&lp, s).unwrap();
        let at_s = lambda_max(&lp, s, pair.gamma_s);
        let at_w = lambda_max(&lp, s, pair.gamma_w);
        let mid = lambda_max(&lp, s, (pair.gamma_s * pair.gamma_w).sqrt());
        pass &= (at_s - 1.0).abs() <= 1e-10 && (at_w - 1.0).abs() <= 1e-10 && mid < 1.0;
        parts.push(format!(
            "{s}: |l(gs)-1| {:.1e}, |l(gw)-1| {:.1e}, l(mean) {mid:.4}",
            (at_s - 1.0).abs(),
            (at_w - 1.0).abs()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c8_point_spectrum() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, q) in [(1, 2), (1, 3), (2, 5)] {
        let s = speed(p, q);
        let verdicts = point_spectrum_scan(&half_tip(s), s, &default_ring()).unwrap();
        let excluded = verdicts.iter().filter(|v| v.excluded).count();
        pass &= excluded == 32;
        parts.push(format!("{s}: {excluded}/32 excluded"));
    }
    outcome(pass, parts.join("; "))
}

fn desk_sim() -> SimConfig {
    SimConfig {
        lattice_size: 300,
        transient_generations: 5_000,
        measure_generations: 5_000,
        ..SimConfig::default()
    }
}

fn c9_theory_vs_simulation() -> Outcome {
    let t = Instant::now();
    let r = 1.3;
    let s = speed(1, 3);
    let ms = m_star(r, s).unwrap().m;
    // The band spans m in (0, m*); cover 0.1 m* .. 1.5 m* and 0.5x .. 1.5x its c extent.
    let m_grid = linspace(0.1 * ms, 1.5 * ms, 20);
    let tol = FrontTolerances::default();
    let edges: Vec<_> = m_grid
        .iter()
        .filter_map(|&m| c_bounds(&LinearParams::new(r, m).unwrap(), s).ok())
        .collect();
    let lo = edges.iter().map(|b| b.c_min).fold(f64::INFINITY, f64::min);
    let hi = edges.iter().map(|b| b.c_max).fold(0.0, f64::max);
    let c_grid = linspace(0.5 * lo, (1.5 * hi).min(1.0 / r), 20);
    let sim = desk_sim();
    let cmp = compare_grid(r, s, &m_grid, &c_grid, &sim, sim.default_tolerance(), &tol).unwrap();
    let dt = t.elapsed();
    let agreement = cmp.agreement();
    let off_edge = cmp.disagreements().filter(|c| !c.boundary_adjacent).count();
    let errors = cmp.cells.iter().filter(|c| c.error.is_some()).count();
    let pass = agreement >= 0.95 && off_edge == 0 && errors == 0 && dt < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "20x20 grid, r = 1.3, s = 1/3: agreement {:.2}% ({} disagreements, {off_edge} away from band edges, {errors} sim errors) in {dt:.1?}",
            100.0 * agreement,
            cmp.disagreements().count()
        ),
    )
}

fn c10_staircase() -> Outcome {
    let (r, c) = (1.2, 0.4);
    let sim = desk_sim();
    let grid = linspace(0.01, 0.9, 200);
    let points = staircase(r, c, &grid, &sim);
    let fine = linspace(0.01, 0.9, 2000);
    let mut pass = points.iter().all(|p| p.error.is_none());
    let mut parts = Vec::new();
    for (p, q) in [(1, 3), (2, 5), (1, 2)] {
        let s = speed(p, q);
        let sim_runs = plateaus(&points, s, sim.default_tolerance(), 2);
        let theory = theory_intervals(r, c, s, &fine, &FrontTolerances::default());
        let overlaps = sim_runs
            .iter()
            .any(|&(a, b)| theory.iter().any(|&(x, y)| a <= y && x <= b));
        pass &= overlaps;
        let show = |v: &[(f64, f64)]| {
            v.iter()
                .map(|(a, b)| format!("[{a:.3}, {b:.3}]"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        parts.push(format!(
            "{s}: sim {} theory {}",
            show(&sim_runs),
            show(&theory)
        ));
    }
    outcome(pass, parts.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("linear spreading speed", c1_spreading_speed),
        ("front fixed points", c2_front_fixed_points),
        ("coefficient cross-check", c3_coefficient_cross_check),
        ("asymptotic band slopes", c4_asymptotic_slopes),
        ("band width scaling", c5_width_scaling),
        ("characteristic root count", c6_root_count),
        ("spectrum normalization", c7_spectrum_normalization),
        ("point-spectrum exclusion", c8_point_spectrum),
        ("theory versus simulation", c9_theory_vs_simulation),
        ("staircase plateaus", c10_staircase),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", i + 1, result.detail);
        failed += (!result.pass) as usize;
    }
    println!("acceptance: {}/10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
