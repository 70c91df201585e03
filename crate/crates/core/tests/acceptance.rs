//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use magbar::asymptotics::{airy_check, splitting_fit};
use magbar::bands::{
    derivative_boundary, derivative_fd, derivative_fh, effective_mass, figure_summary, find_minimum, monotonicity_report, trace,
    BandTable, TraceOptions,
};
use magbar::counting::{
    asymptotics_check, birman_schwinger_count, count_1d, count_1d_inertia, count_2d, model_matrix, reduced_potential,
    theorem51_constant, Count1dOptions, CountingCurve, DecayPotential, Grid2d, Profile, ReducedPotential, MAX_UNKNOWNS,
};
use magbar::fiber::{solve_band, solve_bands};
use magbar::localization::{envelope_check, strip_mass};
use magbar::mourre::{
    edge_current_fiber, mid_window, mourre_report, perturbation_budget, FiberState, ModeBasis, MourreOptions, MourreReport,
};
use magbar::{FieldStrength, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = fn(&mut Shared) -> Outcome;

fn field(b: f64) -> FieldStrength {
    FieldStrength::new(b).unwrap()
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn timed(limit: Option<u64>, start: Instant, detail: String, ok: bool) -> Outcome {
    let t = start.elapsed();
    let within = limit.is_none_or(|s| t <= Duration::from_secs(s));
    let msg = format!("{detail}; {:.1}s{}", t.as_secs_f64(), limit.map_or(String::new(), |s| format!(" (limit {s}s)")));
    if ok && within {
        Ok(msg)
    } else {
        Err(msg)
    }
}

struct Shared {
    windows: Vec<MourreReport>,
    trace: Option<BandTable>,
}

fn c1_ho_anchor(_: &mut Shared) -> Outcome {
    let start = Instant::now();
    let pairs = solve_bands(field(1.0), 0.0, 6, &SolverOptions::default()).map_err(fail)?;
    let worst = pairs.iter().map(|p| (p.omega - (2 * p.j - 1) as f64).abs() / (2 * p.j - 1) as f64).fold(0.0, f64::max);
    timed(Some(5), start, format!("max rel err {worst:.2e} (tol 1e-6)"), worst <= 1e-6)
}

fn c2_scaling(_: &mut Shared) -> Outcome {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let b = [1.0, 4.0, 25.0][rng.random_range(0..3)];
        let j = rng.random_range(1..=6);
        let k = rng.random_range(-5.0..5.0) * f64::sqrt(b);
        let w = solve_band(field(b), k, j, &opts).map_err(fail)?.omega;
        let w1 = solve_band(field(1.0), k / b.sqrt(), j, &opts).map_err(fail)?.omega;
        worst = worst.max((w - b * w1).abs() / (b * w1).abs());
    }
    timed(Some(30), start, format!("max rel err {worst:.2e} over 50 samples (tol 1e-6)"), worst <= 1e-6)
}

fn c3_derivatives(_: &mut Shared) -> Outcome {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut at) = (0.0f64, String::new());
    for _ in 0..100 {
        let b = [1.0, 4.0, 25.0][rng.random_range(0..3)];
        let j = rng.random_range(1..=6);
        let k = rng.random_range(-5.0..5.0) * f64::sqrt(b);
        let bf = field(b);
        let p = solve_band(bf, k, j, &opts).map_err(fail)?;
        let fh = derivative_fh(&p, bf, k).map_err(fail)?;
        let bd = derivative_boundary(&p, bf, k).map_err(fail)?;
        let fd = derivative_fd(bf, k, j, 1e-3 * b.sqrt(), &opts).map_err(fail)?;
        for (x, y) in [(fh, bd), (fh, fd), (bd, fd)] {
            let rel = (x - y).abs() / x.abs().max(y.abs()).max(1.0);
            if rel > worst {
                worst = rel;
                at = format!("b={b} j={j} k={k:.4} fh={fh:.6e} bd={bd:.6e} fd={fd:.6e}");
            }
        }
    }
    timed(Some(60), start, format!("max pairwise rel gap {worst:.2e} at {at} (tol 1e-4)"), worst <= 1e-4)
}

fn c4_minima(_: &mut Shared) -> Outcome {
    let opts = SolverOptions::default();
    let mut notes = Vec::new();
    let mut ok = true;
    for j in 1..=3 {
        let r = find_minimum(j, field(1.0), &opts).map_err(fail)?;
        let m = effective_mass(&r, field(1.0), &opts).map_err(fail)?;
        let kcap = ((4 * j - 3) as f64).sqrt();
        let elo = (2.0 * j as f64 - 3.0).max(0.0);
        let good = r.kappa > 0.0 && r.kappa < kcap && r.energy > elo && r.energy < (2 * j - 1) as f64 && m.relative_gap <= 1e-3;
        ok &= good;
        notes.push(format!("j={j}: kappa={:.6} E={:.6} beta={:.6} gap={:.1e}", r.kappa, r.energy, r.beta, m.relative_gap));
    }
    if ok {
        Ok(notes.join(", "))
    } else {
        Err(notes.join(", "))
    }
}

fn c5_airy(_: &mut Shared) -> Outcome {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut errs = std::collections::HashMap::new();
    for &k in &[-15.0, -20.0, -40.0] {
        for j in 1..=4 {
            let c = airy_check(field(1.0), k, j, &opts).map_err(fail)?;
            ok &= c.pass;
            errs.insert((k as i64, j), c.error);
        }
    }
    let target = 2f64.powf(2.0 / 3.0);
    let mut ratios = Vec::new();
    for j in 1..=4 {
        let r = errs[&(-20, j)] / errs[&(-40, j)];
        ok &= (r / target - 1.0).abs() <= 0.25;
        ratios.push(format!("{r:.3}"));
    }
    timed(Some(60), start, format!("bounds {}; ratios j=1..4 [{}] vs {target:.3}", if ok { "hold" } else { "violated" }, ratios.join(", ")), ok)
}

fn c6_ho(_: &mut Shared) -> Outcome {
    let start = Instant::now();
    let ks: Vec<f64> = (0..=12).map(|i| 3.0 + 0.25 * i as f64).collect();
    let fit = splitting_fit(field(1.0), 1, &ks, &SolverOptions::default()).map_err(fail)?;
    let used: Vec<_> = fit.samples.iter().filter(|s| s.used).collect();
    let positive = used.iter().all(|s| s.splitting > 0.0);
    let ok = positive && fit.fit.slope <= -0.2 && fit.fit.r_squared >= 0.99;
    timed(
        Some(30),
        start,
        format!("{} resolved samples positive={positive}, slope {:.4}, R^2 {:.5}", used.len(), fit.fit.slope, fit.fit.r_squared),
        ok,
    )
}

fn figure_trace(s: &mut Shared) -> Result<&BandTable, String> {
    if s.trace.is_none() {
        s.trace = Some(trace(field(1.0), -4.0, 6.0, 8, 401, &TraceOptions::default()).map_err(fail)?);
    }
    Ok(s.trace.as_ref().unwrap())
}

fn c7_monotonicity(s: &mut Shared) -> Outcome {
    let t = figure_trace(s)?;
    let rep = monotonicity_report(t);
    let detail = format!("{} samples, {} violations", t.ks.len(), rep.violations.len());
    if rep.is_clean() && t.ks.len() >= 400 {
        Ok(detail)
    } else {
        Err(format!("{detail}: {:?}", rep.violations.iter().take(3).collect::<Vec<_>>()))
    }
}

fn windows(s: &mut Shared) -> Result<&[MourreReport], String> {
    if s.windows.is_empty() {
        let opts = MourreOptions::default();
        for &(n, b) in &[(1usize, 1.0), (2, 1.0), (1, 4.0)] {
            let e = mid_window(n, field(b), &opts.solver).map_err(fail)?;
            s.windows.push(mourre_report(n, e, field(b), &opts).map_err(fail)?);
        }
    }
    Ok(&s.windows)
}

fn c8_mourre(s: &mut Shared) -> Outcome {
    let out = windows(s)?;
    let ok = out.iter().all(|r| r.delta0 > 0.0 && r.c_n > 0.0);
    let drift = (out[0].c_n - out[2].c_n).abs();
    let detail = out.iter().map(|r| format!("(n={}, b={}): delta0={:.5} c_n={:.6}", r.n(), r.b().value(), r.delta0, r.c_n)).collect::<Vec<_>>().join(", ");
    if ok && drift <= 1e-3 {
        Ok(format!("{detail}; |c_1(b=1) - c_1(b=4)| = {drift:.1e}"))
    } else {
        Err(format!("{detail}; drift {drift:.1e}"))
    }
}

fn c9_edge_current(s: &mut Shared) -> Outcome {
    let solver = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut violations, mut drift, mut tight) = (0usize, 0.0f64, f64::INFINITY);
    for r in windows(s)? {
        let basis = ModeBasis::build(r, 33, &solver).map_err(fail)?;
        for i in 0..200 {
            let st = FiberState::random(&basis, &mut rng);
            let c = edge_current_fiber(&st, &basis, r).map_err(fail)?;
            violations += usize::from(!c.pass);
            tight = tight.min(c.current / c.bound);
            let later = edge_current_fiber(&st.evolve(&basis, 0.5 + i as f64).map_err(fail)?, &basis, r).map_err(fail)?;
            drift = drift.max((later.current - c.current).abs());
        }
    }
    let detail = format!("600 states, {violations} violations, min J/bound {tight:.3}, evolution drift {drift:e}");
    if violations == 0 && drift == 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_budget(s: &mut Shared) -> Outcome {
    let mut budgets = Vec::new();
    for r in windows(s)? {
        budgets.push(perturbation_budget(r, 1.0).map_err(fail)?);
    }
    let ok = budgets.iter().all(|p| p.a_star > 0.0 && p.q_star > 0.0 && p.f_value < 0.5);
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
    let drift = rel(budgets[0].a_star, budgets[2].a_star).max(rel(budgets[0].q_star, budgets[2].q_star));
    let detail = budgets.iter().map(|p| format!("a*={:.3e} q*={:.3e} F={:.10}", p.a_star, p.q_star, p.f_value)).collect::<Vec<_>>().join(", ");
    if ok && drift <= 1e-3 {
        Ok(format!("{detail}; b-drift {drift:.1e}"))
    } else {
        Err(format!("{detail}; b-drift {drift:.1e}"))
    }
}

fn c11_localization(s: &mut Shared) -> Outcome {
    let solver = SolverOptions::default();
    let ws = windows(s)?;
    let base = &ws[0];
    let mut worst = 0.0f64;
    let mut bad = 0usize;
    let mut pairs = 0usize;
    for r in ws.iter().chain(std::iter::once(&base.rescaled(field(100.0)))) {
        let basis = ModeBasis::build(r, 17, &solver).map_err(fail)?;
        for band in &basis.bands {
            for (k, p) in band.ks.iter().zip(&band.pairs) {
                let c = envelope_check(p, basis.b, *k).map_err(fail)?;
                worst = worst.max(c.max_ratio);
                bad += usize::from(!c.envelope_ok);
                pairs += 1;
            }
        }
    }
    let r100 = mourre_report(1, 100.0 * base.window.e, field(100.0), &MourreOptions::default()).map_err(fail)?;
    let basis = ModeBasis::build(&r100, 17, &solver).map_err(fail)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut fails, mut margin) = (0usize, f64::INFINITY);
    for _ in 0..50 {
        let st = FiberState::random(&basis, &mut rng).normalized(&basis).map_err(fail)?;
        let m = strip_mass(&st, &basis, 0.25).map_err(fail)?;
        fails += usize::from(!m.pass);
        margin = margin.min(m.inside - m.bound);
    }
    let detail = format!("{pairs} fibers, max envelope ratio {worst:.4}, {bad} envelope failures; strip mass 50 states at b=100: {fails} failures, min margin {margin:.3e}");
    if bad == 0 && fails == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c12_counting_1d(_: &mut Shared) -> Outcome {
    let start = Instant::now();
    let q = ReducedPotential::model(1.0, 1.0, Profile::Soft).map_err(fail)?;
    let o = Count1dOptions::default();
    let mut scaled = Vec::new();
    for &l in &[1e-3f64, 3e-4, 1e-4] {
        scaled.push(l.sqrt() * count_1d(1.0, &q, l, &o).map_err(fail)?.count as f64);
    }
    let last = *scaled.last().unwrap();
    let trend = scaled.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut agree = 0;
    for _ in 0..20 {
        let n = rng.random_range(40..120);
        let h = rng.random_range(0.05..0.3);
        let m = rng.random_range(0.5..2.0);
        let lambda = rng.random_range(1e-3..0.5);
        let depth = rng.random_range(0.5..5.0);
        let qs: Vec<f64> = (0..n).map(|i| depth * rng.random::<f64>() * (-(i as f64 - n as f64 / 2.0).powi(2) / n as f64).exp()).collect();
        let sturm = model_matrix(m, &qs, h).count_below(-lambda);
        let bs = birman_schwinger_count(m, &qs, h, lambda).map_err(fail)?;
        let inertia = count_1d_inertia(m, &qs, h, lambda).map_err(fail)?;
        agree += usize::from(sturm == bs && bs == inertia);
    }
    let ok = (0.85..=1.15).contains(&last) && trend && agree == 20;
    timed(
        Some(120),
        start,
        format!("lambda^(1/2) N = [{}], monotone trend {trend}, Birman-Schwinger {agree}/20", scaled.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")),
        ok,
    )
}

fn c13_counting_2d(_: &mut Shared) -> Outcome {
    let start = Instant::now();
    let opts = SolverOptions::default();
    let b = field(1.0);
    let rec = find_minimum(1, b, &opts).map_err(fail)?;
    let ground = solve_band(b, rec.kappa, 1, &opts).map_err(fail)?;
    let v = DecayPotential::separable(1.0, 1.0, Profile::Algebraic, Profile::Soft).map_err(fail)?;
    let ys: Vec<f64> = (0..=200).map(|i| 10f64.powf(-1.0 + 5.0 * i as f64 / 200.0)).collect();
    let q = reduced_potential(&v, &ground, &ys).map_err(fail)?;
    let lambdas: Vec<f64> = (0..5).map(|i| rec.energy * 3e-2 * 10f64.powf(-(i as f64) / 4.0)).collect();
    let mut counts = Vec::new();
    let mut largest = 0;
    for &l in &lambdas {
        let g = Grid2d::for_lambda(b, &rec, q.ell, 1.0, l);
        largest = largest.max(g.unknowns());
        counts.push(count_2d(b, &v, l, &g, rec.kappa, false).map_err(fail)?.count);
    }
    let curve = CountingCurve::new(lambdas, counts.clone()).map_err(fail)?;
    let constant = theorem51_constant(1.0, q.ell, rec.beta).map_err(fail)?;
    let chk = asymptotics_check(&curve, 1.0, constant).map_err(fail)?;
    let ok = chk.exponent_gap <= 0.15 && (0.5..=2.0).contains(&chk.prefactor_ratio) && largest <= MAX_UNKNOWNS;
    timed(
        Some(600),
        start,
        format!(
            "counts {counts:?}, fitted exponent {:.4} (gap {:.4}), prefactor ratio {:.3}, max unknowns {largest}",
            chk.fitted_exponent, chk.exponent_gap, chk.prefactor_ratio
        ),
        ok,
    )
}

fn c14_figure(s: &mut Shared) -> Outcome {
    let t = figure_trace(s)?;
    let fig = figure_summary(t, &SolverOptions::default()).map_err(fail)?;
    let inside = fig.minima_in(0.0, 3.2);
    let gap = fig.max_parabola_gap();
    let detail = format!(
        "{} bands, decreasing at k=-4: {}, even-band minima in (0, 3.2): {inside} at [{}], max |omega - k^2| {gap:.1e}",
        fig.n_bands,
        fig.decreasing_at_left,
        fig.minima.iter().map(|m| format!("{:.4}", m.1)).collect::<Vec<_>>().join(", ")
    );
    if fig.n_bands == 8 && fig.decreasing_at_left && inside == 4 && fig.minima.len() == 4 && gap <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 14] = [
        ("HO anchor", c1_ho_anchor),
        ("scaling law", c2_scaling),
        ("derivative cross-check", c3_derivatives),
        ("minima and effective mass", c4_minima),
        ("Airy regime", c5_airy),
        ("HO regime splitting", c6_ho),
        ("monotonicity", c7_monotonicity),
        ("Mourre constants", c8_mourre),
        ("edge current", c9_edge_current),
        ("perturbation budget", c10_budget),
        ("localization", c11_localization),
        ("counting 1D", c12_counting_1d),
        ("counting 2D", c13_counting_2d),
        ("band figure", c14_figure),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut shared = Shared { windows: Vec::new(), trace: None };
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|w| *w == id || name.contains(w.as_str())) {
            continue;
        }
        match f(&mut shared) {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {d}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
