//! Acceptance report: one PASS/FAIL line per criterion, with the measured
//! numbers underneath. Set ACCEPTANCE_STRICT=1 to turn any FAIL into a
//! non-zero exit status.

use std::process::ExitCode;
use std::time::Instant;

use imbalance_werm::effdim::{effective_dim, FeatureMatrix};
use imbalance_werm::sim::{evaluate, fit_square_with_weights, generate};
use imbalance_werm::solver::{
    compare_weighted_unweighted, rho_tilde, solve_downsampled, solve_equal_error_square, solve_general, solve_square,
    solve_unweighted_square, wce_quasiconvexity_check, AsymptoticSolution, ProblemSpec,
};
use imbalance_werm::sweep::{run_simulate, Mode, SweepConfig};
use imbalance_werm::{moreau_envelope, q_function, Grid, LossModel};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Report {
    passed: usize,
    failed: Vec<&'static str>,
}

impl Report {
    fn criterion(&mut self, name: &'static str, checks: Vec<(bool, String)>) {
        let ok = checks.iter().all(|(ok, _)| *ok);
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        for (ok, detail) in checks {
            println!("       [{}] {detail}", if ok { "ok" } else { "FAILED" });
        }
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(name);
        }
    }
}

fn check(ok: bool, detail: String) -> (bool, String) {
    (ok, detail)
}

fn l2(r: &[f64; 4]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The 5 x 5 x 5 grid over `s`, `delta` and `pi_plus`.
fn grid() -> Vec<ProblemSpec> {
    let mut out = Vec::new();
    for s in Grid::linear(0.5, 4.0, 5).values() {
        for delta in Grid::linear(0.05, 0.9, 5).values() {
            for pp in Grid::linear(0.05, 0.5, 5).values() {
                out.push(ProblemSpec::square(s, pp, delta).expect("grid inside the domain"));
            }
        }
    }
    out
}

fn max_coordinate_gap(a: &AsymptoticSolution, b: &AsymptoticSolution) -> f64 {
    a.as_array().iter().zip(b.as_array()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn closed_form_certification(report: &mut Report) {
    let t = Instant::now();
    let mut worst = 0.0_f64;
    for spec in grid() {
        worst = worst.max(l2(&solve_unweighted_square(&spec).expect("closed form").residuals));
    }
    let elapsed = t.elapsed().as_secs_f64();
    report.criterion(
        "closed-form certification",
        vec![
            check(worst < 1e-9, format!("max residual norm {worst:.2e} over 125 points (< 1e-9)")),
            check(elapsed < 1.0, format!("runtime {:.3} s (< 1 s)", elapsed)),
        ],
    );
}

fn equal_error_certification(report: &mut Report) {
    let (mut points, mut worst_res, mut worst_wce, mut nonzero_b) = (0, 0.0_f64, 0.0_f64, 0);
    for spec in grid().into_iter().filter(|s| s.delta() < 2.0 * s.pi_plus()) {
        let ee = solve_equal_error_square(&spec).expect("delta < 2 pi_plus");
        points += 1;
        worst_res = worst_res.max(l2(&ee.solution.residuals));
        if ee.solution.b != 0.0 {
            nonzero_b += 1;
        }
        let (s, d) = (spec.s(), ee.big_delta);
        let formula = q_function(s * s * (1.0 - d).sqrt() / (d + s * s).sqrt());
        let from_solution = ee.solution.risks(s).expect("risks").wce;
        worst_wce = worst_wce.max((ee.wce - formula).abs()).max((from_solution - formula).abs());
    }
    let ee = solve_equal_error_square(&ProblemSpec::square(2.0, 0.2, 0.2).expect("valid")).expect("feasible");
    report.criterion(
        "equal-error certification",
        vec![
            check(
                worst_res < 1e-9,
                format!("max residual norm {worst_res:.2e} over {points} points with delta < 2 pi_plus (< 1e-9)"),
            ),
            check(nonzero_b == 0, format!("b = 0 exactly at {} of {points} points", points - nonzero_b)),
            check(
                worst_wce <= 1e-12,
                format!("reported and recomputed WCE vs the closed form: max gap {worst_wce:.1e} (<= 1e-12)"),
            ),
            check(ee.rho_tilde == 7.0, format!("rho_tilde at (2, 0.2, 0.2) = {:?} (exactly 7)", ee.rho_tilde)),
            check(
                (ee.wce - 0.0551).abs() <= 0.0005,
                format!("WCE at (2, 0.2, 0.2) = {:.5} (0.0551 +- 0.0005)", ee.wce),
            ),
        ],
    );
}

fn solver_oracle_equivalence(report: &mut Report) {
    let t = Instant::now();
    let (mut compared, mut worst, mut failures) = (0, 0.0_f64, Vec::new());
    for spec in grid() {
        let mut cases = vec![(1.0, Some(solve_unweighted_square(&spec).expect("closed form")))];
        if spec.delta() < 2.0 * spec.pi_plus() {
            let ee = solve_equal_error_square(&spec).expect("feasible");
            cases.push((ee.rho_tilde, Some(ee.solution)));
        }
        cases.push((5.0, None));
        for (rho, closed) in cases {
            let at = spec.with_rho(rho).expect("rho > 0");
            let explicit = solve_square(&at).expect("square solver");
            match solve_general(&at) {
                Ok(general) => {
                    compared += 1;
                    worst = worst.max(max_coordinate_gap(&general, &explicit));
                    if let Some(c) = closed {
                        worst = worst.max(max_coordinate_gap(&general, &c));
                    }
                }
                Err(e) => {
                    failures.push(format!("({}, {}, {}, rho {rho}): {e}", spec.s(), spec.pi_plus(), spec.delta()))
                }
            }
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    let mut checks = vec![
        check(
            worst < 1e-6,
            format!("max coordinate gap {worst:.2e} over {compared} solves at rho = 1, rho_tilde and 5 (< 1e-6)"),
        ),
        check(failures.is_empty(), format!("{} general solves failed", failures.len())),
        check(elapsed < 30.0, format!("runtime {elapsed:.2} s (< 30 s)")),
    ];
    for f in failures.iter().take(5) {
        checks.push(check(false, f.clone()));
    }
    report.criterion("solver-oracle equivalence", checks);
}

fn monte_carlo_concentration(report: &mut Report) {
    let t = Instant::now();
    let mut config = SweepConfig::new(Mode::Simulate);
    config.grid = Some(Grid::linear(1.0, 7.0, 3));
    config.n = 4000;
    config.seeds = (0..10).collect();
    let rows = run_simulate(&config).expect("simulation runs");
    let elapsed = t.elapsed().as_secs_f64();

    let mut checks = Vec::new();
    for rho in [1.0, 4.0, 7.0] {
        let theory = rows.iter().find(|r| r.kind == "theory" && r.rho == rho).expect("theory row");
        let mean = rows.iter().find(|r| r.kind == "mean" && r.rho == rho).expect("mean row");
        let std = rows.iter().find(|r| r.kind == "std" && r.rho == rho).expect("std row");
        let pairs = [("alpha", theory.alpha, mean.alpha), ("gamma", theory.gamma, mean.gamma), ("b", theory.b, mean.b)];
        for (name, want, got) in pairs {
            let (want, got) = (want.expect("solved"), got.expect("simulated"));
            // the absolute tolerance takes over where 3% of the prediction is
            // smaller than the ten-seed noise could ever resolve
            let near_zero = name == "b" && want.abs() < 0.05;
            let (ok, tol) = if near_zero {
                ((got - want).abs() <= 0.03, "0.03 absolute".to_string())
            } else {
                ((got - want).abs() <= 0.03 * want.abs(), format!("3% = {:.4}", 0.03 * want.abs()))
            };
            let se = match name {
                "alpha" => std.alpha,
                "gamma" => std.gamma,
                _ => std.b,
            }
            .expect("spread")
                / 10f64.sqrt();
            checks.push(check(
                ok,
                format!(
                    "rho {rho}: {name} mean {got:+.5} vs {want:+.5}, gap {:.4} ({:.1} standard errors), tolerance {tol}",
                    (got - want).abs(),
                    (got - want).abs() / se
                ),
            ));
        }
        let gap_plus = (mean.risk_plus.expect("risk") - theory.risk_plus.expect("risk")).abs();
        let gap_minus = (mean.risk_minus.expect("risk") - theory.risk_minus.expect("risk")).abs();
        checks.push(check(
            gap_plus <= 0.01 && gap_minus <= 0.01,
            format!("rho {rho}: per-class risk gaps {gap_plus:.4} / {gap_minus:.4} (<= 0.01)"),
        ));
    }
    let failed_seeds = rows.iter().filter(|r| r.kind == "seed" && !r.feasible).count();
    checks.push(check(failed_seeds == 0, format!("{failed_seeds} of 30 fits failed")));
    checks.push(check(elapsed < 120.0, format!("runtime {elapsed:.1} s (< 2 min)")));
    report.criterion("Monte-Carlo concentration", checks);
}

fn crossing_behaviour(report: &mut Report) {
    let base = ProblemSpec::square(2.0, 0.2, 0.2).expect("valid");
    let specs: Vec<ProblemSpec> =
        Grid::linear(1.0, 14.0, 53).values().into_iter().map(|r| base.with_rho(r).expect("rho > 0")).collect();
    let q = wce_quasiconvexity_check(&specs).expect("square solver");
    let step = 13.0 / 52.0;
    let crossing = q.crossing_index.map(|i| (q.rhos[i], q.rhos[i + 1]));
    let near_seven = crossing.is_some_and(|(a, b)| a - step <= 7.0 && 7.0 <= b + step);
    let wce_at =
        |rho: f64| solve_square(&base.with_rho(rho).expect("rho > 0")).expect("solves").risks(2.0).expect("risks").wce;
    let (wce_tilde, wce_prior) = (wce_at(7.0), wce_at(4.0));
    let plus_first_rise = q.plus_increases.first().map(|&i| q.rhos[i]);

    let wide = ProblemSpec::square(2.0, 0.2, 0.5).expect("valid");
    let wide_specs: Vec<ProblemSpec> =
        Grid::log(1.0, 1000.0, 61).values().into_iter().map(|r| wide.with_rho(r).expect("rho > 0")).collect();
    let w = wce_quasiconvexity_check(&wide_specs).expect("square solver");
    let always_above = w.risks.iter().all(|r| r.risk_plus > r.risk_minus);

    report.criterion(
        "crossing behaviour",
        vec![
            check(
                q.plus_increases.is_empty(),
                format!(
                    "R+ non-increasing over 53 points: R+ rises on {} of 52 steps, first after rho = {:?}, lowest at rho = {}",
                    q.plus_increases.len(),
                    plus_first_rise,
                    q.rhos[(0..q.rhos.len()).min_by(|&a, &b| q.risks[a].risk_plus.total_cmp(&q.risks[b].risk_plus)).expect("non-empty")]
                ),
            ),
            check(q.minus_decreases.is_empty(), format!("R- non-decreasing: {} decreasing steps", q.minus_decreases.len())),
            check(near_seven, format!("risks cross between rho {crossing:?}, within one step ({step}) of 7")),
            check(wce_tilde < wce_prior, format!("WCE(rho_tilde = 7) {wce_tilde:.5} < WCE(4) {wce_prior:.5}")),
            check(
                w.crossing_index.is_none() && always_above,
                format!("delta 0.5: no crossing on 61 log-spaced rho up to 1e3 (R+ > R- everywhere: {always_above})"),
            ),
        ],
    );
}

fn downsampling_dominance(report: &mut Report) {
    let s = 2.0;
    let deltas = Grid::log(1e-4, 0.399, 80).values();
    let (mut dominated, mut balanced, mut gaps) = (true, 0.0_f64, Vec::new());
    for &delta in &deltas {
        let spec = ProblemSpec::square(s, 0.2, delta).expect("valid");
        let ee = solve_equal_error_square(&spec).expect("feasible");
        let ds = solve_downsampled(&spec).expect("feasible");
        let rw = ee.solution.risks(s).expect("risks");
        let rd = ds.solution.risks(s).expect("risks");
        balanced = balanced.max((rw.risk_plus - rw.risk_minus).abs()).max((rd.risk_plus - rd.risk_minus).abs());
        dominated &= ee.wce <= rd.wce;
        gaps.push(rd.wce - ee.wce);
    }
    let growing = gaps.windows(2).all(|g| g[1] > g[0]);
    let small: Vec<(f64, f64)> = deltas.iter().copied().zip(gaps.iter().copied()).filter(|(d, _)| *d < 0.01).collect();
    let small_max = small.iter().map(|p| p.1).fold(0.0, f64::max);
    let first_above = small.iter().find(|p| p.1 >= 1e-4).map(|p| p.0);
    // the gap vanishes linearly in delta: gap / delta stays bounded as delta -> 0
    let slope_small = gaps[0] / deltas[0];
    report.criterion(
        "downsampling dominance",
        vec![
            check(dominated, format!("WCE(weighted) <= WCE(downsampled) at all {} delta in [1e-4, 0.399]", deltas.len())),
            check(
                small_max < 1e-4,
                format!(
                    "gap < 1e-4 for delta < 0.01: largest gap {small_max:.2e}, first reaches 1e-4 at delta = {first_above:?}; gap / delta -> {slope_small:.4} as delta -> 0"
                ),
            ),
            check(growing, "gap strictly increasing in delta".into()),
            check(balanced < 1e-10, format!("max |R+ - R-| over both methods {balanced:.1e} (< 1e-10)")),
        ],
    );
}

fn separation_reversal(report: &mut Report) {
    let at = |s: f64| compare_weighted_unweighted(&ProblemSpec::square(s, 0.2, 0.2).expect("valid"));
    let wins2 = at(2.0).map(|v| v.weighted_wins);
    let wins4 = at(4.0).map(|v| v.weighted_wins);
    let mut agree = 0;
    let mut disagreements = Vec::new();
    for s in Grid::linear(0.5, 6.0, 40).values() {
        match at(s) {
            Ok(v) if v.weighted_wins == v.threshold_verdict => agree += 1,
            Ok(v) => disagreements.push(format!("s {s}: {v:?}")),
            Err(e) => disagreements.push(format!("s {s}: {e}")),
        }
    }
    let mut checks = vec![
        check(matches!(wins2, Ok(true)), format!("s = 2: weighted wins = {wins2:?}")),
        check(matches!(wins4, Ok(false)), format!("s = 4: weighted wins = {wins4:?}")),
        check(
            agree == 40,
            format!("threshold verdict agrees with the direct comparison at {agree} of 40 s in [0.5, 6]"),
        ),
    ];
    checks.extend(disagreements.into_iter().map(|d| check(false, d)));
    report.criterion("separation reversal", checks);
}

fn moreau_suite(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let points: Vec<(f64, f64)> =
        (0..1000).map(|_| (rng.random_range(-20.0..20.0), 10f64.powf(rng.random_range(-3.0..3.0)))).collect();
    let mut checks = Vec::new();
    for (loss, tol) in [(LossModel::Square, 4.0 * f64::EPSILON), (LossModel::Logistic, 1e-6)] {
        let (mut identity, mut prox, mut lower, mut monotone) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        let (mut fd_bad, mut fd_worst) = (0, 0.0_f64);
        for &(x, lambda) in &points {
            let e = moreau_envelope(&loss, x, lambda).expect("finite input");
            let scale = 1.0 + e.d_lambda.abs();
            identity = identity.max((e.d_lambda + 0.5 * e.d_x * e.d_x).abs() / scale);
            // the prox attains the envelope and satisfies the optimality condition
            let attained = loss.evaluate(e.prox) + (e.prox - x).powi(2) / (2.0 * lambda);
            let optimality = (e.prox - x + lambda * loss.derivative(e.prox)).abs() / (1.0 + x.abs() + lambda);
            prox = prox.max((attained - e.value).abs() / (1.0 + e.value.abs())).max(optimality);
            lower = lower.max((e.value - loss.evaluate(x)) / (1.0 + loss.evaluate(x)));
            let wider = moreau_envelope(&loss, x, 2.0 * lambda).expect("finite input");
            monotone = monotone.max((wider.value - e.value) / (1.0 + e.value.abs()));

            let h = 1e-5;
            let m = |x: f64, l: f64| moreau_envelope(&loss, x, l).expect("finite input").value;
            let dx = |x: f64| moreau_envelope(&loss, x, lambda).expect("finite input").d_x;
            let hl = h * lambda;
            let fds = [
                (e.d_x, (m(x + h, lambda) - m(x - h, lambda)) / (2.0 * h)),
                (e.d_lambda, (m(x, lambda + hl) - m(x, lambda - hl)) / (2.0 * hl)),
                (e.d_xx, (dx(x + h) - dx(x - h)) / (2.0 * h)),
            ];
            for (analytic, fd) in fds {
                // relative, floored where the derivative is below the
                // roundoff of the difference quotient itself
                let rel = (analytic - fd).abs() / fd.abs().max(1e-3);
                fd_worst = fd_worst.max(rel);
                if rel > 1e-4 {
                    fd_bad += 1;
                }
            }
        }
        let name = loss.name().to_owned();
        checks.push(check(
            identity <= tol,
            format!("{name}: d_lambda = -d_x^2 / 2, max relative gap {identity:.1e} (<= {tol:.1e})"),
        ));
        checks.push(check(
            prox <= tol,
            format!("{name}: prox attains the envelope and is stationary, max gap {prox:.1e}"),
        ));
        checks.push(check(lower <= tol, format!("{name}: M <= l, max excess {lower:.1e}")));
        checks.push(check(monotone <= tol, format!("{name}: M non-increasing in lambda, max increase {monotone:.1e}")));
        checks.push(check(fd_bad == 0, format!("{name}: finite-difference checks of d_x, d_lambda, d_xx: {fd_bad} of 3000 above 1e-4, worst {fd_worst:.1e}")));
    }
    report.criterion("Moreau property suite (1000 random points per loss)", checks);
}

fn gaussian(n: usize, sd: &[f64], seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, sd.len(), |_, j| sd[j] * rng.sample::<f64, _>(StandardNormal))
}

fn effective_dimension(report: &mut Report) {
    let mut sd = vec![100f64.sqrt(), 10f64.sqrt(), 1.0];
    sd.extend(std::iter::repeat_n(0.1, 20));
    let data = gaussian(20_000, &sd, 4);
    let dim = |m: DMatrix<f64>| {
        effective_dim(&FeatureMatrix::new(m).expect("valid"), 0.99).expect("non-degenerate").effective_dim
    };
    let diag = dim(data.clone());
    let line = dim(DMatrix::from_fn(200, 5, |i, j| (i as f64 - 50.0) * [1.0, -2.0, 0.5, 3.0, 0.1][j] + 4.0));
    let rot = gaussian(sd.len(), &vec![1.0; sd.len()], 9).qr().q();
    let rotated = dim(&data * rot);
    let scaled = dim(data * 1e3);
    report.criterion(
        "effective dimension",
        vec![
            check(diag == 3, format!("diag(100, 10, 1, 0.01 x 20) at threshold 0.99: {diag} (3)")),
            check(line == 1, format!("rank-one data: {line} (1)")),
            check(rotated == diag && scaled == diag, format!("rotated {rotated}, scaled {scaled} (unchanged)")),
        ],
    );
}

/// Image-feature experiments are not reproduced; the workflow that replaces
/// them is run end to end on synthetic features instead.
fn feature_workflow(report: &mut Report) {
    let n = 2000;
    let mut sd = vec![3.0, 2.0, 1.0];
    sd.extend(std::iter::repeat_n(0.02, 37));
    let features = FeatureMatrix::new(gaussian(n, &sd, 11)).expect("valid");
    let d_eff = effective_dim(&features, 0.99).expect("non-degenerate").effective_dim;
    let delta = d_eff as f64 / n as f64;
    let pi_plus = 0.1;
    let rho = rho_tilde(1.0, pi_plus, delta);

    // reweight a Gaussian problem at that ratio and compare class errors
    let spec = ProblemSpec::square(1.0, pi_plus, 0.1).expect("valid");
    let data = generate(&spec, n, 3).expect("generates");
    let rt = rho_tilde(1.0, pi_plus, 0.1).expect("feasible");
    let spread = |w_plus: f64| {
        let fit = fit_square_with_weights(&data, &data.class_weights(w_plus, 1.0)).expect("fits");
        let r = evaluate(&fit, data.mu()).expect("risks");
        (r.risk_plus - r.risk_minus).abs()
    };
    let (before, after) = (spread(1.0), spread(rt));
    report.criterion(
        "image-feature experiments (not reproduced; substitute workflow)",
        vec![
            check(
                d_eff == 3 && rho.is_ok(),
                format!("effdim {d_eff} -> delta {delta} -> rho_tilde {:.4}", rho.as_ref().map_or(f64::NAN, |r| *r)),
            ),
            check(after < before, format!("reweighting by rho_tilde narrows |R+ - R-| from {before:.4} to {after:.4}")),
        ],
    );
}

fn main() -> ExitCode {
    let mut report = Report { passed: 0, failed: Vec::new() };
    closed_form_certification(&mut report);
    equal_error_certification(&mut report);
    solver_oracle_equivalence(&mut report);
    monte_carlo_concentration(&mut report);
    crossing_behaviour(&mut report);
    downsampling_dominance(&mut report);
    separation_reversal(&mut report);
    moreau_suite(&mut report);
    effective_dimension(&mut report);
    feature_workflow(&mut report);
    println!(
        "acceptance: {} passed, {} failed{}",
        report.passed,
        report.failed.len(),
        if report.failed.is_empty() { String::new() } else { format!(" ({})", report.failed.join(", ")) }
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !report.failed.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
