//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Oracles here are computed independently of the library.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qcayley::cayley::{conditioned_error, residual, residual_scale};
use qcayley::hus::{ratio_burn_in, ratio_limit, term_ratio_profile};
use qcayley::{
    certify, eta_half_s_divergence, product_solution, synthesize, tail_sum_psi, two_cycle,
    variation_sum, CayleyParams, Complex64, ParamGrid, PerturbationKind, PerturbationSpec,
    ScaledComplex,
};
use qcayley_cli::SweepRow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

const SWEEP_SEED: u64 = 20_240_917;
const SWEEP_DRAWS: usize = 1000;
const SWEEP_EPSILON: f64 = 0.1;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qcayley(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qcayley"))
        .args(args)
        .env_remove("QCAYLEY_KMAX")
        .output()
        .expect("qcayley binary runs")
}

fn within(label: &str, elapsed: Duration, limit: Duration) -> Check {
    if elapsed < limit {
        Ok(format!("{:.2} s", elapsed.as_secs_f64()))
    } else {
        Err(format!(
            "{label} took {:.2} s, limit {:.0} s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ))
    }
}

fn two_cycle_regression() -> Check {
    // (q, w, expected p* or None, expected |p*|)
    let cases: [(f64, Complex64, Option<Complex64>, f64); 5] = [
        (2.0, c(0.0, 10.0), Some(c(0.700975, -0.713186)), 0.0),
        (2.5, c(1.0, -2.0), Some(c(-0.35346, 2.11351)), 0.0),
        (1.5, c(-2.0, 5.0), Some(c(-0.170672, 0.183965)), 0.0),
        (2.0, c(-3.0, 0.0), None, 0.0511582),
        (1.8, c(PI, 0.0), None, 69.4908),
    ];
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (q, w, expected, modulus) in cases {
        let out = qcayley(&[
            "cycle",
            "--q",
            &q.to_string(),
            "--eta",
            "0.5",
            "--w-re",
            &w.re.to_string(),
            "--w-im",
            &w.im.to_string(),
        ]);
        if !out.status.success() {
            return Err(format!(
                "cycle q={q} w={w} exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        let v: serde_json::Value =
            serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let p: Complex64 =
            serde_json::from_value(v["report"]["p_star"].clone()).map_err(|e| e.to_string())?;
        let rel = match expected {
            Some(e) => ((p - e).norm().min((p + e).norm())) / e.norm(),
            None => (p.norm() - modulus).abs() / modulus,
        };
        worst = worst.max(rel);
        if rel >= 1e-4 {
            return Err(format!("q={q} w={w}: p*={p}, relative error {rel:e}"));
        }
    }
    let time = within("five cycles", start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("worst relative error {worst:.2e}, {time}"))
}

fn tail_sum_identity() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for draw in ParamGrid::default()
        .draws(2, 100)
        .map_err(|e| e.to_string())?
    {
        let params = draw.params;
        for k in 0..=20 {
            let psi = tail_sum_psi(&params, k).map_err(|e| format!("{params:?} k={k}: {e}"))?;
            let err = (params.w * psi.value - 1.0).norm();
            worst = worst.max(err);
            if !(err < 1e-9) {
                return Err(format!("{params:?} k={k}: |w psi - 1| = {err:e}"));
            }
        }
    }
    let time = within("identity", start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("max |w psi - 1| = {worst:.2e}, {time}"))
}

fn sweep_report(path: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let out = qcayley(&[
        "sweep",
        "--draws",
        &SWEEP_DRAWS.to_string(),
        "--seed",
        &SWEEP_SEED.to_string(),
        "--epsilon",
        &SWEEP_EPSILON.to_string(),
        "--output",
        path.to_str().expect("utf-8 temp path"),
    ]);
    let elapsed = start.elapsed();
    // exit 4 only signals violated bounds; the rows are judged below
    match out.status.code() {
        Some(0) | Some(4) => Ok(elapsed),
        code => Err(format!(
            "sweep exited {code:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        )),
    }
}

fn hus_bound(path: &Path) -> Check {
    let elapsed = sweep_report(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let rows: Vec<SweepRow> =
        serde_json::from_value(v["report"]["rows"].clone()).map_err(|e| e.to_string())?;
    if rows.len() != SWEEP_DRAWS {
        return Err(format!("{} rows for {SWEEP_DRAWS} draws", rows.len()));
    }
    let mut violations = 0;
    let mut errors = 0;
    let mut above_majorant = 0;
    let mut worst: Option<&SweepRow> = None;
    for row in &rows {
        let (Some(dev), Some(bound), Some(majorant)) =
            (row.sup_deviation, row.bound, row.majorant_bound)
        else {
            errors += 1;
            continue;
        };
        if dev > bound * (1.0 + 1e-9) {
            violations += 1;
        }
        if dev > majorant * (1.0 + 1e-9) {
            above_majorant += 1;
        }
        if worst.is_none_or(|w| row.ratio > w.ratio) {
            worst = Some(row);
        }
    }
    let time = within("1000 bundles", elapsed, Duration::from_secs(60));
    let summary = format!(
        "{violations}/{SWEEP_DRAWS} exceed epsilon/|w|, {errors} failed, {above_majorant} exceed the majorant bound, max ratio {:.3e}",
        worst.and_then(|w| w.ratio).unwrap_or(f64::NAN)
    );
    if violations == 0 && errors == 0 {
        time.map(|t| format!("{summary}, {t}"))
    } else {
        Err(match time {
            Ok(t) => format!("{summary}, {t}"),
            Err(t) => format!("{summary}; {t}"),
        })
    }
}

fn sharpness() -> Check {
    let mut worst = 0.0f64;
    for (i, draw) in ParamGrid::default()
        .draws(4, 20)
        .map_err(|e| e.to_string())?
        .into_iter()
        .enumerate()
    {
        let params = draw.params;
        let eps = 0.05 * (1 + i) as f64;
        let spec = PerturbationSpec::new(
            eps,
            PerturbationKind::ConstantComplex {
                value: c(-eps, 0.0),
            },
        )
        .map_err(|e| e.to_string())?;
        let window = params.window(256).map_err(|e| e.to_string())?;
        let report = synthesize(&params, &window, &spec, eps / params.w)
            .and_then(|b| certify(&params, &b, eps))
            .map_err(|e| format!("{params:?}: {e}"))?;
        let gap = (report.bound_ratio() - 1.0).abs();
        worst = worst.max(gap);
        if report.x0.norm() > 1e-12 * report.bound || gap >= 1e-12 {
            return Err(format!(
                "{params:?}: x0 = {}, ratio - 1 = {gap:e}",
                report.x0
            ));
        }
    }
    Ok(format!("max |ratio - 1| = {worst:.2e}"))
}

fn residual_round_trip() -> Check {
    let draws = ParamGrid::default()
        .draws(5, 100)
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst = 0.0f64;
    for kind in 0..4 {
        for (i, draw) in draws.iter().enumerate() {
            let params = draw.params;
            let eps = 0.5;
            let kind = match kind {
                0 => PerturbationKind::ConstantComplex {
                    value: Complex64::from_polar(
                        eps * rng.random::<f64>(),
                        TAU * rng.random::<f64>(),
                    ),
                },
                1 => PerturbationKind::UnitPhaseOfP,
                2 => PerturbationKind::RandomPhase { seed: i as u64 },
                _ => PerturbationKind::Custom {
                    values: (0..rng.random_range(0..300))
                        .map(|_| {
                            Complex64::from_polar(
                                eps * rng.random::<f64>(),
                                TAU * rng.random::<f64>(),
                            )
                        })
                        .collect(),
                },
            };
            let spec = PerturbationSpec::new(eps, kind).map_err(|e| e.to_string())?;
            let window = params.window(256).map_err(|e| e.to_string())?;
            let x1 = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let bundle =
                synthesize(&params, &window, &spec, x1).map_err(|e| format!("{params:?}: {e}"))?;
            let recovered = residual(&params, &bundle.phi).map_err(|e| e.to_string())?;
            let scale = residual_scale(&params, &bundle.phi).map_err(|e| e.to_string())?;
            let prescribed = spec
                .forcing(&params, window.len())
                .map_err(|e| e.to_string())?;
            for k in 0..recovered.len() {
                let err = conditioned_error(recovered.values()[k], prescribed[k], scale[k]);
                worst = worst.max(err);
                if !(err < 1e-10) {
                    return Err(format!("{params:?} {:?} k={k}: error {err:e}", spec.kind));
                }
            }
        }
    }
    Ok(format!("max error {worst:.2e} over 4 kinds x 100 draws"))
}

fn w_zero_instability() -> Check {
    let mut notes = Vec::new();
    for (q, eps) in [(2.0, 1.0), (1.5, 0.1), (3.0, 0.01)] {
        let params = CayleyParams::new(q, 0.0, c(0.0, 0.0)).map_err(|e| e.to_string())?;
        // first n with eps (q^n - 1) > 1000, by exact integer search on q^n
        let predicted = (0u64..)
            .find(|&n| eps * (q.powi(n as i32) - 1.0) > 1000.0)
            .expect("q > 1");
        let window = params
            .window(predicted.max(40) + 5)
            .map_err(|e| e.to_string())?;
        let p = product_solution(&params, &window).map_err(|e| e.to_string())?;
        let spec = PerturbationSpec::new(
            eps,
            PerturbationKind::ConstantComplex { value: c(eps, 0.0) },
        )
        .map_err(|e| e.to_string())?;
        let forcing = spec
            .forcing_trajectory(&params, &window)
            .map_err(|e| e.to_string())?;
        let s = variation_sum(&params, &window, &forcing, &p).map_err(|e| e.to_string())?;
        for n in 1..=40 {
            let expected = eps * (q.powi(n) - 1.0);
            let got = s.values()[n as usize].to_complex().ok_or("S overflowed")?;
            let rel = (got - expected).norm() / expected;
            if rel >= 1e-12 {
                return Err(format!(
                    "q={q} n={n}: S = {got}, expected {expected}, rel {rel:e}"
                ));
            }
        }
        let evidence = qcayley::w_zero_divergence(&window, 0.0, eps, c(0.0, 0.0))
            .map_err(|e| e.to_string())?;
        let crossed = evidence.crossing(1000.0);
        if crossed != Some(predicted) {
            return Err(format!(
                "q={q} eps={eps}: crossing at {crossed:?}, predicted {predicted}"
            ));
        }
        notes.push(format!("q={q}: n={predicted}"));
    }
    Ok(format!(
        "S exact to 1e-12 for n <= 40, crossings {}",
        notes.join(", ")
    ))
}

fn eta_half_instability() -> Check {
    let cases = [
        (2.0, c(0.0, 10.0)),
        (2.5, c(1.0, -2.0)),
        (1.5, c(-2.0, 5.0)),
        (2.0, c(-3.0, 0.0)),
        (1.8, c(PI, 0.0)),
    ];
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for (q, w) in cases {
        let params = CayleyParams::new(q, 0.5, w).map_err(|e| e.to_string())?;
        let window = params.window(256).map_err(|e| e.to_string())?;
        let cycle = two_cycle(&params, &window).map_err(|e| format!("q={q} w={w}: {e}"))?;
        let p = product_solution(&params, &window).map_err(|e| e.to_string())?;
        let star = cycle.p_star.norm();
        let band = p.values()[cycle.converged_at as usize..].iter().all(|v| {
            v.to_complex()
                .is_some_and(|z| (0.5 * star..=2.0 * star).contains(&z.norm()))
        });
        let evidence =
            eta_half_s_divergence(&params, &window, 1.0, c(0.0, 0.0)).map_err(|e| e.to_string())?;
        let s5 = evidence.profile[5].s_abs;
        let (k_max_s, max_s) = evidence
            .profile
            .iter()
            .map(|pt| (pt.k, pt.s_abs))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let grows = max_s > 1e3 * s5;
        notes.push(format!(
            "w={w}: |S|max/|S(5)| = {:.1} at k={k_max_s}",
            max_s / s5
        ));
        if !band {
            failures.push(format!("q={q} w={w}: |P| leaves [|p*|/2, 2|p*|]"));
        }
        if !grows {
            failures.push(format!(
                "q={q} w={w}: |S| reaches only {:.1} x |S(5)|",
                max_s / s5
            ));
        }
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn ratio_limit_check() -> Check {
    let mut notes = Vec::new();
    for eta in [0.0, 0.25, 0.4] {
        for (q, w) in [(2.0, c(1.0, 1.0)), (1.3, c(-0.7, 2.0)), (2.9, c(5.0, -3.0))] {
            let params = CayleyParams::new(q, eta, w).map_err(|e| e.to_string())?;
            let profile =
                term_ratio_profile(&params, 256).map_err(|e| format!("{params:?}: {e}"))?;
            let limit = eta / (1.0 - eta);
            assert_eq!(limit, ratio_limit(eta));
            let Some(burn) = ratio_burn_in(&profile, limit, 1e-6) else {
                return Err(format!("{params:?}: no burn-in within 256 terms"));
            };
            // independent recheck of every ratio past the burn-in
            if let Some(m) = (burn..profile.len()).find(|&m| (profile[m] - limit).abs() >= 1e-6) {
                return Err(format!(
                    "{params:?}: ratio {} at m={m} after burn-in {burn}",
                    profile[m]
                ));
            }
            notes.push(format!("eta={eta} q={q}: {burn}"));
        }
    }
    Ok(format!("burn-in {}", notes.join(", ")))
}

/// `log2 |z|` split into an integer and a fractional part, so exponents near
/// 10^6 keep full double precision in the fraction.
#[derive(Clone, Copy)]
struct LogPolar {
    int: i64,
    frac: f64,
    arg: f64,
}

impl LogPolar {
    fn new(modulus: f64, exp2: i64, arg: f64) -> Self {
        Self {
            int: exp2,
            frac: modulus.log2(),
            arg,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            int: self.int + o.int,
            frac: self.frac + o.frac,
            arg: self.arg + o.arg,
        }
    }

    /// `|z / self - 1|` for a computed `z`.
    fn relative_error(self, z: ScaledComplex) -> f64 {
        let m = z.mantissa();
        let dlog = (z.exp2() - self.int) as f64 + (m.norm().log2() - self.frac);
        let darg = m.arg() - self.arg;
        (Complex64::from_polar(dlog.exp2(), darg) - 1.0).norm()
    }
}

fn scaled_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sample = |rng: &mut ChaCha8Rng| {
        let modulus = 1.0 + rng.random::<f64>();
        let arg = PI * (2.0 * rng.random::<f64>() - 1.0);
        let exp2 = rng.random_range(-1_000_000..=1_000_000);
        let z = ScaledComplex::from_parts(Complex64::from_polar(modulus, arg), exp2);
        (
            z,
            LogPolar::new(z.mantissa().norm(), z.exp2(), z.mantissa().arg()),
        )
    };
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let (a, la) = sample(&mut rng);
        let (b, lb) = sample(&mut rng);
        let err = la.mul(lb).relative_error(a * b);
        worst = worst.max(err);
        if !(err < 1e-12) {
            return Err(format!("{a:?} * {b:?}: relative error {err:e}"));
        }
    }
    let factor = ScaledComplex::from_parts(Complex64::from_polar(1.0, 0.3), 1000);
    let mut product = ScaledComplex::ONE;
    for _ in 0..10_000 {
        product *= factor;
    }
    let log2 = product.log2_abs();
    if !(product.is_normalized() && (log2 - 1e7).abs() < 1e-6) {
        return Err(format!("10^4 factors of 2^1000 gave log2 |z| = {log2}"));
    }
    Ok(format!(
        "max relative error {worst:.2e}; 10^4-factor product has log2 |z| = {log2}"
    ))
}

fn determinism(path: &Path) -> Check {
    // the config echo includes the output path, so the rerun reuses it
    let first = std::fs::read(path).map_err(|e| format!("first sweep report: {e}"))?;
    sweep_report(path)?;
    let second = std::fs::read(path).map_err(|e| e.to_string())?;
    if first == second {
        Ok(format!("{} identical bytes", first.len()))
    } else {
        Err(format!(
            "reports differ ({} vs {} bytes)",
            first.len(),
            second.len()
        ))
    }
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let report = dir.path().join("sweep.json");
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Check + '_>)> = vec![
        ("two-cycle regression", Box::new(two_cycle_regression)),
        ("tail-sum identity", Box::new(tail_sum_identity)),
        (
            "stability bound epsilon/|w|",
            Box::new(|| hus_bound(&report)),
        ),
        ("sharpness of the constant witness", Box::new(sharpness)),
        ("residual round-trip", Box::new(residual_round_trip)),
        ("w = 0 instability", Box::new(w_zero_instability)),
        ("eta = 1/2 instability", Box::new(eta_half_instability)),
        ("ratio-test limit", Box::new(ratio_limit_check)),
        ("scaled complex oracle", Box::new(scaled_oracle)),
        ("determinism", Box::new(|| determinism(&report))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
