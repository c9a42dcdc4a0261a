use std::f64::consts::PI;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use metap::approx::bohr_coefficient;
use metap::convops::{heat_apply, infinite_convolution, infinite_convolution_quad, preservation_report, ConvOptions, HeatMethod, Kernel};
use metap::corpus::{corpus_get, NAMES};
use metap::funcspace::{
    periodicity_residual, semi_anti_derivative_tail, trigamma, Domain, FunctionDescriptor, Multiplier,
    TrigPolynomial, TrigTerm, Value, Window, C64,
};
use metap::gennorms::{
    besicovitch_pseudometric, besicovitch_seminorm_curve, default_t_grid, stepanov_bound_scan, stepanov_seminorm,
    weyl_seminorm_curve, Gauge, ScanOptions, SeminormSpec,
};
use metap::periods::{relative_density, scan_eps_periods};
use metap::pseudometrics::{distance_value, p_variation, MetricFamily, PseudometricSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn window(a: f64, b: f64) -> Window {
    Window::interval(a, b).unwrap()
}

fn metric(family: MetricFamily, a: f64, b: f64, density: f64) -> PseudometricSpec {
    PseudometricSpec::new(family, window(a, b), density).unwrap()
}

fn random_trig(rng: &mut ChaCha8Rng) -> FunctionDescriptor {
    let k = rng.gen_range(1..=4);
    let terms = (0..k)
        .map(|_| TrigTerm {
            freq: vec![rng.gen_range(-3.0..3.0)],
            coef: vec![C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))].into(),
        })
        .collect();
    FunctionDescriptor::trig(TrigPolynomial::new(1, 1, terms).unwrap())
}

fn semi_anti_tail_bound() -> Verdict {
    let e = corpus_get("semi-anti", Some(200)).unwrap();
    let spec = metric(MetricFamily::BvpComposite { p: 1.0 }, 0.0, 100.0, 32.0);
    let mut ds = Vec::new();
    let mut ok = true;
    for n in [2usize, 4, 8] {
        let d = distance_value(&spec, &e.descriptor, &e.partial(n).unwrap()).unwrap();
        let bound = trigamma(n as f64 + 1.0) + 2.0 * semi_anti_derivative_tail(n) + 1e-6;
        ok &= d <= bound;
        ds.push(format!("N={n}: {d:.6} <= {bound:.6}"));
    }
    let vals: Vec<f64> = ds.iter().map(|s| s.split(": ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap()).collect();
    ok &= vals.windows(2).all(|w| w[1] < w[0]);
    verdict(ok, ds.join(", "))
}

fn haraux_slow_tail() -> Verdict {
    let e = corpus_get("haraux", None).unwrap();
    let spec = metric(MetricFamily::BvpSlow { p: 1.0 }, 0.0, 100.0, 32.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [5usize, 10, 15] {
        let d = distance_value(&spec, &e.descriptor, &e.partial(n).unwrap()).unwrap();
        let bound = metap::approx::haraux_derivative_tail(n) + 1e-6;
        ok &= d <= bound;
        if n == 10 {
            ok &= d < 1e-2;
        }
        parts.push(format!("N={n}: {d:.3e} <= {bound:.3e}"));
    }
    verdict(ok, parts.join(", "))
}

fn heat_multiplier_check() -> Verdict {
    let xs: Vec<f64> = (0..=10).map(|k| -5.0 + k as f64).collect();
    let mut worst = 0.0f64;
    for lambda in [0.0, 1.0, 2.0] {
        for t0 in [0.5, 1.0] {
            let f = FunctionDescriptor::exp_i(lambda);
            let u = heat_apply(&f, t0, HeatMethod::Quadrature, None).unwrap();
            for &x in &xs {
                let exact = C64::from_polar((-lambda * lambda * t0).exp(), lambda * x);
                worst = worst.max((u.eval1(x) - exact).norm());
            }
        }
    }
    let p = FunctionDescriptor::real_trig(&[(1.0, 1.0, 0.5), (2.5, -0.3, 0.2), (0.0, 0.7, 0.0)]).unwrap();
    let two = heat_apply(&heat_apply(&p, 0.3, HeatMethod::Analytic, None).unwrap(), 0.45, HeatMethod::Analytic, None).unwrap();
    let one = heat_apply(&p, 0.75, HeatMethod::Analytic, None).unwrap();
    let semigroup = xs.iter().map(|&x| (two.eval1(x) - one.eval1(x)).norm()).fold(0.0, f64::max);
    verdict(worst < 1e-6 && semigroup < 1e-12, format!("max pointwise error {worst:.3e}, semigroup error {semigroup:.3e}"))
}

fn convolution_closed_form() -> Verdict {
    let k = Kernel::ExpDecay { mu: 1.0 };
    let ts: Vec<f64> = (0..=20).map(|i| -10.0 + i as f64).collect();
    let mut worst = 0.0f64;
    let mut bound_ok = true;
    for omega in [0.0, 1.0, 3.0] {
        let f = FunctionDescriptor::exp_i(omega);
        let expected = 1.0 / (1.0 + omega * omega).sqrt();
        for out in [
            infinite_convolution(&k, &f, ConvOptions::default()).unwrap(),
            infinite_convolution_quad(&k, &f, ConvOptions::default(), None).unwrap(),
        ] {
            for &t in &ts {
                let m = out.eval1(t).norm();
                worst = worst.max((m - expected).abs());
                bound_ok &= m <= 1.0 + 1e-12;
            }
        }
    }
    verdict(worst < 1e-6 && bound_ok, format!("max modulus error {worst:.3e}, sup bound holds: {bound_ok}"))
}

fn preservation() -> Verdict {
    let f = corpus_get("semi-anti", Some(200)).unwrap().descriptor;
    let k = Kernel::ExpDecay { mu: 1.0 };
    let out = infinite_convolution(&k, &f, ConvOptions::default()).unwrap();
    let gauge = Gauge::Metric { spec: metric(MetricFamily::BvpComposite { p: 1.0 }, 0.0, 20.0, 16.0) };
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, tau) in [(1, 3.0 * PI), (2, 15.0 * PI)] {
        let r = preservation_report(&f, &out, &k, &gauge, &[tau], &Multiplier::real(-1.0).unwrap(), 50.0, 1e-5).unwrap();
        ok &= r.residual_out <= r.mass * r.residual_in + 1e-5 && (r.mass - 1.0).abs() < 1e-15;
        parts.push(format!("N={n}: out {:.4} <= {:.4}", r.residual_out, r.residual_in));
    }
    verdict(ok, parts.join(", "))
}

fn stepanov_unbounded() -> Verdict {
    let g = corpus_get("stepanov-g", None).unwrap().descriptor;
    let start = Instant::now();
    let s = stepanov_bound_scan(&g, 1.0, 2.0 * PI, &[1e3, 1e4, 1e5], &ScanOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let m = &s.maxima;
    let ok = m[0] < m[1] && m[1] < m[2] && m[2] >= 2.0 * m[0] && elapsed < Duration::from_secs(120);
    verdict(
        ok,
        format!(
            "maxima {:.4e}, {:.4e}, {:.4e}; unconverged cells {:?}; {:.1}s",
            m[0],
            m[1],
            m[2],
            s.unconverged_cells,
            elapsed.as_secs_f64()
        ),
    )
}

fn eps_period_geometry() -> Verdict {
    let gauge = Gauge::Metric { spec: metric(MetricFamily::sup(), 0.0, 2.0 * PI, 64.0) };
    let r = scan_eps_periods(&FunctionDescriptor::sin(), &gauge, &Multiplier::one(), 0.1, (0.0, 50.0), 0.01, None).unwrap();
    let centers_ok = r.clusters.iter().all(|c| {
        let k = (c.center / (2.0 * PI)).round();
        (c.center - 2.0 * PI * k).abs() < 1e-2
    }) && !r.clusters.is_empty();
    let density = relative_density(&r).unwrap();
    let density_ok = (density - 2.0 * PI).abs() <= 0.05 * 2.0 * PI;
    let mut worst = 0.0f64;
    for name in NAMES {
        let f = corpus_get(name, None).unwrap().descriptor;
        for fam in MetricFamily::catalogue() {
            let spec = metric(fam, 0.0, 20.0, 16.0);
            worst = worst.max(periodicity_residual(&f, &[0.0], &Multiplier::one(), &spec).unwrap());
        }
    }
    verdict(
        centers_ok && density_ok && worst < 1e-12,
        format!("{} clusters, relative density {density:.4}, max tau=0 residual {worst:.1e}", r.clusters.len()),
    )
}

fn bohr_accuracy() -> Verdict {
    let f = corpus_get("semi-anti", None).unwrap().descriptor;
    let a = bohr_coefficient(&f, &[1.0 / 3.0], 1e4).unwrap().value[0];
    let b = bohr_coefficient(&f, &[0.5], 1e4).unwrap().value[0];
    let (ea, eb) = ((a - C64::new(1.0, 0.0)).norm(), b.norm());
    verdict(ea < 0.05 && eb < 0.05, format!("|a(1/3) - 1| = {ea:.3e}, |a(1/2)| = {eb:.3e}"))
}

/// Max over all sub-sequences of the left-to-right sum of `|dx|^p`.
fn brute_pvar_pow(xs: &[f64], p: f64) -> f64 {
    let n = xs.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut s = 0.0;
        for w in idx.windows(2) {
            let d = (xs[w[1]] - xs[w[0]]).abs();
            s += if p == 1.0 { d } else { d.powf(p) };
        }
        best = best.max(s);
    }
    best
}

fn axiom_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_self = 0.0f64;
    let mut worst_tri = f64::NEG_INFINITY;
    let mut symmetric = true;
    for fam in MetricFamily::catalogue() {
        let spec = metric(fam, 0.0, 10.0, 16.0);
        for _ in 0..20 {
            let (f, g, h) = (random_trig(&mut rng), random_trig(&mut rng), random_trig(&mut rng));
            let d = |a: &FunctionDescriptor, b: &FunctionDescriptor| distance_value(&spec, a, b).unwrap();
            worst_self = worst_self.max(d(&f, &f));
            symmetric &= d(&f, &g) == d(&g, &f);
            worst_tri = worst_tri.max(d(&f, &h) - d(&f, &g) - d(&g, &h));
        }
    }
    let mut exact = true;
    let mut monotone = true;
    let mut worst_mono = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = rng.gen_range(2..=12);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let samples: Vec<(f64, C64)> = xs.iter().enumerate().map(|(i, x)| (i as f64, C64::new(*x, 0.0))).collect();
        let mut prev = f64::INFINITY;
        for p in [1.0, 1.5, 2.0, 3.0] {
            let dp = p_variation(&samples, p).unwrap();
            exact &= dp == brute_pvar_pow(&xs, p).powf(1.0 / p);
            worst_mono = worst_mono.max(dp - prev);
            monotone &= dp <= prev * (1.0 + 4.0 * f64::EPSILON);
            prev = dp;
        }
    }
    let ok = worst_self <= 1e-10 && symmetric && worst_tri <= 1e-10 && exact && monotone;
    verdict(
        ok,
        format!(
            "d(f,f) <= {worst_self:.1e}, symmetric: {symmetric}, triangle residual {worst_tri:.1e}, DP = brute force: {exact}, monotone in p: {monotone} (max rise {worst_mono:.1e})"
        ),
    )
}

fn stepanov_in_weyl() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut fns: Vec<FunctionDescriptor> = (0..100).map(|_| random_trig(&mut rng)).collect();
    for name in NAMES {
        fns.push(corpus_get(name, None).unwrap().descriptor);
    }
    let outer = window(0.0, 30.0);
    let ls = [1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.5, 8.0, 16.0];
    let mut worst = f64::NEG_INFINITY;
    for p in [1.0, 2.0] {
        let s_spec = SeminormSpec::stepanov(p).unwrap().with_grid_density(32.0).unwrap();
        let w_spec = SeminormSpec::weyl(p).unwrap().with_grid_density(32.0).unwrap();
        for f in &fns {
            let s = stepanov_seminorm(f, &s_spec, &outer).unwrap();
            let w = weyl_seminorm_curve(f, &w_spec, &outer, &ls).unwrap();
            for v in &w.values {
                worst = worst.max(v - s);
            }
        }
    }
    verdict(worst <= 1e-8, format!("{} functions, max Weyl - Stepanov {worst:.3e}", fns.len()))
}

fn besicovitch_metric() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = default_t_grid();
    let spec = SeminormSpec::besicovitch(1.0, 1.0).unwrap();
    let mut axioms = true;
    let mut worst_tri = f64::NEG_INFINITY;
    for _ in 0..5 {
        let (f, g, h) = (random_trig(&mut rng), random_trig(&mut rng), random_trig(&mut rng));
        let d = |a: &FunctionDescriptor, b: &FunctionDescriptor| besicovitch_pseudometric(a, b, &spec, &grid).unwrap();
        axioms &= d(&f, &f) <= 1e-3 && d(&f, &g) == d(&g, &f);
        worst_tri = worst_tri.max(d(&f, &h) - d(&f, &g) - d(&g, &h));
    }
    axioms &= worst_tri <= 1e-3;
    let bump = FunctionDescriptor::custom(
        "bump",
        Domain::Whole { dim: 1 },
        1,
        Some(1.0),
        Arc::new(|t: &[f64], out: &mut Value| {
            out.clear();
            out.push(C64::new((1.0 - t[0] * t[0]).max(0.0), 0.0));
        }),
    );
    let f = random_trig(&mut rng);
    let g = FunctionDescriptor::linear_combination(vec![(C64::new(1.0, 0.0), f.clone()), (C64::new(1.0, 0.0), bump)]).unwrap();
    let compact = besicovitch_pseudometric(&f, &g, &spec, &grid).unwrap();
    let mut worst_const = 0.0f64;
    let kappa = 0.8;
    for p in [1.0, 2.0] {
        let s = SeminormSpec::besicovitch(p, 1.0 / p).unwrap();
        let c = besicovitch_seminorm_curve(&FunctionDescriptor::constant(C64::new(kappa, 0.0)), &s, &grid).unwrap();
        worst_const = worst_const.max((c.limit_estimate - kappa * 2f64.powf(1.0 / p)).abs());
    }
    let ok = axioms && compact < 1e-3 && worst_const < 1e-3;
    verdict(
        ok,
        format!("axioms: {axioms}, compact difference {compact:.2e}, constant error {worst_const:.2e}"),
    )
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_metap");
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut runs = 0;
    for name in NAMES {
        let mut outputs: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
        for threads in [1, 4, 8] {
            let csv = dir.path().join(format!("{name}-{threads}.csv"));
            let out = Command::new(bin)
                .args(["verify", name, "--out"])
                .arg(&csv)
                .env("RAYON_NUM_THREADS", threads.to_string())
                .output()
                .unwrap();
            ok &= out.status.code().is_some();
            outputs.push((out.stdout, std::fs::read(&csv).unwrap_or_default()));
            runs += 1;
        }
        ok &= outputs.windows(2).all(|w| w[0] == w[1]) && !outputs[0].0.is_empty();
    }
    verdict(ok, format!("{runs} runs over {} entries, byte-identical: {ok}", NAMES.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("semi-anti-periodic BV1 tail bound", semi_anti_tail_bound),
        ("haraux slow-V1 tail bound", haraux_slow_tail),
        ("heat multiplier and semigroup", heat_multiplier_check),
        ("exp-decay convolution closed form", convolution_closed_form),
        ("preservation domination", preservation),
        ("Stepanov unboundedness witness", stepanov_unbounded),
        ("epsilon-period geometry", eps_period_geometry),
        ("Bohr coefficient accuracy", bohr_accuracy),
        ("pseudometric axiom suite", axiom_suite),
        ("Stepanov within equi-Weyl", stepanov_in_weyl),
        ("Besicovitch pseudometric", besicovitch_metric),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let status = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), v.detail);
        if !v.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
