//! Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.

mod common;

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use quantbound_core::quant_bounds::{
    dimension_from_sequence, lower_bound_ln, upper_bound_un, DimensionOptions, ErrorSequence, QuantQuery,
};
use quantbound_core::quantizer_engine::{kmeans_pp_init, lloyd_refine, nearest_distortion};
use quantbound_core::rd_bounds::{multi_letter_lower, rd_lower_explicit, MultiLetterQuery, RdQuery};
use quantbound_core::regularity::{product_certificate, RegularityCertificate};
use quantbound_core::spaces::grassmann::{chordal_sq_fast, grassmann_volume, Subspace};
use quantbound_core::spaces::selfsimilar::{cantor_accumulation_interval, cantor_dimension, cantor_exact_vn};
use quantbound_core::spaces::sphere::{
    circle_closed_forms, sphere_cap_measure, sphere_coefficient_bounds, sphere_lower_ln, sphere_upper_un,
};
use quantbound_core::spaces::{Field, Grassmannian, Hypersphere, SelfSimilarSet, SpaceModel, UnitInterval, VonMisesFisher};
use quantbound_core::special_functions::ln_gamma;
use quantbound_core::stats::{self, mc_fraction, mc_moments};

const SIGMAS: f64 = 3.0;
const MC: usize = 1_000_000;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_classical_slb() -> Outcome {
    let cert = RegularityCertificate::sub(1.0, 2.0, f64::INFINITY, 2.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for e in -6..=0 {
        let d = 10f64.powi(e);
        let got = rd_lower_explicit(&RdQuery { entropy: 0.0, cert, d }).map_err(|e| e.to_string())?;
        worst = worst.max(rel(got, -0.5 * (2.0 * PI * E * d).ln()));
    }
    ensure(worst < 1e-12, format!("max relative error {worst:.3e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn c2_interval_tightness() -> Outcome {
    let s = UnitInterval;
    let src = |r: &mut ChaCha8Rng| s.sample_reference(r);
    let sub = s.sub_certificate().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in [1u64, 2, 4, 8, 16, 32] {
        let exact = 1.0 / (12.0 * (n * n) as f64);
        let l = lower_bound_ln(&QuantQuery::new(n as f64).with_sub(sub)).map_err(|e| e.to_string())?;
        ensure(rel(l, exact) < 1e-14, format!("L_{n} = {l} vs {exact}"))?;
        let init = kmeans_pp_init(&s, &src, n as usize, 2000, 100 + n).map_err(|e| e.to_string())?;
        let out = lloyd_refine(&s, &src, init, 300, 50_000, 200 + n).map_err(|e| e.to_string())?;
        let est = nearest_distortion(&s, &src, &out.codebook, MC, 300 + n).map_err(|e| e.to_string())?;
        let err = rel(est.mean, exact);
        worst = worst.max(err);
        ensure(err < 0.02, format!("n={n}: Lloyd {:.6e} vs {exact:.6e} ({:.2}%)", est.mean, 100.0 * err))?;
    }
    Ok(format!("L_n exact; Lloyd worst deviation {:.2}%", 100.0 * worst))
}

fn c3_circle_coefficient() -> Outcome {
    let target = PI * PI / 3.0;
    let up = circle_closed_forms(1.0, 256).map_err(|e| e.to_string())?.upper * 256.0 * 256.0;
    ensure(rel(up, target) < 1e-4, format!("n² upper at 256 = {up}"))?;
    let (lo, _) = sphere_coefficient_bounds(2, 1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    ensure(rel(lo, target) < 1e-12, format!("coefficient lower {lo}"))?;
    Ok(format!("n²U_256 = {up:.7}, lower = {lo:.12}"))
}

fn c4_cantor() -> Outcome {
    let want = [1.0 / 8.0, 1.0 / 72.0, 5.0 / 648.0, 1.0 / 648.0];
    let t = Instant::now();
    for (i, w) in want.iter().enumerate() {
        let n = i as u64 + 1;
        let v = cantor_exact_vn(n).map_err(|e| e.to_string())?;
        ensure(rel(v, *w) < 1e-14, format!("V_{n} = {v} vs {w}"))?;
        let brute = common::cantor_vn_brute_force(n as usize, 10);
        ensure(rel(brute, v) < 1e-3, format!("brute force V_{n} = {brute} vs {v}"))?;
    }
    let brute_time = t.elapsed();
    let t = Instant::now();
    let (sub, sup) = SelfSimilarSet::cantor(true).certificates().map_err(|e| e.to_string())?;
    let m = cantor_dimension();
    let iv = cantor_accumulation_interval();
    let mut violations = 0;
    for n in 1..=1u64 << 12 {
        let nf = n as f64;
        let v = cantor_exact_vn(n).map_err(|e| e.to_string())?;
        let l = lower_bound_ln(&QuantQuery::new(nf).with_sub(sub)).map_err(|e| e.to_string())?;
        let u = upper_bound_un(&QuantQuery::new(nf).with_sup(sup).with_beta(1.0)).map_err(|e| e.to_string())?;
        let scaled = nf.powf(2.0 / m) * v;
        if !(l <= v && v <= u && scaled >= iv.lower - 1e-12 && scaled <= iv.upper + 1e-12) {
            violations += 1;
        }
    }
    let rest_time = t.elapsed();
    ensure(violations == 0, format!("{violations} sandwich/interval violations"))?;
    ensure(brute_time < Duration::from_secs(120), format!("brute force took {brute_time:?}"))?;
    ensure(rest_time < Duration::from_secs(1), format!("sandwich took {rest_time:?}"))?;
    Ok(format!("V_1..4 exact, brute force agrees; 0 violations for n ≤ 4096 ({:.3},{:.5}]", iv.lower, iv.upper))
}

fn c5_sphere_caps() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [2u32, 3, 5] {
        let s = Hypersphere::new(d, 1.0).map_err(|e| e.to_string())?;
        let center = common::e1(d as usize);
        for (j, t) in [0.2, 0.5, 1.0].into_iter().enumerate() {
            let exact = sphere_cap_measure(d, 1.0, t, true).map_err(|e| e.to_string())?;
            let (p, sigma) = mc_fraction(5, (d * 10) as u64 + j as u64, MC, |rng| {
                let x = s.sample_uniform(rng);
                x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < t * t
            });
            let z = (p - exact).abs() / sigma;
            worst = worst.max(z);
            ensure(z <= SIGMAS, format!("d={d} δ/r={t}: MC {p:.5} vs {exact:.5} ({z:.2}σ)"))?;
        }
    }
    Ok(format!("9 caps, worst {worst:.2}σ"))
}

fn first_axis(d: usize) -> Subspace {
    DMatrix::from_fn(d, 1, |i, _| Complex::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))
}

fn c6_grassmann() -> Outcome {
    let mut worst: f64 = 0.0;
    for (gi, (field, d)) in [(Field::Complex, 2usize), (Field::Real, 2), (Field::Real, 3)].into_iter().enumerate() {
        let g = Grassmannian::new(field, 1, 1, d).map_err(|e| e.to_string())?;
        let x = first_axis(d);
        for (j, delta) in [0.2, 0.5, 0.9].into_iter().enumerate() {
            let (lo, hi) = grassmann_volume(field, 1, 1, d, delta).map_err(|e| e.to_string())?.range();
            let (p, sigma) = mc_fraction(6, (gi * 10 + j) as u64, MC, |rng| {
                chordal_sq_fast(&x, &g.sample_subspace(1, rng)) < delta * delta
            });
            let z = ((lo - p).max(p - hi).max(0.0)) / sigma;
            worst = worst.max(z);
            ensure(
                z <= SIGMAS,
                format!("{field:?}(1,{d}) δ={delta}: MC {p:.5} outside [{lo:.5}, {hi:.5}] by {z:.2}σ"),
            )?;
        }
    }
    Ok(format!("9 balls inside volume laws, worst excursion {worst:.2}σ"))
}

fn c7_vmf() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, kappa) in [0.5, 2.0, 10.0].into_iter().enumerate() {
        let v = VonMisesFisher::new(&[0.0, 0.0, 1.0], kappa).map_err(|e| e.to_string())?;
        let f = v.functionals();
        let c_err = rel(f.c_d, kappa / kappa.sinh());
        ensure(c_err < 1e-10, format!("κ={kappa}: c_3 relative error {c_err:.2e}"))?;
        let m = mc_moments(7, i as u64, MC, |rng| -v.ln_density(&v.sample(rng)));
        let z = (m.mean - f.entropy).abs() / m.std_error();
        worst = worst.max(z);
        ensure(z <= SIGMAS, format!("κ={kappa}: MC entropy {:.5} vs {:.5} ({z:.2}σ)", m.mean, f.entropy))?;
    }
    Ok(format!("entropy within {worst:.2}σ, c_3 exact"))
}

fn c8_products() -> Outcome {
    let line = RegularityCertificate::sub(1.0, 2.0, f64::INFINITY, 2.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for ell in 1..=6usize {
        let p = product_certificate(&vec![line; ell], &vec![1.0; ell], 2.0).map_err(|e| e.to_string())?;
        let l = ell as f64;
        let want = (0.5 * l * PI.ln() - ln_gamma(1.0 + l / 2.0)).exp();
        let err = rel(p.constant, want);
        worst = worst.max(err);
        ensure(err < 1e-12 && p.m == l, format!("ℓ={ell}: c = {} vs {want}", p.constant))?;
    }
    Ok(format!("unit-ball volumes for ℓ = 1..6, max relative error {worst:.1e}"))
}

fn c9_multi_letter() -> Outcome {
    let mut rng = stats::stream(9, 0, 0);
    let mut worst_gap: f64 = 0.0;
    for q in 0..100 {
        let finite = q % 2 == 1;
        let mut base = MultiLetterQuery {
            ell: 1,
            p: rng.random_range(1.0..3.0),
            sigma_p: rng.random_range(0.5..4.0),
            m: rng.random_range(0.2..6.0),
            c: rng.random_range(0.1..10.0),
            delta0: if finite { rng.random_range(0.5..3.0) } else { f64::INFINITY },
            k: rng.random_range(0.5..3.0),
            d: 0.0,
        };
        // D below D_(50) so every ℓ ≤ 50 is valid
        let pk = base.p * base.k;
        let cap = if finite { base.delta0.powf(base.k) / 50.0 * 50.0 * base.m / (50.0 * base.m + pk) } else { 1.0 };
        base.d = cap * rng.random_range(1e-4..0.99);
        let mut last = f64::INFINITY;
        for ell in 1..=50 {
            let r = multi_letter_lower(&MultiLetterQuery { ell, ..base }).map_err(|e| e.to_string())?.rate;
            ensure(r < last, format!("query {q}: not strictly decreasing at ℓ={ell}"))?;
            last = r;
        }
        if !finite {
            let b = multi_letter_lower(&MultiLetterQuery { ell: 10_000, ..base }).map_err(|e| e.to_string())?;
            let gap = (b.rate - b.limit).abs();
            worst_gap = worst_gap.max(gap);
            ensure(gap < 1e-3, format!("query {q}: |R̃_(10⁴) − limit| = {gap:.2e}"))?;
        }
    }
    Ok(format!("100 queries strictly decreasing; max |R̃_(10⁴) − limit| = {worst_gap:.1e}"))
}

fn c10_dimension() -> Outcome {
    let m = cantor_dimension();
    let cantor = ErrorSequence::from_fn((1..=1u64 << 14).map(|n| n as f64), |n| cantor_exact_vn(n as u64))
        .map_err(|e| e.to_string())?;
    let (lo, hi) = dimension_from_sequence(&cantor, 2.0, DimensionOptions::default()).map_err(|e| e.to_string())?;
    ensure((lo - m).abs() < 0.05 && (hi - m).abs() < 0.05, format!("Cantor estimate [{lo:.4}, {hi:.4}] vs {m:.4}"))?;
    let ns = (1..=500).map(|j| 2f64.powi(j));
    let lower = ErrorSequence::from_fn(ns.clone(), |n| sphere_lower_ln(3, 1.0, n, 1.0, 1.0)).map_err(|e| e.to_string())?;
    let upper = ErrorSequence::from_fn(ns, |n| sphere_upper_un(3, 1.0, n, 0.5)).map_err(|e| e.to_string())?;
    let mut msg = format!("Cantor [{lo:.4}, {hi:.4}]");
    for (name, seq) in [("L", &lower), ("U", &upper)] {
        let (a, b) = dimension_from_sequence(seq, 2.0, DimensionOptions::default()).map_err(|e| e.to_string())?;
        ensure((a - 2.0).abs() < 0.02 && (b - 2.0).abs() < 0.02, format!("sphere {name}: [{a:.4}, {b:.4}]"))?;
        msg.push_str(&format!(", sphere {name} [{a:.4}, {b:.4}]"));
    }
    Ok(msg)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("1 classical SLB equivalence", c1_classical_slb, 1),
        ("2 interval tightness", c2_interval_tightness, 30),
        ("3 circle coefficient", c3_circle_coefficient, 1),
        ("4 Cantor exactness and sandwich", c4_cantor, 121),
        ("5 sphere cap law", c5_sphere_caps, 60),
        ("6 Grassmannian volume law", c6_grassmann, 120),
        ("7 vMF functionals", c7_vmf, 60),
        ("8 product certificates", c8_products, 1),
        ("9 multi-letter behavior", c9_multi_letter, 5),
        ("10 dimension recovery", c10_dimension, 5),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let mut outcome = run();
        let elapsed = t.elapsed();
        if outcome.is_ok() && elapsed > Duration::from_secs(budget) {
            outcome = Err(format!("runtime {elapsed:.2?} over {budget} s budget"));
        }
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
