//! Task runners, generic over the configured model.

use rand_chacha::ChaCha8Rng;

use quantbound_core::quantizer_engine::{subseed, vn_estimate};
use quantbound_core::quant_bounds::{dimension_from_sequence, DimensionOptions, ErrorSequence};
use quantbound_core::rd_bounds::{f_shannon, multi_letter_lower, rd_lower_explicit, MultiLetterQuery, RdQuery};
use quantbound_core::regularity::{product_certificate, verify_certificate, CertKind, RegularityCertificate, SIGMAS};
use quantbound_core::report::{sandwich_report, CSV_COLUMNS};
use quantbound_core::spaces::SpaceModel;
use quantbound_core::stats::{self, mc_fraction};
use quantbound_core::Error;

use crate::config::{ExperimentConfig, Task};
use crate::error::CliError;
use crate::model::Model;
use crate::table::{Cell, Table};

type Point<M> = <<M as Model>::S as SpaceModel>::Point;

pub fn run<M: Model>(model: &M, task: Task, cfg: &ExperimentConfig, seed: u64) -> Result<Table, CliError> {
    match task {
        Task::Bounds => bounds(model, cfg),
        Task::RdLower => rd_lower(model, cfg),
        Task::MultiLetter => multi_letter(model, cfg),
        Task::Quantize => quantize(model, cfg, seed),
        Task::VolumeCheck => volume_check(model, cfg, seed),
        Task::VerifyCert => verify_cert(model, cfg, seed),
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6e}"))
}

fn split<T>(r: quantbound_core::Result<T>, label: &str, notes: &mut Vec<String>) -> Option<T> {
    r.map_err(|e| notes.push(format!("{label}: {e}"))).ok()
}

fn with_notes(mut line: String, notes: &[String]) -> String {
    if !notes.is_empty() {
        line.push_str(" (");
        line.push_str(&notes.join("; "));
        line.push(')');
    }
    line
}

fn source<M: Model>(model: &M) -> Result<impl Fn(&mut ChaCha8Rng) -> Point<M> + Sync + '_, CliError> {
    if !model.can_sample() {
        return Err(CliError::Config("distribution.type custom cannot be sampled; this task needs draws".into()));
    }
    Ok(move |rng: &mut ChaCha8Rng| model.draw(rng).expect("sampleable model"))
}

fn bounds<M: Model>(model: &M, cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let ns = cfg.n_list()?;
    let exponent = model.exponent()?;
    let id = model.id();
    let mut t = Table::new(&["space_id", "n", "L_n", "U_n", "V_n", "scaled_L", "scaled_U", "scaled_V", "pass"]);
    let mut seqs: [Vec<(f64, f64)>; 3] = Default::default();
    for n in ns {
        let nf = n as f64;
        let scale = nf.powf(exponent);
        let mut notes = Vec::new();
        let l = split(model.lower(nf), "L_n", &mut notes);
        let u = split(model.upper(nf), "U_n", &mut notes);
        let v = model.exact(n);
        let ordered = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => a <= b,
            _ => true,
        };
        let pass = ordered(l, u) && ordered(l, v) && ordered(v, u);
        for (seq, x) in seqs.iter_mut().zip([l, u, v]) {
            if let Some(x) = x.filter(|x| *x > 0.0 && *x < 1.0) {
                seq.push((nf, x));
            }
        }
        let line = format!("n={n} L_n={} U_n={} V_n={} {}", fmt(l), fmt(u), fmt(v), if pass { "ok" } else { "VIOLATION" });
        t.push(
            vec![
                id.as_str().into(),
                n.into(),
                l.into(),
                u.into(),
                v.into(),
                l.map(|x| x * scale).into(),
                u.map(|x| x * scale).into(),
                v.map(|x| x * scale).into(),
                pass.into(),
            ],
            with_notes(line, &notes),
            !pass,
        );
    }
    // quantization-dimension estimates from the trailing half of each sequence
    let (sub, _) = model.certificates(None)?;
    for (name, seq) in ["L_n", "U_n", "V_n"].iter().zip(seqs) {
        if seq.len() < 4 {
            continue;
        }
        let est = ErrorSequence::new(seq).and_then(|s| dimension_from_sequence(&s, sub.k, DimensionOptions::default()));
        if let Ok((lo, hi)) = est {
            t.summaries.push(format!("dimension from {name}: [{lo:.4}, {hi:.4}]"));
        }
    }
    Ok(t)
}

fn product(cert: RegularityCertificate, letters: u64) -> quantbound_core::Result<RegularityCertificate> {
    if letters == 1 {
        return Ok(cert);
    }
    let l = letters as usize;
    product_certificate(&vec![cert; l], &vec![1.0; l], cert.k)
}

fn rd_lower<M: Model>(model: &M, cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let id = model.id();
    let h = model.density().entropy;
    let reference = model.reference_certificate()?;
    let letters = &cfg.params.letters;
    if letters.is_empty() || letters.contains(&0) {
        return Err(CliError::Config("params.letters must be nonempty with entries ≥ 1".into()));
    }
    let mut t = Table::new(&["space_id", "letters", "D", "m", "c", "R_L", "h_plus_F", "offset"]);
    for &ell in letters {
        let entropy = ell as f64 * h;
        let reference = product(reference, ell)?;
        for d in cfg.d_grid()? {
            let mut notes = Vec::new();
            let cert = split(model.rd_certificate(d).and_then(|c| product(c, ell)), "certificate", &mut notes);
            let r = cert.and_then(|cert| split(rd_lower_explicit(&RdQuery { entropy, cert, d }), "R_L", &mut notes));
            let h_f = split(
                f_shannon(reference.m, reference.k, reference.constant, d).map(|f| entropy + f),
                "h+F",
                &mut notes,
            );
            let offset = r.zip(h_f).map(|(a, b)| a - b);
            let line = format!("ell={ell} D={d:e} R_L={} h+F={} offset={}", fmt(r), fmt(h_f), fmt(offset));
            t.push(
                vec![
                    id.as_str().into(),
                    ell.into(),
                    d.into(),
                    cert.map(|c| c.m).into(),
                    cert.map(|c| c.constant).into(),
                    r.into(),
                    h_f.into(),
                    offset.into(),
                ],
                with_notes(line, &notes),
                false,
            );
        }
    }
    Ok(t)
}

fn multi_letter<M: Model>(model: &M, cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let (cert, _) = model.certificates(None)?;
    let density = model.density();
    let id = model.id();
    let grid = cfg.d_grid()?;
    let mut t = Table::new(&["space_id", "ell", "D", "rate", "D_max", "limit"]);
    for ell in cfg.ell_list()? {
        for &d in &grid {
            let q = MultiLetterQuery {
                ell,
                p: density.p,
                sigma_p: density.sigma_p,
                m: cert.m,
                c: cert.constant,
                delta0: cert.delta0,
                k: cert.k,
                d,
            };
            let (row, line) = match multi_letter_lower(&q) {
                Ok(b) => (
                    vec![id.as_str().into(), ell.into(), d.into(), b.rate.into(), b.d_max.into(), b.limit.into()],
                    format!("ell={ell} D={d:e} rate={:.6} limit={:.6}", b.rate, b.limit),
                ),
                Err(Error::NoBound { limit, .. }) => (
                    vec![id.as_str().into(), ell.into(), d.into(), Cell::Empty, limit.into(), Cell::Empty],
                    format!("ell={ell} D={d:e} no bound (D ≥ D_max = {limit:.6e})"),
                ),
                Err(e) => return Err(e.into()),
            };
            t.push(row, line, false);
        }
    }
    Ok(t)
}

fn quantize<M: Model>(model: &M, cfg: &ExperimentConfig, seed: u64) -> Result<Table, CliError> {
    let ns = cfg.n_list()?;
    let space = model.space();
    let src = source(model)?;
    let codeword = |rng: &mut ChaCha8Rng| space.sample_codeword(rng);
    let budget = cfg.params.budget;
    let report = sandwich_report(
        &model.id(),
        &ns,
        model.exponent()?,
        |n| model.lower(n),
        |n| model.upper(n),
        |n| Ok(vn_estimate(space, &src, &codeword, n as usize, budget, subseed(seed, 0x5A, n))?.estimate),
    )?;
    let mut t = Table::new(&CSV_COLUMNS);
    for r in &report.rows {
        let line = format!(
            "n={} L_n={} v_hat={:.6e}±{:.1e} U_n={} {}",
            r.n,
            fmt(r.l_n),
            r.v_hat,
            r.v_ci,
            fmt(r.u_n),
            if r.pass { "ok" } else { "VIOLATION" }
        );
        let notes: Vec<String> = r.note.iter().cloned().collect();
        t.push(
            vec![
                r.space_id.as_str().into(),
                r.n.into(),
                r.l_n.into(),
                r.u_n.into(),
                r.v_hat.into(),
                r.v_ci.into(),
                r.scaled_l.into(),
                r.scaled_u.into(),
                r.scaled_v.into(),
                r.pass.into(),
            ],
            with_notes(line, &notes),
            !r.pass,
        );
    }
    Ok(t)
}

fn volume_check<M: Model>(model: &M, cfg: &ExperimentConfig, seed: u64) -> Result<Table, CliError> {
    let space = model.space();
    let (cert, _) = model.certificates(None)?;
    let center = model.volume_center(seed);
    let id = model.id();
    let mut t = Table::new(&["space_id", "delta", "law_lower", "law_upper", "estimate", "ci", "pass"]);
    for (i, delta) in cfg.radii()?.into_iter().enumerate() {
        let (lo, hi) = model.volume_law(delta)?;
        let threshold = delta.powf(cert.k);
        let (p, sigma) = mc_fraction(subseed(seed, 0xB0, i as u64), 0, cfg.params.samples, |rng| {
            space.distortion(&space.sample_reference(rng), &center) < threshold
        });
        let pass = lo - SIGMAS * sigma <= p && p <= hi + SIGMAS * sigma;
        let line = format!(
            "δ={delta} law=[{lo:.6e}, {hi:.6e}] MC={p:.6e}±{sigma:.1e} {}",
            if pass { "ok" } else { "VIOLATION" }
        );
        t.push(
            vec![id.as_str().into(), delta.into(), lo.into(), hi.into(), p.into(), sigma.into(), pass.into()],
            line,
            !pass,
        );
    }
    Ok(t)
}

fn verify_cert<M: Model>(model: &M, cfg: &ExperimentConfig, seed: u64) -> Result<Table, CliError> {
    let space = model.space();
    let radii = cfg.radii()?;
    let max = radii.iter().copied().fold(0.0, f64::max);
    let (sub, sup) = model.certificates(Some(max))?;
    let id = model.id();
    let mut t = Table::new(&["space_id", "kind", "center", "radius", "bound", "estimate", "ci", "pass"]);
    let n_centers = cfg.params.centers.max(1);
    let mut check = |cert: &RegularityCertificate, label: &str, centers: Vec<Point<M>>, tag: u64| -> Result<(), CliError> {
        let usable: Vec<f64> = radii.iter().copied().filter(|&r| r <= cert.delta0).collect();
        if usable.len() < radii.len() {
            t.summaries.push(format!(
                "{label}: {} radii beyond δ0 = {} skipped",
                radii.len() - usable.len(),
                cert.delta0
            ));
        }
        if usable.is_empty() {
            return Ok(());
        }
        let probes = match cert.kind {
            CertKind::Sub => verify_certificate(
                cert,
                |rng: &mut ChaCha8Rng| space.sample_reference(rng),
                |x: &Point<M>, y: &Point<M>| space.distortion(x, y),
                &centers,
                &usable,
                cfg.params.samples,
                subseed(seed, tag, 0),
            )?,
            CertKind::Super => verify_certificate(
                cert,
                |rng: &mut ChaCha8Rng| space.sample_codeword(rng),
                |y: &Point<M>, x: &Point<M>| space.distortion(x, y),
                &centers,
                &usable,
                cfg.params.samples,
                subseed(seed, tag, 0),
            )?,
        };
        for (i, (probe, pass)) in probes.into_iter().enumerate() {
            let center = (i / usable.len()) as u64;
            let bound = cert.ball_bound(probe.radius);
            let line = format!(
                "{label} center={center} δ={} bound={bound:.6e} MC={:.6e}±{:.1e} {}",
                probe.radius,
                probe.estimate,
                probe.ci_halfwidth,
                if pass { "ok" } else { "VIOLATION" }
            );
            t.push(
                vec![
                    id.as_str().into(),
                    label.into(),
                    center.into(),
                    probe.radius.into(),
                    bound.into(),
                    probe.estimate.into(),
                    probe.ci_halfwidth.into(),
                    pass.into(),
                ],
                line,
                !pass,
            );
        }
        Ok(())
    };
    let mut rng = stats::stream(seed, 0xCE, 0);
    let ys: Vec<Point<M>> = (0..n_centers).map(|_| space.sample_codeword(&mut rng)).collect();
    check(&sub, "sub", ys, 1)?;
    match sup {
        Some(sup) => {
            let xs: Vec<Point<M>> = (0..n_centers).map(|_| space.sample_reference(&mut rng)).collect();
            check(&sup, "super", xs, 2)?;
        }
        None => t.summaries.push("super: no super certificate for this space".into()),
    }
    Ok(t)
}
