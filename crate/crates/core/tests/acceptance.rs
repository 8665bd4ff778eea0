//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use hybrid_repeater::density::bell_weights;
use hybrid_repeater::detectors::{povm_matrix_element, DetectorModel, Outcome};
use hybrid_repeater::fock::{povm_element_series, two_probe_fock_state, FockDetection};
use hybrid_repeater::protocols::{
    alice_state, ideal_lossless_state, run_new_protocol, run_protocol_i, run_protocol_ii,
    JointDetector, ProtocolResult, ENV_MODE,
};
use hybrid_repeater::states::gram_overlap;
use hybrid_repeater::{Complex64, ProtocolParams64};

const L0: f64 = 25.0;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, title: &str, passed: bool, detail: String) {
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {id:>2} {title}: {detail}");
        if !passed {
            self.failures += 1;
        }
    }
}

/// 200 points: 9 (theta, l/l0) combinations, `2 alpha^2 sin^2(theta/2)` log-spaced over [1e-3, 8].
fn grid() -> Vec<ProtocolParams64> {
    let mut out = Vec::new();
    let mut combo = 0;
    for theta in [0.01, 0.1, 1.0] {
        for ratio in [0.04, 0.4, 1.6] {
            let count = if combo < 2 { 23 } else { 22 };
            combo += 1;
            let h = f64::sin(theta / 2.0);
            for i in 0..count {
                let g = (1e-3f64.ln() + (8f64.ln() - 1e-3f64.ln()) * i as f64 / (count - 1) as f64)
                    .exp();
                let alpha = (g / (2.0 * h * h)).sqrt();
                out.push(ProtocolParams64::new(alpha, theta, ratio * L0, L0).unwrap());
            }
        }
    }
    out
}

fn x_of(p: &ProtocolParams64) -> f64 {
    p.alpha * p.alpha * f64::sin(p.theta / 2.0).powi(2)
}

fn t_of(p: &ProtocolParams64) -> f64 {
    (-p.l / p.l0).exp()
}

fn pnr_runs(points: &[ProtocolParams64]) -> Vec<ProtocolResult<f64>> {
    points
        .iter()
        .map(|p| run_new_protocol(p, &DetectorModel::Pnr, &DetectorModel::Pnr).unwrap())
        .collect()
}

fn closed_forms(report: &mut Report, points: &[ProtocolParams64]) -> Vec<ProtocolResult<f64>> {
    let start = Instant::now();
    let runs = pnr_runs(points);
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst = 0.0_f64;
    for (p, r) in points.iter().zip(&runs) {
        let (x, t) = (x_of(p), t_of(p));
        let ps = -(-2.0 * t * x).exp_m1();
        let f = (1.0 + (-2.0 * (1.0 - t) * x).exp()) / 2.0;
        worst = worst
            .max((r.success_probability - ps).abs())
            .max((r.fidelity - f).abs());
    }
    report.line(
        1,
        "closed-form P_s and F (ideal counting)",
        worst < 1e-9 && elapsed < 5.0 && points.len() == 200,
        format!(
            "{} points, max error {worst:.2e}, {elapsed:.2} s",
            points.len()
        ),
    );
    runs
}

fn boundary_saturation(
    report: &mut Report,
    points: &[ProtocolParams64],
    runs: &[ProtocolResult<f64>],
) {
    let mut worst = 0.0_f64;
    for (p, r) in points.iter().zip(runs) {
        let t = t_of(p);
        let s = (1.0 - r.success_probability).max(0.0);
        let f = (1.0 + s.powf((1.0 - t) / t)) / 2.0;
        worst = worst.max((r.fidelity - f).abs());
    }
    report.line(
        2,
        "runs lie on the optimal frontier",
        worst < 1e-9,
        format!("max error {worst:.2e}"),
    );
}

fn ideal_threshold(report: &mut Report, points: &[ProtocolParams64], runs: &[ProtocolResult<f64>]) {
    let td = DetectorModel::threshold(1.0, 0.0).unwrap();
    let (mut dps, mut df) = (0.0_f64, 0.0_f64);
    for (p, r) in points.iter().zip(runs) {
        let t = run_new_protocol(p, &td, &td).unwrap();
        dps = dps.max((t.success_probability - r.success_probability).abs());
        df = df.max((t.fidelity - (1.0 + (-2.0 * x_of(p)).exp()) / 2.0).abs());
    }
    report.line(
        3,
        "ideal threshold detectors",
        dps < 1e-10 && df < 1e-9,
        format!("P_s vs counting {dps:.2e}, F vs closed form {df:.2e}"),
    );
}

fn single_error_type(
    report: &mut Report,
    points: &[ProtocolParams64],
    runs: &[ProtocolResult<f64>],
) {
    let dets = [
        DetectorModel::threshold(1.0, 0.0).unwrap(),
        DetectorModel::threshold(0.89, 0.0).unwrap(),
        DetectorModel::threshold(0.12, 0.0).unwrap(),
    ];
    let (mut psi, mut off) = (0.0_f64, 0.0_f64);
    let mut heralds = 0;
    let mut scan = |r: &ProtocolResult<f64>| {
        for o in r.successes() {
            if let Some(rho) = o.corrected_state() {
                let w = bell_weights(&rho).unwrap();
                psi = psi.max(w.psi_plus + w.psi_minus);
                off = off.max(w.max_off_diagonal);
                heralds += 1;
            }
        }
    };
    for (p, r) in points.iter().zip(runs) {
        scan(r);
        for d in &dets {
            scan(&run_new_protocol(p, d, d).unwrap());
        }
    }
    report.line(
        4,
        "one error type on every herald (nu = 0)",
        psi < 1e-9 && off < 1e-9,
        format!("{heralds} heralds, max Psi weight {psi:.2e}, max off-diagonal {off:.2e}"),
    );
}

fn no_double_clicks(
    report: &mut Report,
    points: &[ProtocolParams64],
    runs: &[ProtocolResult<f64>],
) {
    let both_fired = |r: &ProtocolResult<f64>| {
        r.outcomes
            .iter()
            .filter(|o| matches!(o.outcomes[0].1, Outcome::Above(0) | Outcome::Click))
            .filter(|o| matches!(o.outcomes[1].1, Outcome::Above(0) | Outcome::Click))
            .map(|o| o.probability)
            .sum::<f64>()
    };
    let td = DetectorModel::threshold(0.89, 0.0).unwrap();
    let mut worst = 0.0_f64;
    for (p, r) in points.iter().zip(runs) {
        worst = worst.max(both_fired(r));
        worst = worst.max(both_fired(&run_new_protocol(p, &td, &td).unwrap()));
    }
    report.line(
        5,
        "no double clicks without dark counts",
        worst < 1e-12,
        format!("max probability {worst:.2e}"),
    );
}

fn dark_counts(report: &mut Report, points: &[ProtocolParams64]) {
    let mut worst: f64 = 1.0;
    let mut n = 0;
    for (eta, nu) in [(0.89, 1.4e-6), (0.12, 3.2e-7)] {
        let td = DetectorModel::threshold(eta, nu).unwrap();
        for p in points {
            let r = run_new_protocol(p, &td, &td).unwrap();
            let ps = r.success_probability;
            if !(0.05..=0.95).contains(&ps) {
                continue;
            }
            let outside = r.bell_weights.psi_plus + r.bell_weights.psi_minus;
            let ratio = outside / (nu * (1.0 / ps - 1.0));
            let factor = if ratio >= 1.0 { ratio } else { 1.0 / ratio };
            worst = worst.max(factor);
            n += 1;
        }
    }
    report.line(
        6,
        "dark-count errors scale as nu (1/P_s - 1)",
        worst <= 2.0 && n > 0,
        format!("{n} points, worst factor {worst:.3}"),
    );
}

fn loss_dephasing(report: &mut Report, points: &[ProtocolParams64]) {
    let mut worst = 0.0_f64;
    let mut framed = true;
    for p in points {
        let lossy = alice_state(p)
            .unwrap()
            .reduced_operator(&[ENV_MODE])
            .unwrap();
        let ideal = ideal_lossless_state(p)
            .unwrap()
            .reduced_operator(&[])
            .unwrap();
        let (t, x) = (t_of(p), x_of(p));
        let q = (1.0 + (-2.0 * (1.0 - t) * x).exp()) / 2.0;
        match lossy.max_abs_diff(&ideal.phase_flip(0, q).unwrap()) {
            Some(d) => worst = worst.max(d),
            None => framed = false,
        }
    }
    report.line(
        7,
        "fiber loss acts as memory dephasing",
        framed && worst < 1e-12,
        format!("max entry distance {worst:.2e}"),
    );
}

fn fock_oracle(report: &mut Report) {
    let dets = [
        DetectorModel::Pnr,
        DetectorModel::threshold(0.89, 1.4e-6).unwrap(),
        DetectorModel::threshold(0.12, 3.2e-7).unwrap(),
    ];
    let mut worst = 0.0_f64;
    let mut entries = 0;
    for i in 0..30 {
        let theta = 0.6 + 0.9 * i as f64 / 29.0;
        let l = [0.0, 5.0, 12.0, 25.0, 40.0][i % 5];
        let t = (-l / L0).exp();
        // alpha <= 3 keeps the input tail at n = 40 negligible; cap |beta|^2 = 2 T alpha^2 sin^2(theta/2) at 4
        let alpha = 0.5 + 2.5 * ((7 * i) % 30) as f64 / 29.0;
        let alpha = alpha.min((4.0 / (2.0 * t)).sqrt() / f64::sin(theta / 2.0));
        let p = ProtocolParams64::new(alpha, theta, l, L0).unwrap();
        let d = dets[i % 3];
        let branch = run_new_protocol(&p, &d, &d).unwrap();
        let fock = FockDetection::new(&two_probe_fock_state(&p, 40).unwrap(), d, d);
        let mut ps = 0.0;
        let mut heralded = hybrid_repeater::QubitPairDensity64::zero();
        for e in &branch.outcomes {
            let w = fock
                .joint_weight(&e.outcomes[0].1, &e.outcomes[1].1)
                .unwrap();
            let pf = w.trace() / fock.norm_sqr();
            worst = worst.max((pf - e.probability).abs());
            if let Some(rho) = &e.conditional_state {
                let raw = w
                    .scaled(1.0 / fock.norm_sqr())
                    .max_abs_diff(&rho.scaled(e.probability));
                worst = worst.max(raw);
                // conditioning on a numerically null event only normalises roundoff
                if e.probability > 1e-12 {
                    worst = worst.max(w.normalized().unwrap().max_abs_diff(rho));
                    entries += 16;
                }
            }
            if e.success {
                ps += pf;
                heralded = heralded + e.correction.unwrap().apply(&w);
            }
        }
        let f = bell_weights(&heralded.normalized().unwrap())
            .unwrap()
            .phi_plus;
        worst = worst.max((ps - branch.success_probability).abs());
        worst = worst.max((f - branch.fidelity).abs());
    }

    let mut povm = 0.0_f64;
    for k in 0..20 {
        let a1 = Complex64::from_polar(0.2 + 0.09 * k as f64, 0.7 * k as f64);
        let a2 = Complex64::from_polar(1.9 - 0.08 * k as f64, -1.3 * k as f64);
        let models = [
            (DetectorModel::Pnr, Outcome::Count(k % 7)),
            (DetectorModel::Pnr, Outcome::Above(k % 5)),
            (
                DetectorModel::threshold(0.89, 1.4e-6).unwrap(),
                Outcome::Click,
            ),
            (
                DetectorModel::threshold(0.12, 3.2e-7).unwrap(),
                Outcome::NoClick,
            ),
        ];
        for (m, o) in models {
            let s = povm_element_series(&m, &o, a1, a2, 80).unwrap();
            povm = povm.max((s - povm_matrix_element(&m, &o, a1, a2).unwrap()).norm());
        }
    }
    report.line(
        8,
        "truncated Fock oracle agreement",
        worst < 1e-6 && povm < 1e-8,
        format!("30 instances, {entries} state entries, max deviation {worst:.2e}; POVM series {povm:.2e}"),
    );
}

/// Linear interpolation of `ps` at fidelity `f` on a curve sorted by decreasing fidelity.
fn ps_at(curve: &[(f64, f64)], f: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((p0, f0), (p1, f1)) = (w[0], w[1]);
        (f <= f0 && f >= f1 && f0 > f1).then(|| p0 + (p1 - p0) * (f0 - f) / (f0 - f1))
    })
}

fn figure_shape(report: &mut Report) {
    let base = ProtocolParams64::new(1.0, 0.01, 10.0, L0).unwrap();
    let alphas: Vec<f64> = (1..=400).map(|i| 2.0 * i as f64).collect();
    let mut new = Vec::new();
    let mut two = Vec::new();
    for &a in &alphas {
        let p = base.with_alpha(a).unwrap();
        let r = run_new_protocol(&p, &DetectorModel::Pnr, &DetectorModel::Pnr).unwrap();
        new.push((r.success_probability, r.fidelity));
        let r = run_protocol_ii(&p, &DetectorModel::Pnr).unwrap();
        two.push((r.success_probability, r.fidelity));
    }
    let mut compared = 0;
    let mut ordered = true;
    for k in 1..1000 {
        let f = 0.5 + 0.5 * k as f64 / 1000.0;
        if let (Some(a), Some(b)) = (ps_at(&new, f), ps_at(&two, f)) {
            compared += 1;
            ordered &= a >= b - 1e-12;
        }
    }

    // representative: operating points within 0.1 of the best homodyne fidelity
    let mut cases = Vec::new();
    for i in 3..=20 {
        for window in [0.25, 0.5, 1.0] {
            let r = run_protocol_i(&base.with_alpha(20.0 * i as f64).unwrap(), window).unwrap();
            let b = r.bell_weights;
            let mut errors = [b.phi_minus, b.psi_plus, b.psi_minus];
            errors.sort_by(|a, b| b.total_cmp(a));
            cases.push((r.fidelity, errors[1]));
        }
    }
    let best = cases.iter().map(|c| c.0).fold(0.0, f64::max);
    let representative: Vec<_> = cases.iter().filter(|c| c.0 >= best - 0.1).collect();
    let min_second = representative
        .iter()
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    let cases = representative.len();
    report.line(
        9,
        "curve ordering and homodyne error structure",
        ordered && compared > 100 && cases > 0 && min_second > 1e-4,
        format!("{compared} fidelity levels ordered: {ordered}; {cases} homodyne cases, smallest second error {min_second:.2e}"),
    );
}

fn usd_equality(report: &mut Report, points: &[ProtocolParams64], runs: &[ProtocolResult<f64>]) {
    let (mut dps, mut df, mut eq) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (p, r) in points.iter().zip(runs) {
        let t = t_of(p);
        let h = p.theta / 2.0;
        let u = |j: f64| Complex64::from_polar(t.sqrt() * p.alpha, j * h);
        let v = |j: f64| Complex64::from_polar((1.0 - t).sqrt() * p.alpha, j * h);
        let uo = gram_overlap(u(-1.0), u(1.0)).norm();
        let vo = gram_overlap(v(-1.0), v(1.0)).norm();
        dps = dps.max((r.success_probability - (1.0 - uo)).abs());
        df = df.max((r.fidelity - (1.0 + vo) / 2.0).abs());
        eq = eq.max(((1.0 - t) * uo.ln() - t * vo.ln()).abs());
    }
    report.line(
        10,
        "discrimination bounds are met with equality",
        dps < 1e-9 && df < 1e-9 && eq < 1e-12,
        format!("P_s {dps:.2e}, F {df:.2e}, overlap identity {eq:.2e}"),
    );
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let points = grid();
    let runs = closed_forms(&mut report, &points);
    boundary_saturation(&mut report, &points, &runs);
    ideal_threshold(&mut report, &points, &runs);
    single_error_type(&mut report, &points, &runs);
    no_double_clicks(&mut report, &points, &runs);
    dark_counts(&mut report, &points);
    loss_dephasing(&mut report, &points);
    fock_oracle(&mut report);
    figure_shape(&mut report);
    usd_equality(&mut report, &points, &runs);
    if report.failures == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", report.failures);
        ExitCode::FAILURE
    }
}
