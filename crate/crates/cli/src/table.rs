use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use hybrid_repeater::analytics::{comparator_ii_ps_closed, f_closed, f_td_ideal, ps_closed};
use hybrid_repeater::protocols::{run_new_protocol, run_protocol_i, run_protocol_ii};
use hybrid_repeater::ProtocolParams64;
use rayon::prelude::*;

use crate::config::{Detector, Physics, Protocol};
use crate::CliError;

pub const SWEEP_HEADER: &str =
    "alpha,T,ps,fidelity,w_phi_plus,w_phi_minus,w_psi_plus,w_psi_minus,ps_closed,f_closed";

/// Shortest round-trip decimal, switching to exponent form outside [1e-4, 1e15).
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub alpha: f64,
    pub t: f64,
    pub ps: f64,
    pub fidelity: f64,
    pub weights: [f64; 4],
    pub closed: Option<(f64, f64)>,
}

impl Row {
    pub fn csv(&self) -> String {
        let mut s = format!(
            "{},{},{},{}",
            num(self.alpha),
            num(self.t),
            num(self.ps),
            num(self.fidelity)
        );
        for w in self.weights {
            write!(s, ",{}", num(w)).unwrap();
        }
        match self.closed {
            Some((ps, f)) => write!(s, ",{},{}", num(ps), num(f)).unwrap(),
            None => s.push_str(",,"),
        }
        s
    }
}

/// Closed forms exist for counting detectors and for ideal threshold detectors.
fn closed_forms(phys: &Physics, p: &ProtocolParams64) -> Option<(f64, f64)> {
    let ideal_td = phys.detector == Detector::Td && phys.eta == 1.0 && phys.nu == 0.0;
    match (phys.protocol, phys.detector) {
        (Protocol::New, Detector::Pnr) => Some((ps_closed(p), f_closed(p))),
        (Protocol::New, Detector::Td) if ideal_td => Some((ps_closed(p), f_td_ideal(p))),
        (Protocol::II, Detector::Pnr) => Some((comparator_ii_ps_closed(p), f_closed(p))),
        _ => None,
    }
}

pub fn compute_row(phys: &Physics, alpha: f64) -> Result<Row, CliError> {
    let p = ProtocolParams64::new(alpha, phys.theta, phys.l, phys.l0)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let model = phys.model();
    let r = match phys.protocol {
        Protocol::New => run_new_protocol(&p, &model, &model),
        Protocol::II => run_protocol_ii(&p, &model),
        Protocol::I => run_protocol_i(&p, phys.window),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let w = r.bell_weights;
    Ok(Row {
        alpha,
        t: p.transmittance(),
        ps: r.success_probability,
        fidelity: r.fidelity,
        weights: [w.phi_plus, w.phi_minus, w.psi_plus, w.psi_minus],
        closed: closed_forms(phys, &p),
    })
}

/// Rows in ascending alpha, computed in parallel.
pub fn compute_rows(phys: &Physics, alphas: &[f64]) -> Result<Vec<Row>, CliError> {
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.par_iter().map(|&a| compute_row(phys, a)).collect()
}

/// Comment block opening every output file.
pub fn header(command: &str, fields: &[(String, String)], notes: &[&str]) -> String {
    let mut s = format!(
        "# hrsim {}\n# command: {command}\n",
        env!("CARGO_PKG_VERSION")
    );
    for (k, v) in fields {
        writeln!(s, "# {k}: {v}").unwrap();
    }
    for n in notes {
        writeln!(s, "# note: {n}").unwrap();
    }
    s
}

pub fn sweep_csv(head: &str, rows: &[Row]) -> String {
    let mut s = String::from(head);
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
