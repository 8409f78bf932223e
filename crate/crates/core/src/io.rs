//! CSV writers for the artifact schemas. Every file starts with a fixed
//! header row; floats use the shortest round-trip representation and `NaN`
//! for undefined values.

use std::io::{self, Write};

use num_complex::Complex64 as C64;

use crate::classical::{ClassicalEnsemble, ClassicalState, LimitCycle, PhaseMap};
use crate::dynamics::EvolutionRecord;
use crate::husimi::QGrid;
use crate::spectra::{SpectrumResult, SteadyState};

pub const SPECTRUM_HEADER: &str = "re,im";
pub const GAPS_HEADER: &str = "eta,eps_scaled,gap1,gap2,osc_freq,metastability_ratio,partial_flag";
pub const STEADY_HEADER: &str = "eta,eps_scaled,dim,n_photon,n_rescaled,var_n,purity,fluct_eta_sigma,fluct_eta2_var,q_max,q_argmax_abs,residual,truncation_tail";
pub const DISTRIBUTION_HEADER: &str = "eta,eps_scaled,n,p";
pub const EVOLVE_HEADER: &str = "t,n_photon,n_rescaled,var_n,purity,q_max,trace_err";
pub const HUSIMI_HEADER: &str = "re_alpha,im_alpha,q";
pub const TRAJECTORY_HEADER: &str = "t,re,im";
pub const ENSEMBLE_HEADER: &str = "re,im";
pub const PHASE_MAP_HEADER: &str = "re0,im0,phase,singular_flag";
pub const CYCLE_HEADER: &str = "re,im";

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

pub fn write_spectrum<W: Write>(w: &mut W, spec: &SpectrumResult) -> io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for l in &spec.eigenvalues {
        writeln!(w, "{},{}", l.re, l.im)?;
    }
    Ok(())
}

/// One gaps row; the caller writes [`GAPS_HEADER`] once.
pub fn write_gaps_row<W: Write>(w: &mut W, eta: f64, eps_scaled: f64, spec: &SpectrumResult) -> io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        eta,
        eps_scaled,
        opt(spec.gap1),
        opt(spec.gap2),
        opt(spec.osc_freq),
        opt(spec.metastability_ratio),
        u8::from(spec.partial)
    )
}

/// Summary of a steady state together with its Q maximum.
#[derive(Debug, Clone, Copy)]
pub struct SteadyRow {
    pub eta: f64,
    pub eps_scaled: f64,
    pub dim: usize,
    pub q_max: f64,
    pub q_argmax: C64,
}

pub fn write_steady_row<W: Write>(w: &mut W, row: &SteadyRow, ss: &SteadyState) -> io::Result<()> {
    let o = &ss.observables;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        row.eta,
        row.eps_scaled,
        row.dim,
        o.n_photon,
        row.eta * o.n_photon,
        o.var_n,
        o.purity,
        o.fluct_eta_sigma,
        o.fluct_eta2_var,
        row.q_max,
        row.q_argmax.norm(),
        ss.residual,
        ss.truncation_tail
    )
}

pub fn write_distribution_rows<W: Write>(w: &mut W, eta: f64, eps_scaled: f64, probs: &[f64]) -> io::Result<()> {
    for (n, p) in probs.iter().enumerate() {
        writeln!(w, "{eta},{eps_scaled},{n},{p}")?;
    }
    Ok(())
}

pub fn write_evolution<W: Write>(w: &mut W, rec: &EvolutionRecord) -> io::Result<()> {
    writeln!(w, "{EVOLVE_HEADER}")?;
    for i in 0..rec.len() {
        let q = rec.q_max.as_ref().map_or(f64::NAN, |q| q[i]);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            rec.times[i], rec.n_photon[i], rec.n_rescaled[i], rec.var_n[i], rec.purity[i], q, rec.trace_err[i]
        )?;
    }
    Ok(())
}

/// Grid values row-major, imaginary axis slow.
pub fn write_husimi<W: Write>(w: &mut W, grid: &QGrid) -> io::Result<()> {
    writeln!(w, "{HUSIMI_HEADER}")?;
    for (ii, &y) in grid.im_axis.iter().enumerate() {
        for (ir, &x) in grid.re_axis.iter().enumerate() {
            writeln!(w, "{},{},{}", x, y, grid.get(ir, ii))?;
        }
    }
    Ok(())
}

pub fn write_trajectory<W: Write>(w: &mut W, states: &[ClassicalState]) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in states {
        writeln!(w, "{},{},{}", s.t, s.alpha.re, s.alpha.im)?;
    }
    Ok(())
}

pub fn write_ensemble<W: Write>(w: &mut W, ens: &ClassicalEnsemble) -> io::Result<()> {
    writeln!(w, "{ENSEMBLE_HEADER}")?;
    for a in &ens.samples_t {
        writeln!(w, "{},{}", a.re, a.im)?;
    }
    Ok(())
}

pub fn write_phase_map<W: Write>(w: &mut W, map: &PhaseMap) -> io::Result<()> {
    writeln!(w, "{PHASE_MAP_HEADER}")?;
    for (ii, &y) in map.im_axis.iter().enumerate() {
        for (ir, &x) in map.re_axis.iter().enumerate() {
            writeln!(w, "{},{},{},{}", x, y, map.get(ir, ii), u8::from(map.is_singular(ir, ii)))?;
        }
    }
    Ok(())
}

/// `period=` and `freq=` lines, then the `re,im` samples of one period.
pub fn write_cycle<W: Write>(w: &mut W, cycle: &LimitCycle) -> io::Result<()> {
    writeln!(w, "period={}", cycle.period)?;
    writeln!(w, "freq={}", cycle.freq)?;
    writeln!(w, "{CYCLE_HEADER}")?;
    for s in &cycle.points {
        writeln!(w, "{},{}", s.alpha.re, s.alpha.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_csv_layout() {
        let spec = SpectrumResult::from_eigenvalues(vec![C64::new(0.0, 0.0), C64::new(-0.5, 0.0), C64::new(-0.2, 3.0), C64::new(-0.2, -3.0)], 1e-6, 1e-9, false);
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &spec).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "re,im");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,0");
    }

    #[test]
    fn gaps_row_fields() {
        let spec = SpectrumResult::from_eigenvalues(vec![C64::new(0.0, 0.0), C64::new(-0.5, 0.0), C64::new(-0.2, 3.0), C64::new(-0.2, -3.0)], 1e-6, 1e-9, true);
        let mut buf = Vec::new();
        write_gaps_row(&mut buf, 0.1, 2.0, &spec).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let f: Vec<&str> = text.trim().split(',').collect();
        assert_eq!(f.len(), GAPS_HEADER.split(',').count());
        assert_eq!(f[2], "0.2");
        assert_eq!(f[3], "0.5");
        assert_eq!(f[4], "3");
        assert_eq!(f[6], "1");
    }
}
