use hqp::dynamics::{
    basis_label, evolve, iswap_gate, ControlSchedule, CouplingMatrix, DensityMatrix, EvolveOptions, QubitSpec, Segment,
};
use hqp::material::{hyperbolic_bands, permittivity_at, BandType, DEFAULT_BAND_GRID};
use hqp::optics::{field_map, waveguide_foci, DipoleSource, MapGrid};
use hqp::resonance::{
    coupling_j12_hsr, design_window, gamma_self, hsr_aspect, hsr_locus, pair_response, resonance_map, upper_band, GammaMethod, MapProxy,
    PairSpec, ResonatorGeometry, SeriesControl,
};
use hqp::units::{cm1_to_mev, HBAR_MEV_PS, KT_ROOM_MEV};
use hqp::C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{Cell, Table, Writer};
use crate::scenario::{resolve, Axis, CouplingMode, Loaded};
use crate::CliError;

/// Process exit status of a command that ran to completion.
pub type Status = i32;

fn operating_omega(l: &Loaded) -> Result<f64, CliError> {
    match l.scenario.operating.omega {
        Some(w) => Ok(w),
        None => Ok(upper_band(&l.model)?.center()),
    }
}

pub fn permittivity(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let axis = l.scenario.axis("omega", Axis::new(600.0, 1800.0, 1201));
    let mut t = Table::new(&["omega_cm1", "re_eps_par", "im_eps_par", "re_eps_perp", "im_eps_perp"]);
    for omega in axis.values() {
        let e = permittivity_at(&l.model, omega)?;
        t.push(vec![
            Cell::F(omega),
            Cell::F(e.eps_parallel.re),
            Cell::F(e.eps_parallel.im),
            Cell::F(e.eps_perp.re),
            Cell::F(e.eps_perp.im),
        ]);
    }
    let path = w.table("permittivity.csv", &t)?;
    println!("wrote {} ({} rows)", path.display(), t.len());
    Ok(0)
}

pub fn bands(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let axis = l.scenario.axis("omega", Axis::new(100.0, 3000.0, DEFAULT_BAND_GRID));
    let bands = hyperbolic_bands(&l.model, (axis.start, axis.stop), axis.points.max(2))?;
    let mut t = Table::new(&["band", "type", "omega_low_cm1", "omega_high_cm1", "center_cm1", "center_mev"]);
    for (k, b) in bands.iter().enumerate() {
        let kind = match b.band_type {
            BandType::TypeI => "TypeI",
            BandType::TypeII => "TypeII",
        };
        println!("band {k}: {kind} [{:.3}, {:.3}] cm^-1, centre {:.2} meV", b.omega_low, b.omega_high, cm1_to_mev(b.center()));
        t.push(vec![
            Cell::I(k as i64),
            Cell::S(kind.into()),
            Cell::F(b.omega_low),
            Cell::F(b.omega_high),
            Cell::F(b.center()),
            Cell::F(cm1_to_mev(b.center())),
        ]);
    }
    w.table("bands.csv", &t)?;
    Ok(0)
}

pub fn fieldmap(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let omega = operating_omega(l)?;
    let eps = permittivity_at(&l.model, omega)?;
    let rho = l.scenario.axis("rho", Axis::new(0.25, 40.0, 160));
    let z = l.scenario.axis("z", Axis::new(-20.0, 20.0, 160));
    let grid = MapGrid { rho_range: (rho.start, rho.stop), z_range: (z.start, z.stop), n_rho: rho.points, n_z: z.points };
    let src = DipoleSource { moment: l.scenario.fieldmap.moment, position: [0.0; 3] };
    let map = field_map(&eps, &src, &grid)?;
    let mut t = Table::new(&["rho_nm", "z_nm", "intensity"]);
    for (iz, &zz) in map.z.iter().enumerate() {
        for (ir, &rr) in map.rho.iter().enumerate() {
            t.push(vec![Cell::F(rr), Cell::F(zz), Cell::F(map.at(iz, ir))]);
        }
    }
    let path = w.table("fieldmap.csv", &t)?;
    println!("wrote {} at {omega:.2} cm^-1 ({} masked cells on the lossless cone)", path.display(), map.masked_cells());
    Ok(0)
}

pub fn foci(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let omega = operating_omega(l)?;
    let eps = permittivity_at(&l.model, omega)?;
    let radius = l.scenario.geometry.radius.unwrap_or(100.0);
    let spec = &l.scenario.fieldmap;
    let f = waveguide_foci(&eps, radius, spec.a0, spec.m_max)?;
    let mut t = Table::new(&["m", "z_nm", "width_nm"]);
    for (k, width) in f.widths.iter().enumerate() {
        let m = k + 1;
        t.push(vec![Cell::I(m as i64), Cell::F(m as f64 * f.delta_z), Cell::F(*width)]);
    }
    w.table("foci.csv", &t)?;
    println!("foci spacing {:.4} nm at {omega:.2} cm^-1, R = {radius} nm", f.delta_z);
    Ok(0)
}

pub fn resonance(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let s = &l.scenario;
    let om = s.axis("omega", Axis::new(1340.0, 1660.0, 64));
    let asp = s.axis("d_over_r", Axis::new(0.8, 4.0, 64));
    let proxy = MapProxy {
        radius: s.geometry.radius.unwrap_or(100.0),
        spacer: s.geometry.spacer,
        eps_spacer: C64::from(s.geometry.eps_spacer),
        p: s.operating.p,
        control: SeriesControl::default(),
    };
    let map = resonance_map(&l.model, (asp.start, asp.stop), (om.start, om.stop), (om.points, asp.points), &proxy)?;
    let mut t = Table::new(&["omega_cm1", "d_over_r", "log10_abs_mev", "hyperbolic"]);
    for (i, &omega) in map.omega.iter().enumerate() {
        for (j, &a) in map.d_over_r.iter().enumerate() {
            t.push(vec![Cell::F(omega), Cell::F(a), Cell::F(map.at(i, j)), Cell::B(map.hyperbolic[i])]);
        }
    }
    w.table("resonance_map.csv", &t)?;
    let band = upper_band(&l.model)?;
    let locus = hsr_locus(&l.model, &band, &map.d_over_r, s.operating.order)?;
    let argmax = map.column_argmax();
    let mut lt = Table::new(&["d_over_r", "locus_omega_cm1", "ridge_omega_cm1"]);
    for (j, &a) in map.d_over_r.iter().enumerate() {
        lt.push(vec![Cell::F(a), Cell::F(locus[j].unwrap_or(f64::NAN)), Cell::F(map.omega[argmax[j]])]);
    }
    w.table("resonance_locus.csv", &lt)?;
    println!("resonance map {}x{} written", om.points, asp.points);
    Ok(0)
}

pub fn coupling_sweep(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let s = &l.scenario;
    let radii = s.axis("radius", Axis::new(20.0, 400.0, 39)).values();
    if radii.is_empty() || s.operating.orders.is_empty() {
        return Err(CliError::Config("coupling sweep is empty (no radii or no orders)".into()));
    }
    let omega = operating_omega(l)?;
    let p = s.operating.p;
    let cells: Vec<(u32, f64)> = s.operating.orders.iter().flat_map(|&m| radii.iter().map(move |&r| (m, r))).collect();
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .map(|&(m, r)| -> Result<Vec<Cell>, CliError> {
            let d = hsr_aspect(&l.model, omega, m)? * r;
            let geom = ResonatorGeometry {
                radius: r,
                length: d,
                spacer: s.geometry.spacer,
                eps_spacer: C64::from(s.geometry.eps_spacer),
                eccentricity: 0.0,
            };
            let cf = coupling_j12_hsr(&l.model, &geom, omega, p, m)?;
            let series = pair_response(&l.model, &geom, omega, &PairSpec::opposite(p, p), SeriesControl::default())?;
            let g11 = gamma_self(&l.model, &geom, omega, p, GammaMethod::Quadrature)?.gamma;
            Ok(vec![
                Cell::I(m as i64),
                Cell::F(r),
                Cell::F(d),
                Cell::F(omega),
                Cell::F(cf.loss_length_form),
                Cell::F(cf.loss_ratio_form),
                Cell::F(series.j),
                Cell::F(series.gamma),
                Cell::F(g11),
                Cell::F(cf.loss_length_form / g11),
                Cell::B(cf.loss_length_form > KT_ROOM_MEV),
            ])
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(&[
        "order",
        "radius_nm",
        "length_nm",
        "omega_cm1",
        "j_loss_length_mev",
        "j_loss_ratio_mev",
        "j_series_mev",
        "gamma12_series_mev",
        "gamma11_mev",
        "j_over_gamma11",
        "above_kt_room",
    ]);
    for row in rows {
        t.push(row);
    }
    let path = w.table("coupling_sweep.csv", &t)?;
    println!("wrote {} ({} rows, orders {:?})", path.display(), t.len(), s.operating.orders);
    Ok(0)
}

pub fn design_window_cmd(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let r = resolve(&l.scenario, &l.model)?;
    let op = &l.scenario.operating;
    let dw = design_window(&l.model, &r.geometry, r.omega, op.r_eg, op.margin)?;
    println!("omega     {:.3} cm^-1 ({:.2} meV)", r.omega, cm1_to_mev(r.omega));
    println!("geometry  R = {:.3} nm, d = {:.3} nm, h = {:.3} nm", r.geometry.radius, r.geometry.length, r.geometry.spacer);
    println!("h*        {:.5} nm", dw.h_star);
    println!("h_c       {:.4} nm", dw.h_c);
    println!("h_c/h*    {:.2}", dw.ratio);
    println!("feasible  {} (margin {}: {}·h* <= h <= h_c)", dw.feasible, dw.margin, dw.margin);
    let mut t = Table::new(&["omega_cm1", "length_nm", "spacer_nm", "h_star_nm", "h_c_nm", "ratio", "margin", "feasible"]);
    t.push(vec![
        Cell::F(r.omega),
        Cell::F(r.geometry.length),
        Cell::F(r.geometry.spacer),
        Cell::F(dw.h_star),
        Cell::F(dw.h_c),
        Cell::F(dw.ratio),
        Cell::F(dw.margin),
        Cell::B(dw.feasible),
    ]);
    w.table("design_window.csv", &t)?;
    Ok(0)
}

/// Couplings for the register, with notes on any approximation made.
pub fn build_couplings(l: &Loaded, qubits: &[QubitSpec]) -> Result<(CouplingMatrix, Vec<String>), CliError> {
    let s = &l.scenario;
    let mut notes = Vec::new();
    match s.couplings.mode {
        CouplingMode::Manual => Ok((CouplingMatrix::from_rows(&s.couplings.j, &s.couplings.gamma, "manual")?, notes)),
        mode => {
            if qubits.len() != 2 {
                return Err(CliError::Config("couplings from geometry need exactly two qubits (one per end face)".into()));
            }
            let r = resolve(s, &l.model)?;
            let (p1, p2) = (qubits[0].p, qubits[1].p);
            if mode == CouplingMode::ClosedForm {
                let cf = coupling_j12_hsr(&l.model, &r.geometry, r.omega, 1.0, s.operating.order)?;
                let g = |p| gamma_self(&l.model, &r.geometry, r.omega, p, GammaMethod::ClosedForm).map(|d| d.gamma);
                notes.push("closed forms: J12 from the loss-length form, Gamma_ii from the closed-form decay rate, Gamma12 = 0".into());
                Ok((CouplingMatrix::pair(cf.loss_length_form * p1 * p2, g(p1)?, g(p2)?, 0.0, "closed-form")?, notes))
            } else {
                let ctl = SeriesControl::default();
                let pr = pair_response(&l.model, &r.geometry, r.omega, &PairSpec::opposite(p1, p2), ctl)?;
                let g = |p| pair_response(&l.model, &r.geometry, r.omega, &PairSpec::self_response(p), ctl).map(|x| x.gamma);
                if pr.gamma < 0.0 {
                    notes.push(format!("series Gamma12 = {:.4e} meV is negative (out-of-phase collective decay)", pr.gamma));
                }
                Ok((CouplingMatrix::pair(pr.j, g(p1)?, g(p2)?, pr.gamma, "series")?, notes))
            }
        }
    }
}

fn basis_index(label: &str, n: usize) -> Result<usize, CliError> {
    if label.len() != n {
        return Err(CliError::Config(format!("initial state '{label}' must have one letter per qubit ({n})")));
    }
    label.chars().enumerate().try_fold(0usize, |acc, (k, c)| match c {
        'g' => Ok(acc),
        'e' => Ok(acc | 1 << k),
        _ => Err(CliError::Config(format!("initial state '{label}': letters must be 'g' or 'e'"))),
    })
}

pub fn evolve_cmd(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let s = &l.scenario;
    let qubits = s.qubits_or_default();
    let n = qubits.len();
    let (couplings, notes) = build_couplings(l, &qubits)?;
    let segments = if s.evolve.segments.is_empty() {
        let j = couplings.j[(0, 1.min(n - 1))];
        if n < 2 || j == 0.0 {
            return Err(CliError::Config("evolve.segments is empty and there is no exchange to time a default segment".into()));
        }
        vec![Segment::idle(std::f64::consts::PI * HBAR_MEV_PS / (2.0 * j.abs()), vec![true; n])]
    } else {
        s.evolve
            .segments
            .iter()
            .map(|g| Segment {
                duration: g.duration,
                theta: g.theta.clone(),
                drive: if g.drive.is_empty() { vec![C64::new(0.0, 0.0); n] } else { g.drive.iter().map(|d| C64::new(d[0], d[1])).collect() },
                detuning: if g.detuning.is_empty() { qubits.iter().map(|q| q.detuning).collect() } else { g.detuning.clone() },
            })
            .collect()
    };
    let schedule = ControlSchedule { segments };
    let rho0 = DensityMatrix::basis(n, basis_index(&s.evolve.initial, n)?);
    let opts = EvolveOptions { tol: s.evolve.tol, ..EvolveOptions::default() };
    let tr = evolve(&rho0, &qubits, &couplings, &schedule, &opts)?;
    let path = w.csv("evolve_trajectory.csv", &tr.to_csv())?;
    for note in &notes {
        println!("note: {note}");
    }
    let last = tr.last();
    let pops: Vec<String> = last.populations().iter().enumerate().map(|(k, p)| format!("{}={p:.6}", basis_label(n, k))).collect();
    println!("t = {:.6e} ps after {} steps: {}", tr.times.last().unwrap(), tr.steps, pops.join(" "));
    println!("wrote {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct GateSummary {
    coupling_mode: CouplingMode,
    omega_cm1: Option<f64>,
    geometry: Option<ResonatorGeometry>,
    j12_mev: f64,
    gamma11_mev: f64,
    gamma22_mev: f64,
    gamma12_mev: f64,
    gamma_on: bool,
    t_gate_ps: f64,
    avg_fidelity: f64,
    threshold: f64,
    passed: bool,
    notes: Vec<String>,
}

pub fn gate(l: &Loaded, w: &mut Writer) -> Result<Status, CliError> {
    let s = &l.scenario;
    let qubits = s.qubits_or_default();
    if qubits.len() != 2 {
        return Err(CliError::Config("gate needs exactly two qubits".into()));
    }
    let (mut couplings, mut notes) = build_couplings(l, &qubits)?;
    let j = couplings.j[(0, 1)];
    if j < 0.0 {
        notes.push(format!("exchange J12 = {j:.6e} meV is negative; the gate uses |J12| (the sign only flips the iSWAP phase)"));
        couplings.j.iter_mut().for_each(|v| *v = v.abs());
    }
    let opts = EvolveOptions { tol: s.gate.tol, ..EvolveOptions::default() };
    let g = iswap_gate(&qubits, &couplings, s.gate.gamma_on, &opts)?;
    let (omega, geometry) = match s.couplings.mode {
        CouplingMode::Manual => (None, None),
        _ => {
            let r = resolve(s, &l.model)?;
            (Some(r.omega), Some(r.geometry))
        }
    };
    let passed = g.avg_fidelity >= s.gate.threshold;
    let summary = GateSummary {
        coupling_mode: s.couplings.mode,
        omega_cm1: omega,
        geometry,
        j12_mev: couplings.j[(0, 1)],
        gamma11_mev: couplings.gamma[(0, 0)],
        gamma22_mev: couplings.gamma[(1, 1)],
        gamma12_mev: couplings.gamma[(0, 1)],
        gamma_on: s.gate.gamma_on,
        t_gate_ps: g.gate_time,
        avg_fidelity: g.avg_fidelity,
        threshold: s.gate.threshold,
        passed,
        notes,
    };
    w.json("gate_summary.json", &summary)?;
    w.csv("gate_trajectory.csv", &g.trajectory.to_csv())?;
    w.csv("gate_choi.csv", &g.process.choi_csv())?;
    for note in &summary.notes {
        println!("note: {note}");
    }
    println!("J12       {:.6e} meV", summary.j12_mev);
    println!("Gamma     11 {:.6e}, 22 {:.6e}, 12 {:.6e} meV", summary.gamma11_mev, summary.gamma22_mev, summary.gamma12_mev);
    println!("t_gate    {:.6e} ps", g.gate_time);
    println!("F_avg     {:.8}", g.avg_fidelity);
    println!("threshold {} -> {}", s.gate.threshold, if passed { "PASS" } else { "FAIL" });
    Ok(if passed { 0 } else { 3 })
}
