//! Job scheduling and result tables.
//!
//! Each geometry gets one job for the geometry-level rows (HF, FCI, bare
//! active-space FCI) and one job per CC rank. Jobs of a geometry share one
//! sector Hamiltonian, built by whichever job gets there first and dropped
//! after the last one finishes. Workers send rows to a single collector;
//! rows are ordered by job, so the output does not depend on scheduling.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::Instant;

use ducc_core::ccsolver::{partition_amplitudes, ActiveSpace, CcOptions, CcProblem, CcSolution};
use ducc_core::downfold::{
    build_sigma_ext_sparse, downfold_bch, downfold_exact, ground_state, project_cas,
};
use ducc_core::fockspace::{enumerate_sector, lower_hamiltonian, SectorBasis, SectorMatrix};
use ducc_core::linalg::lowest_eigenpair;
use ducc_core::molint::{build_chain, compute_integrals, sto3g_basis};
use ducc_core::pds::{compute_moments, pds_energy};
use ducc_core::scf::{
    run_rhf, to_spin_orbitals, MolecularOrbitals, ScfOptions, SpinOrbitalHamiltonian,
};
use ducc_core::DVector;
use log::{info, warn};
use sha2::{Digest, Sha256};

use crate::config::{Baseline, ExperimentConfig, PdsReference, Solver, Transform};
use crate::formats;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    /// Overrides `cc_tol` of every config.
    pub cc_tol: Option<f64>,
    /// Directory for heff exports and the amplitude cache.
    pub out_dir: Option<PathBuf>,
    pub cache: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 1,
            cc_tol: None,
            out_dir: None,
            cache: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Converged,
    Failed(String),
    /// Cell kept for completeness but not computed.
    NotComputed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub system: usize,
    pub spacing: f64,
    pub method: String,
    pub energy: Option<f64>,
    pub status: Status,
    pub seconds: f64,
    /// Solver iterations, where meaningful.
    pub iterations: Option<usize>,
}

impl ResultRow {
    fn new(system: usize, spacing: f64, method: String) -> Self {
        ResultRow {
            system,
            spacing,
            method,
            energy: None,
            status: Status::Converged,
            seconds: 0.0,
            iterations: None,
        }
    }

    fn ok(mut self, energy: f64, seconds: f64) -> Self {
        self.energy = Some(energy);
        self.seconds = seconds;
        self
    }

    fn failed(mut self, message: impl Into<String>) -> Self {
        self.status = Status::Failed(message.into());
        self
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// True when no row records a failure.
pub fn all_converged(rows: &[ResultRow]) -> bool {
    rows.iter().all(|r| !matches!(r.status, Status::Failed(_)))
}

pub fn rank_name(rank: usize) -> &'static str {
    match rank {
        1 => "S",
        2 => "SD",
        3 => "SDT",
        4 => "SDTQ",
        _ => "?",
    }
}

struct System {
    mos: MolecularOrbitals,
    ham: SpinOrbitalHamiltonian,
    basis: Arc<SectorBasis>,
    h: SectorMatrix,
}

fn build_system(n_atoms: usize, spacing: f64) -> ducc_core::Result<System> {
    let geom = build_chain(n_atoms, spacing)?;
    let ints = compute_integrals(&geom, &sto3g_basis(&geom))?;
    let mos = run_rhf(&ints, n_atoms, &ScfOptions::default())?;
    let ham = to_spin_orbitals(&ints, &mos)?;
    let basis = Arc::new(enumerate_sector(2 * n_atoms, n_atoms / 2, n_atoms / 2)?);
    let h = lower_hamiltonian(&ham, &basis)?;
    Ok(System { mos, ham, basis, h })
}

enum SlotState {
    Empty,
    Ready(Arc<System>),
    Failed(String),
}

/// Lazily built system shared by the jobs of one geometry.
struct Slot {
    state: Mutex<SlotState>,
    remaining: AtomicUsize,
}

impl Slot {
    fn get(&self, n_atoms: usize, spacing: f64) -> Result<Arc<System>, String> {
        let mut state = self.state.lock().unwrap();
        if let SlotState::Empty = *state {
            info!("building H{n_atoms} R={spacing:.2}");
            *state = match build_system(n_atoms, spacing) {
                Ok(sys) => SlotState::Ready(Arc::new(sys)),
                Err(e) => SlotState::Failed(e.to_string()),
            };
        }
        match &*state {
            SlotState::Ready(sys) => Ok(sys.clone()),
            SlotState::Failed(msg) => Err(msg.clone()),
            SlotState::Empty => unreachable!(),
        }
    }

    fn release(&self) {
        if self.remaining.fetch_sub(1, Ordering::AcqRel) == 1 {
            *self.state.lock().unwrap() = SlotState::Empty;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum JobKind {
    Geometry,
    Rank(usize),
}

struct Job {
    geometry: usize,
    kind: JobKind,
}

/// Runs every job of `cfg` and returns its rows in a fixed order.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Vec<ResultRow> {
    let spaces: Vec<ActiveSpace> = cfg
        .active_spaces
        .iter()
        .map(|s| ActiveSpace::from_one_based(s, cfg.system).expect("validated active space"))
        .collect();
    let needs_cc = cfg.baselines.contains(&Baseline::Cc) || !spaces.is_empty();
    let mut jobs = Vec::new();
    for g in 0..cfg.spacings.len() {
        jobs.push(Job {
            geometry: g,
            kind: JobKind::Geometry,
        });
        if needs_cc {
            for &rank in &cfg.cc_ranks {
                jobs.push(Job {
                    geometry: g,
                    kind: JobKind::Rank(rank),
                });
            }
        }
    }
    let slots: Vec<Slot> = (0..cfg.spacings.len())
        .map(|g| Slot {
            state: Mutex::new(SlotState::Empty),
            remaining: AtomicUsize::new(jobs.iter().filter(|j| j.geometry == g).count()),
        })
        .collect();
    let ctx = Context {
        cfg,
        opts,
        spaces: &spaces,
        cc_tol: opts.cc_tol.unwrap_or(cfg.cc_tol),
    };

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Vec<ResultRow>)>();
    let mut collected: Vec<Option<Vec<ResultRow>>> = vec![None; jobs.len()];
    std::thread::scope(|scope| {
        for _ in 0..opts.workers.max(1).min(jobs.len().max(1)) {
            let tx = tx.clone();
            let (jobs, slots, next, ctx) = (&jobs, &slots, &next, &ctx);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(k) else { break };
                let spacing = cfg.spacings[job.geometry];
                let slot = &slots[job.geometry];
                let rows = match slot.get(cfg.system, spacing) {
                    Ok(sys) => match job.kind {
                        JobKind::Geometry => ctx.geometry_rows(&sys, spacing),
                        JobKind::Rank(rank) => ctx.rank_rows(&sys, spacing, rank),
                    },
                    Err(msg) => ctx
                        .labels(job.kind)
                        .into_iter()
                        .map(|m| {
                            ResultRow::new(cfg.system, spacing, m)
                                .failed(format!("setup failed: {msg}"))
                        })
                        .collect(),
                };
                slot.release();
                if tx.send((k, rows)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (k, rows) in rx {
            collected[k] = Some(rows);
        }
    });
    // Within a geometry: geometry-level rows, then CC rows, then the rest.
    let mut tagged: Vec<(usize, u8, ResultRow)> = Vec::new();
    for (job, rows) in jobs.iter().zip(collected) {
        for row in rows.into_iter().flatten() {
            let class = match job.kind {
                JobKind::Geometry => 0,
                JobKind::Rank(rank) if row.method == rank_name(rank) => 1,
                JobKind::Rank(_) => 2,
            };
            tagged.push((job.geometry, class, row));
        }
    }
    tagged.sort_by_key(|(g, class, _)| (*g, *class));
    tagged.into_iter().map(|(_, _, row)| row).collect()
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    spaces: &'a [ActiveSpace],
    cc_tol: f64,
}

impl Context<'_> {
    fn space_suffix(&self, act: &ActiveSpace) -> String {
        if self.spaces.len() > 1 {
            format!(" {act}")
        } else {
            String::new()
        }
    }

    fn rank_suffix(&self, rank: usize) -> String {
        if self.cfg.cc_ranks.len() > 1 {
            format!(" ({})", rank_name(rank))
        } else {
            String::new()
        }
    }

    /// Row labels of a job, in emission order.
    fn labels(&self, kind: JobKind) -> Vec<String> {
        let cfg = self.cfg;
        let mut out = Vec::new();
        match kind {
            JobKind::Geometry => {
                if cfg.baselines.contains(&Baseline::Hf) {
                    out.push("HF".to_string());
                }
                if cfg.baselines.contains(&Baseline::Fci) {
                    out.push("FCI".to_string());
                }
                for act in self.spaces {
                    let sfx = self.space_suffix(act);
                    if cfg.baselines.contains(&Baseline::Casscf) {
                        out.push(format!("CASSCF(4,4){sfx}"));
                    }
                    if cfg.baselines.contains(&Baseline::ActiveFci) {
                        out.push(format!("Active-space FCI{sfx}"));
                    }
                }
            }
            JobKind::Rank(rank) => {
                if cfg.baselines.contains(&Baseline::Cc) {
                    out.push(rank_name(rank).to_string());
                }
                for act in self.spaces {
                    let (sfx, rsfx) = (self.space_suffix(act), self.rank_suffix(rank));
                    for _ in cfg.transforms.iter().filter(|t| **t == Transform::Exact) {
                        for s in &cfg.solvers {
                            out.push(match s {
                                Solver::Diag => format!("DUCC-{}{sfx}", rank_name(rank)),
                                Solver::Pds(k) => format!("PDS({k}){rsfx}{sfx}"),
                            });
                        }
                    }
                    for t in &cfg.transforms {
                        if let Transform::Bch(r) = t {
                            out.push(format!("Max_R={r}{rsfx}{sfx}"));
                        }
                    }
                }
            }
        }
        out
    }

    fn geometry_rows(&self, sys: &System, spacing: f64) -> Vec<ResultRow> {
        let cfg = self.cfg;
        let row = |m: &str| ResultRow::new(cfg.system, spacing, m.to_string());
        let mut rows = Vec::new();
        if cfg.baselines.contains(&Baseline::Hf) {
            let mut r = row("HF").ok(sys.mos.total_energy, 0.0);
            r.iterations = Some(sys.mos.iterations);
            rows.push(r);
        }
        if cfg.baselines.contains(&Baseline::Fci) {
            let t0 = Instant::now();
            rows.push(match lowest_eigenpair(&sys.h.data, 1e-9, 1000) {
                Ok((e, _)) => row("FCI").ok(e, t0.elapsed().as_secs_f64()),
                Err(e) => row("FCI").failed(e.to_string()),
            });
        }
        for act in self.spaces {
            let sfx = self.space_suffix(act);
            if cfg.baselines.contains(&Baseline::Casscf) {
                let mut r = row(&format!("CASSCF(4,4){sfx}"));
                r.status = Status::NotComputed("n/a — out of scope".into());
                rows.push(r);
            }
            if cfg.baselines.contains(&Baseline::ActiveFci) {
                let t0 = Instant::now();
                let label = format!("Active-space FCI{sfx}");
                rows.push(match project_cas(&sys.h, act) {
                    Ok(heff) => {
                        row(&label).ok(ground_state(&heff).energy, t0.elapsed().as_secs_f64())
                    }
                    Err(e) => row(&label).failed(e.to_string()),
                });
            }
        }
        rows
    }

    fn cache_path(&self, spacing: f64, rank: usize) -> Option<PathBuf> {
        if !self.opts.cache {
            return None;
        }
        let dir = self.opts.out_dir.as_ref()?.join("cache");
        let floor = CcOptions::default().denominator_floor;
        let key = format!(
            "system={};basis={};R={:e};rank={rank};floor={floor:e}",
            self.cfg.system, self.cfg.basis, spacing
        );
        let digest = Sha256::digest(key.as_bytes());
        let hex: String = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
        Some(dir.join(format!("{hex}.amp")))
    }

    fn solve(&self, sys: &System, spacing: f64, rank: usize) -> ducc_core::Result<CcSolution> {
        let opts = CcOptions {
            conv: self.cc_tol,
            ..CcOptions::default()
        };
        let problem = CcProblem::new(
            &sys.h,
            &sys.ham.orbital_energies,
            rank,
            opts.denominator_floor,
        )?;
        let cache = self.cache_path(spacing, rank);
        let start =
            cache
                .as_ref()
                .filter(|p| p.exists())
                .and_then(|p| match formats::read_cluster(p) {
                    Ok(t) => Some(problem.from_operator(&t)),
                    Err(e) => {
                        warn!("ignoring amplitude cache: {e}");
                        None
                    }
                });
        let sol = problem.solve(&opts, start.as_deref())?;
        if let Some(path) = cache {
            if let Err(e) = store_atomically(&path, &formats::format_cluster(&sol.amplitudes)) {
                warn!("cannot write amplitude cache {}: {e}", path.display());
            }
        }
        Ok(sol)
    }

    fn rank_rows(&self, sys: &System, spacing: f64, rank: usize) -> Vec<ResultRow> {
        let cfg = self.cfg;
        let n = cfg.system;
        let labels = self.labels(JobKind::Rank(rank));
        let t0 = Instant::now();
        let sol = match self.solve(sys, spacing, rank) {
            Ok(sol) => sol,
            Err(e) => {
                let msg = format!("CC{}: {e}", rank_name(rank));
                return labels
                    .into_iter()
                    .map(|m| ResultRow::new(n, spacing, m).failed(msg.clone()))
                    .collect();
            }
        };
        let cc_seconds = t0.elapsed().as_secs_f64();
        info!(
            "H{n} R={spacing:.2} CC{} {:.6} in {} iterations",
            rank_name(rank),
            sol.energy,
            sol.iterations
        );

        let mut rows = Vec::new();
        let row = |m: String| ResultRow::new(n, spacing, m);
        if cfg.baselines.contains(&Baseline::Cc) {
            let mut r = row(rank_name(rank).to_string()).ok(sol.energy, cc_seconds);
            r.iterations = Some(sol.iterations);
            rows.push(r);
        }
        for act in self.spaces {
            let (sfx, rsfx) = (self.space_suffix(act), self.rank_suffix(rank));
            let (_, t_ext) = partition_amplitudes(&sol.amplitudes, act, n);
            let sigma = match build_sigma_ext_sparse(&t_ext, &sys.basis, act) {
                Ok(s) => s,
                Err(e) => {
                    let msg = e.to_string();
                    rows.extend(
                        self.space_labels(rank, act)
                            .into_iter()
                            .map(|m| row(m).failed(msg.clone())),
                    );
                    continue;
                }
            };
            for t in &cfg.transforms {
                match *t {
                    Transform::Exact => {
                        let t1 = Instant::now();
                        let heff = downfold_exact(&sys.h, &sigma, act);
                        let dt = t1.elapsed().as_secs_f64();
                        for s in &cfg.solvers {
                            let label = match s {
                                Solver::Diag => format!("DUCC-{}{sfx}", rank_name(rank)),
                                Solver::Pds(k) => format!("PDS({k}){rsfx}{sfx}"),
                            };
                            let heff = match &heff {
                                Ok(h) => h,
                                Err(e) => {
                                    rows.push(row(label).failed(e.to_string()));
                                    continue;
                                }
                            };
                            rows.push(match s {
                                Solver::Diag => row(label).ok(ground_state(heff).energy, dt),
                                Solver::Pds(k) => {
                                    let t2 = Instant::now();
                                    match pds_reference(self.cfg.pds_reference, heff.dim())
                                        .and_then(|phi| {
                                            compute_moments(heff, &phi, *k)
                                                .map_err(|e| e.to_string())
                                        })
                                        .and_then(|m| pds_energy(&m).map_err(|e| e.to_string()))
                                    {
                                        Ok(est) => {
                                            row(label).ok(est.energy, t2.elapsed().as_secs_f64())
                                        }
                                        Err(e) => row(label).failed(e),
                                    }
                                }
                            });
                        }
                        if let (true, Ok(heff), Some(dir)) =
                            (cfg.export_heff, &heff, &self.opts.out_dir)
                        {
                            let path = dir.join("heff").join(heff_file_name(n, spacing, rank, act));
                            let res = fs::create_dir_all(path.parent().unwrap())
                                .map_err(|e| e.to_string())
                                .and_then(|_| {
                                    formats::export_heff(heff, n / 2, n / 2, &path)
                                        .map_err(|e| e.to_string())
                                });
                            if let Err(e) = res {
                                warn!("heff export failed: {e}");
                            }
                        }
                    }
                    Transform::Bch(_) => {}
                }
            }
            let orders: Vec<usize> = cfg
                .transforms
                .iter()
                .filter_map(|t| {
                    if let Transform::Bch(r) = t {
                        Some(*r)
                    } else {
                        None
                    }
                })
                .collect();
            if !orders.is_empty() {
                let t1 = Instant::now();
                let result = downfold_bch(&sys.h, &sigma, act, &orders);
                let dt = t1.elapsed().as_secs_f64();
                for (i, max_r) in orders.iter().enumerate() {
                    let label = format!("Max_R={max_r}{rsfx}{sfx}");
                    rows.push(match &result {
                        Ok(h) => row(label).ok(ground_state(&h[i]).energy, dt),
                        Err(e) => row(label).failed(e.to_string()),
                    });
                }
            }
        }
        rows
    }

    fn space_labels(&self, rank: usize, act: &ActiveSpace) -> Vec<String> {
        let sfx = self.space_suffix(act);
        self.labels(JobKind::Rank(rank))
            .into_iter()
            .filter(|l| l.ends_with(&sfx) && l.as_str() != rank_name(rank))
            .collect()
    }
}

fn pds_reference(reference: PdsReference, dim: usize) -> Result<DVector<f64>, String> {
    match reference {
        PdsReference::Hf => Ok(DVector::from_fn(dim, |i, _| if i == 0 { 1.0 } else { 0.0 })),
        PdsReference::Uniform => Ok(DVector::from_element(dim, 1.0 / (dim as f64).sqrt())),
        PdsReference::Determinant(k) if k < dim => {
            Ok(DVector::from_fn(dim, |i, _| if i == k { 1.0 } else { 0.0 }))
        }
        PdsReference::Determinant(k) => Err(format!(
            "reference determinant {k} outside the {dim}-dimensional CAS"
        )),
    }
}

pub fn heff_file_name(n_atoms: usize, spacing: f64, rank: usize, act: &ActiveSpace) -> String {
    let orbitals: Vec<String> = act.one_based().iter().map(|k| k.to_string()).collect();
    format!(
        "H{n_atoms}_R{spacing:.2}_{}_{}.heff",
        rank_name(rank),
        orbitals.join("-")
    )
}

fn store_atomically(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

/// `results.csv` content. Wall times are written only when `timings` is set,
/// so default output is byte-identical across reruns.
pub fn results_csv(rows: &[ResultRow], timings: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["system", "R", "method", "energy", "converged", "seconds"])
        .unwrap();
    for r in rows {
        let energy = match (&r.status, r.energy) {
            (Status::NotComputed(_), _) => "n/a".to_string(),
            (_, Some(e)) => format!("{e:.6}"),
            (_, None) => String::new(),
        };
        let converged = match r.status {
            Status::Converged => "true",
            Status::Failed(_) => "false",
            Status::NotComputed(_) => "n/a",
        };
        let seconds = if timings {
            format!("{:.3}", r.seconds)
        } else {
            String::new()
        };
        w.write_record([
            format!("H{}", r.system),
            format!("{:.2}", r.spacing),
            r.method.clone(),
            energy,
            converged.to_string(),
            seconds,
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Aligned tables, one per system: geometries down, methods across.
pub fn results_text(title: &str, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    let mut systems: Vec<usize> = Vec::new();
    for r in rows {
        if !systems.contains(&r.system) {
            systems.push(r.system);
        }
    }
    let mut notes = Vec::new();
    for sys in systems {
        let subset: Vec<&ResultRow> = rows.iter().filter(|r| r.system == sys).collect();
        let mut methods: Vec<&str> = Vec::new();
        let mut spacings: Vec<f64> = Vec::new();
        for r in &subset {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
            if !spacings.contains(&r.spacing) {
                spacings.push(r.spacing);
            }
        }
        let mut table: Vec<Vec<String>> = vec![std::iter::once("R".to_string())
            .chain(methods.iter().map(|m| m.to_string()))
            .collect()];
        for &s in &spacings {
            let mut line = vec![format!("{s:.2}")];
            for m in &methods {
                let cell = subset.iter().find(|r| r.spacing == s && r.method == *m);
                line.push(match cell {
                    None => String::new(),
                    Some(r) => match (&r.status, r.energy) {
                        (Status::Converged, Some(e)) => format!("{e:.6}"),
                        (Status::NotComputed(why), _) => why.clone(),
                        (Status::Failed(msg), _) => {
                            notes.push(format!("H{sys} R={s:.2} {m}: {msg}"));
                            "failed".to_string()
                        }
                        (Status::Converged, None) => String::new(),
                    },
                });
            }
            table.push(line);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| {
                table
                    .iter()
                    .map(|l| l[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        writeln!(out, "\nH{sys}").unwrap();
        for line in &table {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}", w = *w))
                .collect();
            writeln!(out, "{}", cells.join("  ")).unwrap();
        }
    }
    if !notes.is_empty() {
        writeln!(out, "\nFailures").unwrap();
        for n in notes {
            writeln!(out, "  {n}").unwrap();
        }
    }
    out
}

/// Writes `results.csv` and `results.txt` into `dir`.
pub fn write_results(
    dir: &Path,
    title: &str,
    rows: &[ResultRow],
    timings: bool,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(rows, timings))?;
    fs::write(dir.join("results.txt"), results_text(title, rows))
}
