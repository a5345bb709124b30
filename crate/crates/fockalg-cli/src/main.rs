//! Command line driver: parse a model config, run the requested analysis,
//! and emit a deterministic report. Exit codes: 0 success, 1 validation
//! error, 2 property failure. Wall-clock timing goes to stderr so that the
//! reports on stdout and under --out stay byte-identical for a fixed
//! (config, seed) pair.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fockalg::error::{FockError, Result};
use fockalg::fock_core::Statistics;
use fockalg::hamiltonians::{build_pauli_fierz, build_qfh, descend, form_constant, trotter_errors};
use fockalg::mourre::{rho_matrix, thresholds_cutoff, thresholds_numeric, RhoProfile};
use fockalg::operators::dgamma;
use fockalg::spectral::{
    default_dedup_tol, eigh, eigh_operator, fibered_union, ground_state_report,
    hvz_essential_spectrum, morphism_spectrum_check, EssMethod, SpectrumSet,
};
use fockalg::{hermiticity_defect, max_abs, C64, CMatrix};
use fockalg_cli::config::{parse_config, BuiltModel, FamilyName, InteractionKind, ModelConfig};
use fockalg_cli::report::{Format, Report, Section, Table};
use fockalg_cli::verify::run_suites;
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fockalg", version, about = "Cutoff Fock-space operator algebra and spectral analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe the occupation basis of the configured model.
    Basis(AnalysisArgs),
    /// Diagonalize the configured Hamiltonian.
    Spectrum(AnalysisArgs),
    /// Essential-spectrum recursion, probe witness, and fibered families.
    Ess(AnalysisArgs),
    /// Windowed commutator positivity profile and threshold sets.
    Mourre(AnalysisArgs),
    /// Splitting-error decay for the configured schedule.
    Trotter(AnalysisArgs),
    /// Run property-verification suites and print the ledger.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct AnalysisArgs {
    /// Model configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Seed recorded in the report; analyses are deterministic.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads for grid sweeps (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Directory for the report file (also printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Structured)]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run; empty or "all" runs everything.
    suites: Vec<String>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Accepted for interface symmetry; suites run single-threaded.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Directory for the ledger file (also printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Structured)]
    format: FormatArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Structured,
    Tabular,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Structured => Format::Structured,
            FormatArg::Tabular => Format::Tabular,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let started = Instant::now();
    let outcome = run(&cli);
    eprintln!("timing: {:.3}s", started.elapsed().as_secs_f64());
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Returns the number of failed property checks.
fn run(cli: &Cli) -> Result<usize> {
    match &cli.command {
        Command::Basis(args) => run_analysis(args, "basis", cmd_basis),
        Command::Spectrum(args) => run_analysis(args, "spectrum", cmd_spectrum),
        Command::Ess(args) => run_analysis(args, "ess", cmd_ess),
        Command::Mourre(args) => run_analysis(args, "mourre", cmd_mourre),
        Command::Trotter(args) => run_analysis(args, "trotter", cmd_trotter),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn run_analysis(
    args: &AnalysisArgs,
    name: &str,
    body: fn(&ModelConfig, &BuiltModel, &AnalysisArgs) -> Result<(Report, usize)>,
) -> Result<usize> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        FockError::InvalidParameter(format!("--config {}: {e}", args.config.display()))
    })?;
    let config = parse_config(&text)?;
    let model = config.build()?;
    let (report, failures) = body(&config, &model, args)?;
    let mut rendered = report.render(args.format.into());
    if !rendered.ends_with('\n') {
        rendered.push('\n');
    }
    print!("{rendered}");
    if let Some(dir) = &args.out {
        let ext = match args.format {
            FormatArg::Structured => "txt",
            FormatArg::Tabular => "tsv",
        };
        write_out(dir, &format!("report-{name}.{ext}"), &rendered)?;
    }
    Ok(failures)
}

fn write_out(dir: &PathBuf, file: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| FockError::InvalidParameter(format!("--out {}: {e}", dir.display())))?;
    let path = dir.join(file);
    std::fs::write(&path, content)
        .map_err(|e| FockError::InvalidParameter(format!("--out {}: {e}", path.display())))
}

fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    let threads = if jobs == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        jobs
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| FockError::InvalidParameter(format!("--jobs: {e}")))
}

fn statistics_name(s: Statistics) -> &'static str {
    match s {
        Statistics::Boson => "boson",
        Statistics::Fermion => "fermion",
    }
}

fn family_name(f: FamilyName) -> &'static str {
    match f {
        FamilyName::Relativistic => "relativistic",
        FamilyName::Nonrelativistic => "nonrelativistic",
    }
}

fn run_section(seed: u64) -> Section {
    let mut s = Section::new("run");
    s.integer("seed", seed as i64);
    s
}

fn model_section(config: &ModelConfig, model: &BuiltModel) -> Result<Section> {
    let basis = model.spec.basis()?;
    let mut s = Section::new("model");
    s.text("statistics", statistics_name(model.spec.statistics));
    s.integer("d", model.spec.d as i64);
    s.integer("n_max", model.spec.n_max as i64);
    s.integer("dimension", basis.dim() as i64);
    let kind = match config.interaction.kind {
        InteractionKind::None => "none",
        InteractionKind::Polynomial => "polynomial",
        InteractionKind::WeylSum => "weyl_sum",
    };
    s.text("interaction", kind);
    if let Some((family, mass, _)) = &model.family {
        s.text("family", family_name(*family));
        s.number("mass", *mass);
    }
    Ok(s)
}

fn spectrum_table(name: &str, values: &[f64]) -> Table {
    Table {
        name: name.to_string(),
        columns: vec!["index".to_string(), "energy".to_string()],
        rows: values
            .iter()
            .enumerate()
            .map(|(k, &e)| vec![k as f64, e])
            .collect(),
    }
}

fn set_table(name: &str, set: &SpectrumSet) -> Table {
    Table {
        name: name.to_string(),
        columns: vec!["point".to_string(), "multiplicity".to_string()],
        rows: set
            .points
            .iter()
            .zip(&set.multiplicities)
            .map(|(&p, &m)| vec![p, m as f64])
            .collect(),
    }
}

fn cmd_basis(config: &ModelConfig, model: &BuiltModel, args: &AnalysisArgs) -> Result<(Report, usize)> {
    let basis = model.spec.basis()?;
    let mut report = Report::new("basis");
    report.section(run_section(args.seed));
    report.section(model_section(config, model)?);

    let top = match basis.statistics {
        Statistics::Boson => basis.n_max,
        Statistics::Fermion => basis.n_max.min(basis.d),
    };
    let mut sectors = Section::new("sectors");
    let mut rows = Vec::new();
    for n in 0..=top {
        let range = basis.sector_range(n)?;
        rows.push(vec![n as f64, (range.end - range.start) as f64, range.start as f64]);
    }
    sectors.table(Table {
        name: "sector_dimensions".to_string(),
        columns: vec![
            "sector".to_string(),
            "dimension".to_string(),
            "first_index".to_string(),
        ],
        rows,
    });
    report.section(sectors);
    Ok((report, 0))
}

fn cmd_spectrum(
    config: &ModelConfig,
    model: &BuiltModel,
    args: &AnalysisArgs,
) -> Result<(Report, usize)> {
    let mut failures = 0usize;
    let mut report = Report::new("spectrum");
    report.section(run_section(args.seed));
    report.section(model_section(config, model)?);

    let h = build_qfh(&model.spec)?;
    let dec = eigh_operator(&h)?;
    let mut spectrum = Section::new("spectrum");
    spectrum.integer("dimension", dec.eigenvalues.len() as i64);
    spectrum.table(spectrum_table("eigenvalues", &dec.eigenvalues));
    report.section(spectrum);

    if config.analysis.as_ref().map_or(false, |a| a.ess_spectrum) {
        let ess = hvz_essential_spectrum(&model.spec)?;
        let tol = default_dedup_tol(&dec.eigenvalues);
        let gs = ground_state_report(&h, &ess.result, tol)?;
        let mut section = Section::new("ground_state");
        section.number("ground_energy", gs.ground_energy);
        section.integer("multiplicity", gs.multiplicity as i64);
        section.number("gap_to_essential", gs.gap_to_essential);
        report.section(section);
    }

    if let Some(pf_spec) = &model.small_system {
        let pf = build_pauli_fierz(pf_spec)?;
        let pf_dec = eigh(&pf.matrix)?;
        let mut section = Section::new("small_system");
        section.integer("ell", pf.ell as i64);
        section.integer("dimension", pf.matrix.nrows() as i64);
        section.number("ground_energy", pf_dec.eigenvalues[0]);
        section.table(spectrum_table("eigenvalues", &pf_dec.eigenvalues));
        report.section(section);

        let mut bound = Section::new("form_bound");
        let mut rows = Vec::new();
        let mut constants = Vec::new();
        for &r in &[1.0f64, 10.0, 100.0] {
            let c = form_constant(pf_spec, r)?;
            rows.push(vec![r, c]);
            constants.push(c);
        }
        bound.table(Table {
            name: "constants".to_string(),
            columns: vec!["r".to_string(), "constant".to_string()],
            rows,
        });
        let monotone = constants
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        bound.checked("monotone_defect", monotone, 1e-12);
        if !(monotone <= 1e-12) {
            failures += 1;
        }
        report.section(bound);
    }

    Ok((report, failures))
}

/// A configured probe mode: the last one-particle direction when it is
/// decoupled in `h` and avoided by every interaction vector.
fn probe_setting(model: &BuiltModel) -> Option<(usize, f64)> {
    let spec = &model.spec;
    if spec.statistics != Statistics::Boson || spec.d < 2 || spec.n_max < 1 {
        return None;
    }
    let probe = spec.d - 1;
    if !spec.interaction.avoids_mode(probe) {
        return None;
    }
    let h = &model.h_matrix;
    let scale = max_abs(h).max(1.0);
    for j in 0..spec.d {
        if j != probe {
            let coupling = h[(j, probe)].norm().max(h[(probe, j)].norm());
            if coupling > 1e-12 * scale {
                return None;
            }
        }
    }
    Some((probe, h[(probe, probe)].re))
}

fn cmd_ess(config: &ModelConfig, model: &BuiltModel, args: &AnalysisArgs) -> Result<(Report, usize)> {
    let mut failures = 0usize;
    let mut report = Report::new("ess");
    report.section(run_section(args.seed));
    report.section(model_section(config, model)?);

    let ess = hvz_essential_spectrum(&model.spec)?;
    let mut section = Section::new("ess");
    section.text(
        "method",
        match ess.method {
            EssMethod::HvzRecursion => "hvz_recursion",
            EssMethod::FiberedUnion => "fibered_union",
            EssMethod::DirectWitness => "direct_witness",
        },
    );
    if let Some(min) = ess.result.min() {
        section.number("min", min);
    }
    section.table(set_table("points", &ess.result));
    for (k, line) in ess.provenance.iter().enumerate() {
        section.text(&format!("step_{k}"), line);
    }
    report.section(section);

    let mut witness = Section::new("witness");
    match probe_setting(model) {
        Some((probe, lambda_e)) => {
            let defect = morphism_spectrum_check(&model.spec, lambda_e)?;
            witness.integer("probe_mode", probe as i64);
            witness.number("probe_energy", lambda_e);
            witness.checked("defect", defect, 1e-9);
            if !(defect <= 1e-9) {
                failures += 1;
            }
        }
        None => {
            witness.text(
                "status",
                "not configured (needs a bosonic model whose last mode is \
                 decoupled in h and avoided by the interaction)",
            );
        }
    }
    report.section(witness);

    if let Some((family, mass, grid)) = &model.family {
        if config.interaction.kind == InteractionKind::None {
            let fibers: Vec<CMatrix> = grid
                .iter()
                .map(|&p| {
                    CMatrix::from_element(
                        1,
                        1,
                        C64::new(fockalg_cli::config::dispersion(*family, *mass, p), 0.0),
                    )
                })
                .collect();
            let pool = worker_pool(args.jobs)?;
            let dedup = 1e-9;
            let reports = pool.install(|| {
                fibers
                    .par_iter()
                    .map(|f| {
                        fibered_union(
                            std::slice::from_ref(f),
                            model.spec.statistics,
                            model.spec.n_max,
                            &model.spec.interaction,
                            dedup,
                        )
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            let mut acc: Option<SpectrumSet> = None;
            for r in &reports {
                acc = Some(match acc {
                    Some(prev) => prev.union(&r.result, dedup),
                    None => r.result.clone(),
                });
            }
            let union = acc.expect("nonempty grid");
            let mut fibered = Section::new("fibered");
            fibered.text("family", family_name(*family));
            fibered.number("mass", *mass);
            fibered.integer("fibers", fibers.len() as i64);
            if let Some(min) = union.min() {
                fibered.number("min", min);
            }
            fibered.table(set_table("points", &union));
            report.section(fibered);
        }
    }

    Ok((report, failures))
}

fn cmd_mourre(config: &ModelConfig, model: &BuiltModel, args: &AnalysisArgs) -> Result<(Report, usize)> {
    let mourre = config
        .analysis
        .as_ref()
        .and_then(|a| a.mourre.as_ref())
        .ok_or_else(|| {
            FockError::InvalidParameter("analysis.mourre: required for the mourre command".into())
        })?;
    let a_one = model.conjugate.as_ref().ok_or_else(|| {
        FockError::InvalidParameter("conjugate.a: required for the mourre command".into())
    })?;
    let defect = hermiticity_defect(a_one);
    if defect > 1e-12 * max_abs(a_one).max(1.0) {
        return Err(FockError::NotHermitian { defect });
    }

    let mut failures = 0usize;
    let mut report = Report::new("mourre");
    report.section(run_section(args.seed));
    report.section(model_section(config, model)?);

    let basis = model.spec.basis()?;
    let h = build_qfh(&model.spec)?;
    let a = dgamma(&basis, a_one)?;
    let grid = mourre.grid.values()?;
    let step = (mourre.grid.hi - mourre.grid.lo) / (mourre.grid.points - 1) as f64;

    let pool = worker_pool(args.jobs)?;
    let values = pool.install(|| {
        grid.par_iter()
            .map(|&lambda| rho_matrix(&h.matrix, &a.matrix, lambda, mourre.epsilon))
            .collect::<Result<Vec<f64>>>()
    })?;
    let one_particle_values = pool.install(|| {
        grid.par_iter()
            .map(|&lambda| rho_matrix(&model.h_matrix, a_one, lambda, mourre.epsilon))
            .collect::<Result<Vec<f64>>>()
    })?;

    let profile = RhoProfile {
        grid: grid.clone(),
        epsilon: mourre.epsilon,
        values,
    };
    let mut section = Section::new("profile");
    section.number("epsilon", mourre.epsilon);
    section.number("delta", mourre.delta);
    section.table(Table {
        name: "rho".to_string(),
        columns: vec!["lambda".to_string(), "rho".to_string()],
        rows: grid
            .iter()
            .zip(&profile.values)
            .map(|(&l, &v)| vec![l, v])
            .collect(),
    });
    report.section(section);

    // The scan cannot separate structure finer than the window width plus
    // the grid step, so flagged runs are consolidated at that resolution.
    // A run symmetric around a threshold collapses onto it exactly; sums
    // of consolidated points then stay within one resolution of the true
    // lattice instead of compounding the window width per layer.
    let resolution = mourre.epsilon + step + 1e-12;
    let dedup = 1e-9;
    let numeric = thresholds_numeric(&profile, mourre.delta, resolution);
    let mut thresholds = Section::new("thresholds");
    thresholds.text("construction", "numeric sub-delta scan");
    thresholds.table(set_table("flagged", &numeric.points));
    report.section(thresholds);

    // Layered comparison: one-particle threshold scan plus the exact point
    // spectra of every lower cutoff, assembled by the recursion.
    let one_particle_profile = RhoProfile {
        grid: grid.clone(),
        epsilon: mourre.epsilon,
        values: one_particle_values,
    };
    let tau_h = thresholds_numeric(&one_particle_profile, mourre.delta, resolution);
    let mut one_particle = Section::new("one_particle");
    one_particle.table(set_table("tau", &tau_h.points));
    report.section(one_particle);

    let mut levels = Vec::with_capacity(model.spec.n_max);
    let mut chain = Vec::with_capacity(model.spec.n_max);
    let mut cursor = model.spec.clone();
    for _ in 0..model.spec.n_max {
        cursor = descend(&cursor)?;
        chain.push(cursor.clone());
    }
    chain.reverse();
    for lower in &chain {
        let dec = eigh_operator(&build_qfh(lower)?)?;
        levels.push(SpectrumSet::from_values(&dec.eigenvalues, dedup));
    }
    let full_dec = eigh_operator(&h)?;
    let point_spectrum = SpectrumSet::from_values(&full_dec.eigenvalues, dedup);

    let mut comparison = Section::new("comparison");
    if tau_h.points.is_empty() {
        comparison.text(
            "status",
            "one-particle scan flagged no thresholds; layered set unavailable",
        );
    } else {
        let layered = thresholds_cutoff(&tau_h.points, &levels, dedup)?;
        let expected = layered.points.union(&point_spectrum, dedup);
        comparison.table(set_table("expected", &expected));
        let flagged_to_expected = numeric.points.directed_distance(&expected);
        let in_range: Vec<f64> = expected
            .points
            .iter()
            .copied()
            .filter(|&q| q >= grid[0] && q <= grid[grid.len() - 1])
            .collect();
        let expected_to_flagged = if in_range.is_empty() {
            0.0
        } else {
            SpectrumSet::from_values(&in_range, dedup).directed_distance(&numeric.points)
        };
        comparison.checked("flagged_to_expected", flagged_to_expected, resolution);
        comparison.checked("expected_in_range_to_flagged", expected_to_flagged, resolution);
        if !(flagged_to_expected <= resolution) {
            failures += 1;
        }
        if !(expected_to_flagged <= resolution) {
            failures += 1;
        }
    }
    report.section(comparison);

    Ok((report, failures))
}

fn cmd_trotter(
    config: &ModelConfig,
    model: &BuiltModel,
    args: &AnalysisArgs,
) -> Result<(Report, usize)> {
    let trotter = config
        .analysis
        .as_ref()
        .and_then(|a| a.trotter.as_ref())
        .ok_or_else(|| {
            FockError::InvalidParameter("analysis.trotter: required for the trotter command".into())
        })?;
    if trotter.schedule.is_empty() {
        return Err(FockError::EmptyInput("analysis.trotter.schedule"));
    }

    let mut report = Report::new("trotter");
    report.section(run_section(args.seed));
    report.section(model_section(config, model)?);

    // Split the Hamiltonian into its additive free part and the coupling.
    let (split_name, free, coupling) = if let Some(pf_spec) = &model.small_system {
        let pf = build_pauli_fierz(pf_spec)?;
        ("free_part_vs_coupling", pf.free_part, pf.coupling)
    } else {
        let basis = model.spec.basis()?;
        let h = build_qfh(&model.spec)?;
        let free = dgamma(&basis, &model.h_matrix)?.matrix;
        let coupling = &h.matrix - &free;
        ("lift_vs_interaction", free, coupling)
    };

    let errors = trotter_errors(&free, &coupling, trotter.t, &trotter.schedule)?;
    let mut section = Section::new("trotter");
    section.text("split", split_name);
    section.number("t", trotter.t);
    let mut rows = Vec::new();
    for (k, (&n, &e)) in trotter.schedule.iter().zip(&errors).enumerate() {
        let ratio = if k == 0 { f64::NAN } else { e / errors[k - 1] };
        rows.push(vec![n as f64, e, ratio]);
    }
    section.table(Table {
        name: "errors".to_string(),
        columns: vec!["steps".to_string(), "error".to_string(), "ratio".to_string()],
        rows,
    });
    report.section(section);
    Ok((report, 0))
}

fn cmd_verify(args: &VerifyArgs) -> Result<usize> {
    let ledger = run_suites(&args.suites, args.seed)?;
    let mut out = String::new();
    let mut failures = 0usize;
    for entry in &ledger {
        if !entry.passed() {
            failures += 1;
        }
        out.push_str(&entry.render());
        out.push('\n');
    }
    out.push_str(&format!(
        "verified {} checks, {} failures\n",
        ledger.len(),
        failures
    ));
    print!("{out}");
    if let Some(dir) = &args.out {
        write_out(dir, "report-verify.txt", &out)?;
    }
    let _ = args.format;
    let _ = args.jobs;
    Ok(failures)
}
