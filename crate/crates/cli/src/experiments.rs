use std::collections::BTreeMap;

use qtime_core::bauer::{
    commutator_residual, drift_check, shift_operator, time_operator, EnergyLattice, ExtendedState,
};
use qtime_core::fpf::{measure_distribution, ContourGrid, FamilySpec};
use qtime_core::histories::{decoherence_matrix, ProjectorFamily, DEFAULT_LABEL_CAP};
use qtime_core::linalg::{c, matexp_hermitian, Operator, ProductSpace, StateVector, C64};
use qtime_core::pw::{
    condition_on_clock, condition_on_clocks, constraint_residual, dual_constraint_states,
    dual_constraints, history_state, interaction_kernel, local_eom_residuals, physical_states,
    total_hamiltonian, two_clock_history_state, verify_nonlocal_eom, ClockModel, InteractionSpec,
    KinematicalState, CLOCK, SYSTEM,
};
use qtime_core::tsvf::{
    abl_probability, identity_loop_state, mts_contract, transaction_echo, weak_value,
    TwoStateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AtPath, CliError};
use crate::record::{Table, Value};
use crate::spec::{self, ModelSpec};
use crate::suite;
use crate::Experiment;

/// Everything an experiment contributes to its record.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub table: Table,
}

impl Report {
    fn with_table(table: Table) -> Self {
        Self {
            table,
            ..Self::default()
        }
    }

    fn output(&mut self, key: &str, value: Value) {
        self.outputs.insert(key.to_owned(), value);
    }

    fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_owned(), value);
    }

    fn flag(&mut self, key: &str, pass: bool) {
        self.flags.insert(key.to_owned(), pass);
    }
}

/// Generator for every random draw of one invocation.
pub fn generator(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn run(experiment: Experiment, spec: &ModelSpec, seed: u64) -> Result<Report, CliError> {
    match experiment {
        Experiment::PwEvolve => pw_evolve(spec),
        Experiment::PwConstraint => pw_constraint(spec),
        Experiment::DualClock => dual_clock(spec),
        Experiment::BauerCheck => bauer_check(spec, seed),
        Experiment::Abl => abl(spec),
        Experiment::WeakValue => weak(spec),
        Experiment::Dhist => dhist(spec),
        Experiment::FpfMeasure => fpf_measure(spec),
        Experiment::MtsTrace => mts_trace(spec, seed),
        Experiment::EquivSuite => equiv_suite(spec, seed),
    }
}

const TIMES: &str = "experiment.parameters.times";

fn times(spec: &ModelSpec, default: &[f64], len: usize) -> Result<Vec<f64>, CliError> {
    let t = spec.parameters.times.clone().unwrap_or_else(|| default.to_vec());
    if t.len() != len {
        return Err(CliError::validation(TIMES, format!("expected {len} times, found {}", t.len())));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) || t.iter().any(|x| !x.is_finite()) {
        return Err(CliError::validation(TIMES, "times must be finite and strictly increasing"));
    }
    Ok(t)
}

fn basis_param<'a>(spec: &'a ModelSpec) -> Result<&'a spec::NamedBasis, CliError> {
    let path = "experiment.parameters.basis";
    let name = spec
        .parameters
        .basis
        .as_deref()
        .ok_or_else(|| CliError::validation(path, "name a basis from the bases block"))?;
    spec.basis(name, path)
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn system_clock(spec: &ModelSpec) -> Result<(ClockModel, &Operator), CliError> {
    let cp = spec.clock()?;
    let clock = ClockModel::ideal(cp.dim, cp.omega).at("clock")?;
    Ok((clock, spec.hamiltonian()?))
}

fn pw_evolve(spec: &ModelSpec) -> Result<Report, CliError> {
    if spec.interaction().is_some() {
        return Err(CliError::validation(
            "interaction",
            "pw-evolve covers the free clock; run pw-constraint for interactions",
        ));
    }
    let tol = spec.check_tol(1e-10);
    let (clock, h_r) = system_clock(spec)?;
    let psi0 = spec.initial_state()?;
    let state = history_state(&clock, h_r, psi0).at("initial_state")?;
    let h_t = total_hamiltonian(&clock, h_r, None).at("system.hamiltonian")?;
    let residual = constraint_residual(&h_t, &state).at("system.hamiltonian")?;

    let mut report = Report::with_table(Table::new(["t", "fidelity"]));
    let mut fidelities = Vec::with_capacity(clock.dim());
    for (k, &t) in clock.times().iter().enumerate() {
        let conditioned = condition_on_clock(&state, &clock, k).at("clock")?.normalized().at("initial_state")?;
        let oracle = matexp_hermitian(h_r, t).at("system.hamiltonian")?.apply(psi0);
        let f = conditioned.fidelity(&oracle);
        report.table.push([t, f]);
        fidelities.push(f);
    }
    let worst = max_of(fidelities.iter().map(|f| 1.0 - f));
    report.output("times", Value::Vector(clock.times().to_vec()));
    report.output("fidelities", Value::Vector(fidelities));
    report.residual("constraint", residual);
    report.residual("max_infidelity", worst);
    report.flag("constraint_satisfied", residual <= tol);
    report.flag("schrodinger_recovery", worst <= tol);
    Ok(report)
}

fn clock_system_space(clock: &ClockModel, d_r: usize) -> ProductSpace {
    ProductSpace::new([(CLOCK, clock.dim()), (SYSTEM, d_r)]).expect("distinct labels")
}

fn pw_constraint(spec: &ModelSpec) -> Result<Report, CliError> {
    let tol = spec.check_tol(1e-10);
    let (clock, h_r) = system_clock(spec)?;
    let d_r = h_r.rows();
    let inter = spec
        .interaction()
        .map(|i| InteractionSpec::new(&clock, d_r, i.matrix.clone(), i.time_diagonal))
        .transpose()
        .at("interaction")?;
    let h_t = total_hamiltonian(&clock, h_r, inter.as_ref()).at("interaction")?;
    let space = clock_system_space(&clock, d_r);
    let kernel = physical_states(&h_t, &space, 1e-10).at("system.hamiltonian")?;

    let mut report = Report::with_table(Table::new(["t", "nonlocal_residual"]));
    report.output("kernel_dim", Value::Integer(kernel.len() as u64));
    report.flag("physical_states_exist", !kernel.is_empty());

    match &inter {
        None => {
            let psi0 = spec.initial_state()?;
            let state = history_state(&clock, h_r, psi0).at("initial_state")?;
            let residual = constraint_residual(&h_t, &state).at("system.hamiltonian")?;
            report.residual("history_state_constraint", residual);
            report.flag("history_state_physical", residual <= tol);

            let dims = [clock.dim(), 2 * clock.dim(), 4 * clock.dim()];
            let mut worst = Vec::new();
            for (i, &d) in dims.iter().enumerate() {
                let ck = ClockModel::ideal(d, clock.omega()).at("clock")?;
                let st = history_state(&ck, h_r, psi0).at("initial_state")?;
                let res = verify_nonlocal_eom(&st, &ck, h_r, None).at("system.hamiltonian")?;
                if i == 0 {
                    for (t, r) in ck.times().iter().zip(&res) {
                        report.table.push([*t, *r]);
                    }
                }
                worst.push(max_of(res));
            }
            let ratios: Vec<f64> = worst.windows(2).map(|w| w[0] / w[1]).collect();
            report.output("eom_clock_dims", Value::Vector(dims.iter().map(|&d| d as f64).collect()));
            report.output("eom_max_residuals", Value::Vector(worst));
            report.flag("eom_second_order", ratios.iter().all(|&r| r >= 3.5));
            report.output("eom_ratios", Value::Vector(ratios));
        }
        Some(inter) => {
            let k = interaction_kernel(&clock, inter).at("interaction.matrix")?;
            let table = (0..clock.dim())
                .map(|a| (0..clock.dim()).map(|b| k.block(a, b).max_abs()).collect())
                .collect();
            report.output("kernel_block_max", Value::Matrix(table));
            let state = match kernel.first() {
                Some(s) => s.clone(),
                None => history_state(&clock, h_r, spec.initial_state()?).at("initial_state")?,
            };
            let nonlocal = verify_nonlocal_eom(&state, &clock, h_r, Some(inter)).at("interaction")?;
            for (t, r) in clock.times().iter().zip(&nonlocal) {
                report.table.push([*t, *r]);
            }
            if inter.is_time_diagonal() {
                let local = local_eom_residuals(&state, &clock, h_r, inter).at("interaction")?;
                let gap = max_of(nonlocal.iter().zip(&local).map(|(a, b)| (a - b).abs()));
                report.residual("local_nonlocal_gap", gap);
                report.flag("local_matches_nonlocal", gap <= tol);
            }
            report.output("nonlocal_residuals", Value::Vector(nonlocal));
        }
    }
    Ok(report)
}

fn dual_clock(spec: &ModelSpec) -> Result<Report, CliError> {
    let tol = spec.check_tol(1e-8);
    let (clock, h_r) = system_clock(spec)?;
    let psi0 = spec.initial_state()?;
    let (hf, hb) = dual_constraints(&clock, &clock, h_r).at("system.hamiltonian")?;
    let commutator = hf.commutator(&hb).frobenius_norm();
    let kernel = dual_constraint_states(&clock, &clock, h_r, 1e-10).at("system.hamiltonian")?;
    let history = two_clock_history_state(&clock, &clock, h_r, psi0).at("initial_state")?;

    let mut report = Report::with_table(Table::new(["t_forward", "t_backward", "fidelity"]));
    report.output("kernel_dim", Value::Integer(kernel.len() as u64));
    report.residual("constraint_commutator", commutator);
    report.flag("constraints_commute", commutator <= 1e-10);
    report.flag("joint_kernel_nonempty", !kernel.is_empty());
    if kernel.is_empty() {
        return Ok(report);
    }

    let projected = kernel.iter().fold(StateVector::zeros(history.psi.dim()), |acc, v| {
        &acc + &v.psi.scale(v.psi.inner(&history.psi))
    });
    report.output("retained_norm", Value::Scalar(projected.norm()));
    let state = KinematicalState::new(history.space.clone(), projected).at("initial_state")?;

    let mut matrix = Vec::with_capacity(clock.dim());
    let mut diagonal = Vec::with_capacity(clock.dim());
    for (k, &tk) in clock.times().iter().enumerate() {
        let uk = matexp_hermitian(h_r, tk).at("system.hamiltonian")?;
        let mut row = Vec::with_capacity(clock.dim());
        for (l, &tl) in clock.times().iter().enumerate() {
            let ul = matexp_hermitian(h_r, -tl).at("system.hamiltonian")?;
            let want = uk.apply(&ul.apply(psi0));
            let got = condition_on_clocks(&state, &clock, &clock, k, l).at("clock")?;
            let f = match got.normalized() {
                Ok(g) => g.fidelity(&want),
                Err(_) => 0.0,
            };
            if k == l {
                diagonal.push(f);
            }
            report.table.push([tk, tl, f]);
            row.push(f);
        }
        matrix.push(row);
    }
    let worst = max_of(matrix.iter().flatten().map(|f| 1.0 - f));
    let worst_diag = max_of(diagonal.iter().map(|f| 1.0 - f));
    report.output("fidelities", Value::Matrix(matrix));
    report.residual("max_infidelity", worst);
    report.residual("max_diagonal_infidelity", worst_diag);
    report.flag("two_branch_conditioning", worst <= tol);
    report.flag("diagonal_returns_initial", worst_diag <= tol);
    Ok(report)
}

const BAUER: &str = "experiment.parameters";

fn lattice(half_size: usize, delta: f64, field: &str) -> Result<EnergyLattice, CliError> {
    EnergyLattice::new(half_size, delta).at(&format!("{BAUER}.{field}"))
}

fn bauer_check(spec: &ModelSpec, seed: u64) -> Result<Report, CliError> {
    let p = &spec.parameters;
    let half = p.half_size.unwrap_or(32);
    let delta = p.delta.unwrap_or(1.0);
    let sigma = p.sigma.unwrap_or(8.0);
    let sweep = p.sweep.clone().unwrap_or_else(|| vec![128, 256, 512]);
    let drift_half = p.drift_half_size.unwrap_or(256);
    let drift_sigma = p.drift_sigma.unwrap_or(16.0);
    let dt = p.dt.unwrap_or(0.01);
    let pairs = p.pairs.unwrap_or(20);
    if let Some(bad) = sweep.iter().find(|&&n| n < 2 || n % 2 != 0) {
        return Err(CliError::validation(
            format!("{BAUER}.sweep"),
            format!("lattice sizes 2M must be even and at least 2, got {bad}"),
        ));
    }
    if !(sigma.is_finite() && sigma > 0.0 && drift_sigma.is_finite() && drift_sigma > 0.0) {
        return Err(CliError::validation(format!("{BAUER}.sigma"), "widths must be positive"));
    }

    let mut report = Report::with_table(Table::new(["two_m", "commutator_residual"]));
    let lat = lattice(half, delta, "half_size")?;
    let n = lat.dim();
    let id = Operator::identity(n);
    let shift = |m: i64| shift_operator(lat, m as f64 * delta).at(BAUER);
    let mut rng = generator(seed);
    let mut group = shift(0)?.max_abs_diff(&id);
    for _ in 0..pairs {
        let m1 = rng.random_range(-(n as i64)..n as i64);
        let m2 = rng.random_range(-(n as i64)..n as i64);
        let (d1, d2, neg, sum) = (shift(m1)?, shift(m2)?, shift(-m1)?, shift(m1 + m2)?);
        group = max_of([
            group,
            (&d1 * &d1.dagger()).max_abs_diff(&id),
            (&d1.dagger() * &d1).max_abs_diff(&id),
            d1.dagger().max_abs_diff(&neg),
            (&d1 * &neg).max_abs_diff(&id),
            (&d1 * &d2).max_abs_diff(&sum),
        ]);
    }
    let t_op = time_operator(lat);
    let mut stone = 0.0_f64;
    for m in -(half as i64)..half as i64 {
        let u = matexp_hermitian(t_op.operator(), m as f64 * delta).at(BAUER)?;
        stone = stone.max(u.max_abs_diff(&shift(m)?));
    }
    report.residual("group_law", group);
    report.residual("stone_relation", stone);
    report.flag("group_law", group <= 1e-12);
    report.flag("stone_relation", stone <= 1e-10);

    let mut residuals = Vec::with_capacity(sweep.len());
    for &two_m in &sweep {
        let l = lattice(two_m / 2, delta, "sweep")?;
        let packet = ExtendedState::wavepacket(l, 0.0, sigma * delta).at(BAUER)?;
        let r = commutator_residual(&time_operator(l), &packet).at(BAUER)?;
        report.table.push([two_m as f64, r]);
        residuals.push(r);
    }
    report.output("sweep_two_m", Value::Vector(sweep.iter().map(|&x| x as f64).collect()));
    report.flag("commutator_monotone", residuals.windows(2).all(|w| w[1] < w[0]));
    report.output("commutator_residuals", Value::Vector(residuals));

    let dl = lattice(drift_half, delta, "drift_half_size")?;
    let dt_op = time_operator(dl);
    let offset = (drift_half / 2) as f64 * delta;
    let width = drift_sigma * delta;
    let f = ExtendedState::wavepacket(dl, offset, width).at(BAUER)?;
    let b = ExtendedState::wavepacket(dl, -offset, width).at(BAUER)?;
    let mixed_vec = (&f.combined() + &b.combined()).normalized().at(BAUER)?;
    let mixed = ExtendedState::from_lattice_vector(dl, &mixed_vec).at(BAUER)?;
    let breach = || CliError::Invariant("a pure wavepacket lost its branch component".into());
    let df = drift_check(&dt_op, &f, dt).at(&format!("{BAUER}.dt"))?.forward.ok_or_else(breach)?;
    let db = drift_check(&dt_op, &b, dt).at(&format!("{BAUER}.dt"))?.backward.ok_or_else(breach)?;
    let dm = drift_check(&dt_op, &mixed, dt).at(&format!("{BAUER}.dt"))?.total;
    report.output("drift_forward", Value::Scalar(df));
    report.output("drift_backward", Value::Scalar(db));
    report.output("drift_mixed", Value::Scalar(dm));
    report.residual("drift_forward_error", (df - dt).abs());
    report.residual("drift_backward_error", (db + dt).abs());
    report.flag("drift_forward", (df - dt).abs() <= 1e-4 * dt.abs());
    report.flag("drift_backward", (db + dt).abs() <= 1e-4 * dt.abs());
    report.flag("drift_mixed", dm.abs() <= 1e-6);
    Ok(report)
}

fn two_state(spec: &ModelSpec, t1: f64, t2: f64) -> Result<TwoStateVector, CliError> {
    let post = spec.post_state().ok_or_else(|| CliError::validation("post_state", "required by this experiment but absent"))?;
    TwoStateVector::new(spec.initial_state()?.clone(), t1, post.clone(), t2, spec.hamiltonian()?.clone()).at(TIMES)
}

fn abl(spec: &ModelSpec) -> Result<Report, CliError> {
    let tol = spec.check_tol(1e-10);
    let t = times(spec, &[0.0, 0.5, 1.0], 3)?;
    let basis = basis_param(spec)?;
    let tsv = two_state(spec, t[0], t[2])?;
    let probs = abl_probability(&tsv, &basis.vectors, t[1]).at("experiment.parameters.basis")?;
    let reversed = abl_probability(&tsv.time_reversed(), &basis.vectors, -t[1]).at("experiment.parameters.basis")?;
    let symmetry = max_of(probs.iter().zip(&reversed).map(|(a, b)| (a - b).abs()));
    let total: f64 = probs.iter().sum();

    let mut report = Report::with_table(Table::new(["outcome", "probability"]));
    for (label, p) in basis.labels.iter().zip(&probs) {
        report.table.push([label.clone(), p.to_string()]);
    }
    report.output("labels", Value::Texts(basis.labels.clone()));
    report.output("probabilities", Value::Vector(probs));
    report.residual("normalization", (total - 1.0).abs());
    report.residual("time_symmetry", symmetry);
    report.flag("normalized", (total - 1.0).abs() <= tol);
    report.flag("time_symmetric", symmetry <= tol);
    Ok(report)
}

fn weak(spec: &ModelSpec) -> Result<Report, CliError> {
    let t = times(spec, &[0.0, 0.5, 1.0], 3)?;
    let path = "experiment.parameters.observable";
    let dim = spec.dim().ok_or_else(|| CliError::validation("system", "required by this experiment but absent"))?;
    let raw = spec
        .parameters
        .observable
        .as_ref()
        .ok_or_else(|| CliError::validation(path, "required by weak-value"))?;
    let observable = spec::matrix(raw, dim, path)?;
    let tsv = two_state(spec, t[0], t[2])?;
    let w = weak_value(&tsv, &observable, t[1]).at(path)?;

    let mut report = Report::with_table(Table::new(["component", "value"]));
    report.table.push(["re".to_string(), w.re.to_string()]);
    report.table.push(["im".to_string(), w.im.to_string()]);
    report.output("weak_value_re", Value::Scalar(w.re));
    report.output("weak_value_im", Value::Scalar(w.im));
    report.output("observable_hermitian", Value::Flag(observable.is_hermitian(spec.tolerances.hermitian)));
    Ok(report)
}

fn dhist(spec: &ModelSpec) -> Result<Report, CliError> {
    let tol = spec.check_tol(1e-10);
    let names_path = "experiment.parameters.bases";
    let names = spec
        .parameters
        .bases
        .as_ref()
        .ok_or_else(|| CliError::validation(names_path, "list one basis name per measurement time"))?;
    let t = times(spec, &[], names.len() + 1)?;
    let bases = names
        .iter()
        .enumerate()
        .map(|(i, n)| spec.basis(n, &format!("{names_path}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let family = ProjectorFamily::new(
        t,
        bases.iter().map(|b| b.vectors.clone()).collect(),
        spec.hamiltonian()?.clone(),
        spec.initial_state()?.clone(),
    )
    .at(names_path)?;
    let (labels, d) = decoherence_matrix(&family, DEFAULT_LABEL_CAP).at(names_path)?;

    let mut worst = 0.0_f64;
    let mut total = C64::new(0.0, 0.0);
    for (a, row) in d.iter().enumerate() {
        for (b, z) in row.iter().enumerate() {
            total += z;
            if a != b {
                worst = worst.max(z.norm());
            }
        }
    }
    let probs: Vec<f64> = (0..labels.len()).map(|a| d[a][a].re).collect();
    let names: Vec<String> = labels
        .iter()
        .map(|l| {
            l.0.iter()
                .zip(&bases)
                .map(|(&k, b)| b.labels[k].as_str())
                .collect::<Vec<_>>()
                .join("/")
        })
        .collect();
    let sum: f64 = probs.iter().sum();

    let mut report = Report::with_table(Table::new(["history", "probability"]));
    for (n, p) in names.iter().zip(&probs) {
        report.table.push([n.clone(), p.to_string()]);
    }
    report.output("histories", Value::Texts(names));
    report.output("probabilities", Value::Vector(probs));
    report.output("max_off_diagonal", Value::Scalar(worst));
    report.residual("max_off_diagonal", worst);
    report.residual("functional_sum", (total - c(1.0, 0.0)).norm());
    report.residual("normalization", (sum - 1.0).abs());
    report.flag("decoherent", worst <= tol);
    report.flag("functional_normalized", (total - c(1.0, 0.0)).norm() <= tol);
    report.flag("normalized", (sum - 1.0).abs() <= tol);
    Ok(report)
}

fn fpf_measure(spec: &ModelSpec) -> Result<Report, CliError> {
    let tol = spec.check_tol(1e-12);
    let h = spec.hamiltonian()?;
    let psi = spec.initial_state()?;
    let basis = basis_param(spec)?;
    let (measures, reference, check) = match spec.post_state() {
        Some(phi) => {
            let t = times(spec, &[0.0, 0.5, 1.0], 3)?;
            let grid = ContourGrid::new(t.clone()).at(TIMES)?;
            let family = FamilySpec::new(grid, vec![vec![psi.clone()], basis.vectors.clone(), vec![phi.clone()]], h.clone())
                .at("experiment.parameters.basis")?;
            let dist = measure_distribution(&family).at("post_state")?;
            let tsv = two_state(spec, t[0], t[2])?;
            let abl = abl_probability(&tsv, &basis.vectors, t[1]).at("post_state")?;
            (dist.into_iter().map(|(_, m)| m).collect::<Vec<_>>(), abl, "abl")
        }
        None => {
            let t = times(spec, &[0.0, 1.0], 2)?;
            let grid = ContourGrid::new(t.clone()).at(TIMES)?;
            let family = FamilySpec::new(grid, vec![vec![psi.clone()], basis.vectors.clone()], h.clone())
                .at("experiment.parameters.basis")?;
            let dist = measure_distribution(&family).at("initial_state")?;
            let evolved = matexp_hermitian(h, t[1] - t[0]).at("system.hamiltonian")?.apply(psi);
            let echo = transaction_echo(&evolved, &basis.vectors).at("experiment.parameters.basis")?;
            (dist.into_iter().map(|(_, m)| m).collect::<Vec<_>>(), echo, "born")
        }
    };
    let delta = max_of(measures.iter().zip(&reference).map(|(a, b)| (a - b).abs()));
    let sum: f64 = measures.iter().sum();

    let mut report = Report::with_table(Table::new(["outcome", "measure"]));
    for (label, m) in basis.labels.iter().zip(&measures) {
        report.table.push([label.clone(), m.to_string()]);
    }
    report.output("labels", Value::Texts(basis.labels.clone()));
    report.output("measures", Value::Vector(measures));
    report.output("reference", Value::Vector(reference));
    report.output("cross_check", Value::Text(check.into()));
    report.residual("cross_check_delta", delta);
    report.residual("normalization", (sum - 1.0).abs());
    report.flag("matches_reference", delta <= tol);
    report.flag("normalized", (sum - 1.0).abs() <= tol);
    Ok(report)
}

fn mts_trace(spec: &ModelSpec, seed: u64) -> Result<Report, CliError> {
    let tol = spec.check_tol(1e-12);
    let p = &spec.parameters;
    let dim = p.dim.or(spec.dim()).unwrap_or(2);
    if dim == 0 {
        return Err(CliError::validation("experiment.parameters.dim", "must be positive"));
    }
    let instances = p.instances.unwrap_or(20);
    let loop_state = identity_loop_state(dim).at("experiment.parameters.dim")?;
    let mut report = Report::with_table(Table::new(["instance", "trace_delta"]));

    if let Some(raw) = &p.process {
        let path = "experiment.parameters.process";
        let u = spec::matrix(raw, dim, path)?;
        let z = mts_contract(&loop_state, std::slice::from_ref(&u)).at(path)?;
        report.output("process_contraction", Value::Vector(vec![z.re, z.im]));
        report.residual("process_trace_delta", (z - u.trace()).norm());
        report.output("process_unitarity_deviation", Value::Scalar(u.unitarity_deviation()));
    }

    let mut rng = generator(seed);
    let mut worst_trace = 0.0_f64;
    let mut worst_echo = 0.0_f64;
    for i in 0..instances {
        let u = qtime_core::random::unitary(&mut rng, dim);
        let z = mts_contract(&loop_state, std::slice::from_ref(&u)).at("experiment.parameters.dim")?;
        let delta = (z - u.trace()).norm();
        report.table.push([i as f64, delta]);
        worst_trace = worst_trace.max(delta);

        let psi = qtime_core::random::state(&mut rng, dim);
        let basis = qtime_core::random::basis(&mut rng, dim);
        let echo = transaction_echo(&psi, &basis).at("experiment.parameters.dim")?;
        for (e, n) in echo.iter().zip(&basis) {
            worst_echo = worst_echo.max((e - n.inner(&psi).norm_sqr()).abs());
        }
    }
    report.output("instances", Value::Integer(instances as u64));
    report.residual("max_trace_delta", worst_trace);
    report.residual("max_echo_delta", worst_echo);
    report.flag("closed_loop_trace", worst_trace <= tol);
    report.flag("echo_is_born", worst_echo <= tol);
    Ok(report)
}

fn equiv_suite(spec: &ModelSpec, seed: u64) -> Result<Report, CliError> {
    let tol = spec.check_tol(1e-12);
    let instances = spec.parameters.instances.unwrap_or(20);
    let mut rng = generator(seed);
    let deltas = suite::run_all(&mut rng, instances).map_err(|e| CliError::model("experiment", e))?;

    let mut report = Report::with_table(Table::new(["check", "max_delta"]));
    report.output("instances", Value::Integer(instances as u64));
    for (name, delta) in deltas {
        report.table.push([name.to_string(), delta.to_string()]);
        report.residual(name, delta);
        report.flag(name, delta <= tol);
    }
    Ok(report)
}
