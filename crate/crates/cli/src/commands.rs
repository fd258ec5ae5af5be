use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use spinlaw::dyadic::{smoothing_trajectory, BinaryOrbit, DyadicDensity, DyadicError};
use spinlaw::finite::{self, EnergyTable, FiniteError, SiteSpec, SiteState, SpinState, MAX_STATE_SITES};
use spinlaw::interaction::{CouplingModel, NormValue, Velocity};
use spinlaw::product::{
    dyson_readings, finite_chain_correlator, gim_correlator, sensitivity_scan, ProductError,
    ProductValue, ScanTarget,
};
use spinlaw::quench::{self, FieldParams, QuenchError, QuenchPlan};

use crate::args::*;
use crate::svg::{Plot, Series};
use crate::table::{Cell, ResultTable};
use crate::CliError;

/// Largest dyadic resolution the runner accepts (2^26 cells, 512 MiB).
pub const MAX_RESOLUTION: u32 = 26;
/// Largest number of grid points.
pub const MAX_GRID: u64 = 10_000_000;

pub struct Report {
    pub table: ResultTable,
    pub plot: Option<Plot>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(vec![msg.into()])
}

fn finite_err(flag: &str, e: FiniteError) -> CliError {
    match e {
        FiniteError::TooManySites { .. } | FiniteError::RegionTooLarge { .. } => {
            CliError::Resource(format!("{flag}: {e}"))
        }
        _ => invalid(format!("{flag}: {e}")),
    }
}

fn product_err(flag: &str, e: ProductError) -> CliError {
    match e {
        ProductError::ToleranceUnreachable { .. } => CliError::Resource(format!("{flag}: {e}")),
        _ => invalid(format!("{flag}: {e}")),
    }
}

fn quench_err(e: QuenchError) -> CliError {
    if e.is_resource() {
        CliError::Resource(e.to_string())
    } else {
        invalid(e.to_string())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| invalid(format!("{flag}: cannot parse {s:?}"))))
        .collect()
}

/// Times from --times or from an evenly spaced grid of `steps` intervals.
fn times(grid: &GridArgs, tmax: f64, steps: u64) -> Result<Vec<f64>, CliError> {
    if let Some(list) = &grid.times {
        let ts: Vec<f64> = parse_list("--times", list)?;
        if ts.iter().any(|t| !t.is_finite()) {
            return Err(invalid("--times: every t must be finite"));
        }
        return Ok(ts);
    }
    let t0 = grid.tmin.unwrap_or(0.0);
    let t1 = grid.tmax.unwrap_or(tmax);
    let n = grid.steps.unwrap_or(steps);
    let mut bad = Vec::new();
    if !(t0.is_finite() && t1.is_finite()) {
        bad.push("--tmin, --tmax: tmin and tmax must be finite".to_string());
    } else if n > 0 && !(t1 > t0) {
        bad.push(format!("--tmin, --tmax: tmax > tmin required, got tmin={t0}, tmax={t1}"));
    }
    if !bad.is_empty() {
        return Err(CliError::Validation(bad));
    }
    if n >= MAX_GRID {
        return Err(CliError::Resource(format!("--steps: steps < {MAX_GRID} required, got {n}")));
    }
    if n == 0 {
        return Ok(vec![t0]);
    }
    Ok((0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect())
}

fn coupling(m: &ModelArgs) -> Result<CouplingModel, CliError> {
    let model = match m.model {
        Model::Exp => CouplingModel::exponential(m.param.unwrap_or(std::f64::consts::E))
            .map_err(|e| invalid(format!("--param: {e}")))?,
        Model::Dyson => CouplingModel::dyson(m.param.unwrap_or(2.0))
            .map_err(|e| invalid(format!("--param: {e}")))?,
        Model::Table => {
            let text = m
                .table
                .as_deref()
                .ok_or_else(|| invalid("--table: required when --model table"))?;
            let mut entries = Vec::new();
            for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let parsed = item
                    .split_once(':')
                    .and_then(|(d, j)| Some((d.trim().parse::<u64>().ok()?, j.trim().parse::<f64>().ok()?)));
                match parsed {
                    Some(e) => entries.push(e),
                    None => return Err(invalid(format!("--table: expected distance:J, got {item:?}"))),
                }
            }
            CouplingModel::table(entries).map_err(|e| invalid(format!("--table: {e}")))?
        }
    };
    if m.model != Model::Table && m.table.is_some() {
        return Err(invalid("--table: only valid with --model table"));
    }
    if m.scale == 1.0 {
        return Ok(model);
    }
    model.scaled(m.scale).map_err(|e| invalid(format!("--scale: {e}")))
}

fn model_label(m: &ModelArgs) -> String {
    match m.model {
        Model::Exp => format!("exp xi={}", m.param.unwrap_or(std::f64::consts::E)),
        Model::Dyson => format!("dyson alpha={}", m.param.unwrap_or(2.0)),
        Model::Table => "table".into(),
    }
}

fn parse_region(flag: &str, text: &str, sites: usize) -> Result<Vec<usize>, CliError> {
    let region: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| invalid(format!("{flag}: bad start {a:?}")))?;
        let b: usize = b.trim().parse().map_err(|_| invalid(format!("{flag}: bad end {b:?}")))?;
        (a..b).collect()
    } else {
        parse_list(flag, text)?
    };
    if let Some(&x) = region.iter().find(|&&x| x >= sites) {
        return Err(invalid(format!("{flag}: every site x must satisfy x < N = {sites}, got {x}")));
    }
    Ok(region)
}

fn middle(sites: usize, len: usize) -> Vec<usize> {
    let len = len.min(sites);
    let start = (sites - len) / 2;
    (start..start + len).collect()
}

pub fn run(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Dyadic(a) => dyadic(a),
        Command::Cloitre(a) => cloitre(a),
        Command::Correlator(a) => correlator(a),
        Command::Lrv(a) => lrv(a),
        Command::Evolve(a) => evolve(a),
        Command::Quench(a) => quench(a),
    }
}

fn dyadic(a: &DyadicArgs) -> Result<Report, CliError> {
    if let Some(digits) = &a.orbit {
        let orbit = BinaryOrbit::parse(digits).map_err(|e| invalid(format!("--orbit: {e}")))?;
        if a.shift > orbit.len() {
            return Err(invalid(format!(
                "--shift: shift <= number of digits = {} required, got {}",
                orbit.len(),
                a.shift
            )));
        }
        let mut table = ResultTable::new(["n", "value", "digits"]);
        for n in 0..=a.shift {
            let o = orbit.shift(n).map_err(|e| invalid(format!("--shift: {e}")))?;
            let digits: String = o.bits().iter().map(|b| char::from(b'0' + b)).collect();
            table.push(vec![Cell::from(n as u64), o.value().into(), digits.into()]);
        }
        let plot = Plot {
            title: "shift orbit".into(),
            x_label: "n".into(),
            y_label: "T^n x".into(),
            series: vec![Series { label: "T^n x".into(), points: table.pairs("n", "value") }],
        };
        return Ok(Report { table, plot: Some(plot) });
    }

    let m = a.resolution;
    let mut bad = Vec::new();
    if m == 0 {
        bad.push("--resolution: m >= 1 required".to_string());
    }
    let steps = a.steps.unwrap_or(m);
    if steps > m {
        bad.push(format!("--steps: steps <= m = {m} required, got {steps}"));
    }
    if !bad.is_empty() {
        return Err(CliError::Validation(bad));
    }
    if m > MAX_RESOLUTION {
        return Err(CliError::Resource(format!("--resolution: m <= {MAX_RESOLUTION} required, got {m}")));
    }
    let cells = 1usize << m;
    let density = match a.init {
        Init::Spike => {
            let mut counts = vec![0u64; cells];
            counts[0] = 1;
            DyadicDensity::from_counts(m, &counts)
        }
        Init::Ramp => {
            let w: Vec<f64> = (1..=cells).map(|i| i as f64).collect();
            DyadicDensity::from_weights(m, &w)
        }
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let w: Vec<f64> = (0..cells).map(|_| rng.gen::<f64>()).collect();
            DyadicDensity::from_weights(m, &w)
        }
    }
    .map_err(|e: DyadicError| invalid(format!("--init: {e}")))?;

    let mut table = ResultTable::new(["step", "entropy", "max_deviation"]);
    for s in smoothing_trajectory(&density, steps) {
        table.push(vec![Cell::from(s.step as u64), s.entropy.into(), s.max_deviation.into()]);
    }
    let plot = Plot {
        title: format!("entropy under the transfer operator, m = {m}"),
        x_label: "step".into(),
        y_label: "H(P^n f)".into(),
        series: vec![Series { label: "entropy".into(), points: table.pairs("step", "entropy") }],
    };
    Ok(Report { table, plot: Some(plot) })
}

const PRODUCT_COLUMNS: [&str; 7] = [
    "t",
    "sign",
    "log_magnitude",
    "value",
    "truncation_bound",
    "rounding_bound",
    "terms_used",
];

fn product_cells(t: f64, v: &ProductValue) -> Vec<Cell> {
    vec![
        t.into(),
        Cell::Int(v.sign as i64),
        v.log_magnitude.into(),
        if v.is_representable() { v.value().into() } else { Cell::Empty },
        v.truncation_bound.into(),
        v.rounding_bound.into(),
        v.terms_used.into(),
    ]
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("--tol: tol > 0 required, got {tol}")))
    }
}

fn check_nonnegative(ts: &[f64]) -> Result<(), CliError> {
    match ts.iter().find(|t| **t < 0.0) {
        Some(t) => Err(invalid(format!("--tmin, --times: t >= 0 required, got {t}"))),
        None => Ok(()),
    }
}

fn add_sensitivity(
    table: &mut ResultTable,
    rows: Vec<Vec<Cell>>,
    target: Option<(ScanTarget, f64, f64)>,
    ts: &[f64],
) -> Result<(), CliError> {
    let diffs = match (&target, ts.is_empty()) {
        (Some((target, delta, tol)), false) => Some(
            sensitivity_scan(target, ts, *delta, *tol).map_err(|e| product_err("--delta", e))?,
        ),
        _ => None,
    };
    for (i, mut row) in rows.into_iter().enumerate() {
        if let Some(d) = &diffs {
            let diff = d[i].diff.clone().map_err(|e| product_err("--delta", e))?;
            row.push(diff.into());
        }
        table.push(row);
    }
    Ok(())
}

fn cloitre(a: &CloitreArgs) -> Result<Report, CliError> {
    check_tol(a.tol)?;
    let ts = times(&a.grid, 200.0, 1000)?;
    check_nonnegative(&ts)?;
    let product = spinlaw::product::cloitre_product(a.p, a.s).map_err(|e| product_err("--p, --s", e))?;
    let values: Vec<ProductValue> = ts
        .par_iter()
        .map(|&t| product.evaluate(t, a.tol))
        .collect::<Result<_, _>>()
        .map_err(|e| product_err("--tol", e))?;

    let mut cols = PRODUCT_COLUMNS.to_vec();
    if a.delta.is_some() {
        cols.push("sensitivity");
    }
    let mut table = ResultTable::new(cols);
    let rows = ts.iter().zip(&values).map(|(&t, v)| product_cells(t, v)).collect();
    let target = a.delta.map(|d| (ScanTarget::Cloitre { p: a.p, s: a.s }, d, a.tol));
    add_sensitivity(&mut table, rows, target, &ts)?;
    let plot = Plot {
        title: format!("Cloitre product, p = {}, s = {}", a.p, a.s),
        x_label: "t".into(),
        y_label: "Cl(t)".into(),
        series: vec![Series { label: "value".into(), points: table.pairs("t", "value") }],
    };
    Ok(Report { table, plot: Some(plot) })
}

fn correlator(a: &CorrelatorArgs) -> Result<Report, CliError> {
    check_tol(a.tol)?;
    let model = coupling(&a.model)?;
    let ts = times(&a.grid, 20.0, 400)?;
    check_nonnegative(&ts)?;
    let mut bad = Vec::new();
    if a.readings && a.model.model != Model::Dyson {
        bad.push("--readings: requires --model dyson".to_string());
    }
    if a.sites.is_some() && (a.readings || a.delta.is_some()) {
        bad.push("--sites: cannot be combined with --readings or --delta".to_string());
    }
    if a.sites == Some(0) {
        bad.push("--sites: N >= 1 required".to_string());
    }
    if !bad.is_empty() {
        return Err(CliError::Validation(bad));
    }

    let values: Vec<ProductValue> = match a.sites {
        Some(n) => ts.par_iter().map(|&t| finite_chain_correlator(&model, n / 2, n, t)).collect(),
        None => ts
            .par_iter()
            .map(|&t| gim_correlator(&model, t, a.tol))
            .collect::<Result<_, _>>()
            .map_err(|e| product_err("--tol", e))?,
    };
    let mut cols = PRODUCT_COLUMNS.to_vec();
    if a.readings {
        cols.extend(["cloitre_rescaled_log_magnitude", "cloitre_squared_log_magnitude"]);
    }
    if a.delta.is_some() {
        cols.push("sensitivity");
    }
    let mut table = ResultTable::new(cols);
    let mut rows: Vec<Vec<Cell>> = ts.iter().zip(&values).map(|(&t, v)| product_cells(t, v)).collect();
    if a.readings {
        let alpha = a.model.param.unwrap_or(2.0);
        let readings = ts
            .par_iter()
            .map(|&t| dyson_readings(alpha, t, a.tol))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| product_err("--readings", e))?;
        for (row, r) in rows.iter_mut().zip(readings) {
            row.push(r.cloitre_rescaled.log_magnitude.into());
            row.push(r.cloitre_squared.log_magnitude.into());
        }
    }
    let target = a.delta.map(|d| (ScanTarget::Correlator(model.clone()), d, a.tol));
    add_sensitivity(&mut table, rows, target, &ts)?;
    let label = match a.sites {
        Some(n) => format!("{}, N = {n}", model_label(&a.model)),
        None => model_label(&a.model),
    };
    let plot = Plot {
        title: format!("<sigma^1(t)>, {label}"),
        x_label: "t".into(),
        y_label: "<sigma^1(t)>".into(),
        series: vec![Series { label: "value".into(), points: table.pairs("t", "value") }],
    };
    Ok(Report { table, plot: Some(plot) })
}

fn lrv(a: &LrvArgs) -> Result<Report, CliError> {
    let model = coupling(&a.model)?;
    if let Some(list) = &a.lambdas {
        let lambdas: Vec<f64> = parse_list("--lambdas", list)?;
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0)) {
            return Err(invalid(format!("--lambdas: lambda > 0 required, got {l}")));
        }
        let mut table = ResultTable::new(["lambda", "lambda_norm", "objective", "status"]);
        for &l in &lambdas {
            let norm = model.lambda_norm(l).map_err(|e| invalid(format!("--lambdas: {e}")))?;
            match norm.value {
                NormValue::Finite(v) => {
                    table.push(vec![l.into(), v.into(), (2.0 * v / l).into(), "finite".into()])
                }
                NormValue::Divergent => table.push(vec![
                    l.into(),
                    f64::INFINITY.into(),
                    f64::INFINITY.into(),
                    "divergent".into(),
                ]),
            }
        }
        let plot = Plot {
            title: format!("2 |Phi|_lambda / lambda, {}", model_label(&a.model)),
            x_label: "lambda".into(),
            y_label: "2 |Phi|_lambda / lambda".into(),
            series: vec![Series { label: "objective".into(), points: table.pairs("lambda", "objective") }],
        };
        return Ok(Report { table, plot: Some(plot) });
    }

    let mut table = ResultTable::new([
        "model",
        "stability_norm",
        "lambda_max",
        "lambda_star",
        "velocity",
        "status",
    ]);
    let (star, v, status) = match model.lr_velocity() {
        Velocity::Finite(r) => (Cell::Num(r.lambda_star), r.velocity, "finite"),
        Velocity::Divergent => (Cell::Empty, f64::INFINITY, "divergent"),
    };
    table.push(vec![
        model_label(&a.model).into(),
        model.stability_norm().into(),
        model.lambda_max().into(),
        star,
        v.into(),
        status.into(),
    ]);
    Ok(Report { table, plot: None })
}

fn sigma_columns(cols: &mut Vec<String>, sites: usize) {
    cols.extend((0..sites).map(|x| format!("sigma1_{x}")));
}

fn evolve(a: &EvolveArgs) -> Result<Report, CliError> {
    let model = coupling(&a.model)?;
    let spec: SiteSpec = match (&a.state, a.sites) {
        (Some(s), n) => {
            let spec: SiteSpec = s.parse().map_err(|e| invalid(format!("--state: {e}")))?;
            if let Some(n) = n.filter(|&n| n != spec.len()) {
                return Err(invalid(format!(
                    "--sites, --state: N = {n} must equal the state length {}",
                    spec.len()
                )));
            }
            spec
        }
        (None, n) => SiteSpec::uniform(SiteState::Plus, n.unwrap_or(8)),
    };
    let n = spec.len();
    if n == 0 {
        return Err(invalid("--sites: N >= 1 required"));
    }
    if n > MAX_STATE_SITES {
        return Err(CliError::Resource(format!("--sites: N <= {MAX_STATE_SITES} required, got {n}")));
    }
    let region = match &a.subregion {
        Some(r) => parse_region("--subregion", r, n)?,
        None => middle(n, 3),
    };
    let ts = times(&a.grid, 20.0, 200)?;
    let psi0 = SpinState::product(&spec).map_err(|e| finite_err("--state", e))?;
    let energies = EnergyTable::new(&model, n).map_err(|e| finite_err("--sites", e))?;
    let rows = ts
        .par_iter()
        .map(|&t| -> Result<Vec<Cell>, FiniteError> {
            let psi = energies.evolve(&psi0, t)?;
            let rho = finite::partial_trace(&psi, &region)?;
            let s = rho.von_neumann_entropy()?;
            let mut row = vec![
                t.into(),
                s.entropy.into(),
                s.density.into(),
                rho.mixedness().into(),
                quench::pointer_value(&psi).into(),
            ];
            if a.sigma {
                row.extend(psi.sigma1_profile().into_iter().map(Cell::Num));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| finite_err("--subregion", e))?;

    let mut cols: Vec<String> = ["t", "subregion_entropy", "entropy_density", "mixedness", "pointer"]
        .map(String::from)
        .to_vec();
    if a.sigma {
        sigma_columns(&mut cols, n);
    }
    let mut table = ResultTable::new(cols);
    rows.into_iter().for_each(|r| table.push(r));
    let plot = density_plot(&table, format!("{} sites, {}", n, model_label(&a.model)));
    Ok(Report { table, plot: Some(plot) })
}

fn density_plot(table: &ResultTable, title: String) -> Plot {
    Plot {
        title,
        x_label: "t".into(),
        y_label: "value".into(),
        series: vec![
            Series { label: "entropy density".into(), points: table.pairs("t", "entropy_density") },
            Series { label: "pointer".into(), points: table.pairs("t", "pointer") },
        ],
    }
}

fn quench(a: &QuenchArgs) -> Result<Report, CliError> {
    let mut bad = Vec::new();
    if a.a == 0 || a.a >= a.b {
        bad.push(format!("--A, --B: f = A/B must satisfy 0 < A < B, got A={}, B={}", a.a, a.b));
    } else if gcd(a.a, a.b) != 1 {
        bad.push(format!("--A, --B: gcd(A, B) = 1 required, got {}", gcd(a.a, a.b)));
    }
    if a.b > 0 && (a.c < 2 * a.b || a.c % (2 * a.b) != 0) {
        bad.push(format!(
            "--C: C must be a multiple of 2B with C >= 2B, got C={}, 2B={}",
            a.c,
            2 * a.b
        ));
    }
    if a.k == 0 {
        bad.push("--K: K >= 1 required".to_string());
    }
    if !(a.psi > 1.0) {
        bad.push(format!("--psi: psi > 1 required, got {}", a.psi));
    }
    let alpha_min = if a.allow_alpha_le_2 { 1.0 } else { 2.0 };
    if !(a.alpha > alpha_min) {
        bad.push(format!("--alpha: alpha > {alpha_min} required, got {}", a.alpha));
    }
    if !bad.is_empty() {
        return Err(CliError::Validation(bad));
    }
    let sites = a.c.saturating_mul(a.k);
    if sites > MAX_STATE_SITES as u64 {
        return Err(CliError::Resource(format!(
            "--C, --K: N = C K <= {MAX_STATE_SITES} required, got {sites}"
        )));
    }
    let sites = sites as usize;
    let params = FieldParams {
        psi: a.psi,
        alpha: a.alpha,
        fields: None,
        enforce_alpha_gt_2: !a.allow_alpha_le_2,
    };
    let plan = QuenchPlan::with_fields(a.a, a.b, a.c, a.k, params).map_err(quench_err)?;
    let model = coupling(&a.model)?;
    let region = match &a.subregion {
        Some(r) => parse_region("--subregion", r, sites)?,
        None => middle(sites, 4),
    };
    if let Some(x) = a.witness_site.filter(|&x| x >= sites) {
        return Err(invalid(format!("--witness-site: x < N = {sites} required, got {x}")));
    }
    let ts = times(&a.grid, 20.0, 200)?;
    let trace = quench::run_cycle(&plan, &model, &region, &ts).map_err(quench_err)?;
    let witness = match a.witness_site {
        Some(x) => Some(quench::time_arrow_witness(&trace, x).map_err(quench_err)?),
        None => None,
    };

    let mut cols: Vec<String> = [
        "t",
        "subregion_entropy",
        "entropy_density",
        "mixedness",
        "global_entropy",
        "pointer",
    ]
    .map(String::from)
    .to_vec();
    if witness.is_some() {
        cols.push("witness".into());
    }
    if a.sigma {
        sigma_columns(&mut cols, sites);
    }
    let mut table = ResultTable::new(cols);
    for (i, r) in trace.records.iter().enumerate() {
        let mut row = vec![
            r.t.into(),
            r.subregion_entropy.into(),
            r.entropy_density.into(),
            r.mixedness.into(),
            r.global_entropy.into(),
            r.pointer.into(),
        ];
        if let Some(w) = &witness {
            row.push(w[i].1.into());
        }
        if a.sigma {
            row.extend(r.sigma1.iter().copied().map(Cell::Num));
        }
        table.push(row);
    }
    let plot = density_plot(
        &table,
        format!("quench f = {}/{}, N = {sites}, {}", a.a, a.b, model_label(&a.model)),
    );
    Ok(Report { table, plot: Some(plot) })
}
