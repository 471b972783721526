//! One function per verb: validate, compute, assemble a [`Report`].

use gwel::boundary_calc::{boundary_entropy_exact, proximality_sim, rational_parts, srw_exact};
use gwel::entropy_lab::{
    drift_mc, entropy_gap_check, exact_drift, exact_free_entropy, guivarch_check, quotient_entropy_dp,
    radial_entropy_exact, theorem_a_bound, GapOptions,
};
use gwel::free_words::MAX_LITERAL_RANK;
use gwel::growth_cogrowth::{
    ball_counts, critical_exponent, free_growth, grigorchuk_delta, kernel_sphere_counts, CountMethod,
};
use gwel::sigma_lattice::{
    entropy_functional, monotone_chain_limit, sample, solve_stationary, ChainDirection, FiniteAction, FiniteSpace,
};
use gwel::srw;
use num_traits::ToPrimitive;

use crate::cli::*;
use crate::error::CliError;
use crate::lattice_config::{format_partition, LatticeConfig, WeightSpec};
use crate::parse::{build_quotient, format_word, parse_measure};
use crate::report::{Cell, Report, Series};

const H_RW_NOTE: &str = "exact (d-1)/d * log(2d-1)";

fn check_rank(rank: u16) -> Result<(), CliError> {
    if !(2..=MAX_LITERAL_RANK).contains(&rank) {
        return Err(CliError::Param(format!(
            "--rank must be in 2..={MAX_LITERAL_RANK}, got {rank}"
        )));
    }
    Ok(())
}

fn positive(name: &str, value: usize) -> Result<(), CliError> {
    if value == 0 {
        return Err(CliError::Param(format!("--{name} must be positive")));
    }
    Ok(())
}

pub fn run(command: &Command, seed: u64) -> Result<Report, CliError> {
    match command {
        Command::WalkEntropy(a) => walk_entropy(a, seed),
        Command::Drift(a) => drift(a, seed),
        Command::Growth(a) => growth(a, seed),
        Command::Cogrowth(a) => cogrowth(a, seed),
        Command::GapCheck(a) => gap_check(a, seed),
        Command::Guivarch(a) => guivarch(a, seed),
        Command::TheoremA(a) => theorem_a(a, seed),
        Command::BoundaryEntropy(a) => boundary_entropy(a, seed),
        Command::Proximality(a) => proximality(a, seed),
        Command::LatticeExperiment(a) => {
            let text = std::fs::read_to_string(&a.config).map_err(|source| CliError::Io {
                path: a.config.clone(),
                source,
            })?;
            lattice_experiment(&LatticeConfig::parse(&text)?, seed)
        }
    }
}

pub fn walk_entropy(a: &WalkEntropyArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    positive("steps", a.steps)?;
    let mut r = Report::new("walk-entropy", seed);
    r.param("rank", a.rank).param("steps", a.steps);
    let series = match &a.quotient {
        None => {
            r.param("quotient", "none");
            r.note("H", "radial birth-death chain, exact up to rounding");
            radial_entropy_exact(a.rank, a.steps)?
        }
        Some(q) => {
            let (_, rep) = build_quotient(q, a.rank, a.max_cosets)?;
            r.param("quotient", q.trim())
                .param("max_cosets", a.max_cosets)
                .param("memory_guard", a.memory_guard);
            r.summary("quotient_order", rep.order());
            r.note("H", "exact dynamic programming on the quotient");
            quotient_entropy_dp(&rep, &srw(a.rank)?, a.steps, a.memory_guard)?
        }
    };
    let mut table = Series::new(&["n", "H", "H_over_n", "increment"]);
    for n in 0..=a.steps {
        let (per_step, inc) = if n == 0 {
            (None, None)
        } else {
            (Some(series.per_step(n)), Some(series.increment(n)))
        };
        table.push(vec![n.cell(), series.entropy(n).cell(), per_step.cell(), inc.cell()]);
    }
    r.series = table;
    r.summary("h_rw_exact", exact_free_entropy(a.rank))
        .summary("H_final", series.entropy(a.steps))
        .summary("H_over_n_final", series.per_step(a.steps))
        .summary("increment_final", series.increment(a.steps))
        .summary("per_step_non_increasing", series.per_step_non_increasing())
        .summary("increments_non_negative", series.increments_non_negative());
    r.note("h_rw_exact", H_RW_NOTE);
    Ok(r)
}

pub fn drift(a: &DriftArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    positive("steps", a.steps)?;
    let est = drift_mc(a.rank, a.steps, a.trials, seed)?;
    let exact = exact_drift(a.rank);
    let z = (est.estimate - exact) / est.standard_error;
    let mut r = Report::new("drift", seed);
    r.param("rank", a.rank)
        .param("steps", a.steps)
        .param("trials", a.trials);
    r.summary("estimate", est.estimate)
        .summary("standard_error", est.standard_error)
        .summary("exact_drift", exact)
        .summary("z_score", z)
        .summary("within_3_se", z.abs() <= 3.0);
    r.note("estimate", "mean of |w_n|/n; trial i uses ChaCha8 stream i of the seed")
        .note("exact_drift", "(d-1)/d");
    Ok(r)
}

pub fn growth(a: &GrowthArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    let counts = ball_counts(a.rank, a.steps);
    let mut r = Report::new("growth", seed);
    r.param("rank", a.rank).param("steps", a.steps);
    let mut table = Series::new(&["n", "count", "log_count_over_n"]);
    for (n, c) in counts.counts.iter().enumerate() {
        table.push(vec![n.cell(), c.cell(), counts.log_count_over_n(n).cell()]);
    }
    r.series = table;
    r.summary("growth_rate_exact", free_growth(a.rank))
        .summary("log_count_over_n_final", counts.log_count_over_n(a.steps));
    r.note("growth_rate_exact", "log(2d-1)");
    Ok(r)
}

pub fn cogrowth(a: &CogrowthArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    let (_, rep) = build_quotient(&a.quotient, a.rank, a.max_cosets)?;
    if !rep.is_finite() {
        return Err(CliError::Param("cogrowth needs a finite quotient".into()));
    }
    let method = match a.method {
        Method::Transfer => CountMethod::Transfer,
        Method::Brute => CountMethod::Brute,
    };
    let counts = kernel_sphere_counts(&rep, a.steps, method)?;
    let ce = critical_exponent(&rep, a.tol, a.max_iterations)?;
    let floor = 0.5 * free_growth(a.rank);
    let mut r = Report::new("cogrowth", seed);
    r.param("rank", a.rank)
        .param("steps", a.steps)
        .param("quotient", a.quotient.trim())
        .param(
            "method",
            if a.method == Method::Transfer {
                "transfer"
            } else {
                "brute"
            },
        )
        .param("tol", a.tol)
        .param("max_iterations", a.max_iterations)
        .param("max_cosets", a.max_cosets);
    let mut table = Series::new(&["n", "count", "log_count_over_n", "log_ratio"]);
    for (n, c) in counts.counts.iter().enumerate() {
        table.push(vec![
            n.cell(),
            c.cell(),
            counts.log_count_over_n(n).cell(),
            counts.log_ratio(n).cell(),
        ]);
    }
    r.series = table;
    r.summary("delta", ce.delta)
        .summary("perron_root", ce.perron_root)
        .summary("iterations", ce.iterations)
        .summary("core_states", ce.core_states)
        .summary("quotient_order", rep.order())
        .summary("amenable_delta", grigorchuk_delta(1.0, a.rank)?)
        .summary("half_log_floor", floor)
        .summary("delta_above_floor", ce.delta >= floor - 1e-12);
    r.note(
        "delta",
        "log of the Perron root of the non-backtracking transfer matrix",
    )
    .note(
        "amenable_delta",
        "log(2d-1): critical exponent for an amenable quotient",
    )
    .note(
        "half_log_floor",
        "lower bound (1/2) log(2d-1) valid for every normal subgroup",
    );
    Ok(r)
}

pub fn gap_check(a: &GapCheckArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    positive("steps", a.steps)?;
    let (_, rep) = build_quotient(&a.quotient, a.rank, a.max_cosets)?;
    let opts = GapOptions {
        exact_steps: a.exact_steps,
        ball_steps: a.ball_steps,
        guard: a.memory_guard,
        ..GapOptions::default()
    };
    let g = entropy_gap_check(a.rank, &rep, a.steps, opts)?;
    let mut r = Report::new("gap-check", seed);
    r.param("rank", a.rank)
        .param("steps", a.steps)
        .param("quotient", a.quotient.trim())
        .param("exact_steps", a.exact_steps)
        .param("ball_steps", a.ball_steps)
        .param("max_cosets", a.max_cosets)
        .param("memory_guard", a.memory_guard);
    let mut table = Series::new(&[
        "k",
        "h_free",
        "h_quotient",
        "gap",
        "coset_bound",
        "log_kernel_ball",
        "log_kernel_ball_double",
        "max_coset_ball",
    ]);
    for row in &g.rows {
        table.push(vec![
            row.k.cell(),
            row.h_free.cell(),
            row.h_quotient.cell(),
            row.gap.cell(),
            row.coset_bound.cell(),
            row.log_kernel_ball.cell(),
            row.log_kernel_ball_double.cell(),
            row.max_coset_ball.cell(),
        ]);
    }
    r.series = table;
    r.summary("h_rw_exact", g.h_free)
        .summary("h_quotient_upper", g.h_quotient_upper)
        .summary("delta", g.delta)
        .summary("delta_source", g.delta_source)
        .summary("lemma_holds", g.lemma_holds)
        .summary("jm_bound_holds", g.jm_bound_holds)
        .summary("jensen_holds", g.jensen_holds)
        .summary("quotient_order", rep.order());
    r.note("h_rw_exact", H_RW_NOTE)
        .note(
            "h_quotient_upper",
            "H(mu'^n)/n at the last step, an upper bound for the quotient entropy",
        )
        .note(
            "lemma_holds",
            "h_RW - h' <= delta(N), checked as h_RW <= delta(N) since h' >= 0",
        )
        .note(
            "jensen_holds",
            "gap <= sum over cosets of mu^k(C) log|C ∩ supp mu^k| for every grouped k",
        );
    r.warnings = g.warnings;
    Ok(r)
}

pub fn guivarch(a: &DriftArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    positive("steps", a.steps)?;
    let est = drift_mc(a.rank, a.steps, a.trials, seed)?;
    let h = exact_free_entropy(a.rank);
    let v = free_growth(a.rank);
    let g = guivarch_check(h, est.estimate, v);
    let mut r = Report::new("guivarch", seed);
    r.param("rank", a.rank)
        .param("steps", a.steps)
        .param("trials", a.trials);
    r.summary("entropy", g.entropy)
        .summary("drift", g.drift)
        .summary("drift_standard_error", est.standard_error)
        .summary("growth", g.growth)
        .summary("bound", g.bound)
        .summary("residual", g.residual)
        .summary("holds", g.holds)
        .summary("equality_within_1e-3", g.equality_within(1e-3));
    r.note("entropy", H_RW_NOTE)
        .note("drift", "Monte Carlo estimate of the escape rate")
        .note("growth", "log(2d-1)")
        .note("residual", "|h - drift * growth|");
    Ok(r)
}

pub fn theorem_a(a: &TheoremAArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    let mut r = Report::new("theorem-a", seed);
    r.param("rank", a.rank);
    let mut table = Series::new(&["d", "h_rw", "ratio", "bound"]);
    for d in 2..=a.rank {
        let ratio = (d as f64 - 2.0) / (2.0 * d as f64 - 2.0);
        table.push(vec![
            d.cell(),
            exact_free_entropy(d).cell(),
            ratio.cell(),
            theorem_a_bound(d).cell(),
        ]);
    }
    r.series = table;
    let d = a.rank as f64;
    r.summary("bound", theorem_a_bound(a.rank))
        .summary("h_rw", exact_free_entropy(a.rank))
        .summary("ratio", (d - 2.0) / (2.0 * d - 2.0));
    r.note("bound", "(d-2)/(2d-2) * h_rw").note("h_rw", H_RW_NOTE);
    Ok(r)
}

pub fn boundary_entropy(a: &BoundaryEntropyArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    let weights = match &a.measure {
        Some(text) => parse_measure(text, a.rank)?,
        None => srw_exact(a.rank),
    };
    let h = boundary_entropy_exact(a.rank, &weights)?;
    let coefficient = h.coefficient.clone().expect("exact masses give an exact coefficient");
    let (num, den) = rational_parts(&coefficient);
    let v = free_growth(a.rank);
    let mut r = Report::new("boundary-entropy", seed);
    let measure = match &a.measure {
        Some(_) => weights
            .iter()
            .map(|(w, p)| {
                let (n, d) = rational_parts(p);
                let word = if w.is_identity() {
                    "1".to_string()
                } else {
                    format_word(w)
                };
                format!("{word}:{n}/{d}")
            })
            .collect::<Vec<_>>()
            .join(", "),
        None => "srw".to_string(),
    };
    r.param("rank", a.rank)
        .param("measure", measure)
        .param("depth", h.depth);
    let mut table = Series::new(&["word", "mu", "kl_coefficient", "kl_nats"]);
    for (w, p, c) in &h.terms {
        let (cn, cd) = rational_parts(c);
        let word = if w.is_identity() {
            "1".to_string()
        } else {
            format_word(w)
        };
        table.push(vec![
            word.cell(),
            p.cell(),
            format!("{cn}/{cd}").cell(),
            (c.to_f64().unwrap_or(f64::NAN) * v).cell(),
        ]);
    }
    r.series = table;
    r.summary("value", h.value)
        .summary("coefficient_numerator", num)
        .summary("coefficient_denominator", den)
        .summary("log_2d_minus_1", v)
        .summary("h_rw_exact", exact_free_entropy(a.rank))
        .summary("difference_from_h_rw", h.value - exact_free_entropy(a.rank));
    r.note(
        "value",
        "sum_g mu(g) * integral of -log(d g^-1 nu / d nu) d nu over depth-(max|g|+1) cylinders",
    )
    .note(
        "coefficient_numerator",
        "value = (numerator/denominator) * log(2d-1), exactly",
    )
    .note("h_rw_exact", H_RW_NOTE);
    if a.measure.is_some() {
        r.warnings.push(
            "nu is the hitting measure of the simple random walk; the value is a Furstenberg entropy \
             only when nu is stationary for the given measure"
                .into(),
        );
    }
    Ok(r)
}

pub fn proximality(a: &ProximalityArgs, seed: u64) -> Result<Report, CliError> {
    check_rank(a.rank)?;
    positive("depth", a.depth)?;
    positive("trials", a.trials)?;
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::Param("--threshold must lie in [0, 1]".into()));
    }
    let rep = proximality_sim(a.rank, a.steps, a.depth, seed, a.trials as u64)?;
    let mut r = Report::new("proximality", seed);
    r.param("rank", a.rank)
        .param("steps", a.steps)
        .param("depth", a.depth)
        .param("trials", a.trials)
        .param("threshold", a.threshold);
    let mut table = Series::new(&["walk", "length", "pushed_mass", "lower_bound", "shallow"]);
    let mut below = 0usize;
    for row in &rep.rows {
        if row.pushed_mass.is_none_or(|m| m < a.threshold) {
            below += 1;
        }
        table.push(vec![
            row.walk.cell(),
            row.length.cell(),
            row.pushed_mass.cell(),
            row.lower_bound.cell(),
            row.shallow.cell(),
        ]);
    }
    r.series = table;
    r.summary("min_mass", rep.min_mass())
        .summary("skipped", rep.skipped())
        .summary("below_threshold", below)
        .summary("all_above_threshold", below == 0);
    r.note("min_mass", "exact 1 - (1/(2d)) (2d-1)^-(L-k) over walks with L >= k")
        .note("below_threshold", "walks with no mass or mass under the threshold");
    for row in rep.rows.iter().filter(|row| row.pushed_mass.is_none()) {
        r.warnings.push(format!(
            "walk {}: length {} below depth {}, skipped",
            row.walk, row.length, a.depth
        ));
    }
    Ok(r)
}

pub fn lattice_experiment(c: &LatticeConfig, seed: u64) -> Result<Report, CliError> {
    let gens: Vec<Vec<usize>> = c.generators.iter().map(|(_, g)| g.clone()).collect();
    let action = if gens.is_empty() {
        None
    } else {
        Some(FiniteAction::symmetric(c.points, &gens)?)
    };
    let space = match &c.weights {
        WeightSpec::Uniform => FiniteSpace::uniform(c.points),
        WeightSpec::Explicit(w) => FiniteSpace::new(w.clone())?,
        WeightSpec::Random(s) => sample::space(&mut gwel::rng::stream(*s, 0), c.points),
        WeightSpec::Stationary => {
            let a = action.as_ref().expect("checked when parsing");
            FiniteSpace::new(solve_stationary(a, 1e-15, 100_000)?)?
        }
    };
    let mut r = Report::new("lattice-experiment", seed);
    let direction = match c.direction {
        ChainDirection::Increasing => "increasing",
        ChainDirection::Decreasing => "decreasing",
    };
    r.param("points", c.points)
        .param("direction", direction)
        .param(
            "generators",
            c.generators
                .iter()
                .map(|(t, _)| t.trim())
                .collect::<Vec<_>>()
                .join("; "),
        )
        .param(
            "chain",
            c.chain.iter().map(format_partition).collect::<Vec<_>>().join(" ; "),
        );
    r.params.insert(
        "weights".into(),
        serde_json::Value::Array(space.weights().iter().map(|w| w.cell()).collect()),
    );

    let invariant = action.as_ref().filter(|a| c.chain.iter().all(|p| a.is_invariant(p)));
    if let (Some(a), None) = (&action, invariant) {
        for (i, p) in c.chain.iter().enumerate() {
            if !a.is_invariant(p) {
                r.warnings.push(format!(
                    "partition {i} ({}) is not invariant; entropy functional omitted",
                    format_partition(p)
                ));
            }
        }
    }
    let chain = monotone_chain_limit(&space, &c.chain, c.direction, invariant)?;
    let mut table = Series::new(&["step", "partition", "blocks", "l2_to_limit", "functional"]);
    for (i, p) in c.chain.iter().enumerate() {
        let f = chain.functional.as_ref().map(|f| f[i]);
        table.push(vec![
            i.cell(),
            format_partition(p).cell(),
            p.block_count().cell(),
            chain.distances[i].cell(),
            f.cell(),
        ]);
    }
    r.series = table;
    r.summary("limit", format_partition(&chain.limit))
        .summary("limit_blocks", chain.limit.block_count())
        .summary("stabilizes_at", chain.stabilizes_at)
        .summary("converges", chain.converges())
        .summary("distances_non_increasing", chain.distances_non_increasing())
        .summary("functional_consistent", chain.functional_consistent())
        .summary("limit_functional", chain.limit_functional);
    if let Some(a) = invariant {
        let ergodic = entropy_functional(a, &space, &chain.limit)?;
        r.summary("limit_functional_check", ergodic);
    }
    r.note("l2_to_limit", "Hilbert-Schmidt norm of E_n - E_limit on L2(weights)")
        .note(
            "limit_functional",
            "sum_g mu(g) sum_b -log(w(gb)/w(b)) w(b) on the limit partition",
        );
    Ok(r)
}
