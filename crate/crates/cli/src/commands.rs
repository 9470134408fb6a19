use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ptsim::dilation::{dilate, Postselection};
use ptsim::dynamics::{evolve_state, PtMap};
use ptsim::linalg::{c, ComplexMatrix, C64};
use ptsim::quantum::{partial_trace, DensityMatrix, PureState, Subsystem};
use ptsim::randamp::{run_protocol, DecodeMap, ProtocolConfig, RoundRecord};
use ptsim::signaling::{self, closed_form, Quantity};
use ptsim::states::{canonical_two_qubit, two_qutrit};
use ptsim::{AliceMeasurement, AliceOp, BobMeasurement, CanonicalQubitParams, QutritParams, StateSpec};

use crate::config::{Family, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{ConfigEcho, FormulaRecord, RandampReport, SweepRow, VerificationReport};

pub fn pt_map(cfg: &RunConfig) -> PtMap {
    cfg.t.map(PtMap::Time).unwrap_or_default()
}

/// State points of the configured family, in grid-major order.
pub fn state_points(cfg: &RunConfig) -> CliResult<Vec<StateSpec>> {
    let l = &cfg.local;
    let points = match cfg.family {
        Family::PhiPlus => vec![StateSpec::PhiPlus],
        Family::Werner => cfg.p.iter().map(|&p| StateSpec::Werner { p }).collect(),
        Family::WernerLike => cfg
            .dims
            .iter()
            .flat_map(|&dim| cfg.p.iter().map(move |&p| StateSpec::WernerLike { dim, p }))
            .collect(),
        Family::NonMax => cfg
            .beta
            .iter()
            .flat_map(|&beta| cfg.gamma.iter().map(move |&gamma| (beta, gamma)))
            .filter(|&(b, g)| b != 0.0 || g != 0.0)
            .map(|(beta, gamma)| StateSpec::NonMax { beta, gamma })
            .collect(),
        Family::Canonical => vec![StateSpec::Canonical(*l)],
        Family::Product => vec![StateSpec::Product { a: l.m, b: l.m_prime }],
        Family::Qutrit => vec![StateSpec::Qutrit(QutritParams::new(l.m, l.m_prime, l.c))],
    };
    if points.is_empty() {
        return Err(CliError::bad_value("state", "no state points in the grid"));
    }
    for s in &points {
        s.build().map_err(|e| CliError::bad_value("state", format!("{s}: {e}")))?;
    }
    Ok(points)
}

fn evaluate_row(
    state: &StateSpec,
    alpha: f64,
    quantity: Quantity,
    map: PtMap,
    measurement: Option<(AliceMeasurement, BobMeasurement)>,
) -> CliResult<SweepRow> {
    let r = signaling::evaluate(state, quantity, alpha, map, measurement)?;
    Ok(SweepRow {
        family: state.family(),
        dim: state.local_dim(),
        alpha,
        p: state.p(),
        t: map.time(state.local_dim(), alpha),
        quantity: quantity.as_str(),
        brute: r.brute,
        closed_form: r.closed_form,
        abs_err: r.abs_err,
    })
}

/// Rows ordered by state point, then alpha, then quantity.
pub fn sweep(cfg: &RunConfig) -> CliResult<Vec<SweepRow>> {
    let map = pt_map(cfg);
    let jobs: Vec<(StateSpec, f64, Quantity)> = state_points(cfg)?
        .into_iter()
        .flat_map(|s| {
            cfg.alpha.iter().flat_map(move |&a| {
                let s = s.clone();
                cfg.quantities.iter().map(move |&q| (s.clone(), a, q))
            })
        })
        .collect();
    jobs.par_iter()
        .map(|(s, a, q)| evaluate_row(s, *a, *q, map, cfg.measurement))
        .collect()
}

/// [`sweep`] over Werner-like states, one curve per local dimension.
pub fn dim_scan(cfg: &RunConfig) -> CliResult<Vec<SweepRow>> {
    if cfg.family != Family::WernerLike {
        return Err(CliError::bad_value("state", "dim-scan runs on werner-like states"));
    }
    sweep(cfg)
}

/// `(1 + sin²α)/(1 + |sin α|)²`: post-selection success when Alice's qubit is
/// maximally mixed and the map is the specific-time operator.
pub fn mixed_qubit_success(alpha: f64) -> f64 {
    let s = alpha.sin();
    (1.0 + s * s) / (1.0 + s.abs()).powi(2)
}

fn alice_maximally_mixed_qubit(state: &StateSpec) -> bool {
    matches!(
        state,
        StateSpec::PhiPlus | StateSpec::Werner { .. } | StateSpec::WernerLike { dim: 2, .. } | StateSpec::NonMax { .. }
    ) && match state {
        StateSpec::NonMax { beta, gamma } => (beta.abs() - gamma.abs()).abs() < 1e-15,
        _ => true,
    }
}

pub const DILATION_TOLERANCE: f64 = 1e-10;
pub const SUCCESS_TOLERANCE: f64 = 1e-9;

/// Unitarity, channel equivalence and success probability of the dilation
/// for every (state, alpha). With a seed, also an empirical success rate
/// over `rounds` samples. The flag is false if any deterministic check fails.
pub fn dilation_check(cfg: &RunConfig) -> CliResult<(Vec<SweepRow>, bool)> {
    let map = pt_map(cfg);
    let jobs: Vec<(StateSpec, f64)> = state_points(cfg)?
        .into_iter()
        .flat_map(|s| cfg.alpha.iter().map(move |&a| (s.clone(), a)))
        .collect();
    let blocks: Vec<(Vec<SweepRow>, bool)> = jobs
        .par_iter()
        .map(|(state, alpha)| -> CliResult<(Vec<SweepRow>, bool)> {
            let d = state.local_dim();
            let rho = state.build()?;
            let v = map.operator(d, *alpha)?;
            let post = Postselection::prepare(&rho, &v)?;
            let direct = evolve_state(&rho, &v.kron(&ComplexMatrix::identity(d)))?;
            let unitarity = post.dilation.unitarity_residual();
            let channel = post.success_state.matrix().max_abs_diff(direct.matrix());
            let formula = (map == PtMap::SpecificTime && alice_maximally_mixed_qubit(state))
                .then(|| mixed_qubit_success(*alpha));
            let mut ok = unitarity <= DILATION_TOLERANCE && channel <= DILATION_TOLERANCE;
            if let Some(f) = formula {
                ok &= (f - post.success_prob).abs() <= SUCCESS_TOLERANCE;
            }
            let row = |quantity: &'static str, brute: f64, closed: Option<f64>| SweepRow {
                family: state.family(),
                dim: d,
                alpha: *alpha,
                p: state.p(),
                t: map.time(d, *alpha),
                quantity,
                brute,
                closed_form: closed,
                abs_err: closed.map(|c| (brute - c).abs()),
            };
            let mut rows = vec![
                row("unitarity_residual", unitarity, Some(0.0)),
                row("channel_deviation", channel, Some(0.0)),
                row("success_probability", post.success_prob, formula),
            ];
            if let Some(seed) = cfg.seed {
                let est = post.estimate_success(cfg.rounds, seed);
                rows.push(row("empirical_success", est, Some(post.success_prob)));
            }
            Ok((rows, ok))
        })
        .collect::<CliResult<_>>()?;
    let ok = blocks.iter().all(|(_, ok)| *ok);
    Ok((blocks.into_iter().flat_map(|(rows, _)| rows).collect(), ok))
}

pub fn randamp(cfg: &RunConfig) -> CliResult<(RandampReport, Vec<RoundRecord>)> {
    let seed = cfg
        .seed
        .ok_or_else(|| CliError::Usage(format!("randamp needs --seed or {}", crate::config::SEED_ENV)))?;
    let state = match state_points(cfg)?.as_slice() {
        [one] => one.clone(),
        _ => return Err(CliError::bad_value("state", "randamp takes a single state")),
    };
    let map = pt_map(cfg);
    let decode = DecodeMap::calibrate(map)?;
    let protocol = ProtocolConfig {
        decode: Some(decode),
        map,
        ..ProtocolConfig::new(state.clone(), cfg.alpha[0], cfg.rounds, cfg.source, seed)
    };
    let (stats, records) = run_protocol(&protocol)?;
    let report = RandampReport {
        rounds: stats.rounds,
        sifted: stats.sifted_length,
        success_rate: stats.success_rate,
        agreement_rate: stats.agreement_rate,
        output_bias: stats.output_bias,
        min_entropy_per_bit: stats.min_entropy_per_bit,
        equality_certified: stats.equality_certified,
        seed,
        config_echo: ConfigEcho {
            state: state.to_string(),
            alpha: cfg.alpha[0],
            t: map.time(2, cfg.alpha[0]),
            source: cfg.source,
            decode_plus_y: decode.plus_y,
        },
    };
    Ok((report, records))
}

fn random_measurements(rng: &mut ChaCha8Rng) -> (AliceMeasurement, BobMeasurement) {
    let mut angle = |max: f64| rng.random_range(0.0..max);
    let pi = std::f64::consts::PI;
    (
        AliceMeasurement::new(angle(pi), angle(2.0 * pi)),
        BobMeasurement::new(angle(pi), angle(2.0 * pi)),
    )
}

/// A random qutrit state with `m_y = C_yy = m_z = C_zz = 0`.
fn random_quiet_qutrit(rng: &mut ChaCha8Rng) -> QutritParams {
    let mut draw = || rng.random_range(-1.0..=1.0);
    let mut q = QutritParams::new([draw(), 0.0, 0.0], [draw(), draw(), draw()], [draw(), 0.0, 0.0]);
    while two_qutrit(&q).is_err() {
        for v in [&mut q.m, &mut q.m_prime, &mut q.c] {
            v.iter_mut().for_each(|x| *x *= 0.8);
        }
    }
    q
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let data: Vec<C64> = (0..n * n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::from_row_major(n, n, &data).expect("square data")
}

fn bob_after(rho: &DensityMatrix, op: AliceOp, alpha: f64) -> CliResult<DensityMatrix> {
    Ok(signaling::bob_state_after(rho, op, alpha, PtMap::SpecificTime)?)
}

fn collect_pairs<T: Sync>(
    items: &[T],
    f: impl Fn(&T) -> CliResult<Vec<(f64, f64)>> + Sync + Send,
) -> CliResult<Vec<(f64, f64)>> {
    let nested: Vec<Vec<(f64, f64)>> = items.par_iter().map(f).collect::<CliResult<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Checks every closed form against brute force. Random cases come from
/// `cfg.seed` (0 when unset) and `cfg.cases`.
pub fn verify(cfg: &RunConfig) -> CliResult<VerificationReport> {
    let seed = cfg.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas = &cfg.alpha;
    let sy = (AliceMeasurement::sigma_y(), BobMeasurement::sigma_y());
    let map = PtMap::SpecificTime;

    let werner_grid: Vec<(f64, f64)> = cfg.p.iter().flat_map(|&p| alphas.iter().map(move |&a| (p, a))).collect();
    let non_max_grid: Vec<(f64, f64, f64)> = cfg
        .beta
        .iter()
        .flat_map(|&b| cfg.gamma.iter().map(move |&g| (b, g)))
        .filter(|&(b, g)| b != 0.0 || g != 0.0)
        .flat_map(|(b, g)| alphas.iter().map(move |&a| (b, g, a)))
        .collect();
    let general: Vec<CanonicalQubitParams> = (0..cfg.cases).map(|_| CanonicalQubitParams::random(&mut rng)).collect();
    let general_measured: Vec<(CanonicalQubitParams, (AliceMeasurement, BobMeasurement))> = general
        .iter()
        .map(|p| (*p, random_measurements(&mut rng)))
        .collect();
    let real: Vec<(CanonicalQubitParams, (AliceMeasurement, BobMeasurement))> = (0..cfg.cases)
        .map(|_| (CanonicalQubitParams::random_real(&mut rng), random_measurements(&mut rng)))
        .collect();
    let no_my: Vec<CanonicalQubitParams> = general
        .iter()
        .map(|p| {
            let mut q = *p;
            q.m[1] = 0.0;
            q
        })
        .filter(|q| canonical_two_qubit(q).is_ok())
        .collect();
    let qutrits: Vec<QutritParams> = (0..cfg.cases.min(200)).map(|_| random_quiet_qutrit(&mut rng)).collect();
    let matrices: Vec<ComplexMatrix> = (0..cfg.cases).map(|_| random_matrix(&mut rng, 2)).collect();

    let mut out = Vec::new();

    let pairs = collect_pairs(&werner_grid, |&(p, a)| {
        let r = signaling::gap_sigma_y(&StateSpec::Werner { p }, a)?;
        Ok(vec![(r.brute, r.closed_form.unwrap_or(f64::NAN))])
    })?;
    out.push(FormulaRecord::from_pairs("werner_gap", 1e-9, false, &pairs));

    let pairs = collect_pairs(&non_max_grid, |&(beta, gamma, a)| {
        let r = signaling::gap_sigma_y(&StateSpec::NonMax { beta, gamma }, a)?;
        Ok(vec![(r.brute, r.closed_form.unwrap_or(f64::NAN))])
    })?;
    out.push(FormulaRecord::from_pairs("non_max_gap", 1e-9, false, &pairs));

    let pairs = collect_pairs(&general, |p| {
        alphas
            .iter()
            .map(|&a| {
                let r = signaling::gap_canonical(p, a)?;
                Ok((r.brute, r.closed_form.unwrap_or(f64::NAN)))
            })
            .collect()
    })?;
    out.push(FormulaRecord::from_pairs("canonical_gap", 1e-8, false, &pairs));

    let sign = signaling::arbitrary_gap_sign()?;
    let pairs = collect_pairs(&general_measured, |(p, (ma, mb))| {
        let rho = canonical_two_qubit(p)?;
        alphas
            .iter()
            .map(|&a| {
                let r = signaling::gap_arbitrary_for(&rho, p, a, *ma, *mb, sign)?;
                Ok((r.brute, r.closed_form.unwrap_or(f64::NAN)))
            })
            .collect()
    })?;
    out.push(FormulaRecord::from_pairs("arbitrary_gap", 1e-8, false, &pairs));

    let ep = std::f64::consts::FRAC_PI_2;
    let phi = StateSpec::PhiPlus.build()?;
    let gap = signaling::signaling_gap(&phi, ep, sy.0, sy.1, map)?;
    out.push(FormulaRecord::from_pairs("exceptional_point_gap", 1e-9, false, &[(gap.abs(), 1.0)]));
    let minus_y = PureState::normalized(vec![c(1.0, 0.0), c(0.0, -1.0)])?.projector();
    let plus_y = PureState::normalized(vec![c(1.0, 0.0), c(0.0, 1.0)])?.projector();
    let dev_id = bob_after(&phi, AliceOp::Identity, ep)?.matrix().max_abs_diff(minus_y.matrix());
    let dev_flip = bob_after(&phi, AliceOp::FlipX, ep)?.matrix().max_abs_diff(plus_y.matrix());
    out.push(FormulaRecord::from_pairs("exceptional_point_bob_states", 1e-10, false, &[(dev_id, 0.0), (dev_flip, 0.0)]));

    let pairs = collect_pairs(&real, |(p, (ma, mb))| {
        let rho = canonical_two_qubit(p)?;
        let mut v = Vec::with_capacity(2 * alphas.len());
        for &a in alphas {
            v.push((signaling::signaling_gap(&rho, a, *ma, *mb, map)?, 0.0));
            v.push((signaling::conditional_distance(&rho, a, map)?, 0.0));
        }
        Ok(v)
    })?;
    out.push(FormulaRecord::from_pairs("real_state_no_signaling", 1e-10, false, &pairs));

    let pairs = collect_pairs(&werner_grid, |&(p, a)| {
        let rho = StateSpec::Werner { p }.build()?;
        let dev = bob_after(&rho, AliceOp::Identity, a)?
            .matrix()
            .max_abs_diff(&closed_form::werner_bob_state(p, a));
        Ok(vec![(dev, 0.0)])
    })?;
    out.push(FormulaRecord::from_pairs("werner_bob_state", 1e-10, false, &pairs));

    let pairs = collect_pairs(&werner_grid, |&(p, a)| {
        let r = signaling::evaluate(&StateSpec::Werner { p }, Quantity::BobPerturbation, a, map, None)?;
        Ok(vec![(r.brute, r.closed_form.unwrap_or(f64::NAN))])
    })?;
    out.push(FormulaRecord::from_pairs("werner_bob_perturbation", 1e-10, false, &pairs));

    let pairs = collect_pairs(&general, |p| {
        let rho = canonical_two_qubit(p)?;
        alphas
            .iter()
            .map(|&a| {
                let dev = bob_after(&rho, AliceOp::Identity, a)?
                    .matrix()
                    .max_abs_diff(&closed_form::bob_state(p, a));
                Ok((dev, 0.0))
            })
            .collect()
    })?;
    out.push(FormulaRecord::from_pairs("canonical_bob_state", 1e-10, false, &pairs));

    let mut success_alphas = alphas.clone();
    success_alphas.push(ep);
    let pairs = collect_pairs(&success_alphas, |&a| {
        let post = Postselection::prepare(&phi, &map.operator(2, a)?)?;
        Ok(vec![(post.success_prob, mixed_qubit_success(a))])
    })?;
    out.push(FormulaRecord::from_pairs("dilation_success_probability", 1e-9, false, &pairs));

    let pairs = collect_pairs(&matrices, |v| Ok(vec![(dilate(v)?.unitarity_residual(), 0.0)]))?;
    out.push(FormulaRecord::from_pairs("dilation_unitarity", 1e-10, false, &pairs));

    let times = [None, Some(0.3), Some(1.7), Some(5.0)];
    let pairs = collect_pairs(&qutrits, |q| {
        let mut v = Vec::new();
        for &a in alphas {
            for t in times {
                let m = t.map(PtMap::Time).unwrap_or_default();
                v.push((signaling::qutrit_signaling_check(q, a, m)?.brute, 0.0));
            }
        }
        Ok(v)
    })?;
    out.push(FormulaRecord::from_pairs("qutrit_no_perturbation", 1e-10, false, &pairs));

    // Known discrepancies: measured and reported, never failing.
    let mut zero_my: Vec<CanonicalQubitParams> = cfg.p.iter().map(|&p| CanonicalQubitParams::werner(p)).collect();
    zero_my.extend(non_max_grid.iter().map(|&(b, g, _)| ptsim::NonMaxParams::new(b, g).map(|n| n.canonical())).collect::<Result<Vec<_>, _>>()?);
    zero_my.extend(no_my.iter().copied());
    let trace_pairs = |set: &[CanonicalQubitParams]| {
        collect_pairs(set, |p| {
            let spec = StateSpec::Canonical(*p);
            alphas
                .iter()
                .map(|&a| {
                    let r = signaling::distinguishability(&spec, a)?;
                    Ok((r.brute, r.closed_form.unwrap_or(f64::NAN)))
                })
                .collect()
        })
    };
    out.push(FormulaRecord::from_pairs("trace_distance_printed", 1e-10, true, &trace_pairs(&zero_my)?));
    out.push(FormulaRecord::from_pairs("trace_distance_printed_general", 1e-10, true, &trace_pairs(&general)?));

    let pairs = collect_pairs(&general, |p| {
        let rho = canonical_two_qubit(p)?;
        let mut v = Vec::new();
        for &a in alphas {
            let b = bob_after(&rho, AliceOp::Identity, a)?;
            let (rp, rm) = closed_form::printed_r_pm(p, a);
            v.push((b.get(0, 0).re, rp));
            v.push((b.get(1, 1).re, rm));
        }
        Ok(v)
    })?;
    out.push(FormulaRecord::from_pairs("bob_diagonal_printed", 1e-10, true, &pairs));

    let amplitudes: Vec<(f64, f64)> = non_max_grid.iter().step_by(alphas.len()).map(|&(b, g, _)| (b, g)).collect();
    let pairs = collect_pairs(&amplitudes, |&(b, g)| {
        let rho = StateSpec::NonMax { beta: b, gamma: g }.build()?;
        let initial = partial_trace(&rho, 2, 2, Subsystem::B)?.get(0, 1).re;
        Ok(vec![(initial, closed_form::printed_non_max_initial_offdiag(b, g))])
    })?;
    out.push(FormulaRecord::from_pairs("non_max_initial_offdiag_printed", 1e-10, true, &pairs));

    let offdiag = |part: fn(C64) -> f64| {
        collect_pairs(&non_max_grid, move |&(b, g, a)| {
            let rho = StateSpec::NonMax { beta: b, gamma: g }.build()?;
            let brute = bob_after(&rho, AliceOp::Identity, a)?.get(0, 1);
            Ok(vec![(part(brute), part(closed_form::printed_non_max_offdiag(b, g, a)))])
        })
    };
    out.push(FormulaRecord::from_pairs("non_max_offdiag_real_printed", 1e-10, true, &offdiag(|z| z.re)?));
    out.push(FormulaRecord::from_pairs("non_max_offdiag_imag", 1e-10, false, &offdiag(|z| z.im)?));

    Ok(VerificationReport::new(seed, out))
}
