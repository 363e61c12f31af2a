//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are measured and reported like every other
//! criterion, but a FAIL there does not fail the run. Any other FAIL does, and
//! so does a known-red criterion that starts passing (the list is then stale).

use std::process::ExitCode;
use std::time::{Duration, Instant};

use amol::nterm::nterm_curve;
use amol::transform::{Keep, Transform};
use amol_core::approx::{coefficient_fit, log_spaced, rate_fit};
use amol_core::cartoon::{make_phantom, rasterize};
use amol_core::frame::{check_tight, index_set, FrameSpec, WindowKey};
use amol_core::geometry::Direction;
use amol_core::gramian::{decay_fit, sample_pairs, GramianTable, PairSampler, SchurDiagnostic};
use amol_core::metric::{omega_alpha, schur_lp_bound, ConsistencyConfig};
use amol_core::molecule::{
    order_check, sample_generator, transfer_matrices, MoleculeOrder, UniformGrid, WeightMode,
};
use amol_core::parametrization::{sh_shear_set, PhasePoint, SamplingData, ShearletIndex};
use amol_core::volume::SampledVolume;
use amol_core::windows::{bump_v, corona_w, phi_hat, ProfileParams};
use amol_core::{gramian::gramian_row, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const KNOWN_RED: &[&str] = &["AC4", "AC5", "AC7", "AC8"];

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn ac1() -> Result<Outcome> {
    const TOL: f64 = 1e-10;
    const BUDGET: Duration = Duration::from_secs(60);
    let start = Instant::now();
    let r = check_tight(&FrameSpec::new(64, 2)?, false)?;
    let took = start.elapsed();
    outcome(
        r.max_dev <= TOL && took < BUDGET,
        format!(
            "max_dev={:.2e} (<= {TOL:.0e}) time={took:.2?} (< 60s)",
            r.max_dev
        ),
    )
}

fn ac2() -> Result<Outcome> {
    const TOL: f64 = 1e-8;
    let t = Transform::new(FrameSpec::new(64, 2)?)?;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SampledVolume::real(
            64,
            (0..64 * 64 * 64)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect(),
        )?;
        let g = t.synthesis(&t.analysis(&f, Keep::All)?)?;
        worst = worst.max((f.distance_sqr(&g)? / f.energy()).sqrt());
    }
    outcome(
        worst <= TOL,
        format!("max relative L2 error over 5 volumes={worst:.2e} (<= {TOL:.0e})"),
    )
}

fn random_point(rng: &mut ChaCha8Rng) -> PhasePoint {
    let s = 4f64.powf(rng.gen_range(0.0..6.0));
    let e = Direction::normalize((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let x = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
    PhasePoint::new(s, e, x).unwrap()
}

fn ac3() -> Result<Outcome> {
    const QUASI_SYM: f64 = 4.0;
    const TRIANGLE: f64 = 1e3;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut diag_exact = true;
    let mut worst_sym: f64 = 0.0;
    let mut c_tri: f64 = 0.0;
    for alpha in [0.0, 0.5, 1.0] {
        for _ in 0..100_000 {
            let (p, q) = (random_point(&mut rng), random_point(&mut rng));
            diag_exact &= omega_alpha(&p, &p, alpha)? == 1.0;
            worst_sym = worst_sym.max(omega_alpha(&p, &q, alpha)? / omega_alpha(&q, &p, alpha)?);
        }
        for _ in 0..10_000 {
            let (a, b, m) = (
                random_point(&mut rng),
                random_point(&mut rng),
                random_point(&mut rng),
            );
            c_tri = c_tri.max(
                omega_alpha(&a, &b, alpha)?
                    / (omega_alpha(&a, &m, alpha)? * omega_alpha(&m, &b, alpha)?),
            );
        }
    }
    outcome(
        diag_exact && worst_sym <= QUASI_SYM && c_tri <= TRIANGLE,
        format!("omega(l,l)==1: {diag_exact}; quasi-symmetry={worst_sym:.3} (<= {QUASI_SYM}); C_tri={c_tri:.3} (<= {TRIANGLE:.0e})"),
    )
}

fn ac4() -> Result<Outcome> {
    const CHANGE: f64 = 0.01;
    let r = amol::cli::run_consistency(&ConsistencyConfig::doubling(0.5, 4.0, 2, 6))?;
    let n = r.levels.len();
    let change = (r.levels[n - 1] - r.levels[n - 2]).abs() / r.levels[n - 2];
    let k1 = amol::cli::run_consistency(&ConsistencyConfig::doubling(0.5, 1.0, 0, 3))?;
    outcome(
        change < CHANGE && !k1.converged,
        format!(
            "k=4 levels={:?} change (5,16)->(6,32)={:.2}% (< 1%); k=1 converged={}",
            r.levels
                .iter()
                .map(|v| (v * 100.0).round() / 100.0)
                .collect::<Vec<_>>(),
            100.0 * change,
            k1.converged
        ),
    )
}

fn ac5() -> Result<Outcome> {
    const PAIRS: usize = 1620;
    const MIN_ROWS: usize = 500;
    const SLOPE: f64 = -3.0;
    const R2: f64 = 0.8;
    let spec = FrameSpec::new(64, 2)?;
    let pairs = sample_pairs(
        &spec,
        &PairSampler {
            count: PAIRS,
            seed: 0,
        },
    )?;
    let rows = amol::parallel::install(|| {
        pairs
            .par_iter()
            .map(|(a, b)| gramian_row(&spec, a, b, 0.5))
            .collect::<Result<Vec<_>>>()
    })?;
    let fit = decay_fit(&GramianTable::from_rows(rows), 4.0, 200.0)?;
    outcome(
        fit.rows >= MIN_ROWS && fit.slope <= SLOPE && fit.r2 >= R2,
        format!(
            "rows in [4,200]={} (>= {MIN_ROWS}) slope={:.3} (<= {SLOPE}) r2={:.3} (>= {R2})",
            fit.rows, fit.slope, fit.r2
        ),
    )
}

fn ac6() -> Result<Outcome> {
    const STABLE: f64 = 0.05;
    const HAND_ULPS: f64 = 4.0;
    let hand = [
        (schur_lp_bound((0..3).map(|i| (i, i, 1.0)), 1.0)?, 1.0),
        (
            schur_lp_bound([(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], 1.0)?,
            2.0,
        ),
        (schur_lp_bound([(0, 0, 2.0), (1, 1, 3.0)], 0.5)?, 3.0),
    ];
    // Exact up to rounding: the p = ½ case squares √3.
    let hand_ok = hand
        .iter()
        .all(|(got, want)| (got - want).abs() <= HAND_ULPS * f64::EPSILON * want);
    // Rows of the digital self-Gramian, three translations per window (reduced to its lattice).
    let t = Transform::new(FrameSpec::new(64, 2)?)?;
    let keys = index_set(2);
    let bound = |j_max: u32| -> Result<f64> {
        let mut best: f64 = 0.0;
        for key in keys.iter().filter(|k| k.j <= j_max) {
            let dims = t
                .window(key)
                .expect("window of the index set")
                .lattice_dims(64);
            for k in [[0, 0, 0], [1, 1, 1], [1, 0, 1]] {
                let k = [0, 1, 2].map(|i| k[i] % dims[i] as i64);
                best = best.max(t.gramian_row_l1(&key.index(k), |w: &WindowKey| w.j <= j_max)?);
            }
        }
        Ok(best)
    };
    let diag = SchurDiagnostic::from_bounds(1.0, vec![bound(1)?, bound(2)?])?;
    let change = (diag.bounds[1] - diag.bounds[0]).abs() / diag.bounds[0];
    outcome(
        hand_ok && change < STABLE,
        format!(
            "hand values {:?}; p=1 bounds j<=1: {:.3}, j<=2: {:.3}, change={:.2}% (< 5%)",
            hand.map(|h| h.0),
            diag.bounds[0],
            diag.bounds[1],
            100.0 * change
        ),
    )
}

fn ac7() -> Result<Outcome> {
    const DRIFT: f64 = 10.0;
    const TRANSFER_TOL: f64 = 1e-12;
    const NORM_MAX: f64 = 4.0;
    // Interior ε = 3 generators live in |ξ₁|, |ξ₂| ≤ ξ₃ ≤ 1/2 (and the mirror image).
    // The narrowest transition is the angular one at the inner edge ξ₃ = 1/32.
    let min_band = (1.0 - 2.0 / 16.0) / 32.0;
    let h = 1.0 / 320.0;
    let m = 160;
    let grid = UniformGrid {
        origin: [-0.5, -0.5, 0.0],
        step: h,
    };
    let order = MoleculeOrder::finite(2, 3, 4, 4);
    let profile = ProfileParams::default();
    let mut constants = Vec::new();
    for j in 0..=3u32 {
        let key = WindowKey::new(3, j, [0, 0]);
        let g = sample_generator(&profile, &key, &grid, [2 * m + 1, 2 * m + 1, m + 1])?;
        let mode = WeightMode::Shearlet {
            sigma: 4.0,
            j,
            epsilon: 3,
        };
        constants.push(order_check(&g, &grid, 0.5, mode, &order, min_band)?.constant);
    }
    let drift = constants.iter().cloned().fold(0.0, f64::max)
        / constants.iter().cloned().fold(f64::INFINITY, f64::min);

    let data = SamplingData::sh(vec![1.0; 3]);
    let mut column_err: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for j in 0..=6u32 {
        for eps in 1..=3 {
            for ell in sh_shear_set(eps, j) {
                let tm = transfer_matrices(
                    &ShearletIndex::new(eps, j, ell.to_vec(), vec![0; 3]),
                    &data,
                )?;
                let col = tm.m.column(2);
                column_err = column_err
                    .max(col[0].abs())
                    .max(col[1].abs())
                    .max((col[2] - tm.n_lambda).abs());
                worst_norm = worst_norm.max(tm.norms[2]).max(tm.norms[3]);
            }
        }
    }
    outcome(
        drift <= DRIFT && column_err <= TRANSFER_TOL && worst_norm <= NORM_MAX,
        format!(
            "order (2,3,4,4) constants j=0..3: {} drift={drift:.1}x (<= {DRIFT}x); |M e3 - n e3|={column_err:.1e} (<= {TRANSFER_TOL:.0e}); max |M~^(+-1)|={worst_norm:.3} (<= {NORM_MAX})",
            constants.iter().map(|c| format!("{c:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn ac8() -> Result<Outcome> {
    const COEF_RANGE: (f64, f64) = (-1.35, -0.65);
    const ERR_SLOPE: f64 = -0.6;
    const BUDGET: Duration = Duration::from_secs(600);
    let start = Instant::now();
    let f = rasterize(&make_phantom(10.0, 3, 0)?, 64)?;
    let t = Transform::new(FrameSpec::new(64, 2)?)?;
    let curve = nterm_curve(&t, &f, &log_spaced(100, 10_000))?;
    let coef = coefficient_fit(&curve.ranked, (100, 10_000))?;
    let err = rate_fit(&curve.rows, (100.0, 10_000.0))?;
    let took = start.elapsed();
    outcome(
        (COEF_RANGE.0..=COEF_RANGE.1).contains(&coef.exponent) && err.exponent <= ERR_SLOPE && took < BUDGET,
        format!(
            "coefficient slope={:.3} (in [{}, {}]) err2 slope={:.3} (<= {ERR_SLOPE}) time={took:.2?} (< 10min)",
            coef.exponent, COEF_RANGE.0, COEF_RANGE.1, err.exponent
        ),
    )
}

fn ac9() -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    const BUDGET: Duration = Duration::from_secs(1);
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut three: f64 = 0.0;
    let mut shift: f64 = 0.0;
    let mut tele: f64 = 0.0;
    for _ in 0..1000 {
        let u: f64 = rng.gen_range(-1.0..=1.0);
        let s: f64 = [-1.0, 0.0, 1.0].iter().map(|l| bump_v(u - l).powi(2)).sum();
        three = three.max((s - 1.0).abs());

        let u: f64 = rng.gen_range(-50.0..50.0);
        let base = u.floor() as i64;
        let s: f64 = (base - 2..=base + 2)
            .map(|l| bump_v(u - l as f64).powi(2))
            .sum();
        shift = shift.max((s - 1.0).abs());

        let xi: [f64; 3] = [0, 1, 2].map(|_| rng.gen_range(-4.0..4.0));
        let scaled = |q: f64| xi.map(|v| v * q);
        let lhs = phi_hat(xi).powi(2)
            + (0..=3)
                .map(|j| corona_w(scaled(4f64.powi(-j))).powi(2))
                .sum::<f64>();
        tele = tele.max((lhs - phi_hat(scaled(4f64.powi(-4))).powi(2)).abs());
    }
    let took = start.elapsed();
    let worst = three.max(shift).max(tele);
    outcome(
        worst <= TOL && took < BUDGET,
        format!("three-term={three:.1e} shift={shift:.1e} telescoping(J=3)={tele:.1e} (<= {TOL:.0e}) time={took:.2?} (< 1s)"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with("AC"))
        .collect();
    let mut unexpected = Vec::new();
    for (id, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let known = KNOWN_RED.contains(&id);
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let note = match (pass, known) {
            (false, true) => " [known red]",
            (true, true) => " [listed as known red]",
            _ => "",
        };
        println!("{id} {} {detail}{note}", if pass { "PASS" } else { "FAIL" });
        if pass == known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcomes: {unexpected:?}");
        ExitCode::FAILURE
    }
}
