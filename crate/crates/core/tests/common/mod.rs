#![allow(dead_code)]

use planar_cocycles::domination::{domination_decide, DominationBudget, DominationVerdict, MulticoneCertificate};
use planar_cocycles::linalg::Mat2;
use planar_cocycles::projective::Direction;
use planar_cocycles::semigroup::{conformal_split, kappa_profile, MatrixTuple, DEFAULT_CAP};
use planar_cocycles::thermo::{eta_measure, log_norm_sums, transfer_from_direction, CylinderMeasure};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub const CASES: u32 = 256;
pub const SEED: u64 = 20_261_016;

pub fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    })
}

pub fn a1a2() -> MatrixTuple {
    MatrixTuple::from_entries(&[[2.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 2.0]]).unwrap()
}

pub fn a1a2i() -> MatrixTuple {
    MatrixTuple::from_entries(&[[2.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 2.0], [1.0, 0.0, 0.0, 1.0]]).unwrap()
}

pub fn a3a4() -> MatrixTuple {
    MatrixTuple::from_entries(&[[1.0, 0.0, 0.0, 2.0], [0.0, 1.0, 1.0, 0.0]]).unwrap()
}

/// Matrices with entries in `[-3, 3]` and `|det| ≥ 0.2`.
pub fn matrix() -> impl Strategy<Value = Mat2> {
    prop::array::uniform4(-3.0..3.0f64)
        .prop_filter_map("near singular", |[a, b, c, d]| {
            Mat2::new(a, b, c, d).ok().filter(|m| m.det().abs() >= 0.2)
        })
}

/// Entrywise positive matrices, which are always dominated as a set.
pub fn positive_matrix() -> impl Strategy<Value = Mat2> {
    prop::array::uniform4(0.05..3.0f64)
        .prop_filter_map("near singular", |[a, b, c, d]| {
            Mat2::new(a, b, c, d).ok().filter(|m| m.det().abs() >= 0.05)
        })
}

pub fn tuple(max: usize) -> impl Strategy<Value = MatrixTuple> {
    prop::collection::vec(matrix(), 1..=max).prop_map(|v| MatrixTuple::new(v).unwrap())
}

/// Positive pairs, pairs with a rotation and arbitrary pairs, mixed so that
/// every verdict occurs.
pub fn mixed_pair() -> impl Strategy<Value = MatrixTuple> {
    prop_oneof![
        (positive_matrix(), positive_matrix()).prop_map(|(a, b)| MatrixTuple::new(vec![a, b]).unwrap()),
        (positive_matrix(), 0.1..3.0f64).prop_map(|(a, t)| MatrixTuple::new(vec![a, Mat2::rotation(t)]).unwrap()),
        (matrix(), matrix()).prop_map(|(a, b)| MatrixTuple::new(vec![a, b]).unwrap()),
    ]
}

fn check(name: &str, ok: bool, detail: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{name}: {}", detail())))
    }
}

fn budget() -> DominationBudget {
    DominationBudget {
        depth: 8,
        ..DominationBudget::default()
    }
}

pub fn projective_cocycle() -> Result<(), String> {
    runner()
        .run(&(matrix(), matrix(), 0.0..std::f64::consts::PI), |(a, b, th)| {
            let d = Direction::new(th);
            let lhs = d.act(&(a * b));
            let rhs = d.act(&b).act(&a);
            check("cocycle", lhs.distance(rhs) <= 1e-9, || format!("{lhs:?} vs {rhs:?}"))
        })
        .map_err(|e| e.to_string())
}

pub fn singular_value_product() -> Result<(), String> {
    runner()
        .run(&matrix(), |a| {
            let (s1, s2) = a.singular_values();
            check("sv1·sv2", (s1 * s2 - a.det().abs()).abs() <= 1e-12 * s1 * s1, || {
                format!("{s1}·{s2} vs {}", a.det())
            })?;
            check("ordering", s1 >= s2 && s2 > 0.0, || format!("{s1} {s2}"))
        })
        .map_err(|e| e.to_string())
}

pub fn norm_and_ratio_multiplicativity() -> Result<(), String> {
    runner()
        .run(&(matrix(), matrix()), |(a, b)| {
            let ab = a * b;
            check("submultiplicative", ab.op_norm() <= a.op_norm() * b.op_norm() * (1.0 + 1e-12), || {
                format!("{} > {}·{}", ab.op_norm(), a.op_norm(), b.op_norm())
            })?;
            check(
                "ratio supermultiplicative",
                ab.sv_ratio() >= a.sv_ratio() * b.sv_ratio() * (1.0 - 1e-9),
                || format!("{} < {}·{}", ab.sv_ratio(), a.sv_ratio(), b.sv_ratio()),
            )
        })
        .map_err(|e| e.to_string())
}

pub fn pressure_subadditivity() -> Result<(), String> {
    runner()
        .run(&(tuple(3), 0.2..3.0f64), |(t, s)| {
            let depth = 6;
            let (a, _) = log_norm_sums(&t, s, depth, DEFAULT_CAP).unwrap();
            for n in 1..depth {
                for m in 1..=depth - n {
                    check("subadditive", a[n + m - 1] <= a[n - 1] + a[m - 1] + 1e-9, || {
                        format!("a_{} = {} > a_{n} + a_{m} = {}", n + m, a[n + m - 1], a[n - 1] + a[m - 1])
                    })?;
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn kappa_monotone() -> Result<(), String> {
    runner()
        .run(&tuple(3), |t| {
            let prof = kappa_profile(&t, 4, DEFAULT_CAP).unwrap();
            for w in prof.windows(2) {
                check("nonincreasing", w[1].kappa <= w[0].kappa, || format!("{} > {}", w[1].kappa, w[0].kappa))?;
            }
            check("range", prof.iter().all(|k| k.kappa > 0.0 && k.kappa <= 1.0), || format!("{prof:?}"))
        })
        .map_err(|e| e.to_string())
}

pub fn certificate_reverification() -> Result<(), String> {
    runner()
        .run(&mixed_pair(), |t| {
            if let DominationVerdict::Dominated(c) = domination_decide(&t, &budget()) {
                check("verify", c.verify(&t), || format!("{c:?}"))?;
                let back: MulticoneCertificate = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
                check("json replay", back.verify(&t), || format!("{back:?}"))?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn measure_consistency() -> Result<(), String> {
    let strat = (1usize..=3, 1usize..=5).prop_flat_map(|(n, depth)| {
        prop::collection::vec(0.0..1.0f64, n.pow(depth as u32)).prop_map(move |v| (n, depth, v))
    });
    runner()
        .run(&strat, |(n, depth, v)| {
            let total: f64 = v.iter().sum::<f64>().max(1e-300);
            let top: Vec<f64> = v.iter().map(|x| x / total).collect();
            let mu = CylinderMeasure::from_top_level(n, depth, top).unwrap();
            check("consistency", mu.consistency_error() <= 1e-10, || format!("{}", mu.consistency_error()))?;
            let back: CylinderMeasure = serde_json::from_str(&serde_json::to_string(&mu).unwrap()).unwrap();
            check("json", back == mu, || "round trip changed masses".into())
        })
        .map_err(|e| e.to_string())
}

pub fn eta_consistency() -> Result<(), String> {
    let strat = (positive_matrix(), positive_matrix(), 0.2..3.0f64, prop::bool::ANY, 0.5..2.0f64);
    runner()
        .run(&strat, |(a, b, c, neg, s)| {
            let e = Mat2::scalar(if neg { -c } else { c }).unwrap();
            let t = MatrixTuple::new(vec![a, e, b]).unwrap();
            let split = conformal_split(&t);
            check("split", split.conformal_indices == vec![1], || format!("{split:?}"))?;
            let sub = t.subtuple(&split.hyperbolic_indices).unwrap();
            let base = transfer_from_direction(&sub, s, Direction::new(std::f64::consts::FRAC_PI_4), 4).unwrap();
            let (deep, _) = eta_measure(&t, &split, &base, 6).unwrap();
            for len in 1..=6 {
                let (direct, _) = eta_measure(&t, &split, &base, len).unwrap();
                let err = direct
                    .level(len)
                    .iter()
                    .zip(deep.level(len))
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                check("eta levels", err <= 1e-12, || format!("length {len}: {err:e}"))?;
            }
            check("eta total", (deep.level(1).iter().sum::<f64>() - 1.0).abs() <= 1e-12, || {
                format!("{:?}", deep.level(1))
            })
        })
        .map_err(|e| e.to_string())
}

pub fn conjugation_covariance() -> Result<(), String> {
    let g = prop::array::uniform4(-2.0..2.0f64)
        .prop_filter_map("ill-conditioned", |[a, b, c, d]| Mat2::new(a, b, c, d).ok().filter(|m| m.det().abs() >= 0.5));
    runner()
        .run(&(mixed_pair(), g), |(t, g)| {
            let v = domination_decide(&t, &budget());
            let w = domination_decide(&t.conjugate(&g), &budget());
            check("verdict", v.tag() == w.tag(), || format!("{} vs {}", v.tag(), w.tag()))
        })
        .map_err(|e| e.to_string())
}

/// Every property with its name, in a fixed order.
pub fn all_properties() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("projective cocycle law", projective_cocycle),
        ("sv1·sv2 = |det|", singular_value_product),
        ("norm submultiplicativity, ratio supermultiplicativity", norm_and_ratio_multiplicativity),
        ("a_n subadditivity", pressure_subadditivity),
        ("kappa monotonicity", kappa_monotone),
        ("certificate re-verification", certificate_reverification),
        ("cylinder measure consistency", measure_consistency),
        ("eta consistency", eta_consistency),
        ("conjugation covariance of domination verdicts", conjugation_covariance),
    ]
}
