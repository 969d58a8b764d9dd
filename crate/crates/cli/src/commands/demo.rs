use identikit::lab::{
    bivariate_symmetry_demo, darmois_demo, evd_check, evd_probe_points, gaussian_rotation_demo,
    isometry_check, BuiltinMap, SymmetryConfig, DEFAULT_FD_STEP, DEFAULT_PROBES,
};
use identikit::synth::{SourceDistribution, SourceKind};
use identikit::{linalg, rng};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use super::Run;
use crate::output::{versioned, Cell};
use crate::{CliError, CliResult, DemoCommand};

pub fn run(run: &mut Run, cmd: DemoCommand) -> CliResult<&'static str> {
    let seed = run.seed;
    match cmd {
        DemoCommand::Rotation { vars, samples } => {
            let vars = run.params.value("vars", vars, 2)?;
            let samples = run.params.value("samples", samples, 1000)?;
            let r = gaussian_rotation_demo(vars, samples, seed)?;
            run.out.json("rotation.json", versioned(&r)?)?;
            println!(
                "log-likelihood under x = s: {}, under x = U s: {}, difference {:e}",
                identikit::format_number(r.log_likelihood_identity),
                identikit::format_number(r.log_likelihood_rotated),
                r.difference
            );
            Ok("rotation")
        }
        DemoCommand::Evd {
            mixing,
            vars,
            angle,
            dist,
            probes,
            tol,
        } => {
            let p = &mut run.params;
            let mixing = p.value("mixing", mixing, "rotation".to_string())?;
            let vars = p.value("vars", vars, 2)?;
            let dist = p.value(
                "dist",
                dist,
                SourceDistribution::new(SourceKind::GeneralizedGaussian { shape: 1.0 }),
            )?;
            let n_probes = p.value("probes", probes, DEFAULT_PROBES)?;
            let tol = p.value("tol", tol, 1e-10)?;
            let a = match mixing.as_str() {
                "rotation" => {
                    if vars != 2 {
                        return Err(CliError::Usage("--mixing rotation needs --vars 2".into()));
                    }
                    let t = p.value("angle", angle, 45.0)?.to_radians();
                    DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
                }
                "orthogonal" => linalg::random_orthogonal(vars, &mut rng::child(seed, 0)),
                "permutation" => signed_permutation(vars, seed),
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown mixing `{other}` (rotation|orthogonal|permutation)"
                    )))
                }
            };
            let probes = evd_probe_points(&a, n_probes, seed);
            let report = evd_check(&a, &dist, &probes, tol)?;
            let mut doc = versioned(&report)?;
            let rows: Vec<Vec<f64>> = a.row_iter().map(|r| r.iter().copied().collect()).collect();
            doc["mixing"] = serde_json::to_value(rows)?;
            run.out.json("evd.json", doc)?;
            if run.plot {
                let rows: Vec<Vec<Cell>> = report
                    .probes
                    .iter()
                    .enumerate()
                    .map(|(i, pr)| {
                        vec![
                            Cell::Int(i as u64),
                            Cell::Num(pr.offdiag),
                            Cell::Num(pr.spread),
                        ]
                    })
                    .collect();
                run.out
                    .table("evd_probes.csv", &["probe", "offdiag", "spread"], &rows)?;
            }
            println!(
                "off-diagonal residual {:e}, smallest eigenvalue spread {:e}: {:?}",
                report.offdiag_residual, report.eigenvalue_spread, report.verdict
            );
            Ok("evd")
        }
        DemoCommand::Isometry {
            map,
            dim,
            scale,
            probes,
            fd_step,
            tol,
        } => {
            let p = &mut run.params;
            let kind = p.value("map", map, "orthogonal".to_string())?;
            let dim = p.value("dim", dim, 3)?;
            let n_probes = p.value("probes", probes, DEFAULT_PROBES)?;
            let fd_step = p.value("fd-step", fd_step, DEFAULT_FD_STEP)?;
            let tol = p.value("tol", tol, 1e-6)?;
            let mut r = rng::child(seed, 0);
            let f = match kind.as_str() {
                "orthogonal" => BuiltinMap::Affine {
                    matrix: linalg::random_orthogonal(dim, &mut r),
                    offset: DVector::from_fn(dim, |_, _| 2.0 * r.random::<f64>() - 1.0),
                },
                "scaled" => {
                    let s = p.value("scale", scale, 2.0)?;
                    BuiltinMap::Affine {
                        matrix: linalg::random_orthogonal(dim, &mut r) * s,
                        offset: DVector::zeros(dim),
                    }
                }
                "tanh" => BuiltinMap::Tanh { dim },
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown map `{other}` (orthogonal|scaled|tanh)"
                    )))
                }
            };
            let mut r = rng::child(seed, 1);
            let points = DMatrix::from_fn(n_probes, dim, |_, _| 2.0 * r.random::<f64>() - 1.0);
            let report = isometry_check(&f, &points, fd_step, tol)?;
            let mut doc = versioned(&report)?;
            doc["map"] = serde_json::to_value(&f)?;
            run.out.json("isometry.json", doc)?;
            println!(
                "orthogonality residual {}, second-derivative residual {}: {:?}",
                identikit::format_number(report.orthogonality_residual),
                identikit::format_number(report.second_derivative_residual),
                report.verdict
            );
            Ok("isometry")
        }
        DemoCommand::Darmois { samples, test } => {
            let samples = run.params.value("samples", samples, 5000)?;
            let cfg = run.test_config(&test, 1)?;
            let r = darmois_demo(samples, seed, &cfg)?;
            run.out.json("darmois.json", versioned(&r)?)?;
            println!(
                "KS distance from uniform {}, HSIC(x1, z) p = {}, HSIC(x1, x2) p = {}",
                identikit::format_number(r.ks_distance),
                identikit::format_number(r.independence.p_value),
                identikit::format_number(r.observed_dependence.p_value)
            );
            Ok("darmois")
        }
        DemoCommand::Symmetry { samples, rho, test } => {
            let samples = run.params.value("samples", samples, 10000)?;
            let d = SymmetryConfig::default();
            let cfg = SymmetryConfig {
                rho: run.params.value("rho", rho, d.rho)?,
                test: run.test_config(&test, 1)?,
                ..d
            };
            let r = bivariate_symmetry_demo(samples, seed, &cfg)?;
            run.out.json("symmetry.json", versioned(&r)?)?;
            println!(
                "mean log-likelihood x1->x2 {}, x2->x1 {}, gap {:e}",
                identikit::format_number(r.log_likelihood_forward),
                identikit::format_number(r.log_likelihood_backward),
                r.log_likelihood_gap
            );
            Ok("symmetry")
        }
    }
}

fn signed_permutation(n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::child(seed, 0);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut r);
    let mut a = DMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        a[(i, j)] = if r.random::<bool>() { 1.0 } else { -1.0 };
    }
    a
}
