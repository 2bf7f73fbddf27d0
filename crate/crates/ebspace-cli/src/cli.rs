//! Command dispatch.
//!
//! Exit codes: `certify` maps its verdict to 0 (EB), 1 (NotEB) or
//! 2 (Undecided); other subcommands return 0 on success. Usage errors exit
//! with 64 and runtime errors with 65, so every failure is above 2.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use ebspace::certify::{
    certify_with_claim, CertifyOptions, ConstructionClaim, EbCertificate, EbStatus, FalsifyBudget,
    Family3Params,
};
use ebspace::construct::{
    b_direct_sum, family3_space, family_2xn_space, family_3dim_3n, fixtures, saturating_space,
    tensor_product_space, DirectSumFamilyParams, Family2xnParams,
};
use ebspace::eof::{
    additivity_check, convex_roof_eof, scan_nonadditivity, wootters_eof, RoofOptions, ScanGrid,
};
use ebspace::rng::{random_complex_vector, stream_rng};
use ebspace::states::BipartiteSubspace;
use ebspace::tc::{linspace, tc_curve, TcParams};
use ebspace::tensor::cr;

use crate::csv::{emit_csv, sig12, CurveRow};
use crate::docs::{
    as_bipartite_density, parse_space, parse_state, serialize_space, LoadedSpace, SpaceDocument,
};
use crate::DEFAULT_SEED;

const EXIT_USAGE: i32 = 64;
const EXIT_RUNTIME: i32 = 65;

#[derive(Parser, Debug)]
#[command(
    name = "ebspace",
    version,
    about = "Entanglement-breaking subspace toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify whether a space document describes an EB space.
    Certify {
        #[arg(long)]
        space: PathBuf,
        /// Falsifier restart budget for undecided cases.
        #[arg(long, default_value_t = 300)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Half-width of the reported boundary band around zero evidence.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Construct a named EB space family and write it as a space document.
    Construct {
        /// One of: fixture-u, fixture-u01, fixture-v, family3, direct-sum-3n,
        /// family-2x4, saturating, tensor, bsum.
        #[arg(long)]
        family: String,
        /// Family parameters, comma separated (see README).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        params: Vec<f64>,
        /// A-side dimension where applicable.
        #[arg(long, default_value_t = 2)]
        adim: usize,
        /// Block count (direct-sum-3n) or number of B levels (saturating).
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        /// Input documents for tensor/bsum.
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Entanglement of formation of a state document.
    Eof {
        #[arg(long)]
        state: PathBuf,
        /// Bipartition as two dimensions.
        #[arg(long, num_args = 2)]
        cut: Vec<usize>,
        /// auto | wootters | roof
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long)]
        ansatz: Option<usize>,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Additivity gap report for a state on a certified EB space.
    Additivity {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Tavis-Cummings EOF / EB / entanglement-cost curve as CSV.
    Tc {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long)]
        coupling: f64,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 30)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Scan the non-additivity candidate family for EOF gaps.
    ScanNonadditive {
        /// Grid points per axis (angle, p, q).
        #[arg(long, default_value_t = 3)]
        grid: usize,
        /// Optional sigma state document (defaults to a Bell pair).
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, default_value_t = 25)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

/// Runs the CLI against explicit argument and stream handles.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", rendered);
                    0
                }
                _ => {
                    let _ = write!(err, "{}", rendered);
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {}", msg);
            EXIT_RUNTIME
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("reading {}: {}", path.display(), e))
}

fn load_space(path: &Path) -> Result<LoadedSpace, String> {
    parse_space(&read(path)?).map_err(|e| format!("{}: {}", path.display(), e))
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, String> {
    match cmd {
        Command::Certify {
            space,
            budget,
            seed,
            tol,
        } => {
            let loaded = load_space(&space)?;
            if budget == 0 {
                return Err("budget must be positive".into());
            }
            let opts = CertifyOptions {
                seed,
                falsify: FalsifyBudget {
                    restarts: budget,
                    max_iters: 80,
                },
                falsify_on_undecided: true,
            };
            let mut verdict = certify_with_claim(&loaded.space, loaded.claim.as_ref(), &opts)
                .map_err(|e| e.to_string())?;
            verdict.boundary = verdict.choi_min_pt.abs() <= tol;
            write_verdict_report(out, &loaded, &verdict).map_err(|e| e.to_string())?;
            Ok(match verdict.status {
                EbStatus::Eb => 0,
                EbStatus::NotEb => 1,
                EbStatus::Undecided => 2,
            })
        }
        Command::Construct {
            family,
            params,
            adim,
            blocks,
            inputs,
            seed,
            output,
        } => {
            let (space, claim) = construct_space(&family, &params, adim, blocks, &inputs, seed)?;
            let mut doc = SpaceDocument::from_space(&space);
            if let Some(claim) = &claim {
                doc = doc.with_claim(claim);
            }
            std::fs::write(&output, serialize_space(&doc))
                .map_err(|e| format!("writing {}: {}", output.display(), e))?;
            writeln!(
                out,
                "wrote {} ({}-dimensional space in C^{} (x) C^{})",
                output.display(),
                space.dim(),
                space.d_a(),
                space.d_b()
            )
            .map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::Eof {
            state,
            cut,
            method,
            ansatz,
            restarts,
            seed,
        } => {
            if cut.len() != 2 {
                return Err("--cut needs exactly two dimensions".into());
            }
            let loaded = parse_state(&read(&state)?).map_err(|e| e.to_string())?;
            let rho = as_bipartite_density(loaded, (cut[0], cut[1])).map_err(|e| e.to_string())?;
            let value = match method.as_str() {
                "wootters" => wootters_eof(&rho).map_err(|e| e.to_string())?,
                "roof" => {
                    let opts = RoofOptions {
                        ansatz,
                        restarts,
                        seed,
                        ..RoofOptions::default()
                    };
                    convex_roof_eof(&rho, (cut[0], cut[1]), &opts)
                        .map_err(|e| e.to_string())?
                        .value
                }
                "auto" => {
                    if (cut[0], cut[1]) == (2, 2) {
                        wootters_eof(&rho).map_err(|e| e.to_string())?
                    } else {
                        let opts = RoofOptions {
                            ansatz,
                            restarts,
                            seed,
                            ..RoofOptions::default()
                        };
                        convex_roof_eof(&rho, (cut[0], cut[1]), &opts)
                            .map_err(|e| e.to_string())?
                            .value
                    }
                }
                other => return Err(format!("unknown method '{}'", other)),
            };
            writeln!(out, "eof_ebits: {}", sig12(value)).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::Additivity {
            space,
            state,
            sigma,
            restarts,
            seed,
        } => {
            let loaded = load_space(&space)?;
            let opts = CertifyOptions {
                seed,
                ..CertifyOptions::default()
            };
            let verdict = certify_with_claim(&loaded.space, loaded.claim.as_ref(), &opts)
                .map_err(|e| e.to_string())?;
            let rho = as_bipartite_density(
                parse_state(&read(&state)?).map_err(|e| e.to_string())?,
                (loaded.space.d_a(), loaded.space.d_b()),
            )
            .map_err(|e| e.to_string())?;
            let sigma_state = parse_state(&read(&sigma)?).map_err(|e| e.to_string())?;
            let sigma_rho = match sigma_state {
                crate::docs::LoadedState::Pure(p) => {
                    if p.dims.len() != 2 {
                        return Err("sigma must declare a bipartite cut".into());
                    }
                    p.density()
                }
                crate::docs::LoadedState::Density(d) => {
                    if d.dims.len() != 2 {
                        return Err("sigma must declare a bipartite cut".into());
                    }
                    d
                }
            };
            let roof = RoofOptions {
                restarts,
                seed,
                ..RoofOptions::default()
            };
            let report = additivity_check(&rho, &loaded.space, &verdict, &sigma_rho, &roof)
                .map_err(|e| e.to_string())?;
            writeln!(out, "eof_product: {}", sig12(report.lhs)).map_err(|e| e.to_string())?;
            writeln!(out, "eof_rho: {}", sig12(report.eof_rho)).map_err(|e| e.to_string())?;
            writeln!(out, "eof_sigma: {}", sig12(report.eof_sigma)).map_err(|e| e.to_string())?;
            writeln!(out, "gap: {}", sig12(report.gap)).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::Tc {
            alpha,
            beta,
            coupling,
            t0,
            t1,
            steps,
            restarts,
            seed,
            output,
        } => {
            let base =
                TcParams::new(alpha, beta, coupling, t0.max(0.0)).map_err(|e| e.to_string())?;
            let grid = linspace(t0, t1, steps);
            let points = tc_curve(&base, &grid, restarts, seed).map_err(|e| e.to_string())?;
            let rows: Vec<CurveRow> = points.iter().map(CurveRow::from).collect();
            let mut buf = Vec::new();
            emit_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
            std::fs::write(&output, &buf)
                .map_err(|e| format!("writing {}: {}", output.display(), e))?;
            let flagged = points.iter().filter(|p| p.eb).count();
            writeln!(
                out,
                "wrote {} rows to {} ({} EB-flagged times)",
                rows.len(),
                output.display(),
                flagged
            )
            .map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::ScanNonadditive {
            grid,
            sigma,
            restarts,
            seed,
        } => {
            let sigma_rho = match sigma {
                Some(path) => as_bipartite_density(
                    parse_state(&read(&path)?).map_err(|e| e.to_string())?,
                    (2, 2),
                )
                .map_err(|e| e.to_string())?,
                None => bell_density(),
            };
            let roof = RoofOptions {
                restarts,
                seed,
                ..RoofOptions::default()
            };
            let report = scan_nonadditivity(
                ScanGrid {
                    angles: grid,
                    p_steps: grid,
                    q_steps: grid,
                },
                &sigma_rho,
                &roof,
            )
            .map_err(|e| e.to_string())?;
            writeln!(out, "points: {}", report.points.len()).map_err(|e| e.to_string())?;
            writeln!(out, "min_gap: {}", sig12(report.min_gap)).map_err(|e| e.to_string())?;
            if let Some(p) = &report.argmin {
                writeln!(
                    out,
                    "argmin: angle={} p={} q={}",
                    sig12(p.angle),
                    sig12(p.p),
                    sig12(p.q)
                )
                .map_err(|e| e.to_string())?;
            }
            if report.flagged.is_empty() {
                writeln!(out, "flagged: none (gaps within optimizer slack)")
                    .map_err(|e| e.to_string())?;
            } else {
                // An upper-bounding optimizer cannot certify superadditivity;
                // negative gaps are flagged for manual study only.
                writeln!(
                    out,
                    "flagged: {} points for manual study",
                    report.flagged.len()
                )
                .map_err(|e| e.to_string())?;
            }
            Ok(0)
        }
    }
}

fn bell_density() -> ebspace::states::DensityOperator {
    let mut v = ebspace::tensor::CVec::zeros(4);
    v[0] = cr(1.0 / 2f64.sqrt());
    v[3] = cr(1.0 / 2f64.sqrt());
    ebspace::states::PureState::new(v, ebspace::tensor::SystemDims::bipartite(2, 2))
        .expect("Bell state")
        .density()
}

fn construct_space(
    family: &str,
    params: &[f64],
    adim: usize,
    blocks: usize,
    inputs: &[PathBuf],
    seed: u64,
) -> Result<(BipartiteSubspace, Option<ConstructionClaim>), String> {
    match family {
        "fixture-u" => {
            let s2 = 2f64.sqrt();
            let claim = ConstructionClaim::Family3N(DirectSumFamilyParams::plain(
                3,
                2,
                [cr(s2), cr(s2), cr(s2)],
            ));
            Ok((fixtures().space_u, Some(claim)))
        }
        "fixture-u01" => Ok((fixtures().space_u01, None)),
        "fixture-v" => {
            let claim = ConstructionClaim::Family3(Family3Params::new(0.0, 0.0, 0.0, 2.0));
            Ok((fixtures().space_v, Some(claim)))
        }
        "family3" => {
            if params.len() != 4 {
                return Err("family3 needs --params d,f,theta,g".into());
            }
            let p = Family3Params::new(params[0], params[1], params[2], params[3]);
            let built = family3_space(&p, adim.max(2)).map_err(|e| e.to_string())?;
            let claim = built.eb.then_some(ConstructionClaim::Family3(p));
            Ok((built.space, claim))
        }
        "direct-sum-3n" => {
            if params.len() != 3 {
                return Err("direct-sum-3n needs --params x0,x1,x2".into());
            }
            let p = DirectSumFamilyParams::plain(
                adim.max(3),
                blocks.max(2),
                [cr(params[0]), cr(params[1]), cr(params[2])],
            );
            let space = family_3dim_3n(&p).map_err(|e| e.to_string())?;
            Ok((space, Some(ConstructionClaim::Family3N(p))))
        }
        "family-2x4" => {
            if params.len() != 8 {
                return Err("family-2x4 needs --params a0,a1,b0,b1,c0,c1,d0,d1".into());
            }
            let p = Family2xnParams {
                a: (cr(params[0]), cr(params[1])),
                b: (cr(params[2]), cr(params[3])),
                c: (cr(params[4]), cr(params[5])),
                d: (cr(params[6]), cr(params[7])),
            };
            Ok((family_2xn_space(&p).map_err(|e| e.to_string())?, None))
        }
        "saturating" => {
            let n = blocks.max(1);
            let mut rng = stream_rng(seed, 0);
            let a_vecs: Vec<_> = (0..n)
                .map(|_| random_complex_vector(adim.max(1), &mut rng).normalize())
                .collect();
            let space = saturating_space(n, &a_vecs).map_err(|e| e.to_string())?;
            let claim = ConstructionClaim::Saturating(a_vecs);
            Ok((space, Some(claim)))
        }
        "tensor" => {
            if inputs.len() != 2 {
                return Err("tensor needs --inputs first.json,second.json".into());
            }
            let a = load_space(&inputs[0])?;
            let b = load_space(&inputs[1])?;
            Ok((
                tensor_product_space(&a.space, &b.space).map_err(|e| e.to_string())?,
                None,
            ))
        }
        "bsum" => {
            if inputs.len() < 2 {
                return Err("bsum needs at least two --inputs".into());
            }
            let mut spaces = Vec::new();
            for p in inputs {
                spaces.push(load_space(p)?.space);
            }
            Ok((b_direct_sum(&spaces).map_err(|e| e.to_string())?, None))
        }
        other => Err(format!("unknown family '{}'", other)),
    }
}

fn write_verdict_report(
    out: &mut dyn Write,
    loaded: &LoadedSpace,
    verdict: &ebspace::certify::EbVerdict,
) -> std::io::Result<()> {
    let status = match verdict.status {
        EbStatus::Eb => "EB",
        EbStatus::NotEb => "NotEB",
        EbStatus::Undecided => "Undecided",
    };
    writeln!(out, "status: {}", status)?;
    if loaded.orthonormalized_on_load {
        writeln!(out, "input: spanning set orthonormalized on load")?;
    }
    match &verdict.certificate {
        Some(EbCertificate::DimOne) => writeln!(out, "family: dim-1")?,
        Some(EbCertificate::SaturatingForm { a_parts, .. }) => writeln!(
            out,
            "family: saturating ({} product generators)",
            a_parts.len()
        )?,
        Some(EbCertificate::Family1 { .. }) => writeln!(out, "family: family-1")?,
        Some(EbCertificate::Family2 { eigenvalues }) => writeln!(
            out,
            "family: family-2 ({} distinct generalized eigenvalues)",
            eigenvalues.len()
        )?,
        Some(EbCertificate::Family3 { params }) => {
            writeln!(out, "family: family-3")?;
            writeln!(
                out,
                "params: d={} f={} theta={} g={} lhs={}",
                sig12(params.d),
                sig12(params.f),
                sig12(params.theta),
                sig12(params.g),
                sig12(params.lhs)
            )?;
        }
        Some(EbCertificate::TwoByFour { det, .. }) => {
            writeln!(out, "family: 2x4")?;
            writeln!(out, "params: det_pt={}", sig12(*det))?;
        }
        Some(EbCertificate::ConstructionFamily3N) => {
            writeln!(out, "family: direct-sum-3n (construction replay)")?
        }
        Some(EbCertificate::ChoiSeparable) => writeln!(out, "family: unclassified (exact rule)")?,
        None => {}
    }
    writeln!(out, "evidence: choi_min_pt={}", sig12(verdict.choi_min_pt))?;
    if let Some(cex) = &verdict.counterexample {
        writeln!(
            out,
            "counterexample: probe with min_pt={} ({:?})",
            sig12(cex.reduction.min_pt_eigenvalue),
            cex.reduction.rule
        )?;
    }
    if let Some(f) = &verdict.falsifier {
        writeln!(
            out,
            "falsifier: min_found={} restarts={}",
            sig12(f.min_found),
            f.restarts_used
        )?;
    }
    if verdict.boundary {
        writeln!(out, "boundary: decision within the numerical band")?;
    }
    for n in &verdict.notes {
        writeln!(out, "note: {}", n)?;
    }
    Ok(())
}

// Complex64 appears in the public surface through documents only; keep the
// import used even when the CLI builds without it.
#[allow(dead_code)]
fn _keep(_: Complex64) {}
