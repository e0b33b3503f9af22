use std::fmt::Write as _;

use paulipriv_core::algebra::{conditional_expectation, Channel, CHOI_TOL};
use paulipriv_core::constructions::{
    channel_from_subgroup, phase_flip_reproduction, private_algebra_for_abelian, private_algebra_for_max_abelian,
    run_qutrit_demo, IDENTITY_TOL,
};
use paulipriv_core::dense::{identity, max_abs_diff, DenseOperator, OperatorJson};
use paulipriv_core::group::{annihilator, character_matrix, extend_to_maximal, PauliSubgroup};
use paulipriv_core::privacy::{
    check_private_subsystem_with, check_privatized_algebra_with, quasiorth_condition_suite_with,
    PrivacyCertificate, PRIVACY_TOL, QUASIORTH_TOL,
};
use paulipriv_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::input;
use crate::output::{emit, CliError, CliResult, Outcome};
use crate::{ChannelOp, Common, DemoOp, GroupOp, PrivacyOp};

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn subgroup_json(k: &PauliSubgroup) -> serde_json::Value {
    json!({
        "d": k.d(),
        "n": k.n(),
        "size": k.len(),
        "abelian": k.is_abelian(),
        "generators": k.minimal_generators().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "elements": k.elements().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    })
}

fn subgroup_text(what: &str, k: &PauliSubgroup) -> String {
    let gens: Vec<String> = k.minimal_generators().iter().map(|c| c.to_string()).collect();
    format!(
        "{what}: {} elements on {} qudit(s), d={}, abelian: {}\ngenerators: <{}>\n{}",
        k.len(),
        k.n(),
        k.d(),
        k.is_abelian(),
        gens.join(","),
        k.to_file_string()
    )
}

pub fn group(op: GroupOp, common: &Common) -> CliResult<u8> {
    let outcome = match op {
        GroupOp::Close(g) => {
            let k = input::subgroup(&g)?;
            Outcome::new("group close", subgroup_json(&k), subgroup_text("subgroup", &k)).artifact(k.to_file_string())
        }
        GroupOp::Abelian(g) => {
            let k = input::subgroup(&g)?;
            let ab = k.is_abelian();
            let mut result = subgroup_json(&k);
            result["verdict"] = json!(ab);
            Outcome::new("group abelian", result, format!("abelian: {ab}\n")).verdict(ab)
        }
        GroupOp::Annihilator(g) => {
            let k = input::subgroup(&g)?;
            let a = annihilator(&k)?;
            Outcome::new("group annihilator", subgroup_json(&a), subgroup_text("annihilator", &a))
                .artifact(a.to_file_string())
        }
        GroupOp::Extend(g) => {
            let k = input::subgroup(&g)?;
            if !k.is_abelian() {
                return Err(Error::NotAbelian("only Abelian subgroups extend to maximal Abelian ones".into()).into());
            }
            let m = extend_to_maximal(&k)?;
            Outcome::new("group extend", subgroup_json(&m), subgroup_text("maximal Abelian subgroup", &m))
                .artifact(m.to_file_string())
        }
        GroupOp::Charmatrix { d, n } => {
            let m = character_matrix(d, n)?;
            let csv = m.to_csv();
            let result = json!({
                "d": d,
                "n": n,
                "classes": m.classes().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "omega_exponents": m.exponents(),
            });
            Outcome::new("group charmatrix", result, csv.clone()).artifact(csv)
        }
    };
    emit(outcome, common)
}

pub fn channel(op: ChannelOp, common: &Common) -> CliResult<u8> {
    let outcome = match op {
        ChannelOp::FromGroup(g) => {
            let k = input::subgroup(&g)?;
            let phi = channel_from_subgroup(&k)?;
            let text = format!(
                "uniform Pauli channel over <{}>: {} Kraus operators on N={}\n",
                k.minimal_generators().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
                phi.kraus().len(),
                phi.n()
            );
            Outcome::new("channel from-group", phi.to_json(), text).artifact(pretty(&phi.to_json()))
        }
        ChannelOp::Condexp { algebra, d, n } => {
            let a = input::algebra(&algebra, d, n, None)?;
            let phi = conditional_expectation(&a)?;
            let text = format!(
                "conditional expectation onto {algebra} (dimension {}, N={}): {} Kraus operators\n",
                a.dim(),
                a.n(),
                phi.kraus().len()
            );
            Outcome::new("channel condexp", phi.to_json(), text).artifact(pretty(&phi.to_json()))
        }
        ChannelOp::Apply { input: path, state } => {
            let phi = input::channel_file(&path)?;
            let rho = input::operator(&state)?;
            let out = phi.apply(&rho)?;
            let j = OperatorJson::from(&out);
            let text = format!("output operator (N={}):\n{}", out.nrows(), format_operator(&out));
            Outcome::new("channel apply", &j, text).artifact(pretty(&j))
        }
        ChannelOp::ChoiEqual { input: path, other } => {
            let (a, b) = (input::channel_file(&path)?, input::channel_file(&other)?);
            if a.n() != b.n() {
                return Err(Error::Mismatch(format!("channels act on N={} and N={}", a.n(), b.n())).into());
            }
            let tol = common.tol.unwrap_or(CHOI_TOL);
            let dev = max_abs_diff(&a.choi(), &b.choi());
            let equal = dev <= tol;
            Outcome::new(
                "channel choi-equal",
                json!({ "equal": equal, "max_deviation": dev }),
                format!("Choi matrices equal: {equal} (max entry difference {dev:e})\n"),
            )
            .tolerance(tol)
            .verdict(equal)
        }
    };
    emit(outcome, common)
}

fn format_operator(m: &DenseOperator) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| {
                let z = m[(r, c)];
                format!("{:+.6}{:+.6}i", z.re, z.im)
            })
            .collect();
        let _ = writeln!(s, "  {}", row.join("  "));
    }
    s
}

/// `I/N` when `ρ₀` is maximally mixed, otherwise its entries.
fn describe_rho0(rho0: &DenseOperator, tol: f64) -> String {
    let n = rho0.nrows();
    if max_abs_diff(rho0, &identity(n).unscale(n as f64)) <= tol {
        format!("ρ₀ = I/{n}\n")
    } else {
        format!("ρ₀ =\n{}", format_operator(rho0))
    }
}

fn certificate_outcome(command: &'static str, cert: PrivacyCertificate, extra: &str) -> CliResult<Outcome> {
    let rho0 = cert.rho0()?;
    let mut text = format!(
        "verdict: {} (max deviation {:e}, tolerance {:e})\n{extra}",
        cert.verdict, cert.max_deviation, cert.tolerance
    );
    text.push_str(&describe_rho0(&rho0, cert.tolerance));
    for inp in &cert.inputs {
        let _ = writeln!(text, "{}: {} [sha256 {}]", inp.role, inp.description, inp.sha256);
    }
    let tol = cert.tolerance;
    let ok = cert.verdict;
    Ok(Outcome::new(command, &cert, text).artifact(pretty(&cert)).tolerance(tol).verdict(ok))
}

/// A channel from `--group` or `--channel` (a file, or `identity` of size `size`).
fn channel_arg(group: Option<&str>, channel: Option<&str>, size: Option<usize>) -> CliResult<Channel> {
    match (group, channel) {
        (Some(g), None) => Ok(channel_from_subgroup(&input::generators(g, 2, None)?)?),
        (None, Some("identity")) => {
            let n = size.ok_or_else(|| CliError::Usage("identity channel needs a size from --n or --b".into()))?;
            Ok(Channel::identity(n))
        }
        (None, Some(path)) => input::channel_file(std::path::Path::new(path.strip_prefix('@').unwrap_or(path))),
        _ => Err(CliError::Usage("give exactly one of --group and --channel".into())),
    }
}

pub fn privacy(op: PrivacyOp, common: &Common) -> CliResult<u8> {
    let outcome = match op {
        PrivacyOp::Quasiorth { a, b, d, n } => {
            let sa = input::algebra_size(&a, d, n)?;
            let sb = input::algebra_size(&b, d, n)?;
            let alg_a = input::algebra(&a, d, n, sb)?;
            let alg_b = input::algebra(&b, d, n, sa)?;
            let tol = common.tol.unwrap_or(QUASIORTH_TOL);
            let suite = quasiorth_condition_suite_with(&alg_a, &alg_b, tol)?;
            let verdict = suite.all_pass();
            let mut text = format!("quasiorthogonal: {verdict}\n");
            for (i, (dev, ok)) in suite.deviations.iter().zip(suite.passed).enumerate() {
                let _ = writeln!(text, "  condition {}: {} (deviation {dev:e})", i + 1, if ok { "holds" } else { "fails" });
            }
            if !suite.consistent {
                text.push_str("  warning: the equivalent conditions disagree at this tolerance\n");
            }
            Outcome::new("privacy quasiorth", json!({ "quasiorthogonal": verdict, "conditions": suite }), text)
                .tolerance(tol)
                .verdict(verdict)
        }
        PrivacyOp::Certify { group, channel, construct, b, n } => {
            let tol = common.tol.unwrap_or(PRIVACY_TOL);
            if construct {
                let g = input::generators(group.as_deref().unwrap_or_default(), 2, n)?;
                let full = 1usize << g.n();
                let p = if g.is_abelian() && g.len() == full {
                    private_algebra_for_max_abelian(&g)?
                } else {
                    private_algebra_for_abelian(&g)?
                };
                let phi = channel_from_subgroup(&g)?;
                let mut cert = p.certificate.clone();
                if common.tol.is_some() {
                    let redo = check_privatized_algebra_with(&phi, &p.algebra, tol)?;
                    cert.tolerance = redo.tolerance;
                    cert.verdict = redo.verdict;
                }
                let cert = cert.with_seed(common.seed);
                let extra = format!("private algebra: {} qubit(s), structure {}\n", p.qubits, p.structure);
                certificate_outcome("privacy certify", cert, &extra)?
            } else {
                let name = b.ok_or_else(|| CliError::Usage("give --b, or --group with --construct".into()))?;
                let size = input::algebra_size(&name, 2, n)?;
                let phi = channel_arg(group.as_deref(), channel.as_deref(), size.or(n.map(|n| 1 << n)))?;
                let alg = input::algebra(&name, 2, n, Some(phi.n()))?;
                let cert = check_privatized_algebra_with(&phi, &alg, tol)?.with_seed(common.seed);
                certificate_outcome("privacy certify", cert, "")?
            }
        }
        PrivacyOp::Subsystem { group, channel, v, dim_a, dim_b, sigma } => {
            let tol = common.tol.unwrap_or(PRIVACY_TOL);
            let u = input::operator(&v)?;
            let m = dim_a * dim_b;
            if m == 0 || m > u.ncols() {
                return Err(Error::Mismatch(format!("dA·dB = {m} does not fit in N={}", u.ncols())).into());
            }
            let phi = channel_arg(group.as_deref(), channel.as_deref(), Some(u.nrows()))?;
            let iso = u.columns(0, m).into_owned();
            let sigma = match sigma {
                Some(p) => input::operator(&p)?,
                None => identity(dim_a).unscale(dim_a as f64),
            };
            let cert = check_private_subsystem_with(&phi, &iso, dim_a, dim_b, &sigma, tol)?.with_seed(common.seed);
            certificate_outcome("privacy subsystem", cert, &format!("subsystem: C^{dim_a} ⊗ C^{dim_b}\n"))?
        }
    };
    emit(outcome, common)
}

pub fn demo(op: DemoOp, common: &Common) -> CliResult<u8> {
    let outcome = match op {
        DemoOp::Phaseflip { samples } => {
            let tol = common.tol.unwrap_or(PRIVACY_TOL);
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let report = phase_flip_reproduction(samples, &mut rng)?;
            let mut text = String::from(
                "channel: uniform Pauli channel over <ZI,IZ> (phase flips on either qubit)\n\
                 states: ρ = ¼(II + c₁·IX + c₂·YY + c₃·YZ) with |c| ≤ 1\n",
            );
            for (i, s) in report.samples.iter().enumerate() {
                let c = s.coefficients;
                let _ = writeln!(
                    text,
                    "  ρ[{i:>3}] c = ({:+.4}, {:+.4}, {:+.4})  ‖Φ(ρ) − I/4‖ = {:.2e}",
                    c[0], c[1], c[2], s.deviation
                );
            }
            let ok = report.max_deviation <= tol;
            if ok {
                let _ = writeln!(text, "Φ(ρ) = I/4 for all tested ρ; max deviation < {tol:e}");
            } else {
                let _ = writeln!(text, "Φ(ρ) ≠ I/4: max deviation {:e} exceeds {tol:e}", report.max_deviation);
            }
            Outcome::new("demo phaseflip", &report, text).tolerance(tol).verdict(ok)
        }
        DemoOp::Qutrit { perturb } => {
            let r = run_qutrit_demo(perturb)?;
            let mut text = String::from("two-qutrit channel over <X²Z⊗I, I⊗XZ>, private qutrit from <X²⊗X, XZ²⊗Z>\n");
            for c in &r.checks {
                let dev = c.deviation.map(|d| format!(" (deviation {d:.1e})")).unwrap_or_default();
                let _ = writeln!(text, "  ({}) {}: {}{dev}", c.id, c.name, if c.passed { "ok" } else { "FAILED" });
                if !c.detail.is_empty() {
                    let _ = writeln!(text, "      {}", c.detail);
                }
            }
            let _ = writeln!(text, "structure {}, U scale {}", r.structure, r.normalization);
            if let Some(fix) = &r.table_correction {
                let _ = writeln!(text, "note: {fix}");
            }
            match r.first_failure() {
                None => text.push_str("all five checks pass\n"),
                Some(c) => {
                    let _ = writeln!(text, "failing identity: {}", c.name);
                }
            }
            let ok = r.passed();
            Outcome::new("demo qutrit", &r, text).tolerance(IDENTITY_TOL).verdict(ok)
        }
    };
    emit(outcome, common)
}
