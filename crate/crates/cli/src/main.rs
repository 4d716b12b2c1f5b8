//! Command-line front end: exact class-group, coset-enumeration, Fourier
//! and certification pipelines with reproducible JSON artifacts.
//!
//! Exit status: 0 on success, 1 on domain errors, 2 on scope errors
//! (requests outside the inert part). Errors are reported as JSON on
//! stderr. Artifacts are written atomically (temp file, then rename) and
//! record the seed when one is set.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;

use hermitian_hecke::json::{
    CertificateJson, ClassGroupJson, CosetSetJson, CuspReportJson, EigenReportJson, ErrorJson,
    ExpansionJson, HeckeElementJson,
};
use hermitian_hecke::{
    certify_eisenstein, class_representatives, cusp_tests, eigen_report, eisenstein_q_expansion,
    enumerate_right_cosets, find_inert_prime, hecke_act_cosets, hecke_product_detailed, phi_map,
    siegel_phi, DoubleCosetKey, Error, HeckeElement, QuadField, Result, DEFAULT_ENUM_CAP,
};

#[derive(Parser)]
#[command(name = "hmf", version, about = "Hecke theory for Hermitian modular forms, exactly")]
struct Cli {
    /// Print the full JSON artifact on stdout instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Seed recorded in artifacts and used by randomized drivers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on enumeration candidates.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Config file with key=value defaults for seed and cap.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON artifact to this path (atomic).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Field data: discriminant, integral basis shape, class number.
    Field {
        #[arg(long)]
        m: u64,
    },
    /// Class group: reduced forms, representatives u_j, clearing factor N.
    Classgroup {
        #[arg(long)]
        m: u64,
        #[arg(long = "avoid-p")]
        avoid_p: Option<u64>,
    },
    /// Smallest inert prime = 1 mod the modulus.
    FindPrime {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        modulus: u64,
        #[arg(long, default_value_t = 100_000)]
        bound: u64,
    },
    /// Double-coset operations in the inert part.
    Hecke {
        #[command(subcommand)]
        sub: HeckeCmd,
    },
    /// Fourier-expansion operations.
    Forms {
        #[command(subcommand)]
        sub: FormsCmd,
    },
    /// Exact eigen-relation check of a form against a coset set.
    Eigen {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        coset: PathBuf,
        #[arg(long)]
        k: i64,
    },
    /// Eisenstein certification pipeline.
    Certify {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        terms: Option<u64>,
    },
}

#[derive(Subcommand)]
enum HeckeCmd {
    /// Enumerate the right cosets of one double coset.
    Cosets(HeckeCosetsArgs),
    /// Product of two elements given as coset-set or element files.
    Product {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
    },
    /// Degree-lowering homomorphism at weight k.
    Phi {
        #[arg(long)]
        k: i64,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct HeckeCosetsArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    n: usize,
    /// Comma-separated divisors a_1,..,a_n,d_1,..,d_n.
    #[arg(long)]
    key: String,
}

#[derive(Subcommand)]
enum FormsCmd {
    /// Degree-1 Eisenstein q-expansion with exact Bernoulli normalization.
    Eisenstein {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        terms: u64,
    },
    /// Apply a coset-set file to a form file at weight k.
    Act {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        coset: PathBuf,
        #[arg(long)]
        k: i64,
    },
    /// Siegel degree-lowering operator.
    Phi {
        #[arg(long)]
        form: PathBuf,
    },
    /// Cusp diagnostics: direct support test and class-twisted test.
    CuspTest {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        form: PathBuf,
    },
}

#[derive(Default)]
struct RunConfig {
    seed: Option<u64>,
    cap: usize,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = RunConfig {
        seed: None,
        cap: DEFAULT_ENUM_CAP,
    };
    let Some(path) = path else { return Ok(cfg) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Domain(format!("bad config line: {line}")));
        };
        match key.trim() {
            "seed" => {
                cfg.seed = Some(value.trim().parse().map_err(|_| {
                    Error::Domain(format!("bad seed value: {}", value.trim()))
                })?)
            }
            "cap" => {
                cfg.cap = value.trim().parse().map_err(|_| {
                    Error::Domain(format!("bad cap value: {}", value.trim()))
                })?
            }
            other => return Err(Error::Domain(format!("unknown config key: {other}"))),
        }
    }
    Ok(cfg)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::Domain(format!("cannot move artifact into place: {e}")))?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Domain(format!("malformed JSON in {}: {e}", path.display())))
}

struct Output {
    json: bool,
    out: Option<PathBuf>,
}

impl Output {
    fn emit(&self, artifact: &impl serde::Serialize, summary: String) -> Result<()> {
        let text = serde_json::to_string(artifact)
            .map_err(|e| Error::Domain(format!("encoding failure: {e}")))?;
        if let Some(path) = &self.out {
            write_atomic(path, &text)?;
        }
        if self.json {
            println!("{text}");
        } else {
            println!("{summary}");
        }
        Ok(())
    }
}

fn parse_key(n: usize, text: &str) -> Result<DoubleCosetKey> {
    let parts: std::result::Result<Vec<i64>, _> =
        text.split(',').map(|s| s.trim().parse::<i64>()).collect();
    let parts = parts.map_err(|_| Error::Domain(format!("bad key list: {text}")))?;
    if parts.len() != 2 * n {
        return Err(Error::Domain(format!(
            "key must list {} divisors, got {}",
            2 * n,
            parts.len()
        )));
    }
    DoubleCosetKey::from_ints(n, &parts)
}

/// Load either a coset-set artifact or an element artifact as an element.
fn load_element(path: &Path) -> Result<HeckeElement> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(parsed) = serde_json::from_str::<HeckeElementJson>(&text) {
        if let Ok(e) = parsed.decode() {
            return Ok(e);
        }
    }
    let parsed: CosetSetJson = serde_json::from_str(&text)
        .map_err(|e| Error::Domain(format!("malformed JSON in {}: {e}", path.display())))?;
    let set = parsed.decode()?;
    HeckeElement::from_key(set.field, set.key)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let seed = cli.seed.or(cfg.seed);
    let cap = cli.cap.unwrap_or(cfg.cap);
    let output = Output {
        json: cli.json,
        out: cli.out.clone(),
    };
    match &cli.cmd {
        Cmd::Field { m } => {
            let field = QuadField::new(*m)?;
            let artifact = serde_json::json!({
                "m": field.m(),
                "d": field.disc(),
                "omega": match field.omega_kind() {
                    hermitian_hecke::OmegaKind::HalfIntegral => "(1+sqrt(-m))/2",
                    hermitian_hecke::OmegaKind::PureRoot => "sqrt(-m)",
                },
                "h": field.class_number(),
                "seed": seed,
            });
            output.emit(
                &artifact,
                format!(
                    "Q(sqrt(-{})): d_K = {}, omega = {}, h = {}",
                    field.m(),
                    field.disc(),
                    artifact["omega"].as_str().unwrap(),
                    field.class_number()
                ),
            )
        }
        Cmd::Classgroup { m, avoid_p } => {
            let field = QuadField::new(*m)?;
            let set = class_representatives(field, *avoid_p)?;
            let artifact = ClassGroupJson::encode(&set, seed)?;
            let mut lines = vec![format!(
                "h = {}, N = {}",
                artifact.h, artifact.n_clearing
            )];
            for (rep, form) in set.reps.iter().zip(&artifact.forms) {
                lines.push(format!(
                    "  form ({}, {}, {})  u = {}",
                    form[0], form[1], form[2], rep.u
                ));
            }
            output.emit(&artifact, lines.join("\n"))
        }
        Cmd::FindPrime { m, modulus, bound } => {
            let field = QuadField::new(*m)?;
            let p = find_inert_prime(field, *modulus, *bound)?;
            let artifact = serde_json::json!({
                "m": m, "modulus": modulus, "p": p, "seed": seed,
            });
            output.emit(&artifact, format!("p = {p}"))
        }
        Cmd::Hecke { sub } => match sub {
            HeckeCmd::Cosets(args) => {
                let field = QuadField::new(args.m)?;
                let key = parse_key(args.n, &args.key)?;
                let set = enumerate_right_cosets(field, &key, cap)?;
                let artifact = CosetSetJson::encode(&set, seed)?;
                output.emit(
                    &artifact,
                    format!("key {} has {} right cosets", set.key, set.len()),
                )
            }
            HeckeCmd::Product { lhs, rhs } => {
                let e1 = load_element(lhs)?;
                let e2 = load_element(rhs)?;
                let (prod, counts) = hecke_product_detailed(&e1, &e2, cap)?;
                let artifact = HeckeElementJson::encode(&prod, seed)?;
                let mut lines = Vec::new();
                for (key, coeff) in prod.terms() {
                    lines.push(format!(
                        "  {} x{} ({} cosets)",
                        key,
                        coeff,
                        counts.get(key).copied().unwrap_or(0)
                    ));
                }
                output.emit(&artifact, format!("product:\n{}", lines.join("\n")))
            }
            HeckeCmd::Phi { k, input } => {
                let e = load_element(input)?;
                let lowered = phi_map(&e, *k, cap)?;
                let artifact = HeckeElementJson::encode(&lowered, seed)?;
                let lines: Vec<String> = lowered
                    .terms()
                    .iter()
                    .map(|(key, c)| format!("  {key} x{c}"))
                    .collect();
                output.emit(&artifact, format!("lowered element:\n{}", lines.join("\n")))
            }
        },
        Cmd::Forms { sub } => match sub {
            FormsCmd::Eisenstein { m, k, terms } => {
                let field = QuadField::new(*m)?;
                let f = eisenstein_q_expansion(field, *k, *terms)?;
                let artifact = ExpansionJson::encode(&f, seed)?;
                output.emit(
                    &artifact,
                    format!(
                        "E_{k} with {} coefficients up to trace {terms}",
                        f.support_len()
                    ),
                )
            }
            FormsCmd::Act { form, coset, k } => {
                let f: ExpansionJson = read_json(form)?;
                let f = f.decode()?;
                let set: CosetSetJson = read_json(coset)?;
                let set = set.decode()?;
                if set.field != f.field {
                    return Err(Error::MixedFields);
                }
                let one = BigRational::from(BigInt::from(1));
                let g = hecke_act_cosets(&f, &[(one, &set)], *k)?;
                let artifact = ExpansionJson::encode(&g, seed)?;
                output.emit(
                    &artifact,
                    format!(
                        "image has {} coefficients certified to trace {}",
                        g.support_len(),
                        g.trunc
                    ),
                )
            }
            FormsCmd::Phi { form } => {
                let f: ExpansionJson = read_json(form)?;
                let f = f.decode()?;
                let lowered = siegel_phi(&f)?;
                let artifact = ExpansionJson::encode(&lowered, seed)?;
                output.emit(
                    &artifact,
                    format!(
                        "degree {} expansion with {} coefficients",
                        lowered.n,
                        lowered.support_len()
                    ),
                )
            }
            FormsCmd::CuspTest { m, form } => {
                let field = QuadField::new(*m)?;
                let f: ExpansionJson = read_json(form)?;
                let f = f.decode()?;
                if f.field != field {
                    return Err(Error::MixedFields);
                }
                let reps = class_representatives(field, None)?;
                let report = cusp_tests(&f, &reps)?;
                let artifact = CuspReportJson::encode(&report, seed);
                output.emit(
                    &artifact,
                    format!(
                        "direct: {}, twisted: {}, agree: {}",
                        report.direct,
                        report.twisted,
                        report.agree()
                    ),
                )
            }
        },
        Cmd::Eigen { form, coset, k } => {
            let f: ExpansionJson = read_json(form)?;
            let f = f.decode()?;
            let set: CosetSetJson = read_json(coset)?;
            let set = set.decode()?;
            if set.field != f.field {
                return Err(Error::MixedFields);
            }
            let one = BigRational::from(BigInt::from(1));
            let g = hecke_act_cosets(&f, &[(one, &set)], *k)?;
            let report = eigen_report(&f, &g)?;
            let artifact = EigenReportJson::encode(&report, seed);
            output.emit(
                &artifact,
                match &report.lambda {
                    Some(l) => format!(
                        "eigenvalue {} on {} certified indices",
                        l, report.checked_indices
                    ),
                    None => "no single eigenvalue fits the certified range".into(),
                },
            )
        }
        Cmd::Certify { form, m, k, p, terms } => {
            let field = QuadField::new(*m)?;
            let f: ExpansionJson = read_json(form)?;
            let mut f = f.decode()?;
            if f.field != field {
                return Err(Error::MixedFields);
            }
            if f.weight != *k {
                return Err(Error::Domain(format!(
                    "form file declares weight {}, asked to certify weight {k}",
                    f.weight
                )));
            }
            if let Some(t) = terms {
                let bound = BigRational::from(BigInt::from(*t));
                if bound > f.trunc {
                    return Err(Error::Domain(format!(
                        "cannot extend certification to {t} terms; the file certifies {}",
                        f.trunc.to_integer()
                    )));
                }
                f = f.truncate(bound);
            }
            let reps = class_representatives(field, None)?;
            let cert = certify_eisenstein(&f, *p, &reps, cap);
            let artifact = CertificateJson::encode(&cert, seed);
            let mut lines = Vec::new();
            for h in &cert.hypotheses {
                lines.push(format!(
                    "  [{}] {}: {}",
                    if h.pass { "pass" } else { "FAIL" },
                    h.name,
                    h.witness
                ));
            }
            lines.push(format!("conclusion: {}", cert.conclusion));
            output.emit(&artifact, lines.join("\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = ErrorJson::from_error(&err);
            eprintln!("{}", serde_json::to_string(&report).unwrap());
            if err.is_scope() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
