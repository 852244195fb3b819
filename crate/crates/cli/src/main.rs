use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhe_lab::cv::{commutation_residual, transport_key_gaussian, DisplacementVec, GaussianCircuit, SymplecticOp};
use qhe_lab::pauli_key::PauliScheme;
use qhe_lab::perm_key::{security_bound, t_gate_probabilistic, PermClient, PermKey, PermScheme};
use qhe_lab::protocol::{
    audit_scheme, product_state, run_session, run_syndrome_session, SessionConfig, SessionScheme, MIN_AUDIT_SAMPLES,
};
use qhe_lab::qec::StabilizerCode;
use qhe_lab::qhe::{security_delta, security_delta_sampled, Scheme};
use qhe_lab::resources::{sweep_csv, tradeoff_sweep, ResourceParams};
use qhe_lab::sim::{DensityMatrix, StateVector};
use qhe_lab::{Circuit, Pauli, PauliString, QheError};

const TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "qhelab", version, about = "Quantum homomorphic encryption laboratory")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "QHELAB_SEED")]
    seed: Option<u64>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeName {
    Pauli,
    Perm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AuditScheme {
    Pauli,
    Perm,
    Leaky,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TMode {
    Probabilistic,
    Deterministic,
    Pauli,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encrypt, evaluate and decrypt one circuit; exit 0 iff the output matches.
    Roundtrip {
        scheme: SchemeName,
        #[arg(short, long)]
        circuit: PathBuf,
        /// Plaintext, one of `0 1 + - i` per qubit.
        #[arg(short, long)]
        input: String,
        #[arg(short, long, default_value_t = 1)]
        m: usize,
        /// Dump the transcript as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Maximal trace distance between averaged ciphertexts.
    Security {
        scheme: SchemeName,
        #[arg(short, long, default_value_t = 1)]
        n: usize,
        #[arg(short, long, default_value_t = 1)]
        m: usize,
        /// Comma-separated plaintexts; defaults to all-zero and all-one.
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<String>,
        /// Sample this many keys instead of sweeping the key space.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Encrypted syndrome extraction after an injected error.
    QecDemo {
        /// `repetition`, `phase-flip`, `steane`, `trivial` or a code file.
        code: String,
        /// Error to inject, e.g. `IXI`; random single-qubit error if omitted.
        #[arg(short, long)]
        error: Option<String>,
        #[arg(short, long, default_value = "+")]
        input: String,
    },
    /// T-gate protocols with transcript dump.
    TGate {
        mode: TMode,
        #[arg(short, long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(short, long, default_value = "+")]
        input: String,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Symplectic and displacement-transport identities on random networks.
    CvCheck {
        #[arg(long, default_value_t = 3)]
        modes: usize,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Resource tradeoff table.
    Resources {
        /// Reference rates: p0 = 1e-6, pΩ = 1e-3, aΩ = 10, target 1e-30.
        #[arg(long)]
        reference: bool,
        #[arg(long)]
        p0: Option<f64>,
        #[arg(long)]
        pthr: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        ptarget: Option<f64>,
        #[arg(long)]
        depth: Option<u64>,
        #[arg(short, long)]
        k: Option<u64>,
        #[arg(short, long)]
        r: Option<u64>,
        /// Fix the ancilla count instead of computing it.
        #[arg(long)]
        ancillas: Option<u64>,
        /// Comma-separated qubit budgets, e.g. `1e6,1e8`.
        #[arg(long, value_delimiter = ',', value_parser = parse_count)]
        ntot: Vec<u64>,
    },
    /// Leakage audit over seeded sessions.
    Audit {
        /// JSON session config; overrides the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(value_enum)]
        scheme: Option<AuditScheme>,
        #[arg(short, long)]
        circuit: Option<PathBuf>,
        #[arg(short, long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        plaintexts: Vec<String>,
        #[arg(long, default_value_t = MIN_AUDIT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
    },
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s}: {e}"))?;
    if !(v >= 1.0) || v > u64::MAX as f64 || v.fract() != 0.0 {
        return Err(format!("{s} is not a positive integer"));
    }
    Ok(v as u64)
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<QheError> for Failure {
    fn from(e: QheError) -> Self {
        match e {
            QheError::Parse { .. }
            | QheError::InvalidArgument(_)
            | QheError::LengthMismatch { .. }
            | QheError::QubitOutOfRange { .. }
            | QheError::OracleCapExceeded { .. }
            | QheError::Nonconvergent { .. }
            | QheError::NotAllowed(_)
            | QheError::InsufficientSamples { .. } => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

type Outcome = Result<(String, bool), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if rayon::ThreadPoolBuilder::new().num_threads(j).build_global().is_err() {
            eprintln!("error: could not size the worker pool");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok((report, ok)) => {
            let written = match &cli.output {
                Some(p) => fs::write(p, &report).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{report}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
    }
}

fn rng_for(cli: &Cli) -> Result<ChaCha8Rng, Failure> {
    cli.seed
        .map(ChaCha8Rng::seed_from_u64)
        .ok_or_else(|| Failure::Usage("this subcommand is randomized; pass --seed or set QHELAB_SEED".into()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    read(path)?.parse::<Circuit>().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_transcript(path: &Option<PathBuf>, jsonl: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        fs::write(p, jsonl).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn render(format: Format, json: serde_json::Value, text: String) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&json).expect("plain data")),
        _ => text,
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Roundtrip { scheme, circuit, input, m, transcript } => {
            let c = load_circuit(circuit)?;
            let plain = product_state(input)?;
            let kind = match scheme {
                SchemeName::Pauli => SessionScheme::Pauli,
                SchemeName::Perm => SessionScheme::Perm { m: *m },
            };
            let mut rng = rng_for(cli)?;
            let r = run_session(kind, &plain, &c, &mut rng)?;
            write_transcript(transcript, &r.transcript.to_jsonl())?;
            let d = r.error()?;
            let ok = d < TOLERANCE;
            let json = serde_json::json!({"trace_distance": d, "messages": r.transcript.len(), "ok": ok});
            Ok((render(cli.format, json, format!("trace distance {d:.3e}\nmessages {}\n", r.transcript.len())), ok))
        }
        Cmd::Security { scheme, n, m, inputs, samples } => {
            let (boxed, plain): (Box<dyn Scheme>, usize) = match scheme {
                SchemeName::Pauli => (Box::new(PauliScheme::new(*n)), *n),
                SchemeName::Perm => (Box::new(PermScheme::new(*m, 1)), 1),
            };
            DensityMatrix::check_cap(boxed.cipher_qubits())?;
            let specs: Vec<String> =
                if inputs.is_empty() { vec!["0".repeat(plain), "1".repeat(plain)] } else { inputs.clone() };
            let rhos = specs.iter().map(|s| product_state(s)?.to_density()).collect::<Result<Vec<_>, _>>()?;
            let report = match samples {
                Some(k) => security_delta_sampled(boxed.as_ref(), &rhos, *k, &mut rng_for(cli)?)?,
                None => security_delta(boxed.as_ref(), &rhos)?,
            };
            // bounds at r = 0 and r = 1 encrypted row
            let bounds = (*scheme == SchemeName::Perm).then(|| [security_bound(0, *m as u64), security_bound(1, *m as u64)]);
            let mut json = serde_json::to_value(&report).expect("plain data");
            json["scheme"] = boxed.name().into();
            json["bound_r0"] = bounds.map(|b| b[0]).into();
            json["bound_r1"] = bounds.map(|b| b[1]).into();
            let mut text = format!("{}\ndelta {:.6} ({} keys)\n", boxed.name(), report.delta, report.key_count);
            if let Some([b0, b1]) = bounds {
                text.push_str(&format!("bound r=0 {b0:.6}\nbound r=1 {b1:.6}\n"));
            }
            let ok = bounds.map_or(true, |b| report.delta <= b[1] + 1e-9);
            // the report file is always JSON
            if cli.output.is_some() {
                return Ok((format!("{}\n", serde_json::to_string_pretty(&json).expect("plain data")), ok));
            }
            Ok((render(cli.format, json, text), ok))
        }
        Cmd::QecDemo { code, error, input } => {
            let code = match StabilizerCode::by_name(code) {
                Ok(c) => c,
                Err(_) => StabilizerCode::from_text(&read(Path::new(code))?)?,
            };
            let mut rng = rng_for(cli)?;
            let err: PauliString = match error {
                Some(e) => e.parse()?,
                None => {
                    let letters: &[Pauli] = match code.error_model() {
                        qhe_lab::qec::ErrorModel::X => &[Pauli::X],
                        qhe_lab::qec::ErrorModel::Z => &[Pauli::Z],
                        qhe_lab::qec::ErrorModel::All => &[Pauli::X, Pauli::Y, Pauli::Z],
                    };
                    let q = rng.gen_range(0..code.n());
                    PauliString::single(code.n(), q, letters[rng.gen_range(0..letters.len())])
                }
            };
            let s = run_syndrome_session(&code, &product_state(input)?, Some(&err), &mut rng)?;
            let d = s.result.error()?;
            let bits: String = s.syndrome.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let ok = d < TOLERANCE;
            let json = serde_json::json!({
                "code": code.name(), "error": err.to_string(), "syndrome": bits,
                "correction": s.correction.to_string(), "trace_distance": d, "ok": ok,
            });
            let text = format!(
                "code {}\nerror {err}\nsyndrome {bits}\ncorrection {}\ntrace distance {d:.3e}\n",
                code.name(),
                s.correction
            );
            Ok((render(cli.format, json, text), ok))
        }
        Cmd::TGate { mode, m, runs, input, transcript } => {
            let mut rng = rng_for(cli)?;
            let plain = product_state(input)?;
            if plain.n_qubits() != 1 {
                return Err(Failure::Usage("t-gate takes a one-qubit plaintext".into()));
            }
            match mode {
                TMode::Probabilistic => {
                    let mut hits = 0usize;
                    let mut log = String::new();
                    for _ in 0..*runs {
                        let mut client = PermClient::new(PermKey::random(*m, &mut rng));
                        let mut reg = client.encrypt_data(plain.clone(), &mut rng)?;
                        let mut t = qhe_lab::protocol::Transcript::new();
                        if t_gate_probabilistic(&mut reg, &mut client, 0, &mut t, &mut rng)?.success {
                            hits += 1;
                        }
                        log.push_str(&t.to_jsonl());
                    }
                    write_transcript(transcript, &log)?;
                    let rate = hits as f64 / (*runs).max(1) as f64;
                    let json = serde_json::json!({"mode": "probabilistic", "runs": runs, "success_rate": rate});
                    Ok((render(cli.format, json, format!("runs {runs}\nsuccess rate {rate:.4}\n")), true))
                }
                TMode::Deterministic | TMode::Pauli => {
                    let kind = if *mode == TMode::Pauli { SessionScheme::Pauli } else { SessionScheme::Perm { m: *m } };
                    let c: Circuit = "QUBITS 1\nT 0\n".parse()?;
                    let mut worst: f64 = 0.0;
                    let mut log = String::new();
                    for _ in 0..*runs {
                        let r = run_session(kind, &plain, &c, &mut rng)?;
                        worst = worst.max(r.error()?);
                        log.push_str(&r.transcript.to_jsonl());
                    }
                    write_transcript(transcript, &log)?;
                    let ok = worst < TOLERANCE;
                    let json = serde_json::json!({"runs": runs, "max_trace_distance": worst, "ok": ok});
                    Ok((render(cli.format, json, format!("runs {runs}\nmax trace distance {worst:.3e}\n")), ok))
                }
            }
        }
        Cmd::CvCheck { modes, depth, trials } => {
            let mut rng = rng_for(cli)?;
            let (mut transport, mut residual, mut symplectic) = (0f64, 0f64, 0f64);
            for _ in 0..*trials {
                let g = GaussianCircuit::random(*modes, *depth, &mut rng);
                let s = g.to_symplectic()?;
                let alpha: Vec<Complex64> =
                    (0..*modes).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
                let key = DisplacementVec::from_complex(&alpha)?;
                let by_formula = transport_key_gaussian(&g, &key)?;
                transport = transport.max(by_formula.max_abs_diff(&s.transport(&key)?));
                residual = residual.max(commutation_residual(&s, &key, &by_formula)?);
                let omega = qhe_lab::cv::omega(*modes);
                symplectic = symplectic.max((s.matrix().transpose() * &omega * s.matrix() - omega).amax());
                SymplecticOp::new(s.matrix().clone(), s.shift().clone())?;
            }
            let ok = transport < 1e-9 && residual < 1e-9 && symplectic < 1e-9;
            let json = serde_json::json!({
                "trials": trials, "transport": transport, "commutation": residual, "symplectic": symplectic, "ok": ok,
            });
            let text = format!(
                "trials {trials}\nformula vs matrix transport {transport:.3e}\ncommutation residual {residual:.3e}\nsymplectic defect {symplectic:.3e}\n"
            );
            Ok((render(cli.format, json, text), ok))
        }
        Cmd::Resources { reference, p0, pthr, a, ptarget, depth, k, r, ancillas, ntot } => {
            let base = ResourceParams::reference();
            let params = ResourceParams {
                p0: p0.unwrap_or(base.p0),
                p_threshold: pthr.unwrap_or(base.p_threshold),
                a_coeff: a.unwrap_or(base.a_coeff),
                p_target: ptarget.unwrap_or(base.p_target),
                depth: depth.unwrap_or(base.depth),
                k: if r.is_some() && k.is_none() { None } else { k.or(base.k) },
                r: *r,
                ancilla_override: *ancillas,
                ..base
            };
            if *reference && (p0.is_some() || pthr.is_some() || a.is_some() || ptarget.is_some()) {
                return Err(Failure::Usage("--reference fixes the error rates".into()));
            }
            let grid = if ntot.is_empty() { vec![params.n_total] } else { ntot.clone() };
            let rows = tradeoff_sweep(&params, &grid)?;
            let out = match cli.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&rows).expect("plain data")),
                _ => sweep_csv(&rows),
            };
            Ok((out, true))
        }
        Cmd::Audit { config, scheme, circuit, m, plaintexts, samples, threshold } => {
            let (kind, c, pts, n_samples, seed) = match config {
                Some(p) => {
                    let (cfg, c) = SessionConfig::load(p)?;
                    let seed = cli.seed.unwrap_or(cfg.seed);
                    (cfg.scheme, c, cfg.plaintexts, cfg.samples, seed)
                }
                None => {
                    let scheme = scheme.ok_or_else(|| Failure::Usage("give a scheme or --config".into()))?;
                    let path = circuit.as_ref().ok_or_else(|| Failure::Usage("--circuit is required".into()))?;
                    let kind = match scheme {
                        AuditScheme::Pauli => SessionScheme::Pauli,
                        AuditScheme::Perm => SessionScheme::Perm { m: *m },
                        AuditScheme::Leaky => SessionScheme::Leaky,
                    };
                    let seed = rng_for(cli).map(|_| cli.seed.expect("checked"))?;
                    (kind, load_circuit(path)?, plaintexts.clone(), *samples, seed)
                }
            };
            let states = pts.iter().map(|s| product_state(s)).collect::<Result<Vec<StateVector>, _>>()?;
            let report = audit_scheme(kind, &c, &states, n_samples, seed)?;
            let ok = !report.flagged(*threshold);
            let json = serde_json::to_value(&report).expect("plain data");
            let mut text = format!("sessions per plaintext {}\n", report.sessions_per_group);
            for v in &report.views {
                text.push_str(&format!("{:<40} tv {:.4} floor {:.4} excess {:.4}\n", v.view, v.tv, v.null_tv, v.excess));
            }
            text.push_str(&format!("max excess {:.4} ({})\n", report.max_tv, if ok { "pass" } else { "LEAK" }));
            Ok((render(cli.format, json, text), ok))
        }
    }
}
