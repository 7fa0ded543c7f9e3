//! Argument parsing and subcommand dispatch.
//!
//! Every subcommand runs both parties in one process. Randomness comes from
//! a single ChaCha8 stream seeded by `--seed` (or `BQSM_SEED`), so equal
//! command lines write byte-identical artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde_json::{json, Value};

use bqsm_core::bp::{mbp_eval, Barrington, Circuit, Formula};
use bqsm_core::broadcast::{br_finalize, br_issue, br_redeem, br_setup};
use bqsm_core::conjugate::Basis;
use bqsm_core::encryption::{
    asy_dec, asy_enc, asy_gen, asy_keyreceive, asy_keysend, sym_dec, sym_enc_with, sym_gen, AsymParams, AsymPrivKey,
    SubKey,
};
use bqsm_core::entropy::{min_entropy, privacy_amp_bound, privacy_amp_distance, split_choice_binary, Dist};
use bqsm_core::harness::{toy_asym_params, AdversaryStrategy, CcaAdversary, Scheme, StrategyKind, TokenExpKind, TokenStrategy};
use bqsm_core::ot::{ot_receive_measure, ot_recover, OtParams, OtSession};
use bqsm_core::otp::{CompiledFunction, OtpConfig};
use bqsm_core::tokens::{
    mac_tag, mac_verify, sig_sign_with, sig_verify, sigtok_gen, sigtok_issue, sigtok_sign, sigtok_verify,
    sigtok_verify_issue, tok_dec_issue, tok_enc_issue, tok_enc_use, tok_gen, TokenKind,
};
use bqsm_core::transcript::{Detail, Transcript};
use bqsm_core::{Bits, Profile};

use crate::experiments;
use crate::formats::{
    bit_string, message_bits, parse_hex, read_json, to_bit_string, to_json, write_json, AuthFile, CiphertextFile,
    DistFile, KeyFile, ProgramFile, TokenFile,
};
use crate::mbp_file;
use crate::{CliError, EXIT_OK, EXIT_REJECT, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "bqsm", version, about = "Bounded-quantum-storage cryptography, simulated")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice; falls back to BQSM_SEED, then 0.
    #[arg(long, global = true, env = "BQSM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ProfileArg::Desk)]
    pub profile: ProfileArg,
    /// Adversary quantum memory bound, in qubits.
    #[arg(long = "s", global = true, default_value_t = 0)]
    pub s: usize,
    /// Write the JSON transcript or report here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Append experiment reports as CSV rows here.
    #[arg(long = "emit-csv", global = true)]
    pub emit_csv: Option<PathBuf>,
    /// Record full qubit states and payloads in transcripts.
    #[arg(long, global = true)]
    pub full: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileArg {
    Paper,
    Desk,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Paper => Profile::Paper,
            ProfileArg::Desk => Profile::Desk,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Sym,
    Asy,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile formulas to branching programs and, optionally, a one-time program.
    Compile {
        /// One formula per output, e.g. "x0 & (x1 | !x2)".
        #[arg(required = true)]
        formulas: Vec<String>,
        /// Input count (default: highest variable index + 1).
        #[arg(long)]
        inputs: Option<usize>,
        /// Where to write the binary program (default: next to --json).
        #[arg(long)]
        mbp: Option<PathBuf>,
        /// Also compile a one-time program and write it here.
        #[arg(long)]
        otp: Option<PathBuf>,
    },
    /// Evaluate a one-time program file once; the file is rewritten consumed.
    OtpEval {
        program: PathBuf,
        /// Input as a 0/1 string, bit 0 first.
        #[arg(long)]
        input: String,
    },
    /// Run one honest 1-2 oblivious transfer.
    Ot {
        #[arg(long, default_value_t = 256)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        l: usize,
        /// Receiver's choice bit.
        #[arg(long, default_value_t = 0)]
        c: u8,
        #[arg(long)]
        s0: Option<String>,
        #[arg(long)]
        s1: Option<String>,
    },
    /// Broadcast a program and redeem every copy once.
    Broadcast {
        #[arg(required = true)]
        formulas: Vec<String>,
        #[arg(long)]
        inputs: Option<usize>,
        #[arg(long, default_value_t = 4)]
        copies: usize,
        /// Input for each copy as a 0/1 string; defaults to the copy index.
        #[arg(long = "input")]
        input: Vec<String>,
    },
    /// Encrypt a hex message.
    Enc {
        #[arg(long, value_enum, default_value_t = SchemeArg::Sym)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 3)]
        lambda: u64,
        #[arg(long)]
        msg: String,
        /// Existing key file; otherwise a key is generated.
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long = "key-out")]
        key_out: Option<PathBuf>,
        /// Asymmetric only: 24 carrier qubits and a 2-bit key index.
        #[arg(long)]
        toy: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext file; the file is rewritten consumed.
    Dec {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        ct: PathBuf,
    },
    /// Tag a hex message with the one-time-program MAC.
    Mac {
        #[arg(long, default_value_t = 3)]
        lambda: u64,
        #[arg(long)]
        msg: String,
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long = "key-out")]
        key_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sign a hex message with the one-time-program signature.
    Sign {
        #[arg(long, default_value_t = 4)]
        lambda: u64,
        #[arg(long)]
        msg: String,
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long = "key-out")]
        key_out: Option<PathBuf>,
        /// 24 carrier qubits and a 2-bit key index.
        #[arg(long)]
        toy: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a MAC tag or signature; exit 2 on rejection.
    Verify {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        msg: String,
        #[arg(long)]
        tag: PathBuf,
    },
    /// Encryption and signature tokens.
    Token {
        #[command(subcommand)]
        action: TokenAction,
    },
    /// Security experiments against storage-bounded adversaries.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCmd,
        #[arg(long, default_value_t = 1000, global = true)]
        trials: u64,
    },
    /// Min-entropy and privacy-amplification distance of a distribution.
    Entropy {
        /// Distribution file {width, support: [{value_hex, prob}]}.
        #[arg(long, conflicts_with = "uniform")]
        dist: Option<PathBuf>,
        /// Use the uniform distribution on this many bits.
        #[arg(long)]
        uniform: Option<usize>,
        /// Hash output length for the privacy-amplification distance.
        #[arg(long)]
        l: Option<usize>,
        /// Split threshold exponent α for the binary splitting rule.
        #[arg(long)]
        alpha: Option<f64>,
        /// Width of X0 for the splitting rule (default: half).
        #[arg(long = "x0-width")]
        x0_width: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKindArg {
    Enc,
    Dec,
    Sign,
    Verify,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenFamily {
    Enc,
    Sig,
}

#[derive(Subcommand, Debug)]
pub enum TokenAction {
    /// Generate a token key with issuance quota q.
    Gen {
        #[arg(long, value_enum)]
        family: TokenFamily,
        #[arg(long, default_value_t = 1)]
        lambda: u64,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long = "key-out")]
        key_out: PathBuf,
    },
    /// Issue one token; the key file's quota counter is updated.
    Issue {
        #[arg(long)]
        key: PathBuf,
        #[arg(long, value_enum)]
        kind: TokenKindArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Use a token once; the token file is rewritten consumed.
    Use {
        #[arg(long)]
        token: PathBuf,
        #[arg(long)]
        msg: String,
        /// Signature to check, for verification tokens.
        #[arg(long)]
        sig: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    MeasureAllRandom,
    MeasureAllRectilinear,
    MeasureAllDiagonal,
    StoreFirstS,
    StoreRandomS,
}

impl StrategyArg {
    fn kind(self) -> StrategyKind {
        match self {
            StrategyArg::MeasureAllRandom => StrategyKind::MeasureAllRandom,
            StrategyArg::MeasureAllRectilinear => StrategyKind::MeasureAllFixed(Basis::Rectilinear),
            StrategyArg::MeasureAllDiagonal => StrategyKind::MeasureAllFixed(Basis::Diagonal),
            StrategyArg::StoreFirstS => StrategyKind::StoreFirstS,
            StrategyArg::StoreRandomS => StrategyKind::StoreRandomS,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcaArg {
    RandomGuess,
    BruteForce,
    StoreAll,
    KeyBeforeChallenge,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForgerArg {
    Guess,
    ConsistentPoly,
    Legit,
    ExtraToken,
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCmd {
    /// OT against a dishonest receiver.
    OtDis {
        #[arg(long, default_value_t = 256)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        l: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::MeasureAllRandom)]
        strategy: StrategyArg,
    },
    /// Chosen-ciphertext indistinguishability with disappearing ciphertexts.
    Qdcca1 {
        #[arg(long, value_enum, default_value_t = SchemeArg::Sym)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = CcaArg::RandomGuess)]
        adversary: CcaArg,
        #[arg(long, default_value_t = 3)]
        lambda: u64,
        #[arg(long = "qe", default_value_t = 0)]
        q_e: usize,
        #[arg(long = "qd", default_value_t = 0)]
        q_d: usize,
    },
    /// Token unforgeability with e encryption/signing and d decryption/verification tokens.
    Token {
        #[arg(long, value_enum, default_value_t = TokenFamily::Sig)]
        family: TokenFamily,
        #[arg(long, default_value_t = 1)]
        lambda: u64,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[arg(long, default_value_t = 0)]
        d: usize,
        #[arg(long, value_enum, default_value_t = ForgerArg::Guess)]
        strategy: ForgerArg,
    },
    /// Store-first-s attack on a broadcast of the built-in toy program.
    BroadcastStore {
        #[arg(long, default_value_t = 8)]
        copies: usize,
    },
}

enum Outcome {
    Accept,
    Reject,
}

/// Parse `args` (including the program name) and run; returns the exit
/// status.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(Outcome::Accept) => EXIT_OK,
        Ok(Outcome::Reject) => EXIT_REJECT,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn rng(g: &Global) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(g.seed)
}

fn detail(g: &Global) -> Detail {
    if g.full {
        Detail::Full
    } else {
        Detail::Summary
    }
}

fn config(g: &Global) -> OtpConfig {
    OtpConfig::new(g.s).with_detail(detail(g))
}

fn emit<W: Write>(g: &Global, out: &mut W, value: &Value) -> Result<(), CliError> {
    match &g.json {
        Some(p) => write_json(p, value),
        None => Ok(out.write_all(to_json(value)?.as_bytes())?),
    }
}

fn parse_formulas(src: &[String], inputs: Option<usize>) -> Result<(Vec<Formula>, usize), CliError> {
    let fs = src
        .iter()
        .map(|s| Formula::parse(s).map_err(|e| CliError::Usage(format!("{s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let arity = fs.iter().map(Formula::arity).max().unwrap_or(0).max(1);
    let n = inputs.unwrap_or(arity);
    if n < arity {
        return Err(CliError::Usage(format!("formulas read {arity} inputs but --inputs is {n}")));
    }
    Ok((fs, n))
}

fn dispatch<W: Write>(cli: &Cli, out: &mut W) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Compile { formulas, inputs, mbp, otp } => compile(g, formulas, *inputs, mbp.as_deref(), otp.as_deref(), out),
        Command::OtpEval { program, input } => otp_eval(g, program, input, out),
        Command::Ot { m, l, c, s0, s1 } => ot(g, *m, *l, *c, s0.as_deref(), s1.as_deref(), out),
        Command::Broadcast { formulas, inputs, copies, input } => broadcast(g, formulas, *inputs, *copies, input, out),
        Command::Enc { scheme, lambda, msg, key, key_out, toy, out: path } => {
            enc(g, *scheme, *lambda, msg, key.as_deref(), key_out.as_deref(), *toy, path, out)
        }
        Command::Dec { key, ct } => dec(g, key, ct, out),
        Command::Mac { lambda, msg, key, key_out, out: path } => mac(g, *lambda, msg, key.as_deref(), key_out.as_deref(), path, out),
        Command::Sign { lambda, msg, key, key_out, toy, out: path } => {
            sign(g, *lambda, msg, key.as_deref(), key_out.as_deref(), *toy, path, out)
        }
        Command::Verify { key, msg, tag } => verify(g, key, msg, tag, out),
        Command::Token { action } => token(g, action, out),
        Command::Experiment { which, trials } => experiment(g, which, *trials, out),
        Command::Entropy { dist, uniform, l, alpha, x0_width } => {
            entropy(g, dist.as_deref(), *uniform, *l, *alpha, *x0_width, out)
        }
    }
}

fn compile<W: Write>(
    g: &Global,
    src: &[String],
    inputs: Option<usize>,
    mbp: Option<&Path>,
    otp: Option<&Path>,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let (fs, n) = parse_formulas(src, inputs)?;
    if n > 20 {
        return Err(CliError::Usage(format!("{n} inputs is too many for the truth-table check")));
    }
    let b = Barrington::new();
    let base = mbp.map(Path::to_path_buf).or_else(|| g.json.as_ref().map(|j| j.with_extension("mbp")));
    let mut all_ok = true;
    let mut outputs = Vec::new();
    for (j, (f, text)) in fs.iter().zip(src).enumerate() {
        let p = b.compile(f, n)?;
        let ok = (0..1u64 << n).all(|x| {
            let w = Bits::from_u64(x, n);
            matches!(mbp_eval(&p, &w), Ok(o) if o.bit() == Some(f.eval(&w)))
        });
        all_ok &= ok;
        let path = base.as_ref().map(|p| if fs.len() == 1 { p.clone() } else { p.with_extension(format!("{j}.mbp")) });
        if let Some(path) = &path {
            fs::write(path, mbp_file::encode(&p)?)?;
        }
        outputs.push(json!({
            "formula": text,
            "depth": f.depth(),
            "length": p.len(),
            "truth_table_ok": ok,
            "mbp_path": path.map(|p| p.display().to_string()),
        }));
        writeln!(out, "{text}: depth {} length {} truth table {}", f.depth(), p.len(), if ok { "ok" } else { "MISMATCH" })?;
    }
    let mut report = json!({ "inputs": n, "outputs": outputs, "seed": g.seed });
    if let Some(path) = otp {
        let circuit = Circuit::from_formulas(n, fs.clone());
        let cf = CompiledFunction::compile(&circuit, &b, &config(g), &mut rng(g))?;
        let params = cf.transmission.params;
        write_json(path, &ProgramFile { formulas: src.to_vec(), inputs: n, otp: cf })?;
        report["otp"] = json!({
            "path": path.display().to_string(),
            "sessions": params.n,
            "qubits_per_session": params.m,
            "total_qubits": params.total_qubits().to_string(),
            "s": g.s,
        });
        writeln!(out, "one-time program: {} sessions, {} qubits", params.n, params.total_qubits())?;
    }
    if g.json.is_some() {
        emit(g, out, &report)?;
    }
    Ok(if all_ok { Outcome::Accept } else { Outcome::Reject })
}

fn otp_eval<W: Write>(g: &Global, path: &Path, input: &str, out: &mut W) -> Result<Outcome, CliError> {
    let mut file: ProgramFile = read_json(path)?;
    let w = bit_string(input)?;
    if w.len() != file.inputs {
        return Err(CliError::Usage(format!("input has {} bits, program reads {}", w.len(), file.inputs)));
    }
    let result = file.otp.evaluate(&w, &mut rng(g));
    // the measured qubits are gone whether or not evaluation succeeded
    write_json(path, &file)?;
    let y = result?;
    writeln!(out, "{}", y.as_ref().map_or("⊥".to_string(), to_bit_string))?;
    if g.json.is_some() {
        emit(g, out, &json!({ "input": input, "output": y.as_ref().map(to_bit_string) }))?;
    }
    Ok(if y.is_some() { Outcome::Accept } else { Outcome::Reject })
}

fn ot<W: Write>(g: &Global, m: usize, l: usize, c: u8, s0: Option<&str>, s1: Option<&str>, out: &mut W) -> Result<Outcome, CliError> {
    if c > 1 {
        return Err(CliError::Usage("--c must be 0 or 1".into()));
    }
    let mut r = rng(g);
    let s0 = s0.map_or_else(|| Ok(Bits::random(l, &mut r)), |h| parse_hex(h, l))?;
    let s1 = s1.map_or_else(|| Ok(Bits::random(l, &mut r)), |h| parse_hex(h, l))?;
    let mut tr = Transcript::new(g.profile.into(), detail(g)).with_seed(g.seed);
    tr.param("m", m);
    tr.param("l", l);
    tr.param("s", g.s);
    let mut sess = OtSession::open(OtParams::new(m, l, g.s), &s0, &s1, &mut tr, &mut r)?;
    let c = c == 1;
    let x = ot_receive_measure(&mut sess.channel, c, &mut r)?;
    tr.bound("bound");
    let msg = sess.release(&mut tr)?;
    let y = ot_recover(&x, c, &msg)?;
    let ok = y == if c { s1 } else { s0 };
    writeln!(out, "y = {} ({})", y.to_hex(), if ok { "matches s_c" } else { "MISMATCH" })?;
    if g.json.is_some() {
        emit(g, out, &serde_json::to_value(&tr)?)?;
    }
    Ok(if ok { Outcome::Accept } else { Outcome::Reject })
}

fn broadcast<W: Write>(
    g: &Global,
    src: &[String],
    inputs: Option<usize>,
    copies: usize,
    given: &[String],
    out: &mut W,
) -> Result<Outcome, CliError> {
    let (fs, n) = parse_formulas(src, inputs)?;
    let p = Circuit::from_formulas(n, fs);
    let mut r = rng(g);
    let mut st = br_setup(&p, g.s, config(g), &mut r)?;
    st.transcript.header.seed = Some(g.seed);
    st.transcript.header.profile = g.profile.into();
    let mut issued = (0..copies).map(|_| br_issue(&mut st, &mut r)).collect::<Result<Vec<_>, _>>()?;
    let reveal = br_finalize(&mut st)?;
    let mut all_ok = true;
    for (i, copy) in issued.iter_mut().enumerate() {
        let v = match given.get(i) {
            Some(s) => bit_string(s)?,
            None => Bits::from_u64(i as u64 % (1 << n.min(63)), n),
        };
        if v.len() != n {
            return Err(CliError::Usage(format!("copy {i}: input has {} bits, program reads {n}", v.len())));
        }
        let got = br_redeem(copy, &v, &reveal, &mut r)?;
        let want = p.eval(&v);
        let ok = got.as_ref().is_some_and(|y| y.slice(0..want.len()) == want);
        all_ok &= ok;
        let shown = got.as_ref().map_or("⊥".to_string(), |y| to_bit_string(&y.slice(0..want.len())));
        writeln!(out, "copy {i}: P({}) = {shown}{}", to_bit_string(&v), if ok { "" } else { " MISMATCH" })?;
    }
    if g.json.is_some() {
        emit(g, out, &serde_json::to_value(&st.transcript)?)?;
    }
    Ok(if all_ok { Outcome::Accept } else { Outcome::Reject })
}

fn asym_params(g: &Global, lambda: u64, toy: bool) -> AsymParams {
    if toy {
        toy_asym_params(lambda, g.s)
    } else {
        AsymParams::new(lambda, g.s, g.profile.into())
    }
}

/// Generate an asymmetric key and run the key broadcast once, keeping the
/// sub-key the loopback receiver extracts.
fn asym_keypair(g: &Global, params: AsymParams, r: &mut ChaCha8Rng) -> Result<(AsymPrivKey, SubKey), CliError> {
    let sk = asy_gen(params, r)?;
    let mut st = asy_keysend(&sk, config(g))?;
    let mut copy = br_issue(&mut st, r)?;
    let reveal = br_finalize(&mut st)?;
    let kv = asy_keyreceive(&params, &mut copy, &reveal, r)?;
    Ok((sk, kv))
}

fn load_or_generate(
    path: Option<&Path>,
    key_out: Option<&Path>,
    generate: impl FnOnce() -> Result<KeyFile, CliError>,
) -> Result<KeyFile, CliError> {
    let key = match path {
        Some(p) => read_json(p)?,
        None => generate()?,
    };
    if let Some(p) = key_out {
        write_json(p, &key)?;
    }
    Ok(key)
}

#[allow(clippy::too_many_arguments)]
fn enc<W: Write>(
    g: &Global,
    scheme: SchemeArg,
    lambda: u64,
    msg: &str,
    key: Option<&Path>,
    key_out: Option<&Path>,
    toy: bool,
    path: &Path,
    out: &mut W,
) -> Result<Outcome, CliError> {
    if key.is_none() && key_out.is_none() {
        return Err(CliError::Usage("give --key or --key-out so the ciphertext can be decrypted".into()));
    }
    let mu = message_bits(msg)?;
    let mut r = rng(g);
    let k = load_or_generate(key, key_out, || match scheme {
        SchemeArg::Sym => Ok(KeyFile::Sym { key: sym_gen(lambda, &mut r)? }),
        SchemeArg::Asy => {
            let params = asym_params(g, lambda, toy);
            let (sk, kv) = asym_keypair(g, params, &mut r)?;
            Ok(KeyFile::Asym { params, sk, kv })
        }
    })?;
    let cfg = config(g);
    let (file, qubits) = match &k {
        KeyFile::Sym { key } => {
            let ct = sym_enc_with(&cfg, key, &mu, &mut r)?;
            let q = ct.ot_f.transmission.params.total_qubits() + ct.ot_p.transmission.params.total_qubits();
            (CiphertextFile::Sym { ct }, q)
        }
        KeyFile::Asym { kv, .. } => {
            let ct = asy_enc(&cfg, kv, &mu, &mut r)?;
            let q = ct.ct.ot_f.transmission.params.total_qubits() + ct.ct.ot_p.transmission.params.total_qubits();
            (CiphertextFile::Asym { ct }, q)
        }
        _ => return Err(CliError::Usage("key file is not an encryption key".into())),
    };
    write_json(path, &file)?;
    writeln!(out, "encrypted {} bits into {qubits} qubits", mu.len())?;
    if g.json.is_some() {
        emit(g, out, &json!({ "message_bits": mu.len(), "qubits": qubits.to_string(), "seed": g.seed }))?;
    }
    Ok(Outcome::Accept)
}

fn dec<W: Write>(g: &Global, key: &Path, ct: &Path, out: &mut W) -> Result<Outcome, CliError> {
    let k: KeyFile = read_json(key)?;
    let mut file: CiphertextFile = read_json(ct)?;
    let mut r = rng(g);
    let result = match (&k, &mut file) {
        (KeyFile::Sym { key }, CiphertextFile::Sym { ct }) => sym_dec(key, ct, &mut r),
        (KeyFile::Asym { sk, .. }, CiphertextFile::Asym { ct }) => asy_dec(sk, ct, &mut r),
        _ => return Err(CliError::Usage("key and ciphertext schemes differ".into())),
    };
    write_json(ct, &file)?;
    let mu = result?;
    writeln!(out, "{}", mu.as_ref().map_or("⊥".to_string(), Bits::to_hex))?;
    if g.json.is_some() {
        emit(g, out, &json!({ "message_hex": mu.as_ref().map(Bits::to_hex) }))?;
    }
    Ok(if mu.is_some() { Outcome::Accept } else { Outcome::Reject })
}

fn mac<W: Write>(
    g: &Global,
    lambda: u64,
    msg: &str,
    key: Option<&Path>,
    key_out: Option<&Path>,
    path: &Path,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let mu = message_bits(msg)?;
    let mut r = rng(g);
    let k = load_or_generate(key, key_out, || Ok(KeyFile::Sym { key: sym_gen(lambda, &mut r)? }))?;
    let KeyFile::Sym { key } = &k else {
        return Err(CliError::Usage("MAC keys are symmetric keys".into()));
    };
    let tag = mac_tag(g.s, key, &mu, &mut r)?;
    write_json(path, &AuthFile::Mac { tag })?;
    writeln!(out, "tagged {} bits", mu.len())?;
    Ok(Outcome::Accept)
}

#[allow(clippy::too_many_arguments)]
fn sign<W: Write>(
    g: &Global,
    lambda: u64,
    msg: &str,
    key: Option<&Path>,
    key_out: Option<&Path>,
    toy: bool,
    path: &Path,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let mu = message_bits(msg)?;
    let mut r = rng(g);
    let k = load_or_generate(key, key_out, || {
        let params = asym_params(g, lambda, toy);
        let (sk, kv) = asym_keypair(g, params, &mut r)?;
        Ok(KeyFile::Asym { params, sk, kv })
    })?;
    let KeyFile::Asym { sk, .. } = &k else {
        return Err(CliError::Usage("signing keys are asymmetric keys".into()));
    };
    let sig = sig_sign_with(&config(g), sk, &mu, &mut r)?;
    write_json(path, &AuthFile::Signature { sig })?;
    writeln!(out, "signed {} bits", mu.len())?;
    Ok(Outcome::Accept)
}

fn verify<W: Write>(g: &Global, key: &Path, msg: &str, tag: &Path, out: &mut W) -> Result<Outcome, CliError> {
    let mu = message_bits(msg)?;
    let k: KeyFile = read_json(key)?;
    let mut file: AuthFile = read_json(tag)?;
    let mut r = rng(g);
    let result = match (&k, &mut file) {
        (KeyFile::Sym { key }, AuthFile::Mac { tag }) => mac_verify(key, &mu, tag, &mut r),
        (KeyFile::Asym { kv, .. }, AuthFile::Signature { sig }) => sig_verify(kv, &mu, sig, &mut r),
        _ => return Err(CliError::Usage("key does not match the tag type".into())),
    };
    write_json(tag, &file)?;
    let ok = result?;
    writeln!(out, "{}", if ok { "accept" } else { "reject" })?;
    Ok(if ok { Outcome::Accept } else { Outcome::Reject })
}

fn token<W: Write>(g: &Global, action: &TokenAction, out: &mut W) -> Result<Outcome, CliError> {
    let mut r = rng(g);
    match action {
        TokenAction::Gen { family, lambda, q, key_out } => {
            let key = match family {
                TokenFamily::Enc => KeyFile::EncToken { key: tok_gen(*lambda, *q, &mut r)? },
                TokenFamily::Sig => KeyFile::SigToken { key: sigtok_gen(*lambda, *q, &mut r)? },
            };
            write_json(key_out, &key)?;
            writeln!(out, "token key with quota {q}")?;
        }
        TokenAction::Issue { key, kind, out: path } => {
            let mut k: KeyFile = read_json(key)?;
            let token = match (&mut k, kind) {
                (KeyFile::EncToken { key }, TokenKindArg::Enc) => tok_enc_issue(g.s, key, &mut r)?,
                (KeyFile::EncToken { key }, TokenKindArg::Dec) => tok_dec_issue(g.s, key, &mut r)?,
                (KeyFile::SigToken { key }, TokenKindArg::Sign) => sigtok_issue(g.s, key, &mut r)?,
                (KeyFile::SigToken { key }, TokenKindArg::Verify) => sigtok_verify_issue(g.s, key, &mut r)?,
                _ => return Err(CliError::Usage("token kind does not match the key family".into())),
            };
            write_json(key, &k)?;
            writeln!(out, "issued {:?} token {}", token.manifest.kind, token.manifest.index)?;
            write_json(path, &TokenFile { token })?;
        }
        TokenAction::Use { token, msg, sig } => {
            let mut file: TokenFile = read_json(token)?;
            let n = file.token.n;
            let mu = message_bits(msg)?.resized(n);
            let result = match file.token.manifest.kind {
                TokenKind::Enc => tok_enc_use(&mut file.token, &mu, &mut r)
                    .map(|ct| (true, json!({ "c0": ct.c0.to_hex(), "c1": ct.c1.to_hex() }))),
                TokenKind::Sign => sigtok_sign(&mut file.token, &mu, &mut r)
                    .map(|s| (true, json!({ "signature": s.to_hex() }))),
                TokenKind::Verify => {
                    let sigma = parse_hex(sig.as_deref().ok_or_else(|| CliError::Usage("--sig is required".into()))?, n)?;
                    sigtok_verify(&mut file.token, &mu, &sigma, &mut r).map(|ok| (ok, json!({ "accept": ok })))
                }
                TokenKind::Dec => return Err(CliError::Usage("decryption tokens take a ciphertext, not a message".into())),
            };
            write_json(token, &file)?;
            let (ok, value) = result?;
            writeln!(out, "{value}")?;
            if g.json.is_some() {
                emit(g, out, &value)?;
            }
            return Ok(if ok { Outcome::Accept } else { Outcome::Reject });
        }
    }
    Ok(Outcome::Accept)
}

fn experiment<W: Write>(g: &Global, which: &ExperimentCmd, trials: u64, out: &mut W) -> Result<Outcome, CliError> {
    let report = match which {
        ExperimentCmd::OtDis { m, l, strategy } => {
            experiments::ot_dis(&AdversaryStrategy::new(strategy.kind(), g.s), OtParams::new(*m, *l, g.s), trials, g.seed)?
        }
        ExperimentCmd::Qdcca1 { scheme, adversary, lambda, q_e, q_d } => {
            let scheme = match scheme {
                SchemeArg::Sym => Scheme::Sym,
                SchemeArg::Asy => Scheme::Asy,
            };
            let adversary = match adversary {
                CcaArg::RandomGuess => CcaAdversary::RandomGuess,
                CcaArg::BruteForce => CcaAdversary::BruteForce,
                CcaArg::StoreAll => CcaAdversary::StoreAll,
                CcaArg::KeyBeforeChallenge => CcaAdversary::KeyBeforeChallenge,
            };
            experiments::qdcca1(scheme, adversary, *lambda, g.s, (*q_e, *q_d), trials, g.seed)?
        }
        ExperimentCmd::Token { family, lambda, q, e, d, strategy } => {
            let kind = match family {
                TokenFamily::Enc => TokenExpKind::Enc,
                TokenFamily::Sig => TokenExpKind::Sig,
            };
            let strategy = match strategy {
                ForgerArg::Guess => TokenStrategy::Guess,
                ForgerArg::ConsistentPoly => TokenStrategy::ConsistentPoly,
                ForgerArg::Legit => TokenStrategy::Legit,
                ForgerArg::ExtraToken => TokenStrategy::ExtraToken,
            };
            experiments::token_exp(kind, *lambda, *q, *e, *d, strategy, trials, g.seed)?
        }
        ExperimentCmd::BroadcastStore { copies } => {
            experiments::broadcast_store(&experiments::toy_broadcast_program(), *copies, g.s, trials, g.seed)?.report
        }
    };
    if let Some(path) = &g.emit_csv {
        let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = fs::OpenOptions::new().create(true).append(true).open(path)?;
        experiments::write_csv_row(file, &report, fresh).map_err(|e| CliError::Format(e.to_string()))?;
    }
    let value = serde_json::to_value(&report)?;
    if g.json.is_some() {
        writeln!(out, "{}: {}/{} (rate {:.4})", report.experiment, report.successes, report.trials, report.rate)?;
    }
    emit(g, out, &value)?;
    Ok(Outcome::Accept)
}

fn entropy<W: Write>(
    g: &Global,
    dist: Option<&Path>,
    uniform: Option<usize>,
    l: Option<usize>,
    alpha: Option<f64>,
    x0_width: Option<usize>,
    out: &mut W,
) -> Result<Outcome, CliError> {
    let d: Dist = match (dist, uniform) {
        (Some(p), _) => read_json::<DistFile>(p)?.to_dist()?,
        (None, Some(w)) => Dist::uniform(w),
        (None, None) => return Err(CliError::Usage("give --dist or --uniform".into())),
    };
    let h = min_entropy(&d);
    let mut report = json!({ "width": d.width(), "support": d.support().len(), "min_entropy": h });
    if let Some(l) = l {
        let pa = privacy_amp_distance(&d, l)?;
        report["privacy_amplification"] = json!({
            "l": l,
            "distance": pa.distance,
            "bound": privacy_amp_bound(h, l),
            "functions": pa.functions,
            "exact": pa.exact,
        });
    }
    if let Some(alpha) = alpha {
        let x0 = x0_width.unwrap_or(d.width() / 2);
        let rule = split_choice_binary(&d, x0, alpha)?;
        let ones = d.support().iter().filter(|(x, _)| rule.choose_joint(x)).count();
        report["split"] = json!({ "alpha": alpha, "x0_width": x0, "threshold": rule.threshold(), "c_one_outcomes": ones });
    }
    emit(g, out, &report)?;
    Ok(Outcome::Accept)
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
