//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 check failed, 2 usage error, 3 oracle convergence
//! failure, 4 optimizer robustness failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bell::{mermin3_form, mermin4_form};
use crate::error::Error;
use crate::fock::{self, default_cutoff, MAX_ORACLE_MODES};
use crate::kernel::squeezed_correlation;
use crate::optimize::{
    optimize_bell, visibility_table, Objective, OptimizationResult, OptimizerConfig, Squeezing,
    VisibilityRow,
};
use crate::types::{Displacement, SqueezedParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;
pub const EXIT_ROBUSTNESS: i32 = 4;

/// Environment variable capping optimizer threads.
pub const THREADS_ENV: &str = "CVBELL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "cvbell",
    version,
    about = "Parity correlations and Bell quantities of N-mode squeezed vacuum"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Closed-form correlation for one displacement tuple.
    Correlate(CorrelateArgs),
    /// Compare the closed form with the truncated number-basis oracle.
    OracleCheck(OracleCheckArgs),
    /// Maximize a Bell quantity over settings (and optionally r).
    Optimize(OptimizeArgs),
    /// Threshold visibilities for a range of mode counts.
    VisibilityTable(VisibilityArgs),
    /// Re-run the command recorded in a manifest file.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    /// Displacement as "re,im"; repeat once per mode.
    #[arg(long = "alpha", value_parser = parse_alpha, allow_hyphen_values = true)]
    pub alpha: Vec<Displacement>,
    /// Also write a run manifest to this path.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OracleCheckArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    /// Per-mode cutoff; defaults to 24, 14, 8 for N = 2, 3, 4.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Displacements are drawn from the disk of this radius.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormChoice {
    Mermin3,
    Mermin4,
    Zb,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = FormChoice::Zb)]
    pub form: FormChoice,
    /// A fixed value, or "free" to search r in [-r_bound, r_bound].
    #[arg(long, default_value = "free", allow_hyphen_values = true)]
    pub r: String,
    #[arg(long, default_value_t = 5.0)]
    pub r_bound: f64,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Search complex displacements instead of real ones.
    #[arg(long)]
    pub complex: bool,
    /// Pin each party's first setting to zero displacement.
    #[arg(long)]
    pub anchored: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VisibilityArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 7)]
    pub n_max: usize,
    /// Output prefix; writes <prefix>.csv, <prefix>.json, <prefix>.manifest.json.
    #[arg(long, default_value = "visibility")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Replacement output prefix for visibility-table runs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub config: Option<OptimizerConfig>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// SHA-256 of each output, keyed by output name.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    fn new(command: &Command, config: Option<OptimizerConfig>) -> Self {
        let mut params = serde_json::to_value(command).expect("arguments serialize");
        let name = params
            .as_object_mut()
            .and_then(|m| m.remove("command"))
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        Self {
            command: name,
            params,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            checksums: BTreeMap::new(),
        }
    }

    fn with_checksum(mut self, name: &str, bytes: &[u8]) -> Self {
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        self
    }

    /// The recorded command, ready to run again.
    pub fn command(&self) -> Result<Command, String> {
        let mut params = self.params.clone();
        params
            .as_object_mut()
            .ok_or("manifest params are not an object")?
            .insert("command".into(), Value::String(self.command.clone()));
        serde_json::from_value(params).map_err(|e| format!("invalid manifest params: {e}"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.14e}").parse().unwrap_or(x)
    } else {
        x
    }
}

/// Rounds every number in a JSON tree to 15 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round15(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn parse_alpha(s: &str) -> Result<Displacement, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"re,im\", got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("invalid number {t:?} in {s:?}"))
    };
    Ok(Displacement::new(parse(re)?, parse(im)?))
}

/// Outcome of a command: exit code plus what to print.
struct Outcome {
    code: i32,
    stdout: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
        }
    }
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Leakage { .. } | Error::ImaginaryResidual { .. } => EXIT_ORACLE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            out.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| {
                usage(format!(
                    "{THREADS_ENV} must be a positive integer, got {s:?}"
                ))
            }),
        Err(_) => Ok(None),
    }
}

fn execute(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Correlate(a) => correlate(command, a),
        Command::OracleCheck(a) => oracle_check(command, a),
        Command::Optimize(a) => optimize(command, a),
        Command::VisibilityTable(a) => visibility(command, a),
        Command::Replay(a) => replay(a),
    }
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, text + "\n").map_err(|e| io_failure(path, e))
}

fn correlate(command: &Command, a: &CorrelateArgs) -> Result<Outcome, Failure> {
    if a.alpha.len() != a.n {
        return Err(usage(format!(
            "--alpha given {} times, expected one per mode (--n {})",
            a.alpha.len(),
            a.n
        )));
    }
    let params = SqueezedParams::new(a.n, a.r)?;
    let value = squeezed_correlation(&params, &a.alpha)?;
    let out = format!("{value:.15}\n");
    if let Some(path) = &a.manifest {
        write_manifest(
            path,
            &RunManifest::new(command, None).with_checksum("stdout", out.as_bytes()),
        )?;
    }
    Ok(Outcome::ok(out))
}

fn oracle_check(command: &Command, a: &OracleCheckArgs) -> Result<Outcome, Failure> {
    if a.n > MAX_ORACLE_MODES {
        return Err(Error::OracleUnsupported(a.n).into());
    }
    if a.samples == 0 || !(a.tolerance > 0.0) || !(a.radius >= 0.0) {
        return Err(usage(
            "--samples must be positive; --tolerance and --radius must be positive",
        ));
    }
    let params = SqueezedParams::new(a.n, a.r)?;
    let cutoff = a.cutoff.unwrap_or_else(|| default_cutoff(a.n));
    let alphas = fock::random_displacements(a.n, a.samples, a.radius, a.seed);
    let report = fock::oracle_check(&params, cutoff, &alphas, a.tolerance)?;

    let converged = report.max_cutoff_shift <= a.tolerance;
    let agrees = report.max_deviation <= a.tolerance;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "n = {}, r = {}, cutoff = {}, samples = {}",
        a.n, a.r, cutoff, a.samples
    );
    let _ = writeln!(out, "leakage             {:.6e}", report.leakage);
    let _ = writeln!(out, "max |kernel-oracle| {:.6e}", report.max_deviation);
    let _ = writeln!(
        out,
        "max cutoff shift    {:.6e} (cutoff {})",
        report.max_cutoff_shift,
        2 * cutoff
    );
    let verdict = if !converged {
        "NOT CONVERGED"
    } else if agrees {
        "OK"
    } else {
        "MISMATCH"
    };
    let _ = writeln!(out, "{verdict} (tolerance {:e})", a.tolerance);
    if let Some(path) = &a.manifest {
        write_manifest(
            path,
            &RunManifest::new(command, None).with_checksum("stdout", out.as_bytes()),
        )?;
    }
    let code = if !converged {
        EXIT_ORACLE
    } else if agrees {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok(Outcome { code, stdout: out })
}

fn objective_for(n: usize, form: FormChoice) -> Result<Objective, Failure> {
    match (form, n) {
        (FormChoice::Mermin3, 3) => Ok(Objective::Form(mermin3_form())),
        (FormChoice::Mermin4, 4) => Ok(Objective::Form(mermin4_form())),
        (FormChoice::Zb, n) if n >= 2 => Ok(Objective::Zb(n)),
        (FormChoice::Zb, n) => Err(usage(format!("--form zb needs --n >= 2, got {n}"))),
        (f, n) => Err(usage(
            format!("--form {f:?} is not defined for --n {n}").to_lowercase(),
        )),
    }
}

fn parse_squeezing(s: &str, r_bound: f64) -> Result<Squeezing, Failure> {
    if s.eq_ignore_ascii_case("free") {
        if !(r_bound > 0.0) || !r_bound.is_finite() {
            return Err(usage("--r-bound must be positive"));
        }
        return Ok(Squeezing::free_default(r_bound));
    }
    s.parse::<f64>()
        .ok()
        .filter(|r| r.is_finite())
        .map(Squeezing::Fixed)
        .ok_or_else(|| usage(format!("--r must be a number or \"free\", got {s:?}")))
}

/// JSON body of an optimization result.
pub fn optimization_json(res: &OptimizationResult, agreement_tol: f64) -> Value {
    let converged = res.restarts.iter().filter(|o| o.converged).count();
    json!({
        "objective": res.objective_name,
        "n": res.n_modes,
        "best_value": res.best_value,
        "classical_bound": res.classical_bound,
        "violated": res.best_value > res.classical_bound + crate::bell::VIOLATION_SLACK,
        "best_r": res.best_r,
        "r_at_bound": res.r_at_bound,
        "settings": res.best_settings.rows(),
        "restart_statistics": {
            "count": res.restarts.len(),
            "converged": converged,
            "agreement_tolerance": agreement_tol,
            "agreement_fraction": res.agreement_fraction(agreement_tol),
            "values": res.restarts.iter().map(|o| o.value).collect::<Vec<_>>(),
            "r": res.restarts.iter().map(|o| o.r).collect::<Vec<_>>(),
        },
    })
}

fn optimize(command: &Command, a: &OptimizeArgs) -> Result<Outcome, Failure> {
    let objective = objective_for(a.n, a.form)?;
    let squeezing = parse_squeezing(&a.r, a.r_bound)?;
    let config = OptimizerConfig {
        restarts: a.restarts,
        seed: a.seed,
        real_only: !a.complex,
        anchored: a.anchored,
        r_bound: a.r_bound,
        threads: threads_from_env()?,
        ..OptimizerConfig::default()
    };
    let res = optimize_bell(a.n, squeezing, &objective, &config)?;
    let body = round_json(optimization_json(
        &res,
        crate::optimize::visibility::AGREEMENT_TOL,
    ));
    let body_text = serde_json::to_string(&body).expect("result serializes");
    let manifest = RunManifest::new(
        command,
        Some(OptimizerConfig {
            threads: None,
            ..config
        }),
    )
    .with_checksum("result", body_text.as_bytes());
    let mut doc = body;
    doc["manifest"] = serde_json::to_value(&manifest).expect("manifest serializes");
    let sound = res.best_value <= objective.algebraic_max() + 1e-9;
    Ok(Outcome {
        code: if sound { EXIT_OK } else { EXIT_CHECK_FAILED },
        stdout: serde_json::to_string_pretty(&doc).expect("serializes") + "\n",
    })
}

fn csv_number(x: f64) -> String {
    format!("{}", round15(x))
}

/// CSV with columns `n, v_me, v_osc, b_opt, form, argmax_r`.
pub fn visibility_csv(rows: &[VisibilityRow]) -> String {
    let mut s = String::from("n,v_me,v_osc,b_opt,form,argmax_r\n");
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            row.n,
            csv_number(row.v_me),
            csv_number(row.v_osc),
            csv_number(row.b_opt),
            row.form_used,
            csv_number(row.argmax_r)
        );
    }
    s
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn visibility(command: &Command, a: &VisibilityArgs) -> Result<Outcome, Failure> {
    if a.n_min < 2 || a.n_max < 2 {
        return Err(usage(format!(
            "--n-min and --n-max must be at least 2 (got {} and {})",
            a.n_min, a.n_max
        )));
    }
    if a.n_min > a.n_max {
        return Err(usage("--n-min exceeds --n-max"));
    }
    let config = OptimizerConfig {
        restarts: a.restarts,
        seed: a.seed,
        threads: threads_from_env()?,
        ..OptimizerConfig::default()
    };
    let ns: Vec<usize> = (a.n_min..=a.n_max).collect();
    let rows = visibility_table(&ns, &config)?;

    let csv = visibility_csv(&rows);
    let stored = OptimizerConfig {
        threads: None,
        ..config
    };
    let mut manifest = RunManifest::new(command, Some(stored)).with_checksum("csv", csv.as_bytes());
    let rows_json = round_json(serde_json::to_value(&rows).expect("rows serialize"));
    let mirror = json!({ "rows": rows_json, "manifest": manifest });
    let json_text = serde_json::to_string_pretty(&mirror).expect("serializes") + "\n";
    manifest = manifest.with_checksum("json", json_text.as_bytes());

    let csv_path = with_extension(&a.out, ".csv");
    let json_path = with_extension(&a.out, ".json");
    let manifest_path = with_extension(&a.out, ".manifest.json");
    std::fs::write(&csv_path, &csv).map_err(|e| io_failure(&csv_path, e))?;
    std::fs::write(&json_path, &json_text).map_err(|e| io_failure(&json_path, e))?;
    write_manifest(&manifest_path, &manifest)?;

    let fragile: Vec<usize> = rows.iter().filter(|r| !r.robust).map(|r| r.n).collect();
    let mut out = csv;
    let _ = writeln!(
        out,
        "wrote {}, {}, {}",
        csv_path.display(),
        json_path.display(),
        manifest_path.display()
    );
    if fragile.is_empty() {
        Ok(Outcome::ok(out))
    } else {
        let _ = writeln!(out, "restart robustness check failed for n = {fragile:?}");
        Ok(Outcome {
            code: EXIT_ROBUSTNESS,
            stdout: out,
        })
    }
}

fn replay(a: &ReplayArgs) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(&a.manifest)
        .map_err(|e| usage(format!("cannot read {}: {e}", a.manifest.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid manifest: {e}")))?;
    let mut command = manifest.command().map_err(usage)?;
    match (&mut command, &a.out) {
        (Command::Replay(_), _) => return Err(usage("a manifest cannot record a replay")),
        (Command::VisibilityTable(v), Some(out)) => v.out = out.clone(),
        _ => {}
    }
    execute(&command)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_parsing() {
        assert_eq!(parse_alpha("0.5,-1").unwrap(), Displacement::new(0.5, -1.0));
        assert_eq!(
            parse_alpha(" 1e-3 , 2 ").unwrap(),
            Displacement::new(1e-3, 2.0)
        );
        assert!(parse_alpha("0.5").is_err());
        assert!(parse_alpha("a,b").is_err());
        assert!(parse_alpha("nan,0").is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round15(0.1 + 0.2), 0.3);
        assert_eq!(round15(7.356_661_234_567_891_2), 7.356_661_234_567_89);
        assert_eq!(round15(0.0), 0.0);
        assert!(round15(f64::NAN).is_nan());
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn form_n_compatibility() {
        assert!(objective_for(3, FormChoice::Mermin3).is_ok());
        assert!(objective_for(4, FormChoice::Mermin4).is_ok());
        assert!(objective_for(3, FormChoice::Mermin4).is_err());
        assert!(objective_for(1, FormChoice::Zb).is_err());
        assert!(objective_for(5, FormChoice::Zb).is_ok());
    }

    #[test]
    fn manifest_round_trip() {
        let cmd = Command::Optimize(OptimizeArgs {
            n: 4,
            form: FormChoice::Mermin4,
            r: "free".into(),
            r_bound: 5.0,
            restarts: 8,
            seed: 3,
            complex: false,
            anchored: false,
        });
        let m = RunManifest::new(&cmd, None);
        assert_eq!(m.command, "optimize");
        match m.command().unwrap() {
            Command::Optimize(a) => assert_eq!((a.n, a.seed, a.form), (4, 3, FormChoice::Mermin4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let row = VisibilityRow {
            n: 3,
            v_me: 0.5,
            v_osc: 2.0 / 3.0,
            b_opt: 12.0,
            form_used: "zb".into(),
            argmax_r: -5.0,
            r_at_bound: true,
            v_zb: 2.0 / 3.0,
            v_form: None,
            v_osc_anchored: 2.0 / 3.0,
            agreement: 1.0,
            robust: true,
        };
        assert_eq!(
            visibility_csv(&[row]),
            "n,v_me,v_osc,b_opt,form,argmax_r\n3,0.5,0.666666666666667,12,zb,-5\n"
        );
    }
}
