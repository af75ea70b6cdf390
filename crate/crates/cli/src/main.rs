use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use singforge::braid::{BraidWord, GeometricBraid, Symmetry};
use singforge::certificate::{Certificate, Status};
use singforge::config::Config;
use singforge::looppoly::{LoopError, LoopPoly};
use singforge::mixedpoly::{
    check_inner_nondegenerate, check_strongly_inner_nondegenerate, from_loop_line, is_nice, newton, FaceLine,
    MixedError, MixedPoly,
};
use singforge::obstruction::{symmetry_report, IntLaurentPoly};
use singforge::pfibered::{self, choose_symmetry, denominator, PFiberError, SequenceSpec};

#[derive(Parser)]
#[command(name = "singforge", version, about = "Mixed polynomials with isolated singularities from symmetric braids")]
struct Cli {
    /// TOML file replacing the bundled numeric defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Samples per period for braids and loops (even, at least 16).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BraidInput {
    /// Braid word such as "s=2: s1 s1".
    #[arg(long, conflicts_with = "strands")]
    word: Option<String>,
    /// CSV strand file with columns t,strand_id,re,im.
    #[arg(long)]
    strands: Option<PathBuf>,
}

#[derive(Args)]
struct PolyInput {
    /// JSON file holding a mixed polynomial.
    file: Option<PathBuf>,
    /// The polynomial as text, for example "u^2 - v*vb".
    #[arg(long, conflicts_with = "file")]
    expr: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a polynomial from a braid and certify it.
    Forge {
        #[command(flatten)]
        braid: BraidInput,
        /// Symmetry to use (u-even, odd, k=2, ...); detected when omitted.
        #[arg(long)]
        symmetry: Option<String>,
        /// Slope parameter; the smallest admissible one is used when omitted.
        #[arg(long)]
        k: Option<u32>,
        /// Skip the strong inner non-degeneracy certificate.
        #[arg(long)]
        weak_only: bool,
    },
    /// Certify inner non-degeneracy of a polynomial.
    Certify {
        #[command(flatten)]
        poly: PolyInput,
        /// Check strong inner non-degeneracy as well.
        #[arg(long)]
        strong: bool,
    },
    /// Verify a compatible sequence and realize it.
    Compat {
        /// Sequence JSON file.
        file: PathBuf,
    },
    /// Alexander polynomial obstructions; coefficients lowest degree first.
    Obstruct {
        #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
        coeffs: Vec<String>,
    },
    /// List the Newton boundary of a polynomial.
    Newton {
        #[command(flatten)]
        poly: PolyInput,
    },
    /// CSV of root positions of a loop over one period.
    Plotdata {
        /// Loop JSON file.
        file: PathBuf,
    },
    /// Detect the symmetries of a braid.
    Symmetry {
        #[command(flatten)]
        braid: BraidInput,
    },
}

/// Failures mapped to process exit codes.
enum Failure {
    Input(anyhow::Error),
    SymmetryMissing(anyhow::Error),
    Approximation(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::SymmetryMissing(_) => 2,
            Failure::Approximation(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::SymmetryMissing(e) | Failure::Approximation(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

/// A finished command: what to print and whether every certificate passed.
enum Output {
    Json(Value, bool),
    Text(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(&cli).map_err(Failure::Input).and_then(|cfg| run(&cli.command, &cfg));
    match result {
        Ok(out) => {
            let (text, pass) = match out {
                Output::Json(v, pass) => (serde_json::to_string_pretty(&v).expect("serializable") + "\n", pass),
                Output::Text(t) => (t, true),
            };
            if let Err(e) = emit(cli.out.as_deref(), &text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // A reader such as `head` closing early is not an error.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("cannot write to stdout"),
        },
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_toml(&read(p)?)?,
        None => Config::from_env()?,
    };
    if let Some(n) = cli.grid {
        cfg.set_grid(n)?;
    }
    Ok(cfg)
}

fn read(p: &Path) -> anyhow::Result<String> {
    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn run(cmd: &Command, cfg: &Config) -> Result<Output, Failure> {
    match cmd {
        Command::Forge { braid, symmetry, k, weak_only } => forge(braid, symmetry.as_deref(), *k, *weak_only, cfg),
        Command::Certify { poly, strong } => certify(poly, *strong, cfg),
        Command::Compat { file } => compat(file, cfg),
        Command::Obstruct { coeffs } => obstruct(coeffs, cfg),
        Command::Newton { poly } => newton_cmd(poly),
        Command::Plotdata { file } => plotdata(file, cfg),
        Command::Symmetry { braid } => {
            let (b, input) = load_braid(braid, cfg)?;
            let report = b.detect_symmetry().map_err(|e| Failure::Input(e.into()))?;
            Ok(Output::Json(json!({ "command": "symmetry", "input": input, "report": report }), true))
        }
    }
}

fn load_braid(input: &BraidInput, cfg: &Config) -> anyhow::Result<(GeometricBraid, Value)> {
    match (&input.word, &input.strands) {
        (Some(w), _) => {
            let word: BraidWord = w.parse()?;
            let b = GeometricBraid::from_word(&word, cfg.grid.braid_samples);
            Ok((b, json!({ "word": word.to_string() })))
        }
        (None, Some(p)) => {
            let b = GeometricBraid::from_csv(&read(p)?, cfg.tolerance.endpoint)?;
            Ok((b, json!({ "strands": p.display().to_string() })))
        }
        (None, None) => bail!("give a braid with --word or --strands"),
    }
}

fn load_poly(input: &PolyInput) -> anyhow::Result<MixedPoly> {
    match (&input.file, &input.expr) {
        (_, Some(e)) => Ok(e.parse()?),
        (Some(p), None) => {
            let text = read(p)?;
            serde_json::from_str(&text)
                .or_else(|_| text.trim().parse())
                .map_err(|e| anyhow!("{}: not a polynomial in JSON or text form: {e}", p.display()))
        }
        (None, None) => bail!("give a polynomial file or --expr"),
    }
}

fn all_pass(certs: &[&Certificate]) -> bool {
    certs.iter().all(|c| c.status == Status::Pass)
}

fn forge(input: &BraidInput, sym: Option<&str>, k: Option<u32>, weak_only: bool, cfg: &Config) -> Result<Output, Failure> {
    let (b, source) = load_braid(input, cfg)?;
    let report = b.detect_symmetry().map_err(|e| Failure::Input(e.into()))?;
    let sym = match sym {
        Some(s) => {
            let s: Symmetry = s.parse().map_err(|e: singforge::braid::BraidError| Failure::Input(e.into()))?;
            if !report.contains(s) {
                return Err(Failure::SymmetryMissing(anyhow!("the braid does not have the {s} symmetry")));
            }
            s
        }
        None => choose_symmetry(&b).map_err(|_| {
            Failure::SymmetryMissing(anyhow!("the braid is neither u-even, divisor-symmetric nor odd"))
        })?,
    };
    let fb = LoopPoly::from_braid(&b, sym, None, cfg).map_err(|e| match e {
        LoopError::SymmetryAbsent(_) | LoopError::NotDivisorSymmetric { .. } => Failure::SymmetryMissing(e.into()),
        LoopError::Approx(_) | LoopError::RootDriftTooLarge { .. } | LoopError::LeadingVanishes { .. } => {
            Failure::Approximation(e.into())
        }
        other => Failure::Input(other.into()),
    })?;
    let g = fb.loop_poly;
    let base = FaceLine { k: 1, q: denominator(sym), top: g.degree(), nu_end: 0 };
    let k = match k {
        Some(k) => k,
        None => base
            .smallest_admissible(&g, 1, None, cfg.search.max_k)
            .ok_or_else(|| Failure::Input(anyhow!("no admissible k up to {}", cfg.search.max_k)))?,
    };
    let line = FaceLine { k, ..base };
    let f = from_loop_line(&g, &line).map_err(|e| Failure::Input(e.into()))?;

    let weak = check_inner_nondegenerate(&f, cfg);
    let strong = (!weak_only).then(|| check_strongly_inner_nondegenerate(&f, cfg));
    let nice = is_nice(&f, cfg);
    let n = cfg.grid.loop_samples;
    let (g_margin, _) = g.simple_root_margin(n);
    let (q, m) = g.strip_zero_roots();
    let arg = pfibered::certify_function(&q, m, &singforge::TrigPoly::one(), n, cfg);
    let mut certs = vec![&weak, &nice];
    if let Some(s) = &strong {
        certs.push(s);
    }
    let pass = all_pass(&certs);
    let out = json!({
        "command": "forge",
        "input": source,
        "symmetry": { "chosen": sym, "report": report },
        "loop": g,
        "approximation": { "max_freq": fb.max_freq, "residual": fb.residual, "root_drift": fb.drift },
        "k": k,
        "weight": line.weight(),
        "polynomial": f,
        "polynomial_text": f.to_string(),
        "newton": newton(&f).ok(),
        "margins": { "g_margin": finite(g_margin), "arg_margin": finite(arg.margin()) },
        "certificates": { "weak": weak, "strong": strong, "nice": nice, "p_fibered": arg.certificate },
        "all_pass": pass,
    });
    Ok(Output::Json(out, pass))
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn certify(input: &PolyInput, strong: bool, cfg: &Config) -> Result<Output, Failure> {
    let f = load_poly(input)?;
    if f.is_zero() {
        return Err(Failure::Input(MixedError::ZeroPolynomial.into()));
    }
    let weak = check_inner_nondegenerate(&f, cfg);
    let strong = strong.then(|| check_strongly_inner_nondegenerate(&f, cfg));
    let mut certs = vec![&weak];
    if let Some(s) = &strong {
        certs.push(s);
    }
    let pass = all_pass(&certs);
    let out = json!({
        "command": "certify",
        "polynomial": f,
        "polynomial_text": f.to_string(),
        "newton": newton(&f).ok(),
        "certificates": { "weak": weak, "strong": strong },
        "all_pass": pass,
    });
    Ok(Output::Json(out, pass))
}

fn compat(file: &Path, cfg: &Config) -> Result<Output, Failure> {
    let spec: SequenceSpec =
        serde_json::from_str(&read(file)?).with_context(|| format!("{}: not a sequence file", file.display()))?;
    if spec.braids.is_empty() {
        return Err(Failure::Input(anyhow!("empty sequence")));
    }
    let seq = spec.to_data(cfg).map_err(|e| Failure::Input(e.into()))?;
    let report = pfibered::verify_compatible(&seq, cfg);
    let mut out = json!({ "command": "compat", "report": report });
    if !report.compatible {
        for line in &report.failures {
            eprintln!("{line}");
        }
        out["all_pass"] = json!(false);
        return Ok(Output::Json(out, false));
    }
    let r = pfibered::realize(&seq, &spec.symmetry_tags(), cfg).map_err(|e| match e {
        PFiberError::Loop(LoopError::SymmetryAbsent(_)) => Failure::SymmetryMissing(e.into()),
        PFiberError::Loop(LoopError::Approx(_) | LoopError::RootDriftTooLarge { .. }) => Failure::Approximation(e.into()),
        other => Failure::Input(other.into()),
    })?;
    let roundtrip = r.roundtrip_errors.iter().all(|&x| x <= cfg.tolerance.ladder) && r.braid_matches.iter().all(|&b| b);
    let pass = roundtrip && all_pass(&[&r.strong, &r.weak]);
    out["polynomial_text"] = json!(r.poly.to_string());
    out["newton"] = json!(newton(&r.poly).ok());
    out["realization"] = json!(r);
    out["all_pass"] = json!(pass);
    Ok(Output::Json(out, pass))
}

fn obstruct(coeffs: &[String], cfg: &Config) -> Result<Output, Failure> {
    let delta: IntLaurentPoly = coeffs.join(" ").parse().map_err(|e: singforge::obstruction::ObstructionError| Failure::Input(e.into()))?;
    let report = symmetry_report(&delta, cfg).map_err(|e| Failure::Input(e.into()))?;
    let out = json!({
        "command": "obstruct",
        "delta_text": delta.normalized().to_string(),
        "report": report,
    });
    Ok(Output::Json(out, true))
}

fn newton_cmd(input: &PolyInput) -> Result<Output, Failure> {
    let f = load_poly(input)?;
    let nd = newton(&f).map_err(|e| Failure::Input(e.into()))?;
    if nd.faces.is_empty() {
        return Err(Failure::Input(anyhow!("the Newton boundary of {f} has no compact 1-face")));
    }
    let faces: Vec<Value> = nd
        .faces
        .iter()
        .map(|face| {
            json!({
                "weight": face.weight,
                "degree": face.degree,
                "start": face.start,
                "end": face.end,
                "face_function": singforge::mixedpoly::face_function(&f, &face.weight).to_string(),
            })
        })
        .collect();
    let out = json!({ "command": "newton", "polynomial_text": f.to_string(), "newton": nd, "faces": faces });
    Ok(Output::Json(out, true))
}

/// Groups strands whose modulus ranges overlap; returns the group index of
/// each strand and the mean modulus of each group.
fn circles(b: &GeometricBraid) -> (Vec<usize>, Vec<f64>) {
    let ranges: Vec<(f64, f64, f64)> = b
        .strands()
        .iter()
        .map(|s| {
            let r: Vec<f64> = s.iter().map(|z| z.norm()).collect();
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(0.0, f64::max);
            (lo, hi, r.iter().sum::<f64>() / r.len() as f64)
        })
        .collect();
    let mut order: Vec<usize> = (0..ranges.len()).collect();
    order.sort_by(|&a, &b| ranges[a].0.total_cmp(&ranges[b].0));
    let mut index = vec![0; ranges.len()];
    let mut radii: Vec<(f64, usize)> = Vec::new();
    let mut top = f64::NEG_INFINITY;
    for &j in &order {
        let (lo, hi, mean) = ranges[j];
        if radii.is_empty() || lo > top + 1e-9 * hi.max(1.0) {
            radii.push((0.0, 0));
        }
        let c = radii.len() - 1;
        radii[c].0 += mean;
        radii[c].1 += 1;
        index[j] = c;
        top = top.max(hi);
    }
    (index, radii.into_iter().map(|(s, n)| s / n as f64).collect())
}

fn plotdata(file: &Path, cfg: &Config) -> Result<Output, Failure> {
    let g: LoopPoly =
        serde_json::from_str(&read(file)?).with_context(|| format!("{}: not a loop file", file.display()))?;
    let n = cfg.grid.loop_samples;
    let b = g.track(n).map_err(|e| Failure::Input(e.into()))?;
    let (index, radii) = circles(&b);
    let mut csv = String::from("t,root_index,re,im,circle_radius,circle_index\n");
    for k in 0..=b.samples() {
        let t = b.t(k);
        for (j, s) in b.strands().iter().enumerate() {
            let z: Complex64 = s[k];
            csv.push_str(&format!("{t:.17e},{j},{:.17e},{:.17e},{:.17e},{}\n", z.re, z.im, radii[index[j]], index[j]));
        }
        if b.has_zero_strand() {
            csv.push_str(&format!("{t:.17e},{},0,0,0,{}\n", b.strands().len(), radii.len()));
        }
    }
    Ok(Output::Text(csv))
}
