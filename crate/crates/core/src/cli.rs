//! The `horonecklace` command line.
//!
//! Exit codes: 0 when the command succeeded and every check passed, 1 when a
//! check failed, 2 for usage, input or schema errors.

use std::f64::consts::{FRAC_PI_3, TAU};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::family::{certificate_angle_sum, classify_solution, generate_family, FamilyParam};
use crate::geom::Tolerances;
use crate::io::{load, save, ConfigDocument, IoError, Metadata};
use crate::necklace::{encircles, validate_with_eyes};
use crate::render::{render_svg, RenderOptions};
use crate::search::{search_necklace, EyeGap, FeasibilitySpec, SearchOptions};
use crate::two_eyes::{alpha_beta, equality_case, improve_to_equality, TwoEyesConfig};

/// Slack above which a searched configuration counts as a necklace.
pub const FEASIBLE_SLACK: f64 = -1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "horonecklace",
    version,
    about = "Horoball necklaces linking two full-sized eyes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a necklace document: ties, overlaps, linking, and the angle
    /// certificate for eight beads.
    Verify {
        /// Document path, or `-` for stdin.
        #[arg(default_value = "-")]
        file: String,
    },
    /// Write a member of the eight-bead family.
    Generate {
        /// Family parameter in [pi/3, 2pi/3]; accepts decimals or forms like `pi/3`, `2pi/3`.
        #[arg(long, allow_negative_numbers = true, value_parser = parse_angle)]
        theta: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report the two-eyes angles of a document with exactly two beads.
    TwoEyes {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Search for a k-bead necklace around two eyes.
    Search {
        /// Number of beads.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        /// Lower bound on the distance between eye centers.
        #[arg(long, default_value_t = 1.0)]
        gap_min: f64,
        /// Upper bound; equal bounds fix the gap.
        #[arg(long, default_value_t = 2.0)]
        gap_max: f64,
        #[arg(short, long, default_value = "search_best.json")]
        output: PathBuf,
    },
    /// Draw a document as SVG.
    Render {
        #[arg(default_value = "-")]
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Pixels per model unit.
        #[arg(long, default_value_t = 160.0)]
        scale: f64,
        #[arg(long)]
        no_ties: bool,
        #[arg(long)]
        no_strip: bool,
        #[arg(long)]
        no_labels: bool,
    },
    /// Run the improvement moves on a two-bead document and print the trace.
    Improve {
        #[arg(default_value = "-")]
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Parses a decimal or a multiple of pi such as `pi/2`, `2pi/3`, `0.5*pi`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let bad = || format!("cannot read angle `{text}`");
    let Some((coef, rest)) = t.split_once("pi") else {
        return t.parse().map_err(|_| bad());
    };
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let coef: f64 = match coef {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse().map_err(|_| bad())?,
    };
    let div: f64 = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?,
    };
    Ok(coef * std::f64::consts::PI / div)
}

/// Fixed twelve decimals in the ordinary range, scientific notation with
/// twelve significant digits outside it.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e7).contains(&x.abs()) {
        format!("{x:.12}")
    } else if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

enum Failure {
    Check,
    Input(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Outcome {
    let tol = Tolerances::from_env();
    match cmd {
        Command::Verify { file } => verify(&load(&file)?, &tol, out),
        Command::Generate { theta, output } => generate(theta, output, out),
        Command::TwoEyes { file } => two_eyes(&load(&file)?, &tol, out),
        Command::Search {
            k,
            seed,
            restarts,
            gap_min,
            gap_max,
            output,
        } => search(k, seed, restarts, (gap_min, gap_max), &output, &tol, out),
        Command::Render {
            file,
            output,
            scale,
            no_ties,
            no_strip,
            no_labels,
        } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Failure::Input(format!(
                    "scale must be positive, got {scale}"
                )));
            }
            let opts = RenderOptions {
                scale,
                draw_ties: !no_ties,
                draw_strip: !no_strip,
                labels: !no_labels,
            };
            let svg = render_svg(&load(&file)?, &opts);
            emit(&svg, output.as_ref(), out)
        }
        Command::Improve { file, output } => improve(&load(&file)?, output, &tol, out),
    }
}

fn emit(text: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(e.to_string())),
    }
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Failure::Input(e.to_string()))?
    };
}

fn verify(doc: &ConfigDocument, tol: &Tolerances, out: &mut dyn Write) -> Outcome {
    let eyes = doc.eye_pair(tol)?;
    let n = doc.necklace()?;
    let report = validate_with_eyes(&n, &eyes, tol);
    say!(out, "beads: {}", n.len());
    say!(
        out,
        "max tie residual: {}",
        fmt_num(report.max_tie_residual)
    );
    say!(out, "min pair slack: {}", fmt_num(report.min_pair_slack));
    say!(
        out,
        "max height excess: {}",
        fmt_num(report.max_height_excess)
    );
    if let Some(e) = &report.eyes {
        say!(out, "min eye slack: {}", fmt_num(e.min_eye_slack));
    }
    let mut pass = report.ok;
    say!(out, "valid: {}", report.ok);
    let linked = encircles(&n, &eyes, tol).unwrap_or(false);
    say!(out, "encircles: {linked}");
    pass &= linked;
    if n.len() == 8 && pass {
        match certificate_angle_sum(&n, &eyes, tol) {
            Ok(cert) => {
                let labels = ["alpha + beta", "alpha' + beta'"];
                for (i, t) in cert.terms.iter().enumerate() {
                    let name = labels
                        .get(i)
                        .map_or_else(|| format!("visual angle {}", i - 1), |s| s.to_string());
                    say!(out, "certificate {name}: {}", fmt_num(*t));
                }
                say!(out, "certificate total: {}", fmt_num(cert.total));
                let tight = (cert.total - TAU).abs() <= (8.0 * tol.angle_tol).max(1e-8)
                    && cert.terms.iter().all(|t| *t <= FRAC_PI_3 + tol.angle_tol);
                say!(
                    out,
                    "certificate: {}",
                    if tight { "tight" } else { "violated" }
                );
                pass &= tight;
            }
            Err(e) => {
                say!(out, "certificate: unavailable ({e})");
                pass = false;
            }
        }
    }
    say!(out, "verdict: {}", if pass { "pass" } else { "fail" });
    if pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn generate(theta: f64, output: Option<PathBuf>, out: &mut dyn Write) -> Outcome {
    let param = FamilyParam::new(theta).map_err(|e| Failure::Input(e.to_string()))?;
    let (n, eyes) = generate_family(param);
    let meta = Metadata {
        label: Some("family".into()),
        theta: Some(theta),
    };
    let doc = ConfigDocument::from_parts(n.beads(), &eyes, Some(meta));
    emit(&doc.to_json(), output.as_ref(), out)
}

fn two_eyes_config(doc: &ConfigDocument, tol: &Tolerances) -> Result<TwoEyesConfig, Failure> {
    if doc.beads.len() != 2 {
        return Err(Failure::Input(format!(
            "expected exactly 2 beads, found {}",
            doc.beads.len()
        )));
    }
    let beads = doc.horoballs()?;
    Ok(TwoEyesConfig::new(doc.eye_pair(tol)?, beads[0], beads[1]))
}

fn two_eyes(doc: &ConfigDocument, tol: &Tolerances, out: &mut dyn Write) -> Outcome {
    let cfg = two_eyes_config(doc, tol)?;
    match alpha_beta(&cfg, tol) {
        Ok(d) => {
            say!(out, "alpha: {}", fmt_num(d.alpha));
            say!(out, "beta: {}", fmt_num(d.beta));
            say!(out, "alpha + beta: {}", fmt_num(d.sum));
            say!(out, "psi: {}", fmt_num(d.psi));
            say!(out, "phi: {}", fmt_num(d.phi));
            let eq = equality_case(&cfg, tol.tangency_tol);
            say!(out, "equality case: {}", eq.ok);
            let bound = d.sum <= FRAC_PI_3 + tol.angle_tol;
            say!(out, "bound alpha + beta <= pi/3: {}", bound);
            if bound {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Err(e) => {
            say!(out, "hypotheses: {e}");
            Err(Failure::Check)
        }
    }
}

fn search(
    k: usize,
    seed: u64,
    restarts: usize,
    (gap_min, gap_max): (f64, f64),
    output: &PathBuf,
    tol: &Tolerances,
    out: &mut dyn Write,
) -> Outcome {
    let gap = if gap_min == gap_max {
        EyeGap::Fixed(gap_min)
    } else {
        EyeGap::Free {
            min: gap_min,
            max: gap_max,
        }
    };
    let spec = FeasibilitySpec::new(k, gap).map_err(|e| Failure::Input(e.to_string()))?;
    let result = search_necklace(&spec, &SearchOptions::new(seed, restarts))
        .map_err(|e| Failure::Input(e.to_string()))?;
    let (n, eyes) = &result.best_config;
    say!(out, "k: {k}");
    say!(out, "seed: {seed}");
    say!(out, "restarts: {restarts}");
    say!(out, "best restart: {}", result.best_restart);
    say!(out, "best slack: {}", fmt_num(result.best_slack));
    say!(out, "eye gap: {}", fmt_num(eyes.gap()));
    let feasible = result.best_slack >= FEASIBLE_SLACK;
    if k == 8 && feasible {
        let c = classify_solution(n, eyes, 1e-3);
        say!(out, "in family: {}", c.in_family);
        if let Some(t) = c.theta {
            say!(out, "theta: {}", fmt_num(t));
        }
    }
    let meta = Metadata {
        label: Some(format!("search k={k} seed={seed}")),
        theta: None,
    };
    save(
        &ConfigDocument::from_parts(n.beads(), eyes, Some(meta)),
        output,
    )?;
    say!(out, "wrote: {}", output.display());
    let _ = tol;
    if feasible {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn improve(
    doc: &ConfigDocument,
    output: Option<PathBuf>,
    tol: &Tolerances,
    out: &mut dyn Write,
) -> Outcome {
    let cfg = two_eyes_config(doc, tol)?;
    match improve_to_equality(&cfg, tol) {
        Ok((end, trace)) => {
            for (i, m) in trace.iter().enumerate() {
                say!(
                    out,
                    "step {}: {:?} applied={} stop={:?} sum {} -> {}",
                    i + 1,
                    m.kind,
                    m.applied,
                    m.reason,
                    fmt_num(m.angle_sum_before),
                    fmt_num(m.angle_sum_after)
                );
            }
            let eq = equality_case(&end, 1e-6);
            say!(out, "equality case: {}", eq.ok);
            if let Some(p) = output {
                let fc = end.frame_coords();
                let doc = ConfigDocument::from_parts(&[fc.b1, fc.b2], end.eyes(), None);
                save(&doc, p)?;
            }
            if eq.ok {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Err(e) => {
            say!(out, "improvement failed: {e}");
            Err(Failure::Check)
        }
    }
}
