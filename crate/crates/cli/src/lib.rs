//! `thermfuse` subcommands, callable in-process through [`run`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thermfuse_core::io::{read_frame, write_frame};
use thermfuse_core::metrics::{compare_against_stack, ProbePoint};
use thermfuse_core::optics::{
    airy_diameter_from_f_number, airy_diameter_from_geometry, depth_of_field_for,
};
use thermfuse_core::{
    fuse_pipeline, load_stack, preset, simulate_stack, FrameEncoding, FrameFormat, FusionConfig,
    MetricsReport, SceneSpec, StackManifest, ThermalImage, ZeroWeightPolicy, PRESET_NAMES,
};

#[derive(Debug, Parser)]
#[command(name = "thermfuse", version, about = "Thermal focal-stack fusion")]
struct Cli {
    /// Worker threads for per-frame work. Defaults to the available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse a focal stack into one all-in-focus image.
    Fuse {
        manifest: PathBuf,
        #[command(flatten)]
        fusion: FusionArgs,
        /// Fuse every frame instead of only those around activity peaks.
        #[arg(long)]
        no_preselect: bool,
        /// Output directory for the fused frame and selection.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare a fused image with a reference and print a JSON report.
    Metrics {
        reference: PathBuf,
        fused: PathBuf,
        /// JSON list of {x, y, true_temp} probe points.
        #[arg(long)]
        probes: Option<PathBuf>,
        /// Also score every frame of this stack against the reference.
        #[arg(long)]
        stack: Option<PathBuf>,
        /// Temperature range of .pgm inputs.
        #[arg(long, allow_hyphen_values = true)]
        t_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t_max: Option<f64>,
    },
    /// Print the max-activity curve as CSV.
    Curve {
        manifest: PathBuf,
        #[command(flatten)]
        fusion: FusionArgs,
    },
    /// Render a synthetic focal stack.
    Simulate {
        /// Scene description (JSON). Mutually exclusive with --preset.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        scene: Option<PathBuf>,
        /// Built-in scene, by name or set number 1-6.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Temperature range for pgm16 output. Defaults to a margin around
        /// the ground truth.
        #[arg(long, allow_hyphen_values = true)]
        t_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t_max: Option<f64>,
    },
    /// Diffraction-limited optics.
    Optics {
        #[command(subcommand)]
        which: OpticsCommand,
    },
}

#[derive(Debug, Subcommand)]
enum OpticsCommand {
    /// Airy disc diameter, in the units of the wavelength.
    Airy {
        #[arg(long)]
        lambda: f64,
        /// Lens to image distance. Needs --D.
        #[arg(long, requires = "aperture", conflicts_with = "n")]
        v: Option<f64>,
        /// Aperture diameter.
        #[arg(long = "D", id = "aperture")]
        aperture: Option<f64>,
        /// f-number.
        #[arg(long = "N", id = "n")]
        n: Option<f64>,
    },
    /// Depth of field D²/(4λ).
    Dof {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "D")]
        aperture: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Pgm16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ZeroPolicy {
    Uniform,
    Winner,
}

#[derive(Debug, Args)]
struct FusionArgs {
    /// Activity window side, odd.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    frames_per_peak: Option<usize>,
    /// Minimum peak separation, in frames.
    #[arg(long)]
    peak_sep: Option<usize>,
    /// Peak threshold as a fraction of the curve maximum.
    #[arg(long)]
    peak_thresh: Option<f64>,
    /// Weighting at pixels where every frame has zero activity.
    #[arg(long, value_enum)]
    zero_weight: Option<ZeroPolicy>,
}

impl FusionArgs {
    fn config(&self) -> Result<FusionConfig> {
        let d = FusionConfig::default();
        let cfg = FusionConfig {
            window: self.window.unwrap_or(d.window),
            frames_per_peak: self.frames_per_peak.unwrap_or(d.frames_per_peak),
            peak_min_separation: self.peak_sep.unwrap_or(d.peak_min_separation),
            peak_threshold_frac: self.peak_thresh.unwrap_or(d.peak_threshold_frac),
            zero_weight_policy: match self.zero_weight {
                None => d.zero_weight_policy,
                Some(ZeroPolicy::Uniform) => ZeroWeightPolicy::UniformFallback,
                Some(ZeroPolicy::Winner) => ZeroWeightPolicy::MaxActivityWinner,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Contents of the scene.json written next to a simulated stack.
#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub scene: SceneSpec,
    pub seed: u64,
    pub probes: Vec<ProbePoint>,
    pub ground_truth: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SceneInput {
    Record(Box<SimulationRecord>),
    Scene(Box<SceneSpec>),
}

/// Parses `args` (program name first) and runs the subcommand, writing any
/// textual result to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let mut text = Vec::new();
    match cli.jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| dispatch(cli.command, &mut text))?;
        }
        None => dispatch(cli.command, &mut text)?,
    }
    out.write_all(&text)?;
    Ok(())
}

fn dispatch(command: Command, out: &mut Vec<u8>) -> Result<()> {
    match command {
        Command::Fuse {
            manifest,
            fusion,
            no_preselect,
            out: dir,
        } => fuse(&manifest, &fusion.config()?, !no_preselect, &dir),
        Command::Metrics {
            reference,
            fused,
            probes,
            stack,
            t_min,
            t_max,
        } => {
            let range = t_min.zip(t_max);
            let reference = read_any(&reference, range)?;
            let fused = read_any(&fused, range)?;
            let probes: Option<Vec<ProbePoint>> = probes.map(|p| read_json(&p)).transpose()?;
            let mut report = MetricsReport::compute(&reference, &fused, probes.as_deref())?;
            if let Some(stack) = stack {
                let stack = load_stack(&stack)?;
                report.per_frame = compare_against_stack(&stack, &reference)?;
            }
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
            Ok(())
        }
        Command::Curve { manifest, fusion } => {
            let stack = load_stack(&manifest)?;
            let outcome = fuse_pipeline(&stack, &fusion.config()?, true)?;
            writeln!(out, "frame_index,max_activity,is_peak,is_selected")?;
            let sel = &outcome.selection;
            for (i, v) in outcome.curve.values().iter().enumerate() {
                let peak = sel.peak_indices.binary_search(&i).is_ok() as u8;
                let chosen = sel.selected_indices.binary_search(&i).is_ok() as u8;
                writeln!(out, "{i},{v},{peak},{chosen}")?;
            }
            Ok(())
        }
        Command::Simulate {
            scene,
            preset: name,
            seed,
            out: dir,
            format,
            t_min,
            t_max,
        } => {
            let scene = match (scene, name) {
                (Some(path), _) => match read_json::<SceneInput>(&path)? {
                    SceneInput::Record(r) => r.scene,
                    SceneInput::Scene(s) => *s,
                },
                (None, Some(name)) => preset(&name).with_context(|| {
                    format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", "))
                })?,
                (None, None) => bail!("give a scene file or --preset"),
            };
            simulate(&scene, seed, &dir, format, t_min.zip(t_max))
        }
        Command::Optics { which } => {
            let value = match which {
                OpticsCommand::Airy {
                    lambda,
                    v,
                    aperture,
                    n,
                } => match (v, aperture, n) {
                    (None, _, Some(n)) => airy_diameter_from_f_number(lambda, n)?,
                    (Some(v), Some(d), None) => airy_diameter_from_geometry(lambda, v, d)?,
                    _ => bail!("airy needs either --N or both --v and --D"),
                },
                OpticsCommand::Dof { lambda, aperture } => depth_of_field_for(aperture, lambda)?,
            };
            writeln!(out, "{}", significant(value, 12))?;
            Ok(())
        }
    }
}

/// `x` rounded to `digits` significant digits, printed in shortest form.
fn significant(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Reads a frame, choosing the codec from the extension.
fn read_any(path: &Path, range: Option<(f64, f64)>) -> Result<ThermalImage> {
    let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let encoding = if is_pgm {
        let (lo, hi) = range.context("pgm inputs need --t-min and --t-max")?;
        FrameEncoding::pgm16(lo, hi)?
    } else {
        FrameEncoding::Csv
    };
    Ok(read_frame(path, encoding)?)
}

fn fuse(manifest_path: &Path, cfg: &FusionConfig, preselect: bool, dir: &Path) -> Result<()> {
    let manifest = StackManifest::read(manifest_path)?;
    let encoding = manifest.encoding()?;
    let stack = load_stack(manifest_path)?;
    let outcome = fuse_pipeline(&stack, cfg, preselect)?;

    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let target = dir.join(format!("fused.{}", encoding.extension()));
    if stack.len() == 1 && outcome.fused == stack.frames()[0] {
        // Nothing was combined; keep the input's exact bytes.
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let source = base.join(&manifest.frames[0]);
        fs::copy(&source, &target).with_context(|| format!("copying {}", source.display()))?;
    } else {
        write_frame(&target, &outcome.fused, encoding)?;
    }
    write_json(&dir.join("selection.json"), &outcome.selection)
}

fn simulate(
    scene: &SceneSpec,
    seed: u64,
    dir: &Path,
    format: Format,
    range: Option<(f64, f64)>,
) -> Result<()> {
    let sim = simulate_stack(scene, seed)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let encoding = match format {
        Format::Csv => FrameEncoding::Csv,
        Format::Pgm16 => {
            let (lo, hi) = range.unwrap_or_else(|| {
                let gt = &sim.ground_truth;
                (gt.min_temp() - 5.0, gt.max_temp() + 5.0)
            });
            FrameEncoding::pgm16(lo, hi)?
        }
    };
    let mut names = Vec::with_capacity(sim.stack.len());
    for (i, frame) in sim.stack.frames().iter().enumerate() {
        let name = PathBuf::from(format!("frame_{i:03}.{}", encoding.extension()));
        write_frame(&dir.join(&name), frame, encoding)?;
        names.push(name);
    }
    let (t_min, t_max) = match encoding {
        FrameEncoding::Pgm16 { t_min, t_max } => (Some(t_min), Some(t_max)),
        FrameEncoding::Csv => (None, None),
    };
    let manifest = StackManifest {
        format: match format {
            Format::Csv => FrameFormat::Csv,
            Format::Pgm16 => FrameFormat::Pgm16,
        },
        frames: names,
        lens_positions: None,
        t_min,
        t_max,
    };
    manifest.write(&dir.join("manifest.json"))?;

    let gt = PathBuf::from("ground_truth.csv");
    write_frame(&dir.join(&gt), &sim.ground_truth, FrameEncoding::Csv)?;
    write_json(&dir.join("probes.json"), &sim.probes)?;
    let record = SimulationRecord {
        scene: scene.clone(),
        seed,
        probes: sim.probes,
        ground_truth: gt,
    };
    write_json(&dir.join("scene.json"), &record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capture(args: &[&str]) -> Result<String> {
        let mut out = Vec::new();
        run(std::iter::once("thermfuse").chain(args.iter().copied()), &mut out)?;
        Ok(String::from_utf8(out)?)
    }

    #[test]
    fn optics_values() {
        assert_eq!(capture(&["optics", "dof", "--lambda", "10e-6", "--D", "0.01"]).unwrap(), "2.5\n");
        let airy = capture(&["optics", "airy", "--lambda", "10e-6", "--N", "0.95"]).unwrap();
        assert_eq!(airy.trim().parse::<f64>().unwrap(), 2.318e-5);
        let geo = capture(&["optics", "airy", "--lambda", "1", "--v", "2", "--D", "4"]).unwrap();
        assert_eq!(geo.trim(), "1.22");
        assert!(capture(&["optics", "airy", "--lambda", "1", "--v", "2"]).is_err());
        assert!(capture(&["optics", "dof", "--lambda", "-1", "--D", "1"]).is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.1 + 0.2, 12), 0.3);
        assert_eq!(significant(-1234.56789, 4), -1235.0);
    }

    #[test]
    fn bad_flags_are_rejected() {
        assert!(capture(&["fuse"]).is_err());
        assert!(capture(&["--jobs", "0", "optics", "dof", "--lambda", "1", "--D", "1"]).is_err());
        assert!(capture(&["simulate", "--preset", "9", "--out", "x"]).is_err());
    }

    #[test]
    fn fuse_round_trip_on_small_stack() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let frames: Vec<ThermalImage> = (0..3)
            .map(|k| ThermalImage::from_fn(6, 5, |x, y| 20.0 + ((x * 7 + y * 3 + k) % 5) as f64).unwrap())
            .collect();
        let mut names = Vec::new();
        for (i, f) in frames.iter().enumerate() {
            let name = PathBuf::from(format!("f{i}.csv"));
            write_frame(&d.join(&name), f, FrameEncoding::Csv).unwrap();
            names.push(name);
        }
        let m = StackManifest {
            format: FrameFormat::Csv,
            frames: names,
            lens_positions: None,
            t_min: None,
            t_max: None,
        };
        let mp = d.join("m.json");
        m.write(&mp).unwrap();
        let mp = mp.to_str().unwrap();
        let outdir = d.join("out");
        capture(&["fuse", mp, "--window", "3", "--out", outdir.to_str().unwrap()]).unwrap();
        let fused = read_frame(&outdir.join("fused.csv"), FrameEncoding::Csv).unwrap();
        assert_eq!(fused.dims(), (6, 5));
        let selection: serde_json::Value = read_json(&outdir.join("selection.json")).unwrap();
        let curve = capture(&["curve", mp, "--window", "3"]).unwrap();
        let selected: Vec<u64> = curve
            .lines()
            .skip(1)
            .filter(|l| l.ends_with(",1"))
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        let from_json: Vec<u64> = selection["selected_indices"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        assert_eq!(selected, from_json);
    }
}
