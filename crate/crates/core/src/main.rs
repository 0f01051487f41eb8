//! `mobsamp`: command-line front end over scenario files.
//!
//! Exit status: 0 on success, 2 on a schema or usage error, 3 on a module
//! error. Verdicts are printed as one JSON line on standard output.

use clap::{Args, Parser, Subcommand};
use mobsamp::scenario::{self, RunError, SchemaError};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mobsamp", version, about = "Stable-sampling verdicts for planar trajectory families")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// JSON-valued flags take inline JSON (starting with `{`) or a file path.
#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        /// Directory for the CSV files of emit scenarios.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exact stable-sampling verdict, optionally transferred to Paley–Wiener.
    Decide {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        tol: Option<f64>,
        /// Transfer the verdict to (1∓ε)Ω.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        /// Ball radius for the length conditions of the transfer.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Numerical corroboration on a periodized grid.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: u64,
        /// Adversarial search iterations (0 skips the search).
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Lower uniform density and separation of a discrete set.
    Density {
        #[arg(long)]
        set: String,
        /// Also report θ(t), the count in the open disk of this radius.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Uniqueness threshold for lines, dilated or translated circles.
    Uniqueness {
        #[arg(long)]
        family: String,
        #[arg(long = "type-A")]
        type_a: f64,
        /// Counting slope B, or `inf`.
        #[arg(long = "slope-B", conflicts_with = "set")]
        slope_b: Option<String>,
        /// Discrete set whose counting slope gives B.
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write plot data as CSV.
    ///
    /// trajectory.csv: x,y,component_id,arclength_param (one row per path
    /// sample); spectrum.csv, difference.csv: x,y outlines of Ω and Ω−Ω;
    /// profile.csv: component_id,arclength_param,magnitude of the seeded
    /// random field along the path.
    Emit {
        #[arg(long)]
        trajectory: String,
        #[arg(long)]
        spectrum: Option<String>,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    spectrum: String,
    #[arg(long)]
    trajectory: String,
}

#[derive(Args)]
struct Grid {
    /// Grid size N (power of two).
    #[arg(long = "grid")]
    n: Option<usize>,
    /// Torus period L.
    #[arg(long = "period")]
    period: Option<f64>,
    /// Path sampling step (default L/N).
    #[arg(long)]
    eta: Option<f64>,
}

fn load_json(field: &str, arg: &str) -> Result<Value, SchemaError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| SchemaError {
            field: field.into(),
            message: format!("cannot read {arg}: {e}"),
        })?
    };
    serde_json::from_str(&text).map_err(|e| SchemaError {
        field: field.into(),
        message: e.to_string(),
    })
}

struct Doc(Map<String, Value>);

impl Doc {
    fn new(task: &str) -> Self {
        let mut m = Map::new();
        m.insert("task".into(), task.into());
        Doc(m)
    }

    fn set(&mut self, k: &str, v: impl Into<Value>) {
        self.0.insert(k.into(), v.into());
    }

    fn opt<T: Into<Value>>(&mut self, k: &str, v: Option<T>) {
        if let Some(v) = v {
            self.set(k, v);
        }
    }

    fn json(&mut self, k: &str, arg: Option<&str>) -> Result<(), SchemaError> {
        if let Some(a) = arg {
            let v = load_json(k, a)?;
            self.set(k, v);
        }
        Ok(())
    }

    fn grid(&mut self, g: &Grid) {
        self.opt("N", g.n);
        self.opt("L", g.period);
        self.opt("eta", g.eta);
    }
}

fn build(cmd: &Cmd) -> Result<(Value, PathBuf), SchemaError> {
    let here = PathBuf::from(".");
    let (doc, out) = match cmd {
        Cmd::Run { scenario, out } => return Ok((load_json("scenario", &scenario.to_string_lossy())?, out.clone())),
        Cmd::Decide {
            inputs,
            tol,
            epsilon,
            p,
            radius,
        } => {
            let mut d = Doc::new("decide");
            d.json("spectrum", Some(&inputs.spectrum))?;
            d.json("trajectory", Some(&inputs.trajectory))?;
            d.opt("tol", *tol);
            d.opt("epsilon", *epsilon);
            d.opt("p", *p);
            d.opt("radius", *radius);
            (d, here)
        }
        Cmd::Verify {
            inputs,
            grid,
            trials,
            seed,
            iters,
        } => {
            let mut d = Doc::new("verify");
            d.json("spectrum", Some(&inputs.spectrum))?;
            d.json("trajectory", Some(&inputs.trajectory))?;
            d.grid(grid);
            d.opt("trials", *trials);
            d.set("seed", *seed);
            d.opt("iters", *iters);
            (d, here)
        }
        Cmd::Density { set, radius } => {
            let mut d = Doc::new("density");
            d.json("set", Some(set))?;
            d.opt("radius", *radius);
            (d, here)
        }
        Cmd::Uniqueness {
            family,
            type_a,
            slope_b,
            set,
            samples,
            seed,
        } => {
            let mut d = Doc::new("uniqueness");
            d.set("family", family.as_str());
            d.set("type_A", *type_a);
            if let Some(b) = slope_b {
                let v = match b.as_str() {
                    "inf" | "infinity" => Value::from("inf"),
                    s => Value::from(s.parse::<f64>().map_err(|e| SchemaError {
                        field: "slope_B".into(),
                        message: e.to_string(),
                    })?),
                };
                d.set("slope_B", v);
            }
            d.json("set", set.as_deref())?;
            d.opt("samples", *samples);
            d.opt("seed", *seed);
            (d, here)
        }
        Cmd::Emit {
            trajectory,
            spectrum,
            grid,
            seed,
            out,
        } => {
            let mut d = Doc::new("emit");
            d.json("trajectory", Some(trajectory))?;
            d.json("spectrum", spectrum.as_deref())?;
            d.grid(grid);
            d.opt("seed", *seed);
            (d, out.clone())
        }
    };
    Ok((Value::Object(doc.0), out))
}

fn execute(cmd: &Cmd) -> Result<String, RunError> {
    let (doc, out) = build(cmd)?;
    let s = scenario::parse_scenario_value(doc)?;
    let report = scenario::run(&s, Path::new(&out))?;
    Ok(scenario::to_json(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.cmd) {
        Ok(json) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
