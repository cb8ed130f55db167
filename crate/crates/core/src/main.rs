//! Command-line experiment runner: closed-form validation against the
//! simulation oracle, bit sweeps, the SE/EE tradeoff grid, and the
//! bit-allocation optimizers. All outputs are CSV (optionally mirrored as
//! JSON) and fully determined by (config, seed).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nafd::config::RunConfig;
use nafd::montecarlo::{
    bits_label, compare_closed_form, simulate_all, validation_csv, McConfig, ValidationRow,
};
use nafd::moop::{dqn_run, nsga2_run, trace_csv, Evaluator, ParetoFront};
use nafd::power::energy_efficiency;
use nafd::quantizer::BitAllocation;
use nafd::rates::{closed_form_report, CsiMode, IcMode, Scheme};
use nafd::scenario::{large_scale_fading, sample_geometry, ChannelStats, SystemConfig};
use nafd::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nafd",
    about = "Spectral/energy-efficiency analysis and ADC bit allocation for \
             network-assisted full-duplex distributed massive MIMO",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for geometry and simulation draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Beamforming scheme.
    #[arg(long, default_value = "mr")]
    scheme: Scheme,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mirror the CSV as JSON records.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed-form rates against the simulation oracle over a
    /// uniform-resolution sweep; fails if any point exceeds the tolerance.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Monte-Carlo trials per point (overrides the config).
        #[arg(long)]
        trials: Option<u64>,
        /// Downlink channel-knowledge mode.
        #[arg(long, default_value = "estimated")]
        csi: CsiMode,
        /// Uplink cross-link interference cancellation.
        #[arg(long, default_value = "on")]
        ic: IcMode,
        /// Lowest uniform resolution in the sweep.
        #[arg(long, default_value_t = 1)]
        b_min: u8,
        /// Highest uniform resolution in the sweep.
        #[arg(long, default_value_t = 10)]
        b_max: u8,
        /// Maximum tolerated relative error per point.
        #[arg(long, default_value_t = 0.10)]
        tol: f64,
    },
    /// Closed-form rates over a uniform-resolution sweep, all four
    /// detection modes.
    SweepBits {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        b_min: u8,
        #[arg(long, default_value_t = 12)]
        b_max: u8,
    },
    /// Objective pairs over the (antennas per RAU, uniform bits) grid.
    Tradeoff {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        b_min: u8,
        #[arg(long, default_value_t = 9)]
        b_max: u8,
        #[arg(long, default_value_t = 6)]
        m_min: usize,
        #[arg(long, default_value_t = 32)]
        m_max: usize,
        #[arg(long, default_value_t = 2)]
        m_step: usize,
    },
    /// Solve the constrained bi-objective bit-allocation problem.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Solver to run.
        #[arg(long, default_value = "nsga2")]
        method: Method,
        /// Where to write the training trace (DQN only).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum Method {
    Nsga2,
    Dqn,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn scenario_stats(cfg: &SystemConfig, seed: u64) -> Result<ChannelStats<f64>> {
    Ok(large_scale_fading(&sample_geometry(cfg, seed)?, cfg))
}

/// Writes to the chosen sink; `--json` mirrors the CSV as an array of
/// records (numbers and booleans typed, everything else as strings).
fn emit(common: &Common, csv: &str) -> Result<()> {
    let payload = if common.json { csv_to_json(csv)? } else { csv.to_string() };
    match &common.out {
        Some(path) => {
            std::fs::write(path, payload)?;
            Ok(())
        }
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn csv_to_json(csv: &str) -> Result<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty table".into()))?
        .split(',')
        .collect();
    let rows: Vec<serde_json::Value> = lines
        .map(|line| {
            let obj: serde_json::Map<String, serde_json::Value> = header
                .iter()
                .zip(line.split(','))
                .map(|(&k, v)| (k.to_string(), cell_to_json(v)))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows)
        .map_err(|e| Error::Parse(format!("json: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn cell_to_json(cell: &str) -> serde_json::Value {
    if let Ok(b) = cell.parse::<bool>() {
        return serde_json::Value::Bool(b);
    }
    if let Ok(i) = cell.parse::<i64>() {
        return serde_json::Value::from(i);
    }
    if let Ok(f) = cell.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(f) {
            return serde_json::Value::Number(n);
        }
    }
    serde_json::Value::String(cell.to_string())
}

fn check_range(b_min: u8, b_max: u8) -> Result<()> {
    if b_min < 1 || b_max < b_min || b_max > nafd::quantizer::B_MAX_DEFAULT {
        return Err(Error::InvalidArgument(format!(
            "bit range [{b_min}, {b_max}] must lie within [1, {}]",
            nafd::quantizer::B_MAX_DEFAULT
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate {
            common,
            trials,
            csi,
            ic,
            b_min,
            b_max,
            tol,
        } => {
            check_range(b_min, b_max)?;
            let run_cfg = load_config(&common.config)?;
            let cfg = &run_cfg.system;
            let stats = scenario_stats(cfg, common.seed)?;
            let mc = McConfig {
                trials: trials.unwrap_or(run_cfg.montecarlo.trials),
                seed: common.seed,
                ci_level: run_cfg.montecarlo.ci_level,
            };
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for b in b_min..=b_max {
                let bits = BitAllocation::uniform(cfg.n_ul, cfg.n_dl, cfg.k_dl, b);
                let sim = simulate_all(cfg, &stats, common.scheme, &bits, &mc)?;
                let closed =
                    closed_form_report::<f64>(&stats, cfg, common.scheme, csi, ic, &bits)?;
                let sim_dl = match csi {
                    CsiMode::Estimated => &sim.dl_est,
                    CsiMode::Statistical => &sim.dl_stat,
                };
                let sim_ul = match ic {
                    IcMode::On => &sim.ul_ic,
                    IcMode::Off => &sim.ul_noic,
                };
                for (user, (cf, mc_res)) in
                    closed.r_dl.iter().zip(sim_dl).enumerate()
                {
                    let cmp = compare_closed_form(*cf, mc_res, tol);
                    worst = worst.max(cmp.rel_err);
                    rows.push(ValidationRow {
                        scheme: common.scheme,
                        csi_mode: Some(csi),
                        ic_mode: None,
                        bits: bits_label(&bits),
                        user,
                        closed_form: *cf,
                        mc: *mc_res,
                        rel_err: cmp.rel_err,
                    });
                }
                for (user, (cf, mc_res)) in
                    closed.r_ul.iter().zip(sim_ul).enumerate()
                {
                    let cmp = compare_closed_form(*cf, mc_res, tol);
                    worst = worst.max(cmp.rel_err);
                    rows.push(ValidationRow {
                        scheme: common.scheme,
                        csi_mode: None,
                        ic_mode: Some(ic),
                        bits: bits_label(&bits),
                        user,
                        closed_form: *cf,
                        mc: *mc_res,
                        rel_err: cmp.rel_err,
                    });
                }
            }
            emit(&common, &validation_csv(&rows))?;
            if worst > tol {
                eprintln!("validation failed: worst relative error {worst:.4} > {tol}");
                Ok(ExitCode::FAILURE)
            } else {
                eprintln!("validation passed: worst relative error {worst:.4} <= {tol}");
                Ok(ExitCode::SUCCESS)
            }
        }

        Command::SweepBits {
            common,
            b_min,
            b_max,
        } => {
            check_range(b_min, b_max)?;
            let run_cfg = load_config(&common.config)?;
            let cfg = &run_cfg.system;
            let stats = scenario_stats(cfg, common.seed)?;
            let mut csv = String::from("scheme,csi_mode,ic_mode,bits,sum_se,ee\n");
            for b in b_min..=b_max {
                let bits = BitAllocation::uniform(cfg.n_ul, cfg.n_dl, cfg.k_dl, b);
                for csi in [CsiMode::Estimated, CsiMode::Statistical] {
                    for ic in [IcMode::On, IcMode::Off] {
                        let report = closed_form_report::<f64>(
                            &stats,
                            cfg,
                            common.scheme,
                            csi,
                            ic,
                            &bits,
                        )?;
                        let ee = energy_efficiency(
                            &report,
                            &bits,
                            cfg,
                            &run_cfg.power,
                            common.scheme,
                        );
                        csv.push_str(&format!(
                            "{},{},{},{},{:.6e},{:.6e}\n",
                            common.scheme, csi, ic, b, report.sum_se, ee
                        ));
                    }
                }
            }
            emit(&common, &csv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Tradeoff {
            common,
            b_min,
            b_max,
            m_min,
            m_max,
            m_step,
        } => {
            check_range(b_min, b_max)?;
            if m_min < 1 || m_step < 1 || m_max < m_min {
                return Err(Error::InvalidArgument(
                    "antenna range must be positive and increasing".into(),
                ));
            }
            let run_cfg = load_config(&common.config)?;
            let mut csv = String::from("m,bits,f1_se,f2_ee\n");
            for m in (m_min..=m_max).step_by(m_step) {
                let mut cfg = run_cfg.system.clone();
                cfg.m = m;
                cfg.validate()?;
                // geometry is antenna-independent, so the same seed keeps
                // node placement fixed across the sweep
                let stats = scenario_stats(&cfg, common.seed)?;
                for b in b_min..=b_max {
                    let bits = BitAllocation::uniform(cfg.n_ul, cfg.n_dl, cfg.k_dl, b);
                    let report = closed_form_report::<f64>(
                        &stats,
                        &cfg,
                        common.scheme,
                        CsiMode::Estimated,
                        IcMode::On,
                        &bits,
                    )?;
                    let ee =
                        energy_efficiency(&report, &bits, &cfg, &run_cfg.power, common.scheme);
                    csv.push_str(&format!(
                        "{},{},{:.6e},{:.6e}\n",
                        m, b, report.sum_se, ee
                    ));
                }
            }
            emit(&common, &csv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Optimize {
            common,
            method,
            trace_out,
        } => {
            let run_cfg = load_config(&common.config)?;
            let cfg = &run_cfg.system;
            let stats = scenario_stats(cfg, common.seed)?;
            let evaluator = Evaluator::new(cfg, &stats, common.scheme, &run_cfg.power);
            let constraints = run_cfg.constraints.resolve(&evaluator)?;
            eprintln!(
                "constraints: bit budget {}, rate floors {:.1e}/{:.1e} bits/s/Hz, power cap {}",
                constraints.b_budget,
                constraints.r_ul_min,
                constraints.r_dl_min,
                match constraints.p_cap {
                    Some(w) => format!("{w:.3} W"),
                    None => "none".into(),
                }
            );
            match method {
                Method::Nsga2 => {
                    let front =
                        nsga2_run(&evaluator, &constraints, &run_cfg.nsga2, common.seed)?;
                    if front.members.is_empty() {
                        eprintln!("no feasible solutions found");
                    } else {
                        eprintln!("front size: {}", front.members.len());
                    }
                    emit(&common, &front.to_csv())?;
                }
                Method::Dqn => {
                    let out = dqn_run(&evaluator, &constraints, &run_cfg.dqn, common.seed)?;
                    let front = ParetoFront {
                        members: vec![out.best.clone()],
                    };
                    eprintln!(
                        "best reward {:.4}, feasible: {}",
                        out.best_reward, out.best.feasible
                    );
                    emit(&common, &front.to_csv())?;
                    if let Some(path) = trace_out {
                        std::fs::write(path, trace_csv(&out.trace))?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
