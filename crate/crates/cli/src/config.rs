//! Flat `key = value` run configuration with '#' comments, strict key
//! catalog, and validated defaults. Every omitted key falls back to the
//! default experiment configuration, so an empty file is a valid config.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use pvi_core::assembly::{ProblemData, Profile};
use pvi_core::control::OptParams;
use pvi_core::lab::LabConfig;
use pvi_core::state::NewtonParams;

/// Parsed and validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub t_final: f64,
    pub steps: usize,
    pub g: Profile,
    pub b: Profile,
    pub u_b: Profile,
    pub q: f64,
    pub cost_m: f64,
    pub eps: f64,
    pub tol_newton: f64,
    pub lambda1: f64,
    pub opt_tol: f64,
    pub opt_max_iters: usize,
    pub h_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub output_dir: String,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nx: 8,
            ny: 8,
            t_final: 1.0,
            steps: 16,
            g: Profile::Const(1.0),
            b: Profile::Const(0.0),
            u_b: Profile::Const(0.0),
            q: 0.1,
            cost_m: 1.0,
            eps: 1e-2,
            tol_newton: 1e-10,
            lambda1: 1.0,
            opt_tol: 1e-8,
            opt_max_iters: 500,
            h_list: vec![1.0, 10.0, 100.0, 1000.0],
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            output_dir: "out".into(),
            seed: 42,
        }
    }
}

pub const KNOWN_KEYS: &[&str] = &[
    "mesh.nx",
    "mesh.ny",
    "time.T",
    "time.steps",
    "data.g",
    "data.b",
    "data.u_b",
    "data.q",
    "cost.M",
    "solver.eps",
    "solver.tol_newton",
    "solver.lambda1",
    "opt.tol",
    "opt.max_iters",
    "sweep.h_list",
    "sweep.eps_list",
    "output.dir",
    "seed",
];

fn parse_profile(value: &str) -> Result<Profile> {
    if value == "bump" {
        return Ok(Profile::Bump);
    }
    if let Some(rest) = value.strip_prefix("const:") {
        let v: f64 = rest
            .trim()
            .parse()
            .map_err(|_| anyhow!("malformed constant `{rest}`"))?;
        return Ok(Profile::Const(v));
    }
    let v: f64 = value
        .parse()
        .map_err(|_| anyhow!("expected a number, `const:<v>` or `bump`, got `{value}`"))?;
    Ok(Profile::Const(v))
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("malformed list entry `{s}`"))
        })
        .collect()
}

impl RunConfig {
    /// Parse the flat text format. Unknown keys, malformed values and
    /// violated invariants are errors naming the line and key.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{line}`", lineno + 1))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| anyhow!("line {}: key `{}`: {e}", lineno + 1, key.trim()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one `key=value` override (the `--set` mechanism).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mesh.nx" => self.nx = parse_positive_int(value)?,
            "mesh.ny" => self.ny = parse_positive_int(value)?,
            "time.T" => self.t_final = parse_f64(value)?,
            "time.steps" => self.steps = parse_positive_int(value)?,
            "data.g" => self.g = parse_profile(value)?,
            "data.b" => self.b = parse_profile(value)?,
            "data.u_b" => self.u_b = parse_profile(value)?,
            "data.q" => self.q = parse_f64(value)?,
            "cost.M" => self.cost_m = parse_f64(value)?,
            "solver.eps" => self.eps = parse_f64(value)?,
            "solver.tol_newton" => self.tol_newton = parse_f64(value)?,
            "solver.lambda1" => self.lambda1 = parse_f64(value)?,
            "opt.tol" => self.opt_tol = parse_f64(value)?,
            "opt.max_iters" => {
                self.opt_max_iters = value
                    .parse()
                    .map_err(|_| anyhow!("expected a nonnegative integer, got `{value}`"))?
            }
            "sweep.h_list" => self.h_list = parse_list(value)?,
            "sweep.eps_list" => self.eps_list = parse_list(value)?,
            "output.dir" => self.output_dir = value.to_string(),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| anyhow!("expected an unsigned integer, got `{value}`"))?
            }
            unknown => bail!(
                "unknown key `{unknown}` (known keys: {})",
                KNOWN_KEYS.join(", ")
            ),
        }
        Ok(())
    }

    /// All invariants of the data and the sweep lists.
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            bail!("mesh.nx and mesh.ny must be at least 1");
        }
        if !(self.q > 0.0) {
            bail!("data.q = {} violates the requirement q > 0", self.q);
        }
        if !(self.t_final > 0.0) {
            bail!("time.T = {} must be positive", self.t_final);
        }
        if self.steps == 0 {
            bail!("time.steps must be at least 1");
        }
        if !(self.cost_m > 0.0) {
            bail!("cost.M = {} must be positive", self.cost_m);
        }
        if !(self.eps > 0.0) {
            bail!("solver.eps = {} must be positive", self.eps);
        }
        if !(self.tol_newton > 0.0) {
            bail!("solver.tol_newton = {} must be positive", self.tol_newton);
        }
        if !(self.lambda1 > 0.0) {
            bail!("solver.lambda1 = {} must be positive", self.lambda1);
        }
        if !(self.opt_tol > 0.0) {
            bail!("opt.tol = {} must be positive", self.opt_tol);
        }
        if self.h_list.len() < 2
            || self.h_list.iter().any(|&h| h <= 0.0)
            || !self.h_list.windows(2).all(|w| w[1] > w[0])
        {
            bail!("sweep.h_list must be at least two strictly increasing positive values");
        }
        if self.eps_list.len() < 2
            || self.eps_list.iter().any(|&e| e <= 0.0)
            || !self.eps_list.windows(2).all(|w| w[1] < w[0])
        {
            bail!("sweep.eps_list must be at least two strictly decreasing positive values");
        }
        // compatibility of the initial state with the datum on the left edge
        for j in 0..=self.ny {
            let y = j as f64 / self.ny as f64;
            let ub = self.u_b.eval(0.0, y);
            let b = self.b.eval(0.0, y);
            if (ub - b).abs() > 1e-12 {
                bail!(
                    "data.u_b and data.b must agree on the datum edge; at (0,{y}) \
                     u_b={ub} but b={b}"
                );
            }
        }
        Ok(())
    }

    /// Canonical one-line echo of the full effective configuration, in the
    /// fixed key order of the catalog.
    pub fn canonical_echo(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "mesh.nx={} mesh.ny={} time.T={} time.steps={} data.g={} data.b={} data.u_b={} \
             data.q={} cost.M={} solver.eps={} solver.tol_newton={} solver.lambda1={} \
             opt.tol={} opt.max_iters={} sweep.h_list={} sweep.eps_list={} output.dir={} seed={}",
            self.nx,
            self.ny,
            self.t_final,
            self.steps,
            self.g,
            self.b,
            self.u_b,
            self.q,
            self.cost_m,
            self.eps,
            self.tol_newton,
            self.lambda1,
            self.opt_tol,
            self.opt_max_iters,
            join_list(&self.h_list),
            join_list(&self.eps_list),
            self.output_dir,
            self.seed,
        );
        s
    }

    pub fn problem_data(&self) -> ProblemData {
        ProblemData {
            g: self.g,
            b: self.b,
            u_b: self.u_b,
            q: self.q,
            t_final: self.t_final,
            n_steps: self.steps,
            m_reg: self.cost_m,
            eps: self.eps,
        }
    }

    pub fn lab_config(&self) -> LabConfig {
        LabConfig {
            nx: self.nx,
            ny: self.ny,
            data: self.problem_data(),
            newton: NewtonParams {
                tol: self.tol_newton,
                ..NewtonParams::default()
            },
            opt: OptParams {
                tol: self.opt_tol,
                max_iters: self.opt_max_iters,
                ..OptParams::default()
            },
            h_list: self.h_list.clone(),
            eps_list: self.eps_list.clone(),
            lambda1: self.lambda1,
            config_echo: self.canonical_echo(),
        }
    }
}

fn join_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_positive_int(value: &str) -> Result<usize> {
    let v: i64 = value
        .parse()
        .map_err(|_| anyhow!("expected an integer, got `{value}`"))?;
    if v < 1 {
        bail!("must be at least 1, got {v}");
    }
    Ok(v as usize)
}

fn parse_f64(value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| anyhow!("expected a number, got `{value}`"))
}
