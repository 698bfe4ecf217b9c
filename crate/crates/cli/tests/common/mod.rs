#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_micz-lab");

pub fn run_bin(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("MICZ_LAB_OUT");
    if let Some(d) = out_env {
        c.env("MICZ_LAB_OUT", d);
    }
    c.output().expect("binary runs")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Couplings with every deformation switched on; bounded orbits exist for the states below.
pub fn orbit_params(curvature: &str) -> String {
    format!("omega = 1.2\ndelta_omega_sq = 0.05\neps_el = 0.02\nR0 = 1.3\ncurvature = \"{curvature}\"\ngamma = 0.9\ns = 0.7\n")
}

pub fn bound_state(system: &str) -> &'static str {
    match system {
        "osc-iso" | "osc-aniso" => "[-0.0975, -0.4196, 0.0966, -0.2807, -0.2163, 0.2106, -0.0389, -0.3473]",
        "higgs" | "higgs-aniso" => "[-0.0585, -0.2518, 0.0579, -0.1684, -0.2163, 0.2106, -0.0389, -0.3473]",
        "micz-flat" | "micz-sphere" => "[-0.1463, -0.6294, 0.1448, -0.2807, -0.2163, 0.2106]",
        "micz-pseudo" => "[-0.3301, -0.1407, -0.0177, -0.1027, -0.4863, -0.4511]",
        _ => panic!("no bound state for {system}"),
    }
}

/// Rows of a CSV as numbers, header separately.
pub fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}
