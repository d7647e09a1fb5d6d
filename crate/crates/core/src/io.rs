//! Trajectory and control exports: CSV for inspection and plotting, and a
//! compact binary dump for sweep post-processing. All writes go through a
//! temp-file-plus-rename so interrupted runs never leave truncated files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::assembly::AssembledOperators;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::state::{BoundaryControl, StateTrajectory};

/// Magic bytes of the binary trajectory dump.
pub const TRAJECTORY_MAGIC: &[u8; 4] = b"VIST";
pub const TRAJECTORY_VERSION: u32 = 1;

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV of a trajectory: one row per (time level, node).
pub fn trajectory_csv(traj: &StateTrajectory, mesh: &Mesh, config_echo: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config: {config_echo}");
    let _ = writeln!(out, "time_level,node_index,x,y,u_value");
    for (level, u) in traj.u.iter().enumerate() {
        for (node, &value) in u.iter().enumerate() {
            let [x, y] = mesh.nodes[node];
            let _ = writeln!(out, "{level},{node},{x},{y},{value}");
        }
    }
    out
}

/// CSV of a control: one row per (time level, Γ₃ node). Levels start at 1.
pub fn control_csv(
    control: &BoundaryControl,
    mesh: &Mesh,
    ops: &AssembledOperators,
    config_echo: &str,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config: {config_echo}");
    let _ = writeln!(out, "time_level,node_index,x,y,f_value");
    for (step, values) in control.values.iter().enumerate() {
        for (&node, &value) in ops.gamma3.nodes.iter().zip(values) {
            let [x, y] = mesh.nodes[node];
            let _ = writeln!(out, "{},{node},{x},{y},{value}", step + 1);
        }
    }
    out
}

/// Binary dump: magic, version, (n_levels, n_nodes) dims, then row-major
/// little-endian doubles, level-major.
pub fn trajectory_binary(traj: &StateTrajectory) -> Vec<u8> {
    let n_levels = traj.u.len() as u32;
    let n_nodes = traj.u.first().map(|u| u.len()).unwrap_or(0) as u32;
    let mut out = Vec::with_capacity(16 + traj.u.len() * n_nodes as usize * 8);
    out.extend_from_slice(TRAJECTORY_MAGIC);
    out.extend_from_slice(&TRAJECTORY_VERSION.to_le_bytes());
    out.extend_from_slice(&n_levels.to_le_bytes());
    out.extend_from_slice(&n_nodes.to_le_bytes());
    for level in &traj.u {
        for &v in level {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Parse a binary dump back into per-level nodal vectors.
pub fn read_trajectory_binary(bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    if bytes.len() < 16 || &bytes[0..4] != TRAJECTORY_MAGIC {
        return Err(Error::Mismatch("not a trajectory dump".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != TRAJECTORY_VERSION {
        return Err(Error::Mismatch(format!("unsupported dump version {version}")));
    }
    let n_levels = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n_nodes = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = 16 + n_levels * n_nodes * 8;
    if bytes.len() != expected {
        return Err(Error::Mismatch(format!(
            "dump length {} does not match dims {}x{}",
            bytes.len(),
            n_levels,
            n_nodes
        )));
    }
    let mut levels = Vec::with_capacity(n_levels);
    let mut offset = 16;
    for _ in 0..n_levels {
        let mut level = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            level.push(f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap()));
            offset += 8;
        }
        levels.push(level);
    }
    Ok(levels)
}
